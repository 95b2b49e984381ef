//! Deterministic generators for the bundled benchmark models.
//!
//! The three-state model used across the test suite is the canonical small
//! multichain MDP: s1 can move to either loop state, s2 and s3 each choose
//! between staying put and hopping to the other. Its edge set
//! (s1: a1->s2, a2->s3; s2: a1->s3, a2->s2; s3: a1->s2, a2->s3) is the
//! unique layout on which all of the bundled scenarios are simultaneously
//! consistent: the balanced point x(s2,a2)=x(s3,a2)=1/2 with y(s2,a1)=1/2 is
//! feasible for the shared constraint set, the relaxed program's optimum
//! admits x(s2,a2)=1/3, x(s3,a2)=2/3, y(s2,a1)=1/6, and the reward-shaped
//! scenario has the closed forms R*(eps) = 0.5 - 1.2 eps with extracted
//! policy components eps/(1-2 eps), (1-3 eps)/(1-2 eps) at s2 and 1/2, 1/2
//! at s3. Tests pin those values.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph;
use crate::mdp::{LabelSet, MarkovChain, Mdp, MdpBuilder, SpecKind, StationaryPolicy};

/// Reward/initial-distribution variants of the three-state model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeStateScenario {
    /// Unit reward on the two stay-actions, beta split over the loop states,
    /// no specifications.
    Lp0,
    /// Same rewards, beta concentrated on s2, and the pair of specs
    /// ({s2}, [0.5, 1]), ({s3}, [0.5, 1]) that pin the balanced LP point.
    Example1,
    /// The reward-shaped scenario behind the closed forms: R(s2,a2) = 0.5,
    /// R(s2,a1) = R(s3,a1) = R(s3,a2) = 0.1, beta on s1.
    Bounded,
}

pub fn three_state(scenario: ThreeStateScenario) -> Mdp {
    let mut b = MdpBuilder::with_indexed_states(3);
    let (r_s2a1, r_s2a2, r_s3a1, r_s3a2) = match scenario {
        ThreeStateScenario::Lp0 | ThreeStateScenario::Example1 => (0.0, 1.0, 0.0, 1.0),
        ThreeStateScenario::Bounded => (0.1, 0.5, 0.1, 0.1),
    };
    b.action(0, "a1", &[(1, 1.0, 0.0)]);
    b.action(0, "a2", &[(2, 1.0, 0.0)]);
    b.action(1, "a1", &[(2, 1.0, r_s2a1)]);
    b.action(1, "a2", &[(1, 1.0, r_s2a2)]);
    b.action(2, "a1", &[(1, 1.0, r_s3a1)]);
    b.action(2, "a2", &[(2, 1.0, r_s3a2)]);
    b.label("s2", LabelSet::States(vec![1]));
    b.label("s3", LabelSet::States(vec![2]));
    match scenario {
        ThreeStateScenario::Lp0 => {
            b.beta(vec![0.0, 0.5, 0.5]);
        }
        ThreeStateScenario::Example1 => {
            b.beta(vec![0.0, 1.0, 0.0]);
            b.spec("s2", 0.5, 1.0, SpecKind::SteadyState);
            b.spec("s3", 0.5, 1.0, SpecKind::SteadyState);
        }
        ThreeStateScenario::Bounded => {
            b.beta(vec![1.0, 0.0, 0.0]);
        }
    }
    b.build()
}

/// Eleven-state chain exercising every classification case: two transient
/// entry states, an unreachable 2-cycle (isolated and periodic), an
/// aperiodic 4-state class, and a periodic 3-ring.
pub fn mixed_classification_chain() -> MarkovChain {
    let rows: Vec<Vec<(usize, f64)>> = vec![
        vec![(1, 0.5), (4, 0.5)],
        vec![(4, 0.4), (8, 0.6)],
        vec![(3, 1.0)],
        vec![(2, 1.0)],
        vec![(4, 0.5), (5, 0.5)],
        vec![(6, 1.0)],
        vec![(7, 1.0)],
        vec![(4, 1.0)],
        vec![(9, 1.0)],
        vec![(10, 1.0)],
        vec![(8, 1.0)],
    ];
    let mut beta = vec![0.0; 11];
    beta[0] = 0.5;
    beta[1] = 0.5;
    MarkovChain {
        state_names: (1..=11).map(|i| format!("s{i}")).collect(),
        rows,
        beta,
    }
}

/// Nine-state multichain showcase with two TSCCs ({s3,s4,s5} and
/// {s6,s7,s8,s9}), an isolated entry state s1, a transient branch state s2,
/// unrewarding self-loops at s3, s5, s9, and unit rewards on s5's cycle
/// action and s8's forward action.
pub fn nine_state() -> Mdp {
    let mut b = MdpBuilder::with_indexed_states(9);
    b.action(0, "a1", &[(1, 1.0, 0.0)]);
    b.action(1, "a1", &[(2, 1.0, 0.0)]);
    b.action(1, "a2", &[(5, 1.0, 0.0)]);
    b.action(2, "a1", &[(3, 1.0, 0.0)]);
    b.action(2, "a2", &[(2, 1.0, 0.0)]);
    b.action(3, "a1", &[(4, 1.0, 0.0)]);
    b.action(3, "a2", &[(2, 1.0, 0.0)]);
    b.action(4, "a1", &[(2, 1.0, 0.0)]);
    b.action(4, "a2", &[(4, 1.0, 0.0)]);
    b.action(4, "a3", &[(3, 1.0, 1.0)]);
    b.action(5, "a1", &[(6, 1.0, 0.0)]);
    b.action(5, "a2", &[(7, 1.0, 0.0)]);
    b.action(6, "a1", &[(7, 1.0, 0.0)]);
    b.action(6, "a2", &[(5, 1.0, 0.0)]);
    b.action(7, "a1", &[(8, 1.0, 1.0)]);
    b.action(7, "a2", &[(5, 1.0, 0.0)]);
    b.action(8, "a1", &[(5, 1.0, 0.0)]);
    b.action(8, "a2", &[(8, 1.0, 0.0)]);
    b.action(8, "a3", &[(7, 1.0, 0.0)]);
    let mut beta = vec![1.0 / 8.0; 9];
    beta[0] = 0.0;
    b.beta(beta);
    b.build()
}

/// Fifteen-state cut-generation fixture: two transient feed states and three
/// TSCCs with nested two-cycle structure. Labels gold1 = {s4,s5},
/// gold2 = {s6,s7}, gold3 = {s10,s11} carry the specifications
/// [0.20, 1], [0.10, 1], [0.15, 1]. Rewards are tuned so the relaxed
/// program's support splits into disjoint cycles and the cut loop needs
/// exactly three solves.
pub fn goldmine() -> Mdp {
    let mut b = MdpBuilder::with_indexed_states(15);
    // Transient feeders.
    b.action(0, "a1", &[(1, 1.0, 0.0)]);
    b.action(1, "a1", &[(2, 1.0, 0.0)]);
    b.action(1, "a2", &[(5, 1.0, 0.0)]);
    b.action(1, "a3", &[(9, 1.0, 0.0)]);
    // First TSCC {s3,s4,s5}: rewarded 2-cycle on {s4,s5}, s3 on a side loop.
    b.action(2, "a1", &[(3, 1.0, 0.0)]);
    b.action(2, "a2", &[(2, 1.0, 0.0)]);
    b.action(3, "a1", &[(4, 1.0, 0.55)]);
    b.action(3, "a2", &[(2, 1.0, 0.0)]);
    b.action(4, "a1", &[(3, 1.0, 0.55)]);
    b.action(4, "a2", &[(4, 1.0, 0.0)]);
    // Second TSCC {s6..s9}: two 2-cycles joined one way each.
    b.action(5, "a1", &[(6, 1.0, 0.0)]);
    b.action(6, "a1", &[(5, 1.0, 0.0)]);
    b.action(6, "a2", &[(7, 1.0, 0.0)]);
    b.action(7, "a1", &[(8, 1.0, 0.48)]);
    b.action(8, "a1", &[(7, 1.0, 0.48)]);
    b.action(8, "a2", &[(5, 1.0, 0.0)]);
    // Third TSCC {s10..s15}: three 2-cycles; the middle one is a rewarded
    // pass-through between the spec cycle and the high-reward cycle.
    b.action(9, "a1", &[(10, 1.0, 0.0)]);
    b.action(10, "a1", &[(9, 1.0, 0.0)]);
    b.action(10, "a2", &[(11, 1.0, 0.0)]);
    b.action(11, "a1", &[(12, 1.0, 0.05)]);
    b.action(11, "a2", &[(13, 1.0, 0.0)]);
    b.action(12, "a1", &[(11, 1.0, 0.0)]);
    b.action(12, "a2", &[(9, 1.0, 0.05)]);
    b.action(13, "a1", &[(14, 1.0, 0.40)]);
    b.action(14, "a1", &[(13, 1.0, 0.40)]);
    b.action(14, "a2", &[(12, 1.0, 0.0)]);
    b.beta(vec![1.0 / 15.0; 15]);
    b.label("gold1", LabelSet::States(vec![3, 4]));
    b.label("gold2", LabelSet::States(vec![5, 6]));
    b.label("gold3", LabelSet::States(vec![9, 10]));
    b.spec("gold1", 0.20, 1.0, SpecKind::SteadyState);
    b.spec("gold2", 0.10, 1.0, SpecKind::SteadyState);
    b.spec("gold3", 0.15, 1.0, SpecKind::SteadyState);
    b.build()
}

const DIRS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)]; // up, down, left, right
const DIR_NAMES: [&str; 4] = ["up", "down", "left", "right"];

/// n x n icy grid split into a large upper island and two lower strip
/// islands (each n/4 rows tall), with one-way action-gated crossings from
/// the large island's bottom row (columns 1 and n/2+1) into the respective
/// island's top-left cell. Movement slips: 90% intended direction, 5% to
/// each perpendicular; blocked probability mass stays in place. Unit reward
/// on entering a fishing cell (bottom-right of each island). Default labels
/// and specifications: logs >= 0.25, canoes >= 0.05, fishing >= 0.1 per
/// island.
pub fn frozen_islands(n: usize) -> Result<Mdp> {
    if n < 4 || n % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "frozen islands grid size must be a multiple of 4, at least 4 (got {n})"
        )));
    }
    let idx = |r: usize, c: usize| r * n + c;
    // region 0: rows [0, n/2); region 1: [n/2, 3n/4); region 2: [3n/4, n).
    let region = |r: usize| {
        if r < n / 2 {
            0
        } else if r < n / 2 + n / 4 {
            1
        } else {
            2
        }
    };
    let island_top_left = [idx(n / 2, 0), idx(n / 2 + n / 4, 0)];
    let island_bottom_right = [idx(n / 2 + n / 4 - 1, n - 1), idx(n - 1, n - 1)];
    let crossings = [(n / 2 - 1, 1, 0), (n / 2 - 1, n / 2 + 1, 1)];

    let fish: Vec<usize> = island_bottom_right.to_vec();
    let mut b = MdpBuilder::new((1..=n * n).map(|i| format!("s{i}")).collect());

    for r in 0..n {
        for c in 0..n {
            let s = idx(r, c);
            for (d, &(dr, dc)) in DIRS.iter().enumerate() {
                if let Some(&(_, _, island)) = crossings.iter().find(|&&(cr, cc, _)| {
                    cr == r && cc == c && DIR_NAMES[d] == "down"
                }) {
                    let target = island_top_left[island];
                    let reward = if fish.contains(&target) { 1.0 } else { 0.0 };
                    b.action(s, DIR_NAMES[d], &[(target, 1.0, reward)]);
                    continue;
                }
                // Slip model: intended 0.9, perpendiculars 0.05 each.
                let perps: [(isize, isize); 2] = if dr != 0 { [(0, -1), (0, 1)] } else { [(-1, 0), (1, 0)] };
                let mut outcomes: Vec<(usize, f64, f64)> = Vec::with_capacity(3);
                let mut stay_mass = 0.0;
                for &(mr, mc, p) in
                    &[(dr, dc, 0.9), (perps[0].0, perps[0].1, 0.05), (perps[1].0, perps[1].1, 0.05)]
                {
                    let nr = r as isize + mr;
                    let nc = c as isize + mc;
                    let target = if nr >= 0
                        && nc >= 0
                        && (nr as usize) < n
                        && (nc as usize) < n
                        && region(nr as usize) == region(r)
                    {
                        idx(nr as usize, nc as usize)
                    } else {
                        s
                    };
                    if target == s {
                        stay_mass += p;
                    } else {
                        outcomes.push((target, p, if fish.contains(&target) { 1.0 } else { 0.0 }));
                    }
                }
                if stay_mass > 0.0 {
                    outcomes.push((s, stay_mass, if fish.contains(&s) { 1.0 } else { 0.0 }));
                }
                b.action(s, DIR_NAMES[d], &outcomes);
            }
        }
    }

    let mut beta = vec![0.0; n * n];
    for r in 0..n / 2 {
        for c in 0..n {
            beta[idx(r, c)] = 2.0 / (n * n) as f64;
        }
    }
    b.beta(beta);

    // Labels. For the 8x8 instance the log cells are the documented fixture
    // layout; larger grids place logs deterministically on every fourth cell.
    let island_cells = |island: usize| -> Vec<usize> {
        let rows = if island == 0 { n / 2..n / 2 + n / 4 } else { n / 2 + n / 4..n };
        rows.flat_map(|r| (0..n).map(move |c| idx(r, c))).collect()
    };
    for island in 0..2 {
        let cells = island_cells(island);
        let canoe = island_top_left[island];
        let fish_cell = island_bottom_right[island];
        let logs: Vec<usize> = if n == 8 {
            if island == 0 {
                vec![33, 35, 37, 42]
            } else {
                vec![51, 54, 56, 60]
            }
        } else {
            cells
                .iter()
                .enumerate()
                .filter(|&(i, &cell)| i % 4 == 1 && cell != canoe && cell != fish_cell)
                .map(|(_, &cell)| cell)
                .take(cells.len() / 4)
                .collect()
        };
        let tag = island + 1;
        b.label(&format!("log{tag}"), LabelSet::States(logs));
        b.label(&format!("canoe{tag}"), LabelSet::States(vec![canoe]));
        b.label(&format!("fish{tag}"), LabelSet::States(vec![fish_cell]));
        b.spec(&format!("log{tag}"), 0.25, 1.0, SpecKind::SteadyState);
        b.spec(&format!("canoe{tag}"), 0.05, 1.0, SpecKind::SteadyState);
        b.spec(&format!("fish{tag}"), 0.1, 1.0, SpecKind::SteadyState);
    }

    Ok(b.build())
}

/// The 8x8 frozen-islands instance augmented with resource labels on the
/// large island and transient specifications: tools >= 10, gas >= 12,
/// supplies >= 15 expected visits, all visits capped by `n_tr`.
pub fn frozen_islands_resources(n_tr: f64) -> Result<Mdp> {
    let mut mdp = frozen_islands(8)?;
    let tools = vec![6, 12, 22];
    let gas = vec![9, 15];
    let supplies = vec![1, 14, 28];
    mdp.labels.insert("tools".into(), LabelSet::States(tools));
    mdp.labels.insert("gas".into(), LabelSet::States(gas));
    mdp.labels.insert("supplies".into(), LabelSet::States(supplies));
    mdp.labels.insert("shore".into(), LabelSet::States((0..32).collect()));
    for (label, lo) in [("tools", 10.0), ("gas", 12.0), ("supplies", 15.0)] {
        mdp.specs.push(crate::mdp::Spec {
            label: label.into(),
            lo,
            hi: n_tr,
            kind: SpecKind::Transient,
        });
    }
    mdp.specs.push(crate::mdp::Spec {
        label: "shore".into(),
        lo: 0.0,
        hi: n_tr,
        kind: SpecKind::Transient,
    });
    Ok(mdp)
}

/// Hub state s0 with m fully connected cliques of n states each. Every
/// clique state has one deterministic action per other clique state; the
/// first adjacent pair in each clique pays unit reward in both directions.
/// Labels mark each clique's unrewarded states with specification [l, 1];
/// beta is uniform over all states.
pub fn toll_collector(m: usize, n: usize, l: f64) -> Result<Mdp> {
    if m < 1 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "toll collector needs m >= 1 cliques of n >= 2 states (got m={m}, n={n})"
        )));
    }
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::InvalidParameter(format!("spec lower bound {l} outside [0, 1]")));
    }
    let total = 1 + m * n;
    let mut names = vec!["s0".to_string()];
    for k in 1..=m {
        for j in 1..=n {
            names.push(format!("c{k}s{j}"));
        }
    }
    let mut b = MdpBuilder::new(names);
    let state = |k: usize, j: usize| 1 + k * n + j;

    for k in 0..m {
        b.action(0, &format!("enter{}", k + 1), &[(state(k, 0), 1.0, 0.0)]);
    }
    for k in 0..m {
        for j in 0..n {
            for jp in 0..n {
                if jp == j {
                    continue;
                }
                // The rewarded pair is (0, 1) in both directions.
                let reward = if (j == 0 && jp == 1) || (j == 1 && jp == 0) { 1.0 } else { 0.0 };
                b.action(state(k, j), &format!("go{}", jp + 1), &[(state(k, jp), 1.0, reward)]);
            }
        }
    }
    b.beta(vec![1.0 / total as f64; total]);
    for k in 0..m {
        let plain: Vec<usize> = (2..n).map(|j| state(k, j)).collect();
        let name = format!("nontoll{}", k + 1);
        b.label(&name, LabelSet::States(plain));
        b.spec(&name, l, 1.0, SpecKind::SteadyState);
    }
    Ok(b.build())
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer over the pair.
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// MDP built from a seeded directed Gaussian-partition digraph: cluster
/// sizes drawn from Normal(n/5, n/5) (variance n/5), intra-cluster edges
/// with probability `p_in`, inter-cluster with `p_out`, deterministic
/// transitions (one action per out-neighbor; sinks get a self-loop). Beta
/// is uniform over the states outside the closed SCCs (over everything if
/// none exist); the first action of every TSCC state pays unit reward; the
/// label `target` marks the largest TSCC's lowest state with specification
/// [0.05, 1].
pub fn random_partition_mdp(n: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Mdp> {
    if n < 5 {
        return Err(Error::InvalidParameter(format!("partition graphs need n >= 5 (got {n})")));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
        }
    }
    let mut last_err = Error::NoReachableTscc;
    for attempt in 0..100 {
        match try_partition_mdp(n, p_in, p_out, mix_seed(seed, attempt)) {
            Ok(mdp) => return Ok(mdp),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn try_partition_mdp(n: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Mdp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = n as f64 / 5.0;
    let normal = Normal::new(mean, mean.sqrt()).expect("valid normal parameters");

    // Cluster assignment: sizes rounded up to >= 1, truncated to fill n.
    let mut cluster_of = Vec::with_capacity(n);
    let mut cluster = 0usize;
    while cluster_of.len() < n {
        let raw: f64 = normal.sample(&mut rng);
        let size = (raw.round().max(1.0) as usize).min(n - cluster_of.len());
        for _ in 0..size {
            cluster_of.push(cluster);
        }
        cluster += 1;
    }

    // Directed edges.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = if cluster_of[u] == cluster_of[v] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                adj[u].push(v);
            }
        }
    }
    for (u, row) in adj.iter_mut().enumerate() {
        if row.is_empty() {
            row.push(u); // sink: absorb in place
        }
    }

    // Closed SCCs determine beta's support.
    let g = graph::Digraph::from_edges(
        n,
        adj.iter().enumerate().flat_map(|(u, row)| row.iter().map(move |&v| (u, v))),
    );
    let comps = graph::tarjan_sccs(&g);
    let comp_of = graph::component_map(n, &comps);
    let mut closed = vec![false; n];
    for (i, comp) in comps.iter().enumerate() {
        if graph::is_closed(&g, comp, &comp_of, i) {
            for &s in comp {
                closed[s] = true;
            }
        }
    }
    let outside: Vec<usize> = (0..n).filter(|&s| !closed[s]).collect();
    let mut beta = vec![0.0; n];
    if outside.is_empty() {
        beta.iter_mut().for_each(|b| *b = 1.0 / n as f64);
    } else {
        for &s in &outside {
            beta[s] = 1.0 / outside.len() as f64;
        }
    }

    let mut b = MdpBuilder::new((0..n).map(|i| format!("v{i}")).collect());
    for (u, row) in adj.iter().enumerate() {
        for (a, &v) in row.iter().enumerate() {
            b.action(u, &format!("a{}", a + 1), &[(v, 1.0, 0.0)]);
        }
    }
    b.beta(beta);
    let mut mdp = b.build();

    let cls = crate::classify::classify_mdp(&mdp)?;
    // Unit reward on the first action out of every TSCC state.
    for tscc in &cls.tsccs {
        for &s in tscc {
            for t in &mut mdp.transitions[s][0] {
                t.reward = 1.0;
            }
        }
    }
    let largest = cls
        .tsccs
        .iter()
        .max_by_key(|c| (c.len(), usize::MAX - c[0]))
        .expect("at least one TSCC");
    mdp.labels.insert("target".into(), LabelSet::States(vec![largest[0]]));
    mdp.specs.push(crate::mdp::Spec {
        label: "target".into(),
        lo: 0.05,
        hi: 1.0,
        kind: SpecKind::SteadyState,
    });
    mdp.require_valid()?;
    Ok(mdp)
}

/// Seeded random row-stochastic chain for property tests: each state gets
/// one to three successors with random weights; beta is a random point on
/// the simplex.
pub fn random_chain(n: usize, seed: u64) -> MarkovChain {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xC4A1));
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(1..=3usize.min(n));
        let mut targets = Vec::new();
        while targets.len() < k {
            let t = rng.gen_range(0..n);
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        rows.push(targets.into_iter().zip(weights).map(|(t, w)| (t, w / total)).collect());
    }
    let mut beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = beta.iter().sum();
    beta.iter_mut().for_each(|b| *b /= total);
    MarkovChain { state_names: (1..=n).map(|i| format!("s{i}")).collect(), rows, beta }
}

/// Seeded random sparse MDP for property tests.
pub fn random_mdp(n: usize, max_actions: usize, seed: u64) -> Mdp {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x3D9));
    let mut b = MdpBuilder::with_indexed_states(n);
    for s in 0..n {
        let n_a = rng.gen_range(1..=max_actions);
        for a in 0..n_a {
            let k = rng.gen_range(1..=2usize.min(n));
            let mut targets = Vec::new();
            while targets.len() < k {
                let t = rng.gen_range(0..n);
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let outcomes: Vec<(usize, f64, f64)> = targets
                .into_iter()
                .zip(weights)
                .map(|(t, w)| (t, w / total, if rng.gen_bool(0.3) { rng.gen_range(0.0..1.0) } else { 0.0 }))
                .collect();
            b.action(s, &format!("a{}", a + 1), &outcomes);
        }
    }
    let mut beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = beta.iter().sum();
    beta.iter_mut().for_each(|v| *v /= total);
    b.beta(beta);
    b.build()
}

/// Seeded random stationary policy; roughly half the rows are deterministic,
/// the rest fully mixed.
pub fn random_policy(mdp: &Mdp, seed: u64) -> StationaryPolicy {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x70C1));
    let rows = (0..mdp.n_states())
        .map(|s| {
            let k = mdp.n_actions(s);
            if rng.gen_bool(0.5) {
                let mut row = vec![0.0; k];
                row[rng.gen_range(0..k)] = 1.0;
                row
            } else {
                let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
                let total: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / total).collect()
            }
        })
        .collect();
    StationaryPolicy { rows }
}

/// View a chain as a single-action MDP (used by the CLI to serialize chain
/// fixtures in the common format).
pub fn chain_as_mdp(chain: &MarkovChain) -> Mdp {
    let mut b = MdpBuilder::new(chain.state_names.clone());
    for (s, row) in chain.rows.iter().enumerate() {
        let outcomes: Vec<(usize, f64, f64)> = row.iter().map(|&(t, p)| (t, p, 0.0)).collect();
        b.action(s, "a1", &outcomes);
    }
    b.beta(chain.beta.clone());
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_chain, classify_mdp};

    #[test]
    fn all_fixed_generators_validate() {
        for mdp in [
            three_state(ThreeStateScenario::Lp0),
            three_state(ThreeStateScenario::Example1),
            three_state(ThreeStateScenario::Bounded),
            nine_state(),
            goldmine(),
            frozen_islands(8).unwrap(),
            frozen_islands(16).unwrap(),
            frozen_islands_resources(200.0).unwrap(),
            toll_collector(3, 3, 0.0).unwrap(),
            toll_collector(3, 25, 0.05).unwrap(),
        ] {
            let report = mdp.validate();
            assert!(report.is_valid(), "{report}");
        }
        assert!(mixed_classification_chain().validate().is_valid());
    }

    #[test]
    fn three_state_scenarios_match_their_closed_data() {
        let lp0 = three_state(ThreeStateScenario::Lp0);
        assert_eq!(lp0.reward(1, 1), 1.0);
        assert_eq!(lp0.reward(2, 1), 1.0);
        assert_eq!(lp0.reward(1, 0), 0.0);
        assert_eq!(lp0.beta, vec![0.0, 0.5, 0.5]);

        let bounded = three_state(ThreeStateScenario::Bounded);
        assert_eq!(bounded.reward(1, 1), 0.5);
        assert_eq!(bounded.reward(1, 0), 0.1);
        assert_eq!(bounded.reward(2, 0), 0.1);
        assert_eq!(bounded.reward(2, 1), 0.1);

        let cls = classify_mdp(&bounded).unwrap();
        assert_eq!(cls.tsccs, vec![vec![1, 2]]);
    }

    #[test]
    fn mixed_chain_layout() {
        let chain = mixed_classification_chain();
        let cls = classify_chain(&chain);
        assert_eq!(cls.transient, vec![0, 1]);
        assert_eq!(cls.isolated, vec![vec![2, 3]]);
        assert_eq!(cls.tsccs.len(), 2);
    }

    #[test]
    fn nine_state_layout() {
        let mdp = nine_state();
        let cls = classify_mdp(&mdp).unwrap();
        assert_eq!(cls.tsccs, vec![vec![2, 3, 4], vec![5, 6, 7, 8]]);
        assert_eq!(cls.complement(), vec![0, 1]);
        assert_eq!(mdp.beta[0], 0.0);
        assert_eq!(mdp.beta[1], 0.125);
    }

    #[test]
    fn goldmine_layout() {
        let mdp = goldmine();
        let cls = classify_mdp(&mdp).unwrap();
        assert_eq!(cls.tsccs, vec![vec![2, 3, 4], vec![5, 6, 7, 8], vec![9, 10, 11, 12, 13, 14]]);
        assert_eq!(cls.complement(), vec![0, 1]);
        assert_eq!(mdp.specs.len(), 3);
    }

    #[test]
    fn frozen_islands_8_classification() {
        let mdp = frozen_islands(8).unwrap();
        assert_eq!(mdp.n_states(), 64);
        let cls = classify_mdp(&mdp).unwrap();
        assert_eq!(cls.tsccs.len(), 2);
        assert_eq!(cls.tsccs[0].len(), 16);
        assert_eq!(cls.tsccs[1].len(), 16);
        // The large island is exactly the complement.
        assert_eq!(cls.complement(), (0..32).collect::<Vec<_>>());
        // beta = 2/n^2 on the large island.
        assert!((mdp.beta[0] - 1.0 / 32.0).abs() < 1e-15);
        assert_eq!(mdp.beta[40], 0.0);
    }

    #[test]
    fn frozen_islands_8_labels_match_fixture() {
        let mdp = frozen_islands(8).unwrap();
        assert_eq!(mdp.labels["log1"], LabelSet::States(vec![33, 35, 37, 42]));
        assert_eq!(mdp.labels["log2"], LabelSet::States(vec![51, 54, 56, 60]));
        assert_eq!(mdp.labels["canoe1"], LabelSet::States(vec![32]));
        assert_eq!(mdp.labels["canoe2"], LabelSet::States(vec![48]));
        assert_eq!(mdp.labels["fish1"], LabelSet::States(vec![47]));
        assert_eq!(mdp.labels["fish2"], LabelSet::States(vec![63]));
        // Rewards: only transitions entering a fishing cell pay.
        for s in 0..64 {
            for a in 0..4 {
                for t in &mdp.transitions[s][a] {
                    assert_eq!(t.reward, if t.target == 47 || t.target == 63 { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn frozen_islands_rejects_bad_sizes() {
        assert!(frozen_islands(6).is_err());
        assert!(frozen_islands(2).is_err());
    }

    #[test]
    fn toll_collector_layout() {
        let mdp = toll_collector(3, 3, 0.0).unwrap();
        assert_eq!(mdp.n_states(), 10);
        let cls = classify_mdp(&mdp).unwrap();
        assert_eq!(cls.tsccs.len(), 3);
        assert!(cls.tsccs.iter().all(|c| c.len() == 3));
        assert_eq!(cls.complement(), vec![0]);

        let big = toll_collector(3, 25, 0.05).unwrap();
        assert_eq!(big.n_states(), 76);
        let cls = classify_mdp(&big).unwrap();
        assert_eq!(cls.tsccs.len(), 3);
        assert!(cls.tsccs.iter().all(|c| c.len() == 25));
    }

    #[test]
    fn partition_mdp_is_deterministic() {
        let a = random_partition_mdp(20, 0.9, 0.05, 11).unwrap();
        let b = random_partition_mdp(20, 0.9, 0.05, 11).unwrap();
        assert_eq!(a.state_names, b.state_names);
        assert_eq!(a.beta, b.beta);
        assert_eq!(format!("{:?}", a.transitions), format!("{:?}", b.transitions));
        let c = random_partition_mdp(20, 0.9, 0.05, 12).unwrap();
        assert_ne!(format!("{:?}", a.transitions), format!("{:?}", c.transitions));
    }

    #[test]
    fn partition_mdp_classifies() {
        for seed in 0..5 {
            let mdp = random_partition_mdp(20, 0.9, 0.05, seed).unwrap();
            let cls = classify_mdp(&mdp).unwrap();
            assert!(!cls.tsccs.is_empty());
        }
    }

    #[test]
    fn disconnected_clusters_still_classify() {
        let mdp = random_partition_mdp(20, 0.9, 0.0, 3).unwrap();
        let cls = classify_mdp(&mdp).unwrap();
        assert!(!cls.tsccs.is_empty());
    }
}
