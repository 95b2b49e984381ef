//! Graph-theoretic state classification: TSCCs, recurrent/transient/isolated
//! split, periodicity, and policy-class membership.

use crate::error::{Error, Result};
use crate::graph::{self, Digraph};
use crate::mdp::{MarkovChain, Mdp, StationaryPolicy};

/// Classification of a model's states.
///
/// `tsccs` are the closed SCCs of the transition graph reachable from the
/// support of beta, i.e. the terminal components the long-run play is
/// absorbed into. For Markov chains the remaining fields are populated:
/// `recurrent_classes` lists every closed SCC (reachable or not),
/// `transient` the reachable non-closed states, `isolated` the components
/// unreachable from the support of beta, and `periodicity` the gcd of cycle
/// lengths per recurrent class (informational only).
#[derive(Debug, Clone)]
pub struct StateClassification {
    pub n_states: usize,
    pub tsccs: Vec<Vec<usize>>,
    pub recurrent_classes: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
    pub isolated: Vec<Vec<usize>>,
    pub periodicity: Vec<usize>,
}

/// Three-way partition used by chain classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Member of a beta-reachable closed SCC.
    Recurrent,
    /// Reachable but not in a closed SCC: left with probability one.
    Transient,
    /// Unreachable from the support of beta: never visited.
    Isolated,
}

impl StateClassification {
    /// Union of the TSCCs.
    pub fn recurrent_union(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.tsccs.iter().flatten().copied().collect();
        r.sort_unstable();
        r
    }

    /// Complement of the TSCC union.
    pub fn complement(&self) -> Vec<usize> {
        let mut in_r = vec![false; self.n_states];
        for c in &self.tsccs {
            for &s in c {
                in_r[s] = true;
            }
        }
        (0..self.n_states).filter(|&s| !in_r[s]).collect()
    }

    pub fn is_in_tscc(&self, s: usize) -> bool {
        self.tsccs.iter().any(|c| c.contains(&s))
    }

    /// Index of the TSCC containing `s`, if any.
    pub fn tscc_of(&self, s: usize) -> Option<usize> {
        self.tsccs.iter().position(|c| c.contains(&s))
    }

    /// The partition kind of a state (meaningful for chain classifications).
    pub fn kind(&self, s: usize) -> StateKind {
        if self.isolated.iter().any(|c| c.contains(&s)) {
            StateKind::Isolated
        } else if self.is_in_tscc(s) {
            StateKind::Recurrent
        } else {
            StateKind::Transient
        }
    }
}

fn classify_graph(g: &Digraph, beta: &[f64], chain_detail: bool) -> StateClassification {
    let n = g.len();
    let comps = graph::tarjan_sccs(g);
    let comp_of = graph::component_map(n, &comps);
    let support: Vec<usize> = (0..n).filter(|&s| beta[s] > 0.0).collect();
    let reachable = g.reachable_from(support.iter().copied());

    let mut tsccs = Vec::new();
    let mut recurrent_classes = Vec::new();
    for (i, comp) in comps.iter().enumerate() {
        if !graph::is_closed(g, comp, &comp_of, i) {
            continue;
        }
        recurrent_classes.push(comp.clone());
        if comp.iter().any(|&s| reachable[s]) {
            tsccs.push(comp.clone());
        }
    }
    tsccs.sort_by_key(|c| c[0]);
    recurrent_classes.sort_by_key(|c| c[0]);

    let (transient, isolated, periodicity) = if chain_detail {
        let mut closed = vec![false; n];
        for c in &recurrent_classes {
            for &s in c {
                closed[s] = true;
            }
        }
        let transient: Vec<usize> = (0..n).filter(|&s| !closed[s] && reachable[s]).collect();

        // Isolated: everything unreachable from the support of beta, grouped
        // into weakly connected components of the induced subgraph.
        let isolated = group_weak_components(g, &(0..n).filter(|&s| !reachable[s]).collect::<Vec<_>>());

        let periodicity = recurrent_classes.iter().map(|c| class_period(g, c)).collect();
        (transient, isolated, periodicity)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    StateClassification { n_states: n, tsccs, recurrent_classes, transient, isolated, periodicity }
}

fn group_weak_components(g: &Digraph, members: &[usize]) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut in_set = vec![false; n];
    for &s in members {
        in_set[s] = true;
    }
    // Undirected adjacency restricted to the member set.
    let mut und: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &s in members {
        for &t in g.successors(s) {
            if in_set[t] && t != s {
                und[s].push(t);
                und[t].push(s);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for &s in members {
        if seen[s] {
            continue;
        }
        let mut comp = vec![];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &v in &und[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Gcd of cycle lengths through the class, via BFS leveling.
fn class_period(g: &Digraph, comp: &[usize]) -> usize {
    let mut level = vec![usize::MAX; g.len()];
    let root = comp[0];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut gcd = 0usize;
    let in_comp: std::collections::BTreeSet<usize> = comp.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        for &v in g.successors(u) {
            if !in_comp.contains(&v) {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u] + 1).abs_diff(level[v]);
                gcd = gcd_u(gcd, diff);
            }
        }
    }
    if gcd == 0 {
        1
    } else {
        gcd
    }
}

fn gcd_u(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd_u(b, a % b)
    }
}

/// Classify an MDP: TSCCs are the closed SCCs of the transition graph
/// reachable from the support of beta. Errors when none exists.
pub fn classify_mdp(mdp: &Mdp) -> Result<StateClassification> {
    let cls = classify_graph(&mdp.transition_graph(), &mdp.beta, false);
    if cls.tsccs.is_empty() {
        return Err(Error::NoReachableTscc);
    }
    Ok(cls)
}

/// Classify a Markov chain, including the transient/isolated split and
/// per-class periodicity.
pub fn classify_chain(chain: &MarkovChain) -> StateClassification {
    classify_graph(&chain.transition_graph(), &chain.beta, true)
}

/// Membership of a policy in the nested policy classes. The flags are
/// monotone: `ep` implies `cp` implies `cpu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyClassFlags {
    pub ep: bool,
    pub cp: bool,
    pub cpu: bool,
}

impl PolicyClassFlags {
    pub const NONE: PolicyClassFlags = PolicyClassFlags { ep: false, cp: false, cpu: false };
}

/// Evaluate edge-preserving / class-preserving / class-preserving-up-to-
/// unichain membership of `policy` on `mdp`.
///
/// EP: the induced chain keeps every TSCC's states recurrent and the policy
/// plays every action available there. CP: the induced chain has exactly the
/// same TSCC partition. CPU: every induced TSCC lies inside some TSCC of the
/// MDP and each MDP TSCC contains exactly one of them.
pub fn policy_class(
    mdp: &Mdp,
    cls: &StateClassification,
    policy: &StationaryPolicy,
) -> Result<PolicyClassFlags> {
    let chain = mdp.induced_chain(policy)?;
    let chain_cls = classify_chain(&chain);
    Ok(policy_class_from(mdp, cls, policy, &chain_cls))
}

/// Same as [`policy_class`] but reusing an already-computed classification of
/// the induced chain.
pub fn policy_class_from(
    mdp: &Mdp,
    cls: &StateClassification,
    policy: &StationaryPolicy,
    chain_cls: &StateClassification,
) -> PolicyClassFlags {
    // CPU: every induced TSCC sits inside a TSCC of the MDP, and each TSCC of
    // the MDP holds exactly one of them.
    let mut per_tscc_count = vec![0usize; cls.tsccs.len()];
    let mut cpu = true;
    for induced in &chain_cls.tsccs {
        match cls.tscc_of(induced[0]) {
            Some(k) if induced.iter().all(|&s| cls.tsccs[k].contains(&s)) => per_tscc_count[k] += 1,
            _ => {
                cpu = false;
                break;
            }
        }
    }
    if cpu {
        cpu = per_tscc_count.iter().all(|&c| c == 1);
    }

    // CP additionally requires the partitions to coincide exactly.
    let cp = cpu
        && chain_cls.tsccs.len() == cls.tsccs.len()
        && chain_cls.tsccs.iter().zip(&cls.tsccs).all(|(a, b)| a == b);

    // EP additionally requires full action support on the TSCC union.
    let ep = cp
        && cls
            .recurrent_union()
            .iter()
            .all(|&s| (0..mdp.n_actions(s)).all(|a| policy.prob(s, a) > 0.0));

    PolicyClassFlags { ep, cp, cpu }
}
