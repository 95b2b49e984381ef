//! Policy extraction from LP solutions, support digraphs, cut generation,
//! and the mode-dispatching synthesis drivers.

use std::collections::BTreeSet;

use crate::classify::StateClassification;
use crate::error::{Error, Result};
use crate::graph::{self, Digraph};
use crate::lp::{
    add_transient_spec_constraints, build_kallenberg, build_lp1, build_lp2, build_lp3,
    ConstraintTag, FillRule, LinearProgram, LpSolution, LpSolver, LpStatus, Relation,
    SynthesisConfig, VarKey,
};
use crate::mdp::{Mdp, SpecKind, StationaryPolicy};

/// Stationary policy from an LP solution: x-ratios where the state carries
/// steady-state mass, y-ratios where it only carries visit mass, and the
/// configured fill rule elsewhere.
pub fn extract_policy(
    sol: &LpSolution,
    lp: &LinearProgram,
    mdp: &Mdp,
    cfg: &SynthesisConfig,
) -> StationaryPolicy {
    let tau = cfg.support_threshold;
    let mut rows = Vec::with_capacity(mdp.n_states());
    for s in 0..mdp.n_states() {
        let k = mdp.n_actions(s);
        let xs: Vec<f64> = (0..k).map(|a| sol.value(lp, VarKey::X(s, a)).max(0.0)).collect();
        let ys: Vec<f64> = (0..k).map(|a| sol.value(lp, VarKey::Y(s, a)).max(0.0)).collect();
        let x_total: f64 = xs.iter().sum();
        let y_total: f64 = ys.iter().sum();
        let row = if x_total > tau {
            xs.iter().map(|v| v / x_total).collect()
        } else if y_total > tau {
            ys.iter().map(|v| v / y_total).collect()
        } else {
            match cfg.fill {
                FillRule::Uniform => vec![1.0 / k as f64; k],
                FillRule::FirstAction => {
                    let mut r = vec![0.0; k];
                    r[0] = 1.0;
                    r
                }
            }
        };
        // Exact renormalization absorbs division rounding.
        let sum: f64 = row.iter().sum();
        rows.push(row.into_iter().map(|v| v / sum).collect());
    }
    StationaryPolicy { rows }
}

/// Support digraph of a solution inside one TSCC: vertices carry x-mass
/// above the threshold, and each supported pair (s, a) contributes edges to
/// every target of the action inside the TSCC. Edge targets join the vertex
/// set, so a support edge escaping the mass-carrying set shows up as a
/// connectivity failure.
#[derive(Debug, Clone)]
pub struct SupportDigraph {
    /// Global state indices in the digraph, sorted.
    pub vertices: Vec<usize>,
    /// Edges as (global source, global target).
    pub edges: Vec<(usize, usize)>,
}

impl SupportDigraph {
    pub fn is_strongly_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let index: std::collections::HashMap<usize, usize> =
            self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut g = Digraph::new(self.vertices.len());
        for &(u, v) in &self.edges {
            if u != v {
                g.add_edge(index[&u], index[&v]);
            }
        }
        graph::tarjan_sccs(&g).len() == 1
    }
}

pub fn support_digraph(
    sol: &LpSolution,
    lp: &LinearProgram,
    mdp: &Mdp,
    tscc: &[usize],
    cfg: &SynthesisConfig,
) -> SupportDigraph {
    let tau = cfg.support_threshold;
    let member: BTreeSet<usize> = tscc.iter().copied().collect();
    let mut vertices: BTreeSet<usize> = BTreeSet::new();
    let mut edges = Vec::new();
    for &s in tscc {
        let x_s: f64 = (0..mdp.n_actions(s)).map(|a| sol.value(lp, VarKey::X(s, a)).max(0.0)).sum();
        if x_s > tau {
            vertices.insert(s);
        }
    }
    for &s in tscc {
        for a in 0..mdp.n_actions(s) {
            if sol.value(lp, VarKey::X(s, a)) > tau {
                for t in &mdp.transitions[s][a] {
                    if t.prob > 0.0 && member.contains(&t.target) {
                        vertices.insert(t.target);
                        edges.push((s, t.target));
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    SupportDigraph { vertices: vertices.into_iter().collect(), edges }
}

/// One generated cut: force x-mass on the actions crossing from `states`
/// into the rest of the TSCC.
#[derive(Debug, Clone)]
pub struct Cut {
    pub tscc: usize,
    pub states: Vec<usize>,
    /// The crossing pairs (s, a) whose mass the constraint lower-bounds.
    pub pairs: Vec<(usize, usize)>,
}

/// Cuts for one TSCC whose support digraph is not strongly connected: one
/// per sink component of the support condensation. An empty support falls
/// back to forcing mass onto the TSCC's lowest-index state.
pub fn find_cuts(support: &SupportDigraph, tscc_idx: usize, tscc: &[usize], mdp: &Mdp) -> Vec<Cut> {
    let member: BTreeSet<usize> = tscc.iter().copied().collect();
    let crossing_pairs = |states: &[usize]| -> Vec<(usize, usize)> {
        let inside: BTreeSet<usize> = states.iter().copied().collect();
        let mut pairs = Vec::new();
        for &s in states {
            for a in 0..mdp.n_actions(s) {
                let crosses = mdp.transitions[s][a]
                    .iter()
                    .any(|t| t.prob > 0.0 && member.contains(&t.target) && !inside.contains(&t.target));
                if crosses {
                    pairs.push((s, a));
                }
            }
        }
        pairs
    };

    if support.vertices.is_empty() {
        let s = tscc[0];
        return vec![Cut {
            tscc: tscc_idx,
            states: vec![s],
            pairs: (0..mdp.n_actions(s)).map(|a| (s, a)).collect(),
        }];
    }

    let index: std::collections::HashMap<usize, usize> =
        support.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut g = Digraph::new(support.vertices.len());
    for &(u, v) in &support.edges {
        if u != v {
            g.add_edge(index[&u], index[&v]);
        }
    }
    let comps = graph::tarjan_sccs(&g);
    if comps.len() <= 1 {
        return Vec::new();
    }
    let comp_of = graph::component_map(support.vertices.len(), &comps);
    let mut cuts = Vec::new();
    for (ci, comp) in comps.iter().enumerate() {
        let is_sink = comp
            .iter()
            .all(|&v| g.successors(v).iter().all(|&w| comp_of[w] == ci));
        if !is_sink {
            continue;
        }
        let states: Vec<usize> = comp.iter().map(|&v| support.vertices[v]).collect();
        if states.len() == tscc.len() {
            continue;
        }
        let pairs = crossing_pairs(&states);
        if !pairs.is_empty() {
            cuts.push(Cut { tscc: tscc_idx, states, pairs });
        }
    }
    cuts.sort_by_key(|c| c.states[0]);
    cuts
}

/// Per-iteration record of the cut-generation loop.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub objective: f64,
    pub cuts_added: Vec<Cut>,
}

pub type SynthesisTrace = Vec<IterationRecord>;

/// Iterate the relaxed program with accumulated cut constraints until the
/// support digraph of every TSCC is strongly connected, then extract the
/// policy. Terminates within the configured budget.
pub fn synthesize_cpu<S: LpSolver>(
    mdp: &Mdp,
    cls: &StateClassification,
    cfg: &SynthesisConfig,
    solver: &S,
) -> Result<(StationaryPolicy, SynthesisTrace, LpSolution, LinearProgram)> {
    let mut cuts: Vec<Cut> = Vec::new();
    let mut trace: SynthesisTrace = Vec::new();
    let budget = cfg.cut_budget(mdp);

    for _ in 0..budget {
        let lp = build_lp3(mdp, cls, &mdp.specs);
        let mut lp = add_transient_spec_constraints(lp, mdp, cls, &mdp.specs)?;
        for (serial, cut) in cuts.iter().enumerate() {
            lp.add_constraint(
                ConstraintTag::Cut { tscc: cut.tscc, serial },
                cut.pairs.iter().map(|&(s, a)| (VarKey::X(s, a), 1.0)),
                Relation::Ge,
                cfg.epsilon_cut,
            );
        }
        lp.name = format!("LP3+{}cuts", cuts.len());
        let sol = solver.solve(&lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible { lp: lp.name }),
            LpStatus::Unbounded => return Err(Error::Unbounded { lp: lp.name }),
        }

        // One cut per unconnected TSCC per round: its lowest-indexed sink
        // component. Adding every sink's cut at once lets flow conservation
        // stitch all of them together in a single reoptimization, which
        // skips the staged repair the row generation is meant to perform.
        let mut new_cuts = Vec::new();
        for (k, tscc) in cls.tsccs.iter().enumerate() {
            let sg = support_digraph(&sol, &lp, mdp, tscc, cfg);
            if !sg.is_strongly_connected() {
                let mut cuts_k = find_cuts(&sg, k, tscc, mdp);
                cuts_k.truncate(1);
                new_cuts.extend(cuts_k);
            }
        }
        trace.push(IterationRecord { objective: sol.objective, cuts_added: new_cuts.clone() });
        if new_cuts.is_empty() {
            let policy = extract_policy(&sol, &lp, mdp, cfg);
            return Ok((policy, trace, sol, lp));
        }
        cuts.extend(new_cuts);
    }
    Err(Error::BudgetExhausted { iterations: budget })
}

/// Synthesis modes exposed by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMode {
    /// Edge-preserving: strict support on every TSCC action.
    Ep,
    /// Class-preserving: flow-enforced recurrence of every TSCC.
    Cp,
    /// Class-preserving up to unichain, by iterative cut generation.
    Cpu,
    /// The relaxed program solved once, no connectivity repair.
    Lp3,
    /// Multichain baseline without the correspondence guarantee.
    Kallenberg,
}

impl SynthMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SynthMode::Ep => "ep",
            SynthMode::Cp => "cp",
            SynthMode::Cpu => "cpu",
            SynthMode::Lp3 => "lp3",
            SynthMode::Kallenberg => "kallenberg",
        }
    }

    pub fn parse(s: &str) -> Option<SynthMode> {
        Some(match s {
            "ep" => SynthMode::Ep,
            "cp" => SynthMode::Cp,
            "cpu" => SynthMode::Cpu,
            "lp3" => SynthMode::Lp3,
            "kallenberg" => SynthMode::Kallenberg,
            _ => return None,
        })
    }
}

/// Result of a synthesis run: the policy, the LP objective, the solution's
/// state-action values for later verification, and the iteration count
/// (one except for cut generation).
#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    pub mode: SynthMode,
    pub policy: StationaryPolicy,
    pub objective: f64,
    pub x_star: Vec<Vec<f64>>,
    pub y_star: Vec<Vec<f64>>,
    pub iterations: usize,
    pub epsilon: f64,
    pub trace: SynthesisTrace,
}

/// Build, solve, and extract for the chosen mode. Steady-state specs enter
/// as (iv); transient specs as (xv).
pub fn synthesize<S: LpSolver>(
    mdp: &Mdp,
    cls: &StateClassification,
    mode: SynthMode,
    cfg: &SynthesisConfig,
    solver: &S,
) -> Result<SynthesisOutcome> {
    let has_transient = mdp.specs.iter().any(|s| s.kind == SpecKind::Transient);
    let (lp, sol, iterations, trace, policy) = match mode {
        SynthMode::Cpu => {
            let (policy, trace, sol, lp) = synthesize_cpu(mdp, cls, cfg, solver)?;
            let iterations = trace.len();
            (lp, sol, iterations, trace, policy)
        }
        _ => {
            let lp = match mode {
                SynthMode::Ep => build_lp1(mdp, cls, &mdp.specs, cfg),
                SynthMode::Cp => build_lp2(mdp, cls, &mdp.specs, cfg),
                SynthMode::Lp3 => build_lp3(mdp, cls, &mdp.specs),
                SynthMode::Kallenberg => build_kallenberg(mdp, &mdp.specs),
                SynthMode::Cpu => unreachable!(),
            };
            let lp = if has_transient && mode != SynthMode::Kallenberg {
                add_transient_spec_constraints(lp, mdp, cls, &mdp.specs)?
            } else {
                lp
            };
            let sol = solver.solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::Infeasible { lp: lp.name }),
                LpStatus::Unbounded => return Err(Error::Unbounded { lp: lp.name }),
            }
            let policy = extract_policy(&sol, &lp, mdp, cfg);
            (lp, sol, 1, Vec::new(), policy)
        }
    };

    Ok(SynthesisOutcome {
        mode,
        policy,
        objective: sol.objective,
        x_star: sol.x_values(&lp, mdp),
        y_star: sol.y_values(&lp, mdp),
        iterations,
        epsilon: cfg.epsilon_pos,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_mdp;
    use crate::env::{self, ThreeStateScenario};
    use crate::lp::build_q0;

    /// Hand-built solution over a Q0-shaped program.
    fn manual_solution(lp: &LinearProgram, entries: &[(VarKey, f64)]) -> LpSolution {
        let mut values = vec![0.0; lp.n_vars()];
        for &(k, v) in entries {
            values[lp.var_index(k).unwrap()] = v;
        }
        LpSolution { status: LpStatus::Optimal, values, objective: 0.0 }
    }

    #[test]
    fn extraction_from_balanced_point() {
        // x(s2,a2) = x(s3,a2) = 0.5: pure a2 at both states.
        let mdp = env::three_state(ThreeStateScenario::Example1);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let sol = manual_solution(
            &lp,
            &[(VarKey::X(1, 1), 0.5), (VarKey::X(2, 1), 0.5), (VarKey::Y(1, 0), 0.5)],
        );
        let pi = extract_policy(&sol, &lp, &mdp, &SynthesisConfig::default());
        assert_eq!(pi.rows[1], vec![0.0, 1.0]);
        assert_eq!(pi.rows[2], vec![0.0, 1.0]);
        // s1 has neither x nor y mass: uniform fill.
        assert_eq!(pi.rows[0], vec![0.5, 0.5]);
    }

    #[test]
    fn extraction_from_lp0_optimum() {
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let sol = manual_solution(
            &lp,
            &[
                (VarKey::X(1, 1), 1.0 / 3.0),
                (VarKey::X(2, 1), 2.0 / 3.0),
                (VarKey::Y(1, 0), 1.0 / 6.0),
            ],
        );
        let pi = extract_policy(&sol, &lp, &mdp, &SynthesisConfig::default());
        assert_eq!(pi.rows[1], vec![0.0, 1.0]);
        assert_eq!(pi.rows[2], vec![0.0, 1.0]);
        assert_eq!(pi.rows[0], vec![0.5, 0.5]);
    }

    #[test]
    fn extraction_uses_y_when_x_absent() {
        let mdp = env::three_state(ThreeStateScenario::Example1);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let sol = manual_solution(
            &lp,
            &[(VarKey::X(1, 1), 1.0), (VarKey::Y(2, 0), 0.25), (VarKey::Y(2, 1), 0.75)],
        );
        let pi = extract_policy(&sol, &lp, &mdp, &SynthesisConfig::default());
        assert_eq!(pi.rows[2], vec![0.25, 0.75]);
    }

    #[test]
    fn full_support_digraph_matches_relation() {
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let sol = manual_solution(
            &lp,
            &[
                (VarKey::X(1, 0), 0.25),
                (VarKey::X(1, 1), 0.25),
                (VarKey::X(2, 0), 0.25),
                (VarKey::X(2, 1), 0.25),
            ],
        );
        let sg = support_digraph(&sol, &lp, &mdp, &cls.tsccs[0], &SynthesisConfig::default());
        assert_eq!(sg.vertices, vec![1, 2]);
        assert!(sg.is_strongly_connected());
        assert!(sg.edges.contains(&(1, 2)));
        assert!(sg.edges.contains(&(2, 1)));
    }

    #[test]
    fn split_support_produces_two_sink_cuts() {
        // Mass trapped on the two self-loops: two singleton sinks, one cut
        // each, targeting the crossing actions.
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let sol = manual_solution(&lp, &[(VarKey::X(1, 1), 0.5), (VarKey::X(2, 1), 0.5)]);
        let sg = support_digraph(&sol, &lp, &mdp, &cls.tsccs[0], &SynthesisConfig::default());
        assert!(!sg.is_strongly_connected());
        let cuts = find_cuts(&sg, 0, &cls.tsccs[0], &mdp);
        assert_eq!(cuts.len(), 2);
        // s2's crossing action is a1 (to s3); s3's is a1 (to s2).
        assert!(cuts.iter().any(|c| c.states == vec![1] && c.pairs == vec![(1, 0)]));
        assert!(cuts.iter().any(|c| c.states == vec![2] && c.pairs == vec![(2, 0)]));
    }

    #[test]
    fn empty_support_falls_back_to_single_state_cut() {
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let sg = SupportDigraph { vertices: vec![], edges: vec![] };
        let cuts = find_cuts(&sg, 0, &cls.tsccs[0], &mdp);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].states, vec![1]);
        assert_eq!(cuts[0].pairs, vec![(1, 0), (1, 1)]);
    }

    #[test]
    fn strongly_connected_support_yields_no_cuts() {
        let sg = SupportDigraph { vertices: vec![1, 2], edges: vec![(1, 2), (2, 1)] };
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        assert!(find_cuts(&sg, 0, &cls.tsccs[0], &mdp).is_empty());
    }
}
