//! Construction of the synthesis linear programs over a labeled MDP: the
//! shared constraint set Q0, the edge-preserving program and its epsilon
//! relaxation, the flow-constrained class-preserving program, the relaxed
//! program used by cut generation, and the two baselines.

use crate::classify::StateClassification;
use crate::error::{Error, Result};
use crate::lp::{ConstraintTag, LinearProgram, Relation, SynthesisConfig, VarKey};
use crate::mdp::{LabelSet, Mdp, Spec, SpecKind};

fn declare_xy(lp: &mut LinearProgram, mdp: &Mdp) {
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            lp.add_var(VarKey::X(s, a), 0.0, 1.0);
        }
    }
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            lp.add_var(VarKey::Y(s, a), 0.0, f64::INFINITY);
        }
    }
}

/// Stationarity rows (i): for every state s',
/// `sum_{s,a} x_{sa} T(s'|s,a) = sum_a x_{s'a}`.
fn add_stationarity(lp: &mut LinearProgram, mdp: &Mdp, var: fn(usize, usize) -> VarKey, tag: fn(usize) -> ConstraintTag) {
    let n = mdp.n_states();
    let mut rows: Vec<Vec<(VarKey, f64)>> = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..mdp.n_actions(s) {
            for t in &mdp.transitions[s][a] {
                if t.prob > 0.0 {
                    rows[t.target].push((var(s, a), t.prob));
                }
            }
        }
    }
    for sp in 0..n {
        let mut terms = std::mem::take(&mut rows[sp]);
        for a in 0..mdp.n_actions(sp) {
            terms.push((var(sp, a), -1.0));
        }
        lp.add_constraint(tag(sp), terms, Relation::Eq, 0.0);
    }
}

/// Balance rows (ii): for every state s',
/// `sum_{s,a} y_{sa} T(s'|s,a) - sum_a x_{s'a} - sum_a y_{s'a} = -beta_{s'}`.
fn add_balance(lp: &mut LinearProgram, mdp: &Mdp) {
    let n = mdp.n_states();
    let mut rows: Vec<Vec<(VarKey, f64)>> = vec![Vec::new(); n];
    for s in 0..n {
        for a in 0..mdp.n_actions(s) {
            for t in &mdp.transitions[s][a] {
                if t.prob > 0.0 {
                    rows[t.target].push((VarKey::Y(s, a), t.prob));
                }
            }
        }
    }
    for sp in 0..n {
        let mut terms = std::mem::take(&mut rows[sp]);
        for a in 0..mdp.n_actions(sp) {
            terms.push((VarKey::X(sp, a), -1.0));
            terms.push((VarKey::Y(sp, a), -1.0));
        }
        lp.add_constraint(ConstraintTag::Balance(sp), terms, Relation::Eq, -mdp.beta[sp]);
    }
}

fn set_reward_objective(lp: &mut LinearProgram, mdp: &Mdp) {
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            let r = mdp.reward(s, a);
            if r != 0.0 {
                lp.set_objective(VarKey::X(s, a), r);
            }
        }
    }
}

fn label_terms(mdp: &Mdp, set: &LabelSet, var: fn(usize, usize) -> VarKey) -> Vec<(VarKey, f64)> {
    match set {
        LabelSet::States(states) => states
            .iter()
            .flat_map(|&s| (0..mdp.n_actions(s)).map(move |a| (var(s, a), 1.0)))
            .collect(),
        LabelSet::Pairs(pairs) => pairs.iter().map(|&(s, a)| (var(s, a), 1.0)).collect(),
    }
}

/// Steady-state specification rows (iv) over the x variables.
fn add_steady_specs(lp: &mut LinearProgram, mdp: &Mdp, specs: &[Spec]) {
    for (i, spec) in specs.iter().enumerate() {
        if spec.kind != SpecKind::SteadyState {
            continue;
        }
        let set = &mdp.labels[&spec.label];
        let terms = label_terms(mdp, set, VarKey::X);
        if spec.lo > 0.0 {
            lp.add_constraint(ConstraintTag::SteadySpecLo(i), terms.clone(), Relation::Ge, spec.lo);
        }
        if spec.hi < 1.0 {
            lp.add_constraint(ConstraintTag::SteadySpecHi(i), terms, Relation::Le, spec.hi);
        }
    }
}

/// The shared constraint set Q0: stationarity of x (i), visit balance of y
/// (ii), and zero steady-state mass off the TSCC union (iii), with
/// `x in [0,1]` and `y >= 0`. Emits (i) and (ii) once per state and (iii)
/// once; carries no objective.
pub fn build_q0(mdp: &Mdp, cls: &StateClassification) -> LinearProgram {
    let mut lp = LinearProgram::new("Q0");
    declare_xy(&mut lp, mdp);
    add_stationarity(&mut lp, mdp, VarKey::X, ConstraintTag::Stationarity);
    add_balance(&mut lp, mdp);
    let complement = cls.complement();
    let terms: Vec<(VarKey, f64)> = complement
        .iter()
        .flat_map(|&f| (0..mdp.n_actions(f)).map(move |a| (VarKey::X(f, a), 1.0)))
        .collect();
    lp.add_constraint(ConstraintTag::NoTransientMass, terms, Relation::Eq, 0.0);
    // The same fact as a bound, which presolves the x mass off those states.
    for &f in &complement {
        for a in 0..mdp.n_actions(f) {
            lp.set_upper(VarKey::X(f, a), 0.0);
        }
    }
    lp
}

/// The edge-preserving program in its epsilon form: Q0 + specification rows
/// (iv) + support lower bounds (v)' `x_{sa} >= epsilon` on every TSCC
/// state-action pair, maximizing `sum x_{sa} R(s,a)`.
pub fn build_lp1(mdp: &Mdp, cls: &StateClassification, specs: &[Spec], cfg: &SynthesisConfig) -> LinearProgram {
    let mut lp = build_q0(mdp, cls);
    lp.name = format!("LP1(eps={:.0e})", cfg.epsilon_pos);
    add_steady_specs(&mut lp, mdp, specs);
    for tscc in &cls.tsccs {
        for &s in tscc {
            for a in 0..mdp.n_actions(s) {
                lp.set_lower(VarKey::X(s, a), cfg.epsilon_pos);
            }
        }
    }
    set_reward_objective(&mut lp, mdp);
    lp
}

/// Intra-TSCC transition relation: ordered pairs (s, s'), s != s', joined by
/// some action with positive probability, both endpoints in the TSCC.
fn tscc_relation(mdp: &Mdp, tscc: &[usize]) -> Vec<(usize, usize)> {
    let member: std::collections::BTreeSet<usize> = tscc.iter().copied().collect();
    let mut edges = Vec::new();
    for &s in tscc {
        let mut targets: Vec<usize> = Vec::new();
        for a in 0..mdp.n_actions(s) {
            for t in &mdp.transitions[s][a] {
                if t.prob > 0.0 && t.target != s && member.contains(&t.target) {
                    targets.push(t.target);
                }
            }
        }
        targets.sort_unstable();
        targets.dedup();
        for t in targets {
            edges.push((s, t));
        }
    }
    edges
}

/// Mass carried by an edge: `sum_a T(s'|s,a) x_{sa}`.
fn edge_mass_terms(mdp: &Mdp, s: usize, sp: usize) -> Vec<(VarKey, f64)> {
    (0..mdp.n_actions(s))
        .filter_map(|a| {
            let p = mdp.prob(s, a, sp);
            (p > 0.0).then_some((VarKey::X(s, a), p))
        })
        .collect()
}

/// The class-preserving program: Q0 + (iv) + per-TSCC flow systems
/// (vi)-(xiv) that force every TSCC state to be reachable from and able to
/// reach the root in the support of x. Strict inequalities carry
/// `+ epsilon`. Singleton TSCCs need no flow system: a closed singleton is
/// recurrent under every policy.
pub fn build_lp2(mdp: &Mdp, cls: &StateClassification, specs: &[Spec], cfg: &SynthesisConfig) -> LinearProgram {
    let mut lp = build_q0(mdp, cls);
    lp.name = "LP2".into();
    add_steady_specs(&mut lp, mdp, specs);

    for (k, tscc) in cls.tsccs.iter().enumerate() {
        if tscc.len() < 2 {
            continue;
        }
        // Strictness margin per TSCC. Scaled down by the class size so that
        // every point with full support x >= epsilon_pos stays feasible here:
        // its flow certificate routes the margin from the root along tree
        // paths, loading an edge with at most (|r_k|+1) margins, which must
        // fit under the edge-mass capacity.
        let eps = cfg.epsilon_pos / (tscc.len() + 1) as f64;
        let edges = tscc_relation(mdp, tscc);
        let root = tscc[0];

        for &(s, t) in &edges {
            lp.add_var(VarKey::Flow(s, t), 0.0, 1.0);
            lp.add_var(VarKey::FlowRev(s, t), 0.0, 1.0);
        }

        for &(s, t) in &edges {
            let mass = edge_mass_terms(mdp, s, t);
            if s == root {
                // (vi): flow out of the root equals the edge mass.
                let mut terms = vec![(VarKey::Flow(s, t), 1.0)];
                terms.extend(mass.iter().map(|&(k, c)| (k, -c)));
                lp.add_constraint(ConstraintTag::FlowInit(k), terms, Relation::Eq, 0.0);
            } else {
                // (viii): capacity.
                let mut terms = vec![(VarKey::Flow(s, t), 1.0)];
                terms.extend(mass.iter().map(|&(k, c)| (k, -c)));
                lp.add_constraint(ConstraintTag::FlowCap(k), terms, Relation::Le, 0.0);
            }
            if t == root {
                // (vii): reverse flow out of the root along edges into it.
                let mut terms = vec![(VarKey::FlowRev(s, t), 1.0)];
                terms.extend(mass.iter().map(|&(k, c)| (k, -c)));
                lp.add_constraint(ConstraintTag::FlowRevInit(k), terms, Relation::Eq, 0.0);
            } else {
                // (ix): reverse capacity.
                let mut terms = vec![(VarKey::FlowRev(s, t), 1.0)];
                terms.extend(mass.iter().map(|&(k, c)| (k, -c)));
                lp.add_constraint(ConstraintTag::FlowRevCap(k), terms, Relation::Le, 0.0);
            }
        }

        let incoming: Vec<Vec<(usize, usize)>> = {
            let mut map = vec![Vec::new(); mdp.n_states()];
            for &(s, t) in &edges {
                map[t].push((s, t));
            }
            map
        };
        let outgoing: Vec<Vec<(usize, usize)>> = {
            let mut map = vec![Vec::new(); mdp.n_states()];
            for &(s, t) in &edges {
                map[s].push((s, t));
            }
            map
        };

        for &s in tscc {
            if s != root {
                // (x): inflow exceeds outflow at every non-root state.
                let mut terms: Vec<(VarKey, f64)> =
                    incoming[s].iter().map(|&(u, v)| (VarKey::Flow(u, v), 1.0)).collect();
                terms.extend(outgoing[s].iter().map(|&(u, v)| (VarKey::Flow(u, v), -1.0)));
                lp.add_constraint(ConstraintTag::FlowTransfer(k), terms, Relation::Ge, eps);
                // (xi): the same in the reversed orientation. Reverse-inflow
                // of s rides the forward edges out of s; reverse-outflow the
                // forward edges into s.
                let mut terms: Vec<(VarKey, f64)> =
                    outgoing[s].iter().map(|&(u, v)| (VarKey::FlowRev(u, v), 1.0)).collect();
                terms.extend(incoming[s].iter().map(|&(u, v)| (VarKey::FlowRev(u, v), -1.0)));
                lp.add_constraint(ConstraintTag::FlowRevTransfer(k), terms, Relation::Ge, eps);
            }
            // (xii)/(xiii): positive inflow everywhere (only binding at the
            // root; elsewhere implied by (x)/(xi)).
            let terms: Vec<(VarKey, f64)> =
                incoming[s].iter().map(|&(u, v)| (VarKey::Flow(u, v), 1.0)).collect();
            lp.add_constraint(ConstraintTag::FlowIn(k), terms, Relation::Ge, eps);
            let terms: Vec<(VarKey, f64)> =
                outgoing[s].iter().map(|&(u, v)| (VarKey::FlowRev(u, v), 1.0)).collect();
            lp.add_constraint(ConstraintTag::FlowRevIn(k), terms, Relation::Ge, eps);
        }
    }

    set_reward_objective(&mut lp, mdp);
    lp
}

/// The relaxed program driving cut generation: Q0 + (iv) only.
pub fn build_lp3(mdp: &Mdp, cls: &StateClassification, specs: &[Spec]) -> LinearProgram {
    let mut lp = build_q0(mdp, cls);
    lp.name = "LP3".into();
    add_steady_specs(&mut lp, mdp, specs);
    set_reward_objective(&mut lp, mdp);
    lp
}

/// Multichain baseline without the zero-mass constraint (iii): stationarity
/// (i) and balance (ii) only, optionally augmented with the specification
/// rows. Carries no correspondence guarantee between its solutions and the
/// policies extracted from them.
pub fn build_kallenberg(mdp: &Mdp, specs: &[Spec]) -> LinearProgram {
    let mut lp = LinearProgram::new("multichain-baseline");
    declare_xy(&mut lp, mdp);
    add_stationarity(&mut lp, mdp, VarKey::X, ConstraintTag::Stationarity);
    add_balance(&mut lp, mdp);
    add_steady_specs(&mut lp, mdp, specs);
    set_reward_objective(&mut lp, mdp);
    if specs.iter().any(|s| s.kind == SpecKind::Transient) {
        lp = add_transient_spec_constraints_unchecked(lp, mdp, specs);
    }
    lp
}

/// Single-recurrent-class baseline: stationarity plus total-mass
/// normalization over x alone. Documented assumption: valid only when every
/// deterministic policy induces a single recurrent class; on multichain
/// models its solutions need not correspond to any stationary policy.
pub fn build_unichain_lp(mdp: &Mdp) -> LinearProgram {
    let mut lp = LinearProgram::new("unichain-baseline");
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            lp.add_var(VarKey::X(s, a), 0.0, 1.0);
        }
    }
    add_stationarity(&mut lp, mdp, VarKey::X, ConstraintTag::Stationarity);
    let terms: Vec<(VarKey, f64)> = (0..mdp.n_states())
        .flat_map(|s| (0..mdp.n_actions(s)).map(move |a| (VarKey::X(s, a), 1.0)))
        .collect();
    lp.add_constraint(ConstraintTag::MassNorm, terms, Relation::Eq, 1.0);
    set_reward_objective(&mut lp, mdp);
    lp
}

/// Transient specification rows (xv): `lo <= sum_{label} y <= hi`. Labels
/// must avoid the TSCCs.
pub fn add_transient_spec_constraints(
    mut lp: LinearProgram,
    mdp: &Mdp,
    cls: &StateClassification,
    specs: &[Spec],
) -> Result<LinearProgram> {
    for spec in specs.iter().filter(|s| s.kind == SpecKind::Transient) {
        let set = mdp.labels.get(&spec.label).ok_or_else(|| Error::InvalidSpec {
            label: spec.label.clone(),
            reason: "label not defined".into(),
        })?;
        if let Some(&s) = set.states().iter().find(|&&s| cls.is_in_tscc(s)) {
            return Err(Error::InvalidSpec {
                label: spec.label.clone(),
                reason: format!("transient spec touches TSCC state {}", mdp.name(s)),
            });
        }
    }
    lp = add_transient_spec_constraints_unchecked(lp, mdp, specs);
    Ok(lp)
}

fn add_transient_spec_constraints_unchecked(
    mut lp: LinearProgram,
    mdp: &Mdp,
    specs: &[Spec],
) -> LinearProgram {
    for (i, spec) in specs.iter().enumerate() {
        if spec.kind != SpecKind::Transient {
            continue;
        }
        let set = &mdp.labels[&spec.label];
        let terms = label_terms(mdp, set, VarKey::Y);
        if spec.lo > 0.0 {
            lp.add_constraint(ConstraintTag::TransientSpecLo(i), terms.clone(), Relation::Ge, spec.lo);
        }
        if spec.hi.is_finite() {
            lp.add_constraint(ConstraintTag::TransientSpecHi(i), terms, Relation::Le, spec.hi);
        }
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_mdp;
    use crate::env::{self, ThreeStateScenario};
    use crate::lp::{LpSolver, LpStatus, SimplexSolver, VarKey};
    use crate::mdp::{Spec, SpecKind};

    #[test]
    fn q0_shape_on_three_state() {
        // 3 stationarity + 3 balance + 1 zero-mass rows over 12 variables.
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        assert_eq!(lp.constraints.len(), 7);
        assert_eq!(lp.n_vars(), 12);
    }

    #[test]
    fn q0_admits_the_balanced_point() {
        // x(s2,a2) = x(s3,a2) = 0.5, y(s2,a1) = 0.5 with beta on s2.
        let mdp = env::three_state(ThreeStateScenario::Example1);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let mut v = vec![0.0; lp.n_vars()];
        v[lp.var_index(VarKey::X(1, 1)).unwrap()] = 0.5;
        v[lp.var_index(VarKey::X(2, 1)).unwrap()] = 0.5;
        v[lp.var_index(VarKey::Y(1, 0)).unwrap()] = 0.5;
        assert!(lp.violation(&v) <= 1e-12);
    }

    #[test]
    fn q0_forces_unit_mass() {
        // All-zero x cannot satisfy (ii) summed over states: beta must be
        // carried by x somewhere.
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_q0(&mdp, &cls);
        let v = vec![0.0; lp.n_vars()];
        assert!(lp.violation(&v) > 0.4);
    }

    #[test]
    fn lp0_example_point_is_feasible_and_lp3_optimum_is_one() {
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_lp3(&mdp, &cls, &mdp.specs);
        // The cited optimal point.
        let mut v = vec![0.0; lp.n_vars()];
        v[lp.var_index(VarKey::X(1, 1)).unwrap()] = 1.0 / 3.0;
        v[lp.var_index(VarKey::X(2, 1)).unwrap()] = 2.0 / 3.0;
        v[lp.var_index(VarKey::Y(1, 0)).unwrap()] = 1.0 / 6.0;
        assert!(lp.violation(&v) <= 1e-12);

        let sol = SimplexSolver::default().solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lp3_with_extra_spec_keeps_optimum() {
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.specs.push(Spec { label: "s2".into(), lo: 0.4, hi: 1.0, kind: SpecKind::SteadyState });
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_lp3(&mdp, &cls, &mdp.specs);
        let sol = SimplexSolver::default().solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        let x_s2: f64 = sol.value(&lp, VarKey::X(1, 0)) + sol.value(&lp, VarKey::X(1, 1));
        assert!(x_s2 >= 0.4 - 1e-9);
    }

    #[test]
    fn contradictory_specs_are_infeasible() {
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.specs = vec![
            Spec { label: "s2".into(), lo: 0.9, hi: 1.0, kind: SpecKind::SteadyState },
            Spec { label: "s3".into(), lo: 0.9, hi: 1.0, kind: SpecKind::SteadyState },
        ];
        let cls = classify_mdp(&mdp).unwrap();
        for lp in [
            build_lp1(&mdp, &cls, &mdp.specs, &SynthesisConfig::default()),
            build_lp3(&mdp, &cls, &mdp.specs),
        ] {
            let sol = SimplexSolver::default().solve(&lp).unwrap();
            assert_eq!(sol.status, LpStatus::Infeasible);
        }
    }

    #[test]
    fn lp1_closed_form_objective() {
        // Reward-shaped scenario: optimum 0.5 - 1.2 eps.
        for eps in [0.1, 0.01] {
            let mdp = env::three_state(ThreeStateScenario::Bounded);
            let cls = classify_mdp(&mdp).unwrap();
            let cfg = SynthesisConfig::with_epsilon(eps);
            let lp = build_lp1(&mdp, &cls, &mdp.specs, &cfg);
            let sol = SimplexSolver::default().solve(&lp).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!((sol.objective - (0.5 - 1.2 * eps)).abs() < 1e-9, "eps={eps}: {}", sol.objective);
        }
    }

    #[test]
    fn transient_cap_zero_on_started_state_is_infeasible() {
        // beta(s1) = 1 forces y(s1) >= 1 by (ii); a [0, 0] visit cap on s1
        // contradicts it.
        let mut mdp = env::three_state(ThreeStateScenario::Bounded);
        mdp.labels.insert("start".into(), crate::mdp::LabelSet::States(vec![0]));
        mdp.specs.push(Spec { label: "start".into(), lo: 0.0, hi: 0.0, kind: SpecKind::Transient });
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_lp3(&mdp, &cls, &mdp.specs);
        let lp = add_transient_spec_constraints(lp, &mdp, &cls, &mdp.specs).unwrap();
        let sol = SimplexSolver::default().solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn transient_spec_on_tscc_state_rejected() {
        let mut mdp = env::three_state(ThreeStateScenario::Bounded);
        mdp.labels.insert("inside".into(), crate::mdp::LabelSet::States(vec![1]));
        mdp.specs.push(Spec { label: "inside".into(), lo: 0.0, hi: 1.0, kind: SpecKind::Transient });
        let cls = classify_mdp(&mdp).unwrap();
        let lp = build_lp3(&mdp, &cls, &mdp.specs);
        assert!(matches!(
            add_transient_spec_constraints(lp, &mdp, &cls, &mdp.specs),
            Err(Error::InvalidSpec { .. })
        ));
    }

    #[test]
    fn unichain_baseline_solves_on_multichain_model() {
        // The program is solvable on a multichain model, but nothing ties its
        // solution to a policy's steady state; the negative example lives in
        // the extraction tests.
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let lp = build_unichain_lp(&mdp);
        let sol = SimplexSolver::default().solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }
}
