//! Exact limiting-behavior computation for finite Markov chains: canonical
//! decomposition, stationary matrix via its block structure (never by
//! iterating matrix powers), occupation measures, expected visits to
//! transient states, average reward, and specification checking.

use nalgebra::{DMatrix, DVector};

use crate::classify::{classify_chain, classify_mdp, policy_class_from, PolicyClassFlags, StateClassification};
use crate::error::{Error, Result};
use crate::mdp::{LabelSet, MarkovChain, Mdp, Spec, SpecKind, StationaryPolicy};

/// Tolerance on the total occupation-measure mass.
pub const MASS_TOL: f64 = 1e-8;
/// Residual above which a block is rejected as not a single recurrent class.
pub const UNICHAIN_RESIDUAL_TOL: f64 = 1e-7;

/// Block structure of a chain's transition matrix: one block per closed SCC
/// (`classes`), and the non-closed states `f_states` with their internal
/// block `Z` and coupling blocks `L_k` into each class.
#[derive(Debug, Clone)]
pub struct CanonicalDecomposition {
    pub classes: Vec<Vec<usize>>,
    pub class_blocks: Vec<DMatrix<f64>>,
    pub f_states: Vec<usize>,
    pub z_block: DMatrix<f64>,
    pub l_blocks: Vec<DMatrix<f64>>,
}

impl CanonicalDecomposition {
    /// Rebuild the full matrix in the original state order. Entries are
    /// copied, not recomputed, so the round trip is exact.
    pub fn reconstruct(&self, n: usize) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(n, n);
        for (k, class) in self.classes.iter().enumerate() {
            let block = &self.class_blocks[k];
            for (i, &si) in class.iter().enumerate() {
                for (j, &sj) in class.iter().enumerate() {
                    t[(si, sj)] = block[(i, j)];
                }
            }
            let l = &self.l_blocks[k];
            for (i, &fi) in self.f_states.iter().enumerate() {
                for (j, &sj) in class.iter().enumerate() {
                    t[(fi, sj)] = l[(i, j)];
                }
            }
        }
        for (i, &fi) in self.f_states.iter().enumerate() {
            for (j, &fj) in self.f_states.iter().enumerate() {
                t[(fi, fj)] = self.z_block[(i, j)];
            }
        }
        t
    }
}

/// Permute the chain into canonical block form using its classification.
pub fn canonical_form(chain: &MarkovChain, cls: &StateClassification) -> CanonicalDecomposition {
    let classes = cls.recurrent_classes.clone();
    let mut closed = vec![false; chain.n_states()];
    for c in &classes {
        for &s in c {
            closed[s] = true;
        }
    }
    let f_states: Vec<usize> = (0..chain.n_states()).filter(|&s| !closed[s]).collect();

    let dense = chain.dense();
    let class_blocks = classes
        .iter()
        .map(|c| DMatrix::from_fn(c.len(), c.len(), |i, j| dense[c[i]][c[j]]))
        .collect();
    let z_block = DMatrix::from_fn(f_states.len(), f_states.len(), |i, j| dense[f_states[i]][f_states[j]]);
    let l_blocks = classes
        .iter()
        .map(|c| DMatrix::from_fn(f_states.len(), c.len(), |i, j| dense[f_states[i]][c[j]]))
        .collect();

    CanonicalDecomposition { classes, class_blocks, f_states, z_block, l_blocks }
}

/// Stationary distribution of a single recurrent class block: the solution of
/// `eta^T T_k = eta^T`, `sum eta = 1`, `eta >= 0`, computed as a least-squares
/// solve of the stacked homogeneous system plus the normalization row. Robust
/// to periodic classes. Errors if the residual betrays more than one class.
pub fn class_stationary_distribution(block: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = block.nrows();
    assert_eq!(n, block.ncols(), "class block must be square");
    // Rows 0..n: (I - T^T) eta = 0; row n: 1^T eta = 1.
    let mut a = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (if i == j { 1.0 } else { 0.0 }) - block[(j, i)];
        }
    }
    for j in 0..n {
        a[(n, j)] = 1.0;
    }
    let mut b = DVector::zeros(n + 1);
    b[n] = 1.0;

    let svd = a.clone().svd(true, true);
    // Uniqueness requires full column rank; a block holding more than one
    // recurrent class leaves the stationary system underdetermined (and the
    // minimum-norm solution would quietly average the classes).
    let max_sv = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * max_sv.max(1.0)).count();
    if rank < n {
        return Err(Error::NotUnichain { residual: svd.singular_values.min() });
    }
    let eta = svd.solve(&b, 1e-13).map_err(|e| Error::Solver(format!("SVD solve failed: {e}")))?;
    let residual = (&a * &eta - &b).amax();
    if residual > UNICHAIN_RESIDUAL_TOL {
        return Err(Error::NotUnichain { residual });
    }
    // Clamp solver noise; the residual check above bounds the damage.
    let eta = eta.map(|v| if v < 0.0 { 0.0 } else { v });
    Ok(eta)
}

/// Absorption probabilities from the non-closed states into each class:
/// column k solves `(I - Z) p_k = L_k 1`. Errors when `(I - Z)` is singular,
/// i.e. the designated block is not substochastic toward absorption.
pub fn absorption_probabilities(z: &DMatrix<f64>, l_blocks: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let nf = z.nrows();
    let m = l_blocks.len();
    let mut rhs = DMatrix::zeros(nf, m);
    for (k, l) in l_blocks.iter().enumerate() {
        for i in 0..nf {
            rhs[(i, k)] = l.row(i).sum();
        }
    }
    let i_minus_z = DMatrix::identity(nf, nf) - z;
    let lu = i_minus_z.lu();
    lu.solve(&rhs)
        .ok_or_else(|| Error::NonTransientBlock("(I - Z) is singular".into()))
}

/// The stationary matrix, assembled structurally from per-class stationary
/// distributions and absorption probabilities:
/// rows within class k repeat `eta`; rows of non-closed states mix the class
/// etas by their absorption probabilities; all other entries are zero.
pub fn stationary_matrix(chain: &MarkovChain) -> Result<DMatrix<f64>> {
    let cls = classify_chain(chain);
    stationary_matrix_with(chain, &cls)
}

/// [`stationary_matrix`] with a precomputed classification.
pub fn stationary_matrix_with(chain: &MarkovChain, cls: &StateClassification) -> Result<DMatrix<f64>> {
    let n = chain.n_states();
    let canon = canonical_form(chain, cls);
    let etas: Vec<DVector<f64>> = canon
        .class_blocks
        .iter()
        .map(class_stationary_distribution)
        .collect::<Result<_>>()?;

    let mut t_inf = DMatrix::zeros(n, n);
    for (k, class) in canon.classes.iter().enumerate() {
        for &si in class {
            for (j, &sj) in class.iter().enumerate() {
                t_inf[(si, sj)] = etas[k][j];
            }
        }
    }
    if !canon.f_states.is_empty() {
        let p = absorption_probabilities(&canon.z_block, &canon.l_blocks)?;
        for (i, &fi) in canon.f_states.iter().enumerate() {
            for (k, class) in canon.classes.iter().enumerate() {
                for (j, &sj) in class.iter().enumerate() {
                    t_inf[(fi, sj)] = p[(i, k)] * etas[k][j];
                }
            }
        }
    }
    Ok(t_inf)
}

/// Long-run fraction of time in each state-action pair and its state
/// marginal. Entries vanish exactly on transient and isolated states.
#[derive(Debug, Clone)]
pub struct OccupationMeasure {
    /// `pairs[s][a] = Pr_inf(s, a)`.
    pub pairs: Vec<Vec<f64>>,
    /// `marginal[s] = sum_a pairs[s][a] = (beta^T T_inf)_s`.
    pub marginal: Vec<f64>,
}

impl OccupationMeasure {
    pub fn total(&self) -> f64 {
        self.marginal.iter().sum()
    }

    pub fn label_mass(&self, set: &LabelSet) -> f64 {
        match set {
            LabelSet::States(states) => states.iter().map(|&s| self.marginal[s]).sum(),
            LabelSet::Pairs(pairs) => pairs.iter().map(|&(s, a)| self.pairs[s][a]).sum(),
        }
    }
}

/// Expected total visits to each transient state of the induced chain;
/// zero on recurrent and isolated states.
#[derive(Debug, Clone)]
pub struct TransientVisits {
    /// `zeta[s]`; meaningful on the induced chain's transient states.
    pub zeta: Vec<f64>,
    /// `zeta[s] * pi(a|s)` per state-action pair.
    pub pairs: Vec<Vec<f64>>,
    /// The states the linear solve covered (transient in the induced chain).
    pub transient_states: Vec<usize>,
}

impl TransientVisits {
    pub fn label_visits(&self, set: &LabelSet) -> f64 {
        match set {
            LabelSet::States(states) => states.iter().map(|&s| self.zeta[s]).sum(),
            LabelSet::Pairs(pairs) => pairs.iter().map(|&(s, a)| self.pairs[s][a]).sum(),
        }
    }

    pub fn total(&self) -> f64 {
        self.transient_states.iter().map(|&s| self.zeta[s]).sum()
    }
}

/// Occupation measure of a policy: `Pr_inf(s,a) = (beta^T T_inf)_s pi(a|s)`.
pub fn occupation_measure(mdp: &Mdp, policy: &StationaryPolicy) -> Result<OccupationMeasure> {
    let chain = mdp.induced_chain(policy)?;
    occupation_measure_of_chain(mdp, policy, &chain)
}

pub fn occupation_measure_of_chain(
    mdp: &Mdp,
    policy: &StationaryPolicy,
    chain: &MarkovChain,
) -> Result<OccupationMeasure> {
    let t_inf = stationary_matrix(chain)?;
    let n = mdp.n_states();
    let mut marginal = vec![0.0; n];
    for s in 0..n {
        if chain.beta[s] == 0.0 {
            continue;
        }
        for j in 0..n {
            marginal[j] += chain.beta[s] * t_inf[(s, j)];
        }
    }
    let pairs = (0..n)
        .map(|s| (0..mdp.n_actions(s)).map(|a| marginal[s] * policy.prob(s, a)).collect())
        .collect();
    Ok(OccupationMeasure { pairs, marginal })
}

/// Expected average reward `sum_{s,a} Pr_inf(s,a) R(s,a)`.
pub fn expected_average_reward(mdp: &Mdp, policy: &StationaryPolicy) -> Result<f64> {
    let occ = occupation_measure(mdp, policy)?;
    Ok(average_reward_of(mdp, &occ))
}

pub fn average_reward_of(mdp: &Mdp, occ: &OccupationMeasure) -> f64 {
    let mut r = 0.0;
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            let mass = occ.pairs[s][a];
            if mass != 0.0 {
                r += mass * mdp.reward(s, a);
            }
        }
    }
    r
}

/// Expected visits to the induced chain's transient states, by one linear
/// solve `zeta^T (I - Z) = beta^T` restricted to those states. Isolated
/// states get zero by definition and never enter the solve.
pub fn expected_visits(mdp: &Mdp, policy: &StationaryPolicy) -> Result<TransientVisits> {
    let chain = mdp.induced_chain(policy)?;
    expected_visits_of_chain(mdp, policy, &chain)
}

pub fn expected_visits_of_chain(
    mdp: &Mdp,
    policy: &StationaryPolicy,
    chain: &MarkovChain,
) -> Result<TransientVisits> {
    let cls = classify_chain(chain);
    let transient = cls.transient.clone();
    let n = chain.n_states();
    let mut zeta = vec![0.0; n];
    if !transient.is_empty() {
        let nf = transient.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &s) in transient.iter().enumerate() {
            pos[s] = i;
        }
        let mut z = DMatrix::zeros(nf, nf);
        for (i, &s) in transient.iter().enumerate() {
            for &(t, p) in &chain.rows[s] {
                if pos[t] != usize::MAX {
                    z[(i, pos[t])] = p;
                }
            }
        }
        let beta_f = DVector::from_fn(nf, |i, _| chain.beta[transient[i]]);
        // zeta^T (I - Z) = beta^T  <=>  (I - Z)^T zeta = beta.
        let system = (DMatrix::identity(nf, nf) - z).transpose();
        let sol = system
            .lu()
            .solve(&beta_f)
            .ok_or_else(|| Error::NonTransientBlock("(I - Z) is singular".into()))?;
        for (i, &s) in transient.iter().enumerate() {
            zeta[s] = sol[i].max(0.0);
        }
    }
    let pairs = (0..n)
        .map(|s| (0..mdp.n_actions(s)).map(|a| zeta[s] * policy.prob(s, a)).collect())
        .collect();
    Ok(TransientVisits { zeta, pairs, transient_states: transient })
}

/// Outcome of checking one specification.
#[derive(Debug, Clone)]
pub struct SpecResult {
    pub spec: Spec,
    pub attained: f64,
    pub satisfied: bool,
    /// Distance to the nearer violated bound (negative when violated).
    pub slack: f64,
}

// Attained values carry the LP solver's feasibility tolerance (1e-7) plus
// the correspondence residual, so the pass/fail gate allows 1e-6.
const SPEC_TOL: f64 = 1e-6;

/// Evaluate every specification against computed measures. Steady-state
/// specs read the occupation measure; transient specs read expected visits
/// and must label a subset of the MDP's non-TSCC states.
pub fn check_specs(
    mdp: &Mdp,
    mdp_cls: &StateClassification,
    occ: &OccupationMeasure,
    visits: &TransientVisits,
) -> Result<Vec<SpecResult>> {
    let mut results = Vec::with_capacity(mdp.specs.len());
    for spec in &mdp.specs {
        let set = mdp.labels.get(&spec.label).ok_or_else(|| Error::InvalidSpec {
            label: spec.label.clone(),
            reason: "label not defined".into(),
        })?;
        let attained = match spec.kind {
            SpecKind::SteadyState => occ.label_mass(set),
            SpecKind::Transient => {
                if let Some(&s) = set.states().iter().find(|&&s| mdp_cls.is_in_tscc(s)) {
                    return Err(Error::InvalidSpec {
                        label: spec.label.clone(),
                        reason: format!("transient spec touches TSCC state {}", mdp.name(s)),
                    });
                }
                visits.label_visits(set)
            }
        };
        let slack = (attained - spec.lo).min(spec.hi - attained);
        results.push(SpecResult {
            spec: spec.clone(),
            attained,
            satisfied: attained >= spec.lo - SPEC_TOL && attained <= spec.hi + SPEC_TOL,
            slack,
        });
    }
    Ok(results)
}

/// Full analytic verification of a policy on a labeled MDP.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub occupation: OccupationMeasure,
    pub visits: TransientVisits,
    pub average_reward: f64,
    pub spec_results: Vec<SpecResult>,
    pub flags: PolicyClassFlags,
    pub chain_classification: StateClassification,
    /// `max |Pr_inf(s,a) - x*(s,a)|` when the LP solution is available.
    pub residual_x: Option<f64>,
    /// `max |zeta(f) - y*(f)|` over the induced chain's transient states.
    pub residual_y: Option<f64>,
}

impl VerificationReport {
    pub fn all_specs_pass(&self) -> bool {
        self.spec_results.iter().all(|r| r.satisfied)
    }
}

/// Compute the verification report, optionally against LP-provided
/// state-action values `x_star` / `y_star` (indexed like the MDP's pairs).
pub fn verify_policy(
    mdp: &Mdp,
    policy: &StationaryPolicy,
    x_star: Option<&[Vec<f64>]>,
    y_star: Option<&[Vec<f64>]>,
) -> Result<VerificationReport> {
    mdp.require_valid()?;
    let mdp_cls = classify_mdp(mdp)?;
    let chain = mdp.induced_chain(policy)?;
    let chain_cls = classify_chain(&chain);
    let occ = occupation_measure_of_chain(mdp, policy, &chain)?;
    let visits = expected_visits_of_chain(mdp, policy, &chain)?;
    let average_reward = average_reward_of(mdp, &occ);
    let spec_results = check_specs(mdp, &mdp_cls, &occ, &visits)?;
    let flags = policy_class_from(mdp, &mdp_cls, policy, &chain_cls);

    let residual_x = x_star.map(|xs| {
        let mut r: f64 = 0.0;
        for s in 0..mdp.n_states() {
            for a in 0..mdp.n_actions(s) {
                r = r.max((occ.pairs[s][a] - xs[s][a]).abs());
            }
        }
        r
    });
    // Compared on transient states only; on isolated closed components the
    // visit count is zero by definition while the LP's y is unconstrained
    // circulation, so they are not comparable there.
    let residual_y = y_star.map(|ys| {
        let mut r: f64 = 0.0;
        for &s in &visits.transient_states {
            let y_s: f64 = ys[s].iter().sum();
            r = r.max((visits.zeta[s] - y_s).abs());
        }
        r
    });

    Ok(VerificationReport {
        occupation: occ,
        visits,
        average_reward,
        spec_results,
        flags,
        chain_classification: chain_cls,
        residual_x,
        residual_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{self, ThreeStateScenario};
    use crate::mdp::StationaryPolicy;
    use approx::assert_abs_diff_eq;

    fn fig2c_chain() -> MarkovChain {
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let mut mdp = mdp;
        mdp.beta = vec![1.0, 0.0, 0.0];
        let pi = StationaryPolicy::deterministic(&mdp, &[0, 1, 1]);
        mdp.induced_chain(&pi).unwrap()
    }

    #[test]
    fn canonical_form_of_induced_chain() {
        let chain = fig2c_chain();
        let cls = classify_chain(&chain);
        let canon = canonical_form(&chain, &cls);
        assert_eq!(canon.classes, vec![vec![1], vec![2]]);
        assert_eq!(canon.f_states, vec![0]);
        assert_eq!(canon.z_block[(0, 0)], 0.0);
        assert_eq!(canon.l_blocks[0][(0, 0)], 1.0);
        assert_eq!(canon.l_blocks[1][(0, 0)], 0.0);
        // Exact round trip.
        let dense = chain.dense();
        let rebuilt = canon.reconstruct(3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(rebuilt[(i, j)], dense[i][j]);
            }
        }
    }

    #[test]
    fn canonical_form_irreducible() {
        let chain = MarkovChain {
            state_names: vec!["a".into(), "b".into()],
            rows: vec![vec![(1, 1.0)], vec![(0, 1.0)]],
            beta: vec![1.0, 0.0],
        };
        let cls = classify_chain(&chain);
        let canon = canonical_form(&chain, &cls);
        assert_eq!(canon.classes.len(), 1);
        assert!(canon.f_states.is_empty());
    }

    #[test]
    fn canonical_form_mixed_chain() {
        let chain = env::mixed_classification_chain();
        let cls = classify_chain(&chain);
        let canon = canonical_form(&chain, &cls);
        assert_eq!(canon.classes.len(), 3);
        assert_eq!(canon.f_states, vec![0, 1]);
        let rebuilt = canon.reconstruct(11);
        let dense = chain.dense();
        for i in 0..11 {
            for j in 0..11 {
                assert_eq!(rebuilt[(i, j)], dense[i][j]);
            }
        }
    }

    #[test]
    fn stationary_of_swap_chain() {
        // Two-state periodic swap: eta = (1/2, 1/2).
        let block = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eta = class_stationary_distribution(&block).unwrap();
        assert_abs_diff_eq!(eta[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eta[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn stationary_of_mixing_block() {
        // Stay 1-d / move d at s2; move 1-d / stay d at s3: eta = (1-d, d).
        let d = 0.1;
        let block = DMatrix::from_row_slice(2, 2, &[1.0 - d, d, 1.0 - d, d]);
        let eta = class_stationary_distribution(&block).unwrap();
        assert_abs_diff_eq!(eta[0], 1.0 - d, epsilon = 1e-12);
        assert_abs_diff_eq!(eta[1], d, epsilon = 1e-12);
    }

    #[test]
    fn stationary_of_absorbing_singleton() {
        let block = DMatrix::from_row_slice(1, 1, &[1.0]);
        let eta = class_stationary_distribution(&block).unwrap();
        assert_abs_diff_eq!(eta[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn non_unichain_block_rejected() {
        // Two absorbing states in one "block": stationary system is rank
        // deficient beyond normalization.
        let block = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(class_stationary_distribution(&block), Err(Error::NotUnichain { .. })));
    }

    #[test]
    fn absorption_from_fig2c() {
        let chain = fig2c_chain();
        let cls = classify_chain(&chain);
        let canon = canonical_form(&chain, &cls);
        let p = absorption_probabilities(&canon.z_block, &canon.l_blocks).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn absorption_symmetric_split() {
        // f exits 0.5 / 0.5 to two absorbing classes.
        let z = DMatrix::zeros(1, 1);
        let l1 = DMatrix::from_row_slice(1, 1, &[0.5]);
        let l2 = DMatrix::from_row_slice(1, 1, &[0.5]);
        let p = absorption_probabilities(&z, &[l1, l2]).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(0, 1)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn absorption_with_self_loop() {
        // f self-loops w.p. 0.9, exits w.p. 0.1: absorbed with probability 1.
        let z = DMatrix::from_row_slice(1, 1, &[0.9]);
        let l1 = DMatrix::from_row_slice(1, 1, &[0.1]);
        let p = absorption_probabilities(&z, &[l1]).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn absorption_singular_rejected() {
        let z = DMatrix::from_row_slice(1, 1, &[1.0]);
        let l1 = DMatrix::zeros(1, 1);
        assert!(matches!(
            absorption_probabilities(&z, &[l1]),
            Err(Error::NonTransientBlock(_))
        ));
    }

    #[test]
    fn stationary_matrix_fig2c() {
        let t_inf = stationary_matrix(&fig2c_chain()).unwrap();
        let expected = [[0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(t_inf[(i, j)], expected[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn stationary_matrix_periodic_swap() {
        let chain = MarkovChain {
            state_names: vec!["a".into(), "b".into()],
            rows: vec![vec![(1, 1.0)], vec![(0, 1.0)]],
            beta: vec![1.0, 0.0],
        };
        let t_inf = stationary_matrix(&chain).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(t_inf[(i, j)], 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn stationary_matrix_identity_chain() {
        let chain = MarkovChain {
            state_names: vec!["a".into(), "b".into()],
            rows: vec![vec![(0, 1.0)], vec![(1, 1.0)]],
            beta: vec![0.5, 0.5],
        };
        let t_inf = stationary_matrix(&chain).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(t_inf[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn occupation_measure_absorbed_at_s2() {
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.beta = vec![1.0, 0.0, 0.0];
        let pi = StationaryPolicy::deterministic(&mdp, &[0, 1, 1]);
        let occ = occupation_measure(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(occ.pairs[1][1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(occ.total(), 1.0, epsilon = 1e-12);
        assert_eq!(occ.pairs[0][0], 0.0);
        assert_eq!(occ.pairs[2][1], 0.0);
    }

    #[test]
    fn occupation_measure_split_start() {
        // Same policy, beta split over s2, s3: half the mass in each loop.
        let mdp = env::three_state(ThreeStateScenario::Lp0);
        let pi = StationaryPolicy::deterministic(&mdp, &[0, 1, 1]);
        let occ = occupation_measure(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(occ.pairs[1][1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(occ.pairs[2][1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn occupation_differs_from_lp_point() {
        // beta on s2: the policy absorbs everything at s2 even though the
        // balanced point x(s2,a2)=x(s3,a2)=1/2 is feasible for the LP.
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.beta = vec![0.0, 1.0, 0.0];
        let pi = StationaryPolicy::deterministic(&mdp, &[0, 1, 1]);
        let occ = occupation_measure(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(occ.pairs[1][1], 1.0, epsilon = 1e-12);
        assert!((occ.pairs[1][1] - 0.5).abs() > 0.49);
    }

    #[test]
    fn average_reward_of_mixing_policy() {
        // Mixing policy with d = 0.1 on the reward-shaped scenario:
        // 0.5 - 0.8 d + 0.4 d^2 = 0.424.
        let mdp = env::three_state(ThreeStateScenario::Bounded);
        let d = 0.1;
        let pi = StationaryPolicy {
            rows: vec![vec![0.5, 0.5], vec![d, 1.0 - d], vec![1.0 - d, d]],
        };
        let r = expected_average_reward(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(r, 0.424, epsilon = 1e-12);
    }

    #[test]
    fn average_reward_limit_policy() {
        // d = 0: stay at s2 forever once there.
        let mdp = env::three_state(ThreeStateScenario::Bounded);
        let pi = StationaryPolicy { rows: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]] };
        let r = expected_average_reward(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_rewards_give_zero() {
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        for rows in &mut mdp.transitions {
            for row in rows {
                for t in row {
                    t.reward = 0.0;
                }
            }
        }
        let r = expected_average_reward(&mdp, &mdp.uniform_policy()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn expected_visits_one_step_exit() {
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.beta = vec![1.0, 0.0, 0.0];
        let pi = StationaryPolicy::deterministic(&mdp, &[0, 1, 1]);
        let visits = expected_visits(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(visits.zeta[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn expected_visits_geometric() {
        // Self-loop with probability 1/2 before exiting: 2 expected visits.
        let mut b = crate::mdp::MdpBuilder::with_indexed_states(2);
        b.action(0, "a1", &[(0, 0.5, 0.0), (1, 0.5, 0.0)]);
        b.action(1, "a1", &[(1, 1.0, 0.0)]);
        b.beta(vec![1.0, 0.0]);
        let mdp = b.build();
        let pi = mdp.uniform_policy();
        let visits = expected_visits(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(visits.zeta[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn spec_checking_and_invalid_transient_label() {
        use crate::mdp::{Spec, SpecKind};
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.labels.insert("start".into(), LabelSet::States(vec![0]));
        mdp.labels.insert("loops".into(), LabelSet::States(vec![1, 2]));
        mdp.specs = vec![
            Spec { label: "loops".into(), lo: 0.9, hi: 1.0, kind: SpecKind::SteadyState },
            Spec { label: "start".into(), lo: 0.0, hi: 5.0, kind: SpecKind::Transient },
        ];
        let report = verify_policy(&mdp, &mdp.uniform_policy(), None, None).unwrap();
        assert!(report.all_specs_pass());

        // A transient spec touching the TSCC is rejected.
        mdp.specs.push(Spec { label: "loops".into(), lo: 0.0, hi: 5.0, kind: SpecKind::Transient });
        assert!(matches!(
            verify_policy(&mdp, &mdp.uniform_policy(), None, None),
            Err(Error::InvalidSpec { .. })
        ));
    }

    #[test]
    fn empty_label_attains_zero() {
        use crate::mdp::{Spec, SpecKind};
        let mut mdp = env::three_state(ThreeStateScenario::Lp0);
        mdp.labels.insert("none".into(), LabelSet::States(vec![]));
        mdp.specs = vec![Spec { label: "none".into(), lo: 0.0, hi: 1.0, kind: SpecKind::SteadyState }];
        let report = verify_policy(&mdp, &mdp.uniform_policy(), None, None).unwrap();
        assert_eq!(report.spec_results[0].attained, 0.0);
        assert!(report.spec_results[0].satisfied);
    }
}
