//! Core data model: labeled MDPs, Markov chains, stationary policies,
//! specifications, and validation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Tolerance for stochasticity checks (row sums, distribution sums).
pub const PROB_TOL: f64 = 1e-9;

/// A sparse transition: target state, probability, and the reward collected
/// on taking this transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub target: usize,
    pub prob: f64,
    pub reward: f64,
}

/// A label is a named subset of states or of state-action pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelSet {
    States(Vec<usize>),
    Pairs(Vec<(usize, usize)>),
}

impl LabelSet {
    /// States mentioned by the label (for pair labels, the state part).
    pub fn states(&self) -> Vec<usize> {
        match self {
            LabelSet::States(s) => s.clone(),
            LabelSet::Pairs(p) => p.iter().map(|&(s, _)| s).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    /// Bound on the steady-state probability mass of the label.
    SteadyState,
    /// Bound on the expected total number of visits to the label.
    Transient,
}

/// A specification `lo <= mass(label) <= hi` of the given kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub kind: SpecKind,
}

/// Sparse labeled MDP with per-state action sets.
///
/// States are dense indices `0..n_states` with optional names; each state's
/// actions are `0..actions[s].len()` with the listed names. The kernel is
/// stored per `(s, a)` as a sparse list of [`Transition`]s.
#[derive(Debug, Clone)]
pub struct Mdp {
    pub state_names: Vec<String>,
    pub action_names: Vec<Vec<String>>,
    /// `transitions[s][a]` lists the outcomes of taking action `a` in `s`.
    pub transitions: Vec<Vec<Vec<Transition>>>,
    pub beta: Vec<f64>,
    pub labels: BTreeMap<String, LabelSet>,
    pub specs: Vec<Spec>,
}

impl Mdp {
    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn n_actions(&self, s: usize) -> usize {
        self.transitions[s].len()
    }

    pub fn max_actions(&self) -> usize {
        (0..self.n_states()).map(|s| self.n_actions(s)).max().unwrap_or(0)
    }

    /// Total number of state-action pairs.
    pub fn n_pairs(&self) -> usize {
        (0..self.n_states()).map(|s| self.n_actions(s)).sum()
    }

    /// Expected one-step reward `R(s,a) = sum_{s'} T(s'|s,a) R(s,a,s')`.
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.transitions[s][a].iter().map(|t| t.prob * t.reward).sum()
    }

    /// `T(s'|s,a)`, summing parallel entries if any.
    pub fn prob(&self, s: usize, a: usize, target: usize) -> f64 {
        self.transitions[s][a]
            .iter()
            .filter(|t| t.target == target)
            .map(|t| t.prob)
            .sum()
    }

    /// Directed graph with an edge s -> s' iff some action reaches s' with
    /// positive probability. Self-loops included.
    pub fn transition_graph(&self) -> Digraph {
        let mut g = Digraph::new(self.n_states());
        for s in 0..self.n_states() {
            for a in 0..self.n_actions(s) {
                for t in &self.transitions[s][a] {
                    if t.prob > 0.0 {
                        g.add_edge(s, t.target);
                    }
                }
            }
        }
        g
    }

    /// Clamp tiny negative probabilities (in [-PROB_TOL, 0)) to zero, the
    /// ingestion rule for externally produced kernels.
    pub fn clamp_probabilities(&mut self) {
        for rows in &mut self.transitions {
            for row in rows {
                for t in row {
                    if t.prob < 0.0 && t.prob >= -PROB_TOL {
                        t.prob = 0.0;
                    }
                }
            }
        }
        for b in &mut self.beta {
            if *b < 0.0 && *b >= -PROB_TOL {
                *b = 0.0;
            }
        }
    }

    /// The uniform stationary policy.
    pub fn uniform_policy(&self) -> StationaryPolicy {
        StationaryPolicy {
            rows: (0..self.n_states())
                .map(|s| {
                    let k = self.n_actions(s);
                    vec![1.0 / k as f64; k]
                })
                .collect(),
        }
    }

    /// Validate every structural invariant; the report is empty iff valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.n_states();
        if self.action_names.len() != n {
            violations.push(format!(
                "action name table covers {} states, model has {n}",
                self.action_names.len()
            ));
        }
        if self.transitions.len() != n {
            violations.push(format!(
                "transition table covers {} states, model has {n}",
                self.transitions.len()
            ));
        }
        if self.beta.len() != n {
            violations.push(format!("beta has {} entries, model has {n} states", self.beta.len()));
        }

        for s in 0..n.min(self.transitions.len()) {
            if self.transitions[s].is_empty() {
                violations.push(format!("state {} has an empty action set", self.name(s)));
            }
            if s < self.action_names.len() && self.action_names[s].len() != self.transitions[s].len() {
                violations.push(format!(
                    "state {}: {} action names for {} actions",
                    self.name(s),
                    self.action_names[s].len(),
                    self.transitions[s].len()
                ));
            }
            for a in 0..self.transitions[s].len() {
                let mut sum = 0.0;
                for t in &self.transitions[s][a] {
                    if t.target >= n {
                        violations.push(format!(
                            "kernel entry ({}, {a}) targets unknown state {}",
                            self.name(s),
                            t.target
                        ));
                    }
                    if t.prob < 0.0 {
                        violations.push(format!(
                            "kernel entry ({}, {a}) has negative probability {}",
                            self.name(s),
                            t.prob
                        ));
                    }
                    sum += t.prob;
                }
                if (sum - 1.0).abs() > PROB_TOL {
                    violations.push(format!("kernel row ({}, {a}) sums to {sum}", self.name(s)));
                }
            }
        }

        let beta_sum: f64 = self.beta.iter().sum();
        if (beta_sum - 1.0).abs() > PROB_TOL {
            violations.push(format!("beta sums to {beta_sum}"));
        }
        for (s, &b) in self.beta.iter().enumerate() {
            if b < 0.0 {
                violations.push(format!("beta[{}] = {b} is negative", self.name(s)));
            }
        }

        for (name, set) in &self.labels {
            match set {
                LabelSet::States(states) => {
                    for &s in states {
                        if s >= n {
                            violations.push(format!("label '{name}' references unknown state {s}"));
                        }
                    }
                }
                LabelSet::Pairs(pairs) => {
                    for &(s, a) in pairs {
                        if s >= n {
                            violations.push(format!("label '{name}' references unknown state {s}"));
                        } else if a >= self.transitions[s].len() {
                            violations.push(format!(
                                "label '{name}' references unknown action {a} at state {}",
                                self.name(s)
                            ));
                        }
                    }
                }
            }
        }

        for (i, spec) in self.specs.iter().enumerate() {
            if !self.labels.contains_key(&spec.label) {
                violations.push(format!("spec #{i} references unknown label '{}'", spec.label));
            }
            if spec.lo > spec.hi {
                violations.push(format!("spec #{i} ('{}') has lo {} > hi {}", spec.label, spec.lo, spec.hi));
            }
            match spec.kind {
                SpecKind::SteadyState => {
                    if spec.lo < 0.0 || spec.hi > 1.0 {
                        violations.push(format!(
                            "spec #{i} ('{}') steady-state bounds [{}, {}] outside [0, 1]",
                            spec.label, spec.lo, spec.hi
                        ));
                    }
                }
                SpecKind::Transient => {
                    if spec.lo < 0.0 {
                        violations.push(format!(
                            "spec #{i} ('{}') transient lower bound {} is negative",
                            spec.label, spec.lo
                        ));
                    }
                }
            }
        }

        ValidationReport { violations }
    }

    /// Validate and convert the report into an error if nonempty.
    pub fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(report.to_string()))
        }
    }

    pub fn name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn label_states(&self, label: &str) -> Option<&LabelSet> {
        self.labels.get(label)
    }

    /// Markov chain induced by a stationary policy:
    /// `T_pi(s'|s) = sum_a T(s'|s,a) pi(a|s)`.
    pub fn induced_chain(&self, policy: &StationaryPolicy) -> Result<MarkovChain> {
        policy.check_supported(self)?;
        let n = self.n_states();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for s in 0..n {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for a in 0..self.n_actions(s) {
                let p_a = policy.rows[s][a];
                if p_a == 0.0 {
                    continue;
                }
                for t in &self.transitions[s][a] {
                    if t.prob > 0.0 {
                        *acc.entry(t.target).or_insert(0.0) += p_a * t.prob;
                    }
                }
            }
            rows.push(acc.into_iter().collect());
        }
        Ok(MarkovChain { state_names: self.state_names.clone(), rows, beta: self.beta.clone() })
    }
}

/// Report of every violated model invariant; empty iff the model is valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// Finite Markov chain with a sparse row-stochastic transition matrix.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    pub state_names: Vec<String>,
    /// `rows[s]` lists `(s', T(s'|s))` with positive probability.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub beta: Vec<f64>,
}

impl MarkovChain {
    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn prob(&self, s: usize, target: usize) -> f64 {
        self.rows[s].iter().filter(|&&(t, _)| t == target).map(|&(_, p)| p).sum()
    }

    pub fn transition_graph(&self) -> Digraph {
        let mut g = Digraph::new(self.n_states());
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, p) in row {
                if p > 0.0 {
                    g.add_edge(s, t);
                }
            }
        }
        g
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (s, row) in self.rows.iter().enumerate() {
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > PROB_TOL {
                violations.push(format!("chain row {s} sums to {sum}"));
            }
            for &(t, p) in row {
                if t >= self.n_states() {
                    violations.push(format!("chain row {s} targets unknown state {t}"));
                }
                if p < 0.0 {
                    violations.push(format!("chain entry ({s}, {t}) is negative"));
                }
            }
        }
        let bs: f64 = self.beta.iter().sum();
        if (bs - 1.0).abs() > PROB_TOL {
            violations.push(format!("beta sums to {bs}"));
        }
        ValidationReport { violations }
    }

    /// Dense transition matrix (row-major), for the linear-algebra layer.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_states();
        let mut m = vec![vec![0.0; n]; n];
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, p) in row {
                m[s][t] += p;
            }
        }
        m
    }
}

/// Stationary policy: one distribution over `A(s)` per state.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPolicy {
    /// `rows[s][a] = pi(a|s)`, indexed like the MDP's action lists.
    pub rows: Vec<Vec<f64>>,
}

impl StationaryPolicy {
    /// Deterministic policy from a choice of one action per state.
    pub fn deterministic(mdp: &Mdp, choice: &[usize]) -> Self {
        let rows = (0..mdp.n_states())
            .map(|s| {
                let mut row = vec![0.0; mdp.n_actions(s)];
                row[choice[s]] = 1.0;
                row
            })
            .collect();
        StationaryPolicy { rows }
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.rows[s][a]
    }

    /// Check each row is a distribution over the state's action set.
    pub fn check_supported(&self, mdp: &Mdp) -> Result<()> {
        if self.rows.len() != mdp.n_states() {
            return Err(Error::InvalidPolicy {
                state: self.rows.len(),
                reason: format!("policy covers {} states, model has {}", self.rows.len(), mdp.n_states()),
            });
        }
        for s in 0..self.rows.len() {
            if self.rows[s].len() != mdp.n_actions(s) {
                return Err(Error::InvalidPolicy {
                    state: s,
                    reason: format!(
                        "row has {} entries for {} actions",
                        self.rows[s].len(),
                        mdp.n_actions(s)
                    ),
                });
            }
            let sum: f64 = self.rows[s].iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy { state: s, reason: format!("row sums to {sum}") });
            }
            if self.rows[s].iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidPolicy { state: s, reason: "negative entry".into() });
            }
        }
        Ok(())
    }
}

/// Builder-style construction of small MDPs, used by the environment
/// generators and tests.
pub struct MdpBuilder {
    state_names: Vec<String>,
    action_names: Vec<Vec<String>>,
    transitions: Vec<Vec<Vec<Transition>>>,
    beta: Vec<f64>,
    labels: BTreeMap<String, LabelSet>,
    specs: Vec<Spec>,
}

impl MdpBuilder {
    pub fn new(state_names: Vec<String>) -> Self {
        let n = state_names.len();
        MdpBuilder {
            state_names,
            action_names: vec![Vec::new(); n],
            transitions: vec![Vec::new(); n],
            beta: vec![0.0; n],
            labels: BTreeMap::new(),
            specs: Vec::new(),
        }
    }

    pub fn with_indexed_states(n: usize) -> Self {
        Self::new((1..=n).map(|i| format!("s{i}")).collect())
    }

    /// Add an action to `s`; `outcomes` are (target, prob, reward).
    pub fn action(&mut self, s: usize, name: &str, outcomes: &[(usize, f64, f64)]) -> &mut Self {
        self.action_names[s].push(name.to_string());
        self.transitions[s].push(
            outcomes
                .iter()
                .map(|&(target, prob, reward)| Transition { target, prob, reward })
                .collect(),
        );
        self
    }

    pub fn beta(&mut self, beta: Vec<f64>) -> &mut Self {
        self.beta = beta;
        self
    }

    pub fn label(&mut self, name: &str, set: LabelSet) -> &mut Self {
        self.labels.insert(name.to_string(), set);
        self
    }

    pub fn spec(&mut self, label: &str, lo: f64, hi: f64, kind: SpecKind) -> &mut Self {
        self.specs.push(Spec { label: label.to_string(), lo, hi, kind });
        self
    }

    pub fn build(&mut self) -> Mdp {
        Mdp {
            state_names: std::mem::take(&mut self.state_names),
            action_names: std::mem::take(&mut self.action_names),
            transitions: std::mem::take(&mut self.transitions),
            beta: std::mem::take(&mut self.beta),
            labels: std::mem::take(&mut self.labels),
            specs: std::mem::take(&mut self.specs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env;

    #[test]
    fn three_state_is_valid() {
        let mdp = env::three_state(env::ThreeStateScenario::Lp0);
        assert!(mdp.validate().is_valid());
    }

    #[test]
    fn bad_row_sum_reported() {
        let mut mdp = env::three_state(env::ThreeStateScenario::Lp0);
        mdp.transitions[0][0][0].prob = 0.9;
        let report = mdp.validate();
        assert!(!report.is_valid());
        assert!(report.to_string().contains("sums to 0.9"));
    }

    #[test]
    fn unknown_label_in_spec_reported() {
        let mut mdp = env::three_state(env::ThreeStateScenario::Lp0);
        mdp.specs.push(Spec { label: "gold9".into(), lo: 0.0, hi: 1.0, kind: SpecKind::SteadyState });
        let report = mdp.validate();
        assert!(report.to_string().contains("gold9"));
    }

    #[test]
    fn transition_graph_of_three_state() {
        let mdp = env::three_state(env::ThreeStateScenario::Lp0);
        let g = mdp.transition_graph();
        let edges: Vec<(usize, usize)> = (0..3)
            .flat_map(|u| g.successors(u).iter().map(move |&v| (u, v)))
            .collect();
        let mut edges = edges;
        edges.sort_unstable();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]);
    }

    #[test]
    fn induced_chain_matches_hand_computation() {
        // Uniform policy on the three-state model: each row of the induced
        // chain splits 0.5/0.5 between the two action targets.
        let mdp = env::three_state(env::ThreeStateScenario::Lp0);
        let chain = mdp.induced_chain(&mdp.uniform_policy()).unwrap();
        assert!((chain.prob(0, 1) - 0.5).abs() < 1e-15);
        assert!((chain.prob(0, 2) - 0.5).abs() < 1e-15);
        assert!((chain.prob(1, 1) - 0.5).abs() < 1e-15);
        assert!((chain.prob(1, 2) - 0.5).abs() < 1e-15);
        assert!((chain.prob(2, 1) - 0.5).abs() < 1e-15);
        assert!((chain.prob(2, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn induced_chain_deterministic_policy() {
        // pi(a1|s1) = pi(a2|s2) = pi(a2|s3) = 1 gives s1->s2, s2->s2, s3->s3.
        let mdp = env::three_state(env::ThreeStateScenario::Lp0);
        let pi = StationaryPolicy::deterministic(&mdp, &[0, 1, 1]);
        let chain = mdp.induced_chain(&pi).unwrap();
        assert_eq!(chain.rows[0], vec![(1, 1.0)]);
        assert_eq!(chain.rows[1], vec![(1, 1.0)]);
        assert_eq!(chain.rows[2], vec![(2, 1.0)]);
    }

    #[test]
    fn non_stochastic_policy_rejected() {
        let mdp = env::three_state(env::ThreeStateScenario::Lp0);
        let pi = StationaryPolicy { rows: vec![vec![0.7, 0.7], vec![1.0, 0.0], vec![1.0, 0.0]] };
        assert!(matches!(mdp.induced_chain(&pi), Err(Error::InvalidPolicy { state: 0, .. })));
    }
}
