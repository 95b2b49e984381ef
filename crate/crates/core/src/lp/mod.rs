//! Solver-agnostic linear programs over named variables, the reference
//! simplex solver, program construction, and policy extraction.

mod build;
mod export;
mod extract;
mod simplex;

pub use build::{
    add_transient_spec_constraints, build_kallenberg, build_lp1, build_lp2, build_lp3, build_q0,
    build_unichain_lp,
};
pub use export::write_lp_format;
pub use extract::{
    extract_policy, find_cuts, support_digraph, synthesize, synthesize_cpu, Cut, IterationRecord,
    SupportDigraph, SynthMode, SynthesisOutcome, SynthesisTrace,
};
pub use simplex::SimplexSolver;

use std::collections::HashMap;

use crate::error::Result;

/// Identity of an LP decision variable.
///
/// `X`/`Y` are state-action occupation and transient-visit variables; `Flow`
/// and `FlowRev` live on the intra-TSCC transition-relation edges `(s, s')`
/// with `s != s'`. `FlowRev(s, s')` is the flow assigned to the edge in the
/// reversed orientation (from `s'` to `s`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    X(usize, usize),
    Y(usize, usize),
    Flow(usize, usize),
    FlowRev(usize, usize),
}

impl std::fmt::Display for VarKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarKey::X(s, a) => write!(f, "x_s{s}_a{a}"),
            VarKey::Y(s, a) => write!(f, "y_s{s}_a{a}"),
            VarKey::Flow(s, t) => write!(f, "f_s{s}_s{t}"),
            VarKey::FlowRev(s, t) => write!(f, "frev_s{s}_s{t}"),
        }
    }
}

/// Constraint groups. The roman-numeral codes match the tags used throughout
/// the construction functions and the LP export:
/// (i) stationarity of x, (ii) flow balance of y, (iii) zero steady-state
/// mass off the TSCCs, (iv) steady-state specification bounds, (v)' strict
/// support of x in the TSCCs (as variable lower bounds), (vi)-(xiv) the flow
/// system enforcing recurrence per TSCC, (xv) transient specification
/// bounds; cuts are the row-generation constraints, and `MassNorm` is the
/// single-recurrent-class baseline's normalization row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintTag {
    Stationarity(usize),
    Balance(usize),
    NoTransientMass,
    SteadySpecLo(usize),
    SteadySpecHi(usize),
    FlowInit(usize),
    FlowRevInit(usize),
    FlowCap(usize),
    FlowRevCap(usize),
    FlowTransfer(usize),
    FlowRevTransfer(usize),
    FlowIn(usize),
    FlowRevIn(usize),
    TransientSpecLo(usize),
    TransientSpecHi(usize),
    Cut { tscc: usize, serial: usize },
    MassNorm,
}

impl ConstraintTag {
    pub fn group(&self) -> &'static str {
        match self {
            ConstraintTag::Stationarity(_) => "i",
            ConstraintTag::Balance(_) => "ii",
            ConstraintTag::NoTransientMass => "iii",
            ConstraintTag::SteadySpecLo(_) | ConstraintTag::SteadySpecHi(_) => "iv",
            ConstraintTag::FlowInit(_) => "vi",
            ConstraintTag::FlowRevInit(_) => "vii",
            ConstraintTag::FlowCap(_) => "viii",
            ConstraintTag::FlowRevCap(_) => "ix",
            ConstraintTag::FlowTransfer(_) => "x",
            ConstraintTag::FlowRevTransfer(_) => "xi",
            ConstraintTag::FlowIn(_) => "xii",
            ConstraintTag::FlowRevIn(_) => "xiii",
            ConstraintTag::TransientSpecLo(_) | ConstraintTag::TransientSpecHi(_) => "xv",
            ConstraintTag::Cut { .. } => "cut",
            ConstraintTag::MassNorm => "norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// A single linear constraint `sum coeff_j v_j REL rhs` over variable indices.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub tag: ConstraintTag,
    pub terms: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

/// A linear program: bounded named variables, a maximization objective, and
/// tagged constraints. Strict inequalities never appear; every strictness in
/// the source formulations is pre-converted to `>= rhs + epsilon`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub name: String,
    vars: Vec<VarKey>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    index: HashMap<VarKey, usize>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>) -> Self {
        LinearProgram {
            name: name.into(),
            vars: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            objective: Vec::new(),
            index: HashMap::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, key: VarKey, lo: f64, hi: f64) -> usize {
        debug_assert!(!self.index.contains_key(&key), "duplicate variable {key}");
        let idx = self.vars.len();
        self.vars.push(key);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.push(0.0);
        self.index.insert(key, idx);
        idx
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_key(&self, idx: usize) -> VarKey {
        self.vars[idx]
    }

    pub fn var_index(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn bounds(&self, idx: usize) -> (f64, f64) {
        (self.lower[idx], self.upper[idx])
    }

    pub fn set_lower(&mut self, key: VarKey, lo: f64) {
        let idx = self.index[&key];
        self.lower[idx] = lo;
    }

    pub fn set_upper(&mut self, key: VarKey, hi: f64) {
        let idx = self.index[&key];
        self.upper[idx] = hi;
    }

    pub fn set_objective(&mut self, key: VarKey, coeff: f64) {
        let idx = self.index[&key];
        self.objective[idx] = coeff;
    }

    pub fn objective_coeffs(&self) -> &[f64] {
        &self.objective
    }

    /// Add a constraint from (key, coeff) terms; merges repeated keys.
    pub fn add_constraint(
        &mut self,
        tag: ConstraintTag,
        terms: impl IntoIterator<Item = (VarKey, f64)>,
        rel: Relation,
        rhs: f64,
    ) {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (key, coeff) in terms {
            if coeff == 0.0 {
                continue;
            }
            let idx = *self
                .index
                .get(&key)
                .unwrap_or_else(|| panic!("constraint references undeclared variable {key}"));
            *acc.entry(idx).or_insert(0.0) += coeff;
        }
        let mut terms: Vec<(usize, f64)> = acc.into_iter().filter(|&(_, c)| c != 0.0).collect();
        terms.sort_unstable_by_key(|&(i, _)| i);
        self.constraints.push(Constraint { tag, terms, rel, rhs });
    }

    /// Maximum violation of bounds and constraints at the given point.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for j in 0..self.n_vars() {
            v = v.max(self.lower[j] - values[j]).max(values[j] - self.upper[j]);
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, coef)| coef * values[j]).sum();
            match c.rel {
                Relation::Le => v = v.max(lhs - c.rhs),
                Relation::Ge => v = v.max(c.rhs - lhs),
                Relation::Eq => v = v.max((lhs - c.rhs).abs()),
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of a solve. `values` is indexed like the program's variables.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn value(&self, lp: &LinearProgram, key: VarKey) -> f64 {
        lp.var_index(key).map(|i| self.values[i]).unwrap_or(0.0)
    }

    /// Values of the X variables laid out per (state, action).
    pub fn x_values(&self, lp: &LinearProgram, mdp: &crate::mdp::Mdp) -> Vec<Vec<f64>> {
        (0..mdp.n_states())
            .map(|s| (0..mdp.n_actions(s)).map(|a| self.value(lp, VarKey::X(s, a))).collect())
            .collect()
    }

    pub fn y_values(&self, lp: &LinearProgram, mdp: &crate::mdp::Mdp) -> Vec<Vec<f64>> {
        (0..mdp.n_states())
            .map(|s| (0..mdp.n_actions(s)).map(|a| self.value(lp, VarKey::Y(s, a))).collect())
            .collect()
    }
}

/// Abstract LP solver; deterministic given identical input.
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution>;
}

/// Knobs of the synthesis pipeline.
#[derive(Debug, Clone)]
pub struct SynthesisConfig {
    /// Relaxation of strict inequalities: TSCC support lower bounds and the
    /// strict flow inequalities become `>= epsilon_pos`.
    pub epsilon_pos: f64,
    /// Right-hand side of generated cut constraints.
    pub epsilon_cut: f64,
    /// Cut-generation budget; `None` means `|S| * max |A(s)|`.
    pub max_cut_iterations: Option<usize>,
    /// Support threshold separating solver noise from genuine support.
    pub support_threshold: f64,
    /// Fill rule for states with neither x nor y mass.
    pub fill: FillRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillRule {
    Uniform,
    FirstAction,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            epsilon_pos: 1e-4,
            epsilon_cut: 1e-4,
            max_cut_iterations: None,
            support_threshold: 1e-12,
            fill: FillRule::Uniform,
        }
    }
}

impl SynthesisConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        SynthesisConfig { epsilon_pos: epsilon, ..Default::default() }
    }

    pub fn cut_budget(&self, mdp: &crate::mdp::Mdp) -> usize {
        self.max_cut_iterations
            .unwrap_or_else(|| (mdp.n_states() * mdp.max_actions()).max(8))
    }
}
