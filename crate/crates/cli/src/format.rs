//! On-disk JSON schemas for MDPs and policies, and their conversions to the
//! core model. Serialization is deterministic (sorted maps, fixed field
//! order), so generate -> parse -> serialize round-trips byte-identically.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use ssps_core::lp::SynthesisOutcome;
use ssps_core::mdp::{LabelSet, Mdp, MdpBuilder, Spec, SpecKind, StationaryPolicy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpFile {
    pub ssps_version: u32,
    pub states: Vec<String>,
    pub actions: Vec<Vec<String>>,
    pub transitions: Vec<TransitionRow>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub labels: BTreeMap<String, LabelDef>,
    #[serde(default)]
    pub specs: Vec<SpecDef>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRow {
    pub s: usize,
    pub a: usize,
    pub sp: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub r: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// A label is either a list of states or a list of [state, action] pairs.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelDef {
    States(Vec<usize>),
    Pairs(Vec<[usize; 2]>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDef {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub kind: SpecKindDef,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum SpecKindDef {
    #[serde(rename = "steady-state")]
    SteadyState,
    #[serde(rename = "transient")]
    Transient,
}

impl From<SpecKindDef> for SpecKind {
    fn from(k: SpecKindDef) -> SpecKind {
        match k {
            SpecKindDef::SteadyState => SpecKind::SteadyState,
            SpecKindDef::Transient => SpecKind::Transient,
        }
    }
}

impl From<SpecKind> for SpecKindDef {
    fn from(k: SpecKind) -> SpecKindDef {
        match k {
            SpecKind::SteadyState => SpecKindDef::SteadyState,
            SpecKind::Transient => SpecKindDef::Transient,
        }
    }
}

pub fn mdp_to_file(mdp: &Mdp) -> MdpFile {
    let mut transitions = Vec::new();
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions(s) {
            for t in &mdp.transitions[s][a] {
                transitions.push(TransitionRow { s, a, sp: t.target, p: t.prob, r: t.reward });
            }
        }
    }
    let labels = mdp
        .labels
        .iter()
        .map(|(name, set)| {
            let def = match set {
                LabelSet::States(v) => LabelDef::States(v.clone()),
                LabelSet::Pairs(v) => LabelDef::Pairs(v.iter().map(|&(s, a)| [s, a]).collect()),
            };
            (name.clone(), def)
        })
        .collect();
    let specs = mdp
        .specs
        .iter()
        .map(|sp| SpecDef { label: sp.label.clone(), lo: sp.lo, hi: sp.hi, kind: sp.kind.into() })
        .collect();
    MdpFile {
        ssps_version: SCHEMA_VERSION,
        states: mdp.state_names.clone(),
        actions: mdp.action_names.clone(),
        transitions,
        beta: mdp.beta.clone(),
        labels,
        specs,
    }
}

pub fn file_to_mdp(file: &MdpFile) -> Result<Mdp> {
    if file.ssps_version != SCHEMA_VERSION {
        bail!("unsupported ssps_version {} (expected {SCHEMA_VERSION})", file.ssps_version);
    }
    let n = file.states.len();
    if file.actions.len() != n {
        bail!("actions table covers {} states, file declares {n}", file.actions.len());
    }
    let mut b = MdpBuilder::new(file.states.clone());
    for (s, names) in file.actions.iter().enumerate() {
        for name in names {
            b.action(s, name, &[]);
        }
    }
    let mut mdp = b.build();
    mdp.beta = file.beta.clone();
    for (i, row) in file.transitions.iter().enumerate() {
        if row.s >= n || row.sp >= n {
            bail!("transition #{i} references unknown state");
        }
        if row.a >= mdp.transitions[row.s].len() {
            bail!("transition #{i} references unknown action {} at state {}", row.a, row.s);
        }
        mdp.transitions[row.s][row.a].push(ssps_core::mdp::Transition {
            target: row.sp,
            prob: row.p,
            reward: row.r,
        });
    }
    for (name, def) in &file.labels {
        let set = match def {
            LabelDef::States(v) => LabelSet::States(v.clone()),
            LabelDef::Pairs(v) => LabelSet::Pairs(v.iter().map(|&[s, a]| (s, a)).collect()),
        };
        mdp.labels.insert(name.clone(), set);
    }
    for sp in &file.specs {
        mdp.specs.push(Spec { label: sp.label.clone(), lo: sp.lo, hi: sp.hi, kind: sp.kind.into() });
    }
    mdp.clamp_probabilities();
    let report = mdp.validate();
    if !report.is_valid() {
        bail!("file does not describe a valid model:\n{report}");
    }
    Ok(mdp)
}

pub fn read_mdp(path: &std::path::Path) -> Result<Mdp> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: MdpFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file_to_mdp(&file)
}

pub fn write_mdp(path: &std::path::Path, mdp: &Mdp) -> Result<()> {
    let file = mdp_to_file(mdp);
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub ssps_version: u32,
    /// `policy[state][action] = probability`, keys are decimal indices;
    /// zero entries omitted.
    pub policy: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub mode: String,
    pub epsilon: f64,
    pub lp_objective: f64,
    pub iterations: usize,
    /// Solution values the policy was extracted from, for correspondence
    /// checks at verification time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_star: Option<BTreeMap<String, BTreeMap<String, f64>>>,
}

fn dense_to_map(values: &[Vec<f64>], threshold: f64) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (s, row) in values.iter().enumerate() {
        let m: BTreeMap<String, f64> = row
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v.abs() > threshold)
            .map(|(a, &v)| (a.to_string(), v))
            .collect();
        if !m.is_empty() {
            out.insert(s.to_string(), m);
        }
    }
    out
}

fn map_to_dense(
    map: &BTreeMap<String, BTreeMap<String, f64>>,
    mdp: &Mdp,
    what: &str,
) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> =
        (0..mdp.n_states()).map(|s| vec![0.0; mdp.n_actions(s)]).collect();
    for (s_key, row) in map {
        let s: usize = s_key.parse().with_context(|| format!("{what}: bad state key '{s_key}'"))?;
        if s >= mdp.n_states() {
            bail!("{what}: unknown state {s}");
        }
        for (a_key, &v) in row {
            let a: usize =
                a_key.parse().with_context(|| format!("{what}: bad action key '{a_key}'"))?;
            if a >= mdp.n_actions(s) {
                bail!("{what}: unknown action {a} at state {s}");
            }
            out[s][a] = v;
        }
    }
    Ok(out)
}

pub fn outcome_to_policy_file(outcome: &SynthesisOutcome) -> PolicyFile {
    PolicyFile {
        ssps_version: SCHEMA_VERSION,
        policy: dense_to_map(&outcome.policy.rows, 0.0),
        provenance: Some(Provenance {
            mode: outcome.mode.as_str().to_string(),
            epsilon: outcome.epsilon,
            lp_objective: outcome.objective,
            iterations: outcome.iterations,
            x_star: Some(dense_to_map(&outcome.x_star, 1e-15)),
            y_star: Some(dense_to_map(&outcome.y_star, 1e-15)),
        }),
    }
}

pub struct LoadedPolicy {
    pub policy: StationaryPolicy,
    pub provenance: Option<Provenance>,
    pub x_star: Option<Vec<Vec<f64>>>,
    pub y_star: Option<Vec<Vec<f64>>>,
}

pub fn read_policy(path: &std::path::Path, mdp: &Mdp) -> Result<LoadedPolicy> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: PolicyFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if file.ssps_version != SCHEMA_VERSION {
        bail!("unsupported ssps_version {}", file.ssps_version);
    }
    let rows = map_to_dense(&file.policy, mdp, "policy")?;
    let policy = StationaryPolicy { rows };
    policy
        .check_supported(mdp)
        .map_err(|e| anyhow::anyhow!("policy file invalid: {e}"))?;
    let x_star = match file.provenance.as_ref().and_then(|p| p.x_star.as_ref()) {
        Some(m) => Some(map_to_dense(m, mdp, "x_star")?),
        None => None,
    };
    let y_star = match file.provenance.as_ref().and_then(|p| p.y_star.as_ref()) {
        Some(m) => Some(map_to_dense(m, mdp, "y_star")?),
        None => None,
    };
    Ok(LoadedPolicy { policy, provenance: file.provenance, x_star, y_star })
}

pub fn write_policy(path: &std::path::Path, file: &PolicyFile) -> Result<()> {
    let text = serde_json::to_string_pretty(file)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
