//! JSON/text rendering of verification and simulation reports.

use std::collections::BTreeMap;

use serde::Serialize;
use ssps_core::chain::VerificationReport;
use ssps_core::mdp::{Mdp, SpecKind};
use ssps_core::sim::EmpiricalReport;

#[derive(Serialize)]
pub struct VerifyJson {
    pub policy_class: ClassJson,
    pub average_reward: f64,
    pub specs: Vec<SpecJson>,
    pub all_specs_pass: bool,
    /// Steady-state probability per state (zero entries omitted).
    pub steady_state: BTreeMap<String, f64>,
    /// Expected visits per transient state of the induced chain.
    pub expected_visits: BTreeMap<String, f64>,
    pub total_expected_visits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_y: Option<f64>,
}

#[derive(Serialize)]
pub struct ClassJson {
    pub ep: bool,
    pub cp: bool,
    pub cpu: bool,
}

#[derive(Serialize)]
pub struct SpecJson {
    pub label: String,
    pub kind: String,
    pub lo: f64,
    pub hi: f64,
    pub attained: f64,
    pub satisfied: bool,
}

pub fn verify_json(mdp: &Mdp, report: &VerificationReport) -> VerifyJson {
    let steady_state = (0..mdp.n_states())
        .filter(|&s| report.occupation.marginal[s].abs() > 1e-15)
        .map(|s| (mdp.name(s).to_string(), report.occupation.marginal[s]))
        .collect();
    let expected_visits = report
        .visits
        .transient_states
        .iter()
        .map(|&s| (mdp.name(s).to_string(), report.visits.zeta[s]))
        .collect();
    VerifyJson {
        policy_class: ClassJson {
            ep: report.flags.ep,
            cp: report.flags.cp,
            cpu: report.flags.cpu,
        },
        average_reward: report.average_reward,
        specs: report
            .spec_results
            .iter()
            .map(|r| SpecJson {
                label: r.spec.label.clone(),
                kind: match r.spec.kind {
                    SpecKind::SteadyState => "steady-state".into(),
                    SpecKind::Transient => "transient".into(),
                },
                lo: r.spec.lo,
                hi: r.spec.hi,
                attained: r.attained,
                satisfied: r.satisfied,
            })
            .collect(),
        all_specs_pass: report.all_specs_pass(),
        steady_state,
        expected_visits,
        total_expected_visits: report.visits.total(),
        residual_x: report.residual_x,
        residual_y: report.residual_y,
    }
}

pub fn verify_text(mdp: &Mdp, report: &VerificationReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let f = &report.flags;
    writeln!(
        out,
        "policy class: EP={} CP={} CPU={}",
        f.ep, f.cp, f.cpu
    )
    .unwrap();
    writeln!(out, "expected average reward: {:.6}", report.average_reward).unwrap();
    if let Some(r) = report.residual_x {
        writeln!(out, "correspondence residual |Pr_inf - x*|: {r:.3e}").unwrap();
    }
    if let Some(r) = report.residual_y {
        writeln!(out, "visit residual |zeta - y*|: {r:.3e}").unwrap();
    }
    writeln!(out, "total expected transient visits: {:.4}", report.visits.total()).unwrap();
    if report.spec_results.is_empty() {
        writeln!(out, "no specifications").unwrap();
    } else {
        for r in &report.spec_results {
            let kind = match r.spec.kind {
                SpecKind::SteadyState => "steady",
                SpecKind::Transient => "transient",
            };
            writeln!(
                out,
                "spec {:<12} {:<9} [{:.4}, {:.4}]: attained {:.6} -> {}",
                r.spec.label,
                kind,
                r.spec.lo,
                r.spec.hi,
                r.attained,
                if r.satisfied { "pass" } else { "FAIL" }
            )
            .unwrap();
        }
    }
    let _ = mdp;
    out
}

#[derive(Serialize)]
pub struct SimulateJson {
    pub paths: usize,
    pub horizon: usize,
    pub master_seed: u64,
    pub avg_reward: StatJson,
    pub entry_time: StatJson,
    pub entered_fraction: f64,
    pub complement_visits: StatJson,
    pub avg_visits: BTreeMap<String, StatJson>,
    pub visit_counts: BTreeMap<String, StatJson>,
}

#[derive(Serialize)]
pub struct StatJson {
    pub mean: f64,
    pub std_err: f64,
}

pub fn simulate_json(report: &EmpiricalReport) -> SimulateJson {
    let stat = |m: &ssps_core::sim::MetricStat| StatJson { mean: m.mean, std_err: m.std_err };
    SimulateJson {
        paths: report.paths,
        horizon: report.horizon,
        master_seed: report.master_seed,
        avg_reward: stat(&report.avg_reward),
        entry_time: stat(&report.entry_time),
        entered_fraction: report.entered_fraction,
        complement_visits: stat(&report.complement_visits),
        avg_visits: report.avg_visits.iter().map(|(k, v)| (k.clone(), stat(v))).collect(),
        visit_counts: report.visit_counts.iter().map(|(k, v)| (k.clone(), stat(v))).collect(),
    }
}

/// Convergence curves as CSV: one row per checkpoint with the running
/// ensemble averages.
pub fn curves_csv(report: &EmpiricalReport) -> String {
    let mut labels: Vec<&String> = report.avg_visits.keys().collect();
    labels.sort();
    let mut out = String::from("n");
    for l in &labels {
        out.push_str(&format!(",avg_visits_{l}"));
    }
    out.push_str(",avg_reward\n");
    for point in &report.curves {
        out.push_str(&point.n.to_string());
        for l in &labels {
            out.push_str(&format!(",{}", point.avg_visits.get(*l).copied().unwrap_or(0.0)));
        }
        out.push_str(&format!(",{}\n", point.avg_reward));
    }
    out
}
