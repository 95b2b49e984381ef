//! Monte Carlo execution of policies and empirical estimation of the
//! long-run metrics, corroborating the analytic verification. Per-path RNG
//! streams are derived from the master seed and the path index, so results
//! are identical at any parallelism level.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classify::StateClassification;
use crate::error::{Error, Result};
use crate::mdp::{LabelSet, Mdp, StationaryPolicy};

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub paths: usize,
    pub horizon: usize,
    pub master_seed: u64,
    /// Advisory only; results do not depend on it.
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { paths: 5000, horizon: 100_000, master_seed: 0, parallel: true }
    }
}

fn path_seed(master: u64, path: usize) -> u64 {
    let mut z = master ^ (path as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_index(probs: &[(usize, f64)], u: f64) -> usize {
    let mut acc = 0.0;
    for &(idx, p) in probs {
        acc += p;
        if u < acc {
            return idx;
        }
    }
    probs.last().map(|&(idx, _)| idx).expect("empty distribution")
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `horizon + 1` states: S_0 .. S_horizon.
    pub states: Vec<usize>,
    /// `horizon` actions A_0 .. A_{horizon-1}.
    pub actions: Vec<usize>,
    /// `horizon` rewards R(S_t, A_t, S_{t+1}).
    pub rewards: Vec<f64>,
}

/// Sample one trajectory of `horizon` transitions: S_0 ~ beta,
/// A_t ~ pi(.|S_t), S_{t+1} ~ T(.|S_t, A_t).
pub fn sample_trajectory(
    mdp: &Mdp,
    policy: &StationaryPolicy,
    seed: u64,
    horizon: usize,
) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<(usize, f64)> =
        mdp.beta.iter().enumerate().filter(|&(_, &b)| b > 0.0).map(|(s, &b)| (s, b)).collect();
    let mut s = sample_index(&beta, rng.gen::<f64>());
    let mut states = Vec::with_capacity(horizon + 1);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    states.push(s);
    for _ in 0..horizon {
        let row = &policy.rows[s];
        let u: f64 = rng.gen();
        let mut a = row.len() - 1;
        let mut acc = 0.0;
        for (i, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                a = i;
                break;
            }
        }
        let u2: f64 = rng.gen();
        let mut acc = 0.0;
        let outcomes = &mdp.transitions[s][a];
        let mut chosen = outcomes.len() - 1;
        for (i, t) in outcomes.iter().enumerate() {
            acc += t.prob;
            if u2 < acc {
                chosen = i;
                break;
            }
        }
        let t = &outcomes[chosen];
        actions.push(a);
        rewards.push(t.reward);
        s = t.target;
        states.push(s);
    }
    Trajectory { states, actions, rewards }
}

/// Mean and standard error of a per-path metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStat {
    pub mean: f64,
    pub std_err: f64,
}

impl MetricStat {
    fn from_samples(samples: &[f64]) -> MetricStat {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MetricStat { mean, std_err: (var / n).sqrt() }
    }
}

/// Ensemble metrics over the sampled paths.
#[derive(Debug, Clone)]
pub struct EmpiricalReport {
    pub paths: usize,
    pub horizon: usize,
    pub master_seed: u64,
    /// Per label: time-average visit frequency over t = 1..horizon.
    pub avg_visits: BTreeMap<String, MetricStat>,
    /// Per label: total visit count over t = 1..horizon.
    pub visit_counts: BTreeMap<String, MetricStat>,
    pub avg_reward: MetricStat,
    /// First entry time into the TSCC union, capped at the horizon.
    pub entry_time: MetricStat,
    /// Fraction of paths that entered the TSCC union within the horizon.
    pub entered_fraction: f64,
    /// Total visits to states outside the TSCC union.
    pub complement_visits: MetricStat,
    /// Running (J-bar per label, R-bar) at logarithmically spaced horizons,
    /// for convergence plots.
    pub curves: Vec<CurvePoint>,
}

#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub n: usize,
    pub avg_visits: BTreeMap<String, f64>,
    pub avg_reward: f64,
}

fn checkpoints(horizon: usize) -> Vec<usize> {
    let mut pts = Vec::new();
    let mut v = 1usize;
    while v < horizon {
        pts.push(v);
        let next = (v as f64 * 1.5).ceil() as usize;
        v = next.max(v + 1);
    }
    pts.push(horizon);
    pts
}

struct PathMetrics {
    label_counts: Vec<f64>,
    reward_sum: f64,
    entry_time: Option<usize>,
    complement_count: f64,
    checkpoint_label_counts: Vec<Vec<f64>>,
    checkpoint_rewards: Vec<f64>,
}

/// Run the ensemble and aggregate every metric with standard errors.
/// Aggregation is a fixed-order fold over path indices, so the report is
/// identical whether paths run sequentially or in parallel.
pub fn ensemble_metrics(
    mdp: &Mdp,
    policy: &StationaryPolicy,
    cls: &StateClassification,
    cfg: &SimConfig,
) -> Result<EmpiricalReport> {
    if cfg.horizon == 0 {
        return Err(Error::InvalidParameter("simulation horizon must be positive".into()));
    }
    if cfg.paths == 0 {
        return Err(Error::InvalidParameter("simulation needs at least one path".into()));
    }
    policy.check_supported(mdp)?;

    let labels: Vec<(String, LabelSet)> =
        mdp.labels.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let mut in_tscc = vec![false; mdp.n_states()];
    for c in &cls.tsccs {
        for &s in c {
            in_tscc[s] = true;
        }
    }
    // Per-label membership testers.
    let state_sets: Vec<Option<Vec<bool>>> = labels
        .iter()
        .map(|(_, set)| match set {
            LabelSet::States(states) => {
                let mut mask = vec![false; mdp.n_states()];
                for &s in states {
                    mask[s] = true;
                }
                Some(mask)
            }
            LabelSet::Pairs(_) => None,
        })
        .collect();
    let pair_sets: Vec<Option<std::collections::BTreeSet<(usize, usize)>>> = labels
        .iter()
        .map(|(_, set)| match set {
            LabelSet::Pairs(pairs) => Some(pairs.iter().copied().collect()),
            LabelSet::States(_) => None,
        })
        .collect();

    let cps = checkpoints(cfg.horizon);

    let run_path = |path: usize| -> PathMetrics {
        let traj = sample_trajectory(mdp, policy, path_seed(cfg.master_seed, path), cfg.horizon);
        let mut label_counts = vec![0.0; labels.len()];
        let mut reward_sum = 0.0;
        let mut entry_time = None;
        let mut complement_count = 0.0;
        let mut checkpoint_label_counts = vec![Vec::with_capacity(cps.len()); labels.len()];
        let mut checkpoint_rewards = Vec::with_capacity(cps.len());
        if in_tscc[traj.states[0]] {
            entry_time = Some(0);
        }
        let mut cp_iter = cps.iter().copied().peekable();
        for t in 1..=cfg.horizon {
            let s = traj.states[t];
            let a_prev = traj.actions[t - 1];
            let s_prev = traj.states[t - 1];
            for (li, mask) in state_sets.iter().enumerate() {
                match mask {
                    Some(mask) => {
                        if mask[s] {
                            label_counts[li] += 1.0;
                        }
                    }
                    None => {
                        // Pair labels count occupied state-action pairs.
                        if pair_sets[li].as_ref().unwrap().contains(&(s_prev, a_prev)) {
                            label_counts[li] += 1.0;
                        }
                    }
                }
            }
            reward_sum += traj.rewards[t - 1];
            if entry_time.is_none() && in_tscc[s] {
                entry_time = Some(t);
            }
            if !in_tscc[s] {
                complement_count += 1.0;
            }
            if cp_iter.peek() == Some(&t) {
                cp_iter.next();
                for li in 0..labels.len() {
                    checkpoint_label_counts[li].push(label_counts[li] / t as f64);
                }
                checkpoint_rewards.push(reward_sum / t as f64);
            }
        }
        PathMetrics {
            label_counts,
            reward_sum,
            entry_time,
            complement_count,
            checkpoint_label_counts,
            checkpoint_rewards,
        }
    };

    let per_path: Vec<PathMetrics> = if cfg.parallel {
        (0..cfg.paths).into_par_iter().map(run_path).collect()
    } else {
        (0..cfg.paths).map(run_path).collect()
    };

    let h = cfg.horizon as f64;
    let mut avg_visits = BTreeMap::new();
    let mut visit_counts = BTreeMap::new();
    for (li, (name, _)) in labels.iter().enumerate() {
        let freqs: Vec<f64> = per_path.iter().map(|p| p.label_counts[li] / h).collect();
        let counts: Vec<f64> = per_path.iter().map(|p| p.label_counts[li]).collect();
        avg_visits.insert(name.clone(), MetricStat::from_samples(&freqs));
        visit_counts.insert(name.clone(), MetricStat::from_samples(&counts));
    }
    let rewards: Vec<f64> = per_path.iter().map(|p| p.reward_sum / h).collect();
    let entries: Vec<f64> =
        per_path.iter().map(|p| p.entry_time.unwrap_or(cfg.horizon) as f64).collect();
    let entered =
        per_path.iter().filter(|p| p.entry_time.is_some()).count() as f64 / cfg.paths as f64;
    let complement: Vec<f64> = per_path.iter().map(|p| p.complement_count).collect();

    let mut curves = Vec::with_capacity(cps.len());
    for (ci, &n) in cps.iter().enumerate() {
        let mut point = CurvePoint { n, avg_visits: BTreeMap::new(), avg_reward: 0.0 };
        for (li, (name, _)) in labels.iter().enumerate() {
            let mean = per_path.iter().map(|p| p.checkpoint_label_counts[li][ci]).sum::<f64>()
                / cfg.paths as f64;
            point.avg_visits.insert(name.clone(), mean);
        }
        point.avg_reward =
            per_path.iter().map(|p| p.checkpoint_rewards[ci]).sum::<f64>() / cfg.paths as f64;
        curves.push(point);
    }

    Ok(EmpiricalReport {
        paths: cfg.paths,
        horizon: cfg.horizon,
        master_seed: cfg.master_seed,
        avg_visits,
        visit_counts,
        avg_reward: MetricStat::from_samples(&rewards),
        entry_time: MetricStat::from_samples(&entries),
        entered_fraction: entered,
        complement_visits: MetricStat::from_samples(&complement),
        curves,
    })
}
