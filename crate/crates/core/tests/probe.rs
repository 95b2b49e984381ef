use ssps_core::classify::classify_mdp;
use ssps_core::env;
use ssps_core::lp::{synthesize, SynthMode, SynthesisConfig};
use ssps_core::SimplexSolver;

#[test]
fn probe_goldmine_cpu() {
    let mdp = env::goldmine();
    let cls = classify_mdp(&mdp).unwrap();
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let out = synthesize(&mdp, &cls, SynthMode::Cpu, &cfg, &solver).unwrap();
    eprintln!("iterations = {}", out.iterations);
    for (i, rec) in out.trace.iter().enumerate() {
        eprintln!("  iter {}: obj = {:.6}, cuts = {:?}", i + 1, rec.objective,
            rec.cuts_added.iter().map(|c| (c.tscc, c.states.clone(), c.pairs.clone())).collect::<Vec<_>>());
    }
    let report = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
    eprintln!("flags = {:?}", report.flags);
    eprintln!("residual_x = {:?}, residual_y = {:?}", report.residual_x, report.residual_y);
    eprintln!("specs pass = {}", report.all_specs_pass());
    eprintln!("chain tsccs = {:?}", report.chain_classification.tsccs);
    eprintln!("avg reward = {:.6} vs objective {:.6}", report.average_reward, out.objective);
}

#[test]
fn probe_goldmine_ep_sweep() {
    let mdp = env::goldmine();
    let cls = classify_mdp(&mdp).unwrap();
    let solver = SimplexSolver::default();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
        let cfg = SynthesisConfig::with_epsilon(eps);
        match synthesize(&mdp, &cls, SynthMode::Ep, &cfg, &solver) {
            Ok(out) => eprintln!("eps = {eps:.0e}: objective = {:.8}", out.objective),
            Err(e) => eprintln!("eps = {eps:.0e}: {e}"),
        }
    }
}

#[test]
fn probe_three_state_lp1() {
    let mdp = env::three_state(env::ThreeStateScenario::Bounded);
    let cls = classify_mdp(&mdp).unwrap();
    let solver = SimplexSolver::default();
    for delta in [0.1, 0.01, 0.001] {
        let out = synthesize(&mdp, &cls, SynthMode::Ep, &SynthesisConfig::with_epsilon(delta), &solver).unwrap();
        eprintln!("delta = {delta}: obj = {:.10} (expect {:.10}), pi(s2) = {:?}, pi(s3) = {:?}",
            out.objective, 0.5 - 1.2 * delta, out.policy.rows[1], out.policy.rows[2]);
    }
}

#[test]
fn probe_toll_small() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    for n in [3, 10] {
        let mdp = env::toll_collector(3, n, 0.0).unwrap();
        let cls = classify_mdp(&mdp).unwrap();
        let t0 = std::time::Instant::now();
        let ep = synthesize(&mdp, &cls, SynthMode::Ep, &cfg, &solver).unwrap();
        let t1 = std::time::Instant::now();
        let cp = synthesize(&mdp, &cls, SynthMode::Cp, &cfg, &solver).unwrap();
        let t2 = std::time::Instant::now();
        let cpu = synthesize(&mdp, &cls, SynthMode::Cpu, &cfg, &solver).unwrap();
        let t3 = std::time::Instant::now();
        eprintln!("n={n}: EP {:.4} ({:?}), CP {:.4} ({:?}), CPU {:.4} ({:?}) iter={}",
            ep.objective, t1-t0, cp.objective, t2-t1, cpu.objective, t3-t2, cpu.iterations);
        for out in [&ep, &cp, &cpu] {
            let rep = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
            eprintln!("   mode {:?}: flags {:?} residual {:.2e} specs {}", out.mode, rep.flags, rep.residual_x.unwrap(), rep.all_specs_pass());
        }
    }
}

#[test]
fn probe_toll_25_cp() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let mdp = env::toll_collector(3, 25, 0.0).unwrap();
    let cls = classify_mdp(&mdp).unwrap();
    let t0 = std::time::Instant::now();
    let cp = synthesize(&mdp, &cls, SynthMode::Cp, &cfg, &solver).unwrap();
    eprintln!("toll25 CP: obj {:.6} in {:?}", cp.objective, t0.elapsed());
    let rep = ssps_core::verify_policy(&mdp, &cp.policy, Some(&cp.x_star), Some(&cp.y_star)).unwrap();
    eprintln!("   flags {:?} residual {:.2e} specs {}", rep.flags, rep.residual_x.unwrap(), rep.all_specs_pass());
}

#[test]
fn probe_frozen8() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let mdp = env::frozen_islands(8).unwrap();
    let cls = classify_mdp(&mdp).unwrap();
    for mode in [SynthMode::Ep, SynthMode::Cp, SynthMode::Cpu, SynthMode::Kallenberg] {
        let t0 = std::time::Instant::now();
        match synthesize(&mdp, &cls, mode, &cfg, &solver) {
            Ok(out) => {
                let rep = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
                eprintln!("{:?}: obj {:.4} R_inf {:.4} in {:?}; flags {:?} residual {:.2e} specs {}",
                    mode, out.objective, rep.average_reward, t0.elapsed(), rep.flags, rep.residual_x.unwrap(), rep.all_specs_pass());
            }
            Err(e) => eprintln!("{mode:?}: ERR {e}"),
        }
    }
}

#[test]
fn probe_partition_seeds() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mdp = env::random_partition_mdp(20, 0.9, 0.05, seed).unwrap();
        let cls = classify_mdp(&mdp).unwrap();
        for mode in [SynthMode::Ep, SynthMode::Cp, SynthMode::Cpu] {
            match synthesize(&mdp, &cls, mode, &cfg, &solver) {
                Ok(out) => {
                    let rep = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
                    if !rep.all_specs_pass() || rep.residual_x.unwrap() > 1e-6 {
                        eprintln!("seed {seed} {:?}: specs {} residual {:.2e}", mode, rep.all_specs_pass(), rep.residual_x.unwrap());
                    }
                    worst = worst.max(rep.residual_x.unwrap());
                }
                Err(e) => eprintln!("seed {seed} {mode:?}: ERR {e}"),
            }
        }
    }
    eprintln!("worst residual over partition sweep: {worst:.3e}");
}

#[test]
fn probe_frozen16_ep() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let t0 = std::time::Instant::now();
    let mdp = env::frozen_islands(16).unwrap();
    let cls = classify_mdp(&mdp).unwrap();
    let out = synthesize(&mdp, &cls, SynthMode::Ep, &cfg, &solver).unwrap();
    let rep = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
    eprintln!("frozen16 EP end-to-end: {:?}; obj {:.4}; specs {}; residual {:.2e}",
        t0.elapsed(), out.objective, rep.all_specs_pass(), rep.residual_x.unwrap());
}

#[test]
fn probe_transient_scenarios() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    // Resources scenario on the 8x8 islands.
    let mdp = env::frozen_islands_resources(200.0).unwrap();
    let cls = classify_mdp(&mdp).unwrap();
    for mode in [SynthMode::Ep, SynthMode::Cp, SynthMode::Cpu, SynthMode::Kallenberg] {
        match synthesize(&mdp, &cls, mode, &cfg, &solver) {
            Ok(out) => {
                let rep = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
                let attained: Vec<(String, f64, bool)> = rep.spec_results.iter()
                    .map(|r| (r.spec.label.clone(), r.attained, r.satisfied)).collect();
                eprintln!("{:?}: specs {} res_x {:.2e} res_y {:.2e}", mode, rep.all_specs_pass(),
                    rep.residual_x.unwrap(), rep.residual_y.unwrap());
                eprintln!("   {:?}", attained);
            }
            Err(e) => eprintln!("{mode:?}: ERR {e}"),
        }
    }
}

#[test]
fn probe_example1_kallenberg() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let mdp = env::three_state(env::ThreeStateScenario::Example1);
    let cls = classify_mdp(&mdp).unwrap();
    let out = synthesize(&mdp, &cls, SynthMode::Kallenberg, &cfg, &solver).unwrap();
    eprintln!("x*: {:?}", out.x_star);
    eprintln!("policy: {:?}", out.policy.rows);
    let rep = ssps_core::verify_policy(&mdp, &out.policy, Some(&out.x_star), Some(&out.y_star)).unwrap();
    eprintln!("Pr_inf(s2,a2) = {:.4}; residual {:.4}; specs pass {}", rep.occupation.pairs[1][1],
        rep.residual_x.unwrap(), rep.all_specs_pass());
}

#[test]
fn probe_nesting_everywhere() {
    let solver = SimplexSolver::default();
    let cfg = SynthesisConfig::default();
    let mut envs: Vec<(String, ssps_core::Mdp)> = vec![
        ("three-bounded".into(), env::three_state(env::ThreeStateScenario::Bounded)),
        ("nine".into(), env::nine_state()),
        ("goldmine".into(), env::goldmine()),
        ("frozen8".into(), env::frozen_islands(8).unwrap()),
        ("toll3".into(), env::toll_collector(3, 3, 0.05).unwrap()),
        ("toll10".into(), env::toll_collector(3, 10, 0.05).unwrap()),
    ];
    for seed in 0..3u64 {
        envs.push((format!("part{seed}"), env::random_partition_mdp(20, 0.9, 0.05, seed).unwrap()));
    }
    for (name, mdp) in &envs {
        let cls = classify_mdp(mdp).unwrap();
        let ep = synthesize(mdp, &cls, SynthMode::Ep, &cfg, &solver).map(|o| o.objective);
        let cp = synthesize(mdp, &cls, SynthMode::Cp, &cfg, &solver).map(|o| o.objective);
        let cpu = synthesize(mdp, &cls, SynthMode::Cpu, &cfg, &solver).map(|o| o.objective);
        eprintln!("{name}: EP {ep:?} CP {cp:?} CPU {cpu:?}");
    }
}
