//! Command-line surface: generate benchmark MDPs, synthesize policies by
//! mode, verify analytically, and simulate empirically.
//!
//! Exit codes: 0 success, 2 input/parameter errors, 3 infeasible synthesis,
//! 4 cut-generation budget exhausted. Reports go to stdout (or --out);
//! diagnostics to stderr.

mod format;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ssps_core::classify::classify_mdp;
use ssps_core::env;
use ssps_core::lp::{synthesize, write_lp_format, SynthMode, SynthesisConfig};
use ssps_core::sim::{ensemble_metrics, SimConfig};
use ssps_core::{Error as CoreError, SimplexSolver};

#[derive(Parser)]
#[command(name = "ssps", version, about = "Steady-state policy synthesis toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark MDP and write it as JSON.
    Gen(GenArgs),
    /// Synthesize a policy from an MDP file.
    Synth(SynthArgs),
    /// Analytically verify a policy against an MDP.
    Verify(VerifyArgs),
    /// Monte Carlo simulation of a policy.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Environment name: three-state, nine-state, goldmine, mixed-chain,
    /// frozen-islands, frozen-islands-resources, toll-collector, partition.
    env: String,
    /// Grid size / clique size, depending on the environment.
    #[arg(long)]
    n: Option<usize>,
    /// Number of cliques (toll-collector).
    #[arg(long)]
    m: Option<usize>,
    /// Specification lower bound (toll-collector).
    #[arg(long)]
    l: Option<f64>,
    /// Scenario for three-state: lp0, example1, bounded.
    #[arg(long)]
    scenario: Option<String>,
    /// Intra-cluster edge probability (partition).
    #[arg(long)]
    p_in: Option<f64>,
    /// Inter-cluster edge probability (partition).
    #[arg(long)]
    p_out: Option<f64>,
    /// Generator seed (partition); defaults to $SSPS_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Total visit cap for the resources scenario.
    #[arg(long)]
    n_tr: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Strictness relaxation epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Also write the (final) linear program in LP interchange format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ep,
    Cp,
    Cpu,
    Lp3,
    Kallenberg,
}

impl From<ModeArg> for SynthMode {
    fn from(m: ModeArg) -> SynthMode {
        match m {
            ModeArg::Ep => SynthMode::Ep,
            ModeArg::Cp => SynthMode::Cp,
            ModeArg::Cpu => SynthMode::Cpu,
            ModeArg::Lp3 => SynthMode::Lp3,
            ModeArg::Kallenberg => SynthMode::Kallenberg,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    mdp: PathBuf,
    #[arg(long)]
    policy: PathBuf,
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    mdp: PathBuf,
    #[arg(long)]
    policy: PathBuf,
    #[arg(long, default_value_t = 5000)]
    paths: usize,
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    /// Master seed; defaults to $SSPS_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write convergence curves (running averages) as CSV.
    #[arg(long)]
    curves: Option<PathBuf>,
}

fn env_seed() -> u64 {
    std::env::var("SSPS_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Synthesis outcomes carry dedicated exit codes.
            match e.downcast_ref::<CoreError>() {
                Some(CoreError::Infeasible { .. }) => ExitCode::from(3),
                Some(CoreError::BudgetExhausted { .. }) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let seed = args.seed.unwrap_or_else(env_seed);
    let mdp = match args.env.as_str() {
        "three-state" => {
            let scenario = match args.scenario.as_deref().unwrap_or("lp0") {
                "lp0" => env::ThreeStateScenario::Lp0,
                "example1" => env::ThreeStateScenario::Example1,
                "bounded" => env::ThreeStateScenario::Bounded,
                other => return Err(anyhow!("unknown three-state scenario '{other}'")),
            };
            env::three_state(scenario)
        }
        "nine-state" => env::nine_state(),
        "goldmine" => env::goldmine(),
        "mixed-chain" => env::chain_as_mdp(&env::mixed_classification_chain()),
        "frozen-islands" => env::frozen_islands(args.n.unwrap_or(8))?,
        "frozen-islands-resources" => env::frozen_islands_resources(args.n_tr.unwrap_or(200.0))?,
        "toll-collector" => {
            env::toll_collector(args.m.unwrap_or(3), args.n.unwrap_or(3), args.l.unwrap_or(0.0))?
        }
        "partition" => env::random_partition_mdp(
            args.n.unwrap_or(20),
            args.p_in.unwrap_or(0.9),
            args.p_out.unwrap_or(0.05),
            seed,
        )?,
        other => return Err(anyhow!("unknown environment '{other}'")),
    };
    format::write_mdp(&args.out, &mdp)?;
    let cls = classify_mdp(&mdp)?;
    let sizes: Vec<String> = cls.tsccs.iter().map(|c| c.len().to_string()).collect();
    println!(
        "{}: {} states, {} TSCCs ({})",
        args.env,
        mdp.n_states(),
        cls.tsccs.len(),
        sizes.join(", ")
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let mdp = format::read_mdp(&args.input)?;
    let cls = classify_mdp(&mdp)?;
    let mut cfg = SynthesisConfig::default();
    if let Some(eps) = args.epsilon {
        if eps <= 0.0 {
            return Err(anyhow!("epsilon must be positive"));
        }
        cfg.epsilon_pos = eps;
        cfg.epsilon_cut = eps;
    }
    let solver = SimplexSolver::default();
    let mode: SynthMode = args.mode.into();
    let outcome = synthesize(&mdp, &cls, mode, &cfg, &solver).map_err(anyhow::Error::new)?;

    if let Some(lp_path) = &args.export_lp {
        // Re-build the final program for export.
        let lp = match mode {
            SynthMode::Ep => ssps_core::lp::build_lp1(&mdp, &cls, &mdp.specs, &cfg),
            SynthMode::Cp => ssps_core::lp::build_lp2(&mdp, &cls, &mdp.specs, &cfg),
            SynthMode::Lp3 | SynthMode::Cpu => ssps_core::lp::build_lp3(&mdp, &cls, &mdp.specs),
            SynthMode::Kallenberg => ssps_core::lp::build_kallenberg(&mdp, &mdp.specs),
        };
        let f = std::fs::File::create(lp_path)
            .with_context(|| format!("creating {}", lp_path.display()))?;
        write_lp_format(&lp, std::io::BufWriter::new(f))?;
    }

    let file = format::outcome_to_policy_file(&outcome);
    format::write_policy(&args.out, &file)?;
    println!(
        "mode {}: objective {:.6} in {} iteration(s)",
        outcome.mode.as_str(),
        outcome.objective,
        outcome.iterations
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let mdp = format::read_mdp(&args.mdp)?;
    let loaded = format::read_policy(&args.policy, &mdp)?;
    let report = ssps_core::verify_policy(
        &mdp,
        &loaded.policy,
        loaded.x_star.as_deref(),
        loaded.y_star.as_deref(),
    )
    .map_err(anyhow::Error::new)?;
    match args.format.as_str() {
        "json" => println!("{}", serde_json::to_string_pretty(&report::verify_json(&mdp, &report))?),
        "text" => print!("{}", report::verify_text(&mdp, &report)),
        other => return Err(anyhow!("unknown format '{other}' (expected text or json)")),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let mdp = format::read_mdp(&args.mdp)?;
    let loaded = format::read_policy(&args.policy, &mdp)?;
    let cls = classify_mdp(&mdp)?;
    let cfg = SimConfig {
        paths: args.paths,
        horizon: args.horizon,
        master_seed: args.seed.unwrap_or_else(env_seed),
        parallel: true,
    };
    let report =
        ensemble_metrics(&mdp, &loaded.policy, &cls, &cfg).map_err(anyhow::Error::new)?;
    let json = serde_json::to_string_pretty(&report::simulate_json(&report))?;
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.curves {
        std::fs::write(path, report::curves_csv(&report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}
