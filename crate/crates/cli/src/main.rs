use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use uavmec_cli::{run_eval, run_oracle, run_sweep, run_train, ExperimentConfig, HarnessError, Mode};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Verb {
    Train,
    Eval,
    Sweep,
    Oracle,
}

/// Train, evaluate and compare offloading agents on the UAV edge-computing simulator.
#[derive(Parser, Debug)]
#[command(name = "uavmec", version)]
struct Args {
    verb: Verb,

    /// TOML experiment file; built-in full-scale defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Trainer seed; repeat for several runs. Defaults to `sac.seed`.
    #[arg(long = "seed")]
    seeds: Vec<u64>,

    #[arg(long, value_enum, default_value_t = Mode::Sac)]
    mode: Mode,

    #[arg(long, default_value = "runs")]
    out: PathBuf,

    /// Checkpoint for eval and oracle.
    #[arg(long)]
    checkpoint: Option<PathBuf>,

    /// Also write a per-slot JSON-lines trace during eval.
    #[arg(long)]
    trace: bool,
}

fn run(args: &Args) -> Result<(), HarnessError> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    }
    .resolved()?;
    let seeds = if args.seeds.is_empty() { vec![cfg.sac.seed] } else { args.seeds.clone() };
    match args.verb {
        Verb::Train => {
            for run in run_train(&cfg, args.mode, &seeds, &args.out)? {
                let last = run.outcome.episodes.last().map_or(f64::NAN, |e| e.ret);
                let best = run.outcome.best.as_ref().map_or(f64::NAN, |(_, s)| s.mean_weighted_energy());
                println!(
                    "{} seed {}: final return {last:.1}, best eval weighted energy {best:.1} J -> {}",
                    run.mode,
                    run.seed,
                    run.dir.display()
                );
            }
        }
        Verb::Eval => {
            for &seed in &seeds {
                let out = if seeds.len() > 1 { args.out.join(seed.to_string()) } else { args.out.clone() };
                let report = run_eval(&cfg, args.mode, args.checkpoint.as_deref(), seed, &out, args.trace)?;
                println!(
                    "{} seed {seed}: mean return {:.1}, mean weighted energy {:.1} J -> {}",
                    report.mode,
                    report.summary.mean_return,
                    report.mean_weighted_energy,
                    out.display()
                );
            }
        }
        Verb::Sweep => {
            let rows = run_sweep(&cfg, &seeds, &args.out)?;
            println!("{} sweep rows -> {}", rows.len(), args.out.display());
        }
        Verb::Oracle => {
            let report = run_oracle(&cfg, args.checkpoint.as_deref(), &args.out)?;
            print!("{} slots, mean optimum {:.3} J", report.slots, report.mean_oracle_cost);
            if let Some(share) = report.within_tolerance {
                print!(", policy within {:.0}% on {:.0}% of slots", report.tolerance * 100.0, share * 100.0);
            }
            println!(" -> {}", args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {:#}", anyhow::Error::new(e));
            ExitCode::from(code)
        }
    }
}
