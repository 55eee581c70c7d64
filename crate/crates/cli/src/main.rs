use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hyfuzz::TargetPoint;
use hyfuzz_cli::{
    cmd_analyze, cmd_bench, cmd_run, cmd_triage, load_program, parse_target, BenchMode, BenchmarkSpec, RunMode,
};

#[derive(Parser)]
#[command(name = "hyfuzz", version, about = "Hybrid directed fuzzing over synthetic program models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a fuzzing campaign from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "hybrid")]
        mode: RunMode,
        /// Work directory (overrides `[difuzz] path`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print enhanced target sequences and the distance map as JSON.
    Analyze {
        #[arg(long)]
        program: PathBuf,
        /// Target as ID=FILE:LINE; repeatable. Defaults to the program's targets.
        #[arg(long = "target", value_parser = parse_target)]
        targets: Vec<TargetPoint>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize an objective directory and sort it by target.
    Triage {
        #[arg(long)]
        objectives: PathBuf,
        /// Program whose targets name the output directories.
        #[arg(long)]
        program: Option<PathBuf>,
        /// Output directory (default: OBJECTIVES/sorted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure time to exposure across modes and write CSV.
    Bench {
        #[arg(long)]
        program: PathBuf,
        #[arg(long = "target", value_parser = parse_target)]
        targets: Vec<TargetPoint>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 60.0)]
        timeout_secs: f64,
        #[arg(long, value_delimiter = ',', default_value = "hybrid,pure,annealing")]
        modes: Vec<BenchMode>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-run work directories.
        #[arg(long, default_value = "bench-work")]
        work: PathBuf,
        /// Wall seconds per nominal scheduler second.
        #[arg(long)]
        clock_scale: Option<f64>,
    },
}

fn run(cli: Cli, interrupt: &AtomicBool) -> Result<()> {
    match cli.command {
        Command::Run { config, mode, out, seed } => {
            let report = cmd_run(&config, mode, out.as_deref(), seed, interrupt)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Analyze { program, targets, out } => {
            let json = serde_json::to_string_pretty(&cmd_analyze(&program, &targets)?)?;
            match out {
                Some(path) => std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
        Command::Triage { objectives, program, out } => {
            let targets = match program {
                Some(p) => load_program(&p)?.targets().to_vec(),
                None => Vec::new(),
            };
            let out = out.unwrap_or_else(|| objectives.join("sorted"));
            println!("{}", cmd_triage(&objectives, &targets, &out)?);
        }
        Command::Bench {
            program,
            targets,
            reps,
            timeout_secs,
            modes,
            seed,
            out,
            work,
            clock_scale,
        } => {
            let spec = BenchmarkSpec {
                program,
                targets,
                repetitions: reps,
                timeout: Duration::try_from_secs_f64(timeout_secs).context("invalid --timeout-secs")?,
                modes,
                seed,
                work_root: work,
                clock_scale,
            };
            let outcome = cmd_bench(&spec, interrupt)?;
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    outcome.write_csv(f)?;
                }
                None => outcome.write_csv(std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let interrupt = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&interrupt);
    if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed)) {
        log::warn!("cannot install interrupt handler: {e}");
    }
    match run(cli, &interrupt) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
