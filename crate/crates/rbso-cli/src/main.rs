use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rbso_cli::experiment::{run_experiment, ExperimentConfig, RunMode, TraceVerbosity};
use rbso_cli::overrides::parse_set_arg;
use rbso_cli::reference::emit_reference_scenario;
use rbso_cli::verify::verify_directory;
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "rbso", about = "Swarm multi-target search simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rbso,
    RandomWalk,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceArg {
    None,
    Events,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or many seeded searches on a scenario.
    Run {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Individual seed; repeatable.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Inclusive seed range, e.g. 1..30.
        #[arg(long = "seed-range")]
        seed_range: Option<String>,
        /// Goal policy.
        #[arg(long, value_enum, default_value = "rbso")]
        mode: ModeArg,
        /// Output directory for summary and trace files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace verbosity.
        #[arg(long, value_enum, default_value = "none")]
        trace: TraceArg,
        /// Scenario overrides by dotted path, e.g. --set rbso.m_s=300.
        #[arg(long = "set")]
        sets: Vec<String>,
    },
    /// Write the built-in 20-robot / 10-target scenario.
    EmitScenario {
        /// Destination file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check summary rows against their trace files in a results directory.
    Verify {
        /// Directory holding summary-*.csv and trace files.
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "rbso")]
        mode: ModeArg,
    },
}

fn parse_seed_range(spec: &str) -> Result<Vec<u64>> {
    let (a, b) = spec
        .split_once("..")
        .with_context(|| format!("seed range `{spec}` must look like start..end"))?;
    let start: u64 = a.trim().parse().context("range start")?;
    let end: u64 = b.trim().parse().context("range end")?;
    if end < start {
        bail!("seed range `{spec}` is empty");
    }
    Ok((start..=end).collect())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, seeds, seed_range, mode, out, trace, sets } => {
            let mut all_seeds = seeds;
            if let Some(spec) = &seed_range {
                all_seeds.extend(parse_seed_range(spec)?);
            }
            let scenario_text = fs::read_to_string(&scenario)
                .with_context(|| format!("reading scenario {}", scenario.display()))?;
            let overrides =
                sets.iter().map(|s| parse_set_arg(s)).collect::<Result<Vec<_>>>()?;
            let config = ExperimentConfig {
                scenario: scenario_text,
                seeds: all_seeds,
                mode: match mode {
                    ModeArg::Rbso => RunMode::Rbso,
                    ModeArg::RandomWalk => RunMode::RandomWalk,
                },
                out_dir: out,
                verbosity: match trace {
                    TraceArg::None => TraceVerbosity::None,
                    TraceArg::Events => TraceVerbosity::Events,
                    TraceArg::Full => TraceVerbosity::Full,
                },
                overrides,
            };
            let summary = run_experiment(&config)?;
            for row in &summary.runs {
                println!(
                    "seed {}: {} targets found{}, {} steps, {} iterations, {} ms",
                    row.seed,
                    row.targets_found,
                    if row.all_found { " (all)" } else { "" },
                    row.total_steps,
                    row.iterations,
                    row.wall_ms
                );
            }
            for (seed, error) in &summary.failures {
                eprintln!("seed {seed} failed: {error}");
            }
            for line in summary.aggregate_lines() {
                println!("{line}");
            }
            if let Some(path) = &summary.summary_path {
                println!("summary written to {}", path.display());
            }
            if !summary.failures.is_empty() {
                bail!("{} seed(s) failed", summary.failures.len());
            }
            Ok(())
        }
        Command::EmitScenario { out } => {
            let doc = emit_reference_scenario();
            match out {
                Some(path) => fs::write(&path, doc)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{doc}"),
            }
            Ok(())
        }
        Command::Verify { dir, mode } => {
            let mode = match mode {
                ModeArg::Rbso => RunMode::Rbso,
                ModeArg::RandomWalk => RunMode::RandomWalk,
            };
            let checked = verify_directory(&dir, mode)?;
            println!("verified {checked} run(s) against their traces");
            Ok(())
        }
    }
}
