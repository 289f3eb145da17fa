//! Batch experiment driver: fans seeds out to workers, runs the engine per seed,
//! writes deterministic summary and trace files, and aggregates the results.

use crate::overrides::apply_overrides;
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use rbso_core::trace::{NullSink, StepRecord, TraceSink};
use rbso_core::{load_scenario, run, run_random_walk_baseline, RunResult};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Rbso,
    RandomWalk,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Rbso => "rbso",
            RunMode::RandomWalk => "random-walk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceVerbosity {
    None,
    Events,
    Full,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Scenario document text (already read from disk).
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub mode: RunMode,
    pub out_dir: Option<PathBuf>,
    pub verbosity: TraceVerbosity,
    pub overrides: Vec<(String, String)>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("config validation error: at least one seed is required");
        }
        if self.verbosity != TraceVerbosity::None && self.out_dir.is_none() {
            bail!("config validation error: trace output requires an output directory");
        }
        Ok(())
    }
}

/// One summary row. Wall time is reported on stdout only so files stay
/// byte-identical across repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub mode: RunMode,
    pub targets_found: usize,
    pub all_found: bool,
    pub total_steps: u64,
    pub iterations: u64,
    /// (target index, global step) per find, in emission order.
    pub find_steps: Vec<(usize, u64)>,
    pub total_path_length: f64,
    pub wall_ms: u128,
}

pub const SUMMARY_HEADER: &str =
    "seed,mode,targets_found,all_found,total_steps,iterations,find_steps,total_path_length";

impl RunSummary {
    pub fn csv_row(&self) -> String {
        let finds = self
            .find_steps
            .iter()
            .map(|(t, s)| format!("{t}:{s}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{},{},{}",
            self.seed,
            self.mode,
            self.targets_found,
            self.all_found,
            self.total_steps,
            self.iterations,
            finds,
            self.total_path_length
        )
    }

    fn from_result(seed: u64, mode: RunMode, result: &RunResult, wall_ms: u128) -> Self {
        Self {
            seed,
            mode,
            targets_found: result.targets_found.len(),
            all_found: result.all_found,
            total_steps: result.total_steps,
            iterations: result.iterations,
            find_steps: result.targets_found.iter().map(|f| (f.target, f.step)).collect(),
            total_path_length: result.path_lengths.iter().sum(),
            wall_ms,
        }
    }

    /// Step of the last find when the run found everything.
    pub fn all_found_step(&self) -> Option<u64> {
        if self.all_found {
            self.find_steps.iter().map(|&(_, s)| s).max()
        } else {
            None
        }
    }

    pub fn found_by(&self, step: u64) -> usize {
        self.find_steps.iter().filter(|&&(_, s)| s <= step).count()
    }
}

#[derive(Debug)]
pub struct ExperimentSummary {
    pub runs: Vec<RunSummary>,
    /// (seed, error message) for seeds that failed; successful seeds continue.
    pub failures: Vec<(u64, String)>,
    pub summary_path: Option<PathBuf>,
}

impl ExperimentSummary {
    pub fn success_rate(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().filter(|r| r.all_found).count() as f64 / self.runs.len() as f64
    }

    /// Lines for the stdout aggregate report.
    pub fn aggregate_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        lines.push(format!(
            "runs: {} ok, {} failed; all-found rate: {:.1}%",
            self.runs.len(),
            self.failures.len(),
            100.0 * self.success_rate()
        ));
        let mut finish: Vec<u64> = self.runs.iter().filter_map(|r| r.all_found_step()).collect();
        finish.sort_unstable();
        if !finish.is_empty() {
            lines.push(format!(
                "all-found step quartiles: q1 {} / median {} / q3 {}",
                quantile(&finish, 0.25),
                quantile(&finish, 0.5),
                quantile(&finish, 0.75)
            ));
        }
        let mut counts: Vec<u64> = self.runs.iter().map(|r| r.targets_found as u64).collect();
        counts.sort_unstable();
        if !counts.is_empty() {
            lines.push(format!("median targets found: {}", quantile(&counts, 0.5)));
        }
        let wall: u128 = self.runs.iter().map(|r| r.wall_ms).sum();
        lines.push(format!("total solver wall time: {wall} ms"));
        lines
    }
}

/// Lower nearest-rank quantile of sorted data.
pub fn quantile(sorted: &[u64], q: f64) -> u64 {
    assert!(!sorted.is_empty());
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// JSON-lines trace writer; optionally keeps event records only.
struct JsonlSink {
    writer: BufWriter<File>,
    events_only: bool,
    error: Option<std::io::Error>,
}

impl JsonlSink {
    fn create(path: &PathBuf, events_only: bool) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self { writer: BufWriter::new(file), events_only, error: None })
    }

    fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.writer.flush().context("flushing trace file")?;
        Ok(())
    }
}

impl TraceSink for JsonlSink {
    fn record(&mut self, record: &StepRecord) {
        if self.error.is_some() || (self.events_only && record.event.is_none()) {
            return;
        }
        let result = serde_json::to_writer(&mut self.writer, record)
            .map_err(std::io::Error::from)
            .and_then(|()| self.writer.write_all(b"\n"));
        if let Err(e) = result {
            self.error = Some(e);
        }
    }
}

pub fn trace_file_name(mode: RunMode, seed: u64) -> String {
    format!("trace-{mode}-seed{seed}.jsonl")
}

pub fn summary_file_name(mode: RunMode) -> String {
    format!("summary-{mode}.csv")
}

/// Runs every seed (in parallel), writes per-seed trace files and one summary CSV,
/// and returns the collected rows in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let base_doc = apply_overrides(&config.scenario, &config.overrides)?;
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let outcomes: Vec<(u64, Result<RunSummary>)> = config
        .seeds
        .par_iter()
        .map(|&seed| (seed, run_one_seed(config, &base_doc, seed)))
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(row) => runs.push(row),
            Err(e) => failures.push((seed, format!("{e:#}"))),
        }
    }

    let summary_path = match &config.out_dir {
        Some(dir) => {
            let path = dir.join(summary_file_name(config.mode));
            let mut text = String::from(SUMMARY_HEADER);
            text.push('\n');
            for row in &runs {
                text.push_str(&row.csv_row());
                text.push('\n');
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            Some(path)
        }
        None => None,
    };

    Ok(ExperimentSummary { runs, failures, summary_path })
}

fn run_one_seed(config: &ExperimentConfig, base_doc: &str, seed: u64) -> Result<RunSummary> {
    let doc = apply_overrides(base_doc, &[("seed".to_string(), seed.to_string())])?;
    let (env, params) = load_scenario(&doc).with_context(|| format!("seed {seed}"))?;

    let engine = match config.mode {
        RunMode::Rbso => run,
        RunMode::RandomWalk => run_random_walk_baseline,
    };

    let started = Instant::now();
    let result = match config.verbosity {
        TraceVerbosity::None => engine(&env, &params, &mut NullSink)?,
        verbosity => {
            let dir = config.out_dir.as_ref().expect("validated with out_dir");
            let path = dir.join(trace_file_name(config.mode, seed));
            let mut sink = JsonlSink::create(&path, verbosity == TraceVerbosity::Events)?;
            let result = engine(&env, &params, &mut sink)?;
            sink.finish()?;
            result
        }
    };
    let wall_ms = started.elapsed().as_millis();
    Ok(RunSummary::from_result(seed, config.mode, &result, wall_ms))
}
