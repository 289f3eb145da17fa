//! Consistency cross-check: summary rows must be derivable from their trace files.

use crate::experiment::{trace_file_name, RunMode, SUMMARY_HEADER};
use anyhow::{bail, Context, Result};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub seed: u64,
    pub mode: String,
    pub targets_found: usize,
    pub all_found: bool,
    pub total_steps: u64,
    pub iterations: u64,
    pub find_steps: Vec<(usize, u64)>,
    pub total_path_length: f64,
}

pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SUMMARY_HEADER => {}
        other => bail!("unexpected summary header: {other:?}"),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            bail!("row {} has {} fields, expected 8", i + 2, fields.len());
        }
        let find_steps = if fields[6].is_empty() {
            Vec::new()
        } else {
            fields[6]
                .split(';')
                .map(|pair| -> Result<(usize, u64)> {
                    let (t, s) = pair
                        .split_once(':')
                        .with_context(|| format!("bad find entry `{pair}`"))?;
                    Ok((t.parse()?, s.parse()?))
                })
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(SummaryRow {
            seed: fields[0].parse().context("seed")?,
            mode: fields[1].to_string(),
            targets_found: fields[2].parse().context("targets_found")?,
            all_found: fields[3].parse().context("all_found")?,
            total_steps: fields[4].parse().context("total_steps")?,
            iterations: fields[5].parse().context("iterations")?,
            find_steps,
            total_path_length: fields[7].parse().context("total_path_length")?,
        });
    }
    Ok(rows)
}

/// Found events `(target, step)` extracted from a JSON-lines trace, in file order.
pub fn trace_found_events(trace_text: &str) -> Result<Vec<(usize, u64)>> {
    let mut found = Vec::new();
    for (i, line) in trace_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("trace line {}", i + 1))?;
        let event = v["event"].as_str().unwrap_or("none");
        if let Some(target) = event.strip_prefix("found:") {
            let step = v["step"].as_u64().context("step field")?;
            found.push((target.parse()?, step));
        }
    }
    Ok(found)
}

/// Asserts one summary row against its trace file contents.
pub fn check_row(row: &SummaryRow, trace_text: &str) -> Result<()> {
    let found = trace_found_events(trace_text)?;
    if found != row.find_steps {
        bail!(
            "seed {}: trace found events {:?} differ from summary {:?}",
            row.seed,
            found,
            row.find_steps
        );
    }
    if found.len() != row.targets_found {
        bail!("seed {}: found count mismatch", row.seed);
    }
    let max_step = trace_step_bounds(trace_text, row.seed)?;
    if max_step > row.total_steps {
        bail!("seed {}: trace step {} exceeds summary total {}", row.seed, max_step, row.total_steps);
    }
    Ok(())
}

/// Checks that steps never decrease within the file and returns the last one.
fn trace_step_bounds(trace_text: &str, seed: u64) -> Result<u64> {
    let mut prev = 0;
    for line in trace_text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line)?;
        let step = v["step"].as_u64().context("step field")?;
        if step < prev {
            bail!("seed {seed}: trace steps decrease ({prev} -> {step})");
        }
        prev = step;
    }
    Ok(prev)
}

/// Cross-checks every row of the summary in `dir` whose trace file exists.
/// Returns the number of rows checked.
pub fn verify_directory(dir: &Path, mode: RunMode) -> Result<usize> {
    let summary_path = dir.join(crate::experiment::summary_file_name(mode));
    let text = fs::read_to_string(&summary_path)
        .with_context(|| format!("reading {}", summary_path.display()))?;
    let rows = parse_summary(&text)?;
    let mut checked = 0;
    for row in &rows {
        let trace_path = dir.join(trace_file_name(mode, row.seed));
        if !trace_path.exists() {
            continue;
        }
        let trace = fs::read_to_string(&trace_path)
            .with_context(|| format!("reading {}", trace_path.display()))?;
        check_row(row, &trace).with_context(|| format!("checking {}", trace_path.display()))?;
        checked += 1;
    }
    Ok(checked)
}
