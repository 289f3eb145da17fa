//! Step-trace records: the reproducibility log a run emits, one record per robot per
//! tick. Sinks decide what to keep; the engine emits everything.

use serde::{Serialize, Serializer};
use std::fmt;

/// Motion/activity mode a robot is in when a record is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Go,
    Follow,
    Arrived,
    Parked,
    Handling,
}

impl fmt::Display for TraceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TraceMode::Go => "go",
            TraceMode::Follow => "follow",
            TraceMode::Arrived => "arrived",
            TraceMode::Parked => "parked",
            TraceMode::Handling => "handling",
        };
        f.write_str(s)
    }
}

impl Serialize for TraceMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Event tag for one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    None,
    /// The robot detected this target on this tick.
    Found(usize),
    /// Holding on a found target.
    Handling,
    /// Reached the assigned goal on this tick.
    Arrived,
    /// Proposal rejected by collision avoidance; held position.
    Waiting,
}

impl TraceEvent {
    pub fn is_none(&self) -> bool {
        matches!(self, TraceEvent::None)
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::None => f.write_str("none"),
            TraceEvent::Found(t) => write!(f, "found:{t}"),
            TraceEvent::Handling => f.write_str("handling"),
            TraceEvent::Arrived => f.write_str("arrived"),
            TraceEvent::Waiting => f.write_str("waiting"),
        }
    }
}

impl Serialize for TraceEvent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One robot's snapshot at one global step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u64,
    pub robot: usize,
    pub x: f64,
    pub y: f64,
    pub fitness: f64,
    pub mode: TraceMode,
    pub event: TraceEvent,
}

/// Receiver for step records.
pub trait TraceSink {
    fn record(&mut self, record: &StepRecord);
}

/// Discards everything.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _record: &StepRecord) {}
}

/// Keeps every record in memory; used by tests and replay checks.
#[derive(Debug, Default)]
pub struct VecSink {
    pub records: Vec<StepRecord>,
}

impl TraceSink for VecSink {
    fn record(&mut self, record: &StepRecord) {
        self.records.push(record.clone());
    }
}
