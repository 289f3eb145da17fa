//! Deterministic 2-D swarm-robotics simulator for multi-target collaborative search
//! driven by Robotic Brain Storm Optimization (RBSO).
//!
//! The search loop groups the swarm by divisive clustering over personal-best
//! positions, generates one candidate position per robot with the one/two-cluster
//! center/non-center scheme, assigns robots to candidates at minimum total travel
//! cost, and moves everyone stepwise with Bug-style obstacle avoidance while
//! evaluating the beacon signal field along the way. Runs are reproducible
//! bit-for-bit from a single seed.

pub mod assignment;
pub mod engine;
pub mod env;
pub mod generation;
pub mod geometry;
pub mod grouping;
pub mod motion;
pub mod seeding;
pub mod swarm;
pub mod trace;

pub use engine::{run, run_random_walk_baseline, RunResult, SimParams};
pub use env::{load_scenario, EnvironmentSpec, ScenarioError};
pub use geometry::{Point2, Rectangle};
pub use motion::FoundEvent;
pub use swarm::{ActivityStatus, RobotState};
pub use trace::{NullSink, StepRecord, TraceEvent, TraceMode, TraceSink, VecSink};
