//! Per-robot state shared by the motion and engine layers.

use crate::generation::PersonalBest;
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityStatus {
    /// Actively pathing and evaluating the field.
    Searching,
    /// Stopped on a found target for the rest of the evaluation phase.
    Handling,
    /// Finished moving this phase (arrived or parked).
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Point2,
    pub pbest: PersonalBest,
    pub activity: ActivityStatus,
}

impl RobotState {
    pub fn new(position: Point2, fitness: f64) -> Self {
        Self {
            position,
            pbest: PersonalBest { position, fitness },
            activity: ActivityStatus::Searching,
        }
    }
}
