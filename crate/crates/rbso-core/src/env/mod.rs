//! World model: arena, rectangular obstacles, beacon targets and their signal field.
//!
//! The target signal attenuates as s(d) = (1/(a*sqrt(pi))) * exp(-d/a^2), where d is
//! the distance to the target center and a the attenuation coefficient. At a point the
//! field is the maximum over the active targets' contributions, so each target keeps
//! its own signal peak and deactivating one never raises the field anywhere.

mod scenario;

pub use scenario::{load_scenario, ScenarioDoc, ScenarioError};

use crate::geometry::{Point2, Rectangle};
use serde::{Deserialize, Serialize};

/// Static description of the search world.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Rectangle>,
    pub targets: Vec<TargetSpec>,
    /// Attenuation coefficient `a` of the beacon signal.
    pub attenuation_a: f64,
    /// Detection tolerance: a robot closer than this to an active target finds it.
    pub detect_epsilon: f64,
    /// Number of member robots.
    pub population_n: usize,
}

impl EnvironmentSpec {
    /// The arena as a rectangle anchored at the origin.
    pub fn arena(&self) -> Rectangle {
        Rectangle::new(Point2::new(0.0, 0.0), Point2::new(self.width, self.height))
    }

    /// Signal threshold equivalent to "distance < detect_epsilon".
    pub fn detection_threshold(&self) -> f64 {
        per_target_signal(self.detect_epsilon, self.attenuation_a)
    }

    /// Fresh mutable target states, all broadcasting.
    pub fn make_targets(&self) -> Vec<TargetState> {
        self.targets.iter().map(|t| TargetState::new(t.location)).collect()
    }

    pub fn inside_bounds(&self, p: Point2) -> bool {
        self.arena().contains(p)
    }

    pub fn inside_any_obstacle_interior(&self, p: Point2) -> bool {
        self.obstacles.iter().any(|o| o.contains_interior(p))
    }

    /// Checks every structural invariant; error messages carry a field path.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |path: &str, message: String| {
            Err(ScenarioError::Validation { path: path.to_string(), message })
        };
        if !(self.width > 0.0) {
            return invalid("arena.width", format!("must be > 0, got {}", self.width));
        }
        if !(self.height > 0.0) {
            return invalid("arena.height", format!("must be > 0, got {}", self.height));
        }
        if !(self.attenuation_a > 0.0) {
            return invalid("signal.a", format!("must be > 0, got {}", self.attenuation_a));
        }
        if !(self.detect_epsilon > 0.0) {
            return invalid(
                "signal.epsilon",
                format!("must be > 0, got {}", self.detect_epsilon),
            );
        }
        if self.population_n < 1 {
            return invalid("robots_random.count", "must be >= 1".to_string());
        }
        let arena = self.arena();
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_valid() {
                return invalid(
                    &format!("obstacles[{i}]"),
                    "min corner must be strictly below max corner on both axes".to_string(),
                );
            }
            if !arena.contains_rect(o) {
                return invalid(
                    &format!("obstacles[{i}]"),
                    "obstacle extends outside the arena".to_string(),
                );
            }
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !arena.contains(t.location) {
                return invalid(
                    &format!("targets[{i}]"),
                    format!("target at ({}, {}) lies outside the arena", t.location.x, t.location.y),
                );
            }
            if let Some(j) = self.obstacles.iter().position(|o| o.contains_interior(t.location)) {
                return invalid(
                    &format!("targets[{i}]"),
                    format!("target at ({}, {}) lies inside obstacle {j}", t.location.x, t.location.y),
                );
            }
        }
        Ok(())
    }
}

/// Immutable description of one target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub location: Point2,
}

/// Mutable target: broadcasting until handled, then silent forever.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    location: Point2,
    active: bool,
}

impl TargetState {
    pub fn new(location: Point2) -> Self {
        Self { location, active: true }
    }

    pub fn location(&self) -> Point2 {
        self.location
    }

    pub fn active(&self) -> bool {
        self.active
    }

    /// One-way transition: a deactivated target never broadcasts again.
    pub fn deactivate(&mut self) {
        self.active = false;
    }
}

/// Signal strength at a point plus which active target produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalReading {
    pub value: f64,
    pub nearest_active_target: Option<usize>,
    /// Distance to the reported target; infinite when nothing is active.
    pub nearest_distance: f64,
}

impl SignalReading {
    pub fn silent() -> Self {
        Self { value: 0.0, nearest_active_target: None, nearest_distance: f64::INFINITY }
    }
}

/// Signal strength of a single target at distance `d`: (1/(a*sqrt(pi))) * exp(-d/a^2).
pub fn per_target_signal(d: f64, a: f64) -> f64 {
    debug_assert!(d >= 0.0 && a > 0.0);
    (1.0 / (a * std::f64::consts::PI.sqrt())) * (-d / (a * a)).exp()
}

/// Combined field at `p`: the strongest active-target contribution.
///
/// The per-target signal is strictly decreasing in distance, so the argmax is the
/// nearest active target; ties go to the lowest target index.
pub fn field_value(p: Point2, targets: &[TargetState], a: f64) -> SignalReading {
    let mut best = SignalReading::silent();
    for (i, t) in targets.iter().enumerate() {
        if !t.active() {
            continue;
        }
        let d = p.distance(t.location());
        let s = per_target_signal(d, a);
        if s > best.value {
            best = SignalReading { value: s, nearest_active_target: Some(i), nearest_distance: d };
        }
    }
    best
}

/// Whether the open segment (p, q) intersects the interior of any obstacle.
///
/// Touching an obstacle boundary (grazing along an edge, clipping a corner) does not
/// count: only interior penetration blocks. Implemented by slab-clipping the segment
/// against each closed rectangle and testing the clipped midpoint for strict
/// interiority, which is exact for convex boxes.
pub fn is_blocked(p: Point2, q: Point2, obstacles: &[Rectangle]) -> bool {
    obstacles.iter().any(|r| segment_crosses_interior(p, q, r))
}

/// Index of the first obstacle whose interior the open segment crosses, nearest first
/// along the segment when several do.
pub fn first_blocking_obstacle(p: Point2, q: Point2, obstacles: &[Rectangle]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, r) in obstacles.iter().enumerate() {
        if let Some(t_enter) = interior_entry_parameter(p, q, r) {
            match best {
                Some((t, _)) if t <= t_enter => {}
                _ => best = Some((t_enter, i)),
            }
        }
    }
    best.map(|(_, i)| i)
}

fn segment_crosses_interior(p: Point2, q: Point2, rect: &Rectangle) -> bool {
    interior_entry_parameter(p, q, rect).is_some()
}

/// Liang-Barsky clip of segment p->q against the closed rectangle; returns the clip
/// entry parameter when the clipped portion actually crosses the interior.
fn interior_entry_parameter(p: Point2, q: Point2, rect: &Rectangle) -> Option<f64> {
    let d = q - p;
    let mut tmin = 0.0f64;
    let mut tmax = 1.0f64;
    for (p0, delta, lo, hi) in [
        (p.x, d.x, rect.min.x, rect.max.x),
        (p.y, d.y, rect.min.y, rect.max.y),
    ] {
        if delta == 0.0 {
            if p0 < lo || p0 > hi {
                return None;
            }
        } else {
            let mut t0 = (lo - p0) / delta;
            let mut t1 = (hi - p0) / delta;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            tmin = tmin.max(t0);
            tmax = tmax.min(t1);
            if tmin > tmax {
                return None;
            }
        }
    }
    if tmax <= tmin {
        // Point contact (corner graze) only.
        return None;
    }
    let mid = p + (q - p) * ((tmin + tmax) * 0.5);
    if rect.contains_interior(mid) {
        Some(tmin)
    } else {
        // Positive-length overlap confined to the boundary (edge graze).
        None
    }
}
