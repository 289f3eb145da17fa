//! Built-in scenario: 20 robots and 10 randomly placed targets in a 1000x1000 arena
//! with six rectangular obstacles, p_one 0.4, p_center 0.8, a = 10, m_g = N/4 = 5,
//! T_g = 20000, m_d = 250, m_s = 500, and a 0.1 s sampling step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbso_core::geometry::{Point2, Rectangle};
use std::fmt::Write;

/// Seed for the fixed obstacle layout baked into the emitted file. Targets and
/// robots stay seedless in the document so every run seed re-rolls them.
const OBSTACLE_LAYOUT_SEED: u64 = 0x52_42_53_4F; // "RBSO"

const ARENA: f64 = 1000.0;
const WALL_MARGIN: f64 = 60.0;
const OBSTACLE_COUNT: usize = 6;
const SIDE_MIN: f64 = 50.0;
const SIDE_MAX: f64 = 150.0;
const CLEARANCE: f64 = 100.0;

fn separation(a: &Rectangle, b: &Rectangle) -> f64 {
    let dx = (a.min.x - b.max.x).max(b.min.x - a.max.x).max(0.0);
    let dy = (a.min.y - b.max.y).max(b.min.y - a.max.y).max(0.0);
    dx.hypot(dy)
}

/// The fixed obstacle layout: sides 50-150, pairwise clearance >= 100, away from
/// the walls. Deterministic.
pub fn reference_obstacles() -> Vec<Rectangle> {
    let mut rng = ChaCha8Rng::seed_from_u64(OBSTACLE_LAYOUT_SEED);
    let mut rects: Vec<Rectangle> = Vec::with_capacity(OBSTACLE_COUNT);
    while rects.len() < OBSTACLE_COUNT {
        let w = SIDE_MIN + rng.random::<f64>() * (SIDE_MAX - SIDE_MIN);
        let h = SIDE_MIN + rng.random::<f64>() * (SIDE_MAX - SIDE_MIN);
        let x = WALL_MARGIN + rng.random::<f64>() * (ARENA - 2.0 * WALL_MARGIN - w);
        let y = WALL_MARGIN + rng.random::<f64>() * (ARENA - 2.0 * WALL_MARGIN - h);
        let candidate = Rectangle::new(Point2::new(x, y), Point2::new(x + w, y + h));
        if rects.iter().all(|r| separation(r, &candidate) >= CLEARANCE) {
            rects.push(candidate);
        }
    }
    rects
}

/// Renders the built-in scenario document. Byte-stable across calls.
pub fn emit_reference_scenario() -> String {
    let mut out = String::new();
    out.push_str("# Multi-target collaborative search: 20 robots, 10 targets, 1000x1000 arena.\n");
    out.push_str("# Targets and robots are re-rolled from the run seed; obstacles are fixed.\n\n");
    out.push_str("seed = 1\n\n");
    out.push_str("[arena]\nwidth = 1000.0\nheight = 1000.0\n\n");
    out.push_str("[signal]\na = 10.0\nepsilon = 5.0\n\n");
    out.push_str("[bso]\np_one = 0.4\np_center = 0.8\nnoise_base = 250.0\n\n");
    out.push_str("[rbso]\nm_g = 5\nT_g = 20000\nm_d = 250.0\nm_s = 500\n");
    out.push_str("step_length = 2.0\nd_safe = 3.0\nsample_dt = 0.1\n\n");
    out.push_str("[targets_random]\ncount = 10\n\n");
    out.push_str("[robots_random]\ncount = 20\n");
    for r in reference_obstacles() {
        write!(
            out,
            "\n[[obstacles]]\nmin = [{:.1}, {:.1}]\nmax = [{:.1}, {:.1}]\n",
            r.min.x, r.min.y, r.max.x, r.max.y
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_respects_constraints() {
        let rects = reference_obstacles();
        assert_eq!(rects.len(), 6);
        for (i, a) in rects.iter().enumerate() {
            assert!(a.width() >= 50.0 && a.width() <= 150.0);
            assert!(a.height() >= 50.0 && a.height() <= 150.0);
            assert!(a.min.x >= WALL_MARGIN && a.max.x <= ARENA - WALL_MARGIN);
            assert!(a.min.y >= WALL_MARGIN && a.max.y <= ARENA - WALL_MARGIN);
            for b in &rects[i + 1..] {
                assert!(separation(a, b) >= 100.0);
            }
        }
    }

    #[test]
    fn emission_is_stable() {
        assert_eq!(emit_reference_scenario(), emit_reference_scenario());
    }
}
