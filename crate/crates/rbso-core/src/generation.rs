//! New-position generation: the one/two-cluster, center/non-center scheme over the
//! current grouping, a decaying Gaussian perturbation, and personal-best upkeep.

use crate::env::SignalReading;
use crate::geometry::{Point2, Rectangle};
use crate::grouping::GroupingResult;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationParams {
    /// Probability of generating from one group rather than two.
    pub p_one: f64,
    /// Probability of basing the new position on group center(s).
    pub p_center: f64,
    /// Initial perturbation scale in length units.
    pub noise_base: f64,
    /// Tick budget the noise schedule decays over.
    pub global_budget: u64,
}

/// A robot's best visited position and the signal strength recorded there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersonalBest {
    pub position: Point2,
    pub fitness: f64,
}

/// Outcome of the two branch draws for one generated position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub one_cluster: bool,
    pub center: bool,
}

/// Draws the one/two-cluster and center/non-center decisions.
pub fn sample_branch(params: &GenerationParams, rng: &mut ChaCha8Rng) -> Branch {
    let one_cluster = rng.random::<f64>() < params.p_one;
    let center = rng.random::<f64>() < params.p_center;
    Branch { one_cluster, center }
}

/// Logistic sigmoid 1/(1+e^-x).
pub fn logsig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Deterministic part of the perturbation scale at tick `t`:
/// noise_base * logsig((T/2 - t)/k) with k = T/20.
pub fn noise_envelope(t: u64, params: &GenerationParams) -> f64 {
    let budget = params.global_budget as f64;
    let k = budget / 20.0;
    params.noise_base * logsig((0.5 * budget - t as f64) / k)
}

/// Perturbation scale at tick `t`: the envelope times a fresh U(0,1) draw.
pub fn noise_scale(t: u64, params: &GenerationParams, rng: &mut ChaCha8Rng) -> f64 {
    noise_envelope(t, params) * rng.random::<f64>()
}

/// r*a + (1-r)*b.
pub fn convex_combination(a: Point2, b: Point2, r: f64) -> Point2 {
    a * r + b * (1.0 - r)
}

/// Standard normal deviate via Box-Muller; depends only on the rng stream.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates one candidate position per robot slot.
///
/// Each output independently picks one group (probability `p_one`) or two distinct
/// groups; within the choice the base point is the center personal best (probability
/// `p_center`) or a uniformly chosen non-center member's. Two-group bases are a
/// uniform convex combination of the two picks. A Gaussian perturbation scaled by
/// the decaying noise schedule is added and the result clamped to the arena.
pub fn generate_positions(
    grouping: &GroupingResult,
    pbests: &[PersonalBest],
    params: &GenerationParams,
    t: u64,
    arena: &Rectangle,
    rng: &mut ChaCha8Rng,
) -> Vec<Point2> {
    let n_groups = grouping.groups.len();
    assert!(n_groups > 0, "grouping must be nonempty");
    (0..pbests.len())
        .map(|_| {
            let branch = sample_branch(params, rng);
            let base = if branch.one_cluster || n_groups == 1 {
                one_group_base(grouping, pbests, branch.center, rng)
            } else {
                two_group_base(grouping, pbests, branch.center, rng)
            };
            let scale = noise_scale(t, params, rng);
            let candidate = Point2::new(
                base.x + scale * standard_normal(rng),
                base.y + scale * standard_normal(rng),
            );
            arena.clamp(candidate)
        })
        .collect()
}

fn one_group_base(
    grouping: &GroupingResult,
    pbests: &[PersonalBest],
    center: bool,
    rng: &mut ChaCha8Rng,
) -> Point2 {
    let g = rng.random_range(0..grouping.groups.len());
    if center {
        pbests[grouping.centers[g]].position
    } else {
        pbests[non_center_member(grouping, g, rng)].position
    }
}

fn two_group_base(
    grouping: &GroupingResult,
    pbests: &[PersonalBest],
    center: bool,
    rng: &mut ChaCha8Rng,
) -> Point2 {
    let n_groups = grouping.groups.len();
    let g1 = rng.random_range(0..n_groups);
    let mut g2 = rng.random_range(0..n_groups - 1);
    if g2 >= g1 {
        g2 += 1;
    }
    let (a, b) = if center {
        (pbests[grouping.centers[g1]].position, pbests[grouping.centers[g2]].position)
    } else {
        (
            pbests[grouping.groups[g1][rng.random_range(0..grouping.groups[g1].len())]].position,
            pbests[grouping.groups[g2][rng.random_range(0..grouping.groups[g2].len())]].position,
        )
    };
    convex_combination(a, b, rng.random::<f64>())
}

/// Uniform member of group `g` excluding its center; the center itself when the
/// group is a singleton.
fn non_center_member(grouping: &GroupingResult, g: usize, rng: &mut ChaCha8Rng) -> usize {
    let group = &grouping.groups[g];
    if group.len() == 1 {
        return group[0];
    }
    let center = grouping.centers[g];
    let others: Vec<usize> = group.iter().copied().filter(|&i| i != center).collect();
    others[rng.random_range(0..others.len())]
}

/// Keeps the strictly better of the incumbent personal best and the visited point;
/// ties keep the incumbent.
pub fn update_pbest(incumbent: &PersonalBest, visited: Point2, reading: &SignalReading) -> PersonalBest {
    if reading.value > incumbent.fitness {
        PersonalBest { position: visited, fitness: reading.value }
    } else {
        *incumbent
    }
}
