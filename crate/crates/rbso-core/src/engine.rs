//! Search-loop orchestration: initialize the swarm, then iterate grouping, new
//! position generation, optimal allocation and the move-and-evaluate phase until
//! every target is handled or the tick budget runs out.

use crate::assignment::assign_with_exclusions;
use crate::env::{field_value, EnvironmentSpec};
use crate::generation::{generate_positions, GenerationParams, PersonalBest};
use crate::geometry::Point2;
use crate::grouping::{group_swarm, GroupingParams};
use crate::motion::{move_and_evaluate, FoundEvent, MotionParams};
use crate::seeding::{substream, Stream};
use crate::swarm::{ActivityStatus, RobotState};
use crate::trace::TraceSink;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("packing failure: placed only {placed} of {requested} robots after {attempts} attempts")]
    Packing { placed: usize, requested: usize, attempts: usize },
}

/// Every knob of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub grouping: GroupingParams,
    pub generation: GenerationParams,
    pub motion: MotionParams,
    /// Total tick budget of the run (T_g). The generation noise schedule keeps its
    /// own copy so truncated runs remain prefixes of longer ones.
    pub global_budget: u64,
    pub seed: u64,
    /// Pinned robot placement seed; defaults to the run seed.
    pub robot_placement_seed: Option<u64>,
}

/// Outcome summary of one run; the trace stream carries the tick-level detail.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Detections in emission order (steps non-decreasing).
    pub targets_found: Vec<FoundEvent>,
    pub total_steps: u64,
    pub all_found: bool,
    pub path_lengths: Vec<f64>,
    pub iterations: u64,
}

impl RunResult {
    /// Step at which the last target was found, if all were.
    pub fn all_found_step(&self) -> Option<u64> {
        if self.all_found {
            self.targets_found.iter().map(|f| f.step).max()
        } else {
            None
        }
    }

    /// Number of targets found at or before `step`.
    pub fn found_by(&self, step: u64) -> usize {
        self.targets_found.iter().filter(|f| f.step <= step).count()
    }
}

/// Uniform random swarm placement: inside the arena, outside obstacle interiors,
/// pairwise at least `d_safe` apart. Personal bests start at the spawn readings.
pub fn initialize(
    env: &EnvironmentSpec,
    d_safe: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<RobotState>, EngineError> {
    let targets = env.make_targets();
    let mut placed: Vec<Point2> = Vec::with_capacity(env.population_n);
    let mut attempts = 0usize;
    let budget = 10_000 * env.population_n.max(1);
    while placed.len() < env.population_n {
        attempts += 1;
        if attempts > budget {
            return Err(EngineError::Packing {
                placed: placed.len(),
                requested: env.population_n,
                attempts,
            });
        }
        let p = Point2::new(rng.random::<f64>() * env.width, rng.random::<f64>() * env.height);
        if env.inside_any_obstacle_interior(p) {
            continue;
        }
        if placed.iter().any(|&q| q.distance(p) < d_safe) {
            continue;
        }
        placed.push(p);
    }
    Ok(placed
        .into_iter()
        .map(|p| RobotState::new(p, field_value(p, &targets, env.attenuation_a).value))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GoalPolicy {
    Bso,
    RandomWalk,
}

/// Full search run with BSO-generated goals.
pub fn run(
    env: &EnvironmentSpec,
    params: &SimParams,
    trace: &mut dyn TraceSink,
) -> Result<RunResult, EngineError> {
    run_loop(env, params, GoalPolicy::Bso, trace)
}

/// Identical loop and motion rules, but goals are uniform random free points.
pub fn run_random_walk_baseline(
    env: &EnvironmentSpec,
    params: &SimParams,
    trace: &mut dyn TraceSink,
) -> Result<RunResult, EngineError> {
    run_loop(env, params, GoalPolicy::RandomWalk, trace)
}

fn run_loop(
    env: &EnvironmentSpec,
    params: &SimParams,
    policy: GoalPolicy,
    trace: &mut dyn TraceSink,
) -> Result<RunResult, EngineError> {
    let mut placement_rng =
        substream(params.robot_placement_seed.unwrap_or(params.seed), Stream::Robots);
    let mut rng = substream(params.seed, Stream::Search);
    let mut robots = initialize(env, params.motion.d_safe, &mut placement_rng)?;
    let mut targets = env.make_targets();
    let n = robots.len();

    let mut global_step = 0u64;
    let mut iterations = 0u64;
    let mut found: Vec<FoundEvent> = Vec::new();
    let mut path_lengths = vec![0.0; n];

    loop {
        if targets.iter().all(|t| !t.active()) || global_step >= params.global_budget {
            break;
        }
        iterations += 1;

        // Handling robots rejoin at the grouping step, and every personal best is
        // re-read against the current field: a handled target no longer
        // broadcasts, so remembered strengths recorded from it must fade instead
        // of anchoring the grouping to silent positions forever.
        for r in robots.iter_mut() {
            r.activity = ActivityStatus::Searching;
            r.pbest.fitness = field_value(r.pbest.position, &targets, env.attenuation_a).value;
        }

        let goals: Vec<Point2> = match policy {
            GoalPolicy::Bso => {
                let pbest_positions: Vec<Point2> = robots.iter().map(|r| r.pbest.position).collect();
                let fitness: Vec<f64> = robots.iter().map(|r| r.pbest.fitness).collect();
                let grouping = group_swarm(&pbest_positions, &fitness, &params.grouping, &mut rng);
                let pbests: Vec<PersonalBest> = robots.iter().map(|r| r.pbest).collect();
                generate_positions(
                    &grouping,
                    &pbests,
                    &params.generation,
                    global_step,
                    &env.arena(),
                    &mut rng,
                )
            }
            GoalPolicy::RandomWalk => {
                (0..n).map(|i| random_free_point(env, robots[i].position, &mut rng)).collect()
            }
        };

        let positions: Vec<Point2> = robots.iter().map(|r| r.position).collect();
        let available: Vec<bool> =
            robots.iter().map(|r| r.activity != ActivityStatus::Handling).collect();
        let allocation = assign_with_exclusions(&positions, &available, &goals)
            .expect("engine builds equal-sized, finite cost matrices");
        let per_robot_goal: Vec<Point2> = allocation
            .iter()
            .enumerate()
            .map(|(i, g)| g.map_or(positions[i], |j| goals[j]))
            .collect();

        let outcome = move_and_evaluate(
            &mut robots,
            &per_robot_goal,
            env,
            &mut targets,
            &params.motion,
            &mut global_step,
            params.global_budget,
            trace,
        );
        for (acc, d) in path_lengths.iter_mut().zip(&outcome.path_delta) {
            *acc += d;
        }
        found.extend(outcome.found);
    }

    let all_found = targets.iter().all(|t| !t.active());
    Ok(RunResult {
        targets_found: found,
        total_steps: global_step,
        all_found,
        path_lengths,
        iterations,
    })
}

fn random_free_point(env: &EnvironmentSpec, fallback: Point2, rng: &mut ChaCha8Rng) -> Point2 {
    for _ in 0..1_000_000 {
        let p = Point2::new(rng.random::<f64>() * env.width, rng.random::<f64>() * env.height);
        if !env.inside_any_obstacle_interior(p) {
            return p;
        }
    }
    fallback
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::TargetSpec;
    use crate::geometry::Rectangle;
    use crate::trace::{NullSink, VecSink};

    fn tiny_params(seed: u64, budget: u64) -> SimParams {
        SimParams {
            grouping: GroupingParams {
                max_groups: 3,
                max_iterations: 16,
                mean_distance_threshold: 50.0,
            },
            generation: GenerationParams {
                p_one: 0.4,
                p_center: 0.8,
                noise_base: 20.0,
                global_budget: budget,
            },
            motion: MotionParams { step_length: 2.0, d_safe: 3.0, max_steps: 200, sample_dt: 0.1 },
            global_budget: budget,
            seed,
            robot_placement_seed: None,
        }
    }

    fn open_env(n: usize, targets: Vec<TargetSpec>) -> EnvironmentSpec {
        EnvironmentSpec {
            width: 300.0,
            height: 300.0,
            obstacles: vec![],
            targets,
            attenuation_a: 10.0,
            detect_epsilon: 5.0,
            population_n: n,
        }
    }

    #[test]
    fn initialize_is_deterministic_and_valid() {
        let env = open_env(20, vec![]);
        let mut r1 = substream(42, Stream::Robots);
        let mut r2 = substream(42, Stream::Robots);
        let a = initialize(&env, 3.0, &mut r1).unwrap();
        let b = initialize(&env, 3.0, &mut r2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        for (i, r) in a.iter().enumerate() {
            assert!(env.inside_bounds(r.position));
            for other in &a[i + 1..] {
                assert!(r.position.distance(other.position) >= 3.0);
            }
        }
    }

    #[test]
    fn initialize_reports_packing_failure() {
        let env = EnvironmentSpec {
            width: 10.0,
            height: 10.0,
            obstacles: vec![Rectangle::new(Point2::new(0.0, 0.0), Point2::new(10.0, 10.0))],
            targets: vec![],
            attenuation_a: 10.0,
            detect_epsilon: 5.0,
            population_n: 2,
        };
        let mut rng = substream(1, Stream::Robots);
        assert!(matches!(initialize(&env, 3.0, &mut rng), Err(EngineError::Packing { .. })));
    }

    #[test]
    fn zero_targets_terminates_immediately() {
        let env = open_env(4, vec![]);
        let result = run(&env, &tiny_params(7, 5_000), &mut NullSink).unwrap();
        assert!(result.all_found);
        assert!(result.targets_found.is_empty());
        assert_eq!(result.total_steps, 0);
        assert_eq!(result.iterations, 0);
    }

    #[test]
    fn single_robot_finds_nearby_target_in_first_phase() {
        // One robot, one target placed 1 unit from its spawn: wherever the first
        // 2-unit step lands, the robot is still within the 5-unit detection ball,
        // so the very first evaluation finds the target.
        let mut env = open_env(1, vec![]);
        let mut rng = substream(3, Stream::Robots);
        let start = initialize(&env, 3.0, &mut rng).unwrap()[0].position;
        env.targets = vec![TargetSpec { location: Point2::new(start.x + 1.0, start.y) }];
        let result = run(&env, &tiny_params(3, 5_000), &mut NullSink).unwrap();
        assert!(result.all_found, "found events: {:?}", result.targets_found);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.targets_found[0].step, 1);
    }

    #[test]
    fn found_positions_lie_within_epsilon() {
        let env = open_env(
            6,
            vec![
                TargetSpec { location: Point2::new(50.0, 60.0) },
                TargetSpec { location: Point2::new(250.0, 240.0) },
                TargetSpec { location: Point2::new(150.0, 100.0) },
            ],
        );
        let result = run(&env, &tiny_params(11, 20_000), &mut NullSink).unwrap();
        for f in &result.targets_found {
            assert!(f.position.distance(env.targets[f.target].location) < env.detect_epsilon);
        }
        // Conservation: found + still-active = all targets, and no double finds.
        let mut seen = vec![false; env.targets.len()];
        for f in &result.targets_found {
            assert!(!seen[f.target], "target {} found twice", f.target);
            seen[f.target] = true;
        }
        assert!(result.targets_found.len() <= env.targets.len());
        assert_eq!(result.all_found, result.targets_found.len() == env.targets.len());
    }

    #[test]
    fn identical_seed_reproduces_trace_exactly() {
        let env = open_env(
            5,
            vec![
                TargetSpec { location: Point2::new(40.0, 40.0) },
                TargetSpec { location: Point2::new(260.0, 200.0) },
            ],
        );
        let params = tiny_params(21, 6_000);
        let mut s1 = VecSink::default();
        let mut s2 = VecSink::default();
        let r1 = run(&env, &params, &mut s1).unwrap();
        let r2 = run(&env, &params, &mut s2).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(s1.records, s2.records);
        assert!(!s1.records.is_empty());
    }

    #[test]
    fn found_steps_nondecreasing_and_within_budget() {
        let env = open_env(
            8,
            (0..5)
                .map(|i| TargetSpec { location: Point2::new(30.0 + 50.0 * i as f64, 150.0) })
                .collect(),
        );
        let result = run(&env, &tiny_params(5, 8_000), &mut NullSink).unwrap();
        assert!(result.total_steps <= 8_000);
        for pair in result.targets_found.windows(2) {
            assert!(pair[0].step <= pair[1].step);
        }
    }

    #[test]
    fn longer_budget_finds_superset() {
        let env = open_env(
            6,
            vec![
                TargetSpec { location: Point2::new(40.0, 40.0) },
                TargetSpec { location: Point2::new(260.0, 60.0) },
                TargetSpec { location: Point2::new(150.0, 260.0) },
                TargetSpec { location: Point2::new(60.0, 250.0) },
            ],
        );
        // Same noise schedule in both runs; only the engine budget is truncated,
        // so the short run must be a prefix of the long one.
        let mut short = tiny_params(13, 2_000);
        short.generation.global_budget = 10_000;
        let mut long = tiny_params(13, 10_000);
        long.generation.global_budget = 10_000;
        let a = run(&env, &short, &mut NullSink).unwrap();
        let b = run(&env, &long, &mut NullSink).unwrap();
        assert!(a.targets_found.len() <= b.targets_found.len());
        for (fa, fb) in a.targets_found.iter().zip(&b.targets_found) {
            assert_eq!(fa, fb);
        }
    }

    #[test]
    fn baseline_is_deterministic_and_eventually_finds() {
        let env = open_env(
            5,
            vec![
                TargetSpec { location: Point2::new(100.0, 100.0) },
                TargetSpec { location: Point2::new(200.0, 200.0) },
            ],
        );
        let params = tiny_params(9, 30_000);
        let a = run_random_walk_baseline(&env, &params, &mut NullSink).unwrap();
        let b = run_random_walk_baseline(&env, &params, &mut NullSink).unwrap();
        assert_eq!(a, b);
        assert!(a.all_found, "random walk in a small dense arena should finish");
    }
}
