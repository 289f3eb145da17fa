//! Stepwise robot motion: straight-line pursuit of the assigned goal with Bug-style
//! obstacle boundary following, robot-robot collision avoidance, and the per-phase
//! move-and-evaluate loop that feeds the signal readings back into personal bests.
//!
//! Boundary following walks the obstacle perimeter offset outward by half the safety
//! distance, stopping at corners, and leaves again once the goal is in clear sight
//! and strictly closer than it was at the hit point.

use crate::env::{field_value, first_blocking_obstacle, is_blocked, EnvironmentSpec, TargetState};
use crate::generation::update_pbest;
use crate::geometry::{Point2, Rectangle};
use crate::swarm::{ActivityStatus, RobotState};
use crate::trace::{StepRecord, TraceEvent, TraceMode, TraceSink};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    /// Distance covered per tick.
    pub step_length: f64,
    /// Minimum allowed robot-robot separation.
    pub d_safe: f64,
    /// Tick cap per evaluation phase (m_s).
    pub max_steps: u64,
    /// Wall-clock seconds one tick represents.
    pub sample_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionMode {
    GoToGoal,
    BoundaryFollow,
    Arrived,
    Parked,
}

/// Per-phase navigation state of one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub mode: MotionMode,
    pub followed_obstacle: Option<usize>,
    pub hit_point: Option<Point2>,
    /// Perimeter walking direction while following.
    pub follow_ccw: bool,
    /// Boundary distance covered since the current hit; a full lap around the
    /// contour without leaving means the goal is unreachable.
    pub follow_travel: f64,
}

impl MotionState {
    pub fn fresh() -> Self {
        Self {
            mode: MotionMode::GoToGoal,
            followed_obstacle: None,
            hit_point: None,
            follow_ccw: true,
            follow_travel: 0.0,
        }
    }

    fn arrived() -> Self {
        Self { mode: MotionMode::Arrived, ..Self::fresh() }
    }

    fn parked() -> Self {
        Self { mode: MotionMode::Parked, ..Self::fresh() }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self.mode, MotionMode::Arrived | MotionMode::Parked)
    }
}

/// One navigation step toward `goal`: the proposed next position plus the follow-on
/// state. Proposals never enter obstacle interiors; robot-robot spacing is resolved
/// separately.
pub fn plan_step(
    pos: Point2,
    state: &MotionState,
    goal: Point2,
    env: &EnvironmentSpec,
    params: &MotionParams,
) -> (Point2, MotionState) {
    match state.mode {
        MotionMode::Arrived | MotionMode::Parked => (pos, *state),
        MotionMode::GoToGoal => go_to_goal_step(pos, goal, env, params),
        MotionMode::BoundaryFollow => {
            let hit = state.hit_point.expect("boundary follow records a hit point");
            let clear = !is_blocked(pos, goal, &env.obstacles);
            if clear && pos.distance(goal) < hit.distance(goal) {
                go_to_goal_step(pos, goal, env, params)
            } else {
                follow_step(pos, state, env, params)
            }
        }
    }
}

fn go_to_goal_step(
    pos: Point2,
    goal: Point2,
    env: &EnvironmentSpec,
    params: &MotionParams,
) -> (Point2, MotionState) {
    let d = pos.distance(goal);
    if d <= params.step_length {
        if !is_blocked(pos, goal, &env.obstacles) && !env.inside_any_obstacle_interior(goal) {
            return (goal, MotionState::arrived());
        }
        return enter_follow(pos, goal, goal, env, params);
    }
    let step_target = pos + (goal - pos).normalized() * params.step_length;
    if is_blocked(pos, step_target, &env.obstacles) {
        return enter_follow(pos, step_target, goal, env, params);
    }
    (step_target, MotionState::fresh())
}

/// Records the hit, picks the perimeter direction with the smaller initial heading
/// change (ties counter-clockwise), and takes the first follow step.
fn enter_follow(
    pos: Point2,
    probe_end: Point2,
    goal: Point2,
    env: &EnvironmentSpec,
    params: &MotionParams,
) -> (Point2, MotionState) {
    let Some(obstacle) = first_blocking_obstacle(pos, probe_end, &env.obstacles) else {
        // Probe not actually blocked; stay put in go-to-goal.
        return (pos, MotionState::fresh());
    };
    let contour = follow_contour(&env.obstacles[obstacle], params);
    let desired = (goal - pos).normalized();
    let s0 = contour_param_nearest(&contour, pos);
    let tangent = contour_tangent_ccw(&contour, s0);
    let follow_ccw = desired.dot(tangent) >= 0.0;
    let state = MotionState {
        mode: MotionMode::BoundaryFollow,
        followed_obstacle: Some(obstacle),
        hit_point: Some(pos),
        follow_ccw,
        follow_travel: 0.0,
    };
    follow_step(pos, &state, env, params)
}

fn follow_contour(obstacle: &Rectangle, params: &MotionParams) -> Rectangle {
    obstacle.inflate(params.d_safe * 0.5)
}

fn follow_step(
    pos: Point2,
    state: &MotionState,
    env: &EnvironmentSpec,
    params: &MotionParams,
) -> (Point2, MotionState) {
    let obstacle = state.followed_obstacle.expect("boundary follow has an obstacle");
    let contour = follow_contour(&env.obstacles[obstacle], params);
    // A full lap without a leave means no contour point ever satisfies the leave
    // condition; the closest approach has been visited, so stop here.
    if state.follow_travel > 1.05 * contour_perimeter(&contour) + params.step_length {
        return (pos, MotionState::parked());
    }
    let s_cur = contour_param_nearest(&contour, pos);
    let s_next = advance_along_contour(&contour, s_cur, params.step_length, state.follow_ccw);
    let waypoint = contour_point(&contour, s_next);
    let delta = waypoint - pos;
    let reach = delta.norm();
    let raw = if reach <= params.step_length {
        waypoint
    } else {
        pos + delta.normalized() * params.step_length
    };
    let proposal = env.arena().clamp(raw);
    if proposal == pos {
        return (pos, *state);
    }
    if is_blocked(pos, proposal, &env.obstacles) {
        // Another obstacle interrupts this contour (overlapping union) or the arena
        // clamp bent the step into a wall-adjacent obstacle: transfer the follow to
        // the blocker and hold for this tick.
        if let Some(blocker) = first_blocking_obstacle(pos, proposal, &env.obstacles) {
            if blocker != obstacle {
                let mut next = *state;
                next.followed_obstacle = Some(blocker);
                return (pos, next);
            }
        }
        return (pos, *state);
    }
    (proposal, *state)
}

// Contour parameterization, counter-clockwise from the min corner:
// bottom (min->max x), right (min->max y), top (max->min x), left (max->min y).

fn contour_perimeter(c: &Rectangle) -> f64 {
    2.0 * (c.width() + c.height())
}

fn contour_point(c: &Rectangle, s: f64) -> Point2 {
    let (w, h) = (c.width(), c.height());
    let p = contour_perimeter(c);
    let s = s.rem_euclid(p);
    if s < w {
        Point2::new(c.min.x + s, c.min.y)
    } else if s < w + h {
        Point2::new(c.max.x, c.min.y + (s - w))
    } else if s < 2.0 * w + h {
        Point2::new(c.max.x - (s - w - h), c.max.y)
    } else {
        Point2::new(c.min.x, c.max.y - (s - 2.0 * w - h))
    }
}

fn contour_tangent_ccw(c: &Rectangle, s: f64) -> Point2 {
    let (w, h) = (c.width(), c.height());
    let s = s.rem_euclid(contour_perimeter(c));
    if s < w {
        Point2::new(1.0, 0.0)
    } else if s < w + h {
        Point2::new(0.0, 1.0)
    } else if s < 2.0 * w + h {
        Point2::new(-1.0, 0.0)
    } else {
        Point2::new(0.0, -1.0)
    }
}

/// Arc parameter of the contour point nearest to `p` (first edge wins ties).
fn contour_param_nearest(c: &Rectangle, p: Point2) -> f64 {
    let (w, h) = (c.width(), c.height());
    let corners = [
        Point2::new(c.min.x, c.min.y),
        Point2::new(c.max.x, c.min.y),
        Point2::new(c.max.x, c.max.y),
        Point2::new(c.min.x, c.max.y),
    ];
    let offsets = [0.0, w, w + h, 2.0 * w + h];
    let lengths = [w, h, w, h];
    let mut best = (f64::INFINITY, 0.0);
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        let ab = b - a;
        let len = lengths[e];
        let t = (((p - a).dot(ab)) / (len * len)).clamp(0.0, 1.0);
        let q = a + ab * t;
        let d = p.distance(q);
        if d < best.0 {
            best = (d, offsets[e] + t * len);
        }
    }
    best.1
}

/// Advances the arc parameter by up to `step`, stopping at the next corner so each
/// proposed chord stays on one contour edge.
fn advance_along_contour(c: &Rectangle, s_cur: f64, step: f64, ccw: bool) -> f64 {
    let (w, h) = (c.width(), c.height());
    let p = contour_perimeter(c);
    let eps = 1e-9 * (1.0 + p);
    let corners = [0.0, w, w + h, 2.0 * w + h];
    if ccw {
        let next_corner = corners
            .iter()
            .map(|&b| if b > s_cur + eps { b } else { b + p })
            .fold(f64::INFINITY, f64::min);
        (s_cur + step).min(next_corner).rem_euclid(p)
    } else {
        let prev_corner = corners
            .iter()
            .map(|&b| if b < s_cur - eps { b } else { b - p })
            .fold(f64::NEG_INFINITY, f64::max);
        (s_cur - step).max(prev_corner).rem_euclid(p)
    }
}

/// Sequential-priority collision filter. Robots are processed in index order; a
/// proposal is accepted only if it keeps at least `d_safe` from every already
/// resolved position and from every later robot's current position. Rejected robots
/// hold their current position for this tick.
pub fn resolve_collisions(
    proposals: &[Point2],
    current_positions: &[Point2],
    params: &MotionParams,
) -> Vec<bool> {
    let n = proposals.len();
    assert_eq!(n, current_positions.len());
    let mut resolved: Vec<Point2> = current_positions.to_vec();
    let mut accepted = vec![false; n];
    for i in 0..n {
        let ok = (0..n).all(|j| {
            if j == i {
                true
            } else if j < i {
                proposals[i].distance(resolved[j]) >= params.d_safe
            } else {
                proposals[i].distance(current_positions[j]) >= params.d_safe
            }
        });
        if ok {
            resolved[i] = proposals[i];
            accepted[i] = true;
        }
    }
    accepted
}

/// A target detection made during a phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoundEvent {
    pub target: usize,
    pub step: u64,
    pub robot: usize,
    pub position: Point2,
}

/// What one move-and-evaluate phase produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub ticks: u64,
    pub found: Vec<FoundEvent>,
    /// Distance each robot covered this phase.
    pub path_delta: Vec<f64>,
}

fn trace_mode(activity: ActivityStatus, mode: MotionMode) -> TraceMode {
    if activity == ActivityStatus::Handling {
        return TraceMode::Handling;
    }
    match mode {
        MotionMode::GoToGoal => TraceMode::Go,
        MotionMode::BoundaryFollow => TraceMode::Follow,
        MotionMode::Arrived => TraceMode::Arrived,
        MotionMode::Parked => TraceMode::Parked,
    }
}

/// Runs one evaluation phase: lockstep plan/resolve ticks, per-tick signal
/// evaluation and personal-best updates, and immediate target handling.
///
/// A robot whose reading comes from an active target closer than the detection
/// tolerance stops and handles it: the target is deactivated at once (so a
/// same-tick, higher-indexed robot cannot find it again) and the robot holds until
/// the phase ends. The phase stops when every robot is arrived, parked or handling,
/// or after `max_steps` ticks, or when the global budget runs out.
pub fn move_and_evaluate(
    robots: &mut [RobotState],
    goals: &[Point2],
    env: &EnvironmentSpec,
    targets: &mut [TargetState],
    params: &MotionParams,
    global_step: &mut u64,
    global_budget: u64,
    trace: &mut dyn TraceSink,
) -> PhaseOutcome {
    let n = robots.len();
    assert_eq!(n, goals.len());
    let mut states = vec![MotionState::fresh(); n];
    let mut found = Vec::new();
    let mut path_delta = vec![0.0; n];
    let mut ticks = 0u64;

    loop {
        if ticks >= params.max_steps || *global_step >= global_budget {
            break;
        }
        let all_stationary = (0..n)
            .all(|i| robots[i].activity == ActivityStatus::Handling || states[i].is_stationary());
        if all_stationary {
            break;
        }

        let current: Vec<Point2> = robots.iter().map(|r| r.position).collect();
        let mut proposals = Vec::with_capacity(n);
        let mut planned: Vec<MotionState> = Vec::with_capacity(n);
        for i in 0..n {
            if robots[i].activity == ActivityStatus::Handling || states[i].is_stationary() {
                proposals.push(current[i]);
                planned.push(states[i]);
            } else {
                let (p, st) = plan_step(current[i], &states[i], goals[i], env, params);
                proposals.push(p);
                planned.push(st);
            }
        }
        let accepted = resolve_collisions(&proposals, &current, params);

        *global_step += 1;
        ticks += 1;
        let step_now = *global_step;

        for i in 0..n {
            let mut event = TraceEvent::None;
            if accepted[i] {
                let was_stationary = states[i].is_stationary();
                let moved = current[i].distance(proposals[i]);
                if proposals[i] != current[i] {
                    path_delta[i] += moved;
                }
                robots[i].position = proposals[i];
                states[i] = planned[i];
                if states[i].mode == MotionMode::BoundaryFollow {
                    states[i].follow_travel += moved;
                }
                if states[i].is_stationary() && robots[i].activity == ActivityStatus::Searching {
                    robots[i].activity = ActivityStatus::Idle;
                    if !was_stationary && states[i].mode == MotionMode::Arrived {
                        event = TraceEvent::Arrived;
                    }
                }
            } else {
                // Wait rule: hold this tick, replan next tick.
                event = TraceEvent::Waiting;
            }

            let reading = field_value(robots[i].position, targets, env.attenuation_a);
            if robots[i].activity == ActivityStatus::Handling {
                event = TraceEvent::Handling;
            } else {
                robots[i].pbest = update_pbest(&robots[i].pbest, robots[i].position, &reading);
                if let Some(target) = reading.nearest_active_target {
                    if reading.nearest_distance < env.detect_epsilon {
                        targets[target].deactivate();
                        robots[i].activity = ActivityStatus::Handling;
                        found.push(FoundEvent {
                            target,
                            step: step_now,
                            robot: i,
                            position: robots[i].position,
                        });
                        event = TraceEvent::Found(target);
                    }
                }
            }

            trace.record(&StepRecord {
                step: step_now,
                robot: i,
                x: robots[i].position.x,
                y: robots[i].position.y,
                fitness: reading.value,
                mode: trace_mode(robots[i].activity, states[i].mode),
                event,
            });
        }

        // Park robots that can never reach a goal guarded by a robot that will not
        // move again this phase; they are at their closest feasible approach.
        for i in 0..n {
            if accepted[i]
                || robots[i].activity == ActivityStatus::Handling
                || states[i].is_stationary()
            {
                continue;
            }
            let near_goal =
                robots[i].position.distance(goals[i]) <= params.d_safe + params.step_length;
            if !near_goal {
                continue;
            }
            let guarded = (0..n).any(|j| {
                j != i
                    && (robots[j].activity == ActivityStatus::Handling || states[j].is_stationary())
                    && robots[j].position.distance(goals[i]) < params.d_safe
            });
            if guarded {
                states[i].mode = MotionMode::Parked;
                robots[i].activity = ActivityStatus::Idle;
            }
        }
    }

    PhaseOutcome { ticks, found, path_delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::TargetSpec;
    use crate::trace::NullSink;

    fn open_env(n: usize) -> EnvironmentSpec {
        EnvironmentSpec {
            width: 1000.0,
            height: 1000.0,
            obstacles: vec![],
            targets: vec![],
            attenuation_a: 10.0,
            detect_epsilon: 5.0,
            population_n: n,
        }
    }

    fn params() -> MotionParams {
        MotionParams { step_length: 2.0, d_safe: 3.0, max_steps: 500, sample_dt: 0.1 }
    }

    #[test]
    fn straight_step_toward_goal() {
        let env = open_env(1);
        let (p, st) = plan_step(
            Point2::new(0.0, 0.0),
            &MotionState::fresh(),
            Point2::new(10.0, 0.0),
            &env,
            &params(),
        );
        assert_eq!(p, Point2::new(2.0, 0.0));
        assert_eq!(st.mode, MotionMode::GoToGoal);
    }

    #[test]
    fn arrives_when_goal_within_step() {
        let env = open_env(1);
        let (p, st) = plan_step(
            Point2::new(9.0, 0.0),
            &MotionState::fresh(),
            Point2::new(10.0, 0.0),
            &env,
            &params(),
        );
        assert_eq!(p, Point2::new(10.0, 0.0));
        assert_eq!(st.mode, MotionMode::Arrived);
    }

    #[test]
    fn blocked_step_switches_to_follow() {
        let mut env = open_env(1);
        env.obstacles =
            vec![Rectangle::new(Point2::new(5.0, -10.0), Point2::new(8.0, 10.0))];
        let (p, st) = plan_step(
            Point2::new(4.0, 0.0),
            &MotionState::fresh(),
            Point2::new(20.0, 0.0),
            &env,
            &params(),
        );
        assert_eq!(st.mode, MotionMode::BoundaryFollow);
        assert_eq!(st.followed_obstacle, Some(0));
        assert_eq!(st.hit_point, Some(Point2::new(4.0, 0.0)));
        assert!(!env.inside_any_obstacle_interior(p));
    }

    #[test]
    fn resolver_accepts_distant_proposals() {
        let cur = [Point2::new(0.0, 0.0), Point2::new(100.0, 0.0)];
        let prop = [Point2::new(2.0, 0.0), Point2::new(98.0, 0.0)];
        assert_eq!(resolve_collisions(&prop, &cur, &params()), vec![true, true]);
    }

    #[test]
    fn resolver_gives_priority_to_lower_index() {
        let cur = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)];
        let prop = [Point2::new(5.0, 0.0), Point2::new(5.0, 0.0)];
        let accepted = resolve_collisions(&prop, &cur, &params());
        assert_eq!(accepted, vec![true, false]);
    }

    #[test]
    fn detection_is_immediate_and_handler_holds() {
        let mut env = open_env(1);
        env.targets = vec![TargetSpec { location: Point2::new(20.0, 0.0) }];
        let mut targets = env.make_targets();
        let mut robots = vec![RobotState::new(Point2::new(0.0, 0.0), 0.0)];
        let goals = [Point2::new(40.0, 0.0)];
        let mut step = 0u64;
        let out = move_and_evaluate(
            &mut robots,
            &goals,
            &env,
            &mut targets,
            &params(),
            &mut step,
            10_000,
            &mut NullSink,
        );
        assert_eq!(out.found.len(), 1);
        assert_eq!(out.found[0].target, 0);
        assert!(!targets[0].active());
        assert_eq!(robots[0].activity, ActivityStatus::Handling);
        // First position with distance < 5 along the path x = 2,4,...: x = 16.
        assert_eq!(out.found[0].step, 8);
        assert_eq!(robots[0].position, Point2::new(16.0, 0.0));
        // Handler stayed until phase end (phase ends when it is the only robot
        // and it is handling).
        assert_eq!(out.ticks, 8);
    }

    #[test]
    fn simultaneous_same_target_lower_index_wins() {
        let mut env = open_env(2);
        env.targets = vec![TargetSpec { location: Point2::new(0.0, 0.0) }];
        let mut targets = env.make_targets();
        // Both robots one step outside the detection ball, converging head-on but
        // far enough apart to move without violating separation.
        let mut robots = vec![
            RobotState::new(Point2::new(-6.5, 0.0), 0.0),
            RobotState::new(Point2::new(6.5, 0.0), 0.0),
        ];
        let goals = [Point2::new(-0.5, 0.0), Point2::new(0.5, 0.0)];
        let mut step = 0u64;
        let out = move_and_evaluate(
            &mut robots,
            &goals,
            &env,
            &mut targets,
            &params(),
            &mut step,
            10_000,
            &mut NullSink,
        );
        assert_eq!(out.found.len(), 1);
        assert_eq!(out.found[0].robot, 0);
        assert_eq!(robots[0].activity, ActivityStatus::Handling);
        assert_ne!(robots[1].activity, ActivityStatus::Handling);
    }

    #[test]
    fn all_arrive_without_targets() {
        let env = open_env(3);
        let mut targets = Vec::new();
        let mut robots = vec![
            RobotState::new(Point2::new(10.0, 10.0), 0.0),
            RobotState::new(Point2::new(100.0, 10.0), 0.0),
            RobotState::new(Point2::new(10.0, 100.0), 0.0),
        ];
        let goals = [Point2::new(50.0, 50.0), Point2::new(150.0, 60.0), Point2::new(60.0, 150.0)];
        let start = robots.clone();
        let mut step = 0u64;
        let out = move_and_evaluate(
            &mut robots,
            &goals,
            &env,
            &mut targets,
            &params(),
            &mut step,
            10_000,
            &mut NullSink,
        );
        assert!(out.ticks <= params().max_steps);
        for (i, r) in robots.iter().enumerate() {
            assert_eq!(r.position, goals[i]);
            // Path covered at least the straight-line distance.
            assert!(out.path_delta[i] >= start[i].position.distance(goals[i]) - 1e-9);
        }
    }

    #[test]
    fn goal_inside_obstacle_parks_at_phase_cap() {
        let mut env = open_env(1);
        env.obstacles =
            vec![Rectangle::new(Point2::new(40.0, 40.0), Point2::new(60.0, 60.0))];
        let mut targets = Vec::new();
        let mut robots = vec![RobotState::new(Point2::new(10.0, 50.0), 0.0)];
        let goals = [Point2::new(50.0, 50.0)];
        let mut step = 0u64;
        let p = MotionParams { max_steps: 300, ..params() };
        let out = move_and_evaluate(
            &mut robots,
            &goals,
            &env,
            &mut targets,
            &p,
            &mut step,
            10_000,
            &mut NullSink,
        );
        // Unreachable goal: the robot circles the obstacle, never arrives, and is
        // parked (full lap completed) no later than the phase cap.
        assert!(out.ticks <= 300);
        assert_ne!(robots[0].position, goals[0]);
        assert!(!env.inside_any_obstacle_interior(robots[0].position));
        // It actually went around: covered at least one contour perimeter after
        // reaching the obstacle.
        let contour_perimeter = 2.0 * (23.0 + 23.0);
        assert!(out.path_delta[0] > contour_perimeter);
    }

    #[test]
    fn open_field_arrival_within_step_bound() {
        let env = open_env(1);
        let mut targets = Vec::new();
        let p = params();
        for k in 0..50 {
            let start = Point2::new(10.0 + (k * 7 % 40) as f64, 10.0 + (k * 13 % 50) as f64);
            let goal = Point2::new(500.0 + (k * 11 % 90) as f64, 400.0 + (k * 3 % 70) as f64);
            let mut robots = vec![RobotState::new(start, 0.0)];
            let mut step = 0u64;
            let out = move_and_evaluate(
                &mut robots,
                &[goal],
                &env,
                &mut targets,
                &p,
                &mut step,
                100_000,
                &mut NullSink,
            );
            let bound = (start.distance(goal) / p.step_length).ceil() as u64;
            assert!(out.ticks <= bound, "took {} > {} ticks", out.ticks, bound);
            assert_eq!(robots[0].position, goal);
        }
    }
}
