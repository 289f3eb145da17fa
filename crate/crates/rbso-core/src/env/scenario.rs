//! Scenario documents: the TOML schema describing a world plus run parameters.
//!
//! Field names are part of the on-disk contract: arena{width,height},
//! obstacles[{min,max}], targets or targets_random{count,seed},
//! robots_random{count,seed}, signal{a,epsilon}, bso{p_one,p_center},
//! rbso{m_g,T_g,m_d,m_s,step_length,d_safe}, seed.

use crate::engine::SimParams;
use crate::env::{EnvironmentSpec, TargetSpec};
use crate::generation::GenerationParams;
use crate::geometry::{Point2, Rectangle};
use crate::grouping::GroupingParams;
use crate::motion::MotionParams;
use crate::seeding::{substream, Stream};
use rand::Rng;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario validation error at `{path}`: {message}")]
    Validation { path: String, message: String },
}

fn invalid<T>(path: &str, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Validation { path: path.to_string(), message: message.into() })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub seed: u64,
    pub arena: ArenaDoc,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    #[serde(default)]
    pub targets: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub targets_random: Option<RandomPlacementDoc>,
    pub robots_random: RandomPlacementDoc,
    pub signal: SignalDoc,
    pub bso: BsoDoc,
    pub rbso: RbsoDoc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaDoc {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPlacementDoc {
    pub count: usize,
    /// Fixed placement seed; when absent the placement derives from the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalDoc {
    pub a: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsoDoc {
    pub p_one: f64,
    pub p_center: f64,
    #[serde(default = "default_noise_base")]
    pub noise_base: f64,
}

fn default_noise_base() -> f64 {
    50.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbsoDoc {
    pub m_g: usize,
    #[serde(rename = "T_g")]
    pub t_g: u64,
    pub m_d: f64,
    pub m_s: u64,
    pub step_length: f64,
    pub d_safe: f64,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
}

fn default_sample_dt() -> f64 {
    0.1
}

/// Parses and fully validates a scenario document, materializing randomly placed
/// targets. Random placements without an explicit sub-seed derive from the top-level
/// run seed, so sweeping the seed also re-rolls the layout.
pub fn load_scenario(source: &str) -> Result<(EnvironmentSpec, SimParams), ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(source)?;
    realize(&doc)
}

fn realize(doc: &ScenarioDoc) -> Result<(EnvironmentSpec, SimParams), ScenarioError> {
    if !(0.0..=1.0).contains(&doc.bso.p_one) {
        return invalid("bso.p_one", format!("probability must be in [0,1], got {}", doc.bso.p_one));
    }
    if !(0.0..=1.0).contains(&doc.bso.p_center) {
        return invalid(
            "bso.p_center",
            format!("probability must be in [0,1], got {}", doc.bso.p_center),
        );
    }
    if !(doc.bso.noise_base > 0.0) {
        return invalid("bso.noise_base", format!("must be > 0, got {}", doc.bso.noise_base));
    }
    if doc.rbso.m_g < 2 {
        return invalid("rbso.m_g", format!("at least two groups are required, got {}", doc.rbso.m_g));
    }
    if !(doc.rbso.m_d > 0.0) {
        return invalid("rbso.m_d", format!("must be > 0, got {}", doc.rbso.m_d));
    }
    if doc.rbso.m_s < 1 {
        return invalid("rbso.m_s", "must be >= 1".to_string());
    }
    if doc.rbso.t_g < 1 {
        return invalid("rbso.T_g", "must be >= 1".to_string());
    }
    if !(doc.rbso.step_length > 0.0) {
        return invalid("rbso.step_length", format!("must be > 0, got {}", doc.rbso.step_length));
    }
    if !(doc.rbso.d_safe > 0.0) {
        return invalid("rbso.d_safe", format!("must be > 0, got {}", doc.rbso.d_safe));
    }
    if !(doc.rbso.sample_dt > 0.0) {
        return invalid("rbso.sample_dt", format!("must be > 0, got {}", doc.rbso.sample_dt));
    }

    let obstacles: Vec<Rectangle> = doc
        .obstacles
        .iter()
        .map(|o| Rectangle::new(Point2::new(o.min[0], o.min[1]), Point2::new(o.max[0], o.max[1])))
        .collect();

    let targets = match (&doc.targets, &doc.targets_random) {
        (Some(_), Some(_)) => {
            return invalid("targets", "give either `targets` or `targets_random`, not both")
        }
        (None, None) => {
            return invalid("targets", "one of `targets` or `targets_random` is required")
        }
        (Some(list), None) => {
            list.iter().map(|&[x, y]| TargetSpec { location: Point2::new(x, y) }).collect()
        }
        (None, Some(random)) => place_random_targets(doc, random, &obstacles)?,
    };

    let env = EnvironmentSpec {
        width: doc.arena.width,
        height: doc.arena.height,
        obstacles,
        targets,
        attenuation_a: doc.signal.a,
        detect_epsilon: doc.signal.epsilon,
        population_n: doc.robots_random.count,
    };
    env.validate()?;

    let params = SimParams {
        grouping: GroupingParams {
            max_groups: doc.rbso.m_g,
            // The split loop can never need more than one split per robot; the
            // global budget T_g is owned by the engine.
            max_iterations: doc.robots_random.count,
            mean_distance_threshold: doc.rbso.m_d,
        },
        generation: GenerationParams {
            p_one: doc.bso.p_one,
            p_center: doc.bso.p_center,
            noise_base: doc.bso.noise_base,
            global_budget: doc.rbso.t_g,
        },
        motion: MotionParams {
            step_length: doc.rbso.step_length,
            d_safe: doc.rbso.d_safe,
            max_steps: doc.rbso.m_s,
            sample_dt: doc.rbso.sample_dt,
        },
        global_budget: doc.rbso.t_g,
        seed: doc.seed,
        robot_placement_seed: doc.robots_random.seed,
    };
    Ok((env, params))
}

fn place_random_targets(
    doc: &ScenarioDoc,
    random: &RandomPlacementDoc,
    obstacles: &[Rectangle],
) -> Result<Vec<TargetSpec>, ScenarioError> {
    let mut rng = substream(random.seed.unwrap_or(doc.seed), Stream::Targets);
    let mut targets = Vec::with_capacity(random.count);
    let mut attempts = 0usize;
    let budget = 10_000 * random.count.max(1);
    while targets.len() < random.count {
        attempts += 1;
        if attempts > budget {
            return invalid(
                "targets_random",
                format!("could not place {} targets outside the obstacles", random.count),
            );
        }
        let p = Point2::new(
            rng.random::<f64>() * doc.arena.width,
            rng.random::<f64>() * doc.arena.height,
        );
        if obstacles.iter().any(|o| o.contains_interior(p)) {
            continue;
        }
        targets.push(TargetSpec { location: p });
    }
    Ok(targets)
}
