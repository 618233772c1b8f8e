//! Episodic simulator: kinematic bicycle, lidar, obstacles and lap bookkeeping.

mod episode;
mod lidar;
mod obstacles;
mod vehicle;

pub use episode::{
    run_episode, run_episode_with, Episode, EpisodeEnd, EpisodeOutcome, LogRow, Transition,
};
pub use lidar::{beam_offset, cast_ray, scan_lidar, LidarConfig};
pub use obstacles::{
    check_collision, spawn_obstacles, spawn_placed, Obstacle, PlacedObstacle, SpawnRules,
};
pub use vehicle::{step_dynamics, ActionCommand, VehicleParams, VehicleState};

use crate::config::{parse_entries, ConfigError, Entry};
use crate::planners::PlannerError;
use crate::track::Reference;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("obstacle spawn failed: placed {placed} of {wanted} after {attempts} attempts")]
    Spawn {
        placed: usize,
        wanted: usize,
        attempts: usize,
    },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Parse(#[from] ConfigError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub vehicle: VehicleParams,
    pub lidar: LidarConfig,
    /// Physics step, seconds.
    pub dt: f64,
    /// Physics steps per planner decision.
    pub planner_period: usize,
    pub footprint_radius: f64,
    /// Episode time limit, seconds.
    pub timeout: f64,
    /// Pure pursuit lookahead for the path follower, meters.
    pub lookahead: f64,
    /// Line the path follower tracks.
    pub follow: Reference,
    pub obstacles: bool,
    pub spawn: SpawnRules,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            lidar: LidarConfig::default(),
            dt: 0.01,
            planner_period: 10,
            footprint_radius: 0.15,
            timeout: 60.0,
            lookahead: 2.0,
            follow: Reference::MinCurvature,
            obstacles: false,
            spawn: SpawnRules::default(),
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut cfg = Self::default();
        for e in parse_entries(text)? {
            if !cfg.apply(&e)? {
                return Err(e.unknown().into());
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one entry; returns false when the key is not an environment key.
    pub fn apply(&mut self, e: &Entry) -> Result<bool, SimError> {
        let v = &mut self.vehicle;
        match e.key.as_str() {
            "wheelbase" => v.wheelbase = e.parse()?,
            "max_steer" => v.max_steer = e.parse()?,
            "max_speed" => v.max_speed = e.parse()?,
            "max_steer_rate" => v.max_steer_rate = e.parse()?,
            "max_accel" => v.max_accel = e.parse()?,
            "k_v" => v.k_v = e.parse()?,
            "k_delta" => v.k_delta = e.parse()?,
            "n_beams" => self.lidar.n_beams = e.parse()?,
            "fov" => self.lidar.fov = e.parse()?,
            "max_range" => self.lidar.max_range = e.parse()?,
            "dt" => self.dt = e.parse()?,
            "planner_period" => self.planner_period = e.parse()?,
            "footprint_radius" => self.footprint_radius = e.parse()?,
            "timeout" => self.timeout = e.parse()?,
            "lookahead" => self.lookahead = e.parse()?,
            "follow" => {
                self.follow = match e.value.as_str() {
                    "center" => Reference::CenterLine,
                    "mincurve" => Reference::MinCurvature,
                    other => return Err(e.error(format!("follow: unknown line `{other}`")).into()),
                }
            }
            "obstacles" => self.obstacles = e.parse_bool()?,
            "obstacle_side" => self.spawn.side = e.parse()?,
            "obstacle_min_count" => self.spawn.min_count = e.parse()?,
            "obstacle_max_count" => self.spawn.max_count = e.parse()?,
            "obstacle_separation" => self.spawn.min_separation = e.parse()?,
            "obstacle_start_clearance" => self.spawn.start_clearance = e.parse()?,
            "obstacle_min_gap" => self.spawn.min_gap = e.parse()?,
            "obstacle_attempts" => self.spawn.max_attempts = e.parse()?,
            "seed" => self.seed = e.parse()?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.vehicle.validate()?;
        let positive = [
            ("dt", self.dt),
            ("footprint_radius", self.footprint_radius),
            ("timeout", self.timeout),
            ("lookahead", self.lookahead),
            ("max_range", self.lidar.max_range),
            ("fov", self.lidar.fov),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SimError::Config(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.lidar.n_beams < 2 {
            return Err(SimError::Config("n_beams must be at least 2".into()));
        }
        if self.planner_period == 0 {
            return Err(SimError::Config("planner_period must be at least 1".into()));
        }
        Ok(())
    }

    /// Time between planner decisions, seconds.
    pub fn planner_dt(&self) -> f64 {
        self.dt * self.planner_period as f64
    }

    pub fn max_physics_steps(&self) -> u64 {
        (self.timeout / self.dt).round() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides() {
        let cfg =
            EnvConfig::parse("max_speed = 5\nobstacles = true\nfollow = center\nseed=9").unwrap();
        assert_eq!(cfg.vehicle.max_speed, 5.0);
        assert!(cfg.obstacles);
        assert_eq!(cfg.follow, Reference::CenterLine);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.max_physics_steps(), 6000);
    }

    #[test]
    fn parse_rejects_unknown_and_invalid() {
        assert!(EnvConfig::parse("warp = 9").is_err());
        assert!(EnvConfig::parse("max_steer = 2").is_err());
        assert!(EnvConfig::parse("n_beams = 1").is_err());
    }
}
