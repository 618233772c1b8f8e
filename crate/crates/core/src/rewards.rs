//! Terminal reward framework with the racing reward variants.

use crate::config::{ConfigError, Entry};
use crate::track::{wrap_progress, LineRelation, Reference};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RewardVariant {
    None,
    Distance,
    Cth,
    MinSteer,
}

impl RewardVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RewardVariant::None => "none",
            RewardVariant::Distance => "distance",
            RewardVariant::Cth => "cth",
            RewardVariant::MinSteer => "steer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => RewardVariant::None,
            "distance" => RewardVariant::Distance,
            "cth" => RewardVariant::Cth,
            "steer" => RewardVariant::MinSteer,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig {
    pub variant: RewardVariant,
    pub beta_distance: f64,
    pub beta_heading: f64,
    pub beta_cross_track: f64,
    pub beta_steering: f64,
    pub reference: Reference,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            variant: RewardVariant::None,
            beta_distance: 0.5,
            beta_heading: 0.04,
            beta_cross_track: 0.004,
            beta_steering: 0.01,
            reference: Reference::CenterLine,
        }
    }
}

impl RewardConfig {
    pub fn with_variant(variant: RewardVariant) -> Self {
        Self {
            variant,
            ..Default::default()
        }
    }

    /// Applies one config entry; returns false for keys it does not know.
    pub fn apply(&mut self, e: &Entry) -> Result<bool, ConfigError> {
        match e.key.as_str() {
            "reward" => {
                self.variant = RewardVariant::parse(&e.value)
                    .ok_or_else(|| e.error(format!("reward: unknown variant `{}`", e.value)))?
            }
            "reference" => {
                self.reference = match e.value.as_str() {
                    "center" => Reference::CenterLine,
                    "mincurve" => Reference::MinCurvature,
                    other => return Err(e.error(format!("reference: unknown line `{other}`"))),
                }
            }
            "beta_distance" => self.beta_distance = non_negative(e)?,
            "beta_heading" => self.beta_heading = non_negative(e)?,
            "beta_cross_track" => self.beta_cross_track = non_negative(e)?,
            "beta_steering" => self.beta_steering = non_negative(e)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

fn non_negative(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = e.parse()?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(e.error(format!("{} must be non-negative, got {v}", e.key)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terminal {
    Crash,
    LapComplete,
}

/// Everything the rewards need about one planner step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepContext {
    pub prev: LineRelation,
    pub next: LineRelation,
    /// Actual speed after the step, m/s.
    pub speed: f64,
    /// Steering command issued for the step, radians.
    pub delta_ref: f64,
    pub terminal: Option<Terminal>,
    /// Closed length of the reference line, meters.
    pub s_total: f64,
    /// Full track width at the nearest centerline point, meters.
    pub track_width: f64,
    pub max_speed: f64,
    pub max_steer: f64,
}

pub fn terminal_reward(terminal: Terminal) -> f64 {
    match terminal {
        Terminal::Crash => -1.0,
        Terminal::LapComplete => 1.0,
    }
}

pub fn distance_reward(ctx: &StepContext, cfg: &RewardConfig) -> f64 {
    cfg.beta_distance * wrap_progress(ctx.next.s - ctx.prev.s, ctx.s_total) / ctx.s_total
}

pub fn cth_reward(ctx: &StepContext, cfg: &RewardConfig) -> f64 {
    cfg.beta_heading * (ctx.speed / ctx.max_speed) * ctx.next.theta.cos()
        - cfg.beta_cross_track * (ctx.next.d_c / ctx.track_width)
}

pub fn steering_reward(ctx: &StepContext, cfg: &RewardConfig) -> f64 {
    -cfg.beta_steering * ctx.delta_ref.abs() / ctx.max_steer
}

pub fn compute_reward(ctx: &StepContext, cfg: &RewardConfig) -> f64 {
    if let Some(t) = ctx.terminal {
        return terminal_reward(t);
    }
    match cfg.variant {
        RewardVariant::None => 0.0,
        RewardVariant::Distance => distance_reward(ctx, cfg),
        RewardVariant::Cth => cth_reward(ctx, cfg),
        RewardVariant::MinSteer => steering_reward(ctx, cfg),
    }
}

/// Magnitude bound on non-terminal rewards for a planner period of
/// `period` seconds.
pub fn racing_reward_bound(cfg: &RewardConfig, period: f64, max_speed: f64, s_total: f64) -> f64 {
    (cfg.beta_distance * period * max_speed / s_total)
        .max(cfg.beta_heading + cfg.beta_cross_track)
        .max(cfg.beta_steering)
}
