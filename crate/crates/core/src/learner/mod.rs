//! TD3 from scratch: MLPs with hand-written backprop, Adam, replay and the
//! training loop that drives the modification planner.

mod adam;
mod mlp;
mod replay;
mod td3;

pub use adam::Adam;
pub use mlp::{Mlp, OutputActivation, Tape};
pub use replay::ReplayBuffer;
pub use td3::{Td3, Td3Config, UpdateReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fmt::format_sig;
use crate::planners::{modification_plan, PlanInput, PlanOutput, Planner, PolicyAction};
use crate::rewards::RewardConfig;
use crate::sim::{run_episode, EnvConfig, EpisodeEnd, SimError, Transition};
use crate::track::Track;

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("invalid learner config: {0}")]
    Config(String),
    #[error("bad snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One training episode.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub episode: usize,
    /// Environment steps after the episode.
    pub steps: usize,
    pub cumulative_reward: f64,
    pub lap_time: f64,
    pub outcome: EpisodeEnd,
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("episode,steps,cumulative_reward,lap_time,outcome\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.episode,
            r.steps,
            format_sig(r.cumulative_reward, 10),
            format_sig(r.lap_time, 10),
            r.outcome.as_str()
        ));
    }
    out
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub actor: Mlp,
    pub curve: Vec<CurveRow>,
    pub env_steps: usize,
    pub gradient_steps: u64,
    /// Updates skipped for lack of stored transitions.
    pub skipped_updates: u64,
}

/// Modification planner whose policy is the learning actor.
struct LearningPlanner {
    agent: Td3,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    env_steps: usize,
    skipped: u64,
    error: Option<LearnerError>,
}

impl Planner for LearningPlanner {
    fn plan(&mut self, input: &PlanInput) -> PlanOutput {
        let action = if self.env_steps < self.agent.cfg.warmup {
            PolicyAction::new(self.rng.random_range(-1.0..=1.0))
        } else {
            self.agent.explore(input.observation, &mut self.rng)
        };
        PlanOutput {
            command: modification_plan(&input.pf, action, input.params),
            action,
        }
    }

    fn observe(&mut self, transition: &Transition) {
        self.buffer.push(*transition);
        self.env_steps += 1;
        if self.error.is_some() || self.env_steps <= self.agent.cfg.warmup {
            return;
        }
        match self.agent.update(&self.buffer) {
            Ok(UpdateReport::Skipped { .. }) => self.skipped += 1,
            Ok(UpdateReport::Updated { .. }) => {}
            Err(e) => self.error = Some(e),
        }
    }
}

/// Trains a steering-correction actor on `track`.
///
/// Episodes run until `td3.total_steps` planner steps have been taken; the
/// last episode finishes even if it crosses the budget.
pub fn train(
    track: &Track,
    env: &EnvConfig,
    reward: &RewardConfig,
    td3: &Td3Config,
    seed: u64,
) -> Result<TrainReport, LearnerError> {
    env.validate()?;
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let agent = Td3::new(td3.clone(), seeds.random())?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(seeds.random());
    let mut planner = LearningPlanner {
        agent,
        buffer: ReplayBuffer::new(td3.buffer_capacity),
        rng: ChaCha8Rng::seed_from_u64(seeds.random()),
        env_steps: 0,
        skipped: 0,
        error: None,
    };
    let mut curve = Vec::new();
    while planner.env_steps < td3.total_steps {
        let ep = run_episode(track, env, &mut planner, reward, &mut env_rng)?;
        if let Some(e) = planner.error.take() {
            return Err(e);
        }
        curve.push(CurveRow {
            episode: curve.len(),
            steps: planner.env_steps,
            cumulative_reward: ep.total_reward(),
            lap_time: ep.outcome.lap_time,
            outcome: ep.outcome.terminal,
        });
    }
    Ok(TrainReport {
        gradient_steps: planner.agent.updates(),
        actor: planner.agent.actor,
        curve,
        env_steps: planner.env_steps,
        skipped_updates: planner.skipped,
    })
}
