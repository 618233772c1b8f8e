use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Adam, LearnerError, Mlp, OutputActivation, ReplayBuffer};
use crate::config::{ConfigError, Entry};
use crate::planners::{Observation, Policy, PolicyAction, OBS_DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub policy_delay: usize,
    pub exploration_noise: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch: usize,
    /// Environment steps of training.
    pub total_steps: usize,
    /// Uniform-random action steps before learning starts.
    pub warmup: usize,
    pub buffer_capacity: usize,
    pub hidden: Vec<usize>,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            policy_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            exploration_noise: 0.1,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            batch: 100,
            total_steps: 100_000,
            warmup: 1000,
            buffer_capacity: 1_000_000,
            hidden: vec![200, 200],
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: String| Err(LearnerError::Config(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.policy_delay == 0 || self.batch == 0 || self.buffer_capacity == 0 {
            return bad("policy_delay, batch and buffer_capacity must be at least 1".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!("invalid hidden sizes {:?}", self.hidden));
        }
        for (name, v) in [
            ("policy_noise", self.policy_noise),
            ("noise_clip", self.noise_clip),
            ("exploration_noise", self.exploration_noise),
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }

    /// Applies one config entry; returns false for keys it does not know.
    pub fn apply(&mut self, e: &Entry) -> Result<bool, ConfigError> {
        match e.key.as_str() {
            "gamma" => self.gamma = e.parse()?,
            "tau" => self.tau = e.parse()?,
            "policy_noise" => self.policy_noise = e.parse()?,
            "noise_clip" => self.noise_clip = e.parse()?,
            "policy_delay" => self.policy_delay = e.parse()?,
            "exploration_noise" => self.exploration_noise = e.parse()?,
            "actor_lr" => self.actor_lr = e.parse()?,
            "critic_lr" => self.critic_lr = e.parse()?,
            "lr" => {
                self.actor_lr = e.parse()?;
                self.critic_lr = self.actor_lr;
            }
            "batch" => self.batch = e.parse()?,
            "total_steps" => self.total_steps = e.parse()?,
            "warmup" => self.warmup = e.parse()?,
            "buffer_capacity" => self.buffer_capacity = e.parse()?,
            "hidden" => {
                self.hidden = e
                    .list()
                    .iter()
                    .map(|s| {
                        s.parse()
                            .map_err(|_| e.error(format!("hidden: bad size `{s}`")))
                    })
                    .collect::<Result<_, _>>()?
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// What one call to [`Td3::update`] did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateReport {
    /// Fewer transitions stored than one batch.
    Skipped { stored: usize, batch: usize },
    Updated {
        critic_loss: f64,
        actor_loss: Option<f64>,
    },
}

/// Actor, twin critics and their target copies with optimizers.
#[derive(Clone, Debug)]
pub struct Td3 {
    pub cfg: Td3Config,
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critics: [Mlp; 2],
    pub critic_targets: [Mlp; 2],
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    updates: u64,
    rng: ChaCha8Rng,
}

const CRITIC_IN: usize = OBS_DIM + 1;

impl Td3 {
    pub fn new(cfg: Td3Config, seed: u64) -> Result<Self, LearnerError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = |input: usize| {
            let mut s = vec![input];
            s.extend(&cfg.hidden);
            s.push(1);
            s
        };
        let actor = Mlp::new(&sizes(OBS_DIM), OutputActivation::Tanh, &mut rng)?;
        let c1 = Mlp::new(&sizes(CRITIC_IN), OutputActivation::Identity, &mut rng)?;
        let c2 = Mlp::new(&sizes(CRITIC_IN), OutputActivation::Identity, &mut rng)?;
        Ok(Self {
            actor_opt: Adam::new(actor.param_count(), cfg.actor_lr),
            critic_opts: [
                Adam::new(c1.param_count(), cfg.critic_lr),
                Adam::new(c2.param_count(), cfg.critic_lr),
            ],
            actor_target: actor.clone(),
            critic_targets: [c1.clone(), c2.clone()],
            actor,
            critics: [c1, c2],
            updates: 0,
            rng,
            cfg,
        })
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn act(&self, obs: &Observation) -> PolicyAction {
        let a = self
            .actor
            .forward(obs.as_slice())
            .expect("actor input is an observation")[0];
        debug_assert!(a.abs() <= 1.0);
        PolicyAction::new(a)
    }

    /// One TD3 step on a minibatch drawn from `buffer`.
    pub fn update(&mut self, buffer: &ReplayBuffer) -> Result<UpdateReport, LearnerError> {
        let b = self.cfg.batch;
        if buffer.len() < b {
            return Ok(UpdateReport::Skipped {
                stored: buffer.len(),
                batch: b,
            });
        }
        let idx = buffer.sample_indices(&mut self.rng, b);
        let batch: Vec<_> = idx.iter().map(|&i| buffer.get(i)).collect();
        let obs: Vec<f64> = batch.iter().flat_map(|t| t.obs.0).collect();
        let next_obs: Vec<f64> = batch.iter().flat_map(|t| t.next_obs.0).collect();

        // smoothed target actions
        let noise = Normal::new(0.0, self.cfg.policy_noise.max(f64::MIN_POSITIVE))
            .expect("finite noise scale");
        let mut next_act = self.actor_target.forward(&next_obs)?;
        for a in &mut next_act {
            let eps = if self.cfg.policy_noise > 0.0 {
                noise.sample(&mut self.rng)
            } else {
                0.0
            };
            *a = (*a + eps.clamp(-self.cfg.noise_clip, self.cfg.noise_clip)).clamp(-1.0, 1.0);
        }
        let next_in = concat_action(&next_obs, &next_act);
        let q1 = self.critic_targets[0].forward(&next_in)?;
        let q2 = self.critic_targets[1].forward(&next_in)?;
        let y: Vec<f64> = (0..b)
            .map(|i| {
                let t = batch[i];
                let bootstrap = if t.done {
                    0.0
                } else {
                    self.cfg.gamma * q1[i].min(q2[i])
                };
                t.reward + bootstrap
            })
            .collect();

        let acts: Vec<f64> = batch.iter().map(|t| t.action.0).collect();
        let critic_in = concat_action(&obs, &acts);
        let mut critic_loss = 0.0;
        for c in 0..2 {
            let tape = self.critics[c].forward_tape(&critic_in)?;
            let q = tape.output();
            let mut grad = vec![0.0; b];
            for i in 0..b {
                let err = q[i] - y[i];
                critic_loss += err * err / b as f64;
                grad[i] = 2.0 * err / b as f64;
            }
            let (g, _) = self.critics[c].backward(&tape, &grad)?;
            self.critic_opts[c].step(self.critics[c].params_mut(), &g);
        }
        self.updates += 1;

        let mut actor_loss = None;
        if self.updates % self.cfg.policy_delay as u64 == 0 {
            let a_tape = self.actor.forward_tape(&obs)?;
            let pi = a_tape.output().to_vec();
            let q_in = concat_action(&obs, &pi);
            let q_tape = self.critics[0].forward_tape(&q_in)?;
            actor_loss = Some(-q_tape.output().iter().sum::<f64>() / b as f64);
            let (_, dq_din) = self.critics[0].backward(&q_tape, &vec![-1.0 / b as f64; b])?;
            let da: Vec<f64> = dq_din.chunks_exact(CRITIC_IN).map(|r| r[OBS_DIM]).collect();
            let (g, _) = self.actor.backward(&a_tape, &da)?;
            self.actor_opt.step(self.actor.params_mut(), &g);

            let tau = self.cfg.tau;
            self.actor.soft_update_into(&mut self.actor_target, tau);
            for c in 0..2 {
                self.critics[c].soft_update_into(&mut self.critic_targets[c], tau);
            }
        }

        for (name, net) in [
            ("actor", &self.actor),
            ("critic 1", &self.critics[0]),
            ("critic 2", &self.critics[1]),
        ] {
            if !net.is_finite() {
                return Err(LearnerError::NonFinite(format!(
                    "{name} parameters after update {}",
                    self.updates
                )));
            }
        }
        Ok(UpdateReport::Updated {
            critic_loss,
            actor_loss,
        })
    }

    /// Exploration action: policy plus Gaussian noise, clamped.
    pub fn explore<R: Rng + ?Sized>(&self, obs: &Observation, rng: &mut R) -> PolicyAction {
        let a = self.act(obs).0;
        let sigma = self.cfg.exploration_noise;
        let eps = if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite noise").sample(rng)
        } else {
            0.0
        };
        PolicyAction::new(a + eps)
    }
}

fn concat_action(obs: &[f64], act: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(act.len() * CRITIC_IN);
    for (row, a) in obs.chunks_exact(OBS_DIM).zip(act) {
        out.extend_from_slice(row);
        out.push(*a);
    }
    out
}

impl Policy for Mlp {
    fn act(&mut self, obs: &Observation) -> PolicyAction {
        PolicyAction::new(
            self.forward(obs.as_slice())
                .expect("actor input is an observation")[0],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Transition;

    fn small() -> Td3Config {
        Td3Config {
            hidden: vec![16, 16],
            batch: 4,
            ..Default::default()
        }
    }

    fn transition(r: f64, done: bool) -> Transition {
        let mut o = [0.1; OBS_DIM];
        o[0] = r;
        Transition {
            obs: Observation(o),
            action: PolicyAction(0.3),
            reward: r,
            next_obs: Observation([0.2; OBS_DIM]),
            done,
        }
    }

    #[test]
    fn skipped_when_buffer_small() {
        let mut agent = Td3::new(small(), 1).unwrap();
        let mut buf = ReplayBuffer::new(10);
        buf.push(transition(0.5, false));
        assert_eq!(
            agent.update(&buf).unwrap(),
            UpdateReport::Skipped {
                stored: 1,
                batch: 4
            }
        );
        assert_eq!(agent.updates(), 0);
    }

    #[test]
    fn terminal_targets_are_rewards() {
        // with done set everywhere the critic regresses onto the reward
        let cfg = Td3Config {
            batch: 1,
            hidden: vec![16],
            critic_lr: 1e-2,
            ..Default::default()
        };
        let mut agent = Td3::new(cfg, 4).unwrap();
        let mut buf = ReplayBuffer::new(1);
        buf.push(transition(0.7, true));
        let mut losses = Vec::new();
        for _ in 0..100 {
            if let UpdateReport::Updated { critic_loss, .. } = agent.update(&buf).unwrap() {
                losses.push(critic_loss);
            }
        }
        assert!(losses.last().unwrap() < &(losses[0] * 0.01), "{losses:?}");
        let input: Vec<f64> = transition(0.7, true)
            .obs
            .0
            .iter()
            .copied()
            .chain([0.3])
            .collect();
        let q = agent.critics[0].forward(&input).unwrap()[0];
        assert!((q - 0.7).abs() < 0.05, "{q}");
    }

    #[test]
    fn full_blend_copies_online_networks() {
        let cfg = Td3Config {
            tau: 1.0,
            policy_delay: 1,
            ..small()
        };
        let mut agent = Td3::new(cfg, 8).unwrap();
        let mut buf = ReplayBuffer::new(16);
        for i in 0..8 {
            buf.push(transition(i as f64 * 0.1, i % 3 == 0));
        }
        agent.update(&buf).unwrap();
        assert_eq!(agent.actor_target, agent.actor);
        assert_eq!(agent.critic_targets[0], agent.critics[0]);
        assert_eq!(agent.critic_targets[1], agent.critics[1]);
    }

    #[test]
    fn config_validation() {
        assert!(Td3Config {
            gamma: 1.0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(Td3Config {
            tau: 0.0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(Td3Config {
            policy_delay: 0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(small().validate().is_ok());
    }
}
