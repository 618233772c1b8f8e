use rand::Rng;

use super::{
    check_collision, scan_lidar, spawn_obstacles, step_dynamics, EnvConfig, Obstacle, SimError,
    VehicleState,
};
use crate::fmt::format_sig;
use crate::planners::{
    build_observation, pure_pursuit, Observation, PlanInput, Planner, PolicyAction,
};
use crate::rewards::{compute_reward, racing_reward_bound, RewardConfig, StepContext, Terminal};
use crate::track::{wrap_progress, Track};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EpisodeEnd {
    Crash,
    LapComplete,
    Timeout,
}

impl EpisodeEnd {
    pub fn as_str(self) -> &'static str {
        match self {
            EpisodeEnd::Crash => "crash",
            EpisodeEnd::LapComplete => "lap",
            EpisodeEnd::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub terminal: EpisodeEnd,
    /// Physics steps times dt, seconds.
    pub lap_time: f64,
    /// State at every planner decision plus the final state.
    pub trajectory: Vec<VehicleState>,
    /// Physics steps taken.
    pub step_count: u64,
}

/// One replay unit, recorded per planner decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: PolicyAction,
    pub reward: f64,
    pub next_obs: Observation,
    pub done: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub state: VehicleState,
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct Episode {
    pub outcome: EpisodeOutcome,
    pub transitions: Vec<Transition>,
    pub log: Vec<LogRow>,
    pub obstacles: Vec<Obstacle>,
    /// Largest distance from the path-follower line seen at a physics step.
    pub max_cross_track: f64,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }

    /// CSV `t,x,y,psi,v,delta,reward`, one row per planner step.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("t,x,y,psi,v,delta,reward\n");
        for row in &self.log {
            let s = &row.state;
            let vals = [s.t, s.x, s.y, s.psi, s.v, s.delta, row.reward].map(|v| format_sig(v, 10));
            out.push_str(&vals.join(","));
            out.push('\n');
        }
        out
    }
}

/// Runs one episode, spawning obstacles from `rng` when the config enables them.
pub fn run_episode<P: Planner + ?Sized, R: Rng + ?Sized>(
    track: &Track,
    cfg: &EnvConfig,
    planner: &mut P,
    reward: &RewardConfig,
    rng: &mut R,
) -> Result<Episode, SimError> {
    let obstacles = if cfg.obstacles {
        spawn_obstacles(rng, &track.centerline, &cfg.spawn)?
    } else {
        Vec::new()
    };
    run_episode_with(track, cfg, obstacles, planner, reward)
}

/// Runs one episode against a fixed obstacle set.
pub fn run_episode_with<P: Planner + ?Sized>(
    track: &Track,
    cfg: &EnvConfig,
    obstacles: Vec<Obstacle>,
    planner: &mut P,
    reward: &RewardConfig,
) -> Result<Episode, SimError> {
    cfg.validate()?;
    let params = cfg.vehicle;
    let lidar = cfg.lidar;
    let follow = track.line(cfg.follow);
    let reward_line = track.line(reward.reference);
    let center = &track.center_line;
    let cl = &track.centerline;
    let s_total = center.s_total;

    let (start, heading) = track.start_pose_on(cfg.follow);
    let start_tangent = cl.tangent(0);
    let start_normal = cl.normals[0];
    let line_start = cl.points[0];
    let (lat_lo, lat_hi) = (-cl.w_right[0] - 0.5, cl.w_left[0] + 0.5);

    let mut state = VehicleState::at_rest(start, heading);
    let mut prev_center_s = center.project(state.position()).s;
    let mut progress = 0.0;
    let mut physics_steps: u64 = 0;
    let max_steps = cfg.max_physics_steps();
    let mut max_cross_track: f64 = 0.0;

    let sense = |state: &VehicleState| -> Result<_, SimError> {
        let scan = scan_lidar(
            state,
            &track.grid,
            &obstacles,
            lidar.n_beams,
            lidar.fov,
            lidar.max_range,
        );
        let pf = pure_pursuit(state, follow, cfg.lookahead, &params)?;
        let obs = build_observation(state, &pf, &scan, &params, lidar.max_range);
        Ok((scan, pf, obs))
    };

    let (mut scan, mut pf, mut obs) = sense(&state)?;
    let mut prev_rel = reward_line.relation(state.position(), state.psi);
    let mut trajectory = vec![state];
    let mut transitions = Vec::new();
    let mut log = Vec::new();

    let end = loop {
        let out = planner.plan(&PlanInput {
            state: &state,
            scan: &scan,
            pf,
            observation: &obs,
            params: &params,
            grid: &track.grid,
            obstacles: &obstacles,
        });
        let cmd = out.command.clamped(&params);

        let mut end = None;
        for _ in 0..cfg.planner_period {
            let next = step_dynamics(&state, &cmd, &params, cfg.dt);
            physics_steps += 1;

            let proj = center.project(next.position());
            progress += wrap_progress(proj.s - prev_center_s, s_total);
            prev_center_s = proj.s;
            max_cross_track = max_cross_track.max(follow.project(next.position()).distance);

            let before = (state.position() - line_start).dot(start_tangent);
            let after = (next.position() - line_start).dot(start_tangent);
            let lateral = (next.position() - line_start).dot(start_normal);
            state = next;
            state.t = physics_steps as f64 * cfg.dt;

            if check_collision(&state, &track.grid, &obstacles, cfg.footprint_radius) {
                end = Some(EpisodeEnd::Crash);
                break;
            }
            if before < 0.0
                && after >= 0.0
                && (lat_lo..=lat_hi).contains(&lateral)
                && progress >= 0.5 * s_total
            {
                end = Some(EpisodeEnd::LapComplete);
                break;
            }
            if physics_steps >= max_steps {
                end = Some(EpisodeEnd::Timeout);
                break;
            }
        }

        let next_rel = reward_line.relation(state.position(), state.psi);
        let c_proj = center.project(state.position());
        let nearest = if c_proj.t < 0.5 {
            c_proj.segment
        } else {
            (c_proj.segment + 1) % cl.len()
        };
        let terminal = match end {
            Some(EpisodeEnd::Crash) => Some(Terminal::Crash),
            Some(EpisodeEnd::LapComplete) => Some(Terminal::LapComplete),
            _ => None,
        };
        let ctx = StepContext {
            prev: prev_rel,
            next: next_rel,
            speed: state.v,
            delta_ref: cmd.delta_ref,
            terminal,
            s_total: reward_line.s_total,
            track_width: cl.width(nearest),
            max_speed: params.max_speed,
            max_steer: params.max_steer,
        };
        let r = compute_reward(&ctx, reward);
        debug_assert!(
            terminal.is_some()
                || r.abs()
                    <= racing_reward_bound(reward, cfg.planner_dt(), params.max_speed, ctx.s_total)
                        + 1e-12,
            "racing reward {r} out of bounds"
        );
        prev_rel = next_rel;

        (scan, pf, obs) = {
            let (s, p, o) = sense(&state)?;
            let prev_obs = std::mem::replace(&mut obs, o);
            let transition = Transition {
                obs: prev_obs,
                action: out.action,
                reward: r,
                next_obs: o,
                done: terminal.is_some(),
            };
            planner.observe(&transition);
            transitions.push(transition);
            (s, p, o)
        };
        trajectory.push(state);
        log.push(LogRow { state, reward: r });

        if let Some(end) = end {
            break end;
        }
    };

    let outcome = EpisodeOutcome {
        terminal: end,
        lap_time: physics_steps as f64 * cfg.dt,
        trajectory,
        step_count: physics_steps,
    };
    Ok(Episode {
        outcome,
        transitions,
        log,
        obstacles,
        max_cross_track,
    })
}
