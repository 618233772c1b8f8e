//! Classical planners and the modification planner that adds a learned
//! steering correction to a path follower.

mod gap;
mod observation;
mod pursuit;

pub use gap::{follow_the_gap, select_gap, GapConfig, GapTarget};
pub use observation::{build_observation, Observation, PolicyAction, OBS_DIM};
pub use pursuit::{pure_pursuit, pursuit_steering};

use crate::sim::{scan_lidar, ActionCommand, Obstacle, Transition, VehicleParams, VehicleState};
use crate::track::OccupancyGrid;

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("invalid planner parameter: {0}")]
    Parameter(String),
}

/// What a planner sees at each decision.
#[derive(Clone, Copy, Debug)]
pub struct PlanInput<'a> {
    pub state: &'a VehicleState,
    pub scan: &'a [f64],
    /// Path-follower command for the current state.
    pub pf: ActionCommand,
    pub observation: &'a Observation,
    pub params: &'a VehicleParams,
    pub grid: &'a OccupancyGrid,
    pub obstacles: &'a [Obstacle],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanOutput {
    pub command: ActionCommand,
    /// Policy output behind the command; zero for classical planners.
    pub action: PolicyAction,
}

impl PlanOutput {
    pub fn classical(command: ActionCommand) -> Self {
        Self {
            command,
            action: PolicyAction::default(),
        }
    }
}

pub trait Planner {
    fn plan(&mut self, input: &PlanInput) -> PlanOutput;

    /// Called with every transition the environment records.
    fn observe(&mut self, _transition: &Transition) {}
}

/// Maps observations to steering corrections.
pub trait Policy {
    fn act(&mut self, obs: &Observation) -> PolicyAction;
}

impl<F: FnMut(&Observation) -> PolicyAction> Policy for F {
    fn act(&mut self, obs: &Observation) -> PolicyAction {
        self(obs)
    }
}

/// `delta_ref = clamp(delta_pf + a * max_steer)`; the speed passes through.
pub fn modification_plan(
    pf: &ActionCommand,
    policy: PolicyAction,
    params: &VehicleParams,
) -> ActionCommand {
    ActionCommand {
        v_ref: pf.v_ref,
        delta_ref: (pf.delta_ref + policy.0 * params.max_steer)
            .clamp(-params.max_steer, params.max_steer),
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PurePursuitPlanner;

impl Planner for PurePursuitPlanner {
    fn plan(&mut self, input: &PlanInput) -> PlanOutput {
        PlanOutput::classical(input.pf)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GapPlanner {
    pub config: GapConfig,
}

impl GapPlanner {
    pub fn new(config: GapConfig) -> Self {
        Self { config }
    }
}

impl Planner for GapPlanner {
    fn plan(&mut self, input: &PlanInput) -> PlanOutput {
        let c = &self.config;
        let command = match c.beams {
            None => follow_the_gap(input.scan, input.params, c),
            Some(n) => {
                let scan = scan_lidar(
                    input.state,
                    input.grid,
                    input.obstacles,
                    n,
                    c.fov,
                    c.max_range,
                );
                follow_the_gap(&scan, input.params, c)
            }
        };
        PlanOutput::classical(command)
    }
}

/// Path follower plus a policy's steering correction.
pub struct ModificationPlanner<P: Policy> {
    pub policy: P,
}

impl<P: Policy> ModificationPlanner<P> {
    pub fn new(policy: P) -> Self {
        Self { policy }
    }
}

impl<P: Policy> Planner for ModificationPlanner<P> {
    fn plan(&mut self, input: &PlanInput) -> PlanOutput {
        let action = self.policy.act(input.observation);
        PlanOutput {
            command: modification_plan(&input.pf, action, input.params),
            action,
        }
    }
}

/// Fixed command regardless of input.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPlanner(pub ActionCommand);

impl Planner for ConstantPlanner {
    fn plan(&mut self, _input: &PlanInput) -> PlanOutput {
        PlanOutput::classical(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modification_arithmetic() {
        let p = VehicleParams::default();
        let pf = ActionCommand {
            v_ref: 4.0,
            delta_ref: 0.1,
        };
        let out = modification_plan(&pf, PolicyAction(0.5), &p);
        assert!((out.delta_ref - 0.3).abs() < 1e-15);
        assert_eq!(out.v_ref, 4.0);
        assert_eq!(modification_plan(&pf, PolicyAction(0.0), &p), pf);
        let pf = ActionCommand {
            v_ref: 4.0,
            delta_ref: 0.3,
        };
        assert_eq!(modification_plan(&pf, PolicyAction(1.0), &p).delta_ref, 0.4);
    }
}
