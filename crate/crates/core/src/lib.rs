//! Reward-signal laboratory for small-scale autonomous racing.
//!
//! Track tooling (centerline extraction, minimum-curvature raceline), a
//! kinematic simulator with lidar and obstacles, classical planners, the
//! racing rewards, a from-scratch TD3 learner and the benchmark harness.

pub mod config;
pub mod fmt;
pub mod geometry;
pub mod harness;
pub mod learner;
pub mod planners;
pub mod rewards;
pub mod sim;
pub mod track;
