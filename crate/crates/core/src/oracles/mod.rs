//! Reference data and residual checks: multipeakon initial data, the
//! peakon-antipeakon collision, and weak-form residuals.

mod peakon;
mod weak;

pub use peakon::{
    collision_scenario, multipeakon_pair, peakon_profile, CollisionScenario, PeakonConfig,
};
pub use weak::{eulerian_pq, eulerian_pq_nodes, weak_residual, BumpTestFn, Snapshot, WeakResidual};
