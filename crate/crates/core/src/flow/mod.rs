//! Time integration of the Lagrangian system, the relabeling group and the
//! projection onto the normalized section `y + H = id`.

mod relabel;
mod solver;

pub use relabel::{
    compose, f0_defect, invert, kappa_of, label_map, project_pi, relabel, relabel_flagged,
    Relabeling,
};
pub use solver::{
    dt_max, evolve, evolve_with, integrate, reverse_velocity, sbar_t, solve, solve_backward, step,
    step_with, Dynamics, Monitor, RunStats, Scheme, SolverConfig, Trajectory, DT_MIN,
};
