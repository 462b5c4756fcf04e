//! Lagrangian state space: grid, states and norms, constraint checks, and the
//! nonlocal operators driving the semilinear system.

pub mod grid;
pub mod hyperelastic;
pub mod nonlocal;
pub mod state;

pub use grid::Grid;
pub use hyperelastic::{rhs_hyperelastic, HyperelasticCoeffs};
pub use nonlocal::{direct_pq, eval_p, eval_pq, eval_q, rhs};
pub use state::{
    check_membership, e_distance, e_norm, CellData, LagrangianState, MembershipReport, Tangent,
};
