//! Global conservative solutions of the Camassa-Holm equation on the line.
//!
//! The solver works in Lagrangian coordinates `(zeta, U, H)` where the
//! equation becomes a semilinear system of ODEs in a Banach space; energy
//! concentration (peakon-antipeakon collisions) shows up as flat pieces of
//! `y = xi + zeta` rather than as a singularity. [`coords`] maps between the
//! Eulerian pair `(u, mu)` and the normalized Lagrangian section, and
//! [`metric`] brackets the Lipschitz metric between solutions.

pub mod coords;
pub mod error;
pub mod flow;
pub mod lagrangian;
pub mod metric;
pub mod oracles;
pub mod validation;

pub use error::{Error, Result};
