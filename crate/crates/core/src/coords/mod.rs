//! Eulerian coordinates `(u, mu)` with measure-valued energy and the maps to
//! and from the Lagrangian section.

pub mod measure;
pub mod semigroup;
pub mod transform;

pub use measure::{Atom, EnergyMeasure, EulerianPair};
pub use semigroup::t_t;
pub use transform::{
    default_label_grid, singular_threshold, to_eulerian, to_lagrangian, to_lagrangian_on,
};

/// Total energy `mu(R)`.
pub fn energy(p: &EulerianPair) -> f64 {
    p.energy()
}
