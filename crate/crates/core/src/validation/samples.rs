//! Seeded random data used by the validation suites and the property tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::coords::measure::uniform;
use crate::coords::{default_label_grid, to_lagrangian_on, Atom, EulerianPair};
use crate::error::Result;
use crate::flow::Relabeling;
use crate::lagrangian::{Grid, LagrangianState};

/// Half-width of the x-window used for random data.
pub const WINDOW: f64 = 12.0;

/// Sum of one to four Gaussian bumps, sampled on `nx` uniform points of
/// `[-WINDOW, WINDOW]`.
pub fn smooth_velocity(rng: &mut ChaCha8Rng, nx: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(0.6..2.0),
            )
        })
        .collect();
    let x = uniform(-WINDOW, WINDOW, nx)?;
    let u = x
        .iter()
        .map(|&z| {
            bumps
                .iter()
                .map(|&(a, c, w)| a * (-((z - c) / w).powi(2)).exp())
                .sum()
        })
        .collect();
    Ok((x, u))
}

/// A random pair with absolutely continuous energy `u^2 + u_x^2`.
pub fn smooth_pair(rng: &mut ChaCha8Rng, nx: usize) -> Result<EulerianPair> {
    let (x, u) = smooth_velocity(rng, nx)?;
    EulerianPair::from_velocity(x, u)
}

/// A random pair with up to two atoms added to a smooth one.
pub fn pair_with_atoms(rng: &mut ChaCha8Rng, nx: usize) -> Result<EulerianPair> {
    let p = smooth_pair(rng, nx)?;
    let atoms = (0..rng.gen_range(1..=2))
        .map(|_| Atom {
            x: rng.gen_range(-6.0..6.0),
            mass: rng.gen_range(0.1..1.0),
        })
        .collect();
    EulerianPair::new(p.x, p.u, p.mu.density, atoms)
}

/// A normalized state: `L` of a smooth random pair on `n` labels.
pub fn f0_state(rng: &mut ChaCha8Rng, n: usize) -> Result<LagrangianState> {
    let p = smooth_pair(rng, 4001)?;
    Ok(to_lagrangian_on(&p, &default_label_grid(&p, n)?))
}

/// A smooth increasing map `xi + s(xi)` with `kappa <= kappa_max`, whose
/// offset is a localized oscillation plus a small shift.
pub fn relabeling(rng: &mut ChaCha8Rng, grid: &Grid, kappa_max: f64) -> Result<Relabeling> {
    let a = rng.gen_range(0.2..1.0);
    let k = rng.gen_range(0.5..2.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let c = rng.gen_range(-4.0..4.0);
    let s = rng.gen_range(1.5..4.0);
    let shift = rng.gen_range(-0.3..0.3);
    let offset = |xi: f64, scale: f64| {
        scale * (a * (k * xi + phase).sin() * (-0.5 * ((xi - c) / s).powi(2)).exp() + shift)
    };
    let mut scale = 1.0;
    loop {
        let f = Relabeling::from_fn(*grid, |xi| xi + offset(xi, scale));
        if let Ok(f) = f {
            if f.kappa() <= kappa_max {
                return Ok(f);
            }
        }
        scale *= 0.7;
    }
}
