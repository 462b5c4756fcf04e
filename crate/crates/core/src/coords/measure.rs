use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::grid::{interp_sorted, locate_sorted};

/// Point mass of the energy measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Energy measure: a piecewise-constant density on the cells of the x-grid
/// plus finitely many atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyMeasure {
    /// Density on `[x_k, x_{k+1})`, one value per cell.
    pub density: Vec<f64>,
    pub atoms: Vec<Atom>,
}

impl EnergyMeasure {
    pub fn ac_mass(&self, x: &[f64]) -> f64 {
        self.density
            .iter()
            .zip(x.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }
}

/// Eulerian state `(u, mu)` on a strictly increasing x-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairJson", into = "PairJson")]
pub struct EulerianPair {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub mu: EnergyMeasure,
}

/// Wire format `{x, u, density, atoms: [{x, mass}]}`. `density` holds one
/// value per cell; nodal samples (one per x) are also accepted and averaged.
#[derive(Serialize, Deserialize)]
struct PairJson {
    x: Vec<f64>,
    u: Vec<f64>,
    density: Vec<f64>,
    #[serde(default)]
    atoms: Vec<Atom>,
}

impl TryFrom<PairJson> for EulerianPair {
    type Error = Error;
    fn try_from(j: PairJson) -> Result<Self> {
        let n = j.x.len();
        let density = if n >= 2 && j.density.len() == n {
            j.density.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
        } else {
            j.density
        };
        EulerianPair::new(j.x, j.u, density, j.atoms)
    }
}

impl From<EulerianPair> for PairJson {
    fn from(p: EulerianPair) -> Self {
        PairJson {
            x: p.x,
            u: p.u,
            density: p.mu.density,
            atoms: p.mu.atoms,
        }
    }
}

impl EulerianPair {
    pub fn new(x: Vec<f64>, u: Vec<f64>, density: Vec<f64>, mut atoms: Vec<Atom>) -> Result<Self> {
        let n = x.len();
        if n < 2 {
            return Err(Error::InvalidPair(format!(
                "need at least 2 grid points, got {n}"
            )));
        }
        if u.len() != n {
            return Err(Error::LengthMismatch {
                what: "u",
                expected: n,
                got: u.len(),
            });
        }
        if density.len() != n - 1 {
            return Err(Error::LengthMismatch {
                what: "density",
                expected: n - 1,
                got: density.len(),
            });
        }
        if x.iter().chain(&u).chain(&density).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("eulerian pair"));
        }
        if let Some(k) = x.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPair(format!(
                "x not strictly increasing at {k}"
            )));
        }
        if let Some(k) = density.iter().position(|&d| d < 0.0) {
            return Err(Error::InvalidPair(format!("negative density in cell {k}")));
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        for a in &atoms {
            if a.mass <= 0.0 || !a.mass.is_finite() {
                return Err(Error::InvalidPair(format!(
                    "atom at {} has mass {}",
                    a.x, a.mass
                )));
            }
            if a.x < x[0] || a.x > x[n - 1] {
                return Err(Error::InvalidPair(format!(
                    "atom at {} outside the grid",
                    a.x
                )));
            }
        }
        if atoms.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(Error::InvalidPair("atom locations must be distinct".into()));
        }
        Ok(Self {
            x,
            u,
            mu: EnergyMeasure { density, atoms },
        })
    }

    /// `u = 0`, `mu = 0` on a uniform grid.
    pub fn zero(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let x = uniform(x_min, x_max, n)?;
        Self::new(x, vec![0.0; n], vec![0.0; n - 1], vec![])
    }

    /// `u` from samples and `mu = (u^2 + u_x^2) dx` with cell averages of
    /// `u^2` and the difference quotient for `u_x`.
    pub fn from_velocity(x: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if x.len() != u.len() || x.len() < 2 {
            return Err(Error::InvalidPair(
                "x and u must have equal length >= 2".into(),
            ));
        }
        let density = (0..x.len() - 1)
            .map(|c| {
                let dx = x[c + 1] - x[c];
                let ux = (u[c + 1] - u[c]) / dx;
                0.5 * (u[c] * u[c] + u[c + 1] * u[c + 1]) + ux * ux
            })
            .collect();
        Self::new(x, u, density, vec![])
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Total mass `mu(R)`.
    pub fn energy(&self) -> f64 {
        self.mu.ac_mass(&self.x) + self.mu.atom_mass()
    }

    pub fn u_at(&self, x: f64) -> f64 {
        interp_sorted(&self.x, &self.u, x)
    }

    /// Absolutely continuous mass of `(-inf, x)`.
    pub fn ac_cumulative(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return 0.0;
        }
        let (k, theta) = locate_sorted(&self.x, x);
        let before: f64 = (0..k)
            .map(|c| self.mu.density[c] * (self.x[c + 1] - self.x[c]))
            .sum();
        before + self.mu.density[k] * theta * (self.x[k + 1] - self.x[k])
    }

    /// Resample onto `x_new`: `u` by linear interpolation, the density by exact
    /// remapping of its cumulative, atoms unchanged (they must lie inside).
    pub fn resample(&self, x_new: &[f64]) -> Result<Self> {
        let n = x_new.len();
        if n < 2 {
            return Err(Error::InvalidPair("resample grid needs >= 2 points".into()));
        }
        let mut cum = Vec::with_capacity(self.n());
        let mut acc = 0.0;
        cum.push(0.0);
        for c in 0..self.n() - 1 {
            acc += self.mu.density[c] * (self.x[c + 1] - self.x[c]);
            cum.push(acc);
        }
        let cum_at = |x: f64| interp_sorted(&self.x, &cum, x);
        let u = x_new.iter().map(|&x| self.u_at(x)).collect();
        let density = x_new
            .windows(2)
            .map(|w| ((cum_at(w[1]) - cum_at(w[0])) / (w[1] - w[0])).max(0.0))
            .collect();
        Self::new(x_new.to_vec(), u, density, self.mu.atoms.clone())
    }

    /// Largest violation of `density >= avg(u^2) + (du/dx)^2` over cells.
    pub fn ac_deficit(&self) -> f64 {
        (0..self.n() - 1)
            .map(|c| {
                let dx = self.x[c + 1] - self.x[c];
                let ux = (self.u[c + 1] - self.u[c]) / dx;
                let need = 0.5 * (self.u[c].powi(2) + self.u[c + 1].powi(2)) + ux * ux;
                (need - self.mu.density[c]).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

pub fn uniform(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidPair(format!(
            "bad uniform grid [{a}, {b}] with {n} points"
        )));
    }
    let dx = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| a + i as f64 * dx).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_counts_density_and_atoms() {
        let p = EulerianPair::new(
            vec![0.0, 1.0, 3.0],
            vec![0.0; 3],
            vec![2.0, 0.5],
            vec![Atom { x: 1.5, mass: 0.25 }],
        )
        .unwrap();
        assert!((p.energy() - 3.25).abs() < 1e-15);
        assert!((p.ac_cumulative(2.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn zero_pair_has_zero_energy() {
        assert_eq!(EulerianPair::zero(-1.0, 1.0, 11).unwrap().energy(), 0.0);
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(EulerianPair::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0], vec![]).is_err());
        assert!(EulerianPair::new(vec![0.0, 1.0], vec![0.0; 2], vec![-1.0], vec![]).is_err());
        let bad_atom = vec![Atom { x: 5.0, mass: 1.0 }];
        assert!(EulerianPair::new(vec![0.0, 1.0], vec![0.0; 2], vec![0.0], bad_atom).is_err());
        let dup = vec![Atom { x: 0.5, mass: 1.0 }, Atom { x: 0.5, mass: 2.0 }];
        assert!(EulerianPair::new(vec![0.0, 1.0], vec![0.0; 2], vec![0.0], dup).is_err());
    }

    #[test]
    fn json_accepts_nodal_density() {
        let j = r#"{"x":[0,1,2],"u":[0,0,0],"density":[1,3,5],"atoms":[]}"#;
        let p: EulerianPair = serde_json::from_str(j).unwrap();
        assert_eq!(p.mu.density, vec![2.0, 4.0]);
        let back = serde_json::to_string(&p).unwrap();
        let q: EulerianPair = serde_json::from_str(&back).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn resample_conserves_ac_mass() {
        let x = uniform(-2.0, 2.0, 41).unwrap();
        let u: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
        let p = EulerianPair::from_velocity(x, u).unwrap();
        let q = p.resample(&uniform(-2.0, 2.0, 17).unwrap()).unwrap();
        assert!((p.energy() - q.energy()).abs() < 1e-13);
    }
}
