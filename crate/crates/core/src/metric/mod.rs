//! Certified brackets for the relabeling-invariant distance between
//! Lagrangian states and for the induced distance on Eulerian pairs.
//!
//! The upper bound comes from explicit witnesses `(f1, f2)`:
//! `J <= ||Xa o f1 - Xb||_E + ||Xa - Xb o f2||_E`. Since `d <= J` for a single
//! link, this also bounds `d`. The lower bound `||Xa - Xb||_inf / 2` holds on
//! the normalized section.

mod optimizer;
mod segtree;

use serde::{Serialize, Serializer};

pub use optimizer::{fit_term, OptimizerConfig, TermFit};

use crate::coords::{to_lagrangian_on, EulerianPair};
use crate::error::{Error, Result};
use crate::flow::{f0_defect, relabel, Relabeling};
use crate::lagrangian::{e_distance, Grid, LagrangianState};

/// Largest `|y + H - xi|` accepted as "on the normalized section".
pub const F0_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricBracket {
    pub lower: f64,
    pub upper: f64,
    pub witness_f1: Relabeling,
    pub witness_f2: Relabeling,
    /// Descent sweeps spent on both terms.
    pub iterations: usize,
}

impl Serialize for MetricBracket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Knots {
            f1: Vec<f64>,
            f2: Vec<f64>,
        }
        #[derive(Serialize)]
        struct Wire {
            lower: f64,
            upper: f64,
            iterations: usize,
            witness_knots: Knots,
        }
        Wire {
            lower: self.lower,
            upper: self.upper,
            iterations: self.iterations,
            witness_knots: Knots {
                f1: self.witness_f1.values(),
                f2: self.witness_f2.values(),
            },
        }
        .serialize(s)
    }
}

/// `max_i max(|dzeta_i|, |dU_i|, |dH_i|)`.
pub fn linf_dist(a: &LagrangianState, b: &LagrangianState) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let mut m = 0.0_f64;
    for i in 0..a.n() {
        m = m
            .max((a.zeta[i] - b.zeta[i]).abs())
            .max((a.u_lag[i] - b.u_lag[i]).abs())
            .max((a.h_cum[i] - b.h_cum[i]).abs());
    }
    Ok(m)
}

fn in_f0(x: &LagrangianState) -> bool {
    let scale = 1.0 + x.grid.xi_min().abs().max(x.grid.xi_max().abs());
    f0_defect(x) <= F0_TOL * scale
}

/// Evaluate one term with a witness and fall back to the identity when the
/// search did not beat it.
fn settle(
    src: &LagrangianState,
    dst: &LagrangianState,
    fit: TermFit,
    identity_value: f64,
) -> Result<(Relabeling, f64)> {
    let value = e_distance(&relabel(src, &fit.f)?, dst)?;
    if value < identity_value {
        Ok((fit.f, value))
    } else {
        Ok((Relabeling::identity(src.grid), identity_value))
    }
}

/// Upper bound on `J(Xa, Xb)` with explicit witnesses. The lower end is
/// `||Xa - Xb||_inf / 2` when both states are normalized and 0 otherwise.
pub fn j_upper(
    a: &LagrangianState,
    b: &LagrangianState,
    opt: &OptimizerConfig,
) -> Result<MetricBracket> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    a.check_shape()?;
    b.check_shape()?;
    let base = e_distance(a, b)?;
    let lower = if in_f0(a) && in_f0(b) {
        0.5 * linf_dist(a, b)?
    } else {
        0.0
    };
    if base == 0.0 {
        let id = Relabeling::identity(a.grid);
        return Ok(MetricBracket {
            lower,
            upper: 0.0,
            witness_f1: id.clone(),
            witness_f2: id,
            iterations: 0,
        });
    }
    let fit1 = fit_term(a, b, opt);
    let fit2 = fit_term(b, a, opt);
    let iterations = fit1.sweeps + fit2.sweeps;
    let (f1, v1) = settle(a, b, fit1, base)?;
    let (f2, v2) = settle(b, a, fit2, base)?;
    Ok(MetricBracket {
        lower,
        upper: v1 + v2,
        witness_f1: f1,
        witness_f2: f2,
        iterations,
    })
}

/// Bracket on the distance `d` between two normalized states (single-link chain).
pub fn d_bracket(
    a: &LagrangianState,
    b: &LagrangianState,
    opt: &OptimizerConfig,
) -> Result<MetricBracket> {
    for (name, x) in [("first", a), ("second", b)] {
        if !in_f0(x) {
            return Err(Error::InvalidPair(format!(
                "{name} state is not normalized: max |y + H - xi| = {:e}",
                f0_defect(x)
            )));
        }
    }
    j_upper(a, b, opt)
}

/// [`d_bracket`] on the set of states with energy at most `bound`.
pub fn d_bracket_restricted(
    a: &LagrangianState,
    b: &LagrangianState,
    bound: f64,
    opt: &OptimizerConfig,
) -> Result<MetricBracket> {
    for x in [a, b] {
        let e = x.energy();
        if e > bound {
            return Err(Error::EnergyBound { energy: e, bound });
        }
    }
    d_bracket(a, b, opt)
}

/// A label grid that covers the images of both pairs under `L`.
pub fn common_label_grid(pa: &EulerianPair, pb: &EulerianPair, n: usize) -> Result<Grid> {
    let lo = pa.x[0].min(pb.x[0]);
    let hi = (pa.x[pa.n() - 1] + pa.energy()).max(pb.x[pb.n() - 1] + pb.energy());
    Grid::new(lo, hi, n)
}

/// Bracket on `d_D(pa, pb) = d(L pa, L pb)`, both images sampled on a common
/// grid of `n` labels. With `energy_bound` the restricted distance is used and
/// both energies are checked first.
pub fn d_eulerian(
    pa: &EulerianPair,
    pb: &EulerianPair,
    n: usize,
    energy_bound: Option<f64>,
    opt: &OptimizerConfig,
) -> Result<MetricBracket> {
    if let Some(bound) = energy_bound {
        for p in [pa, pb] {
            let e = p.energy();
            if e > bound {
                return Err(Error::EnergyBound { energy: e, bound });
            }
        }
    }
    let grid = common_label_grid(pa, pb, n)?;
    let xa = to_lagrangian_on(pa, &grid);
    let xb = to_lagrangian_on(pb, &grid);
    d_bracket(&xa, &xb, opt)
}

/// Diagnostic upper bound on `inf_{f,g} ||Xa o f - Xb o g||_E`, using one-sided
/// witnesses only. Not a bound on `d`.
pub fn jtilde_upper(
    a: &LagrangianState,
    b: &LagrangianState,
    opt: &OptimizerConfig,
) -> Result<f64> {
    let br = j_upper(a, b, opt)?;
    let t1 = e_distance(&relabel(a, &br.witness_f1)?, b)?;
    let t2 = e_distance(a, &relabel(b, &br.witness_f2)?)?;
    Ok(t1.min(t2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalNorms {
    pub h1: f64,
    pub linf: f64,
}

/// Discrete `H^1` and `L^inf` distances of the velocities on a shared x-grid.
pub fn classical_norms(pa: &EulerianPair, pb: &EulerianPair) -> Result<ClassicalNorms> {
    if pa.x != pb.x {
        return Err(Error::GridMismatch);
    }
    let d: Vec<f64> = pa.u.iter().zip(&pb.u).map(|(a, b)| a - b).collect();
    Ok(velocity_norms(&pa.x, &d))
}

/// [`classical_norms`] after resampling both velocities to a uniform grid of
/// `n` points on the intersection of their windows.
pub fn classical_norms_resampled(
    pa: &EulerianPair,
    pb: &EulerianPair,
    n: usize,
) -> Result<ClassicalNorms> {
    let lo = pa.x[0].max(pb.x[0]);
    let hi = pa.x[pa.n() - 1].min(pb.x[pb.n() - 1]);
    let x = crate::coords::measure::uniform(lo, hi, n)?;
    let d: Vec<f64> = x.iter().map(|&z| pa.u_at(z) - pb.u_at(z)).collect();
    Ok(velocity_norms(&x, &d))
}

fn velocity_norms(x: &[f64], d: &[f64]) -> ClassicalNorms {
    let mut l2 = 0.0;
    let mut dx2 = 0.0;
    for c in 0..x.len() - 1 {
        let w = x[c + 1] - x[c];
        l2 += 0.5 * w * (d[c] * d[c] + d[c + 1] * d[c + 1]);
        dx2 += (d[c + 1] - d[c]).powi(2) / w;
    }
    ClassicalNorms {
        h1: (l2 + dx2).sqrt(),
        linf: d.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::measure::uniform;
    use crate::flow::project_pi;
    use crate::oracles::{multipeakon_pair, PeakonConfig};

    fn peakon_on(grid: &Grid, c: f64) -> LagrangianState {
        let cfg = PeakonConfig::single(c, 0.0);
        cfg.lagrangian(-10.0, 10.0, grid).unwrap()
    }

    fn grid() -> Grid {
        Grid::new(-10.0, 14.0, 481).unwrap()
    }

    #[test]
    fn identical_states_give_zero() {
        let x = peakon_on(&grid(), 1.0);
        let b = d_bracket(&x, &x, &OptimizerConfig::default()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert!(b.witness_f1.is_identity() && b.witness_f2.is_identity());
    }

    #[test]
    fn velocity_shift_is_measured_exactly() {
        // a constant shift of U is relabeling invariant, so no witness beats the identity
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let a = LagrangianState::zero(g);
        let b = LagrangianState {
            u_lag: vec![0.25; 11],
            ..a.clone()
        };
        let br = d_bracket(&a, &b, &OptimizerConfig::default()).unwrap();
        assert!((br.lower - 0.125).abs() < 1e-15);
        let e = e_distance(&a, &b).unwrap();
        assert!(br.upper <= 2.0 * e);
        assert!(
            br.upper >= 2.0 * e * (1.0 - 1e-9),
            "{} vs {}",
            br.upper,
            2.0 * e
        );
    }

    #[test]
    fn bracket_is_ordered_and_sandwiched() {
        let g = grid();
        let a = peakon_on(&g, 1.0);
        let b = peakon_on(&g, 0.8);
        let br = d_bracket(&a, &b, &OptimizerConfig::default()).unwrap();
        assert!(br.lower <= br.upper);
        assert!(0.5 * linf_dist(&a, &b).unwrap() <= br.upper);
        assert!(br.upper <= 2.0 * e_distance(&a, &b).unwrap());
    }

    #[test]
    fn witnesses_reproduce_the_upper_bound() {
        let g = grid();
        let a = peakon_on(&g, 1.0);
        let b = peakon_on(&g, 0.7);
        let br = j_upper(&a, &b, &OptimizerConfig::default()).unwrap();
        let t1 = e_distance(&relabel(&a, &br.witness_f1).unwrap(), &b).unwrap();
        let t2 = e_distance(&a, &relabel(&b, &br.witness_f2).unwrap()).unwrap();
        assert!((t1 + t2 - br.upper).abs() <= 1e-12 * br.upper);
    }

    #[test]
    fn relabeled_copy_is_close() {
        let g = grid();
        let x = peakon_on(&g, 1.0);
        let f = Relabeling::from_fn(g, |xi| {
            xi + 0.5 * (0.3 * xi).sin() * (-0.03 * xi * xi).exp()
        })
        .unwrap();
        let moved = relabel(&x, &f).unwrap();
        let br = j_upper(&moved, &x, &OptimizerConfig::default()).unwrap();
        let plain = e_distance(&moved, &x).unwrap();
        assert!(br.upper < 0.1 * plain, "{} vs {plain}", br.upper);
        let back = project_pi(&moved).unwrap();
        assert!(
            d_bracket(&back, &x, &OptimizerConfig::default())
                .unwrap()
                .upper
                < 0.05 * crate::lagrangian::e_norm(&x)
        );
    }

    #[test]
    fn rejects_unnormalized_states() {
        let g = grid();
        let x = peakon_on(&g, 1.0);
        let f = Relabeling::from_fn(g, |xi| xi + 0.2).unwrap();
        let moved = relabel(&x, &f).unwrap();
        assert!(matches!(
            d_bracket(&moved, &x, &OptimizerConfig::default()),
            Err(Error::InvalidPair(_))
        ));
    }

    #[test]
    fn restricted_checks_energy() {
        let g = grid();
        let x = peakon_on(&g, 1.0);
        assert!(matches!(
            d_bracket_restricted(&x, &x, 1.0, &OptimizerConfig::default()),
            Err(Error::EnergyBound { .. })
        ));
        assert!(d_bracket_restricted(&x, &x, 3.0, &OptimizerConfig::default()).is_ok());
    }

    #[test]
    fn eulerian_distance_of_equal_pairs_is_zero() {
        let xs = uniform(-10.0, 10.0, 401).unwrap();
        let p = multipeakon_pair(&PeakonConfig::single(1.0, 0.0), &xs).unwrap();
        let b = d_eulerian(&p, &p, 300, None, &OptimizerConfig::default()).unwrap();
        assert_eq!(b.upper, 0.0);
        assert!(matches!(
            d_eulerian(&p, &p, 300, Some(1.0), &OptimizerConfig::default()),
            Err(Error::EnergyBound { .. })
        ));
    }

    #[test]
    fn classical_norms_of_a_constant_difference() {
        let xs = uniform(0.0, 1.0, 101).unwrap();
        let a = EulerianPair::from_velocity(xs.clone(), vec![0.0; 101]).unwrap();
        let b = EulerianPair::from_velocity(xs, vec![0.5; 101]).unwrap();
        let n = classical_norms(&a, &b).unwrap();
        assert!((n.linf - 0.5).abs() < 1e-15);
        assert!((n.h1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bracket_serializes_with_knots() {
        let x = peakon_on(&grid(), 1.0);
        let b = d_bracket(&x, &x, &OptimizerConfig::default()).unwrap();
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(v["witness_knots"]["f1"].as_array().unwrap().len(), 481);
        assert_eq!(v["upper"], 0.0);
    }

    #[test]
    fn linf_of_a_velocity_shift() {
        let x = peakon_on(&grid(), 1.0);
        let y = LagrangianState {
            u_lag: x.u_lag.iter().map(|u| u + 0.3).collect(),
            ..x.clone()
        };
        assert!((linf_dist(&x, &y).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn linf_of_two_peakons_by_scan() {
        let g = grid();
        let a = peakon_on(&g, 1.0);
        let b = peakon_on(&g, 1.1);
        let mut m = 0.0_f64;
        for i in 0..g.n() {
            for (p, q) in [
                (&a.zeta, &b.zeta),
                (&a.u_lag, &b.u_lag),
                (&a.h_cum, &b.h_cum),
            ] {
                m = m.max((p[i] - q[i]).abs());
            }
        }
        assert_eq!(linf_dist(&a, &b).unwrap(), m);
        assert!(m > 0.1);
    }

    #[test]
    fn an_added_atom_is_seen() {
        let xs = uniform(-10.0, 10.0, 801).unwrap();
        let p = multipeakon_pair(&PeakonConfig::single(1.0, 0.0), &xs).unwrap();
        let mut mu = p.mu.clone();
        mu.atoms.push(crate::coords::Atom { x: 2.0, mass: 0.5 });
        let q = EulerianPair::new(p.x.clone(), p.u.clone(), mu.density, mu.atoms).unwrap();
        let b = d_eulerian(&p, &q, 1200, None, &OptimizerConfig::default()).unwrap();
        // the H-components of the images differ by the atom mass past x = 2
        assert!(b.lower >= 0.2, "{}", b.lower);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn refinements_in_h1_converge() {
        let u = |x: f64| (-(x * x)).exp() * (1.0 + 0.5 * x);
        let fine = uniform(-10.0, 10.0, 4001).unwrap();
        let target =
            EulerianPair::from_velocity(fine.clone(), fine.iter().map(|&x| u(x)).collect())
                .unwrap();
        let mut uppers = Vec::new();
        for m in [51, 201, 801] {
            let xs = uniform(-10.0, 10.0, m).unwrap();
            let p = EulerianPair::from_velocity(xs.clone(), xs.iter().map(|&x| u(x)).collect())
                .unwrap();
            uppers.push(
                d_eulerian(&p, &target, 800, None, &OptimizerConfig::default())
                    .unwrap()
                    .upper,
            );
        }
        assert!(uppers[1] < uppers[0] && uppers[2] < uppers[1], "{uppers:?}");
    }
}
