//! Right-hand side for the generalized hyperelastic-rod equation
//! `u_t - u_xxt + f(u)_x - f(u)_xxx + (g(u) + f''(u) u_x^2 / 2)_x = 0`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::nonlocal::{check_y_monotone, convolve_pq};
use super::state::{LagrangianState, Tangent};
use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficient functions `f` (through `f'` and `f''`) and `g`.
#[derive(Clone)]
pub struct HyperelasticCoeffs {
    pub name: String,
    pub f_prime: ScalarFn,
    pub f_second: ScalarFn,
    pub g: ScalarFn,
    /// Closed form of `G(v) = int_0^v (2 g(z) + f''(z) z^2) dz`, if known.
    pub g_integral: Option<ScalarFn>,
}

impl fmt::Debug for HyperelasticCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HyperelasticCoeffs")
            .field("name", &self.name)
            .field("closed_form_g", &self.g_integral.is_some())
            .finish()
    }
}

impl HyperelasticCoeffs {
    pub fn new(
        name: impl Into<String>,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f_prime: Arc::new(f_prime),
            f_second: Arc::new(f_second),
            g: Arc::new(g),
            g_integral: None,
        }
    }

    pub fn with_g_integral(mut self, big_g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g_integral = Some(Arc::new(big_g));
        self
    }

    /// `f = u^2/2`, `g = kappa u + u^2`: the Camassa-Holm equation with dispersion `kappa`.
    pub fn camassa_holm(kappa: f64) -> Self {
        Self::new("ch", |u| u, |_| 1.0, move |u| kappa * u + u * u)
    }

    /// `f = gamma u^2/2`, `g = (3 - gamma) u^2 / 2`: the hyperelastic-rod wave equation.
    pub fn hyperelastic_rod(gamma: f64) -> Self {
        Self::new(
            format!("rod(gamma={gamma})"),
            move |u| gamma * u,
            move |_| gamma,
            move |u| 0.5 * (3.0 - gamma) * u * u,
        )
    }

    /// `G(v)`, by closed form when supplied, else 16-point Gauss-Legendre on `[0, v]`.
    pub fn big_g(&self, v: f64) -> f64 {
        if let Some(gi) = &self.g_integral {
            return gi(v);
        }
        if v == 0.0 {
            return 0.0;
        }
        let (nodes, weights) = gauss_legendre_16();
        let half = 0.5 * v;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let z = half * (x + 1.0);
            s += w * (2.0 * (self.g)(z) + (self.f_second)(z) * z * z);
        }
        half * s
    }

    /// Errors when `f''` takes both signs on `[lo, hi]` (sampled at 65 points
    /// plus the supplied values).
    pub fn check_convexity(&self, lo: f64, hi: f64, extra: &[f64]) -> Result<()> {
        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut probe = |v: f64| {
            let s = (self.f_second)(v);
            mn = mn.min(s);
            mx = mx.max(s);
        };
        for k in 0..=64 {
            probe(lo + (hi - lo) * k as f64 / 64.0);
        }
        extra.iter().for_each(|&v| probe(v));
        if mn < 0.0 && mx > 0.0 {
            return Err(Error::CoefficientSignChange { lo, hi });
        }
        Ok(())
    }
}

/// Nodes and weights of the 16-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static RULE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Right-hand side `(f'(U), -Q, G(U) - 2 P U)` of the rod system, with `P` and
/// `Q` the rod operators (prefactor 1/2, source
/// `(g(U) - f''(U) U^2 / 2) y_xi + f''(U) H_xi / 2`).
pub fn rhs_hyperelastic(x: &LagrangianState, coeffs: &HyperelasticCoeffs) -> Result<Tangent> {
    check_y_monotone(x)?;
    let u = &x.u_lag;
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    coeffs.check_convexity(lo, hi, u)?;

    let fpp: Vec<f64> = u.iter().map(|&v| (coeffs.f_second)(v)).collect();
    let a: Vec<f64> = u
        .iter()
        .zip(&fpp)
        .map(|(&v, &s)| (coeffs.g)(v) - 0.5 * s * v * v)
        .collect();
    let y = x.y();
    let hh = &x.h_cum;
    let weights: Vec<f64> = (0..x.n() - 1)
        .map(|c| {
            let a_avg = 0.5 * (a[c] + a[c + 1]);
            let s_avg = 0.5 * (fpp[c] + fpp[c + 1]);
            a_avg * (y[c + 1] - y[c]) + 0.5 * (s_avg * (hh[c + 1] - hh[c]))
        })
        .collect();
    let (p, q) = convolve_pq(&y, &weights, 0.5);
    Ok(Tangent {
        d_zeta: u.iter().map(|&v| (coeffs.f_prime)(v)).collect(),
        d_u: q.iter().map(|v| -v).collect(),
        d_h: u
            .iter()
            .zip(&p)
            .map(|(&v, &pi)| coeffs.big_g(v) - 2.0 * pi * v)
            .collect(),
    })
}
