//! Two-sided dispersion bound for the lowest band of `-Δ + W`:
//! `(a₋/a₊)² D(θ) ≤ E₀(θ) − E₀(0) ≤ D(θ)` with `a₋`, `a₊` the smallest and
//! largest entries of the positive `θ = 0` ground state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet;
use crate::linalg;
use crate::model::HoppingOperator;
use crate::perturbation::perron_frobenius_check;

/// Choice of the dispersion factor `D(θ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispersionFactor {
    /// `2 Σᵢ (1 − cos θ̃ᵢ)` with `θ̃` the representative of `θ` in
    /// `[−π/N, π/N)`: the free Laplacian's lowest band, zero at `θ = 0`.
    #[default]
    Reduced,
    /// `2d − Σᵢ cos θᵢ` as printed in the original statement. It does not
    /// vanish at `θ = 0`.
    Literal,
}

impl DispersionFactor {
    pub fn eval(&self, theta: &[f64], period: usize) -> f64 {
        match self {
            DispersionFactor::Reduced => {
                let zone = 2.0 * PI / period as f64;
                theta
                    .iter()
                    .map(|t| {
                        let r = (t + zone / 2.0).rem_euclid(zone) - zone / 2.0;
                        2.0 * (1.0 - r.cos())
                    })
                    .sum()
            }
            DispersionFactor::Literal => {
                2.0 * theta.len() as f64 - theta.iter().map(|t| t.cos()).sum::<f64>()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichPoint {
    pub theta: Vec<f64>,
    pub delta_e: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KirschSimonReport {
    pub factor: DispersionFactor,
    pub a_minus: f64,
    pub a_plus: f64,
    pub points: Vec<SandwichPoint>,
    pub lower_violations: usize,
    pub upper_violations: usize,
}

impl KirschSimonReport {
    pub fn passed(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0
    }
}

/// Uniform grid of `per_dim^d` points on `[0, 2π/N)^d`.
pub fn uniform_theta_grid(dimension: usize, period: usize, per_dim: usize) -> Vec<Vec<f64>> {
    let step = 2.0 * PI / period as f64 / per_dim as f64;
    let mut out = vec![Vec::new()];
    for _ in 0..dimension {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..per_dim).map(move |j| {
                    let mut q = p.clone();
                    q.push(j as f64 * step);
                    q
                })
            })
            .collect();
    }
    out
}

/// Evaluates both sides of the sandwich on `theta_grid`. Violations beyond
/// `1e-12·(1 + D(θ))` are counted.
pub fn kirsch_simon_sandwich(
    h: &HoppingOperator,
    theta_grid: &[Vec<f64>],
    factor: DispersionFactor,
) -> Result<KirschSimonReport> {
    let pf = perron_frobenius_check(h)?;
    if !pf.applicable {
        return Err(Error::Inapplicable(pf.detail));
    }
    if !pf.passed() {
        return Err(Error::Inapplicable(format!(
            "no strictly positive simple ground state at theta = 0 ({})",
            pf.detail
        )));
    }
    let g = h.geometry();
    let zero = vec![0.0; g.dimension()];
    let e00 = linalg::lambda_min(floquet::build_floquet(h, &zero).matrix())?;
    let ratio = (pf.min_entry / pf.max_entry).powi(2);
    let mut points = Vec::with_capacity(theta_grid.len());
    for theta in theta_grid {
        let delta_e = linalg::lambda_min(floquet::build_floquet(h, theta).matrix())? - e00;
        let dispersion = factor.eval(theta, g.period());
        let slack = 1e-12 * (1.0 + dispersion.abs());
        let (lower, upper) = (ratio * dispersion, dispersion);
        points.push(SandwichPoint {
            theta: theta.clone(),
            delta_e,
            lower,
            upper,
            lower_ok: delta_e >= lower - slack,
            upper_ok: delta_e <= upper + slack,
        });
    }
    Ok(KirschSimonReport {
        factor,
        a_minus: pf.min_entry,
        a_plus: pf.max_entry,
        lower_violations: points.iter().filter(|p| !p.lower_ok).count(),
        upper_violations: points.iter().filter(|p| !p.upper_ok).count(),
        points,
    })
}
