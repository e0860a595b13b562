//! Periodic-coupling fiber energies `min_q λ_min(H₀^□(θ) + εqV^□)` and the
//! upper/lower sandwich around the predicted edge.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet;
use crate::linalg::{self, CMatrix};
use crate::model::{DisorderSupport, HoppingOperator, Model, SingleCellPotential};
use crate::perturbation::{edge_bound, EdgeCase, EdgeCoefficients};
use crate::verification::fit::loglog_slope;

/// Interior couplings probed by the concavity guard.
const GUARD_POINTS: usize = 9;
const GUARD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberMinResult {
    pub epsilon: f64,
    pub theta: Vec<f64>,
    pub q_star: f64,
    pub value: f64,
}

fn coupled(fiber: &CMatrix, v: &SingleCellPotential, eq: f64) -> CMatrix {
    fiber + v.matrix().map(|z| z * eq)
}

/// Minimizes the lowest fiber eigenvalue over constant couplings
/// `q ∈ [s₋, s₊]`. Only the endpoints are candidates since `q ↦ λ_min` is
/// concave; a 9-point interior grid guards that assumption.
pub fn fiber_min_over_q(
    h: &HoppingOperator,
    v: &SingleCellPotential,
    s: &DisorderSupport,
    theta: &[f64],
    epsilon: f64,
) -> Result<FiberMinResult> {
    let fiber = floquet::build_floquet(h, theta).into_matrix();
    let lam = |q: f64| linalg::lambda_min(&coupled(&fiber, v, epsilon * q));
    let (lo, hi) = (lam(s.s_minus())?, lam(s.s_plus())?);
    let (q_star, value) = if lo <= hi {
        (s.s_minus(), lo)
    } else {
        (s.s_plus(), hi)
    };
    let width = s.s_plus() - s.s_minus();
    for j in 1..=GUARD_POINTS {
        let q = s.s_minus() + width * j as f64 / (GUARD_POINTS + 1) as f64;
        let interior = lam(q)?;
        if interior < value - GUARD_TOL {
            return Err(Error::ConcavityGuard {
                q,
                interior,
                endpoint: value,
            });
        }
    }
    Ok(FiberMinResult {
        epsilon,
        theta: theta.to_vec(),
        q_star,
        value,
    })
}

pub fn fiber_min_for_model(model: &Model, theta: &[f64], epsilon: f64) -> Result<FiberMinResult> {
    fiber_min_over_q(
        &model.hopping,
        &model.potential,
        &model.disorder,
        theta,
        epsilon,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichRow {
    pub epsilon: f64,
    pub value: f64,
    pub q_star: f64,
    pub predicted: f64,
    pub upper_slack: f64,
    pub upper_ok: bool,
    /// `max(0, predicted − value) / ε^k` with `k` the lower-bound order.
    pub lower_constant: f64,
    /// Rounding-level contribution to `lower_constant`.
    pub lower_noise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub case: EdgeCase,
    /// Order `k` of the lower-bound remainder: 3/2, 3, or 0 for no motion.
    pub remainder_order: f64,
    pub rows: Vec<SandwichRow>,
    /// Constants at the smallest and second smallest `ε`.
    pub constant_smallest: Option<f64>,
    pub constant_second: Option<f64>,
    /// The constant does not grow by more than 20% towards smaller `ε`.
    pub constant_stable: Option<bool>,
    /// No-motion case: every `ε ≤ 1e-2` has `value ≥ -1e-12`.
    pub no_motion_ok: Option<bool>,
    pub upper_ok: bool,
    /// Log-log slope of `|value − predicted|` against `ε`.
    pub residual_slope: Option<f64>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.upper_ok && self.constant_stable.unwrap_or(true) && self.no_motion_ok.unwrap_or(true)
    }
}

/// Compares fiber minima over a list of couplings with the predicted edge:
/// the upper bound `value ≤ predicted + slack(ε)` and the lower bound
/// `value ≥ predicted − Cε^k` with `C` read off the two smallest `ε`.
///
/// The quadratic-case slack is `(s·‖V‖)³ ε³ / g²`, the size of a third-order
/// perturbative correction.
pub fn fiber_bound_sandwich(
    model: &Model,
    coeffs: &EdgeCoefficients,
    epsilons: &[f64],
) -> Result<SandwichReport> {
    let mut eps = epsilons.to_vec();
    eps.sort_by(f64::total_cmp);
    let fiber = floquet::build_floquet(&model.hopping, &coeffs.theta).into_matrix();
    let f_norm = linalg::hermitian_norm(&fiber)?;
    let sv = model.disorder.s_max() * model.potential.norm();
    let order = match coeffs.case {
        EdgeCase::Linear => 1.5,
        EdgeCase::Quadratic => 3.0,
        EdgeCase::NoMotion => 0.0,
    };
    let third_order = match coeffs.gap {
        Some(g) => sv.powi(3) / (g * g),
        None => 0.0,
    };

    let mut rows = Vec::with_capacity(eps.len());
    for &e in &eps {
        let r = fiber_min_for_model(model, &coeffs.theta, e)?;
        let predicted = edge_bound(coeffs, e).value;
        let rounding = 64.0 * f64::EPSILON * (1.0 + f_norm + e * sv);
        let upper_slack = match coeffs.case {
            EdgeCase::Quadratic => rounding + third_order * e.powi(3),
            _ => rounding,
        };
        let scale = if order > 0.0 { e.powf(order) } else { 1.0 };
        rows.push(SandwichRow {
            epsilon: e,
            value: r.value,
            q_star: r.q_star,
            predicted,
            upper_slack,
            upper_ok: r.value <= predicted + upper_slack,
            lower_constant: (predicted - r.value).max(0.0) / scale,
            lower_noise: rounding / scale,
        });
    }

    let (constant_smallest, constant_second, constant_stable) =
        if coeffs.case != EdgeCase::NoMotion && rows.len() >= 2 {
            let (a, b) = (&rows[0], &rows[1]);
            let stable = a.lower_constant <= 1.2 * b.lower_constant + a.lower_noise;
            (Some(a.lower_constant), Some(b.lower_constant), Some(stable))
        } else {
            (None, None, None)
        };
    let no_motion_ok = (coeffs.case == EdgeCase::NoMotion).then(|| {
        rows.iter()
            .filter(|r| r.epsilon <= 1e-2)
            .all(|r| r.value >= -1e-12)
    });
    let residuals: Vec<f64> = rows.iter().map(|r| (r.value - r.predicted).abs()).collect();
    let residual_slope = loglog_slope(&eps, &residuals);
    Ok(SandwichReport {
        case: coeffs.case,
        remainder_order: order,
        upper_ok: rows.iter().all(|r| r.upper_ok),
        rows,
        constant_smallest,
        constant_second,
        constant_stable,
        no_motion_ok,
        residual_slope,
    })
}
