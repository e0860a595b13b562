//! Truncated quasi-periodic trial states on the full lattice.
//!
//! A `θ`-quasi-periodic function satisfies `u(x + m) = e^{−iθ·m} u(x)` for
//! `m ∈ Nℤ^d`; it is fixed by its cell vector `u₀`. Truncating it to the
//! `(2n+1)^d` cells with indices in `[−n, n]^d` gives a finitely supported
//! state whose Rayleigh quotient converges to the fiber quotient at `θ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet;
use crate::linalg::{self, CVector};
use crate::model::presets::{preset_model, PresetParams};
use crate::model::{HoppingOperator, SingleCellPotential};
use crate::verification::fit::linear_fit;

/// One quasi-periodic piece `weight · ũ` of a trial state.
#[derive(Clone, Debug)]
pub struct QuasiPeriodicComponent {
    pub weight: Complex64,
    pub theta: Vec<f64>,
    pub cell_vector: CVector,
}

/// `⟨u, H_{q,ε} u⟩` and `‖u‖²` for the truncation to `[−n, n]^d` cells of a
/// sum of quasi-periodic components, by direct application of the hopping
/// table. `H_{q,ε} = H₀ + εq Σ_c V^□(· − Nc)`.
pub fn truncated_quadratic_form(
    h: &HoppingOperator,
    v: &SingleCellPotential,
    coupling: f64,
    components: &[QuasiPeriodicComponent],
    n: usize,
) -> (f64, f64) {
    let g = h.geometry();
    let d = g.dimension();
    let period = g.period() as i64;
    let size = g.cell_size();
    let side = 2 * n as i64 + 1;
    let total = (side as usize).pow(d as u32);
    let entries: Vec<_> = h
        .entries()
        .map(|(key, amp)| {
            let shift: Vec<i64> = key.m.iter().map(|m| m / period).collect();
            (key.k, key.k_prime, shift, *amp)
        })
        .collect();

    let value_at = |cell: &[i64]| -> Option<Vec<Complex64>> {
        if cell.iter().any(|c| c.unsigned_abs() as usize > n) {
            return None;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        for comp in components {
            let phase: f64 = comp
                .theta
                .iter()
                .zip(cell)
                .map(|(t, c)| t * (period * c) as f64)
                .sum();
            let w = comp.weight * Complex64::from_polar(1.0, -phase);
            for (o, u) in out.iter_mut().zip(comp.cell_vector.iter()) {
                *o += w * u;
            }
        }
        Some(out)
    };

    let mut energy = 0.0;
    let mut norm_sq = 0.0;
    let mut cell = vec![0i64; d];
    let mut neighbour = vec![0i64; d];
    for idx in 0..total {
        let mut rest = idx as i64;
        for c in cell.iter_mut().rev() {
            *c = rest % side - n as i64;
            rest /= side;
        }
        let u = value_at(&cell).expect("cell inside the box");
        norm_sq += u.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, k_prime, shift, amp) in &entries {
            for ((nb, c), s) in neighbour.iter_mut().zip(&cell).zip(shift) {
                *nb = c + s;
            }
            if let Some(w) = value_at(&neighbour) {
                acc += u[*k].conj() * amp * w[*k_prime];
            }
        }
        if coupling != 0.0 {
            let uv = CVector::from_vec(u);
            acc += uv.dotc(&(v.matrix() * &uv)) * coupling;
        }
        energy += acc.re;
    }
    (energy, norm_sq)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayleighRow {
    pub n: usize,
    pub quotient: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiperiodicReport {
    pub theta: Vec<f64>,
    pub q: f64,
    pub epsilon: f64,
    /// `⟨u₀, H^□_{q,ε}(θ) u₀⟩ / ‖u₀‖²`.
    pub fiber_value: f64,
    pub rows: Vec<RayleighRow>,
    /// Log-log slope of the residual against `n`; `None` if fewer than two
    /// residuals are non-zero.
    pub slope: Option<f64>,
    /// `C` in `residual ≈ C/n`, the largest `n·residual` observed.
    pub constant: f64,
}

/// Rayleigh quotients of the truncations of the `θ`-quasi-periodic extension
/// of `u0`, compared with the fiber quotient.
pub fn quasiperiodic_rayleigh(
    h: &HoppingOperator,
    v: &SingleCellPotential,
    q: f64,
    epsilon: f64,
    theta: &[f64],
    u0: &CVector,
    n_list: &[usize],
) -> Result<QuasiperiodicReport> {
    if u0.norm() == 0.0 {
        return Err(Error::Config("cell vector must be non-zero".into()));
    }
    let fiber =
        floquet::build_floquet(h, theta).into_matrix() + v.matrix().map(|z| z * (epsilon * q));
    let fiber_value = linalg::rayleigh_quotient(&fiber, u0);
    let comp = [QuasiPeriodicComponent {
        weight: Complex64::new(1.0, 0.0),
        theta: theta.to_vec(),
        cell_vector: u0.clone(),
    }];
    let rows: Vec<RayleighRow> = n_list
        .iter()
        .map(|&n| {
            let (e, norm) = truncated_quadratic_form(h, v, epsilon * q, &comp, n);
            let quotient = e / norm;
            RayleighRow {
                n,
                quotient,
                residual: (quotient - fiber_value).abs(),
            }
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.residual > 0.0 && r.n > 0)
        .map(|r| ((r.n as f64).ln(), r.residual.ln()))
        .unzip();
    let slope = (x.len() >= 2).then(|| linear_fit(&x, &y).0);
    let constant = rows
        .iter()
        .map(|r| r.n as f64 * r.residual)
        .fold(0.0, f64::max);
    Ok(QuasiperiodicReport {
        theta: theta.to_vec(),
        q,
        epsilon,
        fiber_value,
        rows,
        slope,
        constant,
    })
}

/// `ψ₀(θ) = (e^{−iθ}, 1, e^{iθ})/√3` on the quartic cell `{−1, 0, 1}`.
///
/// It is the ground state of `H₀^□(−θ)` in this crate's sign convention, so
/// its quasi-periodic extension uses the Floquet parameter `−θ` and is the
/// plane wave `e^{iθx}/√3`.
pub fn quartic_ground_state(theta: f64) -> CVector {
    let s = 1.0 / 3f64.sqrt();
    CVector::from_vec(vec![
        Complex64::from_polar(s, -theta),
        Complex64::new(s, 0.0),
        Complex64::from_polar(s, theta),
    ])
}

/// `E₀(θ) = (2 − 2cos θ)²`.
pub fn quartic_band(theta: f64) -> f64 {
    (2.0 - 2.0 * theta.cos()).powi(2)
}

/// Per-cell potential cross term `⟨V^□ψ₀(0), ψ₀(t)⟩`.
pub fn quartic_cross_term(t: f64) -> Complex64 {
    let model = preset_model("quartic", &PresetParams::default()).expect("quartic preset");
    let a = model.potential.matrix() * quartic_ground_state(0.0);
    a.dotc(&quartic_ground_state(t))
}

/// `K` in the adaptive truncation `n = ⌈K ε^{−(1+2ξ)}⌉`.
///
/// The boundary error of the truncated constant state is `(4/3)/(2n+1)`;
/// keeping it below a tenth of `ε^{1+2ξ}` needs `2n + 1 ≥ (40/3) ε^{−(1+2ξ)}`.
pub const QUARTIC_TRUNCATION_K: f64 = 20.0 / 3.0;

pub fn quartic_truncation_error(n: usize) -> f64 {
    (4.0 / 3.0) / (2 * n + 1) as f64
}

pub fn quartic_adaptive_n(epsilon: f64, xi: f64) -> usize {
    (QUARTIC_TRUNCATION_K * epsilon.powf(-(1.0 + 2.0 * xi))).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuarticTrial {
    pub epsilon: f64,
    pub xi: f64,
    pub n: usize,
    /// `⟨H_{1,ε} uₙ, uₙ⟩ / ‖uₙ‖²`.
    pub value: f64,
    /// `−(1/6) ε^{1+2ξ}`.
    pub bound: f64,
    pub satisfied: bool,
    pub truncation_error: f64,
}

/// Energy of `uₙ = fₙ(0) + ε^ξ fₙ(ε^ξ)` for the quartic model with `q = s₊`,
/// where `fₙ(θ)` truncates the quasi-periodic extension of `ψ₀(θ)`.
///
/// Without an explicit `n` the truncation is chosen adaptively. An explicit
/// `n` whose boundary error exceeds `ε^{1+2ξ}/10` is rejected.
pub fn quartic_trial_energy(epsilon: f64, xi: f64, n: Option<usize>) -> Result<QuarticTrial> {
    if xi <= 0.25 {
        return Err(Error::Config(format!("xi must exceed 1/4, got {xi}")));
    }
    if epsilon < 0.0 {
        return Err(Error::Config(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let target = epsilon.powf(1.0 + 2.0 * xi);
    let n = match n {
        Some(n) => {
            let error = quartic_truncation_error(n);
            if epsilon > 0.0 && error > target / 10.0 {
                return Err(Error::TruncationTooCoarse {
                    n,
                    error,
                    budget: target / 10.0,
                    required: quartic_adaptive_n(epsilon, xi),
                });
            }
            n
        }
        None if epsilon > 0.0 => quartic_adaptive_n(epsilon, xi),
        None => return Err(Error::Config("epsilon = 0 needs an explicit n".into())),
    };
    let model = preset_model("quartic", &PresetParams::default())?;
    let q = model.disorder.s_plus();
    let t = epsilon.powf(xi);
    let period = 2.0 * PI / 3.0;
    let components = [
        QuasiPeriodicComponent {
            weight: Complex64::new(1.0, 0.0),
            theta: vec![0.0],
            cell_vector: quartic_ground_state(0.0),
        },
        QuasiPeriodicComponent {
            weight: Complex64::new(t, 0.0),
            theta: vec![(-t).rem_euclid(period)],
            cell_vector: quartic_ground_state(t),
        },
    ];
    let (energy, norm_sq) = truncated_quadratic_form(
        &model.hopping,
        &model.potential,
        epsilon * q,
        &components,
        n,
    );
    let value = energy / norm_sq;
    let bound = -target / 6.0;
    Ok(QuarticTrial {
        epsilon,
        xi,
        n,
        value,
        bound,
        satisfied: value <= bound,
        truncation_error: quartic_truncation_error(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn model(name: &str) -> Model {
        preset_model(name, &PresetParams::default()).unwrap()
    }

    #[test]
    fn anderson_truncated_constant() {
        let m = model("anderson");
        let u0 = CVector::from_element(1, Complex64::new(1.0, 0.0));
        let rep = quasiperiodic_rayleigh(
            &m.hopping,
            &m.potential,
            0.0,
            0.0,
            &[0.0],
            &u0,
            &[8, 16, 32],
        )
        .unwrap();
        assert_eq!(rep.fiber_value, 0.0);
        for r in &rep.rows {
            // two broken bonds over 2n+1 sites
            assert!((r.quotient - 2.0 / (2 * r.n + 1) as f64).abs() < 1e-14);
        }
        assert!((rep.slope.unwrap() + 1.0).abs() < 0.1);
    }

    #[test]
    fn quasi_periodic_phase_matches_fiber() {
        // the plane wave e^{-iθx} has exact quotient 2 - 2cos θ away from the edges
        let m = model("anderson");
        let u0 = CVector::from_element(1, Complex64::new(1.0, 0.0));
        let rep = quasiperiodic_rayleigh(
            &m.hopping,
            &m.potential,
            1.0,
            0.1,
            &[0.7],
            &u0,
            &[64, 128, 256],
        )
        .unwrap();
        assert!((rep.fiber_value - (2.0 - 2.0 * 0.7f64.cos() + 0.1)).abs() < 1e-14);
        assert!(rep.rows.windows(2).all(|w| w[1].residual < w[0].residual));
        assert!(rep.rows[2].residual < 1e-2);
    }

    #[test]
    fn dipole_limit_is_fiber_value() {
        let m = model("dipole");
        let s = 0.5f64.sqrt();
        let u0 = CVector::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        let rep = quasiperiodic_rayleigh(
            &m.hopping,
            &m.potential,
            1.0,
            0.01,
            &[0.0],
            &u0,
            &[8, 64, 512],
        )
        .unwrap();
        assert!(rep.fiber_value.abs() < 1e-15);
        assert!(rep.rows[2].residual < 2e-3);
    }

    #[test]
    fn quartic_ground_state_convention() {
        let m = model("quartic");
        for t in [0.0, 0.1, 0.5, 1.0] {
            let f = floquet::build_floquet(&m.hopping, &[-t]).into_matrix();
            let psi = quartic_ground_state(t);
            assert!(linalg::residual(&f, &psi, quartic_band(t)) < 1e-13);
            assert!((linalg::lambda_min(&f).unwrap() - quartic_band(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_term_closed_form() {
        for t in [1e-3, 0.01, 0.3] {
            let expected =
                (-Complex64::from_polar(1.0, -t) + 2.0 - Complex64::from_polar(1.0, t)) / 6.0;
            let got = quartic_cross_term(t);
            assert!((got - expected).norm() < 1e-15);
            // the expression equals (1 − cos t)/3 ≥ 0
            assert!((got.re - (1.0 - t.cos()) / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quartic_truncation_budget() {
        assert!(matches!(
            quartic_trial_energy(1e-3, 0.3, Some(10_000)),
            Err(Error::TruncationTooCoarse { .. })
        ));
        assert!(matches!(
            quartic_trial_energy(1e-2, 0.2, None),
            Err(Error::Config(_))
        ));
        let n = quartic_adaptive_n(1e-2, 0.3);
        assert!(quartic_truncation_error(n) <= 1e-2f64.powf(1.6) / 10.0);
    }

    #[test]
    fn quartic_zero_coupling_tends_to_zero() {
        let a = quartic_trial_energy(0.0, 0.3, Some(100)).unwrap().value;
        let b = quartic_trial_energy(0.0, 0.3, Some(1000)).unwrap().value;
        assert!(a > 0.0 && b > 0.0 && b < a / 5.0);
    }
}
