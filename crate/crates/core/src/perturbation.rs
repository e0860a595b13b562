//! First- and second-order edge coefficients from degenerate perturbation
//! theory on the ground eigenspace `𝒱₀` of a fiber at a band minimizer.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{self, GroundSpaceData};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::{DisorderSupport, HoppingOperator, Model, Regime, SingleCellPotential};
use crate::tolerance::Tolerances;

/// `A_ij = ⟨ψ_i, V^□ψ_j⟩` on the ground space, diagonalized.
#[derive(Clone, Debug)]
pub struct PerturbationMatrix {
    pub a: CMatrix,
    /// Eigenvalues of `A`, ascending.
    pub p_values: Vec<f64>,
    /// Ground basis rotated so that `⟨V^□ψ_i, ψ_j⟩ = P_i δ_ij`, phase-fixed.
    pub basis: CMatrix,
}

impl PerturbationMatrix {
    pub fn p1(&self) -> f64 {
        self.p_values[0]
    }

    pub fn p_max(&self) -> f64 {
        self.p_values[self.p_values.len() - 1]
    }

    /// Number of `P_i` within `tol` of `P₁`, i.e. `dim 𝒱₀₁`.
    pub fn v01_dim(&self, tol: f64) -> usize {
        let p1 = self.p1();
        self.p_values.iter().take_while(|&&p| p <= p1 + tol).count()
    }

    /// Largest deviation from `⟨V^□ψ_i, ψ_j⟩ = P_i δ_ij` and
    /// `⟨ψ_i, ψ_j⟩ = δ_ij`.
    pub fn orthogonality_defect(&self, v: &SingleCellPotential) -> f64 {
        let p = self.p_values.len();
        let gram = self.basis.adjoint() * &self.basis - CMatrix::identity(p, p);
        let diag = linalg::real_diagonal(&self.p_values);
        let proj = self.basis.adjoint() * v.matrix() * &self.basis - diag;
        linalg::max_abs(&gram).max(linalg::max_abs(&proj))
    }
}

pub fn perturbation_matrix(
    g: &GroundSpaceData,
    v: &SingleCellPotential,
) -> Result<PerturbationMatrix> {
    let a = linalg::hermitian_part(&(g.basis.adjoint() * v.matrix() * &g.basis));
    let eig = linalg::eigh(&a)?;
    let mut basis = &g.basis * &eig.vectors;
    linalg::fix_column_phases(&mut basis);
    Ok(PerturbationMatrix {
        a,
        p_values: eig.values,
        basis,
    })
}

/// `A₁ = min(s₊P₁, s₋P_p)`.
pub fn coeff_a1(pm: &PerturbationMatrix, s: &DisorderSupport) -> Result<f64> {
    if s.regime() != Regime::SignChanging {
        return Err(Error::WrongRegime {
            expected: "SignChanging",
        });
    }
    Ok((s.s_plus() * pm.p1()).min(s.s_minus() * pm.p_max()))
}

/// Which subspace of `𝒱₀` the second-order supremum runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Subspace {
    Full,
    /// The `P₁`-eigenspace of `A`, clustered with the given tolerance.
    V01,
}

fn subspace_basis(pm: &PerturbationMatrix, subspace: Subspace, tol_deg: f64) -> CMatrix {
    match subspace {
        Subspace::Full => pm.basis.clone(),
        Subspace::V01 => pm.basis.columns(0, pm.v01_dim(tol_deg)).into_owned(),
    }
}

fn check_gap(g: &GroundSpaceData) -> Result<Option<f64>> {
    match g.gap {
        None => Ok(None),
        Some(gap) if gap <= g.tol_deg => Err(Error::GapTooSmall { gap }),
        Some(gap) => Ok(Some(gap)),
    }
}

/// Clustering tolerance for the eigenvalues of `A`.
fn a_tolerance(v: &SingleCellPotential, tol: &Tolerances) -> f64 {
    tol.degeneracy(v.norm())
}

/// `A₂ = −c²·λ_max(B* V R V B)` with `R` the inverse of `H₀^□(θ) − E₀` on
/// `𝒱₀^⊥` (zero on `𝒱₀`) and `B` spanning the requested subspace.
pub fn coeff_a2(
    g: &GroundSpaceData,
    pm: &PerturbationMatrix,
    v: &SingleCellPotential,
    s: &DisorderSupport,
    subspace: Subspace,
    tol: &Tolerances,
) -> Result<f64> {
    if check_gap(g)?.is_none() {
        return Ok(0.0);
    }
    let n = g.cell_size();
    let e0 = g.ground_energy();
    let mut r = CMatrix::zeros(n, n);
    for i in g.p..n {
        let col = g.eigenvectors.column(i);
        let w = 1.0 / (g.eigenvalues[i] - e0);
        r += (col * col.adjoint()).map(|z| z * w);
    }
    let b = subspace_basis(pm, subspace, a_tolerance(v, tol));
    let vb = v.matrix() * &b;
    let m = linalg::hermitian_part(&(vb.adjoint() * r * &vb));
    let top = *linalg::eigvalsh(&m)?.last().unwrap_or(&0.0);
    Ok(-s.second_order_weight() * top.max(0.0))
}

/// Conjugate gradients for `Q(F − E₀)Q x = b` with `b ∈ range Q`.
fn solve_excited(f: &CMatrix, e0: f64, ground: &CMatrix, b: &CVector) -> Result<CVector> {
    let project = |x: &CVector| -> CVector { x - ground * (ground.adjoint() * x) };
    let apply = |x: &CVector| -> CVector { project(&(f * x - x.map(|z| z * e0))) };
    let b = project(b);
    let b_norm = b.norm();
    let mut x = CVector::zeros(b.len());
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rr = r.norm_squared();
    let max_iter = 20 * b.len() + 20;
    for _ in 0..max_iter {
        let ad = apply(&d);
        let alpha = rr / d.dotc(&ad).re;
        x += d.map(|z| z * alpha);
        r -= ad.map(|z| z * alpha);
        // re-project to stop drift back into the ground space
        r = project(&r);
        let rr_new = r.norm_squared();
        if rr_new.sqrt() <= 1e-15 * b_norm {
            return Ok(project(&x));
        }
        let beta = rr_new / rr;
        d = &r + d.map(|z| z * beta);
        rr = rr_new;
    }
    let res = (apply(&x) - &b).norm();
    if res <= 1e-12 * b_norm {
        Ok(project(&x))
    } else {
        Err(Error::IterativeSolver {
            residual: res,
            restarts: 0,
        })
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let norm = v.norm();
        if norm > 1e-3 {
            return v.map(|z| z / norm);
        }
    }
}

/// Estimates the double supremum `sup_ψ sup_φ |⟨ψ,V^□φ⟩|² / ⟨H₀^□(θ)φ,φ⟩`
/// by alternating maximization and returns `−c²` times it.
///
/// For fixed `ψ` the best `φ` solves `Q(H₀^□(θ) − E₀)Q φ = QV^□ψ`, found by
/// conjugate gradients; for fixed `φ` the best `ψ` is the normalized
/// projection of `V^□φ` onto the subspace.
#[allow(clippy::too_many_arguments)]
pub fn coeff_a2_variational(
    g: &GroundSpaceData,
    pm: &PerturbationMatrix,
    v: &SingleCellPotential,
    s: &DisorderSupport,
    subspace: Subspace,
    tol: &Tolerances,
    iters: usize,
    seeds: usize,
    seed: u64,
) -> Result<f64> {
    if check_gap(g)?.is_none() {
        return Ok(0.0);
    }
    let b = subspace_basis(pm, subspace, a_tolerance(v, tol));
    let e0 = g.ground_energy();
    let vm = v.matrix();

    let run = |start: usize| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(start as u64);
        // coordinates of ψ in the subspace basis
        let mut c = random_unit(&mut rng, b.ncols());
        let mut value = 0.0;
        for _ in 0..iters {
            let psi = &b * &c;
            let phi = solve_excited(&g.fiber, e0, &g.basis, &(vm * &psi))?;
            let vphi = vm * &phi;
            let new_value = psi.dotc(&vphi).re;
            let next = b.adjoint() * vphi;
            let norm = next.norm();
            if norm == 0.0 {
                return Ok(0.0);
            }
            c = next.map(|z| z / norm);
            if (new_value - value).abs() <= 1e-15 * (1.0 + new_value.abs()) {
                return Ok(new_value);
            }
            value = new_value;
        }
        Err(Error::VariationalNotConverged {
            iters,
            best: -s.second_order_weight() * value,
        })
    };

    let values = (0..seeds.max(1)).map(run).collect::<Result<Vec<_>>>()?;
    let best = values.into_iter().fold(0.0_f64, f64::max);
    Ok(-s.second_order_weight() * best)
}

/// `A′₁`, `A′₂` and `dim 𝒱₀₁` for positive couplings.
pub fn coeffs_positive_regime(
    g: &GroundSpaceData,
    pm: &PerturbationMatrix,
    v: &SingleCellPotential,
    s: &DisorderSupport,
    tol: &Tolerances,
) -> Result<(f64, f64, usize)> {
    if s.regime() != Regime::Positive {
        return Err(Error::WrongRegime {
            expected: "Positive",
        });
    }
    let p1 = pm.p1();
    let a1 = (s.s_plus() * p1).min(s.s_minus() * p1);
    let a2 = coeff_a2(g, pm, v, s, Subspace::V01, tol)?;
    Ok((a1, a2, pm.v01_dim(a_tolerance(v, tol))))
}

/// Whether `V^□ψ ≠ 0` for some ground state `ψ`.
pub fn nondegeneracy_check(g: &GroundSpaceData, v: &SingleCellPotential) -> bool {
    let vb = v.matrix() * &g.basis;
    linalg::max_abs(&vb) > 1e-8 * (1.0 + v.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeCase {
    Linear,
    Quadratic,
    NoMotion,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeCoefficients {
    pub theta: Vec<f64>,
    pub regime: Regime,
    pub p: usize,
    #[serde(rename = "P")]
    pub p_values: Vec<f64>,
    /// Sign-changing regime only.
    #[serde(rename = "A1")]
    pub a1: Option<f64>,
    #[serde(rename = "A2")]
    pub a2: Option<f64>,
    /// Positive regime only.
    #[serde(rename = "A1_prime")]
    pub a1_prime: Option<f64>,
    #[serde(rename = "A2_prime")]
    pub a2_prime: Option<f64>,
    pub case: EdgeCase,
    #[serde(rename = "V01_dim")]
    pub v01_dim: Option<usize>,
    pub nondegenerate: bool,
    pub gap: Option<f64>,
    /// Zero threshold used for the case decision.
    pub tol_case: f64,
}

impl EdgeCoefficients {
    /// First-order coefficient of the active regime.
    pub fn first_order(&self) -> f64 {
        self.a1.or(self.a1_prime).unwrap_or(0.0)
    }

    /// Second-order coefficient of the active regime.
    pub fn second_order(&self) -> f64 {
        self.a2.or(self.a2_prime).unwrap_or(0.0)
    }
}

/// Coefficients and case decision at one minimizer.
pub fn edge_coefficients(
    model: &Model,
    g: &GroundSpaceData,
    tol: &Tolerances,
) -> Result<EdgeCoefficients> {
    let v = &model.potential;
    let s = &model.disorder;
    let pm = perturbation_matrix(g, v)?;
    let tol_case = tol.case(v.norm(), s.s_max());
    let nonzero = |x: f64| x.abs() > tol_case;
    let mut out = EdgeCoefficients {
        theta: g.theta.clone(),
        regime: s.regime(),
        p: g.p,
        p_values: pm.p_values.clone(),
        a1: None,
        a2: None,
        a1_prime: None,
        a2_prime: None,
        case: EdgeCase::NoMotion,
        v01_dim: None,
        nondegenerate: nondegeneracy_check(g, v),
        gap: g.gap,
        tol_case,
    };
    match s.regime() {
        Regime::SignChanging => {
            let a1 = coeff_a1(&pm, s)?;
            let a2 = coeff_a2(g, &pm, v, s, Subspace::Full, tol)?;
            out.case = if nonzero(a1) {
                EdgeCase::Linear
            } else if nonzero(a2) {
                EdgeCase::Quadratic
            } else {
                EdgeCase::NoMotion
            };
            out.a1 = Some(a1);
            out.a2 = Some(a2);
        }
        Regime::Positive => {
            let (a1, a2, dim) = coeffs_positive_regime(g, &pm, v, s, tol)?;
            out.case = if nonzero(pm.p1()) {
                EdgeCase::Linear
            } else if nonzero(a2) {
                EdgeCase::Quadratic
            } else {
                EdgeCase::NoMotion
            };
            out.a1_prime = Some(a1);
            out.a2_prime = Some(a2);
            out.v01_dim = Some(dim);
        }
    }
    Ok(out)
}

/// Coefficients at every listed minimizer, in the given order.
pub fn edge_coefficients_all(
    model: &Model,
    thetas: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<Vec<EdgeCoefficients>> {
    thetas
        .par_iter()
        .map(|t| {
            let g = floquet::ground_space(&model.hopping, t, tol)?;
            edge_coefficients(model, &g, tol)
        })
        .collect()
}

/// Above this `ε` the expansion is reported with a warning.
pub const SMALL_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundEstimate {
    pub epsilon: f64,
    pub value: f64,
    /// The value is the leading term only; an `O(ε³)` remainder is dropped.
    pub modulo_cubic: bool,
    /// `ε` exceeds [`SMALL_EPSILON`].
    pub large_epsilon: bool,
}

/// Predicted upper bound for the bottom of the spectrum at coupling `ε`.
pub fn edge_bound(e: &EdgeCoefficients, epsilon: f64) -> BoundEstimate {
    let large_epsilon = epsilon > SMALL_EPSILON;
    if large_epsilon {
        log::warn!("epsilon = {epsilon} is outside the small-coupling range (> {SMALL_EPSILON})");
    }
    let (value, modulo_cubic) = match e.case {
        EdgeCase::Linear => (epsilon * e.first_order(), false),
        EdgeCase::Quadratic => (epsilon * epsilon * e.second_order(), true),
        EdgeCase::NoMotion => (0.0, false),
    };
    BoundEstimate {
        epsilon,
        value,
        modulo_cubic,
        large_epsilon,
    }
}

/// Index of the minimizer giving the lowest bound; ties keep the earliest
/// (lexicographically smallest) `θ`.
pub fn best_theta(coeffs: &[EdgeCoefficients], epsilon: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in coeffs.iter().enumerate() {
        let v = edge_bound(c, epsilon).value;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Number of minimizers whose bound equals the lowest one at `ε`. Values
/// above one mean [`best_theta`] broke a tie.
pub fn tied_thetas(coeffs: &[EdgeCoefficients], epsilon: f64) -> usize {
    let values: Vec<f64> = coeffs
        .iter()
        .map(|c| edge_bound(c, epsilon).value)
        .collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    values.iter().filter(|&&v| v == best).count()
}

/// The on-site background `W` if `h = -Δ + W` (nearest-neighbour Laplacian).
pub fn alloy_background(h: &HoppingOperator) -> Option<Vec<f64>> {
    let geometry = h.geometry();
    let d = geometry.dimension();
    let zero = vec![0; d];
    let w: Vec<f64> = (0..geometry.cell_size())
        .map(|k| h.coefficient(k, k, &zero).re - 2.0 * d as f64)
        .collect();
    let reference = HoppingOperator::laplacian_plus(geometry, &w).ok()?;
    let tol = 1e-13 * (1.0 + h.max_abs());
    let close = |a: &HoppingOperator, b: &HoppingOperator| {
        a.entries()
            .all(|(key, v)| (v - b.coefficient(key.k, key.k_prime, &key.m)).norm() <= tol)
    };
    (close(h, &reference) && close(&reference, h)).then_some(w)
}

pub fn is_alloy_form(h: &HoppingOperator) -> bool {
    alloy_background(h).is_some()
}

/// Minimal entry a ground state must exceed to count as strictly positive.
pub const TOL_POSITIVE: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct PFReport {
    pub applicable: bool,
    pub detail: String,
    pub simple: bool,
    pub positive: bool,
    pub p: usize,
    pub min_entry: f64,
    pub max_entry: f64,
    pub gap: Option<f64>,
    /// The phase-fixed ground state at `θ = 0`.
    pub ground_state: Vec<f64>,
}

impl PFReport {
    pub fn passed(&self) -> bool {
        self.applicable && self.simple && self.positive
    }
}

/// Checks that the `θ = 0` fiber ground state of `-Δ + W` is simple and,
/// after phase fixing, strictly positive.
pub fn perron_frobenius_check(h: &HoppingOperator) -> Result<PFReport> {
    if !is_alloy_form(h) {
        return Ok(PFReport {
            applicable: false,
            detail: "operator is not of the form -Δ + W".into(),
            simple: false,
            positive: false,
            p: 0,
            min_entry: f64::NAN,
            max_entry: f64::NAN,
            gap: None,
            ground_state: Vec::new(),
        });
    }
    let theta = vec![0.0; h.geometry().dimension()];
    let fiber = floquet::build_floquet(h, &theta).into_matrix();
    let g = floquet::fiber_ground_space(&theta, fiber, &Tolerances::default())?;
    let psi = g.basis.column(0);
    let imag = psi.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
    let ground_state: Vec<f64> = psi.iter().map(|z| z.re).collect();
    let min_entry = ground_state.iter().copied().fold(f64::INFINITY, f64::min);
    let max_entry = ground_state
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let simple = g.p == 1;
    let positive = min_entry > TOL_POSITIVE && imag <= TOL_POSITIVE;
    Ok(PFReport {
        applicable: true,
        detail: format!(
            "p = {}, min entry {min_entry:e}, imaginary part {imag:e}",
            g.p
        ),
        simple,
        positive,
        p: g.p,
        min_entry,
        max_entry,
        gap: g.gap,
        ground_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::ground_space;
    use crate::model::presets::{preset_model, PresetParams};
    use crate::model::LatticeGeometry;

    fn model(name: &str) -> Model {
        preset_model(name, &PresetParams::default()).unwrap()
    }

    fn at_zero(m: &Model) -> GroundSpaceData {
        let theta = vec![0.0; m.geometry().dimension()];
        ground_space(&m.hopping, &theta, &Tolerances::default()).unwrap()
    }

    #[test]
    fn perturbation_matrix_examples() {
        for (name, expected) in [("anderson", 1.0), ("dipole", 0.0), ("quartic", 0.0)] {
            let m = model(name);
            let pm = perturbation_matrix(&at_zero(&m), &m.potential).unwrap();
            assert_eq!(pm.p_values.len(), 1);
            assert!((pm.p1() - expected).abs() < 1e-14, "{name}: {}", pm.p1());
            assert!(pm.orthogonality_defect(&m.potential) < 1e-12);
        }
    }

    #[test]
    fn a1_examples() {
        let m = model("anderson");
        let pm = perturbation_matrix(&at_zero(&m), &m.potential).unwrap();
        assert_eq!(coeff_a1(&pm, &m.disorder).unwrap(), -1.0);

        let pm = PerturbationMatrix {
            a: linalg::real_diagonal(&[-2.0, 3.0]),
            p_values: vec![-2.0, 3.0],
            basis: CMatrix::identity(2, 2),
        };
        let s = DisorderSupport::new(-1.0, 2.0, Regime::SignChanging).unwrap();
        assert_eq!(coeff_a1(&pm, &s).unwrap(), -4.0);

        let pos = DisorderSupport::new(0.0, 1.0, Regime::Positive).unwrap();
        assert!(matches!(
            coeff_a1(&pm, &pos),
            Err(Error::WrongRegime { .. })
        ));
    }

    #[test]
    fn dipole_second_order() {
        let m = model("dipole");
        let g = at_zero(&m);
        let pm = perturbation_matrix(&g, &m.potential).unwrap();
        let tol = Tolerances::default();
        let a2 = coeff_a2(&g, &pm, &m.potential, &m.disorder, Subspace::Full, &tol).unwrap();
        assert!((a2 + 0.25).abs() < 1e-14, "{a2}");
        let var = coeff_a2_variational(
            &g,
            &pm,
            &m.potential,
            &m.disorder,
            Subspace::Full,
            &tol,
            1000,
            4,
            7,
        )
        .unwrap();
        assert!((var + 0.25).abs() < 1e-12, "{var}");
    }

    #[test]
    fn anderson_second_order_is_zero() {
        let m = model("anderson");
        let g = at_zero(&m);
        let pm = perturbation_matrix(&g, &m.potential).unwrap();
        let tol = Tolerances::default();
        assert_eq!(
            coeff_a2(&g, &pm, &m.potential, &m.disorder, Subspace::Full, &tol).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_potential_gives_zero() {
        let m = model("dipole");
        let g = at_zero(&m);
        let v = SingleCellPotential::new(CMatrix::zeros(2, 2)).unwrap();
        let pm = perturbation_matrix(&g, &v).unwrap();
        let tol = Tolerances::default();
        assert_eq!(
            coeff_a2(&g, &pm, &v, &m.disorder, Subspace::Full, &tol).unwrap(),
            0.0
        );
        assert_eq!(
            coeff_a2_variational(&g, &pm, &v, &m.disorder, Subspace::Full, &tol, 100, 2, 1)
                .unwrap(),
            0.0
        );
        assert!(!nondegeneracy_check(&g, &v));
    }

    #[test]
    fn quartic_second_order_is_negative() {
        let m = model("quartic");
        let g = at_zero(&m);
        let pm = perturbation_matrix(&g, &m.potential).unwrap();
        let tol = Tolerances::default();
        let a2 = coeff_a2(&g, &pm, &m.potential, &m.disorder, Subspace::Full, &tol).unwrap();
        // Vψ = (-1/2, 1, -1/2)/√3 is orthogonal to ψ; the excited level is 9
        assert!((a2 + 1.0 / 18.0).abs() < 1e-14, "{a2}");
        let var = coeff_a2_variational(
            &g,
            &pm,
            &m.potential,
            &m.disorder,
            Subspace::Full,
            &tol,
            1000,
            3,
            11,
        )
        .unwrap();
        assert!(var < 0.0 && (var - a2).abs() < 1e-12);
    }

    #[test]
    fn positive_regime_examples() {
        let tol = Tolerances::default();
        let pos = DisorderSupport::new(0.0, 1.0, Regime::Positive).unwrap();

        let m = model("anderson").with_disorder(pos);
        let e = edge_coefficients(&m, &at_zero(&m), &tol).unwrap();
        assert_eq!(e.case, EdgeCase::Linear);
        assert_eq!(e.a1_prime, Some(0.0));
        assert_eq!(edge_bound(&e, 0.01).value, 0.0);

        let m = model("dipole").with_disorder(pos);
        let e = edge_coefficients(&m, &at_zero(&m), &tol).unwrap();
        assert_eq!(e.case, EdgeCase::Quadratic);
        assert_eq!(e.a1_prime, Some(0.0));
        assert!((e.a2_prime.unwrap() + 0.25).abs() < 1e-14);
        assert_eq!(e.v01_dim, Some(1));

        let pm = PerturbationMatrix {
            a: linalg::real_diagonal(&[2.0, 5.0]),
            p_values: vec![2.0, 5.0],
            basis: CMatrix::identity(2, 2),
        };
        let s = DisorderSupport::new(1.0, 3.0, Regime::Positive).unwrap();
        let g = floquet::fiber_ground_space(&[0.0], CMatrix::zeros(2, 2), &tol).unwrap();
        let v = SingleCellPotential::from_diagonal(&[2.0, 5.0]).unwrap();
        let (a1, _, dim) = coeffs_positive_regime(&g, &pm, &v, &s, &tol).unwrap();
        assert_eq!(a1, 2.0);
        assert_eq!(dim, 1);
    }

    #[test]
    fn edge_bound_examples() {
        let tol = Tolerances::default();
        let m = model("anderson");
        let e = edge_coefficients(&m, &at_zero(&m), &tol).unwrap();
        assert_eq!(e.case, EdgeCase::Linear);
        assert!((edge_bound(&e, 0.01).value + 0.01).abs() < 1e-18);

        let m = model("dipole");
        let e = edge_coefficients(&m, &at_zero(&m), &tol).unwrap();
        assert_eq!(e.case, EdgeCase::Quadratic);
        let b = edge_bound(&e, 0.01);
        assert!((b.value + 2.5e-5).abs() < 1e-18);
        assert!(b.modulo_cubic && !b.large_epsilon);
    }

    #[test]
    fn disjoint_support_is_degenerate() {
        // two decoupled chains, V^□ lives on a site the ground state avoids
        let g = LatticeGeometry::new(1, 2).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let h = HoppingOperator::from_entries(
            g,
            [
                (0, 0, vec![0], c(2.0)),
                (0, 0, vec![2], c(-1.0)),
                (0, 0, vec![-2], c(-1.0)),
                (1, 1, vec![0], c(3.0)),
                (1, 1, vec![2], c(-1.0)),
                (1, 1, vec![-2], c(-1.0)),
            ],
        )
        .unwrap();
        let v = SingleCellPotential::from_diagonal(&[0.0, 1.0]).unwrap();
        let m = Model::new(h, v, DisorderSupport::symmetric()).unwrap();
        let gs = at_zero(&m);
        assert!(!nondegeneracy_check(&gs, &m.potential));
        let e = edge_coefficients(&m, &gs, &Tolerances::default()).unwrap();
        assert_eq!(e.case, EdgeCase::NoMotion);
        assert_eq!(edge_bound(&e, 0.3).value, 0.0);
    }

    #[test]
    fn perron_frobenius_examples() {
        let r = perron_frobenius_check(&model("anderson").hopping).unwrap();
        assert!(r.passed());
        assert_eq!(r.ground_state, vec![1.0]);

        let h = HoppingOperator::laplacian_plus(LatticeGeometry::new(1, 2).unwrap(), &[0.0, 1.0])
            .unwrap();
        let r = perron_frobenius_check(&h).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.min_entry > 0.1);

        let r = perron_frobenius_check(&model("quartic").hopping).unwrap();
        assert!(!r.applicable && !r.passed());
    }

    #[test]
    fn coefficients_do_not_depend_on_the_ground_frame() {
        // two identical decoupled chains: a doubly degenerate ground space
        let g = LatticeGeometry::new(1, 2).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut entries = Vec::new();
        for k in 0..2 {
            entries.extend([
                (k, k, vec![0], c(2.0)),
                (k, k, vec![2], c(-1.0)),
                (k, k, vec![-2], c(-1.0)),
            ]);
        }
        let h = HoppingOperator::from_entries(g, entries).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let v =
            SingleCellPotential::new(crate::model::random::random_hermitian(&mut rng, 2)).unwrap();
        let m = Model::new(h, v, DisorderSupport::symmetric()).unwrap();
        let gs = at_zero(&m);
        assert_eq!(gs.p, 2);

        let u = linalg::eigh(&crate::model::random::random_hermitian(&mut rng, 2))
            .unwrap()
            .vectors;
        let mut rotated = gs.clone();
        rotated.basis = &gs.basis * &u;
        rotated
            .eigenvectors
            .columns_mut(0, 2)
            .copy_from(&rotated.basis);

        let tol = Tolerances::default();
        let a = edge_coefficients(&m, &gs, &tol).unwrap();
        let b = edge_coefficients(&m, &rotated, &tol).unwrap();
        assert!((a.a1.unwrap() - b.a1.unwrap()).abs() < 1e-13);
        assert!((a.a2.unwrap() - b.a2.unwrap()).abs() < 1e-13);
        for (x, y) in a.p_values.iter().zip(&b.p_values) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
