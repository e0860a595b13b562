//! Seeded random models for property tests and randomized acceptance runs.

use num_complex::Complex64;
use rand::Rng;

use super::{DisorderSupport, HoppingOperator, LatticeGeometry, Model, SingleCellPotential};
use crate::error::Result;
use crate::linalg::CMatrix;

fn amplitude<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    Complex64::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

/// Random Hermitian hopping on `ℤ` with period `N` and range `≤ N`.
///
/// Every site couples to its translate by `N`, so the operator is never
/// confined to a cell.
pub fn random_hopping_1d<R: Rng>(rng: &mut R, period: usize) -> Result<HoppingOperator> {
    let g = LatticeGeometry::new(1, period)?;
    let n = period as i64;
    let mut entries = Vec::new();
    for k in 0..period {
        entries.push((
            k,
            k,
            vec![0],
            Complex64::new(rng.random_range(-1.0..1.0), 0.0),
        ));
        let t = Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(-3.0..3.0));
        entries.push((k, k, vec![n], t));
        entries.push((k, k, vec![-n], t.conj()));
    }
    // pairs x < y with 0 < y - x < N, written as (k, k′ + m)
    for k in 0..period as i64 {
        for y in (k + 1)..(k + n) {
            let (kp, m) = (y.rem_euclid(n), y.div_euclid(n) * n);
            let t = amplitude(rng, 1.0);
            entries.push((k as usize, kp as usize, vec![m], t));
            entries.push((kp as usize, k as usize, vec![-m], t.conj()));
        }
    }
    HoppingOperator::from_entries(g, entries)
}

/// Random Hermitian `n × n` matrix with entries in the unit square.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| amplitude(rng, 1.0));
    (&a + a.adjoint()).map(|z| z * 0.5)
}

/// `Q M Q` with `Q` the projector onto the orthogonal complement of the
/// columns of `basis` (assumed orthonormal), so that `V^□ψ = 0` on them.
pub fn annihilating_potential<R: Rng>(rng: &mut R, basis: &CMatrix) -> CMatrix {
    let n = basis.nrows();
    let q = CMatrix::identity(n, n) - basis * basis.adjoint();
    let m = random_hermitian(rng, n);
    let v = &q * m * &q;
    (&v + v.adjoint()).map(|z| z * 0.5)
}

/// Sign-changing support with `s₋ ∈ [-1.5, -0.5]`, `s₊ ∈ [0.5, 1.5]`.
pub fn random_sign_changing<R: Rng>(rng: &mut R) -> Result<DisorderSupport> {
    DisorderSupport::infer(rng.random_range(-1.5..-0.5), rng.random_range(0.5..1.5))
}

/// Random 1D model with period `N`, Hermitian `V^□` and sign-changing support.
pub fn random_model_1d<R: Rng>(rng: &mut R, period: usize) -> Result<Model> {
    let h = random_hopping_1d(rng, period)?;
    let v = SingleCellPotential::new(random_hermitian(rng, period))?;
    Model::new(h, v, random_sign_changing(rng)?)
}

/// `-Δ + W` with `W` uniform in `[-w_max, w_max]`.
pub fn random_alloy<R: Rng>(
    rng: &mut R,
    dimension: usize,
    period: usize,
    w_max: f64,
) -> Result<HoppingOperator> {
    let g = LatticeGeometry::new(dimension, period)?;
    let w: Vec<f64> = (0..g.cell_size())
        .map(|_| rng.random_range(-w_max..=w_max))
        .collect();
    HoppingOperator::laplacian_plus(g, &w)
}
