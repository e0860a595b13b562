//! Dense Hermitian linear algebra on small fiber matrices.
//!
//! Everything here works on `DMatrix<Complex64>`. Real-valued inputs take a
//! faster real-symmetric path and are promoted back to complex on return.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const MAX_SWEEPS_PER_DIM: usize = 1_000;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending
/// order. Column `i` of `vectors` belongs to `values[i]`.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest eigenvalue modulus, i.e. the operator norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Full eigen-decomposition of a Hermitian matrix. Only the lower triangle is
/// read. A solver that fails to converge is reported, never truncated.
pub fn eigh(m: &CMatrix) -> Result<Eigh> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let max_iter = MAX_SWEEPS_PER_DIM * n;
    let (values, vectors) = if is_real(m) {
        let re = m.map(|z| z.re);
        let eig = SymmetricEigen::try_new(re, f64::EPSILON, max_iter)
            .ok_or(Error::Eigensolver { dim: n })?;
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter)
            .ok_or(Error::Eigensolver { dim: n })?;
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors,
        )
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    Ok(Eigh {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)].re]);
    }
    let max_iter = MAX_SWEEPS_PER_DIM * n;
    let mut values: Vec<f64> = if is_real(m) {
        SymmetricEigen::try_new(m.map(|z| z.re), f64::EPSILON, max_iter)
            .ok_or(Error::Eigensolver { dim: n })?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter)
            .ok_or(Error::Eigensolver { dim: n })?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(m: &CMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?[0])
}

/// Rotates a vector by a global phase so that its largest-modulus entry is
/// real and positive. Ties go to the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let phase = v[best].conj() / best_abs;
    v.iter_mut().for_each(|z| *z *= phase);
}

/// Applies [`fix_phase`] to every column.
pub fn fix_column_phases(m: &mut CMatrix) {
    for j in 0..m.ncols() {
        let mut col: CVector = m.column(j).into_owned();
        fix_phase(&mut col);
        m.set_column(j, &col);
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    let vals = eigvalsh(m)?;
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}

/// `‖M − M*‖_max`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// `‖M v − λ v‖₂`.
pub fn residual(m: &CMatrix, v: &CVector, lambda: f64) -> f64 {
    (m * v - v.map(|z| z * lambda)).norm()
}

/// Real part of `⟨u, M u⟩ / ⟨u, u⟩`.
pub fn rayleigh_quotient(m: &CMatrix, u: &CVector) -> f64 {
    let num = u.dotc(&(m * u));
    num.re / u.norm_squared()
}

pub fn real_diagonal(diag: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        diag.len(),
        diag.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_by_two_symmetric() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0), c(-2.0), c(-2.0), c(2.0)]);
        let mut e = eigh(&m).unwrap();
        assert!((e.values[0] - 0.0).abs() < 1e-14);
        assert!((e.values[1] - 4.0).abs() < 1e-14);
        fix_column_phases(&mut e.vectors);
        let s = 1.0 / 2f64.sqrt();
        assert!((e.vectors[(0, 0)] - c(s)).norm() < 1e-14);
        assert!((e.vectors[(1, 0)] - c(s)).norm() < 1e-14);
        // second column is (1,-1)/sqrt2 up to the phase convention
        assert!((e.vectors[(0, 1)].norm() - s).abs() < 1e-14);
        assert!((e.vectors[(0, 1)] + e.vectors[(1, 1)]).norm() < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let e = eigh(&CMatrix::identity(5, 5)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn complex_hermitian_residuals() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0),
                Complex64::new(0.5, 0.25),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.5, -0.25),
                c(-2.0),
                c(0.3),
                Complex64::new(0.0, 1.0),
                c(0.3),
                c(0.7),
            ],
        );
        let e = eigh(&m).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!(max_abs(&(gram - CMatrix::identity(3, 3))) < 1e-12);
        for i in 0..3 {
            let v = e.vectors.column(i).into_owned();
            assert!(residual(&m, &v, e.values[i]) < 1e-12 * e.norm());
        }
    }

    #[test]
    fn phase_fixing_makes_largest_entry_positive() {
        let mut v = CVector::from_vec(vec![
            Complex64::new(0.0, 0.1),
            Complex64::new(0.0, -0.9),
            Complex64::new(0.3, 0.0),
        ]);
        fix_phase(&mut v);
        assert!(v[1].im.abs() < 1e-15 && v[1].re > 0.0);
    }
}
