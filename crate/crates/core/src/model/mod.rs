//! Lattice geometry, the periodic hopping operator, the single-cell potential
//! and the disorder support.
//!
//! Cell sites are indexed lexicographically: the site `(k_1, …, k_d)` of
//! `□ = [0, N-1]^d` has index `Σ k_i N^(d-1-i)`, so the first coordinate is the
//! most significant. Every matrix in the crate uses this order.
//!
//! Disorder couplings enter only through the support endpoints `s₋, s₊`. The
//! library does not renormalize couplings to move `s₋` to zero: doing so
//! would make the unperturbed operator depend on the coupling constant.

pub mod config;
pub mod presets;
pub mod random;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, ScanOptions};
use crate::linalg::{self, CMatrix};

pub use presets::{preset_model, Preset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeGeometry {
    dimension: usize,
    period: usize,
}

impl LatticeGeometry {
    pub fn new(dimension: usize, period: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if period == 0 {
            return Err(Error::InvalidModel("period must be at least 1".into()));
        }
        let size = period.checked_pow(dimension as u32);
        if size.is_none_or(|s| s > 1 << 16) {
            return Err(Error::InvalidModel(format!(
                "cell of {period}^{dimension} sites is too large"
            )));
        }
        Ok(Self { dimension, period })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Number of sites `N^d` in the periodicity cell.
    pub fn cell_size(&self) -> usize {
        self.period.pow(self.dimension as u32)
    }

    pub fn site_coords(&self, index: usize) -> Vec<i64> {
        let n = self.period;
        let mut coords = vec![0i64; self.dimension];
        let mut rest = index;
        for c in coords.iter_mut().rev() {
            *c = (rest % n) as i64;
            rest /= n;
        }
        coords
    }

    pub fn try_site_index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dimension {
            return None;
        }
        let n = self.period as i64;
        let mut index = 0usize;
        for &c in coords {
            if !(0..n).contains(&c) {
                return None;
            }
            index = index * self.period + c as usize;
        }
        Some(index)
    }

    pub fn site_index(&self, coords: &[i64]) -> usize {
        self.try_site_index(coords)
            .unwrap_or_else(|| panic!("{coords:?} is not a site of the cell"))
    }

    /// Splits a lattice point as `x = k + m` with `k ∈ □` and `m ∈ Nℤ^d`.
    pub fn decompose(&self, x: &[i64]) -> (usize, Vec<i64>) {
        let n = self.period as i64;
        let mut k = Vec::with_capacity(x.len());
        let mut m = Vec::with_capacity(x.len());
        for &xi in x {
            let r = xi.rem_euclid(n);
            k.push(r);
            m.push(xi - r);
        }
        (self.site_index(&k), m)
    }

    /// The sublattice translations `{-N, 0, N}^d` allowed in a hopping table.
    pub fn cell_offsets(&self) -> Vec<Vec<i64>> {
        let n = self.period as i64;
        let mut out = vec![Vec::new()];
        for _ in 0..self.dimension {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    [-n, 0, n].into_iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn is_allowed_offset(&self, m: &[i64]) -> bool {
        let n = self.period as i64;
        m.len() == self.dimension && m.iter().all(|&c| c == 0 || c == n || c == -n)
    }
}

/// Key of one hopping amplitude: `H₀(k, k′ + m)` with `k, k′ ∈ □`, `m ∈ Nℤ^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HopKey {
    pub k: usize,
    pub k_prime: usize,
    pub m: Vec<i64>,
}

impl fmt::Display for HopKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, k'={}, m={:?})", self.k, self.k_prime, self.m)
    }
}

/// A `Nℤ^d`-invariant, finite-range operator on `ℓ²(ℤ^d)` stored as the
/// amplitudes `H₀(k, k′+m)` for `k, k′ ∈ □` and `|m|_∞ ≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingOperator {
    geometry: LatticeGeometry,
    entries: BTreeMap<HopKey, Complex64>,
    energy_shift: f64,
}

impl HoppingOperator {
    /// Builds an operator from `(k, k′, m, amplitude)` tuples. Repeated keys
    /// are summed. Translations outside `{-N, 0, N}^d` are rejected.
    pub fn from_entries<I>(geometry: LatticeGeometry, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Vec<i64>, Complex64)>,
    {
        let mut op = Self {
            geometry,
            entries: BTreeMap::new(),
            energy_shift: 0.0,
        };
        for (k, k_prime, m, value) in entries {
            op.add(k, k_prime, m, value)?;
        }
        Ok(op)
    }

    /// Builds a translation-invariant operator from a single-site stencil
    /// `(displacement, amplitude)` plus a `γ`-periodic on-site potential.
    pub fn from_stencil(
        geometry: LatticeGeometry,
        stencil: &[(Vec<i64>, Complex64)],
        onsite: &[f64],
    ) -> Result<Self> {
        let size = geometry.cell_size();
        if onsite.len() != size {
            return Err(Error::InvalidModel(format!(
                "on-site potential has {} values, cell has {size} sites",
                onsite.len()
            )));
        }
        let mut entries = Vec::new();
        for (k, &w) in onsite.iter().enumerate() {
            let x = geometry.site_coords(k);
            for (delta, amp) in stencil {
                if delta.len() != geometry.dimension() {
                    return Err(Error::InvalidModel(format!(
                        "stencil displacement {delta:?} has the wrong dimension"
                    )));
                }
                let y: Vec<i64> = x.iter().zip(delta).map(|(a, b)| a + b).collect();
                let (k_prime, m) = geometry.decompose(&y);
                entries.push((k, k_prime, m, *amp));
            }
            if w != 0.0 {
                entries.push((k, k, vec![0; geometry.dimension()], w.into()));
            }
        }
        Self::from_entries(geometry, entries)
    }

    /// Nearest-neighbour `-Δ + W` with `(-Δu)(x) = Σ_{|x-y|₁=1} (u(x) - u(y))`.
    pub fn laplacian_plus(geometry: LatticeGeometry, w: &[f64]) -> Result<Self> {
        let d = geometry.dimension();
        let mut stencil = vec![(vec![0; d], Complex64::new(2.0 * d as f64, 0.0))];
        for i in 0..d {
            for s in [-1, 1] {
                let mut e = vec![0; d];
                e[i] = s;
                stencil.push((e, Complex64::new(-1.0, 0.0)));
            }
        }
        Self::from_stencil(geometry, &stencil, w)
    }

    fn add(&mut self, k: usize, k_prime: usize, m: Vec<i64>, value: Complex64) -> Result<()> {
        let size = self.geometry.cell_size();
        if k >= size || k_prime >= size {
            return Err(Error::InvalidModel(format!(
                "site index out of range in hopping ({k}, {k_prime}); cell has {size} sites"
            )));
        }
        if !self.geometry.is_allowed_offset(&m) {
            return Err(Error::InvalidModel(format!(
                "translation {m:?} is not in {{-N, 0, N}}^d for N = {}",
                self.geometry.period()
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::InvalidModel("non-finite hopping amplitude".into()));
        }
        *self
            .entries
            .entry(HopKey { k, k_prime, m })
            .or_insert(Complex64::new(0.0, 0.0)) += value;
        Ok(())
    }

    pub fn geometry(&self) -> LatticeGeometry {
        self.geometry
    }

    /// Constant already subtracted from the diagonal.
    pub fn energy_shift(&self) -> f64 {
        self.energy_shift
    }

    pub fn coefficient(&self, k: usize, k_prime: usize, m: &[i64]) -> Complex64 {
        self.entries
            .get(&HopKey {
                k,
                k_prime,
                m: m.to_vec(),
            })
            .copied()
            .unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&HopKey, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    /// Same operator with `delta` subtracted from the diagonal.
    pub fn shifted_by(&self, delta: f64) -> Self {
        let mut out = self.clone();
        let zero = vec![0; self.geometry.dimension()];
        for k in 0..self.geometry.cell_size() {
            *out.entries
                .entry(HopKey {
                    k,
                    k_prime: k,
                    m: zero.clone(),
                })
                .or_insert(Complex64::new(0.0, 0.0)) -= delta;
        }
        out.energy_shift += delta;
        out
    }

    pub(crate) fn with_energy_shift(mut self, shift: f64) -> Self {
        self.energy_shift = shift;
        self
    }

    /// First pair violating `H(k,k′,m) = conj H(k′,k,-m)`, with the defect.
    pub fn hermitian_violation(&self) -> Option<(HopKey, HopKey, f64)> {
        let tol = 1e-14 * self.max_abs();
        let mut worst: Option<(HopKey, HopKey, f64)> = None;
        for (key, value) in &self.entries {
            let partner = HopKey {
                k: key.k_prime,
                k_prime: key.k,
                m: key.m.iter().map(|c| -c).collect(),
            };
            let other = self.entries.get(&partner).copied().unwrap_or_default();
            let defect = (*value - other.conj()).norm();
            if defect > tol && worst.as_ref().is_none_or(|w| defect > w.2) {
                worst = Some((key.clone(), partner, defect));
            }
        }
        worst
    }

    /// A lattice point `k₀ ≠ 0` with `H₀(0, k₀) ≠ 0`, if any.
    pub fn nontrivial_witness(&self) -> Option<Vec<i64>> {
        self.entries
            .iter()
            .filter(|(key, v)| key.k == 0 && v.norm() > 0.0)
            .map(|(key, _)| {
                let mut x = self.geometry.site_coords(key.k_prime);
                x.iter_mut().zip(&key.m).for_each(|(a, b)| *a += b);
                x
            })
            .find(|x| x.iter().any(|&c| c != 0))
    }
}

/// The Hermitian matrix `V^□` acting on `ℓ²(□)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleCellPotential {
    matrix: CMatrix,
    is_diagonal: bool,
}

impl SingleCellPotential {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidModel(format!(
                "single-cell potential must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidModel("non-finite potential entry".into()));
        }
        let n = matrix.nrows();
        let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || matrix[(i, j)].norm() == 0.0));
        Ok(Self {
            matrix,
            is_diagonal,
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(linalg::real_diagonal(diag))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_diagonal
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        linalg::eigvalsh(&gram)
            .map(|v| v.last().copied().unwrap_or(0.0).max(0.0).sqrt())
            .unwrap_or_else(|_| self.matrix.norm())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * c),
            is_diagonal: self.is_diagonal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `s₋ < 0 < s₊`.
    SignChanging,
    /// `0 ≤ s₋ < s₊`.
    Positive,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::SignChanging => "SignChanging",
            Regime::Positive => "Positive",
        }
    }
}

/// Endpoints of the coupling distribution support and its sign regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DisorderSupport {
    s_minus: f64,
    s_plus: f64,
    regime: Regime,
}

impl DisorderSupport {
    pub fn new(s_minus: f64, s_plus: f64, regime: Regime) -> Result<Self> {
        let ok = match regime {
            Regime::SignChanging => s_minus < 0.0 && 0.0 < s_plus,
            Regime::Positive => 0.0 <= s_minus && s_minus < s_plus,
        };
        if !ok || !s_minus.is_finite() || !s_plus.is_finite() {
            return Err(Error::InvalidModel(format!(
                "support ({s_minus}, {s_plus}) is inconsistent with the {} regime",
                regime.name()
            )));
        }
        Ok(Self {
            s_minus,
            s_plus,
            regime,
        })
    }

    /// Picks the regime from the signs of the endpoints.
    pub fn infer(s_minus: f64, s_plus: f64) -> Result<Self> {
        let regime = if s_minus < 0.0 {
            Regime::SignChanging
        } else {
            Regime::Positive
        };
        Self::new(s_minus, s_plus, regime)
    }

    pub fn symmetric() -> Self {
        Self {
            s_minus: -1.0,
            s_plus: 1.0,
            regime: Regime::SignChanging,
        }
    }

    pub fn s_minus(&self) -> f64 {
        self.s_minus
    }

    pub fn s_plus(&self) -> f64 {
        self.s_plus
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn s_max(&self) -> f64 {
        self.s_minus.abs().max(self.s_plus.abs())
    }

    /// Prefactor of the second-order coefficient: `max(s₋², s₊²)` for
    /// sign-changing couplings, `s₊²` for positive ones.
    pub fn second_order_weight(&self) -> f64 {
        match self.regime {
            Regime::SignChanging => self.s_minus.powi(2).max(self.s_plus.powi(2)),
            Regime::Positive => self.s_plus.powi(2),
        }
    }
}

/// A complete alloy-type model `H₀ + ε Σ_k ω_k V^□(· - k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub hopping: HoppingOperator,
    pub potential: SingleCellPotential,
    pub disorder: DisorderSupport,
}

impl Model {
    pub fn new(
        hopping: HoppingOperator,
        potential: SingleCellPotential,
        disorder: DisorderSupport,
    ) -> Result<Self> {
        let size = hopping.geometry().cell_size();
        if potential.dim() != size {
            return Err(Error::InvalidModel(format!(
                "potential is {0}x{0} but the cell has {size} sites",
                potential.dim()
            )));
        }
        Ok(Self {
            hopping,
            potential,
            disorder,
        })
    }

    pub fn geometry(&self) -> LatticeGeometry {
        self.hopping.geometry()
    }

    pub fn with_hopping(&self, hopping: HoppingOperator) -> Self {
        Self {
            hopping,
            ..self.clone()
        }
    }

    pub fn with_potential(&self, potential: SingleCellPotential) -> Self {
        Self {
            potential,
            ..self.clone()
        }
    }

    pub fn with_disorder(&self, disorder: DisorderSupport) -> Self {
        Self {
            disorder,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_hypotheses(&self.hopping, &self.potential, &self.disorder)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, hypothesis: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == hypothesis)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks the standing hypotheses on the operator, the potential and the
/// coupling support. Never fails; every check is reported with its witness.
pub fn validate_hypotheses(
    h: &HoppingOperator,
    v: &SingleCellPotential,
    s: &DisorderSupport,
) -> ValidationReport {
    let mut checks = Vec::new();

    checks.push(match h.hermitian_violation() {
        None => HypothesisCheck {
            hypothesis: "hopping-hermitian",
            passed: true,
            detail: format!("{} amplitudes satisfy H(k,k',m) = conj H(k',k,-m)", h.len()),
        },
        Some((a, b, defect)) => HypothesisCheck {
            hypothesis: "hopping-hermitian",
            passed: false,
            detail: format!("H{a} differs from conj H{b} by {defect:e}"),
        },
    });

    let max_offset = h
        .entries()
        .flat_map(|(key, _)| key.m.iter().map(|c| c.unsigned_abs()))
        .max()
        .unwrap_or(0);
    checks.push(HypothesisCheck {
        hypothesis: "hopping-finite-range",
        passed: max_offset as usize <= h.geometry().period(),
        detail: format!(
            "largest sublattice translation {max_offset}, period {}",
            h.geometry().period()
        ),
    });

    checks.push(match h.nontrivial_witness() {
        Some(k0) => HypothesisCheck {
            hypothesis: "hopping-nontrivial",
            passed: true,
            detail: format!("H(0, {k0:?}) != 0"),
        },
        None => HypothesisCheck {
            hypothesis: "hopping-nontrivial",
            passed: false,
            detail: "no k0 != 0 with H(0, k0) != 0".into(),
        },
    });

    let size = h.geometry().cell_size();
    checks.push(HypothesisCheck {
        hypothesis: "potential-shape",
        passed: v.dim() == size,
        detail: format!("potential is {0}x{0}, cell has {size} sites", v.dim()),
    });

    let defect = linalg::hermitian_defect(v.matrix());
    checks.push(HypothesisCheck {
        hypothesis: "potential-hermitian",
        passed: defect == 0.0,
        detail: format!("max |V - V*| = {defect:e}"),
    });

    let norm = linalg::max_abs(v.matrix());
    checks.push(HypothesisCheck {
        hypothesis: "potential-nontrivial",
        passed: norm > 0.0,
        detail: format!("max |V| = {norm:e}"),
    });

    let (name, passed) = match s.regime() {
        Regime::SignChanging => (
            "support-sign-changing",
            s.s_minus() < 0.0 && 0.0 < s.s_plus(),
        ),
        Regime::Positive => (
            "support-positive",
            0.0 <= s.s_minus() && s.s_minus() < s.s_plus(),
        ),
    };
    checks.push(HypothesisCheck {
        hypothesis: name,
        passed,
        detail: format!("s- = {}, s+ = {}", s.s_minus(), s.s_plus()),
    });

    ValidationReport { checks }
}

/// Shifts the diagonal so that the lowest band touches zero, using a
/// Brillouin-zone scan with `bz_resolution` nodes per dimension.
pub fn shift_to_zero(h: &HoppingOperator, bz_resolution: usize) -> Result<HoppingOperator> {
    let opts = ScanOptions {
        grid_per_dim: bz_resolution,
        ..ScanOptions::default()
    };
    shift_to_zero_with(h, &opts, 1e-9)
}

pub fn shift_to_zero_with(
    h: &HoppingOperator,
    opts: &ScanOptions,
    tol_shift: f64,
) -> Result<HoppingOperator> {
    let scan_opts = ScanOptions {
        tol_theta: tol_shift,
        ..opts.clone()
    };
    let theta_set = floquet::scan_theta_set(h, &scan_opts)?;
    let shifted = h.shifted_by(theta_set.e0);
    let residual = theta_set
        .minimizers
        .iter()
        .map(|t| linalg::lambda_min(floquet::build_floquet(&shifted, t).matrix()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    if residual > tol_shift {
        return Err(Error::ScanNotConverged {
            change: residual,
            tol: tol_shift,
        });
    }
    Ok(shifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_indexing_round_trips() {
        let g = LatticeGeometry::new(3, 4).unwrap();
        assert_eq!(g.cell_size(), 64);
        for i in 0..64 {
            assert_eq!(g.site_index(&g.site_coords(i)), i);
        }
        assert_eq!(g.site_coords(1), vec![0, 0, 1]);
        assert_eq!(g.site_coords(16), vec![1, 0, 0]);
    }

    #[test]
    fn decompose_splits_into_cell_and_sublattice() {
        let g = LatticeGeometry::new(2, 3).unwrap();
        let (k, m) = g.decompose(&[-1, 4]);
        assert_eq!(g.site_coords(k), vec![2, 1]);
        assert_eq!(m, vec![-3, 3]);
    }

    #[test]
    fn rejects_long_range_translation() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        let err = HoppingOperator::from_entries(g, [(0, 1, vec![4], Complex64::new(1.0, 0.0))]);
        assert!(err.is_err());
        let err = HoppingOperator::from_entries(g, [(0, 1, vec![1], Complex64::new(1.0, 0.0))]);
        assert!(err.is_err(), "translations must be multiples of the period");
    }

    #[test]
    fn non_hermitian_diagonal_is_flagged() {
        let g = LatticeGeometry::new(1, 1).unwrap();
        let h = HoppingOperator::from_entries(
            g,
            [
                (0, 0, vec![0], Complex64::new(0.0, 1.0)),
                (0, 0, vec![1], Complex64::new(-1.0, 0.0)),
                (0, 0, vec![-1], Complex64::new(-1.0, 0.0)),
            ],
        )
        .unwrap();
        let v = SingleCellPotential::from_diagonal(&[1.0]).unwrap();
        let report = validate_hypotheses(&h, &v, &DisorderSupport::symmetric());
        let check = report.check("hopping-hermitian").unwrap();
        assert!(!check.passed);
        assert!(check.detail.contains("m=[0]"));
        assert!(report.check("hopping-nontrivial").unwrap().passed);
    }

    #[test]
    fn zero_potential_is_flagged() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        let h = HoppingOperator::laplacian_plus(g, &[0.0, 0.0]).unwrap();
        let v = SingleCellPotential::from_diagonal(&[0.0, 0.0]).unwrap();
        let report = validate_hypotheses(&h, &v, &DisorderSupport::symmetric());
        assert!(!report.check("potential-nontrivial").unwrap().passed);
        assert!(report.check("hopping-hermitian").unwrap().passed);
        assert!(!report.all_passed());
    }

    #[test]
    fn on_site_only_operator_is_trivial() {
        let g = LatticeGeometry::new(1, 1).unwrap();
        let h =
            HoppingOperator::from_entries(g, [(0, 0, vec![0], Complex64::new(1.0, 0.0))]).unwrap();
        assert!(h.nontrivial_witness().is_none());
    }

    #[test]
    fn disorder_support_regimes() {
        assert!(DisorderSupport::new(-1.0, 1.0, Regime::SignChanging).is_ok());
        assert!(DisorderSupport::new(0.0, 1.0, Regime::SignChanging).is_err());
        assert!(DisorderSupport::new(0.0, 1.0, Regime::Positive).is_ok());
        assert!(DisorderSupport::new(-0.5, 1.0, Regime::Positive).is_err());
        assert!(DisorderSupport::new(1.0, 1.0, Regime::Positive).is_err());
        assert_eq!(
            DisorderSupport::infer(0.0, 2.0).unwrap().regime(),
            Regime::Positive
        );
        let s = DisorderSupport::new(-3.0, 2.0, Regime::SignChanging).unwrap();
        assert_eq!(s.second_order_weight(), 9.0);
        let p = DisorderSupport::new(1.0, 2.0, Regime::Positive).unwrap();
        assert_eq!(p.second_order_weight(), 4.0);
    }

    #[test]
    fn shift_of_free_laplacian_is_zero() {
        let g = LatticeGeometry::new(1, 1).unwrap();
        let h = HoppingOperator::laplacian_plus(g, &[0.0]).unwrap();
        let shifted = shift_to_zero(&h, 64).unwrap();
        assert!(shifted.energy_shift().abs() < 1e-12);
    }

    #[test]
    fn shift_removes_constant() {
        let g = LatticeGeometry::new(1, 1).unwrap();
        let h = HoppingOperator::laplacian_plus(g, &[5.0]).unwrap();
        let shifted = shift_to_zero(&h, 64).unwrap();
        assert!((shifted.energy_shift() - 5.0).abs() < 1e-9);
        assert!((shifted.coefficient(0, 0, &[0]).re - 2.0).abs() < 1e-9);
        let twice = shift_to_zero(&shifted, 64).unwrap();
        assert!((twice.energy_shift() - shifted.energy_shift()).abs() < 1e-9);
    }
}
