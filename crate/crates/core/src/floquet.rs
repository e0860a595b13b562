//! Floquet fibers `H₀^□(θ)`, the Brillouin-zone scan for the band minimizers
//! and the degenerate ground eigenspace at a minimizer.
//!
//! Sign convention: `H₀^□(θ)(k, k′) = Σ_m e^{iθ·m} H₀(k, k′ − m)`. A cell
//! vector `u₀` corresponds to the lattice function `u(k + m) = e^{−iθ·m} u₀(k)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Eigh};
use crate::model::HoppingOperator;
use crate::tolerance::Tolerances;

/// One Floquet fiber of the periodic operator.
#[derive(Clone, Debug)]
pub struct FloquetMatrix {
    theta: Vec<f64>,
    matrix: CMatrix,
}

impl FloquetMatrix {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// Assembles `H₀^□(θ)` from the hopping table. The result is `2π/N`-periodic
/// in every component of `θ`.
pub fn build_floquet(h: &HoppingOperator, theta: &[f64]) -> FloquetMatrix {
    let g = h.geometry();
    assert_eq!(
        theta.len(),
        g.dimension(),
        "theta has {} components for a {}-dimensional lattice",
        theta.len(),
        g.dimension()
    );
    let n = g.cell_size();
    let mut matrix = CMatrix::zeros(n, n);
    for (key, amp) in h.entries() {
        // H(k, k′ + m) contributes with phase e^{-iθ·m}
        let phase: f64 = key.m.iter().zip(theta).map(|(&m, &t)| m as f64 * t).sum();
        matrix[(key.k, key.k_prime)] += amp * Complex64::from_polar(1.0, -phase);
    }
    FloquetMatrix {
        theta: theta.to_vec(),
        matrix,
    }
}

/// Eigen-decomposition of a fiber, eigenvalues ascending.
pub fn fiber_eigh(f: &FloquetMatrix) -> Result<Eigh> {
    linalg::eigh(&f.matrix)
}

/// Lowest fiber eigenvalue `E₀(θ)`.
pub fn band_minimum(h: &HoppingOperator, theta: &[f64]) -> Result<f64> {
    linalg::lambda_min(build_floquet(h, theta).matrix())
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    pub grid_per_dim: usize,
    pub refinements: usize,
    pub tol_theta: f64,
    /// Cap on the number of local candidates carried through refinement.
    pub max_candidates: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_per_dim: 64,
            refinements: 6,
            tol_theta: 1e-9,
            max_candidates: 256,
        }
    }
}

/// Grid-resolved set of quasi-momenta minimizing the lowest band.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaSet {
    /// Minimizers in `[0, 2π/N)^d`, sorted lexicographically.
    pub minimizers: Vec<Vec<f64>>,
    pub e0: f64,
    /// Final grid spacing per dimension.
    pub resolution: f64,
}

#[derive(Clone, Debug)]
struct Candidate {
    theta: Vec<f64>,
    value: f64,
    last_gain: f64,
}

fn stencil(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-1..=1).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&s| s != 0));
    out
}

fn wrap(theta: &mut [f64], period: f64) {
    for t in theta.iter_mut() {
        *t = t.rem_euclid(period);
        if *t < 1e-12 * period || period - *t < 1e-12 * period {
            *t = 0.0;
        }
    }
}

fn periodic_distance(a: &[f64], b: &[f64], period: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(period);
            d.min(period - d)
        })
        .fold(0.0, f64::max)
}

/// One move of a compass search: the best stencil point at `step`, if it
/// improves on the current value.
fn best_neighbour(
    h: &HoppingOperator,
    c: &Candidate,
    step: f64,
    dirs: &[Vec<i64>],
    noise: f64,
) -> Result<Option<(Vec<f64>, f64)>> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for dir in dirs {
        let t: Vec<f64> = c
            .theta
            .iter()
            .zip(dir)
            .map(|(x, &s)| x + s as f64 * step)
            .collect();
        let v = band_minimum(h, &t)?;
        if v < c.value - noise && best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((t, v));
        }
    }
    Ok(best)
}

/// Scans `[0, 2π/N)^d` on a uniform grid, refines around the local minima
/// by repeated bisection of the grid spacing and polishes each candidate with
/// a compass search.
pub fn scan_theta_set(h: &HoppingOperator, opts: &ScanOptions) -> Result<ThetaSet> {
    let g = h.geometry();
    let d = g.dimension();
    let period = 2.0 * PI / g.period() as f64;
    let grid = opts.grid_per_dim.max(1);
    let h0 = period / grid as f64;
    let total = grid.pow(d as u32);

    let index_of = |mut i: usize| -> Vec<usize> {
        let mut idx = vec![0; d];
        for c in idx.iter_mut().rev() {
            *c = i % grid;
            i /= grid;
        }
        idx
    };
    let flat = |idx: &[usize]| idx.iter().fold(0, |acc, &c| acc * grid + c);

    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| {
            let t: Vec<f64> = index_of(i).iter().map(|&c| c as f64 * h0).collect();
            band_minimum(h, &t)
        })
        .collect::<Result<_>>()?;
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);

    let dirs = stencil(d);
    // moves smaller than the eigensolver's rounding level are not trusted
    let row_scale = h.entries().map(|(_, v)| v.norm()).sum::<f64>() / g.cell_size() as f64;
    let noise = 64.0 * f64::EPSILON * (1.0 + row_scale);
    let mut candidates: Vec<Candidate> = (0..total)
        .filter(|&i| {
            let v = values[i];
            if v <= grid_min + opts.tol_theta {
                return true;
            }
            let idx = index_of(i);
            dirs.iter().all(|dir| {
                let nb: Vec<usize> = idx
                    .iter()
                    .zip(dir)
                    .map(|(&c, &s)| (c as i64 + s).rem_euclid(grid as i64) as usize)
                    .collect();
                values[flat(&nb)] >= v
            })
        })
        .map(|i| Candidate {
            theta: index_of(i).iter().map(|&c| c as f64 * h0).collect(),
            value: values[i],
            last_gain: 0.0,
        })
        .collect();
    candidates.sort_by(|a, b| a.value.total_cmp(&b.value));
    candidates.truncate(opts.max_candidates.max(1));

    // mandatory bisection rounds
    let mut step = h0;
    for _ in 0..opts.refinements {
        step *= 0.5;
        candidates.par_iter_mut().try_for_each(|c| -> Result<()> {
            if let Some((t, v)) = best_neighbour(h, c, step, &dirs, noise)? {
                c.last_gain = c.value - v;
                c.theta = t;
                c.value = v;
            }
            Ok(())
        })?;
    }
    let resolution = step;

    // compass-search polish down to a negligible step
    let min_step = 1e-13 * period;
    const MAX_MOVES: usize = 10_000;
    candidates.par_iter_mut().try_for_each(|c| -> Result<()> {
        let mut s = step;
        let mut moves = 0;
        while s > min_step && moves < MAX_MOVES {
            match best_neighbour(h, c, s, &dirs, noise)? {
                Some((t, v)) => {
                    c.last_gain = c.value - v;
                    c.theta = t;
                    c.value = v;
                    moves += 1;
                }
                None => s *= 0.5,
            }
        }
        if s > min_step {
            return Err(Error::ScanNotConverged {
                change: c.last_gain,
                tol: opts.tol_theta,
            });
        }
        Ok(())
    })?;

    let e0 = candidates
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    let mut accepted: Vec<Candidate> = candidates
        .into_iter()
        .filter(|c| c.value <= e0 + opts.tol_theta)
        .collect();
    accepted.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut minimizers: Vec<Vec<f64>> = Vec::new();
    for mut c in accepted {
        wrap(&mut c.theta, period);
        if minimizers
            .iter()
            .all(|m| periodic_distance(m, &c.theta, period) > resolution)
        {
            minimizers.push(c.theta);
        }
    }
    minimizers.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    Ok(ThetaSet {
        minimizers,
        e0,
        resolution,
    })
}

/// Ground eigenspace `𝒱₀` of a fiber and the rest of its spectrum.
#[derive(Clone, Debug)]
pub struct GroundSpaceData {
    pub theta: Vec<f64>,
    pub fiber: CMatrix,
    /// Full fiber spectrum, ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors matching `eigenvalues`.
    pub eigenvectors: CMatrix,
    /// Ground multiplicity.
    pub p: usize,
    /// `cell_size × p` orthonormal basis of `𝒱₀`, phase-fixed.
    pub basis: CMatrix,
    /// Distance from the ground level to the next eigenvalue; `None` when
    /// `𝒱₀` is the whole cell space.
    pub gap: Option<f64>,
    /// Clustering threshold used to determine `p`.
    pub tol_deg: f64,
}

impl GroundSpaceData {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn cell_size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn fiber_norm(&self) -> f64 {
        let last = self.eigenvalues[self.eigenvalues.len() - 1];
        self.eigenvalues[0].abs().max(last.abs())
    }
}

/// Clusters the lowest eigenvalues of an arbitrary Hermitian fiber.
pub fn fiber_ground_space(
    theta: &[f64],
    fiber: CMatrix,
    tol: &Tolerances,
) -> Result<GroundSpaceData> {
    let eig = linalg::eigh(&fiber)?;
    let norm = eig.norm();
    let tol_deg = tol.degeneracy(norm);
    let e0 = eig.values[0];
    let p = eig
        .values
        .iter()
        .take_while(|&&v| v <= e0 + tol_deg)
        .count();
    let mut basis = eig.vectors.columns(0, p).into_owned();
    linalg::fix_column_phases(&mut basis);
    let gap = eig.values.get(p).map(|v| v - e0);
    Ok(GroundSpaceData {
        theta: theta.to_vec(),
        fiber,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        p,
        basis,
        gap,
        tol_deg,
    })
}

/// Ground eigenspace at a band minimizer. The fiber's lowest eigenvalue must
/// be zero within `max(tol_theta, tol_shift)·(1 + ‖H(θ)‖)`.
pub fn ground_space(
    h: &HoppingOperator,
    theta: &[f64],
    tol: &Tolerances,
) -> Result<GroundSpaceData> {
    let data = fiber_ground_space(theta, build_floquet(h, theta).into_matrix(), tol)?;
    let bound = tol.tol_theta.max(tol.tol_shift) * (1.0 + data.fiber_norm());
    if data.ground_energy().abs() > bound {
        return Err(Error::NotAMinimizer {
            theta: theta.to_vec(),
            lambda_min: data.ground_energy(),
        });
    }
    Ok(data)
}

/// One line of the `floquet-scan` report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub theta: Vec<f64>,
    pub lambda_min: f64,
    pub p: usize,
    pub gap: Option<f64>,
}

/// Evaluates lowest eigenvalue, ground multiplicity and gap on the uniform
/// grid of `grid_per_dim^d` nodes.
pub fn scan_grid(
    h: &HoppingOperator,
    grid_per_dim: usize,
    tol: &Tolerances,
) -> Result<Vec<ScanRow>> {
    let g = h.geometry();
    let d = g.dimension();
    let grid = grid_per_dim.max(1);
    let step = 2.0 * PI / g.period() as f64 / grid as f64;
    (0..grid.pow(d as u32))
        .into_par_iter()
        .map(|mut i| {
            let mut theta = vec![0.0; d];
            for t in theta.iter_mut().rev() {
                *t = (i % grid) as f64 * step;
                i /= grid;
            }
            let gs = fiber_ground_space(&theta, build_floquet(h, &theta).into_matrix(), tol)?;
            Ok(ScanRow {
                lambda_min: gs.ground_energy(),
                p: gs.p,
                gap: gs.gap,
                theta,
            })
        })
        .collect()
}

/// The `L^d` quasi-momenta `2πj/(LN)` compatible with a torus of `L` cells
/// per direction.
pub fn torus_dual_grid(dimension: usize, period: usize, cells: usize) -> Vec<Vec<f64>> {
    let step = 2.0 * PI / (cells * period) as f64;
    let mut out = vec![Vec::new()];
    for _ in 0..dimension {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..cells).map(move |j| {
                    let mut q = p.clone();
                    q.push(j as f64 * step);
                    q
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::{preset_model, PresetParams};
    use crate::model::{HoppingOperator, LatticeGeometry};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn dipole() -> crate::model::Model {
        preset_model(
            "dipole",
            &PresetParams {
                period: Some(2),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn anderson_fiber_is_cosine_band() {
        let m = preset_model("anderson", &PresetParams::default()).unwrap();
        for &t in &[0.0, 0.3, 1.7, 3.0, 6.0] {
            let f = build_floquet(&m.hopping, &[t]);
            assert!((f.matrix()[(0, 0)] - c(2.0 - 2.0 * t.cos())).norm() < 1e-15);
        }
    }

    #[test]
    fn dipole_fiber_by_hand_enumeration() {
        // m ∈ {-2, 0, 2}: (0,1) gets H(0,1) from m=0 and H(0,-1) from m=2
        let f = build_floquet(&dipole().hopping, &[0.0]);
        let expected = CMatrix::from_row_slice(2, 2, &[c(2.0), c(-2.0), c(-2.0), c(2.0)]);
        assert!(linalg::max_abs(&(f.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn quartic_fiber_at_zero() {
        let m = preset_model("quartic", &PresetParams::default()).unwrap();
        let f = build_floquet(&m.hopping, &[0.0]);
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(6.),
                c(-3.),
                c(-3.),
                c(-3.),
                c(6.),
                c(-3.),
                c(-3.),
                c(-3.),
                c(6.),
            ],
        );
        assert!(linalg::max_abs(&(f.matrix() - expected)) < 1e-15);
        let e = fiber_eigh(&f).unwrap();
        assert!(e.values[0].abs() < 1e-13);
        assert!((e.values[1] - 9.0).abs() < 1e-12 && (e.values[2] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn fiber_is_hermitian_at_generic_theta() {
        let m = preset_model("quartic", &PresetParams::default()).unwrap();
        let f = build_floquet(&m.hopping, &[0.77]);
        assert!(linalg::hermitian_defect(f.matrix()) <= 1e-14 * linalg::max_abs(f.matrix()));
    }

    #[test]
    fn theta_zero_sums_amplitudes() {
        let m = preset_model(
            "dipole",
            &PresetParams {
                dimension: Some(2),
                period: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        let f = build_floquet(&m.hopping, &[0.0, 0.0]);
        let n = m.geometry().cell_size();
        let mut sums = CMatrix::zeros(n, n);
        for (key, v) in m.hopping.entries() {
            sums[(key.k, key.k_prime)] += v;
        }
        assert_eq!(f.matrix(), &sums);
    }

    #[test]
    fn scan_finds_unique_minimum() {
        for name in ["anderson", "quartic"] {
            let m = preset_model(name, &PresetParams::default()).unwrap();
            let set = scan_theta_set(&m.hopping, &ScanOptions::default()).unwrap();
            assert_eq!(set.minimizers, vec![vec![0.0]], "{name}");
            assert!(set.e0.abs() < 1e-12, "{name}: {}", set.e0);
        }
        let set = scan_theta_set(&dipole().hopping, &ScanOptions::default()).unwrap();
        assert_eq!(set.minimizers, vec![vec![0.0]]);
    }

    #[test]
    fn scan_locates_off_grid_minimum() {
        // -Δ with a complex hopping phase
        let g = LatticeGeometry::new(1, 1).unwrap();
        let a = 0.123_456_789;
        let t = Complex64::from_polar(-1.0, a);
        let h = HoppingOperator::from_entries(
            g,
            [
                (0, 0, vec![0], c(2.0)),
                (0, 0, vec![1], t.conj()),
                (0, 0, vec![-1], t),
            ],
        )
        .unwrap();
        let set = scan_theta_set(&h, &ScanOptions::default()).unwrap();
        assert_eq!(set.minimizers.len(), 1);
        // 2 - 2cos(θ + a) with this sign convention
        assert!(
            (set.minimizers[0][0] - (2.0 * PI - a)).abs() < 1e-6,
            "{:?}",
            set.minimizers
        );
        assert!(set.e0.abs() < 1e-11);
    }

    #[test]
    fn scan_reports_symmetric_pair() {
        // next-nearest hopping makes the band minimum a symmetric pair ±θ*
        let g = LatticeGeometry::new(1, 1).unwrap();
        let h = HoppingOperator::from_entries(
            g,
            [
                (0, 0, vec![0], c(0.0)),
                (0, 0, vec![1], c(-1.0)),
                (0, 0, vec![-1], c(-1.0)),
            ],
        )
        .unwrap()
        .shifted_by(0.0);
        // E(θ) = -2cos θ has a unique minimum at 0; flip sign to get θ = π
        let flipped =
            HoppingOperator::from_entries(g, [(0, 0, vec![1], c(1.0)), (0, 0, vec![-1], c(1.0))])
                .unwrap();
        let set = scan_theta_set(&flipped, &ScanOptions::default()).unwrap();
        assert_eq!(set.minimizers.len(), 1);
        assert!((set.minimizers[0][0] - PI).abs() < 1e-9);
        assert!((set.e0 + 2.0).abs() < 1e-12);
        let set0 = scan_theta_set(&h, &ScanOptions::default()).unwrap();
        assert_eq!(set0.minimizers, vec![vec![0.0]]);
    }

    #[test]
    fn ground_space_examples() {
        let tol = Tolerances::default();
        let m = preset_model("anderson", &PresetParams::default()).unwrap();
        let gs = ground_space(&m.hopping, &[0.0], &tol).unwrap();
        assert_eq!(gs.p, 1);
        assert_eq!(gs.gap, None);
        assert!((gs.basis[(0, 0)] - c(1.0)).norm() < 1e-15);

        let gs = ground_space(&dipole().hopping, &[0.0], &tol).unwrap();
        assert_eq!(gs.p, 1);
        let s = 0.5f64.sqrt();
        assert!((gs.basis[(0, 0)] - c(s)).norm() < 1e-14);
        assert!((gs.basis[(1, 0)] - c(s)).norm() < 1e-14);
        assert!((gs.gap.unwrap() - 4.0).abs() < 1e-13);

        let q = preset_model("quartic", &PresetParams::default()).unwrap();
        let gs = ground_space(&q.hopping, &[0.0], &tol).unwrap();
        assert_eq!(gs.p, 1);
        let s = (1.0f64 / 3.0).sqrt();
        for i in 0..3 {
            assert!((gs.basis[(i, 0)] - c(s)).norm() < 1e-14);
        }
        assert!((gs.gap.unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn ground_space_rejects_non_minimizer() {
        let m = preset_model("anderson", &PresetParams::default()).unwrap();
        assert!(matches!(
            ground_space(&m.hopping, &[1.0], &Tolerances::default()),
            Err(Error::NotAMinimizer { .. })
        ));
    }

    #[test]
    fn degenerate_ground_space() {
        // two decoupled copies of the Anderson chain: p = 2 at θ = 0
        let g = LatticeGeometry::new(1, 2).unwrap();
        let h = HoppingOperator::from_entries(
            g,
            [
                (0, 0, vec![0], c(2.0)),
                (1, 1, vec![0], c(2.0)),
                (0, 0, vec![2], c(-1.0)),
                (0, 0, vec![-2], c(-1.0)),
                (1, 1, vec![2], c(-1.0)),
                (1, 1, vec![-2], c(-1.0)),
            ],
        )
        .unwrap();
        let gs = ground_space(&h, &[0.0], &Tolerances::default()).unwrap();
        assert_eq!(gs.p, 2);
        assert_eq!(gs.gap, None);
        let gram = gs.basis.adjoint() * &gs.basis;
        assert!(linalg::max_abs(&(gram - CMatrix::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn dual_grid_size() {
        let grid = torus_dual_grid(2, 3, 4);
        assert_eq!(grid.len(), 16);
        assert!((grid[1][1] - 2.0 * PI / 12.0).abs() < 1e-15);
    }
}
