//! Finite-volume realizations of the random operator on a torus of `L^d`
//! cells, their certified lowest eigenvalue and Monte-Carlo sampling.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet;
use crate::linalg::{self, CMatrix, CVector};
use crate::model::{HoppingOperator, Model, SingleCellPotential};

/// How the couplings `ω_c` of a realization are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Sampler {
    /// `ω_c ∈ {s₋, s₊}` with equal probability.
    EndpointBernoulli,
    /// `ω_c` uniform on `[s₋, s₊]`.
    Uniform,
    /// `ω_c = q` for every cell.
    PeriodicConstant(f64),
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::EndpointBernoulli => f.write_str("endpoint"),
            Sampler::Uniform => f.write_str("uniform"),
            Sampler::PeriodicConstant(q) => write!(f, "constant:{q}"),
        }
    }
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoint" | "endpoint-bernoulli" => Ok(Sampler::EndpointBernoulli),
            "uniform" => Ok(Sampler::Uniform),
            _ => s
                .strip_prefix("constant:")
                .and_then(|q| q.parse().ok())
                .map(Sampler::PeriodicConstant)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown sampler `{s}` (expected endpoint, uniform or constant:<q>)"
                    ))
                }),
        }
    }
}

impl From<Sampler> for String {
    fn from(s: Sampler) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for Sampler {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Sampler {
    pub fn draw(&self, rng: &mut ChaCha8Rng, s_minus: f64, s_plus: f64, cells: usize) -> Vec<f64> {
        (0..cells)
            .map(|_| match self {
                Sampler::EndpointBernoulli => {
                    if rng.random::<bool>() {
                        s_plus
                    } else {
                        s_minus
                    }
                }
                Sampler::Uniform => rng.random_range(s_minus..=s_plus),
                Sampler::PeriodicConstant(q) => *q,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
}

/// Sparse Hermitian matrix in compressed-row form.
#[derive(Clone, Debug)]
pub struct TorusOperator {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl TorusOperator {
    /// `H₀ + ε Σ_c ω_c V^□(· − Nc)` on `L^d` cells with periodic wrap-around.
    /// Site `(c, k)` has index `cell_index(c)·N^d + k`; translations that
    /// alias on small tori are summed.
    pub fn assemble(
        h: &HoppingOperator,
        v: &SingleCellPotential,
        epsilon: f64,
        cells: usize,
        omega: &[f64],
    ) -> Result<Self> {
        let g = h.geometry();
        let d = g.dimension();
        let size = g.cell_size();
        let period = g.period() as i64;
        let n_cells = cells.pow(d as u32);
        if omega.len() != n_cells {
            return Err(Error::Config(format!(
                "{} couplings for a torus of {n_cells} cells",
                omega.len()
            )));
        }
        let dim = n_cells * size;
        let cell_coords = |mut i: usize| {
            let mut c = vec![0i64; d];
            for x in c.iter_mut().rev() {
                *x = (i % cells) as i64;
                i /= cells;
            }
            c
        };
        let cell_index = |c: &[i64]| {
            c.iter().fold(0usize, |acc, &x| {
                acc * cells + x.rem_euclid(cells as i64) as usize
            })
        };
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for ci in 0..n_cells {
            let c = cell_coords(ci);
            for (key, amp) in h.entries() {
                let target: Vec<i64> = c.iter().zip(&key.m).map(|(x, m)| x + m / period).collect();
                rows[ci * size + key.k].push((cell_index(&target) * size + key.k_prime, *amp));
            }
            if omega[ci] != 0.0 && epsilon != 0.0 {
                let w = epsilon * omega[ci];
                for k in 0..size {
                    for kp in 0..size {
                        let z = v.matrix()[(k, kp)];
                        if z != Complex64::new(0.0, 0.0) {
                            rows[ci * size + k].push((ci * size + kp, z * w));
                        }
                    }
                }
            }
        }
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, z) in row {
                if last == Some(c) {
                    *vals.last_mut().expect("previous entry") += z;
                } else {
                    cols.push(c);
                    vals.push(z);
                    last = Some(c);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self {
            dim,
            row_start,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        CVector::from_fn(self.dim, |i, _| {
            (self.row_start[i]..self.row_start[i + 1])
                .map(|j| self.vals[j] * x[self.cols[j]])
                .sum()
        })
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in self.row_start[i]..self.row_start[i + 1] {
                m[(i, self.cols[j])] += self.vals[j];
            }
        }
        m
    }

    /// Maximal absolute row sum, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                (self.row_start[i]..self.row_start[i + 1])
                    .map(|j| self.vals[j].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenOptions {
    /// Largest matrix solved by dense diagonalization.
    pub dense_limit: usize,
    /// Certification threshold relative to `‖H‖`.
    pub rel_residual: f64,
    pub krylov_dim: usize,
    pub keep: usize,
    pub max_restarts: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 4096,
            rel_residual: 1e-10,
            krylov_dim: 64,
            keep: 12,
            max_restarts: 5000,
        }
    }
}

/// Lowest eigenpair with its residual `‖Hx − λx‖`.
#[derive(Clone, Debug)]
pub struct LowestEigenpair {
    pub value: f64,
    pub vector: CVector,
    pub residual: f64,
    pub bound: f64,
}

fn orthogonalize(r: &mut CVector, basis: &[CVector]) {
    // classical Gram–Schmidt, applied twice
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(r);
            r.axpy(-c, b, Complex64::new(1.0, 0.0));
        }
    }
}

/// Thick-restart Rayleigh–Ritz on Krylov spaces, keeping the lowest `keep`
/// Ritz vectors at each restart.
fn lowest_iterative(
    op: &TorusOperator,
    opts: &EigenOptions,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<(f64, CVector, f64)> {
    let n = op.dim();
    let m = opts.krylov_dim.min(n).max(2);
    let keep = opts.keep.min(m - 1).max(1);
    let random = |rng: &mut ChaCha8Rng| {
        CVector::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    };
    let mut v: Vec<CVector> = Vec::with_capacity(m);
    let mut w: Vec<CVector> = Vec::with_capacity(m);
    let mut t = CMatrix::zeros(m, m);
    let mut next = random(rng);
    let mut best = f64::INFINITY;
    for _ in 0..opts.max_restarts {
        while v.len() < m {
            let mut r = next.clone();
            orthogonalize(&mut r, &v);
            let mut norm = r.norm();
            if norm < 1e-10 * next.norm().max(1e-300) {
                r = random(rng);
                orthogonalize(&mut r, &v);
                norm = r.norm();
            }
            r.unscale_mut(norm);
            let hr = op.apply(&r);
            let j = v.len();
            for (i, vi) in v.iter().enumerate() {
                let z = vi.dotc(&hr);
                t[(i, j)] = z;
                t[(j, i)] = z.conj();
            }
            t[(j, j)] = Complex64::new(r.dotc(&hr).re, 0.0);
            next = hr.clone();
            v.push(r);
            w.push(hr);
        }
        let eig = linalg::eigh(&t)?;
        let combine = |vs: &[CVector], y: nalgebra::DVectorView<Complex64>| {
            let mut out = CVector::zeros(n);
            for (vi, &c) in vs.iter().zip(y.iter()) {
                out.axpy(c, vi, Complex64::new(1.0, 0.0));
            }
            out
        };
        let theta = eig.values[0];
        let x = combine(&v, eig.vectors.column(0));
        let hx = combine(&w, eig.vectors.column(0));
        let resid_vec = &hx - x.map(|z| z * theta);
        let residual = resid_vec.norm();
        best = best.min(residual);
        if residual <= tol {
            return Ok((theta, x, residual));
        }
        let new_v: Vec<CVector> = (0..keep)
            .map(|i| combine(&v, eig.vectors.column(i)))
            .collect();
        let new_w: Vec<CVector> = (0..keep)
            .map(|i| combine(&w, eig.vectors.column(i)))
            .collect();
        v = new_v;
        w = new_w;
        t = CMatrix::zeros(m, m);
        for (i, &val) in eig.values.iter().take(keep).enumerate() {
            t[(i, i)] = Complex64::new(val, 0.0);
        }
        next = resid_vec;
    }
    Err(Error::IterativeSolver {
        residual: best,
        restarts: opts.max_restarts,
    })
}

/// Certified lowest eigenpair: dense below `dense_limit`, iterative above.
/// The residual is recomputed from the sparse operator and must be at most
/// `rel_residual·‖H‖`.
pub fn lowest_eigenpair(
    op: &TorusOperator,
    opts: &EigenOptions,
    rng: &mut ChaCha8Rng,
) -> Result<LowestEigenpair> {
    let norm = op.norm_bound();
    let bound = opts.rel_residual * norm.max(f64::MIN_POSITIVE);
    let (value, vector) = if op.dim() <= opts.dense_limit {
        let dense = op.to_dense();
        let eig = if dense.iter().all(|z| z.im == 0.0) {
            let re: DMatrix<f64> = dense.map(|z| z.re);
            let e = nalgebra::SymmetricEigen::try_new(re, f64::EPSILON, 1000 * op.dim())
                .ok_or(Error::Eigensolver { dim: op.dim() })?;
            let i = e.eigenvalues.imin();
            (
                e.eigenvalues[i],
                e.eigenvectors.column(i).map(|x| Complex64::new(x, 0.0)),
            )
        } else {
            let e = linalg::eigh(&dense)?;
            (e.values[0], e.vectors.column(0).into_owned())
        };
        eig
    } else {
        let (value, vector, _) = lowest_iterative(op, opts, rng, 0.5 * bound)?;
        (value, vector)
    };
    let scale = vector.norm();
    let vector = vector.unscale(scale);
    let residual = (op.apply(&vector) - vector.map(|z| z * value)).norm();
    if residual > bound {
        return Err(Error::Uncertified { residual, bound });
    }
    Ok(LowestEigenpair {
        value,
        vector,
        residual,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxSpectrumSample {
    #[serde(rename = "L")]
    pub cells: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub stream: u64,
    pub omega: Vec<f64>,
    pub lambda_min: f64,
    pub residual: f64,
    pub boundary: Boundary,
}

fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn box_sample(
    model: &Model,
    epsilon: f64,
    cells: usize,
    sampler: Sampler,
    seed: u64,
    stream: u64,
    opts: &EigenOptions,
) -> Result<BoxSpectrumSample> {
    let g = model.geometry();
    let mut rng = sample_rng(seed, stream);
    let omega = sampler.draw(
        &mut rng,
        model.disorder.s_minus(),
        model.disorder.s_plus(),
        cells.pow(g.dimension() as u32),
    );
    let op = TorusOperator::assemble(&model.hopping, &model.potential, epsilon, cells, &omega)?;
    let pair = lowest_eigenpair(&op, opts, &mut rng)?;
    Ok(BoxSpectrumSample {
        cells,
        epsilon,
        seed,
        stream,
        omega,
        lambda_min: pair.value,
        residual: pair.residual,
        boundary: Boundary::Periodic,
    })
}

/// One realization on the torus of `L^d` cells, drawn from `seed`.
pub fn box_min_eig(
    model: &Model,
    epsilon: f64,
    cells: usize,
    sampler: Sampler,
    seed: u64,
    opts: &EigenOptions,
) -> Result<BoxSpectrumSample> {
    box_sample(model, epsilon, cells, sampler, seed, 0, opts)
}

/// Lowest eigenvalue over the `L^d` dual quasi-momenta `2πj/(LN)` of
/// `H₀^□(θ) + εqV^□`, which equals the torus minimum for constant coupling.
pub fn torus_fiber_oracle(model: &Model, epsilon: f64, cells: usize, q: f64) -> Result<f64> {
    let g = model.geometry();
    let shift = model.potential.matrix().map(|z| z * (epsilon * q));
    floquet::torus_dual_grid(g.dimension(), g.period(), cells)
        .par_iter()
        .map(|t| {
            linalg::lambda_min(&(floquet::build_floquet(&model.hopping, t).into_matrix() + &shift))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub epsilon: f64,
    #[serde(rename = "L")]
    pub cells: usize,
    pub samples: usize,
    pub sampler: Sampler,
    pub seed: u64,
    /// Lowest eigenvalue of each realization, in sample order.
    pub lambda_min: Vec<f64>,
    pub minimum: f64,
    pub mean: f64,
    pub max_residual: f64,
    /// `min_{q ∈ {s₋, s₊}}` of the constant-coupling torus minimum.
    pub periodic_bound: f64,
    /// Running minimum over samples, in sample order.
    pub running_minimum: Vec<f64>,
}

/// Independent realizations, sample `i` drawn from stream `i` of `seed`.
/// Results do not depend on the number of worker threads.
pub fn monte_carlo(
    model: &Model,
    epsilon: f64,
    cells: usize,
    samples: usize,
    sampler: Sampler,
    seed: u64,
    opts: &EigenOptions,
) -> Result<MonteCarloSummary> {
    if samples == 0 {
        return Err(Error::Config(
            "Monte Carlo needs at least one sample".into(),
        ));
    }
    let draws: Vec<BoxSpectrumSample> = (0..samples as u64)
        .into_par_iter()
        .map(|i| box_sample(model, epsilon, cells, sampler, seed, i, opts))
        .collect::<Result<_>>()?;
    let lambda_min: Vec<f64> = draws.iter().map(|d| d.lambda_min).collect();
    let running_minimum = lambda_min
        .iter()
        .scan(f64::INFINITY, |m, &x| {
            *m = m.min(x);
            Some(*m)
        })
        .collect();
    let periodic_bound = torus_fiber_oracle(model, epsilon, cells, model.disorder.s_minus())?.min(
        torus_fiber_oracle(model, epsilon, cells, model.disorder.s_plus())?,
    );
    Ok(MonteCarloSummary {
        epsilon,
        cells,
        samples,
        sampler,
        seed,
        minimum: lambda_min.iter().copied().fold(f64::INFINITY, f64::min),
        mean: lambda_min.iter().sum::<f64>() / samples as f64,
        max_residual: draws.iter().map(|d| d.residual).fold(0.0, f64::max),
        lambda_min,
        periodic_bound,
        running_minimum,
    })
}
