//! Classical eigenvalue oracles for observables.
//!
//! [`dense_spectrum`] diagonalizes the full matrix (small systems only).
//! [`lanczos_lowest`] runs matrix-free Lanczos with full reorthogonalization
//! and finds the lowest `k` levels one at a time, locking each converged Ritz
//! vector and restarting orthogonally to it. Locking is what lets the solver
//! report degenerate levels with their multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::Observable;
use crate::rng::{streams, SeedStream};
use crate::statevector::StateVector;

pub const MAX_DENSE_QUBITS: usize = 12;
pub const MAX_LANCZOS_K: usize = 4;

/// Dense matrix of an observable in the computational basis.
pub fn dense_matrix(h: &Observable) -> Result<DMatrix<Complex64>> {
    guard_dense(h)?;
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for t in h.terms() {
        let base = t.string.base_phase();
        let x = t.string.x_mask() as usize;
        for j in 0..dim {
            m[(j ^ x, j)] += t.string.phase_of(base, j) * t.coefficient;
        }
    }
    Ok(m)
}

fn guard_dense(h: &Observable) -> Result<()> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            what: "dense qubits",
            value: h.n_qubits(),
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Full ascending spectrum.
pub fn dense_spectrum(h: &Observable) -> Result<Vec<f64>> {
    guard_dense(h)?;
    let real = h
        .terms()
        .iter()
        .all(|t| (t.string.x_mask() & t.string.z_mask()).count_ones() % 2 == 0);
    let mut values: Vec<f64> = if real {
        // even Y count: every matrix element is real
        let m = dense_matrix(h)?.map(|c| c.re);
        SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(dense_matrix(h)?)
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Ascending spectrum of a diagonal observable by direct enumeration.
pub fn diagonal_spectrum(h: &Observable) -> Result<Vec<f64>> {
    if !h.is_diagonal() {
        return Err(Error::InvalidArgument("observable is not diagonal".into()));
    }
    if h.n_qubits() > 24 {
        return Err(Error::TooLarge {
            what: "diagonal qubits",
            value: h.n_qubits(),
            limit: 24,
        });
    }
    let mut v: Vec<f64> = (0..1usize << h.n_qubits())
        .map(|b| h.diagonal_element(b))
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    pub k: usize,
    /// Ritz-value drift allowed over the last five steps.
    pub tol: f64,
    /// Krylov steps per level.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            k: 1,
            tol: 1e-9,
            max_iter: 400,
            seed: 0,
        }
    }
}

/// The `k` lowest eigenvalues, ascending, with multiplicity.
pub fn lanczos_lowest(h: &Observable, cfg: &LanczosConfig) -> Result<Vec<f64>> {
    if cfg.k == 0 || cfg.k > MAX_LANCZOS_K {
        return Err(Error::InvalidArgument(format!(
            "k = {} not in 1..={MAX_LANCZOS_K}",
            cfg.k
        )));
    }
    let dim = 1usize << h.n_qubits();
    if cfg.k > dim {
        return Err(Error::InvalidArgument(format!(
            "k = {} exceeds dimension {dim}",
            cfg.k
        )));
    }
    let seeds = SeedStream::new(cfg.seed).derive(streams::LANCZOS);
    let mut locked: Vec<Vec<Complex64>> = Vec::with_capacity(cfg.k);
    let mut values = Vec::with_capacity(cfg.k);
    for level in 0..cfg.k {
        let mut rng = seeds.child(level as u64);
        let mut start = StateVector::random(h.n_qubits(), &mut rng)?.into_amplitudes();
        orthogonalize(&mut start, &locked);
        let (value, vector) = lowest_pair(h, start, &locked, cfg).map_err(|e| match e {
            Error::NoConvergence {
                iterations,
                estimates,
            } => Error::NoConvergence {
                iterations,
                estimates: values.iter().copied().chain(estimates).collect(),
            },
            e => e,
        })?;
        values.push(value);
        locked.push(vector);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Lowest `k` eigenvalues by the cheapest exact route available.
pub fn lowest_eigenvalues(h: &Observable, k: usize, seed: u64) -> Result<Vec<f64>> {
    if h.is_diagonal() && h.n_qubits() <= 24 {
        return Ok(diagonal_spectrum(h)?.into_iter().take(k).collect());
    }
    if h.n_qubits() <= 8 {
        return Ok(dense_spectrum(h)?.into_iter().take(k).collect());
    }
    lanczos_lowest(
        h,
        &LanczosConfig {
            k,
            seed,
            ..LanczosConfig::default()
        },
    )
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(w, -c, v);
        }
    }
}

/// Number of eigenvalues of the tridiagonal `(a, b)` below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] };
        d = a[i] - x - if i == 0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_min(a: &[f64], b: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..a.len() {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + b.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn lowest_pair(
    h: &Observable,
    mut v: Vec<Complex64>,
    locked: &[Vec<Complex64>],
    cfg: &LanczosConfig,
) -> Result<(f64, Vec<Complex64>)> {
    let dim = v.len();
    let nv = norm(&v);
    if nv < 1e-300 {
        return Err(Error::InvalidArgument("degenerate Lanczos start vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let reachable = dim - locked.len();
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let scale = h.spectral_bound().max(1.0);

    for step in 0..cfg.max_iter {
        let current = &basis[step];
        h.matvec_into(current, &mut w);
        let a = dot(current, &w).re;
        alpha.push(a);
        axpy(&mut w, Complex64::new(-a, 0.0), current);
        if step > 0 {
            axpy(&mut w, Complex64::new(-beta[step - 1], 0.0), &basis[step - 1]);
        }
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);

        let theta = tridiagonal_min(&alpha, &beta);
        history.push(theta);
        let exhausted = b < 1e-12 * scale || basis.len() >= reachable;
        let drift_ok = history.len() >= 5 && {
            let last = &history[history.len() - 5..];
            let (mn, mx) = last
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &t| {
                    (mn.min(t), mx.max(t))
                });
            mx - mn < cfg.tol
        };
        if exhausted || drift_ok {
            let (value, coeffs) = ritz_lowest(&alpha, &beta);
            let residual = b * coeffs.last().copied().unwrap_or(0.0).abs();
            if exhausted || residual < 1e-8 * scale {
                let mut y = vec![Complex64::new(0.0, 0.0); dim];
                for (c, vb) in coeffs.iter().zip(&basis) {
                    axpy(&mut y, Complex64::new(*c, 0.0), vb);
                }
                orthogonalize(&mut y, locked);
                let ny = norm(&y);
                y.iter_mut().for_each(|x| *x /= ny);
                return Ok((value, y));
            }
        }
        beta.push(b);
        let next: Vec<Complex64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        estimates: history.last().copied().into_iter().collect(),
    })
}

/// Lowest eigenpair of the tridiagonal Lanczos matrix.
fn ritz_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    (value, eig.eigenvectors.column(idx).iter().copied().collect())
}
