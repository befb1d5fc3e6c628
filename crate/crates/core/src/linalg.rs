//! Small dense linear-algebra kernels: log-determinants by LU with partial
//! pivoting, one-dimensional kernels, and spectral radii of nonnegative matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Largest matrix handled by the dense kernel and eigen solvers.
pub const DENSE_LIMIT: usize = 512;

/// A determinant stored as `sign * exp(ln_abs)` so that products of many
/// rates neither overflow nor underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        sign: 1.0,
        ln_abs: 0.0,
    };
    pub const ZERO: LogDet = LogDet {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

/// Determinant of a square matrix by LU factorization with partial pivoting.
/// The empty matrix has determinant one.
pub fn log_det(m: &DMatrix<f64>) -> LogDet {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut sign = 1.0;
    let mut ln_abs = 0.0;
    for k in 0..n {
        let (mut piv, mut best) = (k, a[(k, k)].abs());
        for r in k + 1..n {
            let v = a[(r, k)].abs();
            if v > best {
                piv = r;
                best = v;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return LogDet::ZERO;
        }
        if piv != k {
            a.swap_rows(piv, k);
            sign = -sign;
        }
        let d = a[(k, k)];
        if d < 0.0 {
            sign = -sign;
        }
        ln_abs += d.abs().ln();
        for r in k + 1..n {
            let f = a[(r, k)] / d;
            if f == 0.0 {
                continue;
            }
            for c in k + 1..n {
                let u = a[(k, c)];
                a[(r, c)] -= f * u;
            }
        }
    }
    LogDet { sign, ln_abs }
}

/// Principal submatrix keeping only the listed indices (in the given order).
pub fn principal_submatrix(m: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(keep.len(), keep.len(), |r, c| m[(keep[r], keep[c])])
}

/// Normalized kernel vector of a matrix whose kernel is one-dimensional.
///
/// Entries are expected to share a sign; the vector is flipped to be
/// nonnegative, values down to `-1e-12` are clamped to zero, and the result
/// is renormalized to unit sum.
pub fn kernel_vector(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let s = &svd.singular_values;
    let smax = s.max();
    let tol = 16.0 * n as f64 * f64::EPSILON * smax;
    let zeros = s.iter().filter(|&&x| x <= tol).count();
    if zeros != 1 {
        return Err(Error::DegenerateKernel);
    }
    let imin = s.imin();
    let mut v: DVector<f64> = v_t.row(imin).transpose();
    if v.sum() < 0.0 {
        v.neg_mut();
    }
    let scale = v.amax();
    for x in v.iter_mut() {
        if *x < 0.0 {
            if *x < -1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::DegenerateKernel);
            }
            *x = 0.0;
        }
    }
    let total = v.sum();
    Ok(v / total)
}

/// Subtraction-free (Grassmann–Taksar–Heyman) elimination of state `k` from
/// the rate matrix `q` (`q[(i, j)]` = rate `i -> j`, diagonal ignored).
/// `live` marks states not yet eliminated; returns the pivot, the total rate
/// out of `k` into live states. Column `k` is divided by the pivot.
fn gth_step(q: &mut DMatrix<f64>, live: &mut [bool], k: usize) -> f64 {
    live[k] = false;
    let n = q.nrows();
    let pivot: f64 = (0..n).filter(|&j| live[j]).map(|j| q[(k, j)]).sum();
    if pivot == 0.0 {
        return 0.0;
    }
    for i in (0..n).filter(|&i| live[i]) {
        q[(i, k)] /= pivot;
        let f = q[(i, k)];
        if f == 0.0 {
            continue;
        }
        for j in 0..n {
            if live[j] && j != i {
                let r = q[(k, j)];
                q[(i, j)] += f * r;
            }
        }
    }
    pivot
}

/// Stationary vector of an irreducible rate matrix by GTH elimination.
///
/// Returns the normalized populations and `ln D`, where `D` is the sum of
/// the principal `(n-1)`-minors of the generator (the matrix-tree sum).
pub fn gth_stationary(rates: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    let n = rates.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let mut q = rates.clone();
    let mut live = vec![true; n];
    let mut ln_minor = 0.0;
    for k in (1..n).rev() {
        let pivot = gth_step(&mut q, &mut live, k);
        if pivot == 0.0 {
            return Err(Error::DegenerateKernel);
        }
        ln_minor += pivot.ln();
    }
    let mut x = DVector::zeros(n);
    if n > 0 {
        x[0] = 1.0;
    }
    for k in 1..n {
        x[k] = (0..k).map(|i| x[i] * q[(i, k)]).sum();
    }
    let total = x.sum();
    if !total.is_finite() {
        return Err(Error::NonFinite("stationary populations".into()));
    }
    Ok((x / total, ln_minor + total.ln()))
}

/// `ln det` of the principal submatrix of the generator `-Q` over the states
/// not in `removed`, by GTH elimination; `None` when the minor vanishes.
pub fn gth_ln_minor(rates: &DMatrix<f64>, removed: &[bool]) -> Option<f64> {
    let mut q = rates.clone();
    let mut live = vec![true; q.nrows()];
    let mut ln = 0.0;
    for k in (0..q.nrows()).filter(|&k| !removed[k]) {
        let pivot = gth_step(&mut q, &mut live, k);
        if pivot == 0.0 {
            return None;
        }
        ln += pivot.ln();
    }
    Some(ln)
}

/// Options for [`spectral_radius`].
#[derive(Debug, Clone, Copy)]
pub struct PowerIteration {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            max_iter: 20_000,
            rel_tol: 1e-10,
        }
    }
}

/// Spectral radius of an entrywise nonnegative square matrix.
///
/// Power iteration from the all-ones vector; if it stalls (periodic
/// spectra such as bipartite graphs) matrices up to 64x64 fall back to a
/// full eigensolve.
pub fn spectral_radius(m: &DMatrix<f64>, opts: PowerIteration) -> Result<f64> {
    assert!(m.is_square(), "spectral radius of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if m.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidParams(
            "spectral radius needs a finite nonnegative matrix".into(),
        ));
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..opts.max_iter {
        let w = m * &v;
        let lambda = v.dot(&w);
        let resid = (&w - &v * lambda).norm();
        if resid <= opts.rel_tol * lambda.abs() {
            return Ok(lambda);
        }
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w / norm;
    }
    if n <= 64 {
        return Ok(full_spectral_radius(m));
    }
    Err(Error::NonConvergence(format!(
        "power iteration ({} iterations)",
        opts.max_iter
    )))
}

fn full_spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m == &m.transpose() {
        SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, &x| a.max(x.abs()))
    } else {
        m.complex_eigenvalues()
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()))
    }
}
