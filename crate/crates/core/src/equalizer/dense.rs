//! Dense reference equalizers on the explicit channel matrix.
//!
//! Zero-forcing solves `H x = y` by LU with full pivoting. For a square,
//! invertible `H` this is the same vector as `(H^H H)^{-1} H^H y` without
//! squaring the condition number. Partial pivoting is not enough here: sparse
//! doubly circulant channels are a known worst case for its element growth
//! (pivots of 1e18 on a matrix with norm 2 have been observed at 16x32). MMSE factors `H^H H + sigma^2 I` with a
//! Cholesky decomposition.
//!
//! Multiplication counts are those of the textbook algorithms (unblocked LU,
//! Hermitian Gram product, Cholesky, triangular solves).

use faer::linalg::matmul::triangular::{matmul, BlockStructure};
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, Par, Side};
use num_complex::Complex64;

use super::{EqualizedFrame, Method, NoiseModel};
use crate::channel::DenseChannel;
use crate::error::{Error, Result};
use crate::grid::DdVector;

/// Pivot-ratio condition estimate above which zero-forcing refuses to solve.
pub const ZF_CONDITION_LIMIT: f64 = 1e12;

/// LU factorization (pivot search is not counted) plus forward and back substitution of order `n`.
pub fn dense_zf_mults(n: usize) -> u64 {
    let n = n as u64;
    if n == 0 {
        return 0;
    }
    let factor = n * (n - 1) / 2 + (n - 1) * n * (2 * n - 1) / 6;
    let solves = n * (n - 1) + n;
    factor + solves
}

/// Gram product, right-hand side, Cholesky and two triangular solves.
pub fn dense_mmse_mults(n: usize) -> u64 {
    let n = n as u64;
    let gram = n * n * (n + 1) / 2;
    let rhs = n * n;
    let cholesky: u64 = (0..n).map(|j| j + (n - j - 1) * (j + 1)).sum();
    let solves = n * (n + 1);
    gram + rhs + cholesky + solves
}

pub fn zf_dense(h: &DenseChannel, y: &DdVector) -> Result<EqualizedFrame> {
    let n = check_len(h, y)?;
    let lu = h.matrix().full_piv_lu();
    let condition = pivot_condition(&lu.U());
    if condition.is_nan() || condition > ZF_CONDITION_LIMIT {
        return Err(Error::Singular { condition });
    }
    let rhs = column(y);
    let x = lu.solve(&rhs);
    Ok(EqualizedFrame {
        estimate: to_grid(h, &x)?,
        method: Method::DenseZf,
        mults: dense_zf_mults(n),
    })
}

pub fn mmse_dense(h: &DenseChannel, y: &DdVector, noise: NoiseModel) -> Result<EqualizedFrame> {
    let sigma2 = noise.sigma2();
    if sigma2 == 0.0 {
        let mut frame = zf_dense(h, y)?;
        frame.method = Method::DenseMmse;
        return Ok(frame);
    }
    let n = check_len(h, y)?;
    let hm = h.matrix();

    let mut gram = Mat::<Complex64>::zeros(n, n);
    matmul(
        gram.as_mut(),
        BlockStructure::TriangularLower,
        Accum::Replace,
        hm.adjoint(),
        BlockStructure::Rectangular,
        hm,
        BlockStructure::Rectangular,
        Complex64::new(1.0, 0.0),
        Par::Seq,
    );
    for i in 0..n {
        gram[(i, i)] += Complex64::new(sigma2, 0.0);
    }
    let llt = gram
        .llt(Side::Lower)
        .map_err(|_| Error::Singular {
            condition: f64::INFINITY,
        })?;
    let rhs = hm.adjoint() * column(y);
    let x = llt.solve(&rhs);
    Ok(EqualizedFrame {
        estimate: to_grid(h, &x)?,
        method: Method::DenseMmse,
        mults: dense_mmse_mults(n),
    })
}

fn check_len(h: &DenseChannel, y: &DdVector) -> Result<usize> {
    let n = h.order();
    if y.len() != n {
        return Err(Error::dims(
            format!("vector of length {n}"),
            format!("vector of length {}", y.len()),
        ));
    }
    Ok(n)
}

fn column(y: &DdVector) -> Mat<Complex64> {
    let v = y.as_slice();
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn to_grid(h: &DenseChannel, x: &Mat<Complex64>) -> Result<crate::grid::DdGrid> {
    let values = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    DdVector::new(values).unvec(h.n_doppler(), h.n_delay())
}

fn pivot_condition(u: &faer::MatRef<'_, Complex64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows().min(u.ncols()) {
        let a = u[(i, i)].norm();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
