//! Jacobi iterations backing the SVD and the symmetric eigendecomposition.
//!
//! One-sided (Hestenes) rotations orthogonalize matrix columns with high
//! relative accuracy, which is what the truncation/pseudo-inverse layers
//! above need; problem sizes here are a few hundred at most, so the O(n^3)
//! sweeps of a dense cyclic scheme are the simplest adequate tool.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::scalar::{abs, sqrt};

/// Hard cap; cyclic Jacobi normally converges in well under 20 sweeps.
const MAX_SWEEPS: usize = 64;

/// Relative orthogonality target: a computed inner product of two truly
/// orthogonal length-d vectors carries rounding noise of order
/// sqrt(d) * eps * |a| * |b|, so the stop threshold must sit above it.
fn conv_eps(dim: usize) -> f64 {
    4.0 * f64::EPSILON * sqrt(dim as f64)
}

/// Givens angle zeroing the (p,q) coupling: returns (c, s) from the stable
/// smaller-root formula t^2 + 2*zeta*t - 1 = 0.
fn rotation(zeta: f64) -> (f64, f64) {
    let t = if zeta == 0.0 {
        1.0
    } else {
        let sign = if zeta > 0.0 { 1.0 } else { -1.0 };
        sign / (abs(zeta) + sqrt(1.0 + zeta * zeta))
    };
    let c = 1.0 / sqrt(1.0 + t * t);
    (c, c * t)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rotates the row pair (p, q) of a row-major buffer in place.
fn rotate_rows(data: &mut [f64], cols: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = data.split_at_mut(hi * cols);
    let row_lo = &mut head[lo * cols..(lo + 1) * cols];
    let row_hi = &mut tail[..cols];
    let (rp, rq) = if p < q { (row_lo, row_hi) } else { (row_hi, row_lo) };
    for (xp, xq) in rp.iter_mut().zip(rq.iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Full SVD of `a` via one-sided Jacobi: returns (U m×m, sigma, V n×n) with
/// `a = U * diag(sigma) * V^T`, singular values sorted non-increasing.
pub fn svd_jacobi(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let (u, s, v) = svd_tall(&a.transpose());
        (v, s, u)
    }
}

/// SVD for m >= n. Works on the transpose so every column of the input is a
/// contiguous row of the scratch buffer.
fn svd_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let m = a.rows();
    let n = a.cols();

    // w[j*m..] holds column j of `a`; vt[j*n..] holds column j of V.
    let mut w = vec![0.0; n * m];
    for i in 0..m {
        for j in 0..n {
            w[j * m + i] = a[(i, j)];
        }
    }
    let mut vt = vec![0.0; n * n];
    for j in 0..n {
        vt[j * n + j] = 1.0;
    }

    let eps = conv_eps(m);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                // Exact moments each visit; maintained norms lose accuracy
                // through cancellation on near-parallel columns.
                let alpha = dot(&w[p * m..(p + 1) * m], &w[p * m..(p + 1) * m]);
                let beta = dot(&w[q * m..(q + 1) * m], &w[q * m..(q + 1) * m]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&w[p * m..(p + 1) * m], &w[q * m..(q + 1) * m]);
                if abs(gamma) <= eps * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let (c, s) = rotation((beta - alpha) / (2.0 * gamma));
                rotate_rows(&mut w, m, p, q, c, s);
                rotate_rows(&mut vt, n, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    // Exact norms, then a deterministic non-increasing order.
    let mut sigma: Vec<f64> = (0..n).map(|j| sqrt(dot(&w[j * m..(j + 1) * m], &w[j * m..(j + 1) * m]))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));
    sigma = order.iter().map(|&j| sigma[j]).collect();

    let mut v = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            v[(i, dst)] = vt[src * n + i];
        }
    }

    // Left vectors: normalized data columns where sigma > 0, orthonormal
    // completion for the rest (rank deficiency and the m-n tail).
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (dst, &src) in order.iter().enumerate() {
        if sigma[dst] > 0.0 {
            let col = &w[src * m..(src + 1) * m];
            u_cols.push(col.iter().map(|&x| x / sigma[dst]).collect());
        }
    }
    complete_basis(&mut u_cols, m);

    let mut u = Matrix::zeros(m, m);
    for (j, col) in u_cols.iter().enumerate() {
        for i in 0..m {
            u[(i, j)] = col[i];
        }
    }

    fix_signs(&mut u, &mut v, &sigma);
    (u, sigma, v)
}

/// Extends an orthonormal column set to a full basis of R^dim by scanning
/// standard basis candidates and greedily taking the largest residual.
fn complete_basis(cols: &mut Vec<Vec<f64>>, dim: usize) {
    if cols.len() >= dim {
        cols.truncate(dim);
        return;
    }
    let mut residuals: Vec<Vec<f64>> = (0..dim)
        .map(|c| {
            let mut r = vec![0.0; dim];
            r[c] = 1.0;
            for u in cols.iter() {
                let proj = dot(u, &r);
                for (ri, ui) in r.iter_mut().zip(u) {
                    *ri -= proj * ui;
                }
            }
            r
        })
        .collect();

    while cols.len() < dim {
        let mut best = 0;
        let mut best_sq = -1.0;
        for (c, r) in residuals.iter().enumerate() {
            let sq = dot(r, r);
            if sq > best_sq {
                best_sq = sq;
                best = c;
            }
        }
        let mut next = residuals[best].clone();
        // Second orthogonalization pass keeps the completion tight.
        for u in cols.iter() {
            let proj = dot(u, &next);
            for (xi, ui) in next.iter_mut().zip(u) {
                *xi -= proj * ui;
            }
        }
        let norm = sqrt(dot(&next, &next));
        for x in &mut next {
            *x /= norm;
        }
        for r in &mut residuals {
            let proj = dot(&next, r);
            for (ri, ui) in r.iter_mut().zip(&next) {
                *ri -= proj * ui;
            }
        }
        cols.push(next);
    }
}

/// Canonical signs: the dominant entry of each left vector paired with a
/// positive singular value is made positive, flipping its right partner too.
fn fix_signs(u: &mut Matrix, v: &mut Matrix, sigma: &[f64]) {
    let m = u.rows();
    let n = v.rows();
    for j in 0..sigma.len() {
        if sigma[j] <= 0.0 {
            continue;
        }
        let mut dominant = 0.0;
        let mut val = 0.0;
        for i in 0..m {
            let a = abs(u[(i, j)]);
            if a > dominant {
                dominant = a;
                val = u[(i, j)];
            }
        }
        if val < 0.0 {
            for i in 0..m {
                u[(i, j)] = -u[(i, j)];
            }
            for i in 0..n {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic two-sided Jacobi:
/// returns (lambda, Q) with `a = Q * diag(lambda) * Q^T`, eigenvalues sorted
/// non-increasing. The caller guarantees symmetry.
pub fn eigen_symmetric(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    debug_assert!(a.is_square());
    let mut b: Vec<f64> = a.as_slice().to_vec();
    // Q is accumulated transposed so both factors rotate contiguous rows.
    let mut qt = vec![0.0; n * n];
    for i in 0..n {
        qt[i * n + i] = 1.0;
    }

    let eps = conv_eps(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let bij = b[i * n + j];
                let bii = b[i * n + i];
                let bjj = b[j * n + j];
                if abs(bij) <= eps * sqrt(abs(bii) * abs(bjj)) {
                    continue;
                }
                rotated = true;
                let zeta = (bjj - bii) / (2.0 * bij);
                let (c, s) = rotation(zeta);
                let t = s / c;
                // Row update J^T * B, then column update B * J.
                rotate_rows(&mut b, n, i, j, c, s);
                for k in 0..n {
                    let bki = b[k * n + i];
                    let bkj = b[k * n + j];
                    b[k * n + i] = c * bki - s * bkj;
                    b[k * n + j] = s * bki + c * bkj;
                }
                b[i * n + i] = bii - t * bij;
                b[j * n + j] = bjj + t * bij;
                b[i * n + j] = 0.0;
                b[j * n + i] = 0.0;
                rotate_rows(&mut qt, n, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut lambda: Vec<f64> = (0..n).map(|i| b[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| lambda[q].partial_cmp(&lambda[p]).unwrap().then(p.cmp(&q)));
    lambda = order.iter().map(|&i| lambda[i]).collect();

    let mut q = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            q[(i, dst)] = qt[src * n + i];
        }
    }
    (lambda, q)
}
