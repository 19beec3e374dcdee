//! Dense linear-algebra kernel: SVD, rank-k truncation, Moore-Penrose
//! pseudo-inverse, PSD square root, range projections and the general
//! rank-constrained minimizer of `||A - B X C||_F`.

mod jacobi;

use alloc::vec::Vec;

use crate::error::invalid_input;
use crate::matrix::Matrix;
use crate::scalar::sqrt;
use crate::Result;

pub(crate) use jacobi::eigen_symmetric;

/// Asymmetry allowed by [`psd_sqrt`], relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Default relative singular-value threshold for pseudo-inverses and
/// numerical ranks: `1e-10 * max(rows, cols)`.
pub fn default_rel_tol(rows: usize, cols: usize) -> f64 {
    1e-10 * rows.max(cols) as f64
}

/// Rank cap for a truncation or a constrained fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankBudget(pub usize);

impl RankBudget {
    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for RankBudget {
    fn from(k: usize) -> Self {
        RankBudget(k)
    }
}

impl core::fmt::Display for RankBudget {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Full singular value decomposition `A = U * diag(s) * V^T`.
///
/// `u` is m×m orthogonal, `v` is n×n orthogonal and `s` holds the
/// min(m, n) singular values in non-increasing order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactors {
    /// `U * diag(s) * V^T`, i.e. the matrix the factors came from.
    pub fn reconstruct(&self) -> Matrix {
        truncate(self, RankBudget(self.s.len()))
    }
}

/// Singular value decomposition of a dense matrix.
///
/// Deterministic for a fixed input: cyclic one-sided Jacobi with a canonical
/// ordering and sign convention.
pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    if !a.as_slice().iter().all(|x| x.is_finite()) {
        return Err(invalid_input!("svd input has non-finite entries"));
    }
    let (u, s, v) = jacobi::svd_jacobi(a);
    Ok(SvdFactors { u, s, v })
}

/// Best rank-k approximation from precomputed factors: the leading k terms
/// of the dyadic expansion. For k at or above the rank this reproduces the
/// original matrix.
pub fn truncate(f: &SvdFactors, k: RankBudget) -> Matrix {
    let m = f.u.rows();
    let n = f.v.rows();
    let kk = k.get().min(f.s.len());
    let mut out = Matrix::zeros(m, n);
    for t in 0..kk {
        let sigma = f.s[t];
        if sigma == 0.0 {
            break;
        }
        for i in 0..m {
            let ui = sigma * f.u[(i, t)];
            if ui == 0.0 {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += ui * f.v[(j, t)];
            }
        }
    }
    out
}

fn kept_rank(s: &[f64], tol: f64) -> usize {
    let sigma_max = s.first().copied().unwrap_or(0.0);
    s.iter().take_while(|&&x| x > tol * sigma_max && x > 0.0).count()
}

fn pinv_from_factors(f: &SvdFactors, tol: f64) -> Matrix {
    let m = f.u.rows();
    let n = f.v.rows();
    let rank = kept_rank(&f.s, tol);
    let mut out = Matrix::zeros(n, m);
    for t in 0..rank {
        let inv = 1.0 / f.s[t];
        for i in 0..n {
            let vi = inv * f.v[(i, t)];
            for j in 0..m {
                out[(i, j)] += vi * f.u[(j, t)];
            }
        }
    }
    out
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff:
/// only directions with `sigma_i > tol * sigma_1` are inverted. The zero
/// matrix maps to the zero matrix.
pub fn pinv(a: &Matrix, tol: f64) -> Result<Matrix> {
    check_tol(tol)?;
    Ok(pinv_from_factors(&svd(a)?, tol))
}

/// Count of singular values above `tol * sigma_1`; zero for the zero matrix.
pub fn numerical_rank(a: &Matrix, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    Ok(kept_rank(&svd(a)?.s, tol))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(invalid_input!("tolerance must be a positive finite number, got {tol}"));
    }
    Ok(())
}

fn projections_from_factors(f: &SvdFactors, tol: f64) -> (Matrix, Matrix) {
    let m = f.u.rows();
    let n = f.v.rows();
    let rank = kept_rank(&f.s, tol);
    let mut p_left = Matrix::zeros(m, m);
    let mut p_right = Matrix::zeros(n, n);
    for t in 0..rank {
        for i in 0..m {
            let ui = f.u[(i, t)];
            for j in 0..m {
                p_left[(i, j)] += ui * f.u[(j, t)];
            }
        }
        for i in 0..n {
            let vi = f.v[(i, t)];
            for j in 0..n {
                p_right[(i, j)] += vi * f.v[(j, t)];
            }
        }
    }
    (p_left, p_right)
}

/// Orthogonal projections onto the range of `a` (left, m×m) and the range
/// of `a^T` (right, n×n), at the numerical rank given by `tol`.
pub fn range_projections(a: &Matrix, tol: f64) -> Result<(Matrix, Matrix)> {
    check_tol(tol)?;
    Ok(projections_from_factors(&svd(a)?, tol))
}

/// Symmetric PSD square root: `S * S = E` with negative eigenvalues of the
/// (symmetrized) input clamped to zero. Rejects inputs whose asymmetry
/// exceeds [`SYMMETRY_TOL`] relative to the largest entry.
pub fn psd_sqrt(e: &Matrix) -> Result<Matrix> {
    if !e.is_square() {
        return Err(invalid_input!("psd_sqrt needs a square matrix, got {}x{}", e.rows(), e.cols()));
    }
    let asym = e.max_abs_diff(&e.transpose());
    if asym > SYMMETRY_TOL * e.max_abs() {
        return Err(invalid_input!(
            "psd_sqrt input asymmetric: max |E - E^T| = {asym:.3e} exceeds tolerance"
        ));
    }
    let sym = e.symmetrized();
    let (lambda, q) = eigen_symmetric(&sym);
    let n = sym.rows();
    let mut out = Matrix::zeros(n, n);
    for t in 0..n {
        let root = if lambda[t] > 0.0 { sqrt(lambda[t]) } else { 0.0 };
        if root == 0.0 {
            continue;
        }
        for i in 0..n {
            let qi = root * q[(i, t)];
            for j in 0..n {
                out[(i, j)] += qi * q[(j, t)];
            }
        }
    }
    Ok(out.symmetrized())
}

/// Minimizer of `||A - B X C||_F` over matrices X of rank at most k:
///
/// ```text
/// X0 = (I + L_B) B~ <<P_BL A P_CR>>_k C~ (I + L_C)
/// ```
///
/// with `B~`, `C~` the pseudo-inverses, `P_BL`/`P_CR` the range projections
/// and `L_B = (I - P_BR) S`, `L_C = T (I - P_CL)` for the optional free
/// parameters `S`, `T` (zero when absent, which collapses both L terms).
pub fn rank_constrained_minimizer(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    k: RankBudget,
    s: Option<&Matrix>,
    t: Option<&Matrix>,
) -> Result<Matrix> {
    let m = a.rows();
    let n = a.cols();
    if b.rows() != m {
        return Err(invalid_input!("B has {} rows, A has {m}", b.rows()));
    }
    if c.cols() != n {
        return Err(invalid_input!("C has {} cols, A has {n}", c.cols()));
    }
    let p = b.cols();
    let q = c.rows();
    if let Some(s) = s {
        if s.rows() != p || s.cols() != p {
            return Err(invalid_input!("S must be {p}x{p}, got {}x{}", s.rows(), s.cols()));
        }
    }
    if let Some(t) = t {
        if t.rows() != q || t.cols() != q {
            return Err(invalid_input!("T must be {q}x{q}, got {}x{}", t.rows(), t.cols()));
        }
    }

    let fb = svd(b)?;
    let fc = svd(c)?;
    let tol_b = default_rel_tol(b.rows(), b.cols());
    let tol_c = default_rel_tol(c.rows(), c.cols());
    let (pb_left, pb_right) = projections_from_factors(&fb, tol_b);
    let (pc_left, pc_right) = projections_from_factors(&fc, tol_c);
    let b_pinv = pinv_from_factors(&fb, tol_b);
    let c_pinv = pinv_from_factors(&fc, tol_c);

    let core = truncate(&svd(&(&(&pb_left * a) * &pc_right))?, k);
    let mut x = &(&b_pinv * &core) * &c_pinv;

    if let Some(s) = s {
        let l_b = &(&Matrix::identity(p) - &pb_right) * s;
        x = &x + &(&l_b * &x);
    }
    if let Some(t) = t {
        let l_c = t * &(&Matrix::identity(q) - &pc_left);
        x = &x + &(&x * &l_c);
    }
    Ok(x)
}
