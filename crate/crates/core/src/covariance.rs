//! Sample-based covariance surrogates built from paired realization blocks.
//!
//! All second moments are raw Gram products over the realization columns,
//! with no `1/q` normalization: the downstream gains are invariant to that
//! scaling and the closed-form error then measures the squared Frobenius
//! error summed over the whole ensemble.

use crate::error::invalid_input;
use crate::linalg::{pinv, psd_sqrt};
use crate::matrix::Matrix;
use crate::Result;

/// Realizations of one signal at one time stamp: a dim×q block whose
/// columns are the q realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Matrix,
}

impl SampleMatrix {
    pub fn new(data: Matrix) -> Self {
        Self { data }
    }

    /// Number of signal components (rows).
    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    /// Number of realizations (columns).
    pub fn realizations(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    /// Stacks blocks side by side; every block must share the row count.
    pub fn hconcat(blocks: &[&SampleMatrix]) -> Result<SampleMatrix> {
        let first = blocks.first().ok_or_else(|| invalid_input!("hconcat of no blocks"))?;
        let dim = first.dim();
        if blocks.iter().any(|b| b.dim() != dim) {
            return Err(invalid_input!("hconcat blocks disagree on dimension"));
        }
        let total: usize = blocks.iter().map(|b| b.realizations()).sum();
        let mut out = Matrix::zeros(dim, total);
        let mut offset = 0;
        for b in blocks {
            for i in 0..dim {
                for j in 0..b.realizations() {
                    out[(i, offset + j)] = b.data[(i, j)];
                }
            }
            offset += b.realizations();
        }
        Ok(SampleMatrix::new(out))
    }
}

impl From<Matrix> for SampleMatrix {
    fn from(data: Matrix) -> Self {
        Self::new(data)
    }
}

/// The Gram bundle one interval of the fit consumes: cross moment, observed
/// moment with its PSD square root and pseudo-inverse, and the reference
/// moment for the closed-form error.
#[derive(Debug, Clone)]
pub struct CovarianceBundle {
    pub exy: Matrix,
    pub eyy: Matrix,
    pub eyy_half: Matrix,
    pub eyy_half_pinv: Matrix,
    pub exx: Matrix,
}

/// Columnwise difference `b - a` of two equally shaped blocks.
pub fn difference(a: &SampleMatrix, b: &SampleMatrix) -> Result<SampleMatrix> {
    if a.dim() != b.dim() || a.realizations() != b.realizations() {
        return Err(invalid_input!(
            "difference needs matching shapes, got {}x{} vs {}x{}",
            a.dim(),
            a.realizations(),
            b.dim(),
            b.realizations()
        ));
    }
    Ok(SampleMatrix::new(&b.data - &a.data))
}

/// Unnormalized sample cross moment `A * B^T` over matching realizations.
pub fn gram(a: &SampleMatrix, b: &SampleMatrix) -> Result<Matrix> {
    if a.realizations() != b.realizations() {
        return Err(invalid_input!(
            "gram needs equal realization counts, got {} vs {}",
            a.realizations(),
            b.realizations()
        ));
    }
    Ok(a.data.matmul_transpose(&b.data))
}

/// Builds the full bundle from difference blocks. `tol` is the relative
/// singular-value threshold used for the pseudo-inverse of the square root.
pub fn bundle(dx: &SampleMatrix, dy: &SampleMatrix, tol: f64) -> Result<CovarianceBundle> {
    let exy = gram(dx, dy)?;
    // Round-off symmetrization before the square root.
    let eyy = gram(dy, dy)?.symmetrized();
    let exx = gram(dx, dx)?.symmetrized();
    let eyy_half = psd_sqrt(&eyy)?;
    let eyy_half_pinv = pinv(&eyy_half, tol)?;
    Ok(CovarianceBundle { exy, eyy, eyy_half, eyy_half_pinv, exx })
}
