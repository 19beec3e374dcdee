//! The piecewise rank-constrained transform.
//!
//! A fit takes p anchor pairs (X_j, Y_j) at increasing time stamps and
//! produces p-1 sub-transforms. Each sub-transform is affine, `z + G y`,
//! with the gain G solving the rank-constrained least-squares problem on
//! the between-knot differences and the offset z pinning the map to its
//! anchor pair exactly. The gain is kept factored as a decoder/encoder
//! pair `G = D C`, so the encoder alone compresses an observation block to
//! r rows and the decoder plus offset reconstruct it.

use alloc::vec;
use alloc::vec::Vec;

use crate::covariance::{bundle, difference, CovarianceBundle, SampleMatrix};
use crate::error::{invalid_input, Error};
use crate::linalg::{default_rel_tol, svd, truncate, RankBudget};
use crate::matrix::Matrix;
use crate::Result;

/// Ordered time stamps bounding the fit intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Knots {
    t: Vec<f64>,
}

impl Knots {
    /// At least two finite, nondecreasing stamps.
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(invalid_input!("need at least 2 knots, got {}", t.len()));
        }
        if !t.iter().all(|x| x.is_finite()) {
            return Err(invalid_input!("knots must be finite"));
        }
        if t.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid_input!("knots must be nondecreasing"));
        }
        Ok(Self { t })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn count(&self) -> usize {
        self.t.len()
    }

    pub fn intervals(&self) -> usize {
        self.t.len() - 1
    }

    pub fn span(&self, j: usize) -> (f64, f64) {
        (self.t[j], self.t[j + 1])
    }

    /// Interval index whose half-open span `[t_j, t_{j+1})` contains `t`;
    /// the final interval is closed on the right, and an interior knot
    /// belongs to the interval it opens.
    pub fn locate(&self, t: f64) -> Result<usize> {
        let lo = self.t[0];
        let hi = self.t[self.t.len() - 1];
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        let above = self.t.partition_point(|&x| x <= t);
        Ok((above - 1).min(self.t.len() - 2))
    }
}

/// One anchor: reference and observation blocks sampled at the same stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationPair {
    pub x: SampleMatrix,
    pub y: SampleMatrix,
    pub t: f64,
}

impl InterpolationPair {
    pub fn new(x: SampleMatrix, y: SampleMatrix, t: f64) -> Result<Self> {
        if x.realizations() != y.realizations() {
            return Err(invalid_input!(
                "pair realization counts differ: {} vs {}",
                x.realizations(),
                y.realizations()
            ));
        }
        if !t.is_finite() {
            return Err(invalid_input!("pair time stamp must be finite"));
        }
        Ok(Self { x, y, t })
    }
}

/// How the fitted gain splits into decoder and encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factorization {
    /// Mode A: singular values ride on the decoder's partner, `D = U_r S_r`,
    /// `C = V_r^T`; the encoder rows are orthonormal.
    OrthonormalEncoder,
    /// Mode B: `D = U_r`, `C = S_r V_r^T`; the decoder columns are
    /// orthonormal, which keeps reconstruction well conditioned.
    OrthonormalDecoder,
}

impl core::fmt::Display for Factorization {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Factorization::OrthonormalEncoder => write!(f, "A"),
            Factorization::OrthonormalDecoder => write!(f, "B"),
        }
    }
}

impl core::str::FromStr for Factorization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Factorization::OrthonormalEncoder),
            "B" | "b" => Ok(Factorization::OrthonormalDecoder),
            other => Err(invalid_input!("unknown factorization mode {other:?}, expected A or B")),
        }
    }
}

/// Per-interval rank budgets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankSpec {
    Uniform(usize),
    PerInterval(Vec<usize>),
}

/// Fit options: budgets, pseudo-inverse threshold and factorization mode.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub ranks: RankSpec,
    /// Relative singular-value threshold; `None` uses
    /// `default_rel_tol` on the observed dimension.
    pub tol: Option<f64>,
    pub mode: Factorization,
}

impl FitConfig {
    pub fn uniform(r: usize) -> Self {
        Self { ranks: RankSpec::Uniform(r), tol: None, mode: Factorization::OrthonormalDecoder }
    }

    pub fn per_interval(ranks: Vec<usize>) -> Self {
        Self { ranks: RankSpec::PerInterval(ranks), tol: None, mode: Factorization::OrthonormalDecoder }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_mode(mut self, mode: Factorization) -> Self {
        self.mode = mode;
        self
    }

    fn resolve_ranks(&self, intervals: usize, max_rank: usize) -> Result<Vec<usize>> {
        let ranks = match &self.ranks {
            RankSpec::Uniform(r) => vec![*r; intervals],
            RankSpec::PerInterval(list) => {
                if list.len() != intervals {
                    return Err(invalid_input!(
                        "expected {intervals} per-interval ranks, got {}",
                        list.len()
                    ));
                }
                list.clone()
            }
        };
        for &r in &ranks {
            if r < 1 || r > max_rank {
                return Err(Error::InvalidRank { rank: r, max: max_rank });
            }
        }
        Ok(ranks)
    }
}

/// One interval's fitted pieces: offset, factored gain and the singular
/// spectrum backing the closed-form error.
#[derive(Debug, Clone, PartialEq)]
pub struct SubTransform {
    z: Matrix,
    d: Matrix,
    c: Matrix,
    sigma: Vec<f64>,
    exx_trace: f64,
}

impl SubTransform {
    /// Reassembles an interval from stored pieces, checking shapes.
    pub fn from_parts(z: Matrix, d: Matrix, c: Matrix, sigma: Vec<f64>, exx_trace: f64) -> Result<Self> {
        if d.cols() != c.rows() {
            return Err(invalid_input!("decoder has {} cols, encoder {} rows", d.cols(), c.rows()));
        }
        if d.rows() != z.rows() {
            return Err(invalid_input!("decoder has {} rows, offset {}", d.rows(), z.rows()));
        }
        if !sigma.iter().all(|s| s.is_finite() && *s >= 0.0) {
            return Err(invalid_input!("singular spectrum must be finite and nonnegative"));
        }
        if !exx_trace.is_finite() || exx_trace < 0.0 {
            return Err(invalid_input!("difference energy must be finite and nonnegative"));
        }
        Ok(Self { z, d, c, sigma, exx_trace })
    }

    /// Per-realization offsets, m×q.
    pub fn offset(&self) -> &Matrix {
        &self.z
    }

    /// Reconstruction matrix, m×r.
    pub fn decoder(&self) -> &Matrix {
        &self.d
    }

    /// Compression matrix, r×n.
    pub fn encoder(&self) -> &Matrix {
        &self.c
    }

    /// Rank budget of the interval.
    pub fn rank(&self) -> usize {
        self.d.cols()
    }

    /// The assembled gain `D * C`.
    pub fn gain(&self) -> Matrix {
        &self.d * &self.c
    }

    /// Singular values of `E_xy (E_yy^{1/2})~` cached at fit time.
    pub fn singular_spectrum(&self) -> &[f64] {
        &self.sigma
    }

    /// `trace(E_xx)` of the interval's difference block.
    pub fn difference_energy(&self) -> f64 {
        self.exx_trace
    }

    fn apply(&self, y: &Matrix) -> Matrix {
        &self.z + &(&self.d * &(&self.c * y))
    }
}

/// Exact compression ratio `r/m` as stored, without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionRatio {
    pub compressed: usize,
    pub reference: usize,
}

impl CompressionRatio {
    pub fn value(self) -> f64 {
        self.compressed as f64 / self.reference as f64
    }
}

impl core::fmt::Display for CompressionRatio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.compressed, self.reference)
    }
}

/// The unit of stored or transmitted data: one interval's encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedBlock {
    pub interval: usize,
    pub t: f64,
    pub payload: Matrix,
}

/// A fitted piecewise transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTransform {
    knots: Knots,
    subs: Vec<SubTransform>,
    m: usize,
    n: usize,
    q: usize,
}

impl PiecewiseTransform {
    /// Fits the transform to `pairs` (ordered by strictly increasing stamp).
    ///
    /// Every interval j >= 2 anchors at its left pair; the first interval
    /// anchors at its right pair so that the stamp t_1 is compressed too.
    pub fn fit(pairs: &[InterpolationPair], cfg: &FitConfig) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(invalid_input!("need at least 2 interpolation pairs, got {}", pairs.len()));
        }
        let m = pairs[0].x.dim();
        let n = pairs[0].y.dim();
        let q = pairs[0].x.realizations();
        for (i, p) in pairs.iter().enumerate() {
            if p.x.dim() != m || p.y.dim() != n {
                return Err(invalid_input!("pair {i} dimensions differ from pair 0"));
            }
            if p.x.realizations() != q || p.y.realizations() != q {
                return Err(invalid_input!("pair {i} realization count differs from pair 0"));
            }
        }
        let knots = Knots::new(pairs.iter().map(|p| p.t).collect())?;
        for (i, w) in knots.times().windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::DegenerateKnots { index: i });
            }
        }
        let ranks = cfg.resolve_ranks(pairs.len() - 1, m.min(n))?;
        if let Some(tol) = cfg.tol {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(invalid_input!("fit tolerance must be positive and finite"));
            }
        }
        let tol = cfg.tol.unwrap_or_else(|| default_rel_tol(n, n));

        let mut subs = Vec::with_capacity(pairs.len() - 1);
        for j in 0..pairs.len() - 1 {
            let dx = difference(&pairs[j].x, &pairs[j + 1].x)?;
            let dy = difference(&pairs[j].y, &pairs[j + 1].y)?;
            let b = bundle(&dx, &dy, tol)?;
            let (gain, sigma) = gain_with_spectrum(&b, RankBudget(ranks[j]));
            let (d, c) = factorize(&gain, RankBudget(ranks[j]), cfg.mode);
            // Offsets use the factored product so the anchor identity holds
            // to the last bit of the apply path.
            let anchor = if j == 0 { &pairs[1] } else { &pairs[j] };
            let z = anchor.x.data() - &(&d * &(&c * anchor.y.data()));
            subs.push(SubTransform { z, d, c, sigma, exx_trace: b.exx.trace() });
        }
        Ok(Self { knots, subs, m, n, q })
    }

    /// Reassembles a transform from stored pieces, checking invariants.
    pub fn from_parts(knots: Knots, subs: Vec<SubTransform>) -> Result<Self> {
        if subs.len() != knots.intervals() {
            return Err(invalid_input!(
                "{} knots require {} sub-transforms, got {}",
                knots.count(),
                knots.intervals(),
                subs.len()
            ));
        }
        let first = &subs[0];
        let m = first.z.rows();
        let n = first.c.cols();
        let q = first.z.cols();
        for (j, s) in subs.iter().enumerate() {
            if s.z.rows() != m || s.z.cols() != q || s.d.rows() != m || s.c.cols() != n {
                return Err(invalid_input!("sub-transform {j} shapes disagree with the first"));
            }
        }
        Ok(Self { knots, subs, m, n, q })
    }

    pub fn knots(&self) -> &Knots {
        &self.knots
    }

    pub fn subs(&self) -> &[SubTransform] {
        &self.subs
    }

    /// Reference dimension m.
    pub fn reference_dim(&self) -> usize {
        self.m
    }

    /// Observed dimension n.
    pub fn observed_dim(&self) -> usize {
        self.n
    }

    /// Realization count q the transform was fitted on.
    pub fn realizations(&self) -> usize {
        self.q
    }

    pub fn intervals(&self) -> usize {
        self.subs.len()
    }

    fn check_observation(&self, y: &SampleMatrix) -> Result<()> {
        if y.dim() != self.n {
            return Err(invalid_input!("observation has {} rows, transform expects {}", y.dim(), self.n));
        }
        if y.realizations() != self.q {
            return Err(invalid_input!(
                "observation has {} realizations, transform expects {}",
                y.realizations(),
                self.q
            ));
        }
        Ok(())
    }

    fn sub_checked(&self, j: usize) -> Result<&SubTransform> {
        self.subs
            .get(j)
            .ok_or_else(|| invalid_input!("interval index {j} out of range 0..{}", self.subs.len()))
    }

    /// Encodes an observation block at stamp `t` into its interval payload.
    pub fn compress(&self, t: f64, y: &SampleMatrix) -> Result<CompressedBlock> {
        self.check_observation(y)?;
        let j = self.knots.locate(t)?;
        let payload = &self.subs[j].c * y.data();
        Ok(CompressedBlock { interval: j, t, payload })
    }

    /// Reconstructs a reference estimate from a compressed block.
    pub fn decompress(&self, block: &CompressedBlock) -> Result<SampleMatrix> {
        let sub = self.sub_checked(block.interval)?;
        if block.payload.rows() != sub.rank() {
            return Err(invalid_input!(
                "payload has {} rows, interval {} expects {}",
                block.payload.rows(),
                block.interval,
                sub.rank()
            ));
        }
        if block.payload.cols() != self.q {
            return Err(invalid_input!(
                "payload has {} realizations, transform expects {}",
                block.payload.cols(),
                self.q
            ));
        }
        Ok(SampleMatrix::new(&sub.z + &(&sub.d * &block.payload)))
    }

    /// Evaluates one sub-transform directly, bypassing interval lookup.
    pub fn apply_sub(&self, j: usize, y: &SampleMatrix) -> Result<SampleMatrix> {
        self.check_observation(y)?;
        Ok(SampleMatrix::new(self.sub_checked(j)?.apply(y.data())))
    }

    /// Full transform: locates the interval for `t` and applies it.
    pub fn apply(&self, t: f64, y: &SampleMatrix) -> Result<SampleMatrix> {
        self.check_observation(y)?;
        let j = self.knots.locate(t)?;
        Ok(SampleMatrix::new(self.subs[j].apply(y.data())))
    }

    /// Closed-form squared reconstruction error at the right knot of
    /// interval `j`: the difference energy minus the kept spectrum.
    pub fn predicted_knot_error(&self, j: usize) -> Result<f64> {
        let sub = self.sub_checked(j)?;
        Ok(knot_error_from_spectrum(sub.exx_trace, &sub.sigma, sub.rank()))
    }

    pub fn compression_ratio(&self, j: usize) -> Result<CompressionRatio> {
        let sub = self.sub_checked(j)?;
        Ok(CompressionRatio { compressed: sub.rank(), reference: self.m })
    }

    pub fn compression_ratios(&self) -> Vec<CompressionRatio> {
        (0..self.subs.len()).map(|j| self.compression_ratio(j).expect("index in range")).collect()
    }

    /// The single shared ratio when every interval uses the same budget.
    pub fn uniform_compression_ratio(&self) -> Option<CompressionRatio> {
        let r = self.subs[0].rank();
        if self.subs.iter().all(|s| s.rank() == r) {
            Some(CompressionRatio { compressed: r, reference: self.m })
        } else {
            None
        }
    }
}

/// The rank-constrained gain of one interval, with the free matrix of the
/// general solution taken as zero:
///
/// ```text
/// G = <<E_xy (E_yy^{1/2})~>>_r (E_yy^{1/2})~
/// ```
pub fn sub_transform_gain(b: &CovarianceBundle, r: RankBudget) -> Matrix {
    gain_with_spectrum(b, r).0
}

/// Gain plus the singular spectrum of `E_xy (E_yy^{1/2})~`, which the
/// closed-form knot error consumes.
pub(crate) fn gain_with_spectrum(b: &CovarianceBundle, r: RankBudget) -> (Matrix, Vec<f64>) {
    let a = &b.exy * &b.eyy_half_pinv;
    let f = svd(&a).expect("bundle matrices are finite");
    let gain = &truncate(&f, r) * &b.eyy_half_pinv;
    (gain, f.s)
}

/// Splits a gain of numerical rank at most `r` into decoder and encoder
/// factors with `D * C = G`. A zero gain yields zero factors. Panics if
/// `r` is zero or exceeds the smaller gain dimension.
pub fn factorize(g: &Matrix, r: RankBudget, mode: Factorization) -> (Matrix, Matrix) {
    let m = g.rows();
    let n = g.cols();
    let r = r.get();
    assert!(r >= 1 && r <= m.min(n), "factorization rank {r} outside 1..={}", m.min(n));
    if g.max_abs() == 0.0 {
        return (Matrix::zeros(m, r), Matrix::zeros(r, n));
    }
    let f = svd(g).expect("gain entries are finite");
    let mut d = Matrix::zeros(m, r);
    let mut c = Matrix::zeros(r, n);
    for t in 0..r {
        let (dscale, cscale) = match mode {
            Factorization::OrthonormalEncoder => (f.s[t], 1.0),
            Factorization::OrthonormalDecoder => (1.0, f.s[t]),
        };
        for i in 0..m {
            d[(i, t)] = dscale * f.u[(i, t)];
        }
        for j in 0..n {
            c[(t, j)] = cscale * f.v[(j, t)];
        }
    }
    (d, c)
}

/// `max(0, energy - sum of the r leading squared singular values)`: the
/// predicted squared error left after keeping an r-term gain.
pub fn knot_error_from_spectrum(energy: f64, sigma: &[f64], r: usize) -> f64 {
    let kept: f64 = sigma.iter().take(r).map(|s| s * s).sum();
    let err = energy - kept;
    if err > 0.0 {
        err
    } else {
        0.0
    }
}
