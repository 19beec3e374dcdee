//! KLT baselines and the comparison metrics used to benchmark the
//! piecewise transform against them.
//!
//! A KLT model is one rank-constrained linear map fitted on plain (not
//! difference) sample moments: the generic variant pools every training
//! pair into one fit, the individual variant fits one model per signal.

use alloc::vec::Vec;

use crate::covariance::{bundle, SampleMatrix};
use crate::error::invalid_input;
use crate::linalg::RankBudget;
use crate::matrix::Matrix;
use crate::transform::{factorize, gain_with_spectrum, Factorization, InterpolationPair, PiecewiseTransform};
use crate::Result;

/// A fitted KLT: the rank-r map `K = D C` minimizing `||X - K Y||_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct KltModel {
    d: Matrix,
    c: Matrix,
    r: usize,
}

impl KltModel {
    /// Fits the rank-constrained least-squares map from observation to
    /// reference samples. A budget above `min(m, n)` is clamped; a zero
    /// budget yields the zero map.
    pub fn fit(x: &SampleMatrix, y: &SampleMatrix, r: RankBudget, tol: f64) -> Result<Self> {
        if x.realizations() != y.realizations() {
            return Err(invalid_input!(
                "klt fit needs equal realization counts, got {} vs {}",
                x.realizations(),
                y.realizations()
            ));
        }
        let m = x.dim();
        let n = y.dim();
        let r = r.get().min(m.min(n));
        if r == 0 {
            // Zero map kept as a degenerate one-column factor pair.
            return Ok(Self { d: Matrix::zeros(m, 1), c: Matrix::zeros(1, n), r: 0 });
        }
        let b = bundle(x, y, tol)?;
        let (k, _) = gain_with_spectrum(&b, RankBudget(r));
        let (d, c) = factorize(&k, RankBudget(r), Factorization::OrthonormalDecoder);
        Ok(Self { d, c, r })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn decoder(&self) -> &Matrix {
        &self.d
    }

    pub fn encoder(&self) -> &Matrix {
        &self.c
    }

    /// The assembled map `D * C`, m×n.
    pub fn matrix(&self) -> Matrix {
        &self.d * &self.c
    }

    pub fn reference_dim(&self) -> usize {
        self.d.rows()
    }

    pub fn observed_dim(&self) -> usize {
        self.c.cols()
    }

    /// `K * Y`: reconstructs reference samples from observed ones.
    pub fn apply(&self, y: &SampleMatrix) -> Result<SampleMatrix> {
        if y.dim() != self.observed_dim() {
            return Err(invalid_input!(
                "observation has {} rows, klt expects {}",
                y.dim(),
                self.observed_dim()
            ));
        }
        Ok(SampleMatrix::new(&self.d * &(&self.c * y.data())))
    }
}

/// Pools every training pair column-wise and fits one KLT on the result.
pub fn generic_klt(pairs: &[InterpolationPair], r: RankBudget, tol: f64) -> Result<KltModel> {
    if pairs.is_empty() {
        return Err(invalid_input!("generic klt needs at least one training pair"));
    }
    let xs: Vec<&SampleMatrix> = pairs.iter().map(|p| &p.x).collect();
    let ys: Vec<&SampleMatrix> = pairs.iter().map(|p| &p.y).collect();
    let x = SampleMatrix::hconcat(&xs)?;
    let y = SampleMatrix::hconcat(&ys)?;
    KltModel::fit(&x, &y, r, tol)
}

/// Squared Frobenius distance between a reference block and its estimate.
pub fn signal_error(xref: &SampleMatrix, xhat: &SampleMatrix) -> Result<f64> {
    if xref.dim() != xhat.dim() || xref.realizations() != xhat.realizations() {
        return Err(invalid_input!(
            "signal_error shapes differ: {}x{} vs {}x{}",
            xref.dim(),
            xref.realizations(),
            xhat.dim(),
            xhat.realizations()
        ));
    }
    Ok((xref.data() - xhat.data()).frobenius_norm_sq())
}

/// Per-signal errors of the piecewise transform and the KLT baseline,
/// their ratios, and the aggregate spread.
///
/// Signals the transform reconstructs exactly are flagged instead of
/// divided by; their ratio entry is infinity and they do not contribute
/// to `delta_min`/`delta_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub eps_f: Vec<f64>,
    pub eps_klt: Vec<f64>,
    pub ratios: Vec<f64>,
    pub flagged: Vec<usize>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub eps_min_f: f64,
    pub eps_max_f: f64,
}

/// Evaluates `f` and a KLT per test signal over `testset` and aggregates
/// the error ratios. `klts` holds either one model per signal or a single
/// model applied to all of them; compression ratios must match the fit.
pub fn compare(
    f: &PiecewiseTransform,
    klts: &[KltModel],
    testset: &[InterpolationPair],
) -> Result<ComparisonReport> {
    if testset.is_empty() {
        return Err(invalid_input!("compare needs a non-empty test set"));
    }
    if klts.len() != testset.len() && klts.len() != 1 {
        return Err(invalid_input!(
            "need one klt per signal or a single shared one, got {} for {} signals",
            klts.len(),
            testset.len()
        ));
    }
    let ratio = f
        .uniform_compression_ratio()
        .ok_or_else(|| invalid_input!("compare needs a uniform-rank transform"))?;
    for k in klts {
        if k.rank() != ratio.compressed {
            return Err(invalid_input!(
                "compression ratios differ: klt rank {} vs transform rank {}",
                k.rank(),
                ratio.compressed
            ));
        }
        if k.reference_dim() != f.reference_dim() || k.observed_dim() != f.observed_dim() {
            return Err(invalid_input!("klt dimensions disagree with the transform"));
        }
    }

    let count = testset.len();
    let mut eps_f = Vec::with_capacity(count);
    let mut eps_klt = Vec::with_capacity(count);
    let mut ratios = Vec::with_capacity(count);
    let mut flagged = Vec::new();
    for (k, sig) in testset.iter().enumerate() {
        let xhat_f = f.apply(sig.t, &sig.y)?;
        let e_f = signal_error(&sig.x, &xhat_f)?;
        let klt = if klts.len() == 1 { &klts[0] } else { &klts[k] };
        let xhat_k = klt.apply(&sig.y)?;
        let e_k = signal_error(&sig.x, &xhat_k)?;
        if e_f == 0.0 {
            flagged.push(k);
            ratios.push(f64::INFINITY);
        } else {
            ratios.push(e_k / e_f);
        }
        eps_f.push(e_f);
        eps_klt.push(e_k);
    }

    let finite: Vec<f64> = ratios.iter().copied().filter(|r| r.is_finite()).collect();
    if finite.is_empty() {
        return Err(invalid_input!("every test signal was reconstructed exactly; ratios undefined"));
    }
    let delta_min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let delta_max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps_min_f = eps_f.iter().copied().fold(f64::INFINITY, f64::min);
    let eps_max_f = eps_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport { eps_f, eps_klt, ratios, flagged, delta_min, delta_max, eps_min_f, eps_max_f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::{default_rel_tol, pinv};
    use crate::test_support::{assert_mat_eq, random_matrix, random_rank_k, rng};
    use crate::transform::FitConfig;

    fn sm(m: Matrix) -> SampleMatrix {
        SampleMatrix::new(m)
    }

    #[test]
    fn klt_identity_recovery_at_full_rank() {
        let mut rng = rng(71);
        let x = random_matrix(&mut rng, 4, 12);
        let model =
            KltModel::fit(&sm(x.clone()), &sm(x.clone()), RankBudget(4), default_rel_tol(4, 4))
                .unwrap();
        let xhat = model.apply(&sm(x.clone())).unwrap();
        assert!((xhat.data() - &x).frobenius_norm() <= 1e-8 * (1.0 + x.frobenius_norm()));
    }

    #[test]
    fn klt_zero_budget_is_zero_map() {
        let mut rng = rng(72);
        let x = random_matrix(&mut rng, 3, 8);
        let y = random_matrix(&mut rng, 3, 8);
        let model =
            KltModel::fit(&sm(x.clone()), &sm(y.clone()), RankBudget(0), default_rel_tol(3, 3))
                .unwrap();
        assert_mat_eq(&model.matrix(), &Matrix::zeros(3, 3), 0.0);
        let xhat = model.apply(&sm(y)).unwrap();
        let err = signal_error(&sm(x.clone()), &xhat).unwrap();
        assert!((err - x.frobenius_norm_sq()).abs() <= 1e-12 * (1.0 + err));
    }

    #[test]
    fn klt_beats_random_same_rank_candidates() {
        let mut rng = rng(73);
        let x = random_matrix(&mut rng, 4, 10);
        let y = random_matrix(&mut rng, 3, 10);
        let model =
            KltModel::fit(&sm(x.clone()), &sm(y.clone()), RankBudget(2), default_rel_tol(3, 3))
                .unwrap();
        let best = (&x - &(&model.matrix() * &y)).frobenius_norm();
        for _ in 0..1000 {
            let cand = random_rank_k(&mut rng, 4, 3, 2);
            let err = (&x - &(&cand * &y)).frobenius_norm();
            assert!(best <= err + 1e-9);
        }
    }

    #[test]
    fn klt_full_rank_matches_least_squares_residual() {
        let mut rng = rng(74);
        let x = random_matrix(&mut rng, 4, 16);
        let y = random_matrix(&mut rng, 4, 16);
        let model =
            KltModel::fit(&sm(x.clone()), &sm(y.clone()), RankBudget(4), default_rel_tol(4, 4))
                .unwrap();
        let res_klt = (&x - &(&model.matrix() * &y)).frobenius_norm();
        let k_ls = &x * &pinv(&y, default_rel_tol(4, 16)).unwrap();
        let res_ls = (&x - &(&k_ls * &y)).frobenius_norm();
        assert!((res_klt - res_ls).abs() <= 1e-8 * (1.0 + res_ls));
    }

    #[test]
    fn klt_residual_monotone_in_rank() {
        let mut rng = rng(75);
        let x = random_matrix(&mut rng, 5, 14);
        let y = random_matrix(&mut rng, 5, 14);
        let mut prev = f64::INFINITY;
        for r in 0..=5 {
            let model =
                KltModel::fit(&sm(x.clone()), &sm(y.clone()), RankBudget(r), default_rel_tol(5, 5))
                    .unwrap();
            let res = (&x - &(&model.matrix() * &y)).frobenius_norm();
            assert!(res <= prev + 1e-9);
            prev = res;
        }
    }

    #[test]
    fn signal_error_cases() {
        let mut rng = rng(76);
        let x = random_matrix(&mut rng, 3, 5);
        assert_eq!(signal_error(&sm(x.clone()), &sm(x.clone())).unwrap(), 0.0);

        let mut e1 = Matrix::zeros(3, 5);
        e1[(0, 0)] = 1.0;
        assert_eq!(signal_error(&sm(Matrix::zeros(3, 5)), &sm(e1)).unwrap(), 1.0);

        let a = random_matrix(&mut rng, 3, 5);
        let b = random_matrix(&mut rng, 3, 5);
        let direct: f64 = (0..3)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - b[(i, j)]).powi(2))
            .sum();
        let err = signal_error(&sm(a), &sm(b)).unwrap();
        assert!((err - direct).abs() <= 1e-12 * (1.0 + direct));

        assert!(signal_error(&sm(Matrix::zeros(2, 2)), &sm(Matrix::zeros(3, 2))).is_err());
    }

    /// Builds a fit whose second interval has a zero offset, so the
    /// sub-transform is the plain linear map the KLT also produces.
    fn zero_offset_setup(
        rng: &mut rand_chacha::ChaCha8Rng,
        m: usize,
        q: usize,
        r: usize,
    ) -> (PiecewiseTransform, KltModel, Vec<InterpolationPair>) {
        let tol = default_rel_tol(m, m);
        let x2 = random_matrix(rng, m, q);
        let y2 = random_matrix(rng, m, q);
        let pairs = vec![
            InterpolationPair::new(sm(random_matrix(rng, m, q)), sm(random_matrix(rng, m, q)), 0.0)
                .unwrap(),
            InterpolationPair::new(sm(Matrix::zeros(m, q)), sm(Matrix::zeros(m, q)), 1.0).unwrap(),
            InterpolationPair::new(sm(x2.clone()), sm(y2.clone()), 2.0).unwrap(),
        ];
        let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(r)).unwrap();
        // Same moments, same budget: the interval gain equals this KLT.
        let klt = KltModel::fit(&sm(x2), &sm(y2), RankBudget(r), tol).unwrap();
        let testset: Vec<InterpolationPair> = (0..6)
            .map(|i| {
                InterpolationPair::new(
                    sm(random_matrix(rng, m, q)),
                    sm(random_matrix(rng, m, q)),
                    1.0 + (i as f64 + 0.5) / 7.0,
                )
                .unwrap()
            })
            .collect();
        (f, klt, testset)
    }

    #[test]
    fn compare_identical_predictions_give_unit_deltas() {
        let mut rng = rng(77);
        let (f, klt, testset) = zero_offset_setup(&mut rng, 4, 9, 2);
        let report = compare(&f, &[klt], &testset).unwrap();
        assert!(report.flagged.is_empty());
        assert!((report.delta_min - 1.0).abs() <= 1e-9);
        assert!((report.delta_max - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn compare_aggregates_match_recomputation() {
        let mut rng = rng(78);
        let m = 4;
        let q = 10;
        let pairs: Vec<InterpolationPair> = (0..4)
            .map(|j| {
                InterpolationPair::new(
                    sm(random_matrix(&mut rng, m, q)),
                    sm(random_matrix(&mut rng, m, q)),
                    j as f64,
                )
                .unwrap()
            })
            .collect();
        let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(2)).unwrap();
        let testset: Vec<InterpolationPair> = (0..8)
            .map(|i| {
                InterpolationPair::new(
                    sm(random_matrix(&mut rng, m, q)),
                    sm(random_matrix(&mut rng, m, q)),
                    0.2 + (i as f64) * 0.35,
                )
                .unwrap()
            })
            .collect();
        let klts: Vec<KltModel> = testset
            .iter()
            .map(|s| KltModel::fit(&s.x, &s.y, RankBudget(2), default_rel_tol(m, m)).unwrap())
            .collect();
        let report = compare(&f, &klts, &testset).unwrap();

        for (k, sig) in testset.iter().enumerate() {
            let e_f = signal_error(&sig.x, &f.apply(sig.t, &sig.y).unwrap()).unwrap();
            let e_k = signal_error(&sig.x, &klts[k].apply(&sig.y).unwrap()).unwrap();
            assert_eq!(report.eps_f[k], e_f);
            assert_eq!(report.eps_klt[k], e_k);
            assert_eq!(report.ratios[k], e_k / e_f);
        }
        let dmin = report.ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let dmax =
            report.ratios.iter().copied().filter(|r| r.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(report.delta_min, dmin);
        assert_eq!(report.delta_max, dmax);
        assert_eq!(report.eps_min_f, report.eps_f.iter().copied().fold(f64::INFINITY, f64::min));
        assert_eq!(report.eps_max_f, report.eps_f.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        assert!(report.delta_min <= report.delta_max);
    }

    #[test]
    fn compare_flags_exactly_reconstructed_signals() {
        let mut rng = rng(79);
        let m = 3;
        let q = 9;
        let xs: Vec<Matrix> = (0..2).map(|_| random_matrix(&mut rng, m, q)).collect();
        let pairs: Vec<InterpolationPair> = xs
            .iter()
            .enumerate()
            .map(|(j, x)| InterpolationPair::new(sm(x.clone()), sm(x.clone()), j as f64).unwrap())
            .collect();
        let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(m)).unwrap();
        let klt = KltModel::fit(
            &sm(random_matrix(&mut rng, m, q)),
            &sm(random_matrix(&mut rng, m, q)),
            RankBudget(m),
            default_rel_tol(m, m),
        )
        .unwrap();
        // The anchor pair comes back bit-exactly; add one noisy signal so
        // the aggregates stay defined.
        let testset = vec![
            pairs[1].clone(),
            InterpolationPair::new(
                sm(random_matrix(&mut rng, m, q)),
                sm(random_matrix(&mut rng, m, q)),
                0.4,
            )
            .unwrap(),
        ];
        let report = compare(&f, &[klt], &testset).unwrap();
        assert_eq!(report.flagged, vec![0]);
        assert!(report.ratios[0].is_infinite());
        assert!(report.ratios[1].is_finite());
    }

    #[test]
    fn compare_rejects_mismatched_ratios() {
        let mut rng = rng(80);
        let (f, _, testset) = zero_offset_setup(&mut rng, 4, 9, 2);
        let other = KltModel::fit(
            &sm(random_matrix(&mut rng, 4, 9)),
            &sm(random_matrix(&mut rng, 4, 9)),
            RankBudget(3),
            default_rel_tol(4, 4),
        )
        .unwrap();
        assert!(matches!(compare(&f, &[other], &testset), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn generic_klt_pools_training_pairs() {
        let mut rng = rng(81);
        let m = 4;
        let q = 7;
        let pairs: Vec<InterpolationPair> = (0..3)
            .map(|j| {
                InterpolationPair::new(
                    sm(random_matrix(&mut rng, m, q)),
                    sm(random_matrix(&mut rng, m, q)),
                    j as f64,
                )
                .unwrap()
            })
            .collect();
        let pooled = generic_klt(&pairs, RankBudget(2), default_rel_tol(m, m)).unwrap();

        let xs: Vec<&SampleMatrix> = pairs.iter().map(|p| &p.x).collect();
        let ys: Vec<&SampleMatrix> = pairs.iter().map(|p| &p.y).collect();
        let direct = KltModel::fit(
            &SampleMatrix::hconcat(&xs).unwrap(),
            &SampleMatrix::hconcat(&ys).unwrap(),
            RankBudget(2),
            default_rel_tol(m, m),
        )
        .unwrap();
        assert_eq!(pooled, direct);
    }
}
