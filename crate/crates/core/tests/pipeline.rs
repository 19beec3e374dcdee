//! Cross-module checks through the public API only: fitted transforms,
//! their factored gains, the closed-form error and the KLT baseline all
//! have to agree with independently recomputed quantities.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pwrc_core::baseline::{signal_error, KltModel};
use pwrc_core::covariance::{bundle, difference, SampleMatrix};
use pwrc_core::linalg::{
    default_rel_tol, numerical_rank, pinv, rank_constrained_minimizer, svd, truncate, RankBudget,
};
use pwrc_core::transform::{FitConfig, InterpolationPair, PiecewiseTransform};
use pwrc_core::Matrix;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_pairs(rng: &mut ChaCha8Rng, m: usize, n: usize, q: usize, p: usize) -> Vec<InterpolationPair> {
    (0..p)
        .map(|j| {
            InterpolationPair::new(
                SampleMatrix::new(random_matrix(rng, m, q)),
                SampleMatrix::new(random_matrix(rng, n, q)),
                j as f64 * 1.5,
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn fit_roundtrip_and_error_chain_across_shapes() {
    let mut rng = rng(101);
    for &(m, n, q, p, r) in &[(6usize, 6usize, 18usize, 4usize, 2usize), (7, 4, 20, 3, 3), (3, 8, 16, 5, 2)] {
        let pairs = random_pairs(&mut rng, m, n, q, p);
        let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(r)).unwrap();

        // Interpolation anchors.
        for j in 1..f.intervals() {
            let xhat = f.apply_sub(j, &pairs[j].y).unwrap();
            let bound = 1e-8 * (1.0 + pairs[j].x.data().frobenius_norm());
            assert!((xhat.data() - pairs[j].x.data()).frobenius_norm() <= bound);
        }

        // Compress/decompress agrees with direct application everywhere.
        let y = SampleMatrix::new(random_matrix(&mut rng, n, q));
        for &t in &[pairs[0].t, 0.7, pairs[p - 1].t] {
            let through = f.decompress(&f.compress(t, &y).unwrap()).unwrap();
            let direct = f.apply(t, &y).unwrap();
            assert_eq!(through.data().as_slice(), direct.data().as_slice());
        }

        // Closed-form error against the measured residual.
        for j in 1..f.intervals() {
            let predicted = f.predicted_knot_error(j).unwrap();
            let xhat = f.apply_sub(j, &pairs[j + 1].y).unwrap();
            let empirical = signal_error(&pairs[j + 1].x, &xhat).unwrap();
            assert!((predicted - empirical).abs() <= 1e-6 * (1.0 + empirical.max(predicted)));
        }

        // Rank budgets hold numerically.
        for sub in f.subs() {
            assert!(numerical_rank(&sub.gain(), 1e-8).unwrap() <= sub.rank());
        }
    }
}

#[test]
fn gain_equals_general_minimizer_route() {
    // The per-interval gain must coincide with the reduction of the
    // general minimizer (B = I, C the moment square root).
    let mut rng = rng(102);
    let m = 5;
    let n = 4;
    let q = 14;
    let pairs = random_pairs(&mut rng, m, n, q, 3);
    let tol = default_rel_tol(n, n);
    let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(2)).unwrap();
    for j in 0..f.intervals() {
        let dx = difference(&pairs[j].x, &pairs[j + 1].x).unwrap();
        let dy = difference(&pairs[j].y, &pairs[j + 1].y).unwrap();
        let b = bundle(&dx, &dy, tol).unwrap();
        let a = &b.exy * &b.eyy_half_pinv;
        let x0 = rank_constrained_minimizer(
            &a,
            &Matrix::identity(m),
            &b.eyy_half,
            RankBudget(2),
            None,
            None,
        )
        .unwrap();
        let g = f.subs()[j].gain();
        assert!(g.max_abs_diff(&x0) <= 1e-8 * (1.0 + g.max_abs()));
    }
}

#[test]
fn eckart_young_and_penrose_sweep() {
    let mut rng = rng(103);
    for _ in 0..30 {
        let m = rng.gen_range(1..=9);
        let n = rng.gen_range(1..=9);
        let a = random_matrix(&mut rng, m, n);
        let f = svd(&a).unwrap();
        let scale = a.frobenius_norm_sq().max(1e-12);
        for k in 0..=m.min(n) {
            let tail: f64 = f.s[k.min(f.s.len())..].iter().map(|s| s * s).sum();
            let lhs = (&a - &truncate(&f, RankBudget(k))).frobenius_norm_sq();
            assert!((lhs - tail).abs() <= 1e-10 * scale);
        }
        let p = pinv(&a, default_rel_tol(m, n)).unwrap();
        assert!((&(&a * &p) * &a).max_abs_diff(&a) <= 1e-8 * (1.0 + a.max_abs()));
        assert!((&(&p * &a) * &p).max_abs_diff(&p) <= 1e-8 * (1.0 + p.max_abs()));
    }
}

#[test]
fn klt_on_difference_free_channel_matches_single_interval_gain() {
    // One interval fitted on pairs whose left anchor is zero reduces the
    // difference moments to plain moments, i.e. to the KLT itself.
    let mut rng = rng(104);
    let m = 5;
    let q = 15;
    let x = random_matrix(&mut rng, m, q);
    let y = random_matrix(&mut rng, m, q);
    let pairs = vec![
        InterpolationPair::new(
            SampleMatrix::new(Matrix::zeros(m, q)),
            SampleMatrix::new(Matrix::zeros(m, q)),
            0.0,
        )
        .unwrap(),
        InterpolationPair::new(SampleMatrix::new(x.clone()), SampleMatrix::new(y.clone()), 1.0).unwrap(),
    ];
    let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(2)).unwrap();
    let klt = KltModel::fit(
        &SampleMatrix::new(x),
        &SampleMatrix::new(y),
        RankBudget(2),
        default_rel_tol(m, m),
    )
    .unwrap();
    let g = f.subs()[0].gain();
    assert!(g.max_abs_diff(&klt.matrix()) <= 1e-10 * (1.0 + g.max_abs()));
}

#[test]
fn predicted_error_sums_ensemble_energy() {
    // With raw (unnormalized) moments the formula speaks in the same
    // units as the squared Frobenius error over all q realizations: the
    // zero-budget limit equals the total difference energy.
    let mut rng = rng(105);
    let m = 4;
    let q = 11;
    let pairs = random_pairs(&mut rng, m, m, q, 2);
    let dx = difference(&pairs[0].x, &pairs[1].x).unwrap();
    let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(1)).unwrap();
    let sub = &f.subs()[0];
    let total = dx.data().frobenius_norm_sq();
    assert!((sub.difference_energy() - total).abs() <= 1e-9 * (1.0 + total));
}
