//! Seeded helpers shared by the unit tests.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random matrix of exact rank k (with probability one), built as a product.
pub fn random_rank_k(rng: &mut ChaCha8Rng, rows: usize, cols: usize, k: usize) -> Matrix {
    let left = random_matrix(rng, rows, k);
    let right = random_matrix(rng, k, cols);
    &left * &right
}

pub fn assert_mat_eq(actual: &Matrix, expected: &Matrix, tol: f64) {
    assert_eq!(actual.rows(), expected.rows(), "row count differs");
    assert_eq!(actual.cols(), expected.cols(), "col count differs");
    let diff = actual.max_abs_diff(expected);
    assert!(diff <= tol, "matrices differ by {diff:.3e} > {tol:.3e}\n{actual:?}\nvs\n{expected:?}");
}
