//! Seeded synthetic ensembles and the Hadamard observation noise model.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use pwrc_core::covariance::SampleMatrix;
use pwrc_core::transform::InterpolationPair;
use pwrc_core::Matrix;

use crate::dataset::EnsembleDataset;
use crate::error::{HarnessError, Result};

/// Number of random fields mixed into each reference signal.
const MODES: usize = 4;

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen::<f64>())
}

/// Deterministic nonstationary ensemble: reference signals are low-order
/// trigonometric mixtures of fixed random fields (so X drifts smoothly
/// with the signal index, faster for smaller `smoothness`), and the
/// observations pass X through one fixed seed-derived Hadamard mask pair.
/// Time stamps are the integers 1..=count.
pub fn generate_synthetic(
    m: usize,
    n: usize,
    q: usize,
    count: usize,
    smoothness: f64,
    seed: u64,
) -> Result<EnsembleDataset> {
    if m == 0 || n == 0 || q == 0 || count == 0 {
        return Err(HarnessError::format("dimensions and signal count must be at least 1"));
    }
    if !(smoothness > 0.0) || !smoothness.is_finite() {
        return Err(HarnessError::format(format!("smoothness must be positive, got {smoothness}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let fields: Vec<Matrix> = (0..MODES).map(|_| normal_matrix(&mut rng, m, q)).collect();
    let phases: Vec<f64> = (0..MODES).map(|_| rng.gen::<f64>() * core::f64::consts::TAU).collect();
    // Fixed observation channel: an optional mixing map for m != n, then
    // one normal and one uniform mask shared by every signal.
    let mixer = if n == m {
        None
    } else {
        Some(normal_matrix(&mut rng, n, m).scale(1.0 / (m as f64).sqrt()))
    };
    let mask_normal = normal_matrix(&mut rng, n, q);
    let mask_uniform = uniform_matrix(&mut rng, n, q);

    let mut signals = Vec::with_capacity(count);
    for k in 0..count {
        let t = (k + 1) as f64;
        let mut x = Matrix::zeros(m, q);
        for (l, field) in fields.iter().enumerate() {
            let freq = (l + 1) as f64 / smoothness;
            let coeff = (core::f64::consts::TAU * freq * t / count as f64 + phases[l]).cos();
            x = &x + &field.scale(coeff);
        }
        let mixed = match &mixer {
            Some(p) => p * &x,
            None => x.clone(),
        };
        let y = Matrix::from_fn(n, q, |i, j| mask_normal[(i, j)] * mixed[(i, j)] * mask_uniform[(i, j)]);
        signals.push(InterpolationPair::new(SampleMatrix::new(x), SampleMatrix::new(y), t)?);
    }
    EnsembleDataset::new(signals)
}

/// Observation noise of the simulation protocol: the entrywise product of
/// the input with one standard normal and one uniform(0,1) field, both
/// freshly drawn from the seed.
pub fn hadamard_noise(x: &SampleMatrix, seed: u64) -> SampleMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = x.dim();
    let cols = x.realizations();
    let normal = normal_matrix(&mut rng, rows, cols);
    let uniform = uniform_matrix(&mut rng, rows, cols);
    SampleMatrix::new(Matrix::from_fn(rows, cols, |i, j| {
        normal[(i, j)] * x.data()[(i, j)] * uniform[(i, j)]
    }))
}

/// Replaces every observation block with fresh per-signal Hadamard noise
/// over its reference block, one derived seed per signal. Requires
/// matching reference and observation dimensions.
pub fn with_fresh_noise(ds: &EnsembleDataset, seed: u64) -> Result<EnsembleDataset> {
    if ds.observed_dim() != ds.reference_dim() {
        return Err(HarnessError::format(
            "fresh Hadamard noise needs matching reference/observation dimensions",
        ));
    }
    let signals = ds
        .signals()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let y = hadamard_noise(&s.x, seed.wrapping_add(1).wrapping_add(k as u64));
            InterpolationPair::new(s.x.clone(), y, s.t)
        })
        .collect::<pwrc_core::Result<Vec<_>>>()?;
    EnsembleDataset::new(signals)
}
