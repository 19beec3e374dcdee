//! Seeded benchmark grid: accuracy of the piecewise transform across
//! knot counts and compression ratios, against individual and pooled KLT
//! baselines on held-out signals.

use std::fmt::Write as _;
use std::time::Instant;

use pwrc_core::baseline::{compare, generic_klt, KltModel};
use pwrc_core::linalg::{default_rel_tol, RankBudget};
use pwrc_core::transform::{FitConfig, InterpolationPair, PiecewiseTransform};

use crate::dataset::PairSelection;
use crate::error::{HarnessError, Result};
use crate::synthetic::{generate_synthetic, with_fresh_noise};

/// Grid and data parameters of one benchmark run.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub p_values: Vec<usize>,
    pub ranks: Vec<usize>,
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub signals: usize,
    pub smoothness: f64,
    pub seed: u64,
    /// Redraw the observation noise per signal instead of using the
    /// generator's fixed masks (needs m == n).
    pub fresh_noise: bool,
}

impl BenchConfig {
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            p_values: vec![3, 5, 9, 17],
            ranks: vec![2, 4],
            m: 16,
            n: 16,
            q: 64,
            signals: 64,
            smoothness: 2.0,
            seed,
            fresh_noise: false,
        }
    }
}

/// One grid cell: spread of the transform errors on the hold-out set and
/// the error ratios against both KLT baselines.
#[derive(Debug, Clone)]
pub struct BenchCell {
    pub p: usize,
    pub rank: usize,
    pub eps_min_f: f64,
    pub eps_max_f: f64,
    pub delta_min_klt: f64,
    pub delta_max_klt: f64,
    pub delta_min_generic: f64,
    pub delta_max_generic: f64,
    pub fit_ms: f64,
    pub eval_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub cells: Vec<BenchCell>,
}

impl BenchReport {
    /// Deterministic CSV: byte-identical for identical seeds. Runtimes are
    /// intentionally left out; ask `runtime_summary` for them.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# pwrc bench seed={} m={} n={} q={} signals={} smoothness={} noise={}",
            c.seed,
            c.m,
            c.n,
            c.q,
            c.signals,
            c.smoothness,
            if c.fresh_noise { "fresh" } else { "fixed" }
        );
        let _ = writeln!(
            out,
            "p,c,rank,eps_min_f,eps_max_f,delta_min_klt,delta_max_klt,delta_min_generic_klt,delta_max_generic_klt"
        );
        for cell in &self.cells {
            let _ = writeln!(
                out,
                "{},{}/{},{},{},{},{},{},{},{}",
                cell.p,
                cell.rank,
                c.m,
                cell.rank,
                cell.eps_min_f,
                cell.eps_max_f,
                cell.delta_min_klt,
                cell.delta_max_klt,
                cell.delta_min_generic,
                cell.delta_max_generic
            );
        }
        out
    }

    pub fn runtime_summary(&self) -> String {
        let mut out = String::new();
        for cell in &self.cells {
            let _ = writeln!(
                out,
                "p={} c={}/{}: fit {:.1} ms, eval {:.1} ms",
                cell.p, cell.rank, self.config.m, cell.fit_ms, cell.eval_ms
            );
        }
        out
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.p_values.is_empty() || cfg.ranks.is_empty() {
        return Err(HarnessError::format("bench grid must name at least one p and one ratio"));
    }
    for &r in &cfg.ranks {
        if r < 1 || r > cfg.m.min(cfg.n) {
            return Err(HarnessError::format(format!(
                "rank {r} outside 1..={} for the configured dimensions",
                cfg.m.min(cfg.n)
            )));
        }
    }
    let base = generate_synthetic(cfg.m, cfg.n, cfg.q, cfg.signals, cfg.smoothness, cfg.seed)?;
    let ds = if cfg.fresh_noise { with_fresh_noise(&base, cfg.seed)? } else { base };
    let tol = default_rel_tol(cfg.n, cfg.n);

    let mut cells = Vec::new();
    for &p in &cfg.p_values {
        let knot_idx = PairSelection::Even(p).indices(ds.len())?;
        let pairs = ds.select_pairs(&PairSelection::Even(p))?;
        let holdout: Vec<InterpolationPair> = ds
            .signals()
            .iter()
            .enumerate()
            .filter(|(k, _)| !knot_idx.contains(k))
            .map(|(_, s)| s.clone())
            .collect();
        if holdout.is_empty() {
            return Err(HarnessError::format(format!(
                "p={p} uses every signal as a knot; nothing left to evaluate"
            )));
        }
        for &rank in &cfg.ranks {
            let fit_start = Instant::now();
            let f = PiecewiseTransform::fit(&pairs, &FitConfig::uniform(rank))?;
            let fit_ms = fit_start.elapsed().as_secs_f64() * 1e3;

            let eval_start = Instant::now();
            let pooled = generic_klt(&pairs, RankBudget(rank), tol)?;
            let individual: Vec<KltModel> = holdout
                .iter()
                .map(|s| KltModel::fit(&s.x, &s.y, RankBudget(rank), tol))
                .collect::<pwrc_core::Result<_>>()?;
            let rep_klt = compare(&f, &individual, &holdout)?;
            let rep_generic = compare(&f, &[pooled], &holdout)?;
            let eval_ms = eval_start.elapsed().as_secs_f64() * 1e3;

            cells.push(BenchCell {
                p,
                rank,
                eps_min_f: rep_klt.eps_min_f,
                eps_max_f: rep_klt.eps_max_f,
                delta_min_klt: rep_klt.delta_min,
                delta_max_klt: rep_klt.delta_max,
                delta_min_generic: rep_generic.delta_min,
                delta_max_generic: rep_generic.delta_max,
                fit_ms,
                eval_ms,
            });
        }
    }
    Ok(BenchReport { config: cfg.clone(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(seed: u64) -> BenchConfig {
        BenchConfig {
            p_values: vec![3, 5],
            ranks: vec![2],
            m: 6,
            n: 6,
            q: 16,
            signals: 16,
            smoothness: 2.0,
            seed,
            fresh_noise: false,
        }
    }

    #[test]
    fn bench_csv_is_seed_deterministic() {
        let a = run_bench(&small_config(3)).unwrap().to_csv();
        let b = run_bench(&small_config(3)).unwrap().to_csv();
        assert_eq!(a, b);
        let c = run_bench(&small_config(4)).unwrap().to_csv();
        assert_ne!(a, c);
    }

    #[test]
    fn bench_grid_shape_and_finiteness() {
        let report = run_bench(&small_config(5)).unwrap();
        assert_eq!(report.cells.len(), 2);
        for cell in &report.cells {
            assert!(cell.eps_min_f.is_finite() && cell.eps_min_f >= 0.0);
            assert!(cell.eps_max_f >= cell.eps_min_f);
            assert!(cell.delta_min_klt <= cell.delta_max_klt);
            assert!(cell.delta_min_generic <= cell.delta_max_generic);
        }
    }

    #[test]
    fn bench_rejects_bad_grid() {
        let mut cfg = small_config(1);
        cfg.ranks = vec![9];
        assert!(run_bench(&cfg).is_err());
        let mut cfg = small_config(1);
        cfg.p_values = vec![16];
        assert!(run_bench(&cfg).is_err());
    }

    #[test]
    fn fresh_noise_changes_results() {
        let fixed = run_bench(&small_config(7)).unwrap().to_csv();
        let mut cfg = small_config(7);
        cfg.fresh_noise = true;
        let fresh = run_bench(&cfg).unwrap().to_csv();
        assert_ne!(fixed, fresh);
    }
}
