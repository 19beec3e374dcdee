//! The `pwrc` command-line tool: generate, fit, compress, decompress,
//! eval and bench.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use pwrc_core::baseline::signal_error;
use pwrc_core::covariance::SampleMatrix;
use pwrc_core::transform::{Factorization, FitConfig, PiecewiseTransform, RankSpec};

use crate::bench::{run_bench, BenchConfig};
use crate::dataset::{EnsembleDataset, PairSelection};
use crate::error::{HarnessError, Result};
use crate::io::{read_matrix, write_matrix};
use crate::model_file::{load_block, load_model, save_block, save_model};
use crate::synthetic::generate_synthetic;

#[derive(Debug, Parser)]
#[command(
    name = "pwrc",
    version,
    about = "Piecewise rank-constrained filtering, compression and reconstruction of sample ensembles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic ensemble to a dataset directory.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Reference signal dimension.
        #[arg(long, default_value_t = 16)]
        m: usize,
        /// Observed signal dimension.
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Realizations per signal.
        #[arg(long, default_value_t = 64)]
        q: usize,
        /// Number of time-indexed signals.
        #[arg(long, default_value_t = 64)]
        signals: usize,
        /// Larger values make the ensemble drift more slowly.
        #[arg(long, default_value_t = 2.0)]
        smoothness: f64,
        /// Falls back to $PWRC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a piecewise transform from selected dataset signals.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Pair selection: a stride (`50`), explicit 1-based indices
        /// (`1,50,100`) or an even spread (`even:9`).
        #[arg(long)]
        pairs: String,
        /// Rank budget: one value for all intervals or a per-interval list.
        #[arg(long)]
        rank: String,
        /// Factorization mode: A (orthonormal encoder rows) or
        /// B (orthonormal decoder columns).
        #[arg(long, default_value = "B")]
        mode: String,
        /// Relative singular-value threshold for pseudo-inverses.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compress one observation block (CSV) at a time stamp.
    Compress {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a reference estimate (CSV) from a compressed block.
    Decompress {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-signal errors, per-interval predicted knot errors and summary.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded benchmark grid over knot counts and compression ratios.
    Bench {
        /// Grid axes, e.g. `--grid p=3,5,9,17 c=2/16,4/16`.
        #[arg(long, num_args = 1..)]
        grid: Vec<String>,
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        q: usize,
        #[arg(long, default_value_t = 64)]
        signals: usize,
        #[arg(long, default_value_t = 2.0)]
        smoothness: f64,
        /// Falls back to $PWRC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// `fixed` keeps the generator's observation masks; `fresh`
        /// redraws Hadamard noise per signal.
        #[arg(long, default_value = "fixed")]
        noise: String,
        /// Write the CSV report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { out, m, n, q, signals, smoothness, seed } => {
            let seed = resolve_seed(seed)?;
            let ds = generate_synthetic(m, n, q, signals, smoothness, seed)?;
            ds.save_dir(&out)?;
            eprintln!("wrote {} signals (m={m}, n={n}, q={q}, seed={seed}) to {}", ds.len(), out.display());
            Ok(())
        }
        Command::Fit { data, pairs, rank, mode, tol, out } => {
            let ds = EnsembleDataset::load_dir(&data)?;
            let selection: PairSelection = pairs.parse()?;
            let selected = ds.select_pairs(&selection)?;
            let mut cfg = FitConfig {
                ranks: parse_ranks(&rank)?,
                tol: None,
                mode: mode.parse::<Factorization>()?,
            };
            if let Some(tol) = tol {
                cfg = cfg.with_tol(tol);
            }
            let model = PiecewiseTransform::fit(&selected, &cfg)?;
            save_model(&out, &model)?;
            let ratios = match model.uniform_compression_ratio() {
                Some(r) => r.to_string(),
                None => model
                    .compression_ratios()
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            eprintln!(
                "fitted {} intervals over [{}, {}], c={ratios}; wrote {}",
                model.intervals(),
                model.knots().times()[0],
                model.knots().times()[model.knots().count() - 1],
                out.display()
            );
            Ok(())
        }
        Command::Compress { model, input, t, out } => {
            let model = load_model(&model)?;
            let y = SampleMatrix::new(read_matrix(&input)?);
            let block = model.compress(t, &y)?;
            save_block(&out, &block)?;
            eprintln!(
                "compressed {} rows to {} at t={t} (interval {}); wrote {}",
                model.observed_dim(),
                block.payload.rows(),
                block.interval,
                out.display()
            );
            Ok(())
        }
        Command::Decompress { model, input, out } => {
            let model = load_model(&model)?;
            let block = load_block(&input)?;
            let xhat = model.decompress(&block)?;
            write_matrix(&out, xhat.data())?;
            eprintln!("reconstructed {}x{} estimate; wrote {}", xhat.dim(), xhat.realizations(), out.display());
            Ok(())
        }
        Command::Eval { model, data, out } => {
            let model = load_model(&model)?;
            let ds = EnsembleDataset::load_dir(&data)?;
            let report = eval_report(&model, &ds)?;
            emit(out.as_deref(), &report)
        }
        Command::Bench { grid, m, n, q, signals, smoothness, seed, noise, out } => {
            let seed = resolve_seed(seed)?;
            let fresh_noise = match noise.as_str() {
                "fixed" => false,
                "fresh" => true,
                other => {
                    return Err(HarnessError::format(format!(
                        "unknown noise mode {other:?}, expected fixed or fresh"
                    )))
                }
            };
            let mut cfg = BenchConfig {
                p_values: Vec::new(),
                ranks: Vec::new(),
                m,
                n,
                q,
                signals,
                smoothness,
                seed,
                fresh_noise,
            };
            parse_grid(&grid, &mut cfg)?;
            if cfg.p_values.is_empty() {
                cfg.p_values = vec![3, 5, 9, 17];
            }
            if cfg.ranks.is_empty() {
                cfg.ranks = vec![(m / 8).max(1), (m / 4).max(1)];
            }
            let report = run_bench(&cfg)?;
            eprint!("{}", report.runtime_summary());
            emit(out.as_deref(), &report.to_csv())
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| HarnessError::io(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn resolve_seed(cli_seed: Option<u64>) -> Result<u64> {
    if let Some(seed) = cli_seed {
        return Ok(seed);
    }
    match std::env::var("PWRC_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| HarnessError::format(format!("PWRC_SEED must be an integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn parse_ranks(spec: &str) -> Result<RankSpec> {
    let values: Vec<usize> = spec
        .split(',')
        .map(|f| f.trim().parse().map_err(|_| HarnessError::format(format!("bad rank {f:?}"))))
        .collect::<Result<_>>()?;
    match values.as_slice() {
        [] => Err(HarnessError::format("empty rank list")),
        [r] => Ok(RankSpec::Uniform(*r)),
        _ => Ok(RankSpec::PerInterval(values)),
    }
}

fn parse_grid(tokens: &[String], cfg: &mut BenchConfig) -> Result<()> {
    for tok in tokens {
        if let Some(body) = tok.strip_prefix("p=") {
            cfg.p_values = body
                .split(',')
                .map(|f| {
                    f.trim().parse().map_err(|_| HarnessError::format(format!("bad knot count {f:?}")))
                })
                .collect::<Result<_>>()?;
        } else if let Some(body) = tok.strip_prefix("c=") {
            cfg.ranks = body.split(',').map(|f| parse_ratio(f.trim(), cfg.m)).collect::<Result<_>>()?;
        } else {
            return Err(HarnessError::format(format!(
                "unknown grid axis {tok:?}, expected p=... or c=..."
            )));
        }
    }
    Ok(())
}

/// A compression ratio as `r/m` (denominator must match the reference
/// dimension) or a bare rank.
fn parse_ratio(field: &str, m: usize) -> Result<usize> {
    if let Some((num, den)) = field.split_once('/') {
        let r: usize =
            num.trim().parse().map_err(|_| HarnessError::format(format!("bad ratio {field:?}")))?;
        let d: usize =
            den.trim().parse().map_err(|_| HarnessError::format(format!("bad ratio {field:?}")))?;
        if d != m {
            return Err(HarnessError::format(format!(
                "ratio denominator {d} must equal the reference dimension {m}"
            )));
        }
        Ok(r)
    } else {
        field.trim().parse().map_err(|_| HarnessError::format(format!("bad rank {field:?}")))
    }
}

/// Three sections: per-signal errors over the dataset, per-interval
/// predicted knot errors next to the empirical error at the stamp the
/// formula addresses, and aggregate stats. Signals outside the fitted
/// span are counted but skipped.
pub fn eval_report(model: &PiecewiseTransform, ds: &EnsembleDataset) -> Result<String> {
    if ds.observed_dim() != model.observed_dim()
        || ds.reference_dim() != model.reference_dim()
        || ds.realizations() != model.realizations()
    {
        return Err(HarnessError::format(format!(
            "dataset dims (m={}, n={}, q={}) do not match model (m={}, n={}, q={})",
            ds.reference_dim(),
            ds.observed_dim(),
            ds.realizations(),
            model.reference_dim(),
            model.observed_dim(),
            model.realizations()
        )));
    }

    let mut out = String::new();
    let _ = writeln!(out, "# per-signal");
    let _ = writeln!(out, "signal,t,interval,eps");
    let mut eps_all: Vec<f64> = Vec::new();
    let mut skipped = 0usize;
    for (k, s) in ds.signals().iter().enumerate() {
        match model.knots().locate(s.t) {
            Ok(j) => {
                let xhat = model.apply_sub(j, &s.y)?;
                let eps = signal_error(&s.x, &xhat)?;
                let _ = writeln!(out, "{},{},{},{}", k + 1, s.t, j, eps);
                eps_all.push(eps);
            }
            Err(pwrc_core::Error::OutOfDomain { .. }) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "# per-interval");
    let _ = writeln!(out, "interval,t_left,t_right,rank,predicted,formula_stamp,empirical");
    for j in 0..model.intervals() {
        let (t_left, t_right) = model.knots().span(j);
        let predicted = model.predicted_knot_error(j)?;
        // The first interval anchors at its right knot, so its formula
        // error shows up at the left knot; every other interval errs at
        // the right knot.
        let stamp = if j == 0 { t_left } else { t_right };
        let empirical = match ds.signals().iter().find(|s| s.t == stamp) {
            Some(s) => {
                let xhat = model.apply_sub(j, &s.y)?;
                signal_error(&s.x, &xhat)?.to_string()
            }
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            j,
            t_left,
            t_right,
            model.subs()[j].rank(),
            predicted,
            stamp,
            empirical
        );
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "# summary");
    let _ = writeln!(out, "key,value");
    let _ = writeln!(out, "signals_evaluated,{}", eps_all.len());
    let _ = writeln!(out, "skipped_out_of_domain,{skipped}");
    if let Some(ratio) = model.uniform_compression_ratio() {
        let _ = writeln!(out, "compression_ratio,{ratio}");
    }
    if !eps_all.is_empty() {
        let eps_min = eps_all.iter().copied().fold(f64::INFINITY, f64::min);
        let eps_max = eps_all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(out, "eps_min,{eps_min}");
        let _ = writeln!(out, "eps_max,{eps_max}");
    }
    Ok(out)
}
