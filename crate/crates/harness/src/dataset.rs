//! On-disk ensembles: one directory per dataset holding `meta.csv`,
//! `times.csv` (an N×1 matrix) and a numbered `x_####.csv` / `y_####.csv`
//! pair per signal.

use std::fs;
use std::path::Path;

use pwrc_core::covariance::SampleMatrix;
use pwrc_core::transform::InterpolationPair;

use crate::error::{HarnessError, Result};
use crate::io::{read_matrix, write_matrix};

/// An ordered set of (t, X, Y) signal triples with shared dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDataset {
    signals: Vec<InterpolationPair>,
    m: usize,
    n: usize,
    q: usize,
}

impl EnsembleDataset {
    pub fn new(signals: Vec<InterpolationPair>) -> Result<Self> {
        let first = signals
            .first()
            .ok_or_else(|| HarnessError::format("dataset needs at least one signal"))?;
        let m = first.x.dim();
        let n = first.y.dim();
        let q = first.x.realizations();
        for (k, s) in signals.iter().enumerate() {
            if s.x.dim() != m || s.y.dim() != n || s.x.realizations() != q || s.y.realizations() != q {
                return Err(HarnessError::format(format!("signal {} shape differs from signal 1", k + 1)));
            }
        }
        if signals.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(HarnessError::format("signal stamps must be strictly increasing"));
        }
        Ok(Self { signals, m, n, q })
    }

    pub fn signals(&self) -> &[InterpolationPair] {
        &self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn reference_dim(&self) -> usize {
        self.m
    }

    pub fn observed_dim(&self) -> usize {
        self.n
    }

    pub fn realizations(&self) -> usize {
        self.q
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let meta = dir.join("meta.csv");
        fs::write(&meta, format!("signals,m,n,q\n{},{},{},{}\n", self.len(), self.m, self.n, self.q))
            .map_err(|e| HarnessError::io(&meta, e))?;
        let times = pwrc_core::Matrix::new(self.len(), 1, self.signals.iter().map(|s| s.t).collect())?;
        write_matrix(&dir.join("times.csv"), &times)?;
        for (k, s) in self.signals.iter().enumerate() {
            write_matrix(&dir.join(format!("x_{:04}.csv", k + 1)), s.x.data())?;
            write_matrix(&dir.join(format!("y_{:04}.csv", k + 1)), s.y.data())?;
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.csv");
        let meta = fs::read_to_string(&meta_path).map_err(|e| HarnessError::io(&meta_path, e))?;
        let mut lines = meta.lines();
        let header = lines.next().unwrap_or("");
        if header.trim() != "signals,m,n,q" {
            return Err(HarnessError::parse(&meta_path, 1, "expected header `signals,m,n,q`"));
        }
        let body = lines
            .next()
            .ok_or_else(|| HarnessError::parse(&meta_path, 2, "missing metadata line"))?;
        let fields: Vec<usize> = body
            .split(',')
            .map(|f| f.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| HarnessError::parse(&meta_path, 2, format!("bad metadata {body:?}")))?;
        let [count, m, n, q] = fields[..] else {
            return Err(HarnessError::parse(&meta_path, 2, "expected 4 metadata fields"));
        };

        let times = read_matrix(&dir.join("times.csv"))?;
        if times.rows() != count || times.cols() != 1 {
            return Err(HarnessError::format(format!(
                "times.csv must be {count}x1, got {}x{}",
                times.rows(),
                times.cols()
            )));
        }
        let mut signals = Vec::with_capacity(count);
        for k in 0..count {
            let x = read_matrix(&dir.join(format!("x_{:04}.csv", k + 1)))?;
            let y = read_matrix(&dir.join(format!("y_{:04}.csv", k + 1)))?;
            if x.rows() != m || y.rows() != n || x.cols() != q || y.cols() != q {
                return Err(HarnessError::format(format!(
                    "signal {} does not match metadata dims m={m} n={n} q={q}",
                    k + 1
                )));
            }
            signals.push(InterpolationPair::new(
                SampleMatrix::new(x),
                SampleMatrix::new(y),
                times[(k, 0)],
            )?);
        }
        Self::new(signals)
    }

    /// Resolves a selection to owned interpolation pairs for fitting.
    pub fn select_pairs(&self, sel: &PairSelection) -> Result<Vec<InterpolationPair>> {
        let idx = sel.indices(self.len())?;
        Ok(idx.into_iter().map(|i| self.signals[i].clone()).collect())
    }
}

/// Which dataset signals become interpolation pairs.
///
/// `Stride(s)` takes signal 1 plus every s-th signal (1-based, the
/// convention of equally strided anchor picks); `Even(p)` spreads p knots
/// over the whole index range including both endpoints; `List` gives
/// explicit 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSelection {
    Stride(usize),
    Even(usize),
    List(Vec<usize>),
}

impl PairSelection {
    /// 0-based, strictly increasing indices into a dataset of `count`.
    pub fn indices(&self, count: usize) -> Result<Vec<usize>> {
        let idx = match self {
            PairSelection::Stride(s) => {
                if *s == 0 {
                    return Err(HarnessError::format("stride must be at least 1"));
                }
                let mut idx = vec![0usize];
                let mut i = 1usize;
                while i * s <= count {
                    let next = i * s - 1;
                    if next > 0 {
                        idx.push(next);
                    }
                    i += 1;
                }
                idx
            }
            PairSelection::Even(p) => {
                if *p < 2 || *p > count {
                    return Err(HarnessError::format(format!(
                        "even selection needs 2..=#signals knots, got {p} for {count}"
                    )));
                }
                let mut idx: Vec<usize> =
                    (0..*p).map(|i| (i * (count - 1) + (p - 1) / 2) / (p - 1)).collect();
                idx.dedup();
                if idx.len() != *p {
                    return Err(HarnessError::format(format!(
                        "even selection of {p} knots collides on {count} signals"
                    )));
                }
                idx
            }
            PairSelection::List(list) => {
                if list.len() < 2 {
                    return Err(HarnessError::format("need at least 2 pair indices"));
                }
                let mut idx = Vec::with_capacity(list.len());
                for &one_based in list {
                    if one_based == 0 || one_based > count {
                        return Err(HarnessError::format(format!(
                            "pair index {one_based} outside 1..={count}"
                        )));
                    }
                    idx.push(one_based - 1);
                }
                if idx.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(HarnessError::format("pair indices must be strictly increasing"));
                }
                idx
            }
        };
        if idx.len() < 2 {
            return Err(HarnessError::format(format!(
                "selection produced {} knots; need at least 2",
                idx.len()
            )));
        }
        Ok(idx)
    }
}

impl std::str::FromStr for PairSelection {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let parse_list = |body: &str| -> Result<Vec<usize>> {
            body.split(',')
                .map(|f| {
                    f.trim()
                        .parse()
                        .map_err(|_| HarnessError::format(format!("bad pair index {f:?}")))
                })
                .collect()
        };
        if let Some(body) = s.strip_prefix("even:") {
            let p = body
                .trim()
                .parse()
                .map_err(|_| HarnessError::format(format!("bad knot count {body:?}")))?;
            return Ok(PairSelection::Even(p));
        }
        if let Some(body) = s.strip_prefix("stride:") {
            let stride = body
                .trim()
                .parse()
                .map_err(|_| HarnessError::format(format!("bad stride {body:?}")))?;
            return Ok(PairSelection::Stride(stride));
        }
        if let Some(body) = s.strip_prefix("list:") {
            return Ok(PairSelection::List(parse_list(body)?));
        }
        if s.contains(',') {
            return Ok(PairSelection::List(parse_list(s)?));
        }
        let stride = s
            .trim()
            .parse()
            .map_err(|_| HarnessError::format(format!("bad pair selection {s:?}")))?;
        Ok(PairSelection::Stride(stride))
    }
}
