//! Binary persistence for fitted transforms and compressed blocks.
//!
//! `.pwrc` model files: magic `PWRC`, a u32 version, u32 dimensions and
//! little-endian f64 payloads in row-major order. Per interval the file
//! stores the rank, offset, decoder, encoder, the cached singular spectrum
//! and the difference energy, so a loaded model predicts knot errors
//! exactly like a freshly fitted one and a save/load/save cycle is
//! byte-identical.
//!
//! `.pwz` block files: magic `PWZB`, version, interval index, payload
//! shape, time stamp and the payload itself.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use pwrc_core::transform::{CompressedBlock, Knots, PiecewiseTransform, SubTransform};
use pwrc_core::Matrix;

use crate::error::{HarnessError, Result};

const MODEL_MAGIC: &[u8; 4] = b"PWRC";
const BLOCK_MAGIC: &[u8; 4] = b"PWZB";
const FORMAT_VERSION: u32 = 1;
/// Upper bound on any stored dimension; catches corrupt headers before
/// they turn into absurd allocations.
const DIM_LIMIT: u32 = 100_000_000;

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    fn matrix(&mut self, m: &Matrix) -> std::io::Result<()> {
        for &x in m.as_slice() {
            self.f64(x)?;
        }
        Ok(())
    }
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u32(&mut self) -> std::io::Result<u32> {
        let mut buf = [0u8; 4];
        self.inner.read_exact(&mut buf)?;
        Ok(u32::from_le_bytes(buf))
    }

    fn f64(&mut self) -> std::io::Result<f64> {
        let mut buf = [0u8; 8];
        self.inner.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    }

    fn dim(&mut self, what: &str) -> Result<usize> {
        let v = self.u32().map_err(|e| HarnessError::format(format!("truncated {what}: {e}")))?;
        if v > DIM_LIMIT {
            return Err(HarnessError::format(format!("implausible {what} {v}")));
        }
        Ok(v as usize)
    }

    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.f64().map_err(|e| HarnessError::format(format!("truncated {what}: {e}")))?);
        }
        Ok(Matrix::new(rows, cols, data)?)
    }
}

pub fn save_model(path: &Path, model: &PiecewiseTransform) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = Writer { inner: BufWriter::new(file) };
    let io_err = |e| HarnessError::io(path, e);

    w.inner.write_all(MODEL_MAGIC).map_err(io_err)?;
    w.u32(FORMAT_VERSION).map_err(io_err)?;
    w.u32(model.reference_dim() as u32).map_err(io_err)?;
    w.u32(model.observed_dim() as u32).map_err(io_err)?;
    w.u32(model.realizations() as u32).map_err(io_err)?;
    w.u32(model.knots().count() as u32).map_err(io_err)?;
    for &t in model.knots().times() {
        w.f64(t).map_err(io_err)?;
    }
    for sub in model.subs() {
        w.u32(sub.rank() as u32).map_err(io_err)?;
        w.u32(sub.singular_spectrum().len() as u32).map_err(io_err)?;
        w.matrix(sub.offset()).map_err(io_err)?;
        w.matrix(sub.decoder()).map_err(io_err)?;
        w.matrix(sub.encoder()).map_err(io_err)?;
        for &s in sub.singular_spectrum() {
            w.f64(s).map_err(io_err)?;
        }
        w.f64(sub.difference_energy()).map_err(io_err)?;
    }
    w.inner.flush().map_err(io_err)
}

pub fn load_model(path: &Path) -> Result<PiecewiseTransform> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut r = Reader { inner: BufReader::new(file) };

    let mut magic = [0u8; 4];
    r.inner
        .read_exact(&mut magic)
        .map_err(|e| HarnessError::format(format!("{}: truncated magic: {e}", path.display())))?;
    if &magic != MODEL_MAGIC {
        return Err(HarnessError::format(format!(
            "{}: not a model file (magic {magic:?})",
            path.display()
        )));
    }
    let version = r.dim("version")?;
    if version != FORMAT_VERSION as usize {
        return Err(HarnessError::format(format!("unsupported model version {version}")));
    }
    let m = r.dim("reference dimension")?;
    let n = r.dim("observed dimension")?;
    let q = r.dim("realization count")?;
    let p = r.dim("knot count")?;
    if p < 2 {
        return Err(HarnessError::format(format!("model needs at least 2 knots, got {p}")));
    }
    let mut knot_times = Vec::with_capacity(p);
    for _ in 0..p {
        knot_times.push(r.f64().map_err(|e| HarnessError::format(format!("truncated knots: {e}")))?);
    }
    let knots = Knots::new(knot_times)?;

    let mut subs = Vec::with_capacity(p - 1);
    for j in 0..p - 1 {
        let rank = r.dim("rank")?;
        if rank < 1 || rank > m.min(n) {
            return Err(HarnessError::format(format!("interval {j}: bad rank {rank}")));
        }
        let spectrum_len = r.dim("spectrum length")?;
        let z = r.matrix(m, q, "offset")?;
        let d = r.matrix(m, rank, "decoder")?;
        let c = r.matrix(rank, n, "encoder")?;
        let mut sigma = Vec::with_capacity(spectrum_len);
        for _ in 0..spectrum_len {
            sigma.push(r.f64().map_err(|e| HarnessError::format(format!("truncated spectrum: {e}")))?);
        }
        let energy = r.f64().map_err(|e| HarnessError::format(format!("truncated energy: {e}")))?;
        subs.push(SubTransform::from_parts(z, d, c, sigma, energy)?);
    }

    let mut trailing = [0u8; 1];
    match r.inner.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => return Err(HarnessError::format(format!("{}: trailing bytes", path.display()))),
        Err(e) => return Err(HarnessError::format(format!("{}: {e}", path.display()))),
    }
    Ok(PiecewiseTransform::from_parts(knots, subs)?)
}

pub fn save_block(path: &Path, block: &CompressedBlock) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = Writer { inner: BufWriter::new(file) };
    let io_err = |e| HarnessError::io(path, e);

    w.inner.write_all(BLOCK_MAGIC).map_err(io_err)?;
    w.u32(FORMAT_VERSION).map_err(io_err)?;
    w.u32(block.interval as u32).map_err(io_err)?;
    w.u32(block.payload.rows() as u32).map_err(io_err)?;
    w.u32(block.payload.cols() as u32).map_err(io_err)?;
    w.f64(block.t).map_err(io_err)?;
    w.matrix(&block.payload).map_err(io_err)?;
    w.inner.flush().map_err(io_err)
}

pub fn load_block(path: &Path) -> Result<CompressedBlock> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut r = Reader { inner: BufReader::new(file) };

    let mut magic = [0u8; 4];
    r.inner
        .read_exact(&mut magic)
        .map_err(|e| HarnessError::format(format!("{}: truncated magic: {e}", path.display())))?;
    if &magic != BLOCK_MAGIC {
        return Err(HarnessError::format(format!(
            "{}: not a compressed block (magic {magic:?})",
            path.display()
        )));
    }
    let version = r.dim("version")?;
    if version != FORMAT_VERSION as usize {
        return Err(HarnessError::format(format!("unsupported block version {version}")));
    }
    let interval = r.dim("interval index")?;
    let rows = r.dim("payload rows")?;
    let cols = r.dim("payload cols")?;
    let t = r.f64().map_err(|e| HarnessError::format(format!("truncated stamp: {e}")))?;
    let payload = r.matrix(rows, cols, "payload")?;

    let mut trailing = [0u8; 1];
    match r.inner.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => return Err(HarnessError::format(format!("{}: trailing bytes", path.display()))),
        Err(e) => return Err(HarnessError::format(format!("{}: {e}", path.display()))),
    }
    Ok(CompressedBlock { interval, t, payload })
}
