//! Block splitting of input matrices and the parameter record every code
//! shares.
//!
//! A code with storage fraction `1/m` sees `A` as a `p x q` grid of equal
//! blocks and `B` as the matching `q x p` grid (with `p*q = m`). Splitting is
//! pure bookkeeping: no arithmetic happens, and `merge` restores the original
//! bit for bit.

use crate::error::{Error, Result};
use crate::mat::Mat;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// CodeParams
// ---------------------------------------------------------------------------

/// The tuple `(m, p, q, P, k, epsilon, eta)` governing a code instance.
///
/// `workers` is the fleet size `P`; `k` is the recovery threshold the code is
/// designed for; `eta` bounds the Frobenius norm of both inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub workers: usize,
    pub k: usize,
    pub epsilon: f64,
    pub eta: f64,
}

impl CodeParams {
    /// A `p = 1` code (MatDot-style column/row splitting).
    pub fn matdot(m: usize, workers: usize, k: usize, epsilon: f64, eta: f64) -> Result<Self> {
        Self::new(m, 1, m, workers, k, epsilon, eta)
    }

    /// A general `p x q` split with `p*q = m`.
    pub fn polydot(
        p: usize,
        q: usize,
        workers: usize,
        k: usize,
        epsilon: f64,
        eta: f64,
    ) -> Result<Self> {
        Self::new(p * q, p, q, workers, k, epsilon, eta)
    }

    pub fn new(
        m: usize,
        p: usize,
        q: usize,
        workers: usize,
        k: usize,
        epsilon: f64,
        eta: f64,
    ) -> Result<Self> {
        let params = Self { m, p, q, workers, k, epsilon, eta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 || self.q == 0 {
            return Err(Error::InvalidParams("m, p, q must be positive".into()));
        }
        if self.p * self.q != self.m {
            return Err(Error::InvalidParams(format!(
                "p*q = {} does not equal m = {}",
                self.p * self.q,
                self.m
            )));
        }
        if self.k == 0 || self.k > self.workers {
            return Err(Error::InvalidParams(format!(
                "recovery threshold k = {} must lie in 1..={}",
                self.k, self.workers
            )));
        }
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(Error::InvalidParams("epsilon must be positive".into()));
        }
        if self.eta <= 0.0 || self.eta.is_nan() {
            return Err(Error::InvalidParams("eta must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// BlockGrid
// ---------------------------------------------------------------------------

/// A matrix split into a grid of equal-size blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGrid {
    blocks: Vec<Mat>,
    grid_rows: usize,
    grid_cols: usize,
    block_rows: usize,
    block_cols: usize,
}

impl BlockGrid {
    pub fn grid_rows(&self) -> usize {
        self.grid_rows
    }

    pub fn grid_cols(&self) -> usize {
        self.grid_cols
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    /// Block at grid position `(i, j)`, zero-indexed row-major.
    pub fn block(&self, i: usize, j: usize) -> &Mat {
        &self.blocks[i * self.grid_cols + j]
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }
}

/// Split `a` into a `grid_rows x grid_cols` grid of equal blocks.
///
/// Dimensions that do not divide evenly are rejected; padding silently would
/// corrupt the norm-bound arguments, so it only happens through the explicit
/// [`pad_to_divisible`] helper.
pub fn split(a: &Mat, grid_rows: usize, grid_cols: usize) -> Result<BlockGrid> {
    if grid_rows == 0 || grid_cols == 0 {
        return Err(Error::ShapeViolation("grid dimensions must be positive".into()));
    }
    if !a.rows().is_multiple_of(grid_rows) || !a.cols().is_multiple_of(grid_cols) {
        return Err(Error::ShapeViolation(format!(
            "{}x{} matrix does not divide into a {}x{} grid",
            a.rows(),
            a.cols(),
            grid_rows,
            grid_cols
        )));
    }
    let block_rows = a.rows() / grid_rows;
    let block_cols = a.cols() / grid_cols;
    let mut blocks = Vec::with_capacity(grid_rows * grid_cols);
    for gi in 0..grid_rows {
        for gj in 0..grid_cols {
            let mut b = Mat::zeros(block_rows, block_cols);
            for r in 0..block_rows {
                for c in 0..block_cols {
                    b[(r, c)] = a[(gi * block_rows + r, gj * block_cols + c)];
                }
            }
            blocks.push(b);
        }
    }
    Ok(BlockGrid { blocks, grid_rows, grid_cols, block_rows, block_cols })
}

/// Reassemble a grid into the full matrix; the inverse of [`split`].
pub fn merge(grid: &BlockGrid) -> Result<Mat> {
    let (br, bc) = (grid.block_rows, grid.block_cols);
    for b in &grid.blocks {
        if b.rows() != br || b.cols() != bc {
            return Err(Error::ShapeViolation("ragged blocks".into()));
        }
    }
    let mut out = Mat::zeros(grid.grid_rows * br, grid.grid_cols * bc);
    for gi in 0..grid.grid_rows {
        for gj in 0..grid.grid_cols {
            let b = grid.block(gi, gj);
            for r in 0..br {
                for c in 0..bc {
                    out[(gi * br + r, gj * bc + c)] = b[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

/// True iff the Frobenius norm of `a` is at most `eta` (with a hair of
/// relative slack for roundoff).
pub fn check_norm(a: &Mat, eta: f64) -> bool {
    a.frobenius_norm() <= eta * (1.0 + 1e-12)
}

/// Which axis [`pad_to_divisible`] extends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

/// Zero-pad one axis of `a` up to the next multiple of `multiple`.
///
/// Zero padding leaves the Frobenius norm and the product `A*B` unchanged,
/// but callers quoting an eta bound should note it now covers the padded
/// shape.
pub fn pad_to_divisible(a: &Mat, axis: Axis, multiple: usize) -> Mat {
    assert!(multiple > 0);
    let (rows, cols) = match axis {
        Axis::Rows => (a.rows().div_ceil(multiple) * multiple, a.cols()),
        Axis::Cols => (a.rows(), a.cols().div_ceil(multiple) * multiple),
    };
    if rows == a.rows() && cols == a.cols() {
        return a.clone();
    }
    let mut out = Mat::zeros(rows, cols);
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out[(r, c)] = a[(r, c)];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Matrix file I/O
// ---------------------------------------------------------------------------

/// Write a matrix as CSV: a `rows,cols` header line, then one line per row.
///
/// Values use Rust's shortest round-trip float formatting, so read-after-write
/// is bit exact.
pub fn write_matrix_csv(a: &Mat, w: &mut impl std::io::Write) -> Result<()> {
    writeln!(w, "{},{}", a.rows(), a.cols())?;
    for r in 0..a.rows() {
        let line: Vec<String> = a.row(r).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv(r: &mut impl std::io::Read) -> Result<Mat> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<&str> = header.split(',').collect();
    if dims.len() != 2 {
        return Err(Error::Parse(format!("bad header line: {header}")));
    }
    let rows: usize = dims[0].trim().parse().map_err(|_| Error::Parse("bad row count".into()))?;
    let cols: usize = dims[1].trim().parse().map_err(|_| Error::Parse("bad col count".into()))?;
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines {
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad float: {field}")))?;
            data.push(v);
        }
    }
    Mat::from_vec(rows, cols, data)
}

const MAGIC: &[u8; 4] = b"ACMM";

/// Write the raw binary format: magic `ACMM`, little-endian `u32` rows and
/// cols, then row-major little-endian `f64` data.
pub fn write_matrix_bin(a: &Mat, w: &mut impl std::io::Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(a.rows() as u32).to_le_bytes())?;
    w.write_all(&(a.cols() as u32).to_le_bytes())?;
    for v in a.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_bin(r: &mut impl std::io::Read) -> Result<Mat> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("missing ACMM magic".into()));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let rows = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let cols = u32::from_le_bytes(u32buf) as usize;
    let mut data = Vec::with_capacity(rows * cols);
    let mut f64buf = [0u8; 8];
    for _ in 0..rows * cols {
        r.read_exact(&mut f64buf)?;
        data.push(f64::from_le_bytes(f64buf));
    }
    Mat::from_vec(rows, cols, data)
}

/// Load a matrix from a path, sniffing the binary magic and falling back to
/// CSV.
pub fn read_matrix_file(path: &std::path::Path) -> Result<Mat> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        read_matrix_bin(&mut &bytes[..])
    } else {
        read_matrix_csv(&mut &bytes[..])
    }
}
