//! Design matrices: columns are (offset-stacked) vectorised library processes,
//! the target is the matching vectorised desired process.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::library::GateLibrary;
use crate::pauli::{basis_len, check_qubits};
use crate::ptm::{PauliTransferMatrix, VectorizedProcess};

pub const BINARY_MAGIC: &[u8; 8] = b"QSDESIGN";
pub const BINARY_DTYPE: &[u8; 8] = b"binary64";
pub const COLUMN_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    n_qubits: usize,
    matrix: DMatrix<f64>,
    target: DVector<f64>,
    column_labels: Vec<String>,
    offset_grid: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDesign {
    n_qubits: usize,
    rows: usize,
    cols: usize,
    column_labels: Vec<String>,
    offset_grid: Vec<f64>,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
}

impl DesignProblem {
    pub fn new(
        n_qubits: usize,
        matrix: DMatrix<f64>,
        target: DVector<f64>,
        column_labels: Vec<String>,
        offset_grid: Vec<f64>,
    ) -> Result<Self> {
        check_qubits(n_qubits)?;
        if offset_grid.is_empty() {
            return Err(Error::InvalidArgument("offset grid must have at least one point".into()));
        }
        let block = basis_len(n_qubits) * basis_len(n_qubits);
        let rows = block * offset_grid.len();
        if matrix.nrows() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: matrix.nrows() });
        }
        if target.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: target.len() });
        }
        if column_labels.len() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.ncols(), got: column_labels.len() });
        }
        if matrix.iter().chain(target.iter()).chain(offset_grid.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design problem contains non-finite values".into()));
        }
        Ok(DesignProblem { n_qubits, matrix, target, column_labels, offset_grid })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    pub fn offset_grid(&self) -> &[f64] {
        &self.offset_grid
    }

    /// Rows per offset block, `4^(2N)`.
    pub fn block_len(&self) -> usize {
        self.rows() / self.offset_grid.len()
    }

    pub fn residual(&self, gamma: &[f64]) -> Result<f64> {
        Ok(self.residual_vector(gamma)?.norm())
    }

    /// `R gamma - u`.
    pub fn residual_vector(&self, gamma: &[f64]) -> Result<DVector<f64>> {
        if gamma.len() != self.cols() {
            return Err(Error::DimensionMismatch { expected: self.cols(), got: gamma.len() });
        }
        Ok(&self.matrix * DVector::from_column_slice(gamma) - &self.target)
    }

    /// Residual norm restricted to each offset block.
    pub fn block_errors(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        let r = self.residual_vector(gamma)?;
        Ok(r.as_slice().chunks(self.block_len()).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect())
    }

    /// Distance of column `j` to the target in each offset block.
    pub fn column_block_errors(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.cols() {
            return Err(Error::InvalidArgument(format!("column {j} out of range")));
        }
        let mut gamma = vec![0.0; self.cols()];
        gamma[j] = 1.0;
        self.block_errors(&gamma)
    }

    /// Largest deviation of a column norm from `sqrt(q 4^N)`, the norm of a
    /// stack of `q` orthogonal PTMs.
    pub fn column_norm_deviation(&self) -> f64 {
        let expected = ((self.offset_grid.len() * basis_len(self.n_qubits)) as f64).sqrt();
        self.matrix.column_iter().map(|c| (c.norm() - expected).abs()).fold(0.0, f64::max)
    }

    pub fn check_column_norms(&self) -> Result<()> {
        let dev = self.column_norm_deviation();
        if dev > COLUMN_NORM_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(())
    }

    /// Problem with columns reordered so that new column `k` is old column `perm[k]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<DesignProblem> {
        let mut seen = vec![false; self.cols()];
        if perm.len() != self.cols() || perm.iter().any(|&p| p >= self.cols() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the columns".into()));
        }
        let matrix = DMatrix::from_fn(self.rows(), self.cols(), |i, k| self.matrix[(i, perm[k])]);
        let labels = perm.iter().map(|&p| self.column_labels[p].clone()).collect();
        DesignProblem::new(self.n_qubits, matrix, self.target.clone(), labels, self.offset_grid.clone())
    }

    pub fn diagnostics(&self) -> Diagnostics {
        diagnostics(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = RawDesign {
            n_qubits: self.n_qubits,
            rows: self.rows(),
            cols: self.cols(),
            column_labels: self.column_labels.clone(),
            offset_grid: self.offset_grid.clone(),
            columns: self.matrix.column_iter().map(|c| c.iter().copied().collect()).collect(),
            target: self.target.iter().copied().collect(),
        };
        Ok(serde_json::to_string(&raw)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawDesign = serde_json::from_str(s)?;
        if raw.columns.len() != raw.cols || raw.columns.iter().any(|c| c.len() != raw.rows) {
            return Err(Error::Format("column data does not match rows x cols".into()));
        }
        let flat: Vec<f64> = raw.columns.into_iter().flatten().collect();
        let matrix = DMatrix::from_column_slice(raw.rows, raw.cols, &flat);
        DesignProblem::new(raw.n_qubits, matrix, DVector::from_vec(raw.target), raw.column_labels, raw.offset_grid)
    }

    /// Dense binary form: 32-byte header (magic, rows and cols as little-endian
    /// u64, dtype tag), the matrix column-major, then the target; all values
    /// little-endian binary64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.rows() as u64).to_le_bytes())?;
        w.write_all(&(self.cols() as u64).to_le_bytes())?;
        w.write_all(BINARY_DTYPE)?;
        for v in self.matrix.iter().chain(self.target.iter()) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the binary form. Labels and grid are not stored; columns are
    /// labelled `c0, c1, ...` and the grid is `0, 1, ..., q-1`.
    pub fn read_binary<R: Read>(mut r: R, n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if &header[0..8] != BINARY_MAGIC || &header[24..32] != BINARY_DTYPE {
            return Err(Error::Format("bad design-matrix header".into()));
        }
        let rows = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
        let block = basis_len(n_qubits) * basis_len(n_qubits);
        if rows == 0 || rows % block != 0 {
            return Err(Error::Format(format!("{rows} rows is not a multiple of {block}")));
        }
        let count = rows.checked_mul(cols + 1).ok_or_else(|| Error::Format("size overflow".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * count {
            return Err(Error::Format(format!("expected {} data bytes, found {}", 8 * count, bytes.len())));
        }
        let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let matrix = DMatrix::from_column_slice(rows, cols, &values[..rows * cols]);
        let target = DVector::from_column_slice(&values[rows * cols..]);
        let labels = (0..cols).map(|j| format!("c{j}")).collect();
        let grid = (0..rows / block).map(|i| i as f64).collect();
        DesignProblem::new(n_qubits, matrix, target, labels, grid)
    }
}

fn library_columns(lib: &GateLibrary, offsets: &[f64]) -> Result<Vec<VectorizedProcess>> {
    lib.entries()
        .par_iter()
        .map(|e| {
            let blocks = offsets
                .iter()
                .map(|&d| {
                    e.ptm_at(d)
                        .map(|p| p.vectorize())
                        .map_err(|_| Error::MissingOffset { label: e.label.clone(), offset: d })
                })
                .collect::<Result<Vec<_>>>()?;
            VectorizedProcess::stack(&blocks)
        })
        .collect()
}

fn assemble(lib: &GateLibrary, offsets: &[f64], targets: Vec<VectorizedProcess>) -> Result<DesignProblem> {
    if lib.is_empty() {
        return Err(Error::InvalidLibrary("library is empty".into()));
    }
    let columns = library_columns(lib, offsets)?;
    let target = VectorizedProcess::stack(&targets)?;
    let rows = target.len();
    let mut matrix = DMatrix::zeros(rows, columns.len());
    for (j, c) in columns.iter().enumerate() {
        matrix.column_mut(j).copy_from_slice(c.as_slice());
    }
    DesignProblem::new(lib.n_qubits(), matrix, DVector::from_vec(target.into_vec()), lib.labels(), offsets.to_vec())
}

fn check_desired(lib: &GateLibrary, desired: &PauliTransferMatrix) -> Result<()> {
    if desired.n_qubits() != lib.n_qubits() {
        return Err(Error::DimensionMismatch { expected: lib.n_qubits(), got: desired.n_qubits() });
    }
    Ok(())
}

/// Single-offset problem `R gamma = vec(desired)`. Libraries carrying a grid must
/// have exactly one offset, at which offset-dependent entries are evaluated.
pub fn build_single_target(lib: &GateLibrary, desired: &PauliTransferMatrix) -> Result<DesignProblem> {
    check_desired(lib, desired)?;
    let offsets = lib.offsets();
    if offsets.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "single-target design needs one offset, library has {}",
            offsets.len()
        )));
    }
    assemble(lib, &offsets, vec![desired.vectorize()])
}

/// Offset-stacked problem with `q` copies of the desired process as target.
pub fn build_broadband(lib: &GateLibrary, desired: &PauliTransferMatrix) -> Result<DesignProblem> {
    check_desired(lib, desired)?;
    let offsets = lib.offsets();
    let targets = vec![desired.vectorize(); offsets.len()];
    assemble(lib, &offsets, targets)
}

/// Offset-stacked problem whose target is `desired` for `|d| <= band` and the
/// identity elsewhere.
pub fn build_band_selective(lib: &GateLibrary, desired: &PauliTransferMatrix, band: f64) -> Result<DesignProblem> {
    check_desired(lib, desired)?;
    if !(band >= 0.0) || !band.is_finite() {
        return Err(Error::InvalidArgument(format!("band half-width {band} must be finite and nonnegative")));
    }
    let offsets = lib.offsets();
    if !offsets.iter().any(|d| d.abs() <= band) {
        return Err(Error::EmptyBand { band });
    }
    let identity = PauliTransferMatrix::identity(lib.n_qubits())?.vectorize();
    let inside = desired.vectorize();
    let targets = offsets.iter().map(|d| if d.abs() <= band { inside.clone() } else { identity.clone() }).collect();
    assemble(lib, &offsets, targets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub rows: usize,
    pub cols: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub rank_tolerance: f64,
    /// Largest over smallest singular value (infinite when the smallest is zero).
    pub condition_number: f64,
    /// Largest over smallest singular value above the rank tolerance.
    pub effective_condition_number: f64,
    pub min_column_distance: f64,
    pub closest_columns: Option<(usize, usize)>,
}

pub const RANK_TOL: f64 = 1e-10;

pub fn diagnostics(p: &DesignProblem) -> Diagnostics {
    let svd = p.matrix.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = RANK_TOL * smax.max(1.0);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let smin = sv.last().copied().unwrap_or(0.0);
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let effective_condition_number = if rank > 0 { smax / sv[rank - 1] } else { f64::INFINITY };
    let mut min_column_distance = f64::INFINITY;
    let mut closest_columns = None;
    for i in 0..p.cols() {
        for j in i + 1..p.cols() {
            let d = (p.matrix.column(i) - p.matrix.column(j)).norm();
            if d < min_column_distance {
                min_column_distance = d;
                closest_columns = Some((i, j));
            }
        }
    }
    Diagnostics {
        rows: p.rows(),
        cols: p.cols(),
        singular_values: sv,
        rank,
        rank_tolerance: cutoff,
        condition_number,
        effective_condition_number,
        min_column_distance,
        closest_columns,
    }
}
