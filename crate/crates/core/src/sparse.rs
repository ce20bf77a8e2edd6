//! Compressed sparse row matrices and the handful of kernels the embedding
//! needs: triplet assembly, sparse-sparse products, diagonal augmentation and
//! symmetric degree normalization.
//!
//! A [`CsrMatrix`] stores three arrays:
//!
//! - `index_pointers`, length `n_rows + 1`; row `r` occupies
//!   `index_pointers[r]..index_pointers[r + 1]` of the other two arrays,
//! - `col_indices`, strictly increasing within each row,
//! - `data`, the stored values, never exactly zero.
//!
//! Matrices are assembled through [`CooBuilder`], which accepts triplets in any
//! order, sums duplicates and drops entries that cancel to zero.

use thiserror::Error;

use crate::exec::Exec;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SparseError {
    #[error("triplet ({row}, {col}) is outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("triplet ({row}, {col}) has non-finite value {value}")]
    NonFiniteValue { row: usize, col: usize, value: f64 },

    #[error("row {row} out of range for a matrix with {n_rows} rows")]
    RowOutOfRange { row: usize, n_rows: usize },

    #[error("shape mismatch: cannot multiply {}x{} by {}x{}", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("expected a square matrix, got {n_rows}x{n_cols}")]
    NotSquare { n_rows: usize, n_cols: usize },

    #[error("degree vector has length {len}, matrix has {n_rows} rows")]
    DegreeLength { len: usize, n_rows: usize },

    #[error("negative degree {degree} at row {row}")]
    NegativeDegree { row: usize, degree: f64 },

    #[error("malformed CSR: {0}")]
    Malformed(String),
}

/// Immutable compressed sparse row matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    index_pointers: Vec<usize>,
    col_indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays, checking every structural invariant.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        index_pointers: Vec<usize>,
        col_indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self, SparseError> {
        let m = CsrMatrix {
            n_rows,
            n_cols,
            index_pointers,
            col_indices,
            data,
        };
        m.validate()?;
        Ok(m)
    }

    /// An `n_rows x n_cols` matrix with no stored entries.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            index_pointers: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            index_pointers: (0..=n).collect(),
            col_indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn index_pointers(&self) -> &[usize] {
        &self.index_pointers
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column indices and values stored in row `r`.
    pub fn row(&self, r: usize) -> Result<(&[usize], &[f64]), SparseError> {
        if r >= self.n_rows {
            return Err(SparseError::RowOutOfRange {
                row: r,
                n_rows: self.n_rows,
            });
        }
        Ok(self.row_unchecked(r))
    }

    #[inline]
    fn row_unchecked(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.index_pointers[r]..self.index_pointers[r + 1];
        (&self.col_indices[span.clone()], &self.data[span])
    }

    /// Stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row_unchecked(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Value at `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        if r >= self.n_rows {
            return 0.0;
        }
        let (cols, vals) = self.row_unchecked(r);
        cols.binary_search(&c).map_or(0.0, |p| vals[p])
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// Checks all structural invariants.
    pub fn validate(&self) -> Result<(), SparseError> {
        let bad = |msg: String| Err(SparseError::Malformed(msg));
        if self.index_pointers.len() != self.n_rows + 1 {
            return bad(format!(
                "index_pointers has length {}, expected {}",
                self.index_pointers.len(),
                self.n_rows + 1
            ));
        }
        if self.col_indices.len() != self.data.len() {
            return bad(format!(
                "{} column indices but {} values",
                self.col_indices.len(),
                self.data.len()
            ));
        }
        if self.index_pointers[0] != 0 {
            return bad("index_pointers[0] is not 0".into());
        }
        if self.index_pointers[self.n_rows] != self.data.len() {
            return bad(format!(
                "index_pointers ends at {}, nnz is {}",
                self.index_pointers[self.n_rows],
                self.data.len()
            ));
        }
        for r in 0..self.n_rows {
            let (lo, hi) = (self.index_pointers[r], self.index_pointers[r + 1]);
            if lo > hi || hi > self.data.len() {
                return bad(format!("index_pointers out of order at row {r}"));
            }
            let cols = &self.col_indices[lo..hi];
            if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols) {
                return bad(format!("row {r} has column {c} >= {}", self.n_cols));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {r} columns are not strictly increasing"));
            }
            if let Some(v) = self.data[lo..hi].iter().find(|v| **v == 0.0 || !v.is_finite()) {
                return bad(format!("row {r} stores value {v}"));
            }
        }
        Ok(())
    }
}

/// Triplet accumulator that finalizes into a [`CsrMatrix`].
///
/// This is the mutable assembly stage: triplets may arrive in any order and the
/// same `(row, col)` may be added repeatedly; repeats are summed in insertion
/// order when the matrix is finalized.
#[derive(Clone, Debug)]
pub struct CooBuilder {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CooBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self::with_capacity(n_rows, n_cols, 0)
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, capacity: usize) -> Self {
        CooBuilder {
            n_rows,
            n_cols,
            rows: Vec::with_capacity(capacity),
            cols: Vec::with_capacity(capacity),
            vals: Vec::with_capacity(capacity),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    /// Number of buffered triplets, counting repeats.
    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) -> Result<(), SparseError> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(SparseError::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        if !value.is_finite() {
            return Err(SparseError::NonFiniteValue { row, col, value });
        }
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(value);
        Ok(())
    }

    pub fn finalize(self) -> CsrMatrix {
        self.finalize_with(Exec::default())
    }

    /// Counting sort by row, stable sort by column within each row, then a
    /// merge pass that sums repeats and drops exact zeros.
    pub fn finalize_with(self, exec: Exec) -> CsrMatrix {
        let CooBuilder {
            n_rows,
            n_cols,
            rows,
            cols,
            vals,
        } = self;

        let mut starts = vec![0usize; n_rows + 1];
        for &r in &rows {
            starts[r + 1] += 1;
        }
        for r in 0..n_rows {
            starts[r + 1] += starts[r];
        }

        let mut entries = vec![(0usize, 0.0f64); vals.len()];
        let mut cursor = starts.clone();
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            entries[cursor[r]] = (c, v);
            cursor[r] += 1;
        }
        drop(cursor);

        let mut row_slices: Vec<(&mut [(usize, f64)], usize)> = Vec::with_capacity(n_rows);
        let mut rest = entries.as_mut_slice();
        for r in 0..n_rows {
            let (head, tail) = rest.split_at_mut(starts[r + 1] - starts[r]);
            row_slices.push((head, 0));
            rest = tail;
        }
        exec.for_each_mut(&mut row_slices, |(row, kept)| *kept = compact_row(row));

        let mut index_pointers = Vec::with_capacity(n_rows + 1);
        index_pointers.push(0);
        let nnz: usize = row_slices.iter().map(|(_, k)| k).sum();
        let mut col_indices = Vec::with_capacity(nnz);
        let mut data = Vec::with_capacity(nnz);
        for (row, kept) in &row_slices {
            for &(c, v) in &row[..*kept] {
                col_indices.push(c);
                data.push(v);
            }
            index_pointers.push(col_indices.len());
        }

        CsrMatrix {
            n_rows,
            n_cols,
            index_pointers,
            col_indices,
            data,
        }
    }
}

/// Sorts one row by column, merges repeats and moves surviving entries to the
/// front. Returns how many survive.
fn compact_row(row: &mut [(usize, f64)]) -> usize {
    // stable, so repeats are summed in insertion order
    row.sort_by_key(|&(c, _)| c);
    let mut kept = 0;
    let mut i = 0;
    while i < row.len() {
        let (col, mut sum) = row[i];
        i += 1;
        while i < row.len() && row[i].0 == col {
            sum += row[i].1;
            i += 1;
        }
        if sum != 0.0 {
            row[kept] = (col, sum);
            kept += 1;
        }
    }
    kept
}

/// Per-row weighted degrees, `d_i = sum_j A_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeVector(Vec<f64>);

impl DegreeVector {
    pub fn new(degrees: Vec<f64>) -> Self {
        DegreeVector(degrees)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Dense scratch row used by the product kernel.
struct Accumulator {
    values: Vec<f64>,
    occupied: Vec<bool>,
    touched: Vec<usize>,
}

impl Accumulator {
    fn new(width: usize) -> Self {
        Accumulator {
            values: vec![0.0; width],
            occupied: vec![false; width],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, col: usize, value: f64) {
        if !self.occupied[col] {
            self.occupied[col] = true;
            self.touched.push(col);
        }
        self.values[col] += value;
    }

    /// Emits the accumulated row in column order and resets the scratch.
    fn drain(&mut self) -> (Vec<usize>, Vec<f64>) {
        self.touched.sort_unstable();
        let mut cols = Vec::with_capacity(self.touched.len());
        let mut vals = Vec::with_capacity(self.touched.len());
        for &c in &self.touched {
            let v = self.values[c];
            if v != 0.0 {
                cols.push(c);
                vals.push(v);
            }
            self.values[c] = 0.0;
            self.occupied[c] = false;
        }
        self.touched.clear();
        (cols, vals)
    }
}

/// Sparse product `a * b`.
pub fn spmm(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix, SparseError> {
    spmm_with(a, b, Exec::default())
}

/// Sparse product with an explicit execution strategy.
///
/// Row `i` of the result accumulates `a_ij * b_j.` over the stored columns of
/// `a`'s row in increasing `j`, so every strategy yields bitwise-identical
/// output.
pub fn spmm_with(a: &CsrMatrix, b: &CsrMatrix, exec: Exec) -> Result<CsrMatrix, SparseError> {
    if a.n_cols != b.n_rows {
        return Err(SparseError::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let rows = exec.map_indexed(
        a.n_rows,
        || Accumulator::new(b.n_cols),
        |acc, i| {
            let (a_cols, a_vals) = a.row_unchecked(i);
            for (&j, &a_ij) in a_cols.iter().zip(a_vals) {
                let (b_cols, b_vals) = b.row_unchecked(j);
                for (&k, &b_jk) in b_cols.iter().zip(b_vals) {
                    acc.add(k, a_ij * b_jk);
                }
            }
            acc.drain()
        },
    );
    Ok(assemble_rows(a.n_rows, b.n_cols, rows))
}

fn assemble_rows(n_rows: usize, n_cols: usize, rows: Vec<(Vec<usize>, Vec<f64>)>) -> CsrMatrix {
    let nnz = rows.iter().map(|(c, _)| c.len()).sum();
    let mut index_pointers = Vec::with_capacity(n_rows + 1);
    index_pointers.push(0);
    let mut col_indices = Vec::with_capacity(nnz);
    let mut data = Vec::with_capacity(nnz);
    for (cols, vals) in rows {
        col_indices.extend_from_slice(&cols);
        data.extend_from_slice(&vals);
        index_pointers.push(col_indices.len());
    }
    CsrMatrix {
        n_rows,
        n_cols,
        index_pointers,
        col_indices,
        data,
    }
}

/// `a + I`. Existing diagonal entries gain 1.0, missing ones are created.
pub fn add_identity(a: &CsrMatrix) -> Result<CsrMatrix, SparseError> {
    if !a.is_square() {
        return Err(SparseError::NotSquare {
            n_rows: a.n_rows,
            n_cols: a.n_cols,
        });
    }
    let mut index_pointers = Vec::with_capacity(a.n_rows + 1);
    index_pointers.push(0);
    let mut col_indices = Vec::with_capacity(a.nnz() + a.n_rows);
    let mut data = Vec::with_capacity(a.nnz() + a.n_rows);
    for r in 0..a.n_rows {
        let (cols, vals) = a.row_unchecked(r);
        let split = cols.partition_point(|&c| c < r);
        col_indices.extend_from_slice(&cols[..split]);
        data.extend_from_slice(&vals[..split]);
        let mut rest = split;
        let diag = if cols.get(split) == Some(&r) {
            rest += 1;
            vals[split] + 1.0
        } else {
            1.0
        };
        // a -1 self-loop cancels
        if diag != 0.0 {
            col_indices.push(r);
            data.push(diag);
        }
        col_indices.extend_from_slice(&cols[rest..]);
        data.extend_from_slice(&vals[rest..]);
        index_pointers.push(col_indices.len());
    }
    Ok(CsrMatrix {
        n_rows: a.n_rows,
        n_cols: a.n_cols,
        index_pointers,
        col_indices,
        data,
    })
}

/// Weighted degree of every row.
pub fn degree_vector(a: &CsrMatrix) -> Result<DegreeVector, SparseError> {
    if !a.is_square() {
        return Err(SparseError::NotSquare {
            n_rows: a.n_rows,
            n_cols: a.n_cols,
        });
    }
    Ok(DegreeVector(
        (0..a.n_rows)
            .map(|r| a.row_unchecked(r).1.iter().sum())
            .collect(),
    ))
}

/// `D^{-1/2} A D^{-1/2}`: each stored `a_ij` becomes `a_ij * s_i * s_j` with
/// `s_i = d_i^{-1/2}`, and `s_i = 0` for zero-degree rows. Entries that end up
/// zero are dropped.
pub fn laplacian_normalize(a: &CsrMatrix, degrees: &DegreeVector) -> Result<CsrMatrix, SparseError> {
    laplacian_normalize_with(a, degrees, Exec::default())
}

pub fn laplacian_normalize_with(
    a: &CsrMatrix,
    degrees: &DegreeVector,
    exec: Exec,
) -> Result<CsrMatrix, SparseError> {
    if !a.is_square() {
        return Err(SparseError::NotSquare {
            n_rows: a.n_rows,
            n_cols: a.n_cols,
        });
    }
    if degrees.len() != a.n_rows {
        return Err(SparseError::DegreeLength {
            len: degrees.len(),
            n_rows: a.n_rows,
        });
    }
    let scale = degrees
        .as_slice()
        .iter()
        .enumerate()
        .map(|(row, &d)| {
            if d < 0.0 {
                Err(SparseError::NegativeDegree { row, degree: d })
            } else if d > 0.0 {
                Ok(d.sqrt().recip())
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let rows = exec.map_indexed(
        a.n_rows,
        || (),
        |_, i| {
            let (cols, vals) = a.row_unchecked(i);
            let s_i = scale[i];
            let mut out_cols = Vec::with_capacity(cols.len());
            let mut out_vals = Vec::with_capacity(cols.len());
            for (&j, &v) in cols.iter().zip(vals) {
                let scaled = v * s_i * scale[j];
                if scaled != 0.0 {
                    out_cols.push(j);
                    out_vals.push(scaled);
                }
            }
            (out_cols, out_vals)
        },
    );
    Ok(assemble_rows(a.n_rows, a.n_cols, rows))
}
