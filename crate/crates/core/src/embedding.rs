//! Graph encoder embedding.
//!
//! Labels define a sparse `N x K` weight matrix `W` whose row for a node of
//! class `k` is `1 / n_k` at column `k`. The embedding is `Z = A W`, so
//! `Z[i][k]` is the weighted share of class `k` among the neighbours of `i`.
//!
//! Three options rewrite `A` or `Z`, applied in this order:
//!
//! 1. diagonal: `A <- A + I`,
//! 2. laplacian: `A <- D^{-1/2} A D^{-1/2}`, with degrees taken from the
//!    already augmented matrix,
//! 3. `Z <- A W`,
//! 4. correlation: each nonzero row of `Z` is scaled to unit 2-norm.
//!
//! [`encode`] runs this on CSR matrices. [`encode_reference`] computes the
//! same thing by walking edge triplets directly and is kept as an oracle.

use std::fmt;

use thiserror::Error;

use crate::exec::Exec;
use crate::graph_io::EdgeList;
use crate::sparse::{self, CooBuilder, CsrMatrix, SparseError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EmbedError {
    #[error("label set needs at least one class")]
    NoClasses,

    #[error("node {node} has label {label}, but there are only {k_classes} classes")]
    LabelOutOfRange {
        node: usize,
        label: usize,
        k_classes: usize,
    },

    #[error("{labels} labels for a graph with {nodes} nodes")]
    LabelCount { labels: usize, nodes: usize },

    #[error("non-finite embedding value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Class of every node, `None` for unlabeled nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<Option<usize>>,
    k_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<Option<usize>>, k_classes: usize) -> Result<Self, EmbedError> {
        if k_classes == 0 {
            return Err(EmbedError::NoClasses);
        }
        if let Some((node, label)) = labels
            .iter()
            .enumerate()
            .find_map(|(n, l)| l.filter(|&l| l >= k_classes).map(|l| (n, l)))
        {
            return Err(EmbedError::LabelOutOfRange {
                node,
                label,
                k_classes,
            });
        }
        Ok(LabelVector { labels, k_classes })
    }

    /// Builds from integer labels where `-1` means unlabeled; `K` is the
    /// largest label plus one.
    pub fn from_signed(labels: &[i64]) -> Result<Self, EmbedError> {
        let labels: Vec<Option<usize>> = labels.iter().map(|&l| usize::try_from(l).ok()).collect();
        let k = labels.iter().flatten().max().map_or(1, |m| m + 1);
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn k_classes(&self) -> usize {
        self.k_classes
    }

    /// `n_k` for every class; unlabeled nodes are not counted.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k_classes];
        for &k in self.labels.iter().flatten() {
            counts[k] += 1;
        }
        counts
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.iter().flatten().count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EmbedOptions {
    pub laplacian: bool,
    pub diagonal: bool,
    pub correlation: bool,
}

impl EmbedOptions {
    pub const NONE: EmbedOptions = EmbedOptions {
        laplacian: false,
        diagonal: false,
        correlation: false,
    };

    pub const ALL: EmbedOptions = EmbedOptions {
        laplacian: true,
        diagonal: true,
        correlation: true,
    };

    pub fn new(laplacian: bool, diagonal: bool, correlation: bool) -> Self {
        EmbedOptions {
            laplacian,
            diagonal,
            correlation,
        }
    }

    /// All eight combinations, laplacian-on first, then diagonal-on, then
    /// correlation-on.
    pub fn grid() -> [EmbedOptions; 8] {
        let mut out = [EmbedOptions::NONE; 8];
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = EmbedOptions::new(n & 4 == 0, n & 2 == 0, n & 1 == 0);
        }
        out
    }
}

impl fmt::Display for EmbedOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: bool| if b { 'T' } else { 'F' };
        write!(
            f,
            "Lap={} Diag={} Cor={}",
            flag(self.laplacian),
            flag(self.diagonal),
            flag(self.correlation)
        )
    }
}

/// Dense row-major `N x K` embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        EmbeddingMatrix {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    /// # Panics
    /// If the rows have different lengths.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        EmbeddingMatrix {
            n_rows: rows.len(),
            n_cols,
            values: rows.concat(),
        }
    }

    pub fn from_csr(m: &CsrMatrix) -> Self {
        let mut z = Self::zeros(m.n_rows(), m.n_cols());
        for (r, c, v) in m.triplets() {
            z.values[r * z.n_cols + c] = v;
        }
        z
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols + c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on 0
        (0..self.n_rows).map(move |r| self.row(r))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Largest entrywise absolute difference; infinite if shapes differ.
    pub fn max_abs_diff(&self, other: &EmbeddingMatrix) -> f64 {
        if (self.n_rows, self.n_cols) != (other.n_rows, other.n_cols) {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `N x K` matrix with `1 / n_k` at `(j, k)` for every node `j` of class `k`.
/// Unlabeled nodes get empty rows.
pub fn build_weight_matrix(labels: &LabelVector) -> CsrMatrix {
    let counts = labels.class_counts();
    let mut builder = CooBuilder::with_capacity(labels.len(), labels.k_classes(), labels.n_labeled());
    for (node, label) in labels.labels().iter().enumerate() {
        if let Some(k) = *label {
            builder
                .add(node, k, 1.0 / counts[k] as f64)
                .expect("labels are validated against k_classes");
        }
    }
    builder.finalize()
}

pub fn encode(
    adjacency: &CsrMatrix,
    labels: &LabelVector,
    opts: EmbedOptions,
) -> Result<EmbeddingMatrix, EmbedError> {
    encode_with(adjacency, labels, opts, Exec::default())
}

/// [`encode`] with an explicit execution strategy.
pub fn encode_with(
    adjacency: &CsrMatrix,
    labels: &LabelVector,
    opts: EmbedOptions,
    exec: Exec,
) -> Result<EmbeddingMatrix, EmbedError> {
    if !adjacency.is_square() {
        return Err(SparseError::NotSquare {
            n_rows: adjacency.n_rows(),
            n_cols: adjacency.n_cols(),
        }
        .into());
    }
    if labels.len() != adjacency.n_rows() {
        return Err(EmbedError::LabelCount {
            labels: labels.len(),
            nodes: adjacency.n_rows(),
        });
    }

    let augmented;
    let mut a = adjacency;
    if opts.diagonal {
        augmented = sparse::add_identity(a)?;
        a = &augmented;
    }
    let normalized;
    if opts.laplacian {
        let degrees = sparse::degree_vector(a)?;
        normalized = sparse::laplacian_normalize_with(a, &degrees, exec)?;
        a = &normalized;
    }
    let w = build_weight_matrix(labels);
    let z = EmbeddingMatrix::from_csr(&sparse::spmm_with(a, &w, exec)?);
    if opts.correlation {
        correlate_rows_with(z, exec)
    } else {
        Ok(z)
    }
}

/// Scales every nonzero row to unit 2-norm; zero rows stay zero.
pub fn correlate_rows(z: EmbeddingMatrix) -> Result<EmbeddingMatrix, EmbedError> {
    correlate_rows_with(z, Exec::default())
}

fn correlate_rows_with(z: EmbeddingMatrix, exec: Exec) -> Result<EmbeddingMatrix, EmbedError> {
    if let Some(p) = z.values.iter().position(|v| !v.is_finite()) {
        return Err(EmbedError::NonFinite {
            row: p / z.n_cols,
            col: p % z.n_cols,
        });
    }
    let n_cols = z.n_cols;
    let rows = exec.map_indexed(
        z.n_rows,
        || (),
        |_, r| {
            let row = z.row(r);
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter().map(|v| v / norm).collect()
            } else {
                row.to_vec()
            }
        },
    );
    Ok(EmbeddingMatrix {
        n_rows: z.n_rows,
        n_cols,
        values: rows.concat(),
    })
}

/// Computes the embedding straight from edge triplets, without building any
/// matrix: every (possibly mirrored) edge `(i, j, e_ij)` adds
/// `e_ij * W[j][label_j]` to `Z[i][label_j]`. The options act on the triplets:
/// diagonal appends unit self-loops and laplacian rescales each weight by
/// `(d_i d_j)^{-1/2}`.
pub fn encode_reference(
    edges: &EdgeList,
    labels: &LabelVector,
    opts: EmbedOptions,
) -> Result<EmbeddingMatrix, EmbedError> {
    let n = edges.n_nodes();
    if labels.len() != n {
        return Err(EmbedError::LabelCount {
            labels: labels.len(),
            nodes: n,
        });
    }
    let k = labels.k_classes();

    let mut contributions: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * edges.len() + n);
    for &(i, j, w) in edges.triplets() {
        contributions.push((i, j, w));
        if !edges.is_directed() && i != j {
            contributions.push((j, i, w));
        }
    }
    if opts.diagonal {
        contributions.extend((0..n).map(|i| (i, i, 1.0)));
    }

    if opts.laplacian {
        let mut degree = vec![0.0; n];
        for &(i, _, w) in &contributions {
            degree[i] += w;
        }
        let mut scale = vec![0.0; n];
        for (i, &d) in degree.iter().enumerate() {
            if d < 0.0 {
                return Err(SparseError::NegativeDegree { row: i, degree: d }.into());
            }
            if d > 0.0 {
                scale[i] = 1.0 / d.sqrt();
            }
        }
        for (i, j, w) in contributions.iter_mut() {
            *w *= scale[*i] * scale[*j];
        }
    }

    let counts = labels.class_counts();
    let mut z = vec![vec![0.0; k]; n];
    for &(i, j, w) in &contributions {
        if let Some(class) = labels.labels()[j] {
            z[i][class] += w / counts[class] as f64;
        }
    }

    if opts.correlation {
        for row in z.iter_mut() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }
    Ok(EmbeddingMatrix {
        n_rows: n,
        n_cols: k,
        values: z.concat(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_edges() -> EdgeList {
        EdgeList::from_triplets(3, false, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn labels(raw: &[i64]) -> LabelVector {
        LabelVector::from_signed(raw).unwrap()
    }

    fn assert_close(z: &EmbeddingMatrix, expected: &[Vec<f64>]) {
        let e = EmbeddingMatrix::from_rows(expected);
        assert!(z.max_abs_diff(&e) <= 1e-15, "{:?} vs {:?}", z.to_rows(), expected);
    }

    #[test]
    fn weight_matrix_examples() {
        let w = build_weight_matrix(&labels(&[0, 1, 1]));
        assert_eq!(w.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 0.5], vec![0.0, 0.5]]);

        let w = build_weight_matrix(&labels(&[0, -1]));
        assert_eq!(w.shape(), (2, 1));
        assert_eq!(w.row(0).unwrap(), (&[0usize][..], &[1.0][..]));
        assert_eq!(w.row(1).unwrap().0.len(), 0);

        let w = build_weight_matrix(&LabelVector::new(vec![Some(2); 3], 3).unwrap());
        for r in 0..3 {
            assert_eq!(w.row(r).unwrap(), (&[2usize][..], &[1.0 / 3.0][..]));
        }
    }

    #[test]
    fn zero_classes_rejected() {
        assert_eq!(LabelVector::new(vec![], 0), Err(EmbedError::NoClasses));
        assert!(matches!(
            LabelVector::new(vec![Some(3)], 2),
            Err(EmbedError::LabelOutOfRange { node: 0, label: 3, k_classes: 2 })
        ));
    }

    #[test]
    fn triangle_all_off() {
        let a = triangle_edges().to_adjacency().unwrap();
        let z = encode(&a, &labels(&[0, 1, 1]), EmbedOptions::NONE).unwrap();
        assert_close(&z, &[vec![0.0, 1.0], vec![1.0, 0.5], vec![1.0, 0.5]]);
    }

    #[test]
    fn triangle_diagonal() {
        let a = triangle_edges().to_adjacency().unwrap();
        let opts = EmbedOptions::new(false, true, false);
        let z = encode(&a, &labels(&[0, 1, 1]), opts).unwrap();
        assert_close(&z, &[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn triangle_laplacian() {
        let a = triangle_edges().to_adjacency().unwrap();
        let opts = EmbedOptions::new(true, false, false);
        let z = encode(&a, &labels(&[0, 1, 1]), opts).unwrap();
        assert_close(&z, &[vec![0.0, 0.5], vec![0.5, 0.25], vec![0.5, 0.25]]);
    }

    #[test]
    fn edgeless_graph() {
        let a = CsrMatrix::zeros(4, 4);
        for opts in EmbedOptions::grid() {
            if opts.diagonal {
                continue;
            }
            let z = encode(&a, &labels(&[0, 1, -1, 1]), opts).unwrap();
            assert!(z.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn label_count_mismatch() {
        let a = triangle_edges().to_adjacency().unwrap();
        assert_eq!(
            encode(&a, &labels(&[0, 1]), EmbedOptions::NONE),
            Err(EmbedError::LabelCount { labels: 2, nodes: 3 })
        );
        assert!(matches!(
            encode(&CsrMatrix::zeros(2, 3), &labels(&[0, 1]), EmbedOptions::NONE),
            Err(EmbedError::Sparse(SparseError::NotSquare { .. }))
        ));
        assert!(encode_reference(&triangle_edges(), &labels(&[0]), EmbedOptions::NONE).is_err());
    }

    #[test]
    fn correlation_examples() {
        let z = EmbeddingMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0], vec![0.0, 7.0]]);
        let c = correlate_rows(z).unwrap();
        assert_close(&c, &[vec![0.6, 0.8], vec![0.0, 0.0], vec![0.0, 1.0]]);
        let bad = EmbeddingMatrix::from_rows(&[vec![1.0, f64::NAN]]);
        assert_eq!(correlate_rows(bad), Err(EmbedError::NonFinite { row: 0, col: 1 }));
    }

    #[test]
    fn reference_examples() {
        let z = encode_reference(&triangle_edges(), &labels(&[0, 1, 1]), EmbedOptions::NONE).unwrap();
        assert_close(&z, &[vec![0.0, 1.0], vec![1.0, 0.5], vec![1.0, 0.5]]);

        let pair = EdgeList::from_triplets(2, false, vec![(0, 1, 1.0)]).unwrap();
        let z = encode_reference(&pair, &labels(&[0, 1]), EmbedOptions::NONE).unwrap();
        assert_close(&z, &[vec![0.0, 1.0], vec![1.0, 0.0]]);

        let empty = EdgeList::new(3, false);
        let z = encode_reference(&empty, &labels(&[0, 1, 1]), EmbedOptions::NONE).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unlabeled_nodes_still_embedded() {
        let a = triangle_edges().to_adjacency().unwrap();
        let z = encode(&a, &labels(&[0, -1, 1]), EmbedOptions::NONE).unwrap();
        assert_close(&z, &[vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn empty_class_column_is_zero() {
        let a = triangle_edges().to_adjacency().unwrap();
        let l = LabelVector::new(vec![Some(0), Some(2), Some(2)], 3).unwrap();
        let z = encode(&a, &l, EmbedOptions::ALL).unwrap();
        assert!(z.rows().all(|r| r[1] == 0.0));
    }

    #[test]
    fn self_loop_gains_one_under_diagonal() {
        let e = EdgeList::from_triplets(2, false, vec![(0, 0, 2.0), (0, 1, 1.0)]).unwrap();
        let a = e.to_adjacency().unwrap();
        let l = labels(&[0, 1]);
        let opts = EmbedOptions::new(false, true, false);
        let z = encode(&a, &l, opts).unwrap();
        assert_close(&z, &[vec![3.0, 1.0], vec![1.0, 1.0]]);
        assert!(encode_reference(&e, &l, opts).unwrap().max_abs_diff(&z) == 0.0);
    }

    #[test]
    fn grid_covers_every_combination() {
        let grid = EmbedOptions::grid();
        let mut seen: Vec<_> = grid.iter().map(|o| (o.laplacian, o.diagonal, o.correlation)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert_eq!(grid[0], EmbedOptions::ALL);
        assert_eq!(grid[7], EmbedOptions::NONE);
        assert_eq!(EmbedOptions::ALL.to_string(), "Lap=T Diag=T Cor=T");
    }
}
