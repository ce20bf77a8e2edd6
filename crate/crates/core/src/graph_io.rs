//! Text formats: edge lists in, label files in, embeddings and generated
//! graphs out.
//!
//! Edge list lines are `i j` or `i j w`, separated by whitespace or commas.
//! Label files hold either one label per line (the line's position is the
//! node) or `node label` pairs. Lines starting with `#` and blank lines are
//! skipped everywhere. A label of `-1` marks a node as unlabeled.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::embedding::{EmbedError, EmbeddingMatrix, LabelVector};
use crate::sparse::{CooBuilder, CsrMatrix, SparseError};

#[derive(Error, Debug)]
pub enum GraphIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: index {index} is below the index base {base}")]
    IndexBelowBase { line: usize, index: i64, base: usize },

    #[error("line {line}: label {label} is invalid (use -1 for unlabeled)")]
    LabelRange { line: usize, label: i64 },

    #[error("node {node} assigned conflicting labels {first} and {second}")]
    LabelConflict { node: usize, first: i64, second: i64 },

    #[error("declared {declared} nodes but the edge list references node {max_index}")]
    DeclaredNodes { declared: usize, max_index: usize },

    #[error("edge ({from}, {to}) is outside a graph with {n_nodes} nodes")]
    EdgeOutOfRange {
        from: usize,
        to: usize,
        n_nodes: usize,
    },

    #[error("edge ({from}, {to}) has non-finite weight {weight}")]
    NonFiniteWeight { from: usize, to: usize, weight: f64 },

    #[error("index base must be 0 or 1, got {0}")]
    IndexBase(usize),

    #[error("edge density needs at least 2 nodes, got {0}")]
    DensityDomain(usize),

    #[error(transparent)]
    Labels(#[from] EmbedError),
}

impl GraphIoError {
    /// Whether the error came from malformed input text (as opposed to a
    /// well-formed file whose contents don't fit the graph).
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            GraphIoError::Io(_)
                | GraphIoError::Parse { .. }
                | GraphIoError::IndexBelowBase { .. }
                | GraphIoError::LabelRange { .. }
                | GraphIoError::LabelConflict { .. }
                | GraphIoError::DeclaredNodes { .. }
                | GraphIoError::IndexBase(_)
        )
    }
}

/// Weighted edge triplets over nodes `0..n_nodes`.
///
/// An undirected list stores each edge once; [`EdgeList::to_adjacency`]
/// mirrors it.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    n_nodes: usize,
    directed: bool,
    triplets: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    pub fn new(n_nodes: usize, directed: bool) -> Self {
        EdgeList {
            n_nodes,
            directed,
            triplets: Vec::new(),
        }
    }

    pub fn from_triplets(
        n_nodes: usize,
        directed: bool,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self, GraphIoError> {
        for &(i, j, w) in &triplets {
            check_edge(n_nodes, i, j, w)?;
        }
        Ok(EdgeList {
            n_nodes,
            directed,
            triplets,
        })
    }

    pub fn push(&mut self, source: usize, target: usize, weight: f64) -> Result<(), GraphIoError> {
        check_edge(self.n_nodes, source, target, weight)?;
        self.triplets.push((source, target, weight));
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    /// Number of stored triplets.
    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// Same edges with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        EdgeList {
            n_nodes: self.n_nodes,
            directed: self.directed,
            triplets: self
                .triplets
                .iter()
                .map(|&(i, j, w)| (i, j, w * factor))
                .collect(),
        }
    }

    /// Distinct unordered node pairs `{i, j}` with `i != j`.
    pub fn undirected_edge_count(&self) -> usize {
        self.triplets
            .iter()
            .filter(|(i, j, _)| i != j)
            .map(|&(i, j, _)| (i.min(j), i.max(j)))
            .collect::<HashSet<_>>()
            .len()
    }

    /// Builds the `n_nodes x n_nodes` adjacency matrix. Undirected triplets
    /// contribute both `A_ij` and `A_ji` (self-loops once); repeated edges sum.
    pub fn to_adjacency(&self) -> Result<CsrMatrix, SparseError> {
        let capacity = if self.directed {
            self.triplets.len()
        } else {
            2 * self.triplets.len()
        };
        let mut builder = CooBuilder::with_capacity(self.n_nodes, self.n_nodes, capacity);
        for &(i, j, w) in &self.triplets {
            builder.add(i, j, w)?;
            if !self.directed && i != j {
                builder.add(j, i, w)?;
            }
        }
        Ok(builder.finalize())
    }
}

fn check_edge(n_nodes: usize, from: usize, to: usize, weight: f64) -> Result<(), GraphIoError> {
    if from >= n_nodes || to >= n_nodes {
        return Err(GraphIoError::EdgeOutOfRange { from, to, n_nodes });
    }
    if !weight.is_finite() {
        return Err(GraphIoError::NonFiniteWeight { from, to, weight });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Delimiter {
    /// Comma if the first data line contains one, whitespace otherwise.
    #[default]
    Auto,
    Whitespace,
    Comma,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseOptions {
    pub delimiter: Delimiter,
    /// 0 or 1; node ids in the file are shifted down by this much.
    pub index_base: usize,
    pub directed: bool,
    /// Weight for two-column edge lines.
    pub default_weight: f64,
    /// Node count; inferred as max index + 1 when absent.
    pub n_nodes: Option<usize>,
    /// Class count for label files; inferred as max label + 1 when absent.
    pub n_classes: Option<usize>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            delimiter: Delimiter::Auto,
            index_base: 0,
            directed: false,
            default_weight: 1.0,
            n_nodes: None,
            n_classes: None,
        }
    }
}

impl ParseOptions {
    fn check(&self) -> Result<(), GraphIoError> {
        if self.index_base > 1 {
            return Err(GraphIoError::IndexBase(self.index_base));
        }
        Ok(())
    }
}

/// Iterates `(line_number, fields)` over data lines, resolving the delimiter
/// on the first one.
struct DataLines<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    delimiter: Delimiter,
}

impl<R: BufRead> DataLines<R> {
    fn new(source: R, delimiter: Delimiter) -> Self {
        DataLines {
            lines: source.lines(),
            line_no: 0,
            delimiter,
        }
    }

    fn next_fields(&mut self) -> Option<Result<(usize, Vec<String>), GraphIoError>> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if self.delimiter == Delimiter::Auto {
                self.delimiter = if trimmed.contains(',') {
                    Delimiter::Comma
                } else {
                    Delimiter::Whitespace
                };
            }
            let fields: Vec<String> = match self.delimiter {
                Delimiter::Comma => trimmed.split(',').map(|f| f.trim().to_string()).collect(),
                _ => trimmed.split_whitespace().map(str::to_string).collect(),
            };
            return Some(Ok((self.line_no, fields)));
        }
    }
}

fn parse_int(line: usize, what: &str, field: &str) -> Result<i64, GraphIoError> {
    field.parse::<i64>().map_err(|_| GraphIoError::Parse {
        line,
        message: format!("invalid {what} {field:?}"),
    })
}

fn parse_node(line: usize, field: &str, base: usize) -> Result<usize, GraphIoError> {
    let raw = parse_int(line, "node index", field)?;
    if raw < base as i64 {
        return Err(GraphIoError::IndexBelowBase {
            line,
            index: raw,
            base,
        });
    }
    Ok((raw - base as i64) as usize)
}

/// Reads an edge list.
pub fn parse_edge_list<R: BufRead>(source: R, opts: &ParseOptions) -> Result<EdgeList, GraphIoError> {
    opts.check()?;
    let mut lines = DataLines::new(source, opts.delimiter);
    let mut triplets = Vec::new();
    let mut max_index: Option<usize> = None;
    while let Some(item) = lines.next_fields() {
        let (line, fields) = item?;
        if fields.len() != 2 && fields.len() != 3 {
            return Err(GraphIoError::Parse {
                line,
                message: format!("expected 2 or 3 fields, found {}", fields.len()),
            });
        }
        let i = parse_node(line, &fields[0], opts.index_base)?;
        let j = parse_node(line, &fields[1], opts.index_base)?;
        let w = match fields.get(2) {
            Some(f) => f.parse::<f64>().ok().filter(|w| w.is_finite()).ok_or_else(|| {
                GraphIoError::Parse {
                    line,
                    message: format!("invalid weight {f:?}"),
                }
            })?,
            None => opts.default_weight,
        };
        max_index = max_index.max(Some(i.max(j)));
        triplets.push((i, j, w));
    }
    let needed = max_index.map_or(0, |m| m + 1);
    let n_nodes = match opts.n_nodes {
        Some(declared) if declared < needed => {
            return Err(GraphIoError::DeclaredNodes {
                declared,
                max_index: needed - 1,
            })
        }
        Some(declared) => declared,
        None => needed,
    };
    EdgeList::from_triplets(n_nodes, opts.directed, triplets)
}

/// Reads a label file. The layout (one label per line, or `node label`
/// pairs) is taken from the first data line. Node ids in pair form honour
/// `index_base`; labels are always 0-based.
pub fn parse_labels<R: BufRead>(source: R, opts: &ParseOptions) -> Result<LabelVector, GraphIoError> {
    opts.check()?;
    let mut lines = DataLines::new(source, opts.delimiter);
    let mut labels: Vec<Option<i64>> = Vec::new();
    let mut paired: Option<bool> = None;
    while let Some(item) = lines.next_fields() {
        let (line, fields) = item?;
        let is_pair = match (fields.len(), paired) {
            (1, None | Some(false)) => false,
            (2, None | Some(true)) => true,
            (n, _) => {
                return Err(GraphIoError::Parse {
                    line,
                    message: format!("unexpected field count {n} for this label file"),
                })
            }
        };
        paired = Some(is_pair);
        let (node, label_field) = if is_pair {
            (parse_node(line, &fields[0], opts.index_base)?, &fields[1])
        } else {
            (labels.len(), &fields[0])
        };
        let label = parse_int(line, "label", label_field)?;
        if label < -1 {
            return Err(GraphIoError::LabelRange { line, label });
        }
        if node >= labels.len() {
            labels.resize(node + 1, None);
        }
        match labels[node] {
            Some(prev) if prev != label => {
                return Err(GraphIoError::LabelConflict {
                    node,
                    first: prev,
                    second: label,
                })
            }
            _ => labels[node] = Some(label),
        }
    }
    let labels: Vec<Option<usize>> = labels
        .into_iter()
        .map(|l| l.and_then(|l| usize::try_from(l).ok()))
        .collect();
    let needed = labels.iter().flatten().max().map_or(1, |&m| m + 1);
    let k = opts.n_classes.unwrap_or(needed);
    Ok(LabelVector::new(labels, k)?)
}

/// `2|E| / (|V| (|V| - 1))`.
pub fn edge_density(n_nodes: usize, n_edges: usize) -> Result<f64, GraphIoError> {
    if n_nodes < 2 {
        return Err(GraphIoError::DensityDomain(n_nodes));
    }
    let n = n_nodes as f64;
    Ok(2.0 * n_edges as f64 / (n * (n - 1.0)))
}

/// Shortest round-trip decimal; zero of either sign prints as `0`.
fn push_value(buf: &mut String, v: f64) {
    if v == 0.0 {
        buf.push('0');
    } else {
        write!(buf, "{v}").expect("writing to a String");
    }
}

/// Writes `z` as CSV, one line per row.
pub fn write_embedding<W: Write + ?Sized>(z: &EmbeddingMatrix, sink: &mut W) -> std::io::Result<()> {
    let mut buf = String::new();
    for r in 0..z.n_rows() {
        buf.clear();
        for (c, &v) in z.row(r).iter().enumerate() {
            if c > 0 {
                buf.push(',');
            }
            push_value(&mut buf, v);
        }
        buf.push('\n');
        sink.write_all(buf.as_bytes())?;
    }
    Ok(())
}

/// Writes `i j w` lines, 0-based, in stored order.
pub fn write_edge_list<W: Write + ?Sized>(edges: &EdgeList, sink: &mut W) -> std::io::Result<()> {
    let mut buf = String::new();
    for &(i, j, w) in edges.triplets() {
        buf.clear();
        write!(buf, "{i} {j} ").expect("writing to a String");
        push_value(&mut buf, w);
        buf.push('\n');
        sink.write_all(buf.as_bytes())?;
    }
    Ok(())
}

/// Writes one label per line, `-1` for unlabeled nodes.
pub fn write_labels<W: Write + ?Sized>(labels: &LabelVector, sink: &mut W) -> std::io::Result<()> {
    for label in labels.labels() {
        match label {
            Some(k) => writeln!(sink, "{k}")?,
            None => writeln!(sink, "-1")?,
        }
    }
    Ok(())
}
