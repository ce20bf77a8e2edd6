//! Wall-clock timing of the embedding pipelines.
//!
//! The timed region starts from parsed edge triplets and labels. For the
//! sparse pipeline it covers adjacency assembly, the weight matrix, the
//! options and the product; for the reference pipeline the edge-list walk.

use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use sparse_gee::{encode, encode_reference, EdgeList, EmbedOptions, EmbeddingMatrix, LabelVector};

use crate::CliError;

/// Largest entrywise disagreement tolerated between the two pipelines.
pub(crate) const PIPELINE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Sparse,
    Reference,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Sparse => "sparse",
            Pipeline::Reference => "reference",
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    pub dataset: String,
    pub options: EmbedOptions,
    pub pipeline: Pipeline,
    /// Seconds per repeat, in run order.
    pub seconds: Vec<f64>,
}

impl BenchResult {
    pub fn repeats(&self) -> usize {
        self.seconds.len()
    }

    pub fn mean(&self) -> f64 {
        self.seconds.iter().sum::<f64>() / self.seconds.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.seconds.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn run_once(
    pipeline: Pipeline,
    edges: &EdgeList,
    labels: &LabelVector,
    opts: EmbedOptions,
) -> Result<EmbeddingMatrix, CliError> {
    Ok(match pipeline {
        Pipeline::Sparse => encode(&edges.to_adjacency()?, labels, opts)?,
        Pipeline::Reference => encode_reference(edges, labels, opts)?,
    })
}

/// Times `repeats` runs and returns the result of the last one alongside.
pub(crate) fn run_setting(
    dataset: &str,
    pipeline: Pipeline,
    edges: &EdgeList,
    labels: &LabelVector,
    opts: EmbedOptions,
    repeats: usize,
) -> Result<(BenchResult, EmbeddingMatrix), CliError> {
    let mut seconds = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let z = run_once(pipeline, edges, labels, opts)?;
        // never report a zero duration
        seconds.push(start.elapsed().as_secs_f64().max(1e-9));
        last = Some(z);
    }
    let result = BenchResult {
        dataset: dataset.to_string(),
        options: opts,
        pipeline,
        seconds,
    };
    Ok((result, last.expect("repeats >= 1")))
}

pub(crate) fn write_csv(results: &[BenchResult], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "dataset,pipeline,lap,diag,corr,repeat,seconds")?;
    for r in results {
        for (i, s) in r.seconds.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.9}",
                r.dataset,
                r.pipeline,
                r.options.laplacian,
                r.options.diagonal,
                r.options.correlation,
                i + 1,
                s
            )?;
        }
    }
    Ok(())
}

pub(crate) fn write_table(results: &[BenchResult], w: &mut dyn Write) -> io::Result<()> {
    let flag = |b: bool| if b { "T" } else { "F" };
    let width = results.iter().map(|r| r.dataset.len()).max().unwrap_or(0).max(7);
    writeln!(
        w,
        "{:<width$}  {:<9}  {:>3}  {:>4}  {:>3}  {:>7}  {:>12}  {:>12}",
        "dataset", "pipeline", "lap", "diag", "cor", "repeats", "mean_s", "min_s"
    )?;
    for r in results {
        writeln!(
            w,
            "{:<width$}  {:<9}  {:>3}  {:>4}  {:>3}  {:>7}  {:>12.6}  {:>12.6}",
            r.dataset,
            r.pipeline.to_string(),
            flag(r.options.laplacian),
            flag(r.options.diagonal),
            flag(r.options.correlation),
            r.repeats(),
            r.mean(),
            r.min()
        )?;
    }
    Ok(())
}
