//! Seeded stochastic block model.
//!
//! Node classes are drawn i.i.d. from `class_probs` (or, with `exact_counts`,
//! split into contiguous blocks of size `round(n * p_k)`). Every unordered
//! pair `i < j` then becomes an edge of weight 1 with probability
//! `within_prob` when the classes match and `between_prob` otherwise.
//!
//! Pairs are not visited one by one. Inside each block pair the gap to the
//! next edge is drawn from a geometric distribution, so generation costs
//! `O(n + |E|)` rather than `O(n^2)`.
//!
//! Randomness comes from a single `ChaCha8Rng` seeded with
//! `SeedableRng::seed_from_u64(seed)`. Labels are drawn first, then block pairs
//! `(a, b)` with `a <= b` in lexicographic order.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use thiserror::Error;

use crate::embedding::LabelVector;
use crate::graph_io::EdgeList;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SbmError {
    #[error("stochastic block model needs at least one node")]
    NoNodes,

    #[error("class probabilities are empty")]
    NoClasses,

    #[error("{name} = {value} is not a probability")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("class probabilities sum to {0}, expected 1")]
    ClassProbSum(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SbmParams {
    pub n_nodes: usize,
    pub class_probs: Vec<f64>,
    pub within_prob: f64,
    pub between_prob: f64,
    pub seed: u64,
    /// Assign classes as contiguous blocks of fixed size instead of sampling.
    pub exact_counts: bool,
}

impl SbmParams {
    /// Three classes `[0.2, 0.3, 0.5]`, within-class 0.13, between-class 0.1.
    pub fn benchmark(n_nodes: usize, seed: u64) -> Self {
        SbmParams {
            n_nodes,
            class_probs: vec![0.2, 0.3, 0.5],
            within_prob: 0.13,
            between_prob: 0.1,
            seed,
            exact_counts: false,
        }
    }

    pub fn validate(&self) -> Result<(), SbmError> {
        if self.n_nodes == 0 {
            return Err(SbmError::NoNodes);
        }
        if self.class_probs.is_empty() {
            return Err(SbmError::NoClasses);
        }
        let check = |name: &'static str, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(SbmError::InvalidProbability { name, value })
            }
        };
        for &p in &self.class_probs {
            check("class probability", p)?;
        }
        check("within-class probability", self.within_prob)?;
        check("between-class probability", self.between_prob)?;
        let total: f64 = self.class_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SbmError::ClassProbSum(total));
        }
        Ok(())
    }
}

/// Samples a graph and its labels. Same parameters, same output.
pub fn generate_sbm(params: &SbmParams) -> Result<(EdgeList, LabelVector), SbmError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_nodes;
    let k = params.class_probs.len();

    let classes: Vec<usize> = if params.exact_counts {
        block_labels(n, &params.class_probs)
    } else {
        // validate() guarantees a positive total
        let dist = WeightedIndex::new(&params.class_probs).expect("validated class probabilities");
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    };

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (node, &c) in classes.iter().enumerate() {
        members[c].push(node);
    }

    let mut triplets = Vec::new();
    for a in 0..k {
        for b in a..k {
            let p = if a == b {
                params.within_prob
            } else {
                params.between_prob
            };
            let mut emit = |u: usize, v: usize| triplets.push((u.min(v), u.max(v), 1.0));
            if a == b {
                sample_within(&members[a], p, &mut rng, &mut emit);
            } else {
                sample_between(&members[a], &members[b], p, &mut rng, &mut emit);
            }
        }
    }

    let edges = EdgeList::from_triplets(n, false, triplets).expect("generated indices are in range");
    let labels = LabelVector::new(classes.into_iter().map(Some).collect(), k)
        .expect("classes are drawn below k");
    Ok((edges, labels))
}

/// Largest-remainder split of `n` into contiguous class blocks.
fn block_labels(n: usize, probs: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (exact[i] - exact[i].floor(), exact[j] - exact[j].floor());
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    let assigned: usize = counts.iter().sum();
    for &c in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect()
}

/// Number of pairs skipped before the next edge.
fn gaps(p: f64) -> Option<Geometric> {
    if p <= 0.0 {
        None
    } else {
        Some(Geometric::new(p).expect("p in (0, 1]"))
    }
}

/// Edges among unordered pairs of one block. Pair `(w, v)` with `w < v` has
/// linear position `v (v - 1) / 2 + w`.
fn sample_within<F: FnMut(usize, usize)>(nodes: &[usize], p: f64, rng: &mut ChaCha8Rng, emit: &mut F) {
    let Some(geo) = gaps(p) else { return };
    let m = nodes.len() as u64;
    let total = m * m.saturating_sub(1) / 2;
    let (mut v, mut w) = (1u64, 0u64);
    let mut next: u64 = 0;
    let mut pos: u64 = 0;
    loop {
        let skip = geo.sample(rng);
        next = match next.checked_add(skip) {
            Some(x) if x < total => x,
            _ => break,
        };
        // advance (v, w) from `pos` to `next`
        w += next - pos;
        while w >= v {
            w -= v;
            v += 1;
        }
        pos = next;
        emit(nodes[w as usize], nodes[v as usize]);
        next += 1;
    }
}

/// Edges between two distinct blocks; pair `(x, y)` has position
/// `x * |b| + y`.
fn sample_between<F: FnMut(usize, usize)>(
    a: &[usize],
    b: &[usize],
    p: f64,
    rng: &mut ChaCha8Rng,
    emit: &mut F,
) {
    let Some(geo) = gaps(p) else { return };
    let width = b.len() as u64;
    let total = a.len() as u64 * width;
    let mut next: u64 = 0;
    loop {
        let skip = geo.sample(rng);
        next = match next.checked_add(skip) {
            Some(x) if x < total => x,
            _ => break,
        };
        emit(a[(next / width) as usize], b[(next % width) as usize]);
        next += 1;
    }
}
