use std::collections::BTreeMap;

use proptest::prelude::*;
use sparse_gee::sparse::{add_identity, degree_vector, laplacian_normalize, spmm_with};
use sparse_gee::{CooBuilder, CsrMatrix, Exec};

type Triplet = (usize, usize, f64);

fn dense_multiply(a: &[Vec<f64>], b: &[Vec<f64>], n_cols: usize) -> Vec<Vec<f64>> {
    a.iter()
        .map(|row| {
            (0..n_cols)
                .map(|k| row.iter().zip(b).map(|(x, brow)| x * brow[k]).sum())
                .collect()
        })
        .collect()
}

fn build(n_rows: usize, n_cols: usize, triplets: &[Triplet]) -> CsrMatrix {
    let mut b = CooBuilder::new(n_rows, n_cols);
    for &(i, j, w) in triplets {
        b.add(i, j, w).unwrap();
    }
    b.finalize()
}

/// Shape plus triplets inside it; values are small integers (possibly zero or
/// negative) so duplicates and cancellation happen often.
fn triplets_in(max_dim: usize, max_len: usize) -> impl Strategy<Value = (usize, usize, Vec<Triplet>)> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
        let t = (0..r, 0..c, -3i32..=3).prop_map(|(i, j, v)| (i, j, v as f64 * 0.5));
        (Just(r), Just(c), prop::collection::vec(t, 0..max_len))
    })
}

fn real_matrix(max_dim: usize) -> impl Strategy<Value = (usize, usize, Vec<Triplet>)> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
        let t = (0..r, 0..c, -2.0f64..2.0);
        (Just(r), Just(c), prop::collection::vec(t, 0..(r * c).min(300)))
    })
}

fn symmetric_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<Triplet>)> {
    (1..=max_n).prop_flat_map(|n| {
        let t = (0..n, 0..n, 0.01f64..3.0);
        (Just(n), prop::collection::vec(t, 0..4 * n))
    })
}

fn mirrored(triplets: &[Triplet]) -> Vec<Triplet> {
    triplets
        .iter()
        .flat_map(|&(i, j, w)| {
            let back = (i != j).then_some((j, i, w));
            std::iter::once((i, j, w)).chain(back)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn finalize_matches_summed_triplets((r, c, t) in triplets_in(12, 60)) {
        let m = build(r, c, &t);
        prop_assert!(m.validate().is_ok());
        let mut expected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in &t {
            *expected.entry((i, j)).or_default() += w;
        }
        expected.retain(|_, v| *v != 0.0);
        let got: BTreeMap<(usize, usize), f64> = m.triplets().map(|(i, j, v)| ((i, j), v)).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn distinct_triplets_round_trip((r, c, t) in triplets_in(12, 60)) {
        let mut seen = BTreeMap::new();
        for (i, j, w) in t {
            if w != 0.0 {
                seen.entry((i, j)).or_insert(w);
            }
        }
        let distinct: Vec<Triplet> = seen.iter().map(|(&(i, j), &w)| (i, j, w)).collect();
        let mut shuffled = distinct.clone();
        shuffled.reverse();
        let m = build(r, c, &shuffled);
        prop_assert_eq!(m.triplets().collect::<Vec<_>>(), distinct);
    }

    #[test]
    fn spmm_matches_dense((n, k, ta) in real_matrix(24), m in 1usize..24, tb_seed in any::<u64>()) {
        let a = build(n, k, &ta);
        let mut state = tb_seed;
        let mut next = || { state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); state >> 11 };
        let tb: Vec<Triplet> = (0..k * m / 2)
            .map(|_| ((next() as usize) % k, (next() as usize) % m, (next() % 1000) as f64 / 250.0 - 2.0))
            .collect();
        let b = build(k, m, &tb);
        let expected = dense_multiply(&a.to_dense(), &b.to_dense(), m);
        for &exec in Exec::available() {
            let c = spmm_with(&a, &b, exec).unwrap();
            prop_assert!(c.validate().is_ok());
            prop_assert_eq!(c.shape(), (n, m));
            for (i, row) in expected.iter().enumerate() {
                for (j, &e) in row.iter().enumerate() {
                    prop_assert!((c.get(i, j) - e).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn add_identity_adds_exactly_the_diagonal((n, t) in symmetric_graph(15)) {
        let a = build(n, n, &t);
        let b = add_identity(&a).unwrap();
        prop_assert!(b.validate().is_ok());
        for i in 0..n {
            let (cols, _) = b.row(i).unwrap();
            let mut merged: BTreeMap<usize, f64> = cols.iter().map(|&c| (c, b.get(i, c))).collect();
            for (&c, v) in a.row(i).unwrap().0.iter().zip(a.row(i).unwrap().1) {
                *merged.entry(c).or_default() -= v;
            }
            merged.retain(|_, v| *v != 0.0);
            prop_assert_eq!(merged.len(), 1);
            let (&col, &diff) = merged.iter().next().unwrap();
            prop_assert_eq!(col, i);
            prop_assert!((diff - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_preserves_symmetry((n, t) in symmetric_graph(20)) {
        let a = build(n, n, &mirrored(&t));
        let d = degree_vector(&a).unwrap();
        let l = laplacian_normalize(&a, &d).unwrap();
        prop_assert!(l.validate().is_ok());
        for (i, j, v) in l.triplets() {
            prop_assert!((v - l.get(j, i)).abs() <= 1e-12);
        }
        let d_aug = degree_vector(&add_identity(&a).unwrap()).unwrap();
        let l_aug = laplacian_normalize(&add_identity(&a).unwrap(), &d_aug).unwrap();
        for (i, j, v) in l_aug.triplets() {
            prop_assert!((v - l_aug.get(j, i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn degree_is_row_sum((n, t) in symmetric_graph(20)) {
        let a = build(n, n, &t);
        let d = degree_vector(&a).unwrap();
        let dense = a.to_dense();
        for (i, row) in dense.iter().enumerate() {
            prop_assert!((d.as_slice()[i] - row.iter().sum::<f64>()).abs() <= 1e-12);
            prop_assert!(d.as_slice()[i] >= 0.0);
        }
    }

    #[test]
    fn finalize_strategies_agree((r, c, t) in triplets_in(30, 200)) {
        let mut results = Exec::available().iter().map(|&exec| {
            let mut b = CooBuilder::new(r, c);
            for &(i, j, w) in &t {
                b.add(i, j, w).unwrap();
            }
            b.finalize_with(exec)
        });
        let first = results.next().unwrap();
        for other in results {
            prop_assert_eq!(&other, &first);
        }
    }
}
