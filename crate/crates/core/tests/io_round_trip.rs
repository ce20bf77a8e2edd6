use proptest::prelude::*;
use sparse_gee::{
    generate_sbm, parse_edge_list, parse_labels, write_edge_list, write_labels, EdgeList,
    ParseOptions, SbmParams,
};

fn sorted(mut t: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, u64)> {
    let mut out: Vec<_> = t.drain(..).map(|(i, j, w)| (i, j, w.to_bits())).collect();
    out.sort_unstable();
    out
}

proptest! {
    #[test]
    fn edge_list_survives_write_and_parse(
        n in 1usize..50,
        raw in prop::collection::vec((0usize..1000, 0usize..1000, -1e6f64..1e6), 0..100),
    ) {
        let triplets: Vec<_> = raw.into_iter().map(|(i, j, w)| (i % n, j % n, w)).collect();
        let edges = EdgeList::from_triplets(n, false, triplets.clone()).unwrap();
        let mut text = Vec::new();
        write_edge_list(&edges, &mut text).unwrap();
        let opts = ParseOptions { n_nodes: Some(n), ..Default::default() };
        let parsed = parse_edge_list(text.as_slice(), &opts).unwrap();
        prop_assert_eq!(sorted(parsed.triplets().to_vec()), sorted(triplets));
    }
}

#[test]
fn generated_graph_round_trips() {
    let (edges, labels) = generate_sbm(&SbmParams::benchmark(400, 5)).unwrap();
    let mut text = Vec::new();
    write_edge_list(&edges, &mut text).unwrap();
    let opts = ParseOptions {
        n_nodes: Some(400),
        ..Default::default()
    };
    assert_eq!(parse_edge_list(text.as_slice(), &opts).unwrap(), edges);

    let mut text = Vec::new();
    write_labels(&labels, &mut text).unwrap();
    assert_eq!(parse_labels(text.as_slice(), &ParseOptions::default()).unwrap(), labels);
}

#[test]
fn generated_edge_files_are_byte_identical() {
    let write = || {
        let (edges, _) = generate_sbm(&SbmParams::benchmark(300, 42)).unwrap();
        let mut text = Vec::new();
        write_edge_list(&edges, &mut text).unwrap();
        text
    };
    assert_eq!(write(), write());
}
