//! Sparse graph encoder embedding.
//!
//! Given a graph and a (possibly partial) node labelling, the encoder
//! embedding maps every node to a `K`-dimensional vector: the class-size
//! normalized weight of its neighbours in each of the `K` classes. All
//! intermediate matrices are kept in compressed sparse row form.
//!
//! - [`sparse`]: CSR matrices, triplet assembly and the product kernels.
//! - [`embedding`]: weight matrix construction and the embedding itself, plus
//!   an edge-list reference implementation.
//! - [`sbm`]: seeded stochastic block model graphs.
//! - [`graph_io`]: edge-list and label parsing, edge density, CSV output.
//!
//! Row-independent kernels run on rayon when the `parallel` feature is on
//! (the default); see [`Exec`].

pub mod embedding;
pub mod exec;
pub mod graph_io;
pub mod sbm;
pub mod sparse;

pub use embedding::{
    build_weight_matrix, correlate_rows, encode, encode_reference, encode_with, EmbedError,
    EmbedOptions, EmbeddingMatrix, LabelVector,
};
pub use exec::Exec;
pub use graph_io::{
    edge_density, parse_edge_list, parse_labels, write_edge_list, write_embedding, write_labels,
    Delimiter, EdgeList, GraphIoError, ParseOptions,
};
pub use sbm::{generate_sbm, SbmError, SbmParams};
pub use sparse::{
    add_identity, degree_vector, laplacian_normalize, spmm, spmm_with, CooBuilder, CsrMatrix,
    DegreeVector, SparseError,
};
