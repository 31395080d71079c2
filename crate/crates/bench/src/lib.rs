//! Deterministic benchmark instances.

use spectral_gcn::linalg::DenseMatrix;
use spectral_gcn::Hypergraph;

/// Hypergraph of a complete factorial design: one node per combination of
/// attribute levels, one hyperedge per (attribute, level). `[4, 4, 4, 3, 3, 3]`
/// has the shape of the car evaluation data.
pub fn factorial_hypergraph(levels: &[usize]) -> Hypergraph {
    let n: usize = levels.iter().product();
    let mut edges = Vec::new();
    let mut stride = 1;
    for &k in levels {
        let first = edges.len();
        edges.resize(first + k, Vec::new());
        for i in 0..n {
            edges[first + (i / stride) % k].push(i);
        }
        stride *= k;
    }
    Hypergraph::unweighted(n, edges).expect("factorial design")
}

/// A fixed pseudo-random `rows × cols` block with entries in `[-1, 1)`.
pub fn probe(rows: usize, cols: usize) -> DenseMatrix {
    let mut state = 0x2545_f491_4f6c_dd1d_u64;
    DenseMatrix::from_fn(rows, cols, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    })
}
