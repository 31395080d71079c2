//! Hypergraphs, their Laplacian, the clique-expansion view and structured
//! `diagonal ± low-rank` operators.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Smoother, SmootherKind};
use crate::linalg::{
    axpy, dot, norm2, normalize_sign, thin_svd, DenseMatrix, LinearOperator, SymEigResult, ThinSvdResult,
};

/// Hypergraph with 0/1 incidence stored as per-edge node lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
    edge_weights: Vec<f64>,
    node_degrees: Vec<f64>,
}

impl Hypergraph {
    /// Every edge must be nonempty with distinct in-range nodes, and every node covered.
    pub fn new(n: usize, edges: Vec<Vec<usize>>, edge_weights: Vec<f64>) -> Result<Self> {
        if edges.len() != edge_weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} edges but {} weights",
                edges.len(),
                edge_weights.len()
            )));
        }
        let mut node_degrees = vec![0.0; n];
        let mut seen = vec![usize::MAX; n];
        for (e, (nodes, &w)) in edges.iter().zip(&edge_weights).enumerate() {
            if nodes.is_empty() {
                return Err(Error::InvalidParameter(format!("hyperedge {e} is empty")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("hyperedge {e} has weight {w}")));
            }
            for &i in nodes {
                if i >= n {
                    return Err(Error::InvalidParameter(format!("hyperedge {e} names node {i} >= {n}")));
                }
                if seen[i] == e {
                    return Err(Error::InvalidParameter(format!("hyperedge {e} repeats node {i}")));
                }
                seen[i] = e;
                node_degrees[i] += w;
            }
        }
        if let Some(i) = node_degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedNode(i));
        }
        Ok(Self { n, edges, edge_weights, node_degrees })
    }

    /// Unit-weight hypergraph.
    pub fn unweighted(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let w = vec![1.0; edges.len()];
        Self::new(n, edges, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// `d_i = Σ_e h_ie w_e`.
    pub fn node_degrees(&self) -> &[f64] {
        &self.node_degrees
    }

    /// `|e|` for each hyperedge.
    pub fn edge_degrees(&self) -> Vec<usize> {
        self.edges.iter().map(Vec::len).collect()
    }

    /// Dense `n × |E|` incidence matrix.
    pub fn incidence(&self) -> DenseMatrix {
        let mut h = DenseMatrix::zeros(self.n, self.num_edges());
        for (e, nodes) in self.edges.iter().enumerate() {
            for &i in nodes {
                h[(i, e)] = 1.0;
            }
        }
        h
    }

    /// Loop weights `s_H,i = Σ_e h_ie w_e / |e|` of the clique expansion.
    pub fn loop_weights(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (nodes, &w) in self.edges.iter().zip(&self.edge_weights) {
            let c = w / nodes.len() as f64;
            for &i in nodes {
                s[i] += c;
            }
        }
        s
    }

    /// Materializes a smoother of the given kind for this hypergraph.
    pub fn smoother(&self, kind: SmootherKind) -> Smoother {
        let diagonal = match kind {
            SmootherKind::None => vec![0.0; self.n],
            SmootherKind::Identity => vec![1.0; self.n],
            SmootherKind::HypergraphLoops => self.loop_weights(),
            SmootherKind::Combined => self.loop_weights().into_iter().map(|s| s + 1.0).collect(),
        };
        Smoother { kind, diagonal }
    }

    /// The sub-hypergraph induced by `nodes`; edges left empty are dropped.
    pub fn induced(&self, nodes: &[usize]) -> Result<Self> {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in nodes.iter().enumerate() {
            map[i] = k;
        }
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        for (e, w) in self.edges.iter().zip(&self.edge_weights) {
            let sub: Vec<usize> = e.iter().filter(|&&i| map[i] != usize::MAX).map(|&i| map[i]).collect();
            if !sub.is_empty() {
                edges.push(sub);
                weights.push(*w);
            }
        }
        Self::new(nodes.len(), edges, weights)
    }
}

/// `ℒ = I − D_V^{-1/2} H W_E D_E^{-1} Hᵀ D_V^{-1/2}`, assembled edge by edge.
pub fn laplacian_dense(hg: &Hypergraph) -> Result<DenseMatrix> {
    let inv = inv_sqrt_degrees(hg)?;
    let n = hg.n();
    let mut l = DenseMatrix::identity(n);
    for (nodes, &w) in hg.edges().iter().zip(hg.edge_weights()) {
        let c = w / nodes.len() as f64;
        for &i in nodes {
            let ci = c * inv[i];
            let row = l.row_mut(i);
            for &j in nodes {
                row[j] -= ci * inv[j];
            }
        }
    }
    Ok(l)
}

fn inv_sqrt_degrees(hg: &Hypergraph) -> Result<Vec<f64>> {
    hg.node_degrees()
        .iter()
        .enumerate()
        .map(|(i, &d)| if d > 0.0 { Ok(1.0 / d.sqrt()) } else { Err(Error::IsolatedNode(i)) })
        .collect()
}

/// `H̃ = D_V^{-1/2} H W_E^{1/2} D_E^{-1/2}`, so that `ℒ = I − H̃H̃ᵀ`.
pub fn normalized_incidence(hg: &Hypergraph) -> Result<DenseMatrix> {
    let inv = inv_sqrt_degrees(hg)?;
    let mut h = DenseMatrix::zeros(hg.n(), hg.num_edges());
    for (e, (nodes, &w)) in hg.edges().iter().zip(hg.edge_weights()).enumerate() {
        let c = (w / nodes.len() as f64).sqrt();
        for &i in nodes {
            h[(i, e)] = c * inv[i];
        }
    }
    Ok(h)
}

/// Sub-unit Laplacian eigenpairs from the thin SVD of `H̃`: `λ = 1 − σ²`, `u = H̃v/σ`.
#[derive(Debug, Clone)]
pub struct HypergraphSpectrum {
    pub svd: ThinSvdResult,
    /// All `R` eigenpairs recoverable from the SVD, ascending.
    pub eig: SymEigResult,
}

/// Computes all `R` SVD-backed eigenpairs of the hypergraph Laplacian.
pub fn hypergraph_spectrum(hg: &Hypergraph) -> Result<HypergraphSpectrum> {
    let ht = normalized_incidence(hg)?;
    let svd = thin_svd(&ht)?;
    // singular values are non-increasing, so eigenvalues come out ascending
    let eigenvalues = svd.singular_values.iter().map(|s| (1.0 - s * s).clamp(0.0, 1.0)).collect();
    let eig = SymEigResult { eigenvalues, eigenvectors: svd.left_vectors.clone() };
    Ok(HypergraphSpectrum { svd, eig })
}

/// The `k` smallest Laplacian eigenpairs via the SVD of `H̃`.
pub fn eig_via_svd(hg: &Hypergraph, k: usize) -> Result<SymEigResult> {
    let spec = hypergraph_spectrum(hg)?;
    let r = spec.eig.len();
    if k > r {
        return Err(Error::InsufficientRank { requested: k, available: r });
    }
    Ok(spec.eig.select(&(0..k).collect::<Vec<_>>()))
}

/// Like [`eig_via_svd`], but when `k` exceeds the rank `R` the basis is
/// completed with `k − R` orthonormal vectors from the eigenvalue-1 space
/// (the orthogonal complement of `range(H̃)`), drawn from a seeded generator.
pub fn smallest_eigenpairs(hg: &Hypergraph, k: usize, seed: u64) -> Result<SymEigResult> {
    let spec = hypergraph_spectrum(hg)?;
    let r = spec.eig.len();
    if k <= r {
        return Ok(spec.eig.select(&(0..k).collect::<Vec<_>>()));
    }
    let n = hg.n();
    if k > n {
        return Err(Error::InsufficientRank { requested: k, available: n });
    }
    let mut cols: Vec<Vec<f64>> = (0..r).map(|j| spec.eig.eigenvectors.column(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while cols.len() < k {
        attempts += 1;
        if attempts > 8 * k {
            return Err(Error::InsufficientRank { requested: k, available: cols.len() });
        }
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let before = norm2(&v);
        for _ in 0..2 {
            for q in &cols {
                let c = dot(&v, q);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv > 1e-6 * before {
            v.iter_mut().for_each(|x| *x /= nv);
            normalize_sign(&mut v);
            cols.push(v);
        }
    }
    let mut values = spec.eig.eigenvalues.clone();
    values.resize(k, 1.0);
    Ok(SymEigResult { eigenvalues: values, eigenvectors: DenseMatrix::from_columns(n, &cols) })
}

/// Splits the clique expansion `W_H = H W_E D_E^{-1} Hᵀ` into a loop-free
/// graph and the loop smoother `S_H`.
pub fn as_smoothed_graph(hg: &Hypergraph) -> Result<(Graph, Smoother)> {
    inv_sqrt_degrees(hg)?;
    let n = hg.n();
    let mut w = DenseMatrix::zeros(n, n);
    for (nodes, &we) in hg.edges().iter().zip(hg.edge_weights()) {
        let c = we / nodes.len() as f64;
        for &i in nodes {
            let row = w.row_mut(i);
            for &j in nodes {
                if i != j {
                    row[j] += c;
                }
            }
        }
    }
    let graph = Graph::new(w)?;
    Ok((graph, hg.smoother(SmootherKind::HypergraphLoops)))
}

/// `𝒟 + F C Fᵀ` with diagonal `𝒟`, an `n × R` factor and an `R × R` signed core.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredOperator {
    pub diag: Vec<f64>,
    pub factor: DenseMatrix,
    pub core: DenseMatrix,
}

impl StructuredOperator {
    pub fn to_dense(&self) -> DenseMatrix {
        let fc = self.factor.matmul(&self.core).expect("core shape");
        let mut m = fc.matmul_t(&self.factor).expect("factor shape");
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] += d;
        }
        m
    }
}

impl LinearOperator for StructuredOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let t = self.factor.t_matmul(x).expect("operator shape");
        let t = self.core.matmul(&t).expect("core shape");
        let mut y = self.factor.matmul(&t).expect("factor shape");
        for (i, &d) in self.diag.iter().enumerate() {
            for (yv, xv) in y.row_mut(i).iter_mut().zip(x.row(i)) {
                *yv += d * xv;
            }
        }
        y
    }
}

/// Structured smoothed Laplacian
/// `ℒ_S = [I − N⁻¹(S − S_H)] − 𝒵𝒵ᵀ`, `N = D_V + S − S_H`,
/// `𝒵 = N^{-1/2} H (W_E D_E^{-1})^{1/2}`.
pub fn smoothed_operator(hg: &Hypergraph, s: &Smoother) -> Result<StructuredOperator> {
    if s.diagonal.len() != hg.n() {
        return Err(Error::Shape(format!("smoother of length {} for {} nodes", s.diagonal.len(), hg.n())));
    }
    let sh = hg.loop_weights();
    let mut diag = Vec::with_capacity(hg.n());
    let mut inv = Vec::with_capacity(hg.n());
    for i in 0..hg.n() {
        let excess = s.diagonal[i] - sh[i];
        let norm = hg.node_degrees()[i] + excess;
        if !(norm > 0.0) {
            return Err(Error::IsolatedNode(i));
        }
        diag.push(if s.kind == SmootherKind::HypergraphLoops { 1.0 } else { 1.0 - excess / norm });
        inv.push(1.0 / norm.sqrt());
    }
    let mut z = DenseMatrix::zeros(hg.n(), hg.num_edges());
    for (e, (nodes, &w)) in hg.edges().iter().zip(hg.edge_weights()).enumerate() {
        let c = (w / nodes.len() as f64).sqrt();
        for &i in nodes {
            z[(i, e)] = c * inv[i];
        }
    }
    let core = DenseMatrix::identity(hg.num_edges()).scale(-1.0);
    Ok(StructuredOperator { diag, factor: z, core })
}
