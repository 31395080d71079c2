//! Weighted graphs, normalized and smoothed Laplacians, and the matrix-free
//! Gaussian-kernel Laplacian used for point-cloud data.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LinearOperator};

/// Undirected weighted graph with a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: DenseMatrix,
    degrees: Vec<f64>,
}

impl Graph {
    /// Validates symmetry and non-negativity and computes degrees as row sums.
    pub fn new(adjacency: DenseMatrix) -> Result<Self> {
        if !adjacency.is_square() {
            return Err(Error::InvalidMatrix("adjacency must be square".into()));
        }
        let tol = 1e-12 * adjacency.max_abs().max(1.0);
        if adjacency.asymmetry() > tol {
            return Err(Error::InvalidMatrix("adjacency must be symmetric".into()));
        }
        if adjacency.as_slice().iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidMatrix("adjacency entries must be finite and >= 0".into()));
        }
        let degrees = (0..adjacency.rows()).map(|i| adjacency.row(i).iter().sum()).collect();
        Ok(Self { adjacency, degrees })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn adjacency(&self) -> &DenseMatrix {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }
}

/// Which diagonal smoother is added to adjacency and degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmootherKind {
    None,
    Identity,
    HypergraphLoops,
    Combined,
}

impl SmootherKind {
    pub const ALL: [SmootherKind; 4] =
        [SmootherKind::None, SmootherKind::Identity, SmootherKind::HypergraphLoops, SmootherKind::Combined];

    pub fn name(self) -> &'static str {
        match self {
            SmootherKind::None => "none",
            SmootherKind::Identity => "identity",
            SmootherKind::HypergraphLoops => "hypergraph",
            SmootherKind::Combined => "combined",
        }
    }
}

impl std::str::FromStr for SmootherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown smoother '{s}'")))
    }
}

/// Diagonal smoother `S` with its entries materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    pub kind: SmootherKind,
    pub diagonal: Vec<f64>,
}

impl Smoother {
    pub fn none(n: usize) -> Self {
        Self { kind: SmootherKind::None, diagonal: vec![0.0; n] }
    }

    pub fn identity(n: usize) -> Self {
        Self { kind: SmootherKind::Identity, diagonal: vec![1.0; n] }
    }

    pub fn new(kind: SmootherKind, diagonal: Vec<f64>) -> Result<Self> {
        let strict = kind != SmootherKind::None;
        if diagonal.iter().any(|&s| !(s >= 0.0) || (strict && s <= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "{} smoother needs {} entries",
                kind.name(),
                if strict { "positive" } else { "non-negative" }
            )));
        }
        Ok(Self { kind, diagonal })
    }
}

/// `ℒ = I − D^{-1/2} W D^{-1/2}`.
pub fn build_laplacian(g: &Graph) -> Result<DenseMatrix> {
    let inv = inv_sqrt(g.degrees())?;
    let n = g.n();
    let w = g.adjacency();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let off = inv[i] * w[(i, j)] * inv[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    }))
}

/// `ℒ_S = (D+S)^{-1/2} (D − W) (D+S)^{-1/2}`; a `None` smoother gives [`build_laplacian`].
pub fn build_smoothed_laplacian(g: &Graph, s: &Smoother) -> Result<DenseMatrix> {
    if s.diagonal.len() != g.n() {
        return Err(Error::Shape(format!("smoother of length {} for {} nodes", s.diagonal.len(), g.n())));
    }
    if s.kind == SmootherKind::None && s.diagonal.iter().all(|&x| x == 0.0) {
        return build_laplacian(g);
    }
    let total: Vec<f64> = g.degrees().iter().zip(&s.diagonal).map(|(d, s)| d + s).collect();
    let inv = inv_sqrt(&total)?;
    let n = g.n();
    let w = g.adjacency();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let lap = if i == j { g.degrees()[i] - w[(i, j)] } else { -w[(i, j)] };
        inv[i] * lap * inv[j]
    }))
}

fn inv_sqrt(d: &[f64]) -> Result<Vec<f64>> {
    d.iter()
        .enumerate()
        .map(|(i, &v)| if v > 0.0 { Ok(1.0 / v.sqrt()) } else { Err(Error::IsolatedNode(i)) })
        .collect()
}

fn check_gaussian(points: &DenseMatrix, sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if points.rows() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    if !points.is_finite() {
        return Err(Error::InvalidParameter("non-finite point coordinate".into()));
    }
    Ok(())
}

#[inline]
fn gaussian_weight(a: &[f64], b: &[f64], inv_sigma2: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 * inv_sigma2).exp()
}

/// Fully connected graph with `W_ij = exp(−‖x_i − x_j‖² / σ²)` and zero diagonal.
pub fn gaussian_graph(points: &DenseMatrix, sigma: f64) -> Result<Graph> {
    check_gaussian(points, sigma)?;
    let n = points.rows();
    let s2 = 1.0 / (sigma * sigma);
    let w = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            gaussian_weight(points.row(i), points.row(j), s2)
        }
    });
    Graph::new(w)
}

/// Matrix-free normalized Laplacian of [`gaussian_graph`].
///
/// Kernel entries are recomputed on every application, one row block at a
/// time, so memory stays linear in the number of points.
#[derive(Debug, Clone)]
pub struct GaussianLaplacian {
    points: DenseMatrix,
    inv_sigma2: f64,
    inv_sqrt_degree: Vec<f64>,
}

const ROW_BLOCK: usize = 64;

impl GaussianLaplacian {
    pub fn degrees(&self) -> Vec<f64> {
        self.inv_sqrt_degree.iter().map(|v| 1.0 / (v * v)).collect()
    }
}

/// Builds the matrix-free Gaussian Laplacian; one O(n²) pass computes degrees.
pub fn gaussian_laplacian_operator(points: &DenseMatrix, sigma: f64) -> Result<GaussianLaplacian> {
    check_gaussian(points, sigma)?;
    let n = points.rows();
    let s2 = 1.0 / (sigma * sigma);
    let degrees: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = points.row(i);
            (0..n)
                .filter(|&j| j != i)
                .map(|j| gaussian_weight(xi, points.row(j), s2))
                .sum()
        })
        .collect();
    let inv_sqrt_degree = inv_sqrt(&degrees)?;
    Ok(GaussianLaplacian { points: points.clone(), inv_sigma2: s2, inv_sqrt_degree })
}

impl LinearOperator for GaussianLaplacian {
    fn dim(&self) -> usize {
        self.points.rows()
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let n = self.dim();
        let c = x.cols();
        assert_eq!(x.rows(), n, "operator shape");
        let z = x.scale_rows(&self.inv_sqrt_degree);
        let mut out = x.clone();
        out.as_mut_slice()
            .par_chunks_mut(ROW_BLOCK * c.max(1))
            .enumerate()
            .for_each(|(b, chunk)| {
                let start = b * ROW_BLOCK;
                let rows = chunk.len() / c.max(1);
                let mut acc = vec![0.0; rows * c];
                for j in 0..n {
                    let xj = self.points.row(j);
                    let zj = z.row(j);
                    for r in 0..rows {
                        let i = start + r;
                        if i == j {
                            continue;
                        }
                        let w = gaussian_weight(self.points.row(i), xj, self.inv_sigma2);
                        let a = &mut acc[r * c..(r + 1) * c];
                        for (ak, zk) in a.iter_mut().zip(zj) {
                            *ak += w * zk;
                        }
                    }
                }
                for r in 0..rows {
                    let s = self.inv_sqrt_degree[start + r];
                    for k in 0..c {
                        chunk[r * c + k] -= s * acc[r * c + k];
                    }
                }
            });
        out
    }
}
