//! Spectral graph convolutional networks on graph and hypergraph Laplacians.
//!
//! Three architectures share one training loop:
//!
//! * full-rank GCN, `𝒦·ReLU(𝒦XΘ₁)·Θ₂` with `𝒦 = Uφ(Λ)Uᵀ`;
//! * low-rank GCN, the same with `𝒦` truncated to the `r` eigenpairs where `|φ|` is largest;
//! * reduced-order GCN, which applies the activation in the `r`-dimensional spectral space.
//!
//! Hypergraph Laplacians `I − H̃H̃ᵀ` are never assembled on the efficient paths;
//! kernels are kept as `αI + F C Fᵀ` with `F` of width `|E|`.

pub mod data;
pub mod error;
pub mod experiment;
pub mod filters;
pub mod graph;
pub mod hypergraph;
pub mod linalg;
pub mod network;
pub mod training;

pub use error::{Error, Result};
pub use filters::{FilterKind, FilterSpec, KernelOperator, SpectralBasis};
pub use graph::{Graph, Smoother, SmootherKind};
pub use hypergraph::{Hypergraph, StructuredOperator};
pub use linalg::{DenseMatrix, LinearOperator, SymEigResult, ThinSvdResult};
pub use network::{ArchitectureConfig, ModelParams, Variant};
pub use training::{LabeledDataset, TrainConfig};
