//! Two-layer spectral GCN forward passes and softmax prediction.

use std::fmt;
use std::str::FromStr;

use crate::error::{shape_err, Error, Result};
use crate::filters::{FilterSpec, KernelOperator};
use crate::linalg::{DenseMatrix, LinearOperator};

/// Architecture family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Full-rank kernel applied in node space.
    FullGcn,
    /// Rank-`r` kernel applied in node space.
    LowRankGcn,
    /// Activation applied in the `r`-dimensional spectral space.
    ReducedGcn,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::FullGcn => "GCN",
            Variant::LowRankGcn => "L-GCN",
            Variant::ReducedGcn => "R-GCN",
        })
    }
}

/// Layer widths `N₀ → N₁ → N₂`, variant and filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureConfig {
    pub variant: Variant,
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub filter: FilterSpec,
}

/// Weight matrices `Θ⁽¹⁾ (N₀×N₁)` and `Θ⁽²⁾ (N₁×N₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub theta1: DenseMatrix,
    pub theta2: DenseMatrix,
}

impl ModelParams {
    pub fn check(&self, n0: usize) -> Result<()> {
        if self.theta1.rows() != n0 {
            return Err(shape_err("theta1", (n0, self.theta1.cols()), self.theta1.shape()));
        }
        if self.theta2.rows() != self.theta1.cols() {
            return Err(shape_err(
                "theta2",
                (self.theta1.cols(), self.theta2.cols()),
                self.theta2.shape(),
            ));
        }
        Ok(())
    }
}

/// Hidden-layer activation. Only [`Activation::Relu`] is used in training;
/// `Identity` exists to check the spectral commutation argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub(crate) fn apply(self, m: &DenseMatrix) -> DenseMatrix {
        match self {
            Activation::Relu => m.map(|v| v.max(0.0)),
            Activation::Identity => m.clone(),
        }
    }
}

fn check_kernel(kernel: &KernelOperator, x: &DenseMatrix) -> Result<()> {
    if kernel.dim() != x.rows() {
        return Err(shape_err("input", (kernel.dim(), x.cols()), x.shape()));
    }
    Ok(())
}

/// `𝒦 · ReLU(𝒦 X Θ⁽¹⁾) · Θ⁽²⁾`.
pub fn forward_full(kernel: &KernelOperator, x: &DenseMatrix, params: &ModelParams) -> Result<DenseMatrix> {
    forward_full_with(kernel, x, params, Activation::Relu)
}

pub fn forward_full_with(
    kernel: &KernelOperator,
    x: &DenseMatrix,
    params: &ModelParams,
    act: Activation,
) -> Result<DenseMatrix> {
    check_kernel(kernel, x)?;
    params.check(x.cols())?;
    let a1 = kernel.apply(x).matmul(&params.theta1)?;
    let h = act.apply(&a1);
    Ok(kernel.apply(&h.matmul(&params.theta2)?))
}

/// `U_r φ ReLU(φ U_rᵀ X Θ⁽¹⁾) Θ⁽²⁾`, with all hidden work on `r` rows.
pub fn forward_reduced(
    u: &DenseMatrix,
    phi: &[f64],
    x: &DenseMatrix,
    params: &ModelParams,
) -> Result<DenseMatrix> {
    forward_reduced_with(u, phi, x, params, Activation::Relu)
}

pub fn forward_reduced_with(
    u: &DenseMatrix,
    phi: &[f64],
    x: &DenseMatrix,
    params: &ModelParams,
    act: Activation,
) -> Result<DenseMatrix> {
    if u.cols() != phi.len() {
        return Err(Error::Shape(format!("{} eigenvectors but {} filter values", u.cols(), phi.len())));
    }
    if u.rows() != x.rows() {
        return Err(shape_err("input", (u.rows(), x.cols()), x.shape()));
    }
    params.check(x.cols())?;
    let xr = u.t_matmul(x)?.scale_rows(phi);
    let h = act.apply(&xr.matmul(&params.theta1)?);
    let q = h.matmul(&params.theta2)?.scale_rows(phi);
    u.matmul(&q)
}

/// Row-wise softmax probabilities and argmax labels (ties to the lowest class).
pub fn predict(logits: &DenseMatrix) -> (DenseMatrix, Vec<usize>) {
    let mut probs = logits.clone();
    let mut labels = Vec::with_capacity(logits.rows());
    for i in 0..logits.rows() {
        let row = probs.row_mut(i);
        let (mut best, mut max) = (0, f64::NEG_INFINITY);
        for (j, &v) in row.iter().enumerate() {
            if v > max {
                max = v;
                best = j;
            }
        }
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
        labels.push(best);
    }
    (probs, labels)
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(Variant::FullGcn),
            "lgcn" => Ok(Variant::LowRankGcn),
            "rgcn" => Ok(Variant::ReducedGcn),
            _ => Err(Error::InvalidParameter(format!("unknown architecture '{s}'"))),
        }
    }
}
