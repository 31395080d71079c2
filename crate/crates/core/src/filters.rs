//! Spectral filter functions, dominant-eigenvalue truncation and kernel
//! operators in their various structured forms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hypergraph::{hypergraph_spectrum, normalized_incidence, Hypergraph, StructuredOperator};
use crate::linalg::{power_iteration_max, sym_eig_dense, DenseMatrix, LinearOperator, ZERO_EIGENVALUE};

/// Filter function family.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterKind {
    /// `1 − λ/λ_n`
    Linear,
    /// `(1 − λ/λ_n)²`
    Quadratic,
    /// `λ₂/λ` for nonzero `λ`, else 0
    Pseudoinverse,
    /// `Σ_j a_j λ^j`
    Polynomial(Vec<f64>),
}

impl FilterKind {
    /// Power-series coefficients in `λ`, when the filter is a polynomial.
    pub fn polynomial_coefficients(&self, lambda_n: f64) -> Option<Vec<f64>> {
        match self {
            FilterKind::Linear => Some(vec![1.0, -1.0 / lambda_n]),
            FilterKind::Quadratic => {
                Some(vec![1.0, -2.0 / lambda_n, 1.0 / (lambda_n * lambda_n)])
            }
            FilterKind::Polynomial(a) => Some(a.clone()),
            FilterKind::Pseudoinverse => None,
        }
    }

    /// Whether evaluating the filter needs `λ_n`.
    pub fn needs_lambda_n(&self) -> bool {
        matches!(self, FilterKind::Linear | FilterKind::Quadratic)
    }
}

/// A filter kind plus an optional target rank (absent means full rank).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub rank: Option<usize>,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, rank: Option<usize>) -> Result<Self> {
        if let FilterKind::Polynomial(a) = &kind {
            if a.last().is_none_or(|&v| v == 0.0) || a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "polynomial filter needs finite coefficients and a nonzero leading one".into(),
                ));
            }
        }
        if rank == Some(0) {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        Ok(Self { kind, rank })
    }

    pub fn full(kind: FilterKind) -> Self {
        Self::new(kind, None).expect("valid filter")
    }

    pub fn with_rank(kind: FilterKind, r: usize) -> Self {
        Self::new(kind, Some(r)).expect("valid filter")
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    /// Accepts `linear`, `quadratic`, `pinv` and `poly:a0,a1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim() {
            "linear" => FilterKind::Linear,
            "quadratic" => FilterKind::Quadratic,
            "pinv" => FilterKind::Pseudoinverse,
            other => {
                let coeffs = other
                    .strip_prefix("poly:")
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown filter '{other}'")))?;
                let a = coeffs
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidParameter(format!("bad coefficient '{c}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FilterKind::Polynomial(a)
            }
        };
        FilterSpec::new(kind.clone(), None)?;
        Ok(kind)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::Linear => write!(f, "linear"),
            FilterKind::Quadratic => write!(f, "quadratic"),
            FilterKind::Pseudoinverse => write!(f, "pinv"),
            FilterKind::Polynomial(a) => {
                write!(f, "poly:")?;
                for (i, v) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Evaluates `φ(λ)`.
pub fn eval_filter(f: &FilterKind, lambda: f64, lambda_2: f64, lambda_n: f64) -> f64 {
    match f {
        FilterKind::Linear => 1.0 - lambda / lambda_n,
        FilterKind::Quadratic => {
            let t = 1.0 - lambda / lambda_n;
            t * t
        }
        FilterKind::Pseudoinverse => {
            if lambda > ZERO_EIGENVALUE {
                lambda_2 / lambda
            } else {
                0.0
            }
        }
        FilterKind::Polynomial(a) => a.iter().rev().fold(0.0, |acc, &c| acc * lambda + c),
    }
}

/// Smallest eigenvalue above the zero threshold.
pub fn smallest_nonzero(eigenvalues: &[f64]) -> Option<f64> {
    eigenvalues.iter().copied().filter(|&l| l > ZERO_EIGENVALUE).min_by(f64::total_cmp)
}

/// Computed eigenpairs together with `λ₂` and `λ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
    pub lambda_2: f64,
    pub lambda_n: f64,
}

impl SpectralBasis {
    /// `λ₂` is taken from the given eigenvalues.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: DenseMatrix, lambda_n: f64) -> Result<Self> {
        if eigenvectors.cols() != eigenvalues.len() {
            return Err(Error::Shape(format!(
                "{} eigenvalues for {} eigenvectors",
                eigenvalues.len(),
                eigenvectors.cols()
            )));
        }
        let lambda_2 = smallest_nonzero(&eigenvalues).ok_or(Error::InsufficientRank {
            requested: 1,
            available: 0,
        })?;
        Ok(Self { eigenvalues, eigenvectors, lambda_2, lambda_n })
    }

    pub fn phi(&self, f: &FilterKind) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| eval_filter(f, l, self.lambda_2, self.lambda_n)).collect()
    }
}

/// Indices of the `r` eigenvalues with the largest `|φ(λ)|`, ties toward smaller `λ`.
/// The pseudoinverse filter never selects zero eigenvalues.
pub fn select_dominant(
    eigenvalues: &[f64],
    f: &FilterKind,
    r: usize,
    lambda_2: f64,
    lambda_n: f64,
) -> Result<Vec<usize>> {
    let mut cand: Vec<(f64, f64, usize)> = eigenvalues
        .iter()
        .enumerate()
        .filter(|&(_, &l)| !matches!(f, FilterKind::Pseudoinverse) || l > ZERO_EIGENVALUE)
        .map(|(i, &l)| (eval_filter(f, l, lambda_2, lambda_n).abs(), l, i))
        .collect();
    if cand.len() < r {
        return Err(Error::InsufficientRank { requested: r, available: cand.len() });
    }
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(cand.into_iter().take(r).map(|c| c.2).collect())
}

/// A linear map `X ↦ 𝒦X` in one of several storage forms.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelOperator {
    Dense(DenseMatrix),
    /// `αI + F C Fᵀ`
    ScaledIdentityPlusLowRank { alpha: f64, factor: DenseMatrix, core: DenseMatrix },
    /// `𝒟 + F C Fᵀ` with a general diagonal
    DiagonalPlusLowRank(StructuredOperator),
    /// `U φ Uᵀ`
    LowRank { u: DenseMatrix, phi: Vec<f64> },
    /// `diag(φ)` acting on spectral coordinates
    ReducedDiagonal { phi: Vec<f64> },
}

impl KernelOperator {
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            KernelOperator::Dense(m) => m.clone(),
            KernelOperator::ReducedDiagonal { phi } => DenseMatrix::from_diag(phi),
            _ => self.apply(&DenseMatrix::identity(self.dim())),
        }
    }

    /// Rank of the non-identity part, if any.
    pub fn factor_rank(&self) -> Option<usize> {
        match self {
            KernelOperator::ScaledIdentityPlusLowRank { factor, .. } => Some(factor.cols()),
            KernelOperator::DiagonalPlusLowRank(op) => Some(op.factor.cols()),
            KernelOperator::LowRank { u, .. } => Some(u.cols()),
            KernelOperator::Dense(_) | KernelOperator::ReducedDiagonal { .. } => None,
        }
    }
}

impl LinearOperator for KernelOperator {
    fn dim(&self) -> usize {
        match self {
            KernelOperator::Dense(m) => m.rows(),
            KernelOperator::ScaledIdentityPlusLowRank { factor, .. } => factor.rows(),
            KernelOperator::DiagonalPlusLowRank(op) => op.dim(),
            KernelOperator::LowRank { u, .. } => u.rows(),
            KernelOperator::ReducedDiagonal { phi } => phi.len(),
        }
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        match self {
            KernelOperator::Dense(m) => m.matmul(x).expect("kernel shape"),
            KernelOperator::ScaledIdentityPlusLowRank { alpha, factor, core } => {
                let t = core.matmul(&factor.t_matmul(x).expect("kernel shape")).expect("core shape");
                let mut y = factor.matmul(&t).expect("factor shape");
                y.axpy_assign(*alpha, x).expect("same shape");
                y
            }
            KernelOperator::DiagonalPlusLowRank(op) => op.apply(x),
            KernelOperator::LowRank { u, phi } => {
                let t = u.t_matmul(x).expect("kernel shape").scale_rows(phi);
                u.matmul(&t).expect("factor shape")
            }
            KernelOperator::ReducedDiagonal { phi } => x.scale_rows(phi),
        }
    }
}

/// Rank-`r` kernel `U_r φ(Λ_r) U_rᵀ` on the dominant eigenpairs of `f`.
pub fn truncate_dominant(basis: &SpectralBasis, f: &FilterKind, r: usize) -> Result<KernelOperator> {
    let idx = select_dominant(&basis.eigenvalues, f, r, basis.lambda_2, basis.lambda_n)?;
    let u = basis.eigenvectors.select_columns(&idx);
    let phi = idx
        .iter()
        .map(|&i| eval_filter(f, basis.eigenvalues[i], basis.lambda_2, basis.lambda_n))
        .collect();
    Ok(KernelOperator::LowRank { u, phi })
}

/// `a₀I + a₁ℒ = (a₀+a₁)I − a₁H̃H̃ᵀ` for the hypergraph Laplacian.
pub fn build_kernel_linear_structured(hg: &Hypergraph, a0: f64, a1: f64) -> Result<KernelOperator> {
    let h = normalized_incidence(hg)?;
    let e = h.cols();
    Ok(KernelOperator::ScaledIdentityPlusLowRank {
        alpha: a0 + a1,
        factor: h,
        core: DenseMatrix::identity(e).scale(-a1),
    })
}

/// Binomial re-expansion of `Σ a_i λ^i` around `λ = 1`: `b_j = Σ_{i≥j} C(i,j) a_i`.
pub fn taylor_coefficients_at_one(a: &[f64]) -> Vec<f64> {
    let p = a.len();
    let mut b = vec![0.0; p];
    for (i, &ai) in a.iter().enumerate() {
        let mut c = 1.0; // C(i, j), updated incrementally
        for (j, bj) in b.iter_mut().enumerate().take(i + 1) {
            *bj += c * ai;
            c = c * (i - j) as f64 / (j + 1) as f64;
        }
    }
    b
}

/// `Σ a_j ℒ^j = b₀I + H̃ M H̃ᵀ` with `M = Σ_{j≥1} (−1)^j b_j (H̃ᵀH̃)^{j−1}`.
pub fn build_kernel_polynomial_structured(hg: &Hypergraph, coeffs: &[f64]) -> Result<KernelOperator> {
    if coeffs.is_empty() {
        return Err(Error::InvalidParameter("empty polynomial".into()));
    }
    let h = normalized_incidence(hg)?;
    let e = h.cols();
    let b = taylor_coefficients_at_one(coeffs);
    let g = h.t_matmul(&h)?;
    let mut m = DenseMatrix::zeros(e, e);
    let mut power = DenseMatrix::identity(e);
    for (j, &bj) in b.iter().enumerate().skip(1) {
        if j > 1 {
            power = power.matmul(&g)?;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        m.axpy_assign(sign * bj, &power)?;
    }
    Ok(KernelOperator::ScaledIdentityPlusLowRank { alpha: b[0], factor: h, core: m })
}

/// Full-rank kernel `φ(1)I + U_R(φ(Λ_R) − φ(1))U_Rᵀ` from the thin SVD of `H̃`,
/// with `λ_n = 1`. Returns the kernel and the SVD rank `R`.
pub fn build_kernel_fullrank_spectral(hg: &Hypergraph, f: &FilterKind) -> Result<(KernelOperator, usize)> {
    let spec = hypergraph_spectrum(hg)?;
    let r = spec.eig.len();
    let mut all = spec.eig.eigenvalues.clone();
    if r < hg.n() {
        all.push(1.0);
    }
    let lambda_2 = smallest_nonzero(&all).unwrap_or(1.0);
    let phi1 = eval_filter(f, 1.0, lambda_2, 1.0);
    let core: Vec<f64> = spec
        .eig
        .eigenvalues
        .iter()
        .map(|&l| eval_filter(f, l, lambda_2, 1.0) - phi1)
        .collect();
    let kernel = KernelOperator::ScaledIdentityPlusLowRank {
        alpha: phi1,
        factor: spec.eig.eigenvectors,
        core: DenseMatrix::from_diag(&core),
    };
    Ok((kernel, r))
}

/// Options for [`build_kernel_dense`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseKernelOptions {
    pub cap: usize,
    /// Fixed `λ_n`; otherwise estimated by power iteration when needed.
    pub lambda_n: Option<f64>,
}

impl Default for DenseKernelOptions {
    fn default() -> Self {
        Self { cap: 8192, lambda_n: None }
    }
}

/// Explicit `n × n` kernel. Polynomial filters are evaluated as matrix
/// polynomials in `L`; the pseudoinverse goes through a full eigendecomposition.
pub fn build_kernel_dense(l: &DenseMatrix, f: &FilterKind, opts: &DenseKernelOptions) -> Result<KernelOperator> {
    let n = l.rows();
    if n > opts.cap {
        return Err(Error::DenseCapExceeded { n, cap: opts.cap });
    }
    if !l.is_square() {
        return Err(Error::InvalidMatrix("Laplacian must be square".into()));
    }
    let lambda_n = match (opts.lambda_n, f.needs_lambda_n()) {
        (Some(v), _) => v,
        (None, true) => power_iteration_max(l, 1e-12)?,
        (None, false) => 1.0,
    };
    if let Some(a) = f.polynomial_coefficients(lambda_n) {
        return Ok(KernelOperator::Dense(matrix_polynomial(l, &a)?));
    }
    let eig = sym_eig_dense(l)?;
    let lambda_2 = smallest_nonzero(&eig.eigenvalues).unwrap_or(1.0);
    let phi: Vec<f64> = eig.eigenvalues.iter().map(|&v| eval_filter(f, v, lambda_2, lambda_n)).collect();
    let k = eig.eigenvectors.scale_cols(&phi).matmul_t(&eig.eigenvectors)?;
    Ok(KernelOperator::Dense(k))
}

fn matrix_polynomial(l: &DenseMatrix, a: &[f64]) -> Result<DenseMatrix> {
    let n = l.rows();
    let p = a.len() - 1;
    let add_identity = |m: &mut DenseMatrix, c: f64| {
        for i in 0..n {
            m[(i, i)] += c;
        }
    };
    if p == 0 {
        return Ok(DenseMatrix::identity(n).scale(a[0]));
    }
    let mut k = l.scale(a[p]);
    add_identity(&mut k, a[p - 1]);
    for j in (0..p - 1).rev() {
        k = k.matmul(l)?;
        add_identity(&mut k, a[j]);
    }
    Ok(k)
}

/// Structured `a₀I + a₁ℒ_S` for an arbitrary smoother, from [`crate::hypergraph::smoothed_operator`].
pub fn build_kernel_linear_smoothed(op: &StructuredOperator, a0: f64, a1: f64) -> KernelOperator {
    KernelOperator::DiagonalPlusLowRank(StructuredOperator {
        diag: op.diag.iter().map(|d| a0 + a1 * d).collect(),
        factor: op.factor.clone(),
        core: op.core.scale(a1),
    })
}
