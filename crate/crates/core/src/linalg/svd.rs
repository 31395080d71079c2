use super::eig::{normalize_sign, sym_eig_dense};
use super::{axpy, dot, norm2, DenseMatrix};
use crate::error::Result;

/// Singular values below this fraction of `σ₁` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Thin SVD `B = U Σ Vᵀ` restricted to the numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvdResult {
    pub singular_values: Vec<f64>,
    pub left_vectors: DenseMatrix,
    pub right_vectors: DenseMatrix,
}

impl ThinSvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

/// Thin SVD of a tall matrix through the eigendecomposition of `BᵀB`.
///
/// Each `σ_i` is recomputed as `‖B v_i‖₂`, which is accurate to roughly
/// `ε·σ₁` in absolute terms and so keeps null directions of `B` below the
/// rank cutoff.
pub fn thin_svd(b: &DenseMatrix) -> Result<ThinSvdResult> {
    let (n, m) = b.shape();
    let gram = b.t_matmul(b)?;
    let eig = sym_eig_dense(&gram)?;
    let bv = b.matmul(&eig.eigenvectors)?;

    let mut cand: Vec<(f64, usize)> = (0..m)
        .map(|j| (norm2(&bv.column(j)), j))
        .collect();
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
    let sigma1 = cand.first().map_or(0.0, |c| c.0);
    let keep: Vec<(f64, usize)> = cand
        .into_iter()
        .filter(|&(s, _)| sigma1 > 0.0 && s > RANK_TOL * sigma1)
        .collect();

    let mut us: Vec<Vec<f64>> = Vec::with_capacity(keep.len());
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(keep.len());
    let mut sv = Vec::with_capacity(keep.len());
    for &(s, j) in &keep {
        let mut u: Vec<f64> = bv.column(j).iter().map(|x| x / s).collect();
        let mut v = eig.eigenvectors.column(j);
        // small σ amplify Gram-level errors; two Gram–Schmidt passes restore orthogonality
        for _ in 0..2 {
            for prev in &us {
                let c = dot(&u, prev);
                axpy(-c, prev, &mut u);
            }
        }
        let nu = norm2(&u);
        u.iter_mut().for_each(|x| *x /= nu);
        if normalize_sign(&mut u) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        us.push(u);
        vs.push(v);
        sv.push(s);
    }
    Ok(ThinSvdResult {
        singular_values: sv,
        left_vectors: DenseMatrix::from_columns(n, &us),
        right_vectors: DenseMatrix::from_columns(m, &vs),
    })
}
