//! Lanczos with full reorthogonalization for the smallest eigenpairs of a
//! symmetric operator, run on `shift·I − op` so the wanted end of the
//! spectrum becomes the dominant one.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eig::{normalize_sign, sym_eig_dense, SymEigResult};
use super::operator::Shifted;
use super::{axpy, dot, norm2, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};

/// Tuning knobs for [`lanczos_smallest_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Seed for the start vector and for restart vectors after breakdown.
    pub seed: u64,
    /// Krylov dimension cap; `None` means `min(dim, max(30·k, 300))`.
    pub max_iter: Option<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { seed: 0x5eed_1a2c_0500_0001, max_iter: None }
    }
}

/// The `k` smallest eigenpairs of `op`. `shift` must bound the spectrum from above.
pub fn lanczos_smallest(
    op: &dyn LinearOperator,
    k: usize,
    shift: f64,
    tol: f64,
) -> Result<SymEigResult> {
    lanczos_smallest_with(op, k, shift, tol, &LanczosOptions::default())
}

pub fn lanczos_smallest_with(
    op: &dyn LinearOperator,
    k: usize,
    shift: f64,
    tol: f64,
    opts: &LanczosOptions,
) -> Result<SymEigResult> {
    let n = op.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 0 < k < dim, got k={k}, dim={n}")));
    }
    let b = Shifted { op, shift };
    let max_iter = opts.max_iter.unwrap_or_else(|| (30 * k).max(300)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new(); // beta[j] couples basis[j] and basis[j+1]
    let mut q = random_unit_orthogonal(n, &basis, &mut rng)
        .ok_or_else(|| Error::InvalidParameter("empty operator".into()))?;
    let mut last_residuals = vec![f64::INFINITY; k];
    let mut next_check = k.max(8);

    loop {
        let mut w = b.apply_vec(&q);
        let a = dot(&w, &q);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&bprev)) = (basis.last(), beta.last()) {
            axpy(-bprev, prev, &mut w);
        }
        basis.push(q);
        alpha.push(a);
        reorthogonalize(&mut w, &basis);
        reorthogonalize(&mut w, &basis);
        let bnext = norm2(&w);
        let m = basis.len();

        let scale = alpha.iter().fold(shift.abs(), |s, v| s.max(v.abs()));
        let breakdown = bnext <= 1e-12 * scale.max(1.0);
        let exhausted = m >= max_iter;

        if m >= k && (m >= next_check || breakdown || exhausted) {
            next_check = m + (m / 8).max(4);
            let (ritz, res_est) = ritz_pairs(&alpha, &beta, bnext, k)?;
            if res_est.iter().all(|&r| r <= 0.5 * tol) || exhausted || (breakdown && m == n) {
                let out = assemble(op, shift, &basis, &ritz);
                let res = out.residuals(op);
                if res.iter().all(|&r| r <= tol) {
                    return Ok(out);
                }
                last_residuals = res;
                if exhausted || m == n {
                    return Err(Error::ConvergenceFailure { residuals: last_residuals });
                }
            }
        }
        if exhausted {
            return Err(Error::ConvergenceFailure { residuals: last_residuals });
        }

        if breakdown {
            // invariant subspace found; continue in its complement
            beta.push(0.0);
            match random_unit_orthogonal(n, &basis, &mut rng) {
                Some(v) => q = v,
                None => return Err(Error::ConvergenceFailure { residuals: last_residuals }),
            }
        } else {
            beta.push(bnext);
            w.iter_mut().for_each(|x| *x /= bnext);
            q = w;
        }
    }
}

/// Top-`k` Ritz pairs of the tridiagonal matrix with residual estimates `|β·s_last|`.
fn ritz_pairs(
    alpha: &[f64],
    beta: &[f64],
    bnext: f64,
    k: usize,
) -> Result<(Vec<(f64, Vec<f64>)>, Vec<f64>)> {
    let m = alpha.len();
    let mut t = DenseMatrix::from_diag(alpha);
    for (j, &b) in beta.iter().enumerate().take(m - 1) {
        t[(j, j + 1)] = b;
        t[(j + 1, j)] = b;
    }
    let eig = sym_eig_dense(&t)?;
    let mut pairs = Vec::with_capacity(k);
    let mut est = Vec::with_capacity(k);
    for idx in (m - k..m).rev() {
        let s = eig.eigenvectors.column(idx);
        est.push((bnext * s[m - 1]).abs());
        pairs.push((eig.eigenvalues[idx], s));
    }
    Ok((pairs, est))
}

fn assemble(
    op: &dyn LinearOperator,
    shift: f64,
    basis: &[Vec<f64>],
    ritz: &[(f64, Vec<f64>)],
) -> SymEigResult {
    let n = op.dim();
    let mut cols: Vec<(f64, Vec<f64>)> = ritz
        .iter()
        .map(|(mu, s)| {
            let mut u = vec![0.0; n];
            for (sj, qj) in s.iter().zip(basis) {
                axpy(*sj, qj, &mut u);
            }
            let nu = norm2(&u);
            u.iter_mut().for_each(|x| *x /= nu);
            normalize_sign(&mut u);
            (shift - mu, u)
        })
        .collect();
    cols.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = cols.iter().map(|c| c.0).collect();
    let vecs: Vec<Vec<f64>> = cols.into_iter().map(|c| c.1).collect();
    SymEigResult { eigenvalues: values, eigenvectors: DenseMatrix::from_columns(n, &vecs) }
}

fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(w, q);
        axpy(-c, q, w);
    }
}

fn random_unit_orthogonal(n: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let before = norm2(&v);
        reorthogonalize(&mut v, basis);
        reorthogonalize(&mut v, basis);
        let nv = norm2(&v);
        if nv > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}
