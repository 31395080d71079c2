use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{axpy, dot, norm2, sym_eig_dense, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};

const MAX_ITER: usize = 1000;
const CHECK_EVERY: usize = 5;

/// Largest eigenvalue of a symmetric positive semi-definite operator.
///
/// The power sequence `x, Ax, A²x, …` is orthogonalized as it is generated
/// and the largest Rayleigh–Ritz value on its span is taken, which converges
/// far faster than the plain power quotient when the top of the spectrum is
/// clustered. Stops once that value moves by less than relative `tol` over
/// `CHECK_EVERY` steps, or when the span is exhausted.
pub fn power_iteration_max(op: &dyn LinearOperator, tol: f64) -> Result<f64> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.5).collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|v| *v /= nq);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = f64::NAN;
    loop {
        let mut w = op.apply_vec(&q);
        let a = dot(&w, &q);
        basis.push(q);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm2(&w);
        let m = basis.len();
        let scale = alpha.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let done = b <= 1e-12 * scale.max(1e-300) || m == n;
        if done || m.is_multiple_of(CHECK_EVERY) {
            let next = largest_ritz(&alpha, &beta)?;
            if done || (next - theta).abs() <= tol * next.abs() {
                return Ok(next.max(0.0));
            }
            theta = next;
        }
        if m >= MAX_ITER {
            return Err(Error::ConvergenceFailure { residuals: vec![theta] });
        }
        beta.push(b);
        w.iter_mut().for_each(|v| *v /= b);
        q = w;
    }
}

fn largest_ritz(alpha: &[f64], beta: &[f64]) -> Result<f64> {
    let m = alpha.len();
    let mut t = DenseMatrix::from_diag(alpha);
    for (j, &b) in beta.iter().enumerate().take(m - 1) {
        t[(j, j + 1)] = b;
        t[(j + 1, j)] = b;
    }
    Ok(*sym_eig_dense(&t)?.eigenvalues.last().expect("non-empty"))
}
