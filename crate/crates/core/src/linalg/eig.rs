//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit QL with Wilkinson-style shifts (the EISPACK `tred2`/`tql2` pair).
//!
//! The transformation matrix is stored transposed so that every inner loop
//! runs over contiguous memory.

use super::{norm2, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};

/// Eigenpairs with eigenvalues ascending and eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

impl SymEigResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `‖op(u_i) − λ_i u_i‖₂` for each pair.
    pub fn residuals(&self, op: &dyn LinearOperator) -> Vec<f64> {
        let au = op.apply(&self.eigenvectors);
        (0..self.len())
            .map(|i| {
                let r: Vec<f64> = (0..au.rows())
                    .map(|k| au[(k, i)] - self.eigenvalues[i] * self.eigenvectors[(k, i)])
                    .collect();
                norm2(&r)
            })
            .collect()
    }

    /// Keeps only the listed pairs, in the given order.
    pub fn select(&self, idx: &[usize]) -> SymEigResult {
        SymEigResult {
            eigenvalues: idx.iter().map(|&i| self.eigenvalues[i]).collect(),
            eigenvectors: self.eigenvectors.select_columns(idx),
        }
    }
}

/// Flips `v` so that its largest-magnitude entry (lowest index on ties) is
/// positive. Returns whether a flip happened.
pub fn normalize_sign(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    let flip = v.get(best).is_some_and(|&x| x < 0.0);
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    flip
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn sym_eig_dense(a: &DenseMatrix) -> Result<SymEigResult> {
    if !a.is_square() {
        return Err(Error::InvalidMatrix(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    let tol = 1e-10 * a.max_abs().max(1.0);
    if a.asymmetry() > tol {
        return Err(Error::InvalidMatrix(format!("asymmetry {:.3e}", a.asymmetry())));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SymEigResult { eigenvalues: vec![], eigenvectors: DenseMatrix::zeros(0, 0) });
    }
    // w holds Vᵀ; rows of w end up being eigenvectors.
    let mut w: Vec<f64> = a.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut w, &mut d, &mut e);
    tql2(n, &mut w, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let mut vectors = DenseMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = w[k * n..(k + 1) * n].to_vec();
        normalize_sign(&mut v);
        vectors.set_column(col, &v);
        values.push(d[k]);
    }
    Ok(SymEigResult { eigenvalues: values, eigenvectors: vectors })
}

fn tred2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = w[at(j, n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[at(j, i - 1)];
                w[at(j, i)] = 0.0;
                w[at(i, j)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                w[at(i, j)] = f;
                g = e[j] + w[at(j, j)] * f;
                let row = &w[at(j, 0)..at(j, 0) + n];
                for k in j + 1..i {
                    g += row[k] * d[k];
                    e[k] += row[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let row = &mut w[at(j, 0)..at(j, 0) + n];
                for k in j..i {
                    row[k] -= f * e[k] + g * d[k];
                }
                d[j] = row[i - 1];
                row[i] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        w[at(i, n - 1)] = w[at(i, i)];
        w[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = w[at(i + 1, k)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += w[at(i + 1, k)] * w[at(j, k)];
                }
                for k in 0..=i {
                    w[at(j, k)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            w[at(i + 1, k)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = w[at(j, n - 1)];
        w[at(j, n - 1)] = 0.0;
    }
    w[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    const MAX_SWEEPS: usize = 60;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::ConvergenceFailure { residuals: vec![e[l].abs()] });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
