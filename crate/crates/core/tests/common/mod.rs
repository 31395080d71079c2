//! Random instances and independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use spectral_gcn::filters::{build_kernel_dense, truncate_dominant, DenseKernelOptions, FilterKind, KernelOperator, SpectralBasis};
use spectral_gcn::linalg::{sym_eig_dense, DenseMatrix, LinearOperator};
use spectral_gcn::network::ModelParams;
use spectral_gcn::training::{loss, rng_from_seed, LabeledDataset, Model, Propagation};
use spectral_gcn::Hypergraph;

/// Random weighted hypergraph: every node lands in at least one edge.
pub fn random_hypergraph(seed: u64, max_n: usize, max_e: usize) -> Hypergraph {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(2..=max_n);
    let m = rng.random_range(1..=max_e);
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..n {
        let e = rng.random_range(0..m);
        edges[e].push(i);
        for (f, edge) in edges.iter_mut().enumerate() {
            if f != e && rng.random::<f64>() < 0.3 {
                edge.push(i);
            }
        }
    }
    edges.retain(|e| !e.is_empty());
    let weights = (0..edges.len()).map(|_| rng.random_range(0.5..2.0)).collect();
    Hypergraph::new(n, edges, weights).expect("valid random hypergraph")
}

/// Dense symmetric adjacency with positive off-diagonal weights, zero diagonal.
pub fn random_adjacency(seed: u64, n: usize, density: f64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    let mut w = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            // the path i–(i+1) keeps the graph connected
            if j == i + 1 || rng.random::<f64>() < density {
                let v = rng.random_range(0.1..1.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    w
}

pub fn random_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `I − D_V^{-1/2} H W D_E^{-1} Hᵀ D_V^{-1/2}` assembled entry by entry.
pub fn oracle_hypergraph_laplacian(hg: &Hypergraph) -> DenseMatrix {
    let n = hg.n();
    let mut dv = vec![0.0; n];
    for (e, w) in hg.edges().iter().zip(hg.edge_weights()) {
        for &i in e {
            dv[i] += w;
        }
    }
    let mut l = DenseMatrix::identity(n);
    for (e, w) in hg.edges().iter().zip(hg.edge_weights()) {
        let c = w / e.len() as f64;
        for &i in e {
            for &j in e {
                l[(i, j)] -= c / (dv[i] * dv[j]).sqrt();
            }
        }
    }
    l
}

/// `I − (D+S)^{-1/2}(W+S)(D+S)^{-1/2}`, the second form of the smoothed Laplacian.
pub fn oracle_smoothed_laplacian(w: &DenseMatrix, s: &[f64]) -> DenseMatrix {
    let n = w.rows();
    let d: Vec<f64> = (0..n).map(|i| w.row(i).iter().sum::<f64>() + s[i]).collect();
    DenseMatrix::from_fn(n, n, |i, j| {
        let wij = w[(i, j)] + if i == j { s[i] } else { 0.0 };
        let id = if i == j { 1.0 } else { 0.0 };
        id - wij / (d[i] * d[j]).sqrt()
    })
}

/// Clique expansion `H W D_E^{-1} Hᵀ` without its diagonal, and the diagonal itself.
pub fn oracle_clique_expansion(hg: &Hypergraph) -> (DenseMatrix, Vec<f64>) {
    let n = hg.n();
    let mut w = DenseMatrix::zeros(n, n);
    for (e, we) in hg.edges().iter().zip(hg.edge_weights()) {
        let c = we / e.len() as f64;
        for &i in e {
            for &j in e {
                w[(i, j)] += c;
            }
        }
    }
    let loops = (0..n).map(|i| std::mem::replace(&mut w[(i, i)], 0.0)).collect();
    (w, loops)
}

/// `U φ(Λ) Uᵀ` from a dense eigendecomposition.
pub fn spectral_kernel(l: &DenseMatrix, phi: impl Fn(f64) -> f64) -> DenseMatrix {
    let eig = sym_eig_dense(l).expect("symmetric");
    let d: Vec<f64> = eig.eigenvalues.iter().map(|&v| phi(v)).collect();
    eig.eigenvectors.scale_cols(&d).matmul_t(&eig.eigenvectors).unwrap()
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.max_abs_diff(b)
}

/// Largest eigenvalue of a dense symmetric matrix.
pub fn lambda_max(l: &DenseMatrix) -> f64 {
    *sym_eig_dense(l).unwrap().eigenvalues.last().unwrap()
}

pub fn smallest_nonzero(values: &[f64]) -> f64 {
    values.iter().copied().filter(|&v| v > 1e-8).fold(f64::INFINITY, f64::min)
}

/// Which propagation a gradient check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckArch {
    Full,
    LowRank,
    Reduced,
}

pub const CHECK_ARCHS: [CheckArch; 3] = [CheckArch::Full, CheckArch::LowRank, CheckArch::Reduced];
pub const CHECK_FILTERS: [FilterKind; 3] = [FilterKind::Linear, FilterKind::Quadratic, FilterKind::Pseudoinverse];

/// Norm-wise relative error `‖g − g_fd‖ / (‖g‖ + ‖g_fd‖)` between the analytic
/// gradient and central differences with step `h`, on a random hypergraph
/// instance with at most 10 nodes.
pub fn gradient_check(seed: u64, arch: CheckArch, f: &FilterKind, h: f64) -> f64 {
    // redraw instances whose Laplacian is zero (every node alone in its edges)
    let (hg, l, e) = (0u64..)
        .map(|k| {
            let hg = random_hypergraph(seed ^ (k << 40), 10, 5);
            let l = oracle_hypergraph_laplacian(&hg);
            let e = sym_eig_dense(&l).unwrap();
            (hg, l, e)
        })
        .find(|(_, _, e)| e.eigenvalues.iter().any(|&v| v > 1e-8))
        .unwrap();
    let n = hg.n();
    let ln = *e.eigenvalues.last().unwrap();
    let basis = SpectralBasis::new(e.eigenvalues.clone(), e.eigenvectors.clone(), ln).unwrap();
    let nonzero = e.eigenvalues.iter().filter(|&&v| v > 1e-8).count();
    let r = 3.min(nonzero).max(1);

    let mut rng = rng_from_seed(seed ^ 0x9e37);
    let classes = 3;
    let x = random_matrix(seed ^ 0x51, n, 3);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    let mut train: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < 0.6).collect();
    if train.is_empty() {
        train.push(0);
    }
    let data = LabeledDataset::new(x, labels, train, classes).unwrap();

    let dense;
    let low;
    let (u, phi);
    let prop = match arch {
        CheckArch::Full => {
            let opts = DenseKernelOptions { lambda_n: Some(ln), ..Default::default() };
            dense = build_kernel_dense(&l, f, &opts).unwrap();
            Propagation::Kernel(&dense)
        }
        CheckArch::LowRank => {
            low = truncate_dominant(&basis, f, r).unwrap();
            Propagation::Kernel(&low)
        }
        CheckArch::Reduced => {
            let KernelOperator::LowRank { u: uu, phi: pp } = truncate_dominant(&basis, f, r).unwrap() else {
                unreachable!()
            };
            (u, phi) = (uu, pp);
            Propagation::Reduced { u: &u, phi: &phi }
        }
    };
    let model = Model::new(prop, &data.x).unwrap();
    let input = match prop {
        Propagation::Kernel(k) => k.apply(&data.x),
        Propagation::Reduced { u, phi } => u.t_matmul(&data.x).unwrap().scale_rows(phi),
    };
    // a ±h step in Θ⁽¹⁾ moves row i of the pre-activations by at most
    // h·max|input_i·|; redraw Θ⁽¹⁾ until no ReLU kink is that close
    let reach: Vec<f64> = (0..input.rows())
        .map(|i| 10.0 * h * input.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let clear = |t: &DenseMatrix| {
        let a1 = input.matmul(t).unwrap();
        (0..a1.rows()).all(|i| a1.row(i).iter().all(|a| a.abs() > reach[i] || reach[i] == 0.0))
    };
    let theta1 = (0u64..1000)
        .map(|k| random_matrix(seed ^ 0x71 ^ (k << 40), 3, 4))
        .find(clear)
        .expect("weights away from ReLU kinks");
    let params = ModelParams { theta1, theta2: random_matrix(seed ^ 0x73, 4, classes) };
    let rho = 5e-4;
    let (_, g) = model.gradients(&data, &params, rho).unwrap();
    let objective = |p: &ModelParams| loss(&model.forward(p).unwrap(), &data, p, rho).unwrap();

    let (mut num, mut den_a, mut den_b) = (0.0, 0.0, 0.0);
    for which in 0..2 {
        let len = if which == 0 { params.theta1.as_slice().len() } else { params.theta2.as_slice().len() };
        for k in 0..len {
            let bump = |delta: f64| {
                let mut p = params.clone();
                let m = if which == 0 { &mut p.theta1 } else { &mut p.theta2 };
                m.as_mut_slice()[k] += delta;
                objective(&p)
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            let an = if which == 0 { g.theta1.as_slice()[k] } else { g.theta2.as_slice()[k] };
            num += (an - fd).powi(2);
            den_a += an * an;
            den_b += fd * fd;
        }
    }
    num.sqrt() / (den_a.sqrt() + den_b.sqrt()).max(1e-300)
}

/// Explicit spiral Gaussian Laplacian `I − D^{-1/2} W D^{-1/2}`, `w_ij = exp(−‖x_i − x_j‖²/σ²)`.
pub fn oracle_gaussian_laplacian(points: &DenseMatrix, sigma: f64) -> DenseMatrix {
    let n = points.rows();
    let w = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let d2: f64 = points.row(i).iter().zip(points.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
        (-d2 / (sigma * sigma)).exp()
    });
    oracle_smoothed_laplacian(&w, &vec![0.0; n])
}
