use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spectral_gcn::filters::{build_kernel_fullrank_spectral, FilterKind, KernelOperator};
use spectral_gcn::hypergraph::{eig_via_svd, smoothed_operator};
use spectral_gcn::linalg::LinearOperator;
use spectral_gcn::network::{forward_full, forward_reduced, ModelParams};
use spectral_gcn::SmootherKind;
use spectral_gcn_bench::{factorial_hypergraph, probe};

fn kernel_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("pinv_kernel_apply");
    for levels in [vec![4, 4, 4, 3, 3, 3], vec![5, 5, 4, 4, 4, 3]] {
        let hg = factorial_hypergraph(&levels);
        let n = hg.n();
        let (structured, _) = build_kernel_fullrank_spectral(&hg, &FilterKind::Pseudoinverse).unwrap();
        let dense = KernelOperator::Dense(structured.to_dense());
        let x = probe(n, 8);
        group.bench_with_input(BenchmarkId::new("structured", n), &x, |b, x| b.iter(|| structured.apply(x)));
        group.bench_with_input(BenchmarkId::new("dense", n), &x, |b, x| b.iter(|| dense.apply(x)));
    }
    group.finish();
}

fn smoothed_apply(c: &mut Criterion) {
    let hg = factorial_hypergraph(&[5, 5, 4, 4, 4, 3]);
    let x = probe(hg.n(), 8);
    let mut group = c.benchmark_group("smoothed_operator_apply");
    for kind in SmootherKind::ALL {
        let op = smoothed_operator(&hg, &hg.smoother(kind)).unwrap();
        group.bench_function(kind.name(), |b| b.iter(|| op.apply(&x)));
    }
    group.finish();
}

fn forward(c: &mut Criterion) {
    let hg = factorial_hypergraph(&[4, 4, 4, 3, 3, 3]);
    let r = 16;
    let eig = eig_via_svd(&hg, r).unwrap();
    let phi: Vec<f64> = eig.eigenvalues.iter().map(|&l| if l > 1e-10 { eig.eigenvalues[1] / l } else { 0.0 }).collect();
    let low = KernelOperator::LowRank { u: eig.eigenvectors.clone(), phi: phi.clone() };
    let x = hg.incidence();
    let params = ModelParams { theta1: probe(x.cols(), 8), theta2: probe(8, 4) };
    let mut group = c.benchmark_group("forward_rank16");
    group.bench_function("low_rank", |b| b.iter(|| forward_full(&low, &x, &params).unwrap()));
    group.bench_function("reduced", |b| b.iter(|| forward_reduced(&eig.eigenvectors, &phi, &x, &params).unwrap()));
    group.finish();
}

criterion_group!(benches, kernel_apply, smoothed_apply, forward);
criterion_main!(benches);
