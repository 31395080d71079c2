//! End-to-end experiment pipeline shared by the command-line runner and the
//! acceptance suite: dataset → Laplacian → spectral basis or kernel → runs.

use std::borrow::Cow;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::data::{
    bind_indices, generate_spiral, incidence_as_input, load_categorical, load_train_indices,
    parse_categorical, stratified_train_indices, table_to_hypergraph, ClassColumn, SpiralConfig,
    TableFormat, MUSHROOM_STALK_ROOT_COLUMN,
};
use crate::error::{Error, Result};
use crate::filters::{
    build_kernel_dense, build_kernel_fullrank_spectral, build_kernel_linear_smoothed,
    build_kernel_polynomial_structured, truncate_dominant, DenseKernelOptions, FilterKind, KernelOperator,
    SpectralBasis,
};
use crate::graph::{gaussian_laplacian_operator, SmootherKind};
use crate::hypergraph::{laplacian_dense, smallest_eigenpairs, smoothed_operator, Hypergraph};
use crate::linalg::{assemble, lanczos_smallest_with, power_iteration_max, DenseMatrix, LanczosOptions, LinearOperator};
use crate::training::{run_seed, train_runs, train_runs_by, LabeledDataset, Model, Propagation, TrainConfig};

/// Environment variable capping how many runs execute concurrently.
pub const THREADS_ENV: &str = "SPECTRAL_GCN_THREADS";

/// Cars data file name inside the data directory.
pub const CARS_FILE: &str = "car.data";
/// Mushrooms data file name inside the data directory.
pub const MUSHROOMS_FILE: &str = "agaricus-lepiota.data";

const LANCZOS_TOL: f64 = 1e-8;
// upper bound on every normalized Laplacian spectrum handled here
const SPECTRUM_SHIFT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Spiral,
    Cars,
    Mushrooms,
    /// Categorical comma-separated file, class in the last column.
    Csv(PathBuf),
}

impl DatasetSpec {
    pub fn is_hypergraph(&self) -> bool {
        !matches!(self, DatasetSpec::Spiral)
    }

    fn default_hidden(&self) -> usize {
        match self {
            DatasetSpec::Spiral => 4,
            DatasetSpec::Cars => 8,
            DatasetSpec::Mushrooms | DatasetSpec::Csv(_) => 16,
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Spiral => f.write_str("spiral"),
            DatasetSpec::Cars => f.write_str("cars"),
            DatasetSpec::Mushrooms => f.write_str("mushrooms"),
            DatasetSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiral" => Ok(DatasetSpec::Spiral),
            "cars" => Ok(DatasetSpec::Cars),
            "mushrooms" => Ok(DatasetSpec::Mushrooms),
            _ => match s.strip_prefix("csv:") {
                Some(p) if !p.is_empty() => Ok(DatasetSpec::Csv(PathBuf::from(p))),
                _ => Err(Error::InvalidParameter(format!("unknown dataset '{s}'"))),
            },
        }
    }
}

/// Network architecture plus how its kernel is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Full-rank GCN on the structured kernel.
    Gcn,
    /// Full-rank GCN on an explicitly assembled `n × n` kernel.
    GcnNaive,
    Lgcn,
    Rgcn,
}

impl Architecture {
    pub fn is_low_rank(self) -> bool {
        matches!(self, Architecture::Lgcn | Architecture::Rgcn)
    }

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Gcn => "gcn",
            Architecture::GcnNaive => "gcn-naive",
            Architecture::Lgcn => "lgcn",
            Architecture::Rgcn => "rgcn",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(Architecture::Gcn),
            "gcn-naive" => Ok(Architecture::GcnNaive),
            "lgcn" => Ok(Architecture::Lgcn),
            "rgcn" => Ok(Architecture::Rgcn),
            _ => Err(Error::InvalidParameter(format!("unknown architecture '{s}'"))),
        }
    }
}

/// Source of the training node set.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainSelection {
    /// The dataset's usual choice: bundled index files for cars and
    /// mushrooms, two random nodes per class and run for the spiral.
    Default,
    /// 1-based indices, one per line.
    File(PathBuf),
    /// `k` random nodes per class, drawn once with `split_seed`.
    Stratified(usize),
    /// `k` random nodes per class, redrawn for every run from its seed.
    Resampled(usize),
}

impl fmt::Display for TrainSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainSelection::Default => f.write_str("default"),
            TrainSelection::File(p) => write!(f, "{}", p.display()),
            TrainSelection::Stratified(k) => write!(f, "stratified:{k}"),
            TrainSelection::Resampled(k) => write!(f, "resample:{k}"),
        }
    }
}

impl FromStr for TrainSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "default" {
            return Ok(TrainSelection::Default);
        }
        let per_class = |k: &str| {
            k.parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| Error::InvalidParameter(format!("bad per-class count in '{s}'")))
        };
        if let Some(k) = s.strip_prefix("stratified:") {
            return Ok(TrainSelection::Stratified(per_class(k)?));
        }
        if let Some(k) = s.strip_prefix("resample:") {
            return Ok(TrainSelection::Resampled(per_class(k)?));
        }
        if s.is_empty() {
            return Err(Error::InvalidParameter("empty training index path".into()));
        }
        Ok(TrainSelection::File(PathBuf::from(s)))
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub data_dir: PathBuf,
    pub arch: Architecture,
    pub filter: FilterKind,
    pub rank: Option<usize>,
    /// `None` picks hypergraph smoothing for hypergraphs and none for the spiral.
    pub smoother: Option<SmootherKind>,
    pub hidden: Option<usize>,
    /// `None` means 100 runs, or 20 for the naive path.
    pub runs: Option<usize>,
    pub seed: u64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub rho: f64,
    pub train_indices: TrainSelection,
    pub split_seed: u64,
    /// Fixed `λ_n` instead of the dataset default.
    pub lambda_n: Option<f64>,
    pub spiral_points: usize,
    pub spiral_sigma: f64,
    pub spiral_seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            dataset: DatasetSpec::Cars,
            data_dir: PathBuf::from("data"),
            arch: Architecture::Gcn,
            filter: FilterKind::Pseudoinverse,
            rank: None,
            smoother: None,
            hidden: None,
            runs: None,
            seed: t.seed,
            learning_rate: t.learning_rate,
            iterations: t.iterations,
            rho: t.rho,
            train_indices: TrainSelection::Default,
            split_seed: 0,
            lambda_n: None,
            spiral_points: 2000,
            spiral_sigma: 3.5,
            spiral_seed: 0,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value '{value}' for '{key}'")))
}

impl ExperimentConfig {
    /// Keys accepted by [`ExperimentConfig::set`], in serialization order.
    pub const KEYS: [&'static str; 20] = [
        "dataset",
        "data_dir",
        "arch",
        "filter",
        "rank",
        "smoother",
        "hidden",
        "runs",
        "seed",
        "lr",
        "iters",
        "rho",
        "train_indices",
        "split_seed",
        "lambda_n",
        "spiral_points",
        "spiral_sigma",
        "spiral_seed",
        "out",
        "threads",
    ];

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "dataset" => self.dataset = v.parse()?,
            "data_dir" => self.data_dir = PathBuf::from(v),
            "arch" => self.arch = v.parse()?,
            "filter" => self.filter = v.parse()?,
            "rank" => self.rank = Some(parse_value(key, v)?),
            "smoother" => self.smoother = Some(v.parse()?),
            "hidden" => self.hidden = Some(parse_value(key, v)?),
            "runs" => self.runs = Some(parse_value(key, v)?),
            "seed" => self.seed = parse_value(key, v)?,
            "lr" => self.learning_rate = parse_value(key, v)?,
            "iters" => self.iterations = parse_value(key, v)?,
            "rho" => self.rho = parse_value(key, v)?,
            "train_indices" => self.train_indices = v.parse()?,
            "split_seed" => self.split_seed = parse_value(key, v)?,
            "lambda_n" => self.lambda_n = Some(parse_value(key, v)?),
            "spiral_points" => self.spiral_points = parse_value(key, v)?,
            "spiral_sigma" => self.spiral_sigma = parse_value(key, v)?,
            "spiral_seed" => self.spiral_seed = parse_value(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            // run-level parallelism is an environment concern, not part of the experiment
            "threads" => {}
            _ => return Err(Error::InvalidParameter(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: "expected 'key = value'".into(),
            })?;
            cfg.set(key.trim(), value).map_err(|e| Error::Parse { line: k + 1, message: e.to_string() })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// The config as `key = value` lines; unset optional keys are omitted.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dataset", self.dataset.to_string());
        put("data_dir", self.data_dir.display().to_string());
        put("arch", self.arch.to_string());
        put("filter", self.filter.to_string());
        if let Some(r) = self.rank {
            put("rank", r.to_string());
        }
        if let Some(sm) = self.smoother {
            put("smoother", sm.name().to_string());
        }
        if let Some(h) = self.hidden {
            put("hidden", h.to_string());
        }
        if let Some(r) = self.runs {
            put("runs", r.to_string());
        }
        put("seed", self.seed.to_string());
        put("lr", self.learning_rate.to_string());
        put("iters", self.iterations.to_string());
        put("rho", self.rho.to_string());
        if self.train_indices != TrainSelection::Default {
            put("train_indices", self.train_indices.to_string());
        }
        put("split_seed", self.split_seed.to_string());
        if let Some(l) = self.lambda_n {
            put("lambda_n", l.to_string());
        }
        put("spiral_points", self.spiral_points.to_string());
        put("spiral_sigma", self.spiral_sigma.to_string());
        put("spiral_seed", self.spiral_seed.to_string());
        if let Some(o) = &self.out {
            put("out", o.display().to_string());
        }
        s
    }

    pub fn effective_smoother(&self) -> SmootherKind {
        self.smoother.unwrap_or(if self.dataset.is_hypergraph() {
            SmootherKind::HypergraphLoops
        } else {
            SmootherKind::None
        })
    }

    pub fn effective_hidden(&self) -> usize {
        self.hidden.unwrap_or_else(|| self.dataset.default_hidden())
    }

    pub fn effective_runs(&self) -> usize {
        self.runs.unwrap_or(if self.arch == Architecture::GcnNaive { 20 } else { 100 })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            iterations: self.iterations,
            rho: self.rho,
            runs: self.effective_runs(),
            seed: self.seed,
        }
    }

    /// Cross-field checks.
    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        match (self.arch.is_low_rank(), self.rank) {
            (true, None) => {
                return Err(Error::InvalidParameter(format!("{} needs a rank", self.arch)));
            }
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(format!("{} is full rank; drop the rank", self.arch)));
            }
            _ => {}
        }
        if self.effective_hidden() == 0 {
            return Err(Error::InvalidParameter("hidden width must be positive".into()));
        }
        let sm = self.effective_smoother();
        if !self.dataset.is_hypergraph() && sm != SmootherKind::None {
            return Err(Error::InvalidParameter(format!(
                "the spiral graph supports only the 'none' smoother, got '{}'",
                sm.name()
            )));
        }
        if let Some(l) = self.lambda_n {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter("lambda_n must be positive".into()));
            }
        }
        if !self.dataset.is_hypergraph() && (self.spiral_points == 0 || !(self.spiral_sigma > 0.0)) {
            return Err(Error::InvalidParameter("spiral needs points and a positive sigma".into()));
        }
        if matches!(self.dataset, DatasetSpec::Csv(_)) && self.train_indices == TrainSelection::Default {
            return Err(Error::InvalidParameter("csv datasets need explicit training indices".into()));
        }
        Ok(())
    }
}

/// Graph structure behind a loaded dataset.
#[derive(Debug, Clone)]
pub enum Structure {
    Hypergraph(Hypergraph),
    /// Points of a Gaussian-weighted similarity graph.
    Points { points: DenseMatrix, sigma: f64 },
}

/// A dataset ready for the pipeline.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub structure: Structure,
    /// Training set of the first run when `resample` is set.
    pub data: LabeledDataset,
    pub class_names: Vec<String>,
    /// Nodes per class drawn afresh for every run.
    pub resample: Option<usize>,
}

impl PreparedData {
    pub fn n(&self) -> usize {
        self.data.n()
    }
}

fn csv_format(text: &str) -> Result<TableFormat> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or(Error::Parse { line: 0, message: "no data rows".into() })?;
    let columns = first.split(',').count();
    if columns < 2 {
        return Err(Error::Parse { line: 1, message: "need at least one attribute and a class".into() });
    }
    Ok(TableFormat { columns, class_column: ClassColumn::Last })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Loads the dataset named by `cfg` together with its training set.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let (structure, x, labels, class_names) = match &cfg.dataset {
        DatasetSpec::Spiral => {
            let sc = SpiralConfig { points_per_orb: cfg.spiral_points, seed: cfg.spiral_seed, ..Default::default() };
            let (points, labels) = generate_spiral(&sc)?;
            let names = (1..=sc.orbs).map(|k| k.to_string()).collect();
            let x = points.clone();
            (Structure::Points { points, sigma: cfg.spiral_sigma }, x, labels, names)
        }
        spec => {
            let table = match spec {
                DatasetSpec::Cars => load_categorical(&cfg.data_dir.join(CARS_FILE), &[], TableFormat::CARS)?,
                DatasetSpec::Mushrooms => load_categorical(
                    &cfg.data_dir.join(MUSHROOMS_FILE),
                    &[MUSHROOM_STALK_ROOT_COLUMN],
                    TableFormat::MUSHROOMS,
                )?,
                DatasetSpec::Csv(p) => {
                    let text = read_text(p)?;
                    parse_categorical(&text, &[], csv_format(&text)?)?
                }
                DatasetSpec::Spiral => unreachable!(),
            };
            let hg = table_to_hypergraph(&table)?;
            if *spec == DatasetSpec::Mushrooms && hg.num_edges() != 112 {
                return Err(Error::InvalidDataset(format!(
                    "mushrooms should give 112 hyperedges after dropping stalk-root, got {}",
                    hg.num_edges()
                )));
            }
            let (labels, names) = table.class_labels();
            let x = incidence_as_input(&hg);
            (Structure::Hypergraph(hg), x, labels, names)
        }
    };
    let classes = class_names.len();
    let resample = match (&cfg.train_indices, &cfg.dataset) {
        (TrainSelection::Resampled(k), _) => Some(*k),
        (TrainSelection::Default, DatasetSpec::Spiral) => Some(2),
        _ => None,
    };
    let train = match &cfg.train_indices {
        _ if resample.is_some() => {
            let k = resample.expect("checked");
            stratified_train_indices(&labels, classes, k, split_seed(run_seed(cfg.seed, 0), cfg.split_seed))?
        }
        TrainSelection::File(p) => bind_indices(&load_train_indices(p)?, labels.len())?,
        TrainSelection::Stratified(k) => stratified_train_indices(&labels, classes, *k, cfg.split_seed)?,
        TrainSelection::Resampled(_) => unreachable!(),
        TrainSelection::Default => match cfg.dataset {
            DatasetSpec::Spiral => unreachable!("spiral default resamples"),
            DatasetSpec::Cars => bind_indices(&load_train_indices(&cfg.data_dir.join("cars_train.txt"))?, labels.len())?,
            DatasetSpec::Mushrooms => {
                bind_indices(&load_train_indices(&cfg.data_dir.join("mushrooms_train.txt"))?, labels.len())?
            }
            DatasetSpec::Csv(_) => {
                return Err(Error::InvalidParameter("csv datasets need explicit training indices".into()))
            }
        },
    };
    let data = LabeledDataset::new(x, labels, train, classes)?;
    Ok(PreparedData { structure, data, class_names, resample })
}

/// Seed of the training split used by the run seeded with `run`.
pub fn split_seed(run: u64, split_seed: u64) -> u64 {
    run_seed(run ^ split_seed, 0x5b17)
}

/// What the network propagates with.
#[derive(Debug, Clone)]
pub enum Propagator {
    Kernel(KernelOperator),
    Reduced { u: DenseMatrix, phi: Vec<f64> },
}

impl Propagator {
    pub fn as_propagation(&self) -> Propagation<'_> {
        match self {
            Propagator::Kernel(k) => Propagation::Kernel(k),
            Propagator::Reduced { u, phi } => Propagation::Reduced { u, phi },
        }
    }
}

fn lambda_n_of(op: &dyn LinearOperator, f: &FilterKind, fixed: Option<f64>) -> Result<f64> {
    match fixed {
        Some(v) => Ok(v),
        None if f.needs_lambda_n() => power_iteration_max(op, 1e-10),
        None => Ok(1.0),
    }
}

/// The `k` smallest Laplacian eigenpairs of the dataset under `smoother`,
/// packaged with `λ₂` and `λ_n`.
pub fn spectral_basis(
    prepared: &PreparedData,
    smoother: SmootherKind,
    k: usize,
    filter: &FilterKind,
    lambda_n: Option<f64>,
    seed: u64,
) -> Result<SpectralBasis> {
    let lanczos = LanczosOptions { seed, ..Default::default() };
    match &prepared.structure {
        Structure::Hypergraph(hg) if smoother == SmootherKind::HypergraphLoops => {
            let eig = smallest_eigenpairs(hg, k, seed)?;
            SpectralBasis::new(eig.eigenvalues, eig.eigenvectors, lambda_n.unwrap_or(1.0))
        }
        Structure::Hypergraph(hg) => {
            let op = smoothed_operator(hg, &hg.smoother(smoother))?;
            let eig = lanczos_smallest_with(&op, k, SPECTRUM_SHIFT, LANCZOS_TOL, &lanczos)?;
            let ln = lambda_n_of(&op, filter, lambda_n)?;
            SpectralBasis::new(eig.eigenvalues, eig.eigenvectors, ln)
        }
        Structure::Points { points, sigma } => {
            let op = gaussian_laplacian_operator(points, *sigma)?;
            let eig = lanczos_smallest_with(&op, k, SPECTRUM_SHIFT, LANCZOS_TOL, &lanczos)?;
            let ln = lambda_n_of(&op, filter, lambda_n)?;
            SpectralBasis::new(eig.eigenvalues, eig.eigenvectors, ln)
        }
    }
}

/// Eigenpairs needed for a rank-`r` filter: one extra covers a zero eigenvalue.
pub fn basis_size(r: usize) -> usize {
    r + 1
}

/// Rank-`r` propagator for a low-rank architecture from a precomputed basis.
pub fn low_rank_propagator(arch: Architecture, basis: &SpectralBasis, f: &FilterKind, r: usize) -> Result<Propagator> {
    let k = truncate_dominant(basis, f, r)?;
    Ok(match (arch, k) {
        (Architecture::Rgcn, KernelOperator::LowRank { u, phi }) => Propagator::Reduced { u, phi },
        (_, k) => Propagator::Kernel(k),
    })
}

fn dense_laplacian(prepared: &PreparedData, smoother: SmootherKind, cap: usize) -> Result<DenseMatrix> {
    let n = prepared.n();
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    match &prepared.structure {
        Structure::Hypergraph(hg) if smoother == SmootherKind::HypergraphLoops => laplacian_dense(hg),
        Structure::Hypergraph(hg) => Ok(smoothed_operator(hg, &hg.smoother(smoother))?.to_dense()),
        Structure::Points { points, sigma } => Ok(assemble(&gaussian_laplacian_operator(points, *sigma)?)),
    }
}

fn full_rank_kernel(cfg: &ExperimentConfig, prepared: &PreparedData) -> Result<KernelOperator> {
    let smoother = cfg.effective_smoother();
    let hg = match &prepared.structure {
        Structure::Hypergraph(hg) => hg,
        Structure::Points { .. } => {
            return Err(Error::InvalidParameter(
                "no structured full-rank kernel for point-cloud graphs; use gcn-naive".into(),
            ))
        }
    };
    if smoother == SmootherKind::HypergraphLoops {
        let ln = cfg.lambda_n.unwrap_or(1.0);
        return match cfg.filter.polynomial_coefficients(ln) {
            Some(a) => build_kernel_polynomial_structured(hg, &a),
            None => Ok(build_kernel_fullrank_spectral(hg, &cfg.filter)?.0),
        };
    }
    let op = smoothed_operator(hg, &hg.smoother(smoother))?;
    match cfg.filter {
        FilterKind::Linear => {
            let ln = lambda_n_of(&op, &cfg.filter, cfg.lambda_n)?;
            Ok(build_kernel_linear_smoothed(&op, 1.0, -1.0 / ln))
        }
        _ => Err(Error::InvalidParameter(format!(
            "structured full-rank kernel with the '{}' smoother supports only the linear filter; use gcn-naive",
            smoother.name()
        ))),
    }
}

/// Builds the propagator `cfg` asks for.
pub fn build_propagator(cfg: &ExperimentConfig, prepared: &PreparedData) -> Result<Propagator> {
    let smoother = cfg.effective_smoother();
    match cfg.arch {
        Architecture::Gcn => Ok(Propagator::Kernel(full_rank_kernel(cfg, prepared)?)),
        Architecture::GcnNaive => {
            let opts = DenseKernelOptions {
                lambda_n: cfg.lambda_n.or(match (&prepared.structure, smoother) {
                    (Structure::Hypergraph(_), SmootherKind::HypergraphLoops) => Some(1.0),
                    _ => None,
                }),
                ..Default::default()
            };
            let l = dense_laplacian(prepared, smoother, opts.cap)?;
            Ok(Propagator::Kernel(build_kernel_dense(&l, &cfg.filter, &opts)?))
        }
        Architecture::Lgcn | Architecture::Rgcn => {
            let r = cfg.rank.ok_or_else(|| Error::InvalidParameter("low-rank architectures need a rank".into()))?;
            let basis = spectral_basis(prepared, smoother, basis_size(r), &cfg.filter, cfg.lambda_n, cfg.seed)?;
            low_rank_propagator(cfg.arch, &basis, &cfg.filter, r)
        }
    }
}

/// One training run as reported.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// `None` for a diverged run.
    pub accuracy: Option<f64>,
    pub setup_seconds: f64,
    pub train_seconds: f64,
}

/// Means over non-diverged runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean_accuracy: f64,
    pub mean_setup_seconds: f64,
    pub mean_train_seconds: f64,
    pub completed: usize,
    pub diverged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

impl ExperimentResult {
    fn from_records(records: Vec<RunRecord>) -> Self {
        let ok: Vec<&RunRecord> = records.iter().filter(|r| r.accuracy.is_some()).collect();
        let m = ok.len().max(1) as f64;
        let summary = Summary {
            mean_accuracy: if ok.is_empty() { f64::NAN } else { ok.iter().filter_map(|r| r.accuracy).sum::<f64>() / m },
            mean_setup_seconds: ok.iter().map(|r| r.setup_seconds).sum::<f64>() / m,
            mean_train_seconds: ok.iter().map(|r| r.train_seconds).sum::<f64>() / m,
            completed: ok.len(),
            diverged: records.len() - ok.len(),
        };
        Self { records, summary }
    }

    /// Per-run rows and a `mean` row under the header `run,seed,accuracy_pct,setup_s,train_s`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("run,seed,accuracy_pct,setup_s,train_s\n");
        for r in &self.records {
            let acc = r.accuracy.map_or_else(|| "diverged".to_string(), |a| format!("{a:.4}"));
            let _ = writeln!(s, "{},{},{acc},{:.6},{:.6}", r.run, r.seed, r.setup_seconds, r.train_seconds);
        }
        let m = &self.summary;
        let _ = writeln!(
            s,
            "mean,,{:.4},{:.6},{:.6}",
            m.mean_accuracy, m.mean_setup_seconds, m.mean_train_seconds
        );
        s
    }
}

/// Reads [`THREADS_ENV`]; unset or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Trains `cfg`'s runs on a ready propagator. Setup time runs from
/// `setup_start` until the model's input product is formed.
pub fn run_with_propagator(
    cfg: &ExperimentConfig,
    prepared: &PreparedData,
    prop: &Propagator,
    setup_start: Instant,
) -> Result<ExperimentResult> {
    let model = Model::new(prop.as_propagation(), &prepared.data.x)?;
    let setup = setup_start.elapsed().as_secs_f64();
    let hidden = cfg.effective_hidden();
    let tc = cfg.train_config();
    let outcomes = match prepared.resample {
        None => train_runs(&model, &prepared.data, hidden, &tc, threads_from_env())?,
        Some(k) => {
            let d = &prepared.data;
            train_runs_by(&model, hidden, &tc, threads_from_env(), |s| {
                let train = stratified_train_indices(&d.labels, d.classes, k, split_seed(s, cfg.split_seed))?;
                Ok(Cow::Owned(d.with_train(train)?))
            })?
        }
    };
    let records = outcomes
        .into_iter()
        .enumerate()
        .map(|(run, (seed, out))| {
            let (accuracy, train_seconds) = match out {
                Ok(o) => (Some(o.accuracy), o.train_seconds),
                Err(e) => {
                    log_warning(&format!("run {run} (seed {seed}) excluded: {e}"));
                    (None, 0.0)
                }
            };
            RunRecord { run, seed, accuracy, setup_seconds: setup, train_seconds }
        })
        .collect();
    Ok(ExperimentResult::from_records(records))
}

fn log_warning(msg: &str) {
    eprintln!("warning: {msg}");
}

/// Runs the configured experiment on an already loaded dataset.
pub fn run_prepared(cfg: &ExperimentConfig, prepared: &PreparedData) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let prop = build_propagator(cfg, prepared)?;
    run_with_propagator(cfg, prepared, &prop, start)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let prepared = load_dataset(cfg)?;
    run_prepared(cfg, &prepared)
}

/// Summary of one configuration inside a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub arch: Architecture,
    pub rank: Option<usize>,
    pub smoother: SmootherKind,
    pub summary: Summary,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("arch,rank,smoother,accuracy_pct,setup_s,train_s\n");
    for r in rows {
        let rank = r.rank.map_or_else(|| "full".to_string(), |v| v.to_string());
        let m = &r.summary;
        let _ = writeln!(
            s,
            "{},{rank},{},{:.4},{:.6},{:.6}",
            r.arch,
            r.smoother.name(),
            m.mean_accuracy,
            m.mean_setup_seconds,
            m.mean_train_seconds
        );
    }
    s
}

/// Trains at every rank in `ranks` (ascending) for each low-rank architecture
/// in `archs`, computing the eigenbasis once at the largest rank.
pub fn rank_sweep(
    cfg: &ExperimentConfig,
    prepared: &PreparedData,
    ranks: &[usize],
    archs: &[Architecture],
) -> Result<Vec<SweepRow>> {
    if ranks.is_empty() || ranks.windows(2).any(|w| w[0] >= w[1]) || ranks[0] == 0 {
        return Err(Error::InvalidParameter("ranks must be positive and strictly ascending".into()));
    }
    if let Some(a) = archs.iter().find(|a| !a.is_low_rank()) {
        return Err(Error::InvalidParameter(format!("rank sweep needs low-rank architectures, got {a}")));
    }
    let smoother = cfg.effective_smoother();
    let max = *ranks.last().expect("non-empty");
    let start = Instant::now();
    let basis = spectral_basis(prepared, smoother, basis_size(max), &cfg.filter, cfg.lambda_n, cfg.seed)?;
    let basis_seconds = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for &arch in archs {
        for &r in ranks {
            let mut c = cfg.clone();
            c.arch = arch;
            c.rank = Some(r);
            c.validate()?;
            let t = Instant::now();
            let prop = low_rank_propagator(arch, &basis, &cfg.filter, r)?;
            let mut res = run_with_propagator(&c, prepared, &prop, t)?;
            res.summary.mean_setup_seconds += basis_seconds;
            rows.push(SweepRow { arch, rank: Some(r), smoother, summary: res.summary });
        }
    }
    Ok(rows)
}

/// Trains `cfg` under every smoother in `smoothers`.
pub fn smoother_sweep(
    cfg: &ExperimentConfig,
    prepared: &PreparedData,
    smoothers: &[SmootherKind],
) -> Result<Vec<SweepRow>> {
    if !matches!(prepared.structure, Structure::Hypergraph(_)) {
        return Err(Error::InvalidParameter("smoother sweep needs a hypergraph dataset".into()));
    }
    smoothers
        .iter()
        .map(|&sm| {
            let mut c = cfg.clone();
            c.smoother = Some(sm);
            let res = run_prepared(&c, prepared)?;
            Ok(SweepRow { arch: c.arch, rank: c.rank, smoother: sm, summary: res.summary })
        })
        .collect()
}

/// Naive dense versus structured full-rank timings for one filter.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub naive: Summary,
    pub structured: Summary,
}

impl TimingReport {
    fn total(s: &Summary) -> f64 {
        s.mean_setup_seconds + s.mean_train_seconds
    }

    /// Naive over structured time per run, setup plus training.
    pub fn speedup(&self) -> f64 {
        Self::total(&self.naive) / Self::total(&self.structured)
    }

    pub fn structured_faster(&self) -> bool {
        Self::total(&self.structured) < Self::total(&self.naive)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("path,accuracy_pct,setup_s,train_s,total_s\n");
        for (name, m) in [("naive", &self.naive), ("structured", &self.structured)] {
            let _ = writeln!(
                s,
                "{name},{:.4},{:.6},{:.6},{:.6}",
                m.mean_accuracy,
                m.mean_setup_seconds,
                m.mean_train_seconds,
                Self::total(m)
            );
        }
        let _ = writeln!(s, "speedup,,,,{:.3}", self.speedup());
        s
    }
}

/// Runs `cfg` once on the naive dense path and once on the structured path.
pub fn timing_report(cfg: &ExperimentConfig, prepared: &PreparedData) -> Result<TimingReport> {
    let mut naive = cfg.clone();
    naive.arch = Architecture::GcnNaive;
    naive.rank = None;
    let mut structured = naive.clone();
    structured.arch = Architecture::Gcn;
    Ok(TimingReport {
        naive: run_prepared(&naive, prepared)?.summary,
        structured: run_prepared(&structured, prepared)?.summary,
    })
}
