//! Initialization, loss, analytic gradients and plain gradient descent.

use std::borrow::Cow;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{shape_err, Error, Result};
use crate::filters::KernelOperator;
use crate::linalg::{axpy, DenseMatrix, LinearOperator};
use crate::network::{predict, Activation, ModelParams};

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub rho: f64,
    pub runs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.2, iterations: 1000, rho: 0.0005, runs: 100, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if !(self.rho >= 0.0) {
            return Err(Error::InvalidParameter("rho must be non-negative".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter("need at least one run".into()));
        }
        Ok(())
    }
}

/// Node features, 0-based class labels and 0-based training indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DenseMatrix,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub classes: usize,
}

impl LabeledDataset {
    pub fn new(x: DenseMatrix, labels: Vec<usize>, train: Vec<usize>, classes: usize) -> Result<Self> {
        let n = x.rows();
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!("{} labels for {n} nodes", labels.len())));
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= classes) {
            return Err(Error::InvalidDataset(format!("label {c} outside {classes} classes")));
        }
        if train.is_empty() {
            return Err(Error::InvalidDataset("empty training set".into()));
        }
        let mut seen = vec![false; n];
        for &i in &train {
            if i >= n {
                return Err(Error::InvalidDataset(format!("training index {} out of range", i + 1)));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidDataset(format!("duplicate training index {}", i + 1)));
            }
        }
        Ok(Self { x, labels, train, classes })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn with_train(&self, train: Vec<usize>) -> Result<Self> {
        Self::new(self.x.clone(), self.labels.clone(), train, self.classes)
    }
}

/// Derives the seed of run `run` from the experiment seed (SplitMix64 finalizer).
pub fn run_seed(base: u64, run: usize) -> u64 {
    let mut z = base.wrapping_add((run as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator used for everything seeded in this crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[−b, b)` with `b = √(6/(rows+cols))`, filled row by row.
pub fn glorot_init(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let b = (6.0 / (rows + cols) as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| (2.0 * rng.random::<f64>() - 1.0) * b)
}

/// How the network propagates: a node-space kernel, or the reduced spectral form.
#[derive(Debug, Clone, Copy)]
pub enum Propagation<'a> {
    Kernel(&'a KernelOperator),
    Reduced { u: &'a DenseMatrix, phi: &'a [f64] },
}

/// A propagation with the input-dependent first product precomputed
/// (`𝒦X`, or `φU_rᵀX` in the reduced case).
#[derive(Debug, Clone)]
pub struct Model<'a> {
    prop: Propagation<'a>,
    input: DenseMatrix,
    n: usize,
    act: Activation,
}

struct Forward {
    a1: DenseMatrix,
    h: DenseMatrix,
    logits: DenseMatrix,
}

impl<'a> Model<'a> {
    pub fn new(prop: Propagation<'a>, x: &DenseMatrix) -> Result<Self> {
        let input = match prop {
            Propagation::Kernel(k) => {
                if k.dim() != x.rows() {
                    return Err(shape_err("input", (k.dim(), x.cols()), x.shape()));
                }
                k.apply(x)
            }
            Propagation::Reduced { u, phi } => {
                if u.rows() != x.rows() || u.cols() != phi.len() {
                    return Err(shape_err("input", (u.rows(), x.cols()), x.shape()));
                }
                u.t_matmul(x)?.scale_rows(phi)
            }
        };
        Ok(Self { prop, input, n: x.rows(), act: Activation::Relu })
    }

    /// Replaces the hidden activation; used to check the reduced/low-rank commutation.
    #[doc(hidden)]
    pub fn with_activation(mut self, act: Activation) -> Self {
        self.act = act;
        self
    }

    pub fn input_width(&self) -> usize {
        self.input.cols()
    }

    fn forward_parts(&self, params: &ModelParams) -> Result<Forward> {
        params.check(self.input.cols())?;
        let a1 = self.input.matmul(&params.theta1)?;
        let h = self.act.apply(&a1);
        let p = h.matmul(&params.theta2)?;
        let logits = match self.prop {
            Propagation::Kernel(k) => k.apply(&p),
            Propagation::Reduced { u, phi } => u.matmul(&p.scale_rows(phi))?,
        };
        Ok(Forward { a1, h, logits })
    }

    pub fn forward(&self, params: &ModelParams) -> Result<DenseMatrix> {
        Ok(self.forward_parts(params)?.logits)
    }

    /// Adjoint of the output map applied to a gradient that is nonzero only on `rows`.
    fn output_adjoint(&self, rows: &[usize], g: &DenseMatrix) -> DenseMatrix {
        let c = g.cols();
        // Fᵀ G restricted to the nonzero rows
        let project = |f: &DenseMatrix| {
            let mut t = DenseMatrix::zeros(f.cols(), c);
            for &i in rows {
                let gi = g.row(i);
                for (k, &fik) in f.row(i).iter().enumerate() {
                    axpy(fik, gi, t.row_mut(k));
                }
            }
            t
        };
        match self.prop {
            Propagation::Reduced { u, phi } => project(u).scale_rows(phi),
            Propagation::Kernel(KernelOperator::LowRank { u, phi }) => {
                u.matmul(&project(u).scale_rows(phi)).expect("factor shape")
            }
            Propagation::Kernel(KernelOperator::ScaledIdentityPlusLowRank { alpha, factor, core }) => {
                let t = core.matmul(&project(factor)).expect("core shape");
                let mut y = factor.matmul(&t).expect("factor shape");
                for &i in rows {
                    axpy(*alpha, g.row(i), y.row_mut(i));
                }
                y
            }
            Propagation::Kernel(k) => k.apply(g),
        }
    }

    /// Loss and analytic gradients with respect to both weight matrices.
    pub fn gradients(&self, data: &LabeledDataset, params: &ModelParams, rho: f64) -> Result<(f64, ModelParams)> {
        if data.n() != self.n {
            return Err(Error::Shape(format!("dataset has {} nodes, model {}", data.n(), self.n)));
        }
        let fw = self.forward_parts(params)?;
        let m = fw.logits.cols();
        let scale = 1.0 / data.train.len() as f64;
        let mut g = DenseMatrix::zeros(self.n, m);
        let mut ce = 0.0;
        for &i in &data.train {
            let row = fw.logits.row(i);
            let (lse, max) = log_sum_exp(row);
            let gi = g.row_mut(i);
            for (j, &z) in row.iter().enumerate() {
                gi[j] = (z - max - lse).exp() * scale;
            }
            gi[data.labels[i]] -= scale;
            ce += lse + max - row[data.labels[i]];
        }
        let loss = ce * scale + 0.5 * rho * sq_norm(&params.theta1);

        let dp = self.output_adjoint(&data.train, &g);
        let d2 = fw.h.t_matmul(&dp)?;
        let dh = dp.matmul_t(&params.theta2)?;
        let da1 = match self.act {
            Activation::Relu => dh.zip_with(&fw.a1, |d, a| if a > 0.0 { d } else { 0.0 })?,
            Activation::Identity => dh,
        };
        let mut d1 = self.input.t_matmul(&da1)?;
        d1.axpy_assign(rho, &params.theta1)?;
        Ok((loss, ModelParams { theta1: d1, theta2: d2 }))
    }
}

/// `(ln Σ exp(z − max), max)` for a logit row.
fn log_sum_exp(row: &[f64]) -> (f64, f64) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = row.iter().map(|&z| (z - max).exp()).sum();
    (s.ln(), max)
}

fn sq_norm(m: &DenseMatrix) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum()
}

/// Mean cross-entropy over the training nodes plus `(ρ/2)‖Θ⁽¹⁾‖²_F`.
pub fn loss(logits: &DenseMatrix, data: &LabeledDataset, params: &ModelParams, rho: f64) -> Result<f64> {
    if logits.rows() != data.n() {
        return Err(shape_err("logits", (data.n(), logits.cols()), logits.shape()));
    }
    let mut ce = 0.0;
    for &i in &data.train {
        let row = logits.row(i);
        let (lse, max) = log_sum_exp(row);
        ce += lse + max - row[data.labels[i]];
    }
    Ok(ce / data.train.len() as f64 + 0.5 * rho * sq_norm(&params.theta1))
}

/// Percentage of correctly classified non-training nodes.
pub fn evaluate_accuracy(logits: &DenseMatrix, data: &LabeledDataset) -> Result<f64> {
    if logits.rows() != data.n() {
        return Err(shape_err("logits", (data.n(), logits.cols()), logits.shape()));
    }
    let mut is_train = vec![false; data.n()];
    for &i in &data.train {
        is_train[i] = true;
    }
    let (_, pred) = predict(logits);
    let (mut hit, mut total) = (0usize, 0usize);
    for i in 0..data.n() {
        if !is_train[i] {
            total += 1;
            hit += usize::from(pred[i] == data.labels[i]);
        }
    }
    if total == 0 {
        return Err(Error::InvalidDataset("no non-training nodes to evaluate".into()));
    }
    Ok(100.0 * hit as f64 / total as f64)
}

/// Result of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub params: ModelParams,
    pub accuracy: f64,
    pub final_loss: f64,
    pub train_seconds: f64,
}

/// Glorot initialization followed by `iterations` full-batch gradient steps.
pub fn train_run(
    model: &Model<'_>,
    data: &LabeledDataset,
    hidden: usize,
    config: &TrainConfig,
    seed: u64,
) -> Result<RunOutcome> {
    config.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut params = ModelParams {
        theta1: glorot_init(model.input_width(), hidden, &mut rng),
        theta2: glorot_init(hidden, data.classes, &mut rng),
    };
    let start = Instant::now();
    for it in 0..config.iterations {
        let (l, grad) = model.gradients(data, &params, config.rho)?;
        if !l.is_finite() || !grad.theta1.is_finite() || !grad.theta2.is_finite() {
            return Err(Error::DivergedRun { iteration: it });
        }
        params.theta1.axpy_assign(-config.learning_rate, &grad.theta1)?;
        params.theta2.axpy_assign(-config.learning_rate, &grad.theta2)?;
    }
    let train_seconds = start.elapsed().as_secs_f64();
    let logits = model.forward(&params)?;
    if !logits.is_finite() {
        return Err(Error::DivergedRun { iteration: config.iterations });
    }
    let final_loss = loss(&logits, data, &params, config.rho)?;
    let accuracy = evaluate_accuracy(&logits, data)?;
    Ok(RunOutcome { params, accuracy, final_loss, train_seconds })
}

/// Runs `config.runs` independent trainings, optionally in parallel, and
/// returns them in run order together with the seed each one used.
pub fn train_runs(
    model: &Model<'_>,
    data: &LabeledDataset,
    hidden: usize,
    config: &TrainConfig,
    threads: Option<usize>,
) -> Result<Vec<(u64, Result<RunOutcome>)>> {
    train_runs_by(model, hidden, config, threads, |_| Ok(Cow::Borrowed(data)))
}

/// Like [`train_runs`], but each run trains on the dataset `data_for(seed)`,
/// so the training set may differ between runs.
pub fn train_runs_by<'d, F>(
    model: &Model<'_>,
    hidden: usize,
    config: &TrainConfig,
    threads: Option<usize>,
    data_for: F,
) -> Result<Vec<(u64, Result<RunOutcome>)>>
where
    F: Fn(u64) -> Result<Cow<'d, LabeledDataset>> + Sync,
{
    config.validate()?;
    let job = || {
        (0..config.runs)
            .into_par_iter()
            .map(|r| {
                let s = run_seed(config.seed, r);
                let out = data_for(s).and_then(|d| train_run(model, &d, hidden, config, s));
                (s, out)
            })
            .collect::<Vec<_>>()
    };
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}
