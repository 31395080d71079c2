use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::training::rng_from_seed;

/// Gaussian orbs placed on a helix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralConfig {
    pub orbs: usize,
    pub points_per_orb: usize,
    pub height: f64,
    pub radius: f64,
    /// Standard deviation of every coordinate around its orb center.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        Self { orbs: 5, points_per_orb: 2000, height: 10.0, radius: 2.0, spread: 1.0, seed: 0 }
    }
}

impl SpiralConfig {
    /// Orb `k` sits at angle `2πk/N_c` on the circle of radius `r`, at height `k·h/(N_c−1)`.
    pub fn centers(&self) -> Vec<[f64; 3]> {
        let nc = self.orbs;
        (0..nc)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / nc as f64;
                let z = if nc > 1 { k as f64 * self.height / (nc - 1) as f64 } else { 0.0 };
                [self.radius * a.cos(), self.radius * a.sin(), z]
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.orbs == 0 || self.points_per_orb == 0 || !(self.height > 0.0) || !(self.radius > 0.0) {
            return Err(Error::InvalidParameter("spiral parameters must be positive".into()));
        }
        if !(self.spread >= 0.0) {
            return Err(Error::InvalidParameter("spread must be non-negative".into()));
        }
        Ok(())
    }
}

/// Standard normal variates by the Box–Muller transform, consumed in pairs.
struct BoxMuller<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> BoxMuller<R> {
    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.random::<f64>(); // (0, 1]
        let u2: f64 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * PI * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }
}

/// Samples the points orb by orb (x, y, z per point) and labels each one by
/// its nearest center, ties going to the lower orb index.
pub fn generate_spiral(cfg: &SpiralConfig) -> Result<(DenseMatrix, Vec<usize>)> {
    cfg.validate()?;
    let centers = cfg.centers();
    let n = cfg.orbs * cfg.points_per_orb;
    let mut normals = BoxMuller { rng: rng_from_seed(cfg.seed), spare: None };
    let mut points = DenseMatrix::zeros(n, 3);
    let mut labels = Vec::with_capacity(n);
    for (k, c) in centers.iter().enumerate() {
        for s in 0..cfg.points_per_orb {
            let row = points.row_mut(k * cfg.points_per_orb + s);
            for d in 0..3 {
                row[d] = c[d] + cfg.spread * normals.next();
            }
            labels.push(nearest_center(row, &centers));
        }
    }
    Ok((points, labels))
}

fn nearest_center(p: &[f64], centers: &[[f64; 3]]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (k, c) in centers.iter().enumerate() {
        let d: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// `per_class` distinct random nodes from every class, sorted ascending.
pub fn stratified_train_indices(
    labels: &[usize],
    classes: usize,
    per_class: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(classes * per_class);
    for c in 0..classes {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.len() < per_class {
            return Err(Error::InvalidDataset(format!(
                "class {} has {} nodes, need {per_class}",
                c + 1,
                members.len()
            )));
        }
        out.extend(rand::seq::index::sample(&mut rng, members.len(), per_class).into_iter().map(|k| members[k]));
    }
    out.sort_unstable();
    Ok(out)
}
