//! Monte Carlo simulation of the mild solution in one space dimension.
//!
//! Noise lives on a space-time grid: time steps of width `dt` on `[0, T]` and `nx` cells of
//! width `dx` on `[-L, L]`. Each cell carries an independent fBm-increment vector scaled by
//! `sqrt(dx)`. The solution at `(t_k, x)` is
//! `sum_{i<k} sum_j (cell integral of G((k-i-1/2) dt) / dx) * xi[i][j]`.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gp::{audit_psd, path_rng, GramMatrix, McEstimate};
use crate::specfun::cell_mass;

/// Diffusivity at which the simulated covariance matches the model's solution covariance.
pub const DEFAULT_DIFFUSIVITY: f64 = 0.5;

fn default_diffusivity() -> f64 {
    DEFAULT_DIFFUSIVITY
}

/// Discretization and sampling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdeConfig {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub nt: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub nx: usize,
    #[serde(default = "default_diffusivity")]
    pub c: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl SpdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.5 && self.h < 1.0) {
            return Err(invalid("H", format!("{} is outside (1/2, 1)", self.h)));
        }
        if !(self.horizon > 0.0) {
            return Err(invalid("T", "must be positive"));
        }
        if self.nt < 2 {
            return Err(invalid("nt", "needs at least 2 time steps"));
        }
        if self.nx < 2 {
            return Err(invalid("nx", "needs at least 2 cells"));
        }
        if !(self.c > 0.0) {
            return Err(invalid("c", "diffusivity must be positive"));
        }
        let min_l = 4.0 * (self.c * self.horizon).sqrt();
        if !(self.half_width >= min_l) {
            return Err(invalid(
                "L",
                format!("{} is below the truncation bound 4 sqrt(cT) = {min_l}", self.half_width),
            ));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn cell(&self, j: usize) -> (f64, f64) {
        let dx = self.dx();
        (-self.half_width + j as f64 * dx, -self.half_width + (j + 1) as f64 * dx)
    }

    /// Grid step index of time `t`.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt()).round();
        if !(k >= 1.0 && k <= self.nt as f64) || (k * self.dt() - t).abs() > 1e-9 * self.horizon {
            return Err(invalid("eval_times", format!("{t} is not a positive point of the time grid")));
        }
        Ok(k as usize)
    }
}

/// Covariance matrix of fBm increments over `nt` steps of width `dt`.
pub fn fbm_increment_gram(h: f64, nt: usize, dt: f64) -> DMatrix<f64> {
    let scale = 0.5 * dt.powf(2.0 * h);
    let e = 2.0 * h;
    DMatrix::from_fn(nt, nt, |i, j| {
        let k = (i as f64 - j as f64).abs();
        scale * ((k + 1.0).powf(e) + (k - 1.0).abs().powf(e) - 2.0 * k.powf(e))
    })
}

/// Noise increments `xi[i][j]` for time step `i` and cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    pub xi: Vec<Vec<f64>>,
    pub dt: f64,
    pub dx: f64,
}

/// Factorized increment covariance shared by every cell and path.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    cfg: SpdeConfig,
    factor: DMatrix<f64>,
}

impl NoiseSampler {
    pub fn new(cfg: &SpdeConfig) -> Result<Self> {
        cfg.validate()?;
        let gram = fbm_increment_gram(cfg.h, cfg.nt, cfg.dt());
        let g = GramMatrix::from_entries("fbm-increments", vec![0.0; cfg.nt], gram)?;
        let factor = audit_psd(&g)?.factor;
        Ok(Self { cfg: cfg.clone(), factor })
    }

    /// Lower Cholesky factor of the increment covariance.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Field for path `path`; cell `j` consumes the `j`-th block of `nt` normals.
    pub fn sample(&self, path: u64) -> NoiseField {
        let (nt, nx) = (self.cfg.nt, self.cfg.nx);
        let sdx = self.cfg.dx().sqrt();
        let mut rng = path_rng(self.cfg.seed, path);
        let mut xi = vec![vec![0.0; nx]; nt];
        let mut z = vec![0.0; nt];
        for j in 0..nx {
            z.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
            for i in 0..nt {
                let v: f64 = (0..=i).map(|m| self.factor[(i, m)] * z[m]).sum();
                xi[i][j] = sdx * v;
            }
        }
        NoiseField { xi, dt: self.cfg.dt(), dx: self.cfg.dx() }
    }
}

pub fn sample_noise_field(cfg: &SpdeConfig, path: u64) -> Result<NoiseField> {
    Ok(NoiseSampler::new(cfg)?.sample(path))
}

// kmat[m][j]: cell average of the heat kernel at lag (m + 1/2) dt.
fn lag_kernels(cfg: &SpdeConfig, x: f64) -> Vec<Vec<f64>> {
    let (dt, dx) = (cfg.dt(), cfg.dx());
    (0..cfg.nt)
        .map(|m| {
            let lag = (m as f64 + 0.5) * dt;
            (0..cfg.nx)
                .map(|j| {
                    let (a, b) = cfg.cell(j);
                    cell_mass(cfg.c, lag, x, a, b) / dx
                })
                .collect()
        })
        .collect()
}

/// Solution at grid steps `steps` for one noise field, summed explicitly.
pub fn mild_from_field(cfg: &SpdeConfig, field: &NoiseField, steps: &[usize], x: f64) -> Vec<f64> {
    let kmat = lag_kernels(cfg, x);
    steps
        .iter()
        .map(|&k| {
            (0..k.min(cfg.nt))
                .map(|i| field.xi[i].iter().zip(&kmat[k - i - 1]).map(|(xi, g)| xi * g).sum::<f64>())
                .sum()
        })
        .collect()
}

// For each requested step k, A_k[j][m] = sum_i L[i][m] kmat[k-1-i][j], so that
// U_k = sqrt(dx) sum_j A_k[j] . z_j with z_j the normals of cell j.
fn propagators(cfg: &SpdeConfig, factor: &DMatrix<f64>, steps: &[usize], x: f64) -> Vec<Vec<Vec<f64>>> {
    let kmat = lag_kernels(cfg, x);
    steps
        .iter()
        .map(|&k| {
            (0..cfg.nx)
                .into_par_iter()
                .map(|j| (0..cfg.nt).map(|m| (m..k).map(|i| factor[(i, m)] * kmat[k - 1 - i][j]).sum()).collect())
                .collect()
        })
        .collect()
}

fn eval_steps(cfg: &SpdeConfig, eval_times: &[f64], x: f64) -> Result<Vec<usize>> {
    cfg.validate()?;
    if x.abs() > cfg.half_width / 2.0 {
        return Err(invalid("x", format!("|x| = {} exceeds L/2", x.abs())));
    }
    eval_times.iter().map(|&t| cfg.step_of(t)).collect()
}

/// Exact covariance of the discretized solution at `eval_times` (no sampling error).
pub fn discrete_covariance(cfg: &SpdeConfig, eval_times: &[f64], x: f64) -> Result<Vec<Vec<f64>>> {
    let steps = eval_steps(cfg, eval_times, x)?;
    let sampler = NoiseSampler::new(cfg)?;
    let a = propagators(cfg, sampler.factor(), &steps, x);
    let dx = cfg.dx();
    let n = steps.len();
    Ok((0..n)
        .map(|p| {
            (0..n)
                .map(|q| {
                    dx * a[p]
                        .iter()
                        .zip(&a[q])
                        .map(|(u, v)| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>())
                        .sum::<f64>()
                })
                .collect()
        })
        .collect())
}

/// Simulated solution values: one row per path, one column per evaluation time.
pub fn mild_samples(cfg: &SpdeConfig, eval_times: &[f64], x: f64) -> Result<Vec<Vec<f64>>> {
    let steps = eval_steps(cfg, eval_times, x)?;
    let sampler = NoiseSampler::new(cfg)?;
    let a = propagators(cfg, sampler.factor(), &steps, x);
    let sdx = cfg.dx().sqrt();
    let (nt, nx) = (cfg.nt, cfg.nx);
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p as u64);
            let mut z = vec![0.0; nt];
            let mut acc = vec![0.0; steps.len()];
            for j in 0..nx {
                z.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
                for (e, ak) in a.iter().enumerate() {
                    acc[e] += ak[j].iter().zip(&z).map(|(u, v)| u * v).sum::<f64>();
                }
            }
            acc.into_iter().map(|v| sdx * v).collect()
        })
        .collect())
}

/// One covariance estimate `E[U(t,x) U(s,x)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpdeRow {
    pub t: f64,
    pub s: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Monte Carlo covariance estimates plus Gaussianity diagnostics at the first evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdeReport {
    pub rows: Vec<SpdeRow>,
    pub skewness: McEstimate,
    pub excess_kurtosis: McEstimate,
}

/// Estimates `E[U(t,x) U(s,x)]` for all pairs `t >= s` drawn from `eval_times`.
pub fn mild_mc(cfg: &SpdeConfig, eval_times: &[f64], x: f64) -> Result<SpdeReport> {
    if cfg.n_paths < 2 {
        return Err(invalid("n_paths", "at least two paths are needed"));
    }
    let u = mild_samples(cfg, eval_times, x)?;
    let n = u.len();
    let nf = n as f64;
    let mut rows = vec![];
    for p in 0..eval_times.len() {
        for q in 0..eval_times.len() {
            if eval_times[q] > eval_times[p] {
                continue;
            }
            let prod: Vec<f64> = u.iter().map(|r| r[p] * r[q]).collect();
            let mean = prod.iter().sum::<f64>() / nf;
            let var = prod.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            rows.push(SpdeRow { t: eval_times[p], s: eval_times[q], estimate: mean, std_err: (var / nf).sqrt(), n });
        }
    }
    let first: Vec<f64> = u.iter().map(|r| r[0]).collect();
    let mean = first.iter().sum::<f64>() / nf;
    let m = |k: i32| first.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / nf;
    let (m2, m3, m4) = (m(2), m(3), m(4));
    Ok(SpdeReport {
        rows,
        skewness: McEstimate { value: m3 / m2.powf(1.5), std_err: (6.0 / nf).sqrt(), n },
        excess_kurtosis: McEstimate { value: m4 / (m2 * m2) - 3.0, std_err: (24.0 / nf).sqrt(), n },
    })
}
