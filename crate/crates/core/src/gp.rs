//! Gram matrices, positive-definiteness audits, exact Gaussian sampling by Cholesky
//! factorization, and Monte Carlo covariance estimates.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;

/// Jitter levels tried by [`audit_psd`], in units of `trace / n`.
pub const JITTER_LADDER: [f64; 3] = [0.0, 1e-12, 1e-10];

/// Strictly increasing positive evaluation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("grid", "times must be positive and finite"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("grid", "times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    /// `n` equally spaced points on `(0, horizon]`.
    pub fn uniform(n: usize, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(invalid("T", format!("horizon {horizon} must be positive")));
        }
        Self::new((1..=n).map(|k| horizon * k as f64 / n as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Covariance matrix of a kernel on a set of times.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub label: String,
    pub times: Vec<f64>,
    pub entries: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps an explicit symmetric matrix.
    pub fn from_entries(label: impl Into<String>, times: Vec<f64>, entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() != times.len() {
            return Err(Error::Shape(format!(
                "{}x{} matrix for {} times",
                entries.nrows(),
                entries.ncols(),
                times.len()
            )));
        }
        Ok(Self { label: label.into(), times, entries })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn min_eigen(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        SymmetricEigen::new(self.entries.clone()).eigenvalues.min()
    }
}

/// Evaluates the kernel on all pairs of grid times (upper triangle, mirrored).
pub fn build_gram(kernel: &KernelSpec, grid: &TimeGrid) -> Result<GramMatrix> {
    kernel.validate()?;
    let t = grid.times();
    let n = t.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel.eval(t[i], t[j]).map_err(|e| Error::KernelEval { i, j, reason: e.to_string() }))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            m[(i, i + k)] = v;
            m[(i + k, i)] = v;
        }
    }
    GramMatrix::from_entries(kernel.label(), t.to_vec(), m)
}

/// Outcome of a positive-definiteness audit.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdAudit {
    pub min_eigen: f64,
    pub trace: f64,
    /// Entry of [`JITTER_LADDER`] at which the factorization succeeded.
    pub jitter: f64,
    /// Lower Cholesky factor of the (jittered) matrix.
    pub factor: DMatrix<f64>,
}

impl PsdAudit {
    /// `min_eigen >= -rel * trace`.
    pub fn passes(&self, rel: f64) -> bool {
        self.min_eigen >= -rel * self.trace
    }
}

/// Minimum eigenvalue plus a Cholesky factorization, retrying with increasing diagonal jitter.
///
/// A pivot counts as failed when its square falls below `n * eps * max_diag`.
pub fn audit_psd(g: &GramMatrix) -> Result<PsdAudit> {
    let n = g.len();
    let min_eigen = g.min_eigen();
    let trace = g.trace();
    let max_diag = g.entries.diagonal().max();
    for &eps in &JITTER_LADDER {
        let mut m = g.entries.clone();
        let shift = eps * trace / n.max(1) as f64;
        for i in 0..n {
            m[(i, i)] += shift;
        }
        let floor = n as f64 * f64::EPSILON * (max_diag + shift);
        if let Some(c) = Cholesky::new(m) {
            let l = c.unpack();
            if (0..n).all(|i| l[(i, i)] * l[(i, i)] >= floor) {
                return Ok(PsdAudit { min_eigen, trace, jitter: eps, factor: l });
            }
        }
    }
    Err(Error::NotPositiveDefinite { min_eigen })
}

/// Independent sample paths on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub label: String,
    pub times: Vec<f64>,
    /// One row per path.
    pub paths: Vec<Vec<f64>>,
    pub seed: u64,
    pub jitter: f64,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// Path-by-path sum of two ensembles on the same grid.
    pub fn sum(&self, other: &PathEnsemble) -> Result<PathEnsemble> {
        if self.times != other.times || self.paths.len() != other.paths.len() {
            return Err(Error::Shape("ensembles differ in grid or size".into()));
        }
        let paths =
            self.paths.iter().zip(&other.paths).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
        Ok(PathEnsemble {
            label: format!("{}+{}", self.label, other.label),
            times: self.times.clone(),
            paths,
            seed: self.seed,
            jitter: self.jitter.max(other.jitter),
        })
    }

    /// Multiplies every path by `c`.
    pub fn scaled(mut self, c: f64) -> PathEnsemble {
        self.paths.iter_mut().flatten().for_each(|x| *x *= c);
        self
    }
}

/// RNG for one path: the master seed selects the key, the path index selects the stream.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Draws `n_paths` centred Gaussian vectors with covariance `g` (up to the audit jitter).
pub fn sample_paths(g: &GramMatrix, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    let audit = audit_psd(g)?;
    let n = g.len();
    let l = &audit.factor;
    let paths = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p as u64);
            let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            (0..n).map(|i| (0..=i).map(|k| l[(i, k)] * z[k]).sum()).collect()
        })
        .collect();
    Ok(PathEnsemble { label: g.label.clone(), times: g.times.clone(), paths, seed, jitter: audit.jitter })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Unbiased sample covariance with Gaussian standard errors `sqrt((c_ii c_jj + c_ij^2) / (N-1))`.
pub fn empirical_cov(e: &PathEnsemble) -> Result<Vec<Vec<McEstimate>>> {
    let np = e.n_paths();
    if np < 2 {
        return Err(invalid("n_paths", "at least two paths are needed"));
    }
    let n = e.times.len();
    let mut mean = vec![0.0; n];
    for p in &e.paths {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= np as f64);
    let mut c = vec![vec![0.0; n]; n];
    for p in &e.paths {
        let dev: Vec<f64> = p.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..n {
            for j in i..n {
                c[i][j] += dev[i] * dev[j];
            }
        }
    }
    let denom = (np - 1) as f64;
    for i in 0..n {
        for j in i..n {
            c[i][j] /= denom;
            c[j][i] = c[i][j];
        }
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| McEstimate {
                    value: c[i][j],
                    std_err: ((c[i][i] * c[j][j] + c[i][j] * c[i][j]) / denom).sqrt(),
                    n: np,
                })
                .collect()
        })
        .collect())
}

/// Worst standardized deviation between an empirical and an analytic covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovComparison {
    pub max_abs_z: f64,
    pub at: Option<(usize, usize)>,
    /// Entries skipped because their standard error is zero.
    pub excluded: Vec<(usize, usize)>,
}

pub fn compare_cov(empirical: &[Vec<McEstimate>], analytic: &DMatrix<f64>) -> Result<CovComparison> {
    let n = empirical.len();
    if analytic.nrows() != n || analytic.ncols() != n || empirical.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("empirical {n}x{n} vs analytic {}x{}", analytic.nrows(), analytic.ncols())));
    }
    let mut out = CovComparison { max_abs_z: 0.0, at: None, excluded: vec![] };
    for i in 0..n {
        for j in 0..n {
            let e = empirical[i][j];
            if e.std_err == 0.0 {
                out.excluded.push((i, j));
                continue;
            }
            let z = ((e.value - analytic[(i, j)]) / e.std_err).abs();
            if out.at.is_none() || z > out.max_abs_z {
                out.max_abs_z = z;
                out.at = Some((i, j));
            }
        }
    }
    Ok(out)
}
