//! Command dispatch.

use std::path::PathBuf;

use serde::Serialize;

use fracheat_core::gp::{build_gram, sample_paths};
use fracheat_core::props::{
    check_decomposition, check_form_equivalence, check_holder, check_increment_bounds, check_law_identity,
    check_limit_half, check_scaling, check_swanson_limit, dyadic, grid_pairs, psd_scan, Scaled, TwoForm,
};
use fracheat_core::spde::mild_mc;
use fracheat_core::{Error as CoreError, Form, KernelSpec, SpdeConfig, TimeGrid, VerificationReport};

use crate::config::{bad, CheckName, Command, ConfigError, Format, GridSpec, RunConfig};
use crate::emit;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Compute(CoreError),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParam { .. } | CoreError::Domain(_) => RunError::Config(e.into()),
            other => RunError::Compute(other),
        }
    }
}

impl RunError {
    /// 2 for configuration errors, 3 for I/O, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io { .. } => 3,
            RunError::Compute(_) => 1,
        }
    }
}

/// Where the artifact went and whether every check in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub path: PathBuf,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct CovOutput {
    kernel: KernelSpec,
    rows: Vec<Entry>,
}

#[derive(Serialize)]
struct Entry {
    t: f64,
    s: f64,
    value: f64,
}

/// Validates the whole configuration, computes, and writes one artifact.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let command = cfg.command()?;
    let format = cfg.format();
    let (bytes, passed) = match command {
        Command::Cov => (cov(cfg, format)?, true),
        Command::Verify => reports_out(verify(cfg)?, format),
        Command::Sample => (sample(cfg, format)?, true),
        Command::SpdeMc => (spde(cfg, format)?, true),
        Command::Scan => reports_out(scan(cfg)?, format),
    };
    let stem = match command {
        Command::Cov => "cov",
        Command::Verify => "verify",
        Command::Sample => "sample",
        Command::SpdeMc => "spde-mc",
        Command::Scan => "scan",
    };
    let path = emit::output_path(cfg.out.as_deref(), stem, format.extension());
    emit::write_atomic(&path, &bytes).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(Outcome { path, passed })
}

fn reports_out(reports: Vec<VerificationReport>, format: Format) -> (Vec<u8>, bool) {
    let passed = reports.iter().all(|r| r.pass);
    let bytes = match format {
        Format::Csv => emit::reports_csv(&reports),
        Format::Json => emit::json(&reports),
    };
    (bytes, passed)
}

fn kernel(cfg: &RunConfig) -> Result<KernelSpec, ConfigError> {
    let name = cfg.kernel.ok_or_else(|| bad("kernel", "required by this command"))?;
    cfg.kernel_spec(name, cfg.single_h()?)
}

fn time_grid(cfg: &RunConfig) -> Result<TimeGrid, ConfigError> {
    Ok(TimeGrid::new(cfg.grid()?.times()?.to_vec())?)
}

fn cov(cfg: &RunConfig, format: Format) -> Result<Vec<u8>, RunError> {
    let k = kernel(cfg)?;
    let rows: Vec<(f64, f64, f64)> = match cfg.grid()? {
        GridSpec::Single(t, s) => vec![(t, s, k.eval(t, s)?)],
        GridSpec::Times(t) if t.is_empty() => vec![],
        GridSpec::Times(t) => {
            let g = build_gram(&k, &TimeGrid::new(t)?)?;
            let n = g.len();
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (g.times[i], g.times[j], g.entries[(i, j)]))
                .collect()
        }
    };
    Ok(match format {
        Format::Csv => emit::matrix_csv(&rows),
        Format::Json => emit::json(&CovOutput {
            kernel: k,
            rows: rows.into_iter().map(|(t, s, value)| Entry { t, s, value }).collect(),
        }),
    })
}

fn sample(cfg: &RunConfig, format: Format) -> Result<Vec<u8>, RunError> {
    let k = kernel(cfg)?;
    let g = build_gram(&k, &time_grid(cfg)?)?;
    let e = sample_paths(&g, cfg.paths.unwrap_or(1000), cfg.seed.unwrap_or(0))?;
    Ok(match format {
        Format::Csv => emit::paths_csv(&e),
        Format::Json => emit::json(&e),
    })
}

fn spde(cfg: &RunConfig, format: Format) -> Result<Vec<u8>, RunError> {
    let horizon = cfg.horizon.unwrap_or(1.0);
    let sc = SpdeConfig {
        h: cfg.single_h()?.unwrap_or(0.75),
        horizon,
        nt: cfg.nt.unwrap_or(256),
        half_width: cfg.half_width.unwrap_or(8.0),
        nx: cfg.nx.unwrap_or(1024),
        c: cfg.c.unwrap_or(fracheat_core::spde::DEFAULT_DIFFUSIVITY),
        n_paths: cfg.paths.unwrap_or(4000),
        seed: cfg.seed.unwrap_or(0),
    };
    sc.validate()?;
    let times = cfg.times.clone().unwrap_or_else(|| vec![horizon, 0.5 * horizon]);
    let report = mild_mc(&sc, &times, cfg.x.unwrap_or(0.0))?;
    Ok(match format {
        Format::Csv => emit::spde_csv(&report),
        Format::Json => emit::json(&report),
    })
}

/// Kernels covered by positive-definiteness scans at Hurst index `h`.
pub fn standard_kernels(h: f64, d: u8) -> Result<Vec<KernelSpec>, ConfigError> {
    let mut ks = vec![
        KernelSpec::Swanson,
        KernelSpec::BifBm { h: 0.5, k: 0.5 },
        KernelSpec::Solution { params: fracheat_core::ModelParams::new(h, d)? },
        KernelSpec::Rx { h, form: Form::Ibp },
        KernelSpec::Ry { h, form: Form::Ibp },
    ];
    if h > 0.75 {
        ks.push(KernelSpec::Rz { h });
    }
    Ok(ks)
}

fn scan(cfg: &RunConfig) -> Result<Vec<VerificationReport>, RunError> {
    let sizes = cfg.sizes.clone().unwrap_or_else(|| vec![16, 32, 64]);
    let tol = cfg.tol.unwrap_or(1e-10);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let mut kernels = vec![];
    for h in cfg.h_list() {
        match cfg.kernel {
            Some(name) => kernels.push(cfg.kernel_spec(name, Some(h))?),
            None => kernels.extend(standard_kernels(h, cfg.d())?),
        }
    }
    kernels.dedup();
    Ok(psd_scan(&kernels, &sizes, horizon, tol)?)
}

/// Reports of the selected verification checks, in a fixed order.
pub fn verify(cfg: &RunConfig) -> Result<Vec<VerificationReport>, RunError> {
    let check = cfg.check.unwrap_or(CheckName::All);
    let on = |c: CheckName| check == c || check == CheckName::All;
    let grid = time_grid(cfg)?;
    let d = cfg.d();
    let hs = cfg.h_list();
    for &h in &hs {
        cfg.params(h)?;
    }
    let tol = |default: f64| cfg.tol.unwrap_or(default);
    let rel_tol = if d == 3 { 1e-5 } else { 1e-6 };
    let mut out = vec![];

    if on(CheckName::Decomposition) {
        for &h in &hs {
            out.push(check_decomposition(&cfg.params(h)?, &grid, tol(rel_tol)));
        }
    }
    if on(CheckName::Forms) {
        for &h in &hs {
            out.push(check_form_equivalence(TwoForm::Rx, h, &grid, tol(1e-8))?);
            out.push(check_form_equivalence(TwoForm::Ry, h, &grid, tol(1e-8))?);
        }
    }
    if on(CheckName::Law) {
        for &h in &hs {
            out.push(check_law_identity(&cfg.params(h)?, &grid, tol(rel_tol)));
        }
    }
    if on(CheckName::Scaling) {
        let pairs = grid_pairs(&grid);
        let kinds: &[Scaled] = if d == 3 { &[Scaled::Rz] } else { &[Scaled::Rx, Scaled::Ry] };
        for &h in &hs {
            for &kind in kinds {
                for c in [0.5, 2.0, 10.0] {
                    out.push(check_scaling(kind, h, c, &pairs, tol(1e-6))?);
                }
            }
        }
    }
    if on(CheckName::Limit) {
        let reps = check_limit_half(&[0.1, 0.05, 0.02, 0.01], &grid)?;
        out.extend(reps.into_iter().filter(|r| r.check != "limit_rx"));
        out.extend(check_limit_half(&[1e-3], &grid)?.into_iter().filter(|r| r.check == "limit_rx"));
        out.push(check_swanson_limit(0.505, &grid, 0.02)?);
    }
    if on(CheckName::Increments) {
        let pairs: Vec<_> = grid_pairs(&grid).into_iter().filter(|(t, s)| t > s).collect();
        for &h in &hs {
            out.extend(check_increment_bounds(h, &pairs)?);
        }
    }
    if on(CheckName::Holder) {
        let t = grid.horizon();
        let deltas = dyadic(6, 14);
        out.push(check_holder(&KernelSpec::BifBm { h: 0.5, k: 0.5 }, t, &deltas, 0.5, tol(0.05))?);
        for &h in &hs {
            for k in [KernelSpec::Rx { h, form: Form::Ibp }, KernelSpec::Ry { h, form: Form::Ibp }] {
                out.push(check_holder(&k, t, &deltas, 0.5, tol(0.05))?);
            }
        }
    }
    if on(CheckName::Psd) {
        let mut kernels = vec![];
        for &h in &hs {
            kernels.extend(standard_kernels(h, d)?);
        }
        kernels.dedup();
        out.extend(psd_scan(&kernels, &[grid.len()], grid.horizon(), tol(1e-10))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("fracheat").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn verify_selects_one_check() {
        let r = verify(&parse(&["verify", "--check", "decomposition", "--d", "1", "--H", "0.75", "--grid", "0:1:3"]))
            .unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pass);
    }

    #[test]
    fn missing_kernel_is_config_error() {
        let e = cov(&parse(&["cov"]), Format::Csv).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e =
            cov(&parse(&["cov", "--kernel", "rx", "--H", "0.75", "--grid", "single:-1,0"]), Format::Csv).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
