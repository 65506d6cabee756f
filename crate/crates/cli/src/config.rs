//! Run configuration: command-line flags merged over an optional flat JSON file.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use fracheat_core::{Error as CoreError, Form, KernelSpec, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Tabulate a covariance kernel on a grid.
    Cov,
    /// Run verification checks.
    Verify,
    /// Draw exact Gaussian sample paths.
    Sample,
    /// Monte Carlo covariance of the simulated SPDE.
    SpdeMc,
    /// Positive-definiteness scan over kernels and grid sizes.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    Bifbm,
    Swanson,
    Noise,
    Oracle,
    Solution,
    Lead,
    R1,
    Rx,
    Ry,
    Rz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CheckName {
    Decomposition,
    Forms,
    Law,
    Scaling,
    Limit,
    Increments,
    Holder,
    Psd,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormName {
    Primary,
    Ibp,
}

impl From<FormName> for Form {
    fn from(f: FormName) -> Form {
        match f {
            FormName::Primary => Form::Primary,
            FormName::Ibp => Form::Ibp,
        }
    }
}

/// Every setting is optional so that flags and the JSON file can be merged field by field.
#[derive(Debug, Clone, Default, PartialEq, Parser, Serialize, Deserialize)]
#[command(
    name = "fracheat",
    version,
    about = "Covariance kernels, verification and simulation for the fractional stochastic heat equation"
)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Flat JSON file with the same keys as the long flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,
    /// Hurst index, or a comma list for `verify` and `scan`.
    #[arg(long = "H", value_delimiter = ',')]
    #[serde(rename = "H", deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    /// Second bifractional index.
    #[arg(long = "K")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u8>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<FormName>,
    /// `start:end:count` (count points on (start, end]), a comma list, or `single:t,s`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Overrides the default tolerance of the selected check or the oracle.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckName>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// Diffusivity of the simulated equation.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Spatial evaluation point of the simulation.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Evaluation times of the simulation.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Matrix sizes for `scan`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

/// Invalid configuration, reported with the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid {field}: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

pub fn bad(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), reason: reason.into() }
}

impl From<CoreError> for ConfigError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParam { field, reason } => bad(field, reason),
            other => bad("config", other.to_string()),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad("config", format!("{}: {e}", path.display())))
    }

    /// Field-wise merge; values set on `self` win.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            config: self.config.or(base.config),
            kernel: self.kernel.or(base.kernel),
            h: self.h.or(base.h),
            k: self.k.or(base.k),
            d: self.d.or(base.d),
            form: self.form.or(base.form),
            grid: self.grid.or(base.grid),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            check: self.check.or(base.check),
            paths: self.paths.or(base.paths),
            horizon: self.horizon.or(base.horizon),
            nt: self.nt.or(base.nt),
            nx: self.nx.or(base.nx),
            half_width: self.half_width.or(base.half_width),
            c: self.c.or(base.c),
            x: self.x.or(base.x),
            times: self.times.or(base.times),
            sizes: self.sizes.or(base.sizes),
        }
    }

    /// Flags merged over the file named by `--config`, if any.
    pub fn resolve(flags: RunConfig) -> Result<RunConfig, ConfigError> {
        match &flags.config {
            Some(p) => {
                let file = Self::from_file(p)?;
                Ok(flags.over(file))
            }
            None => Ok(flags),
        }
    }

    pub fn command(&self) -> Result<Command, ConfigError> {
        self.command
            .ok_or_else(|| bad("command", "missing (give it as the first argument or as \"command\" in the config)"))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn d(&self) -> u8 {
        self.d.unwrap_or(1)
    }

    /// The single Hurst index of commands that take one.
    pub fn single_h(&self) -> Result<Option<f64>, ConfigError> {
        match self.h.as_deref() {
            None => Ok(None),
            Some([h]) => Ok(Some(*h)),
            Some(_) => Err(bad("H", "this command takes a single value")),
        }
    }

    /// Hurst indices for suites, defaulting to the standard list for the dimension.
    pub fn h_list(&self) -> Vec<f64> {
        match &self.h {
            Some(v) => v.clone(),
            None if self.d() == 3 => vec![0.8, 0.9, 0.95],
            None => vec![0.55, 0.65, 0.75, 0.85, 0.95],
        }
    }

    pub fn params(&self, h: f64) -> Result<ModelParams, ConfigError> {
        Ok(ModelParams::new(h, self.d())?)
    }

    /// Kernel spec from `kernel` with the given Hurst index.
    pub fn kernel_spec(&self, name: KernelName, h: Option<f64>) -> Result<KernelSpec, ConfigError> {
        let need_h = || h.ok_or_else(|| bad("H", "required by this kernel"));
        let form = self.form.map(Form::from).unwrap_or_default();
        let spec = match name {
            KernelName::Swanson => KernelSpec::Swanson,
            KernelName::Bifbm => KernelSpec::BifBm { h: need_h()?, k: self.k.unwrap_or(1.0) },
            KernelName::Noise => KernelSpec::Noise { h: need_h()? },
            KernelName::Oracle => {
                KernelSpec::SolutionOracle { params: self.params(need_h()?)?, tol: self.tol.unwrap_or(1e-10) }
            }
            KernelName::Solution => KernelSpec::Solution { params: self.params(need_h()?)? },
            KernelName::Lead => KernelSpec::LeadTerm { params: self.params(need_h()?)? },
            KernelName::R1 => KernelSpec::R1 { params: self.params(need_h()?)? },
            KernelName::Rx => KernelSpec::Rx { h: need_h()?, form },
            KernelName::Ry => KernelSpec::Ry { h: need_h()?, form },
            KernelName::Rz => KernelSpec::Rz { h: need_h()? },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::parse(self.grid.as_deref().unwrap_or("0:1:10"))
    }
}

/// Parsed `--grid` value.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Times(Vec<f64>),
    Single(f64, f64),
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad("grid", format!("'{x}' is not a number")));
        if let Some(rest) = s.strip_prefix("single:") {
            let parts: Vec<&str> = rest.split(',').collect();
            return match parts.as_slice() {
                [t, s] => Ok(GridSpec::Single(num(t)?, num(s)?)),
                _ => Err(bad("grid", "single:t,s needs exactly two times")),
            };
        }
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, n] = parts.as_slice() else {
                return Err(bad("grid", "expected start:end:count"));
            };
            let (a, b) = (num(a)?, num(b)?);
            let n: usize =
                n.trim().parse().map_err(|_| bad("grid", format!("count '{n}' is not a non-negative integer")))?;
            if !(b > a) {
                return Err(bad("grid", "end must exceed start"));
            }
            return Ok(GridSpec::Times(
                (1..=n).map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 }).collect(),
            ));
        }
        let times = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(GridSpec::Times(times))
    }

    /// The time list, rejecting the single-pair form.
    pub fn times(&self) -> Result<&[f64], ConfigError> {
        match self {
            GridSpec::Times(t) => Ok(t),
            GridSpec::Single(..) => Err(bad("grid", "this command needs a time grid, not a single pair")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(GridSpec::parse("0:1:4").unwrap(), GridSpec::Times(vec![0.25, 0.5, 0.75, 1.0]));
        assert_eq!(GridSpec::parse("0:1:0").unwrap(), GridSpec::Times(vec![]));
        assert_eq!(GridSpec::parse("0.5, 1").unwrap(), GridSpec::Times(vec![0.5, 1.0]));
        assert_eq!(GridSpec::parse("single:1,0").unwrap(), GridSpec::Single(1.0, 0.0));
        for bad in ["1:0:3", "0:1", "0:1:x", "a,b", "single:1"] {
            assert_eq!(GridSpec::parse(bad).unwrap_err().field, "grid", "{bad}");
        }
    }

    #[test]
    fn flags_win_over_file() {
        let file: RunConfig =
            serde_json::from_str(r#"{"command":"cov","kernel":"rx","H":0.6,"grid":"0:1:3","seed":5}"#).unwrap();
        let flags = RunConfig::try_parse_from(["fracheat", "--H", "0.75"]).unwrap();
        let m = flags.over(file);
        assert_eq!(m.command, Some(Command::Cov));
        assert_eq!(m.h, Some(vec![0.75]));
        assert_eq!(m.seed, Some(5));
        let list: RunConfig = serde_json::from_str(r#"{"H":[0.6,0.7]}"#).unwrap();
        assert_eq!(list.h_list(), vec![0.6, 0.7]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"hurst":0.6}"#).is_err());
    }

    #[test]
    fn kernel_validation_names_field() {
        let c = RunConfig { h: Some(vec![0.4]), ..Default::default() };
        assert_eq!(c.kernel_spec(KernelName::Rx, Some(0.4)).unwrap_err().field, "H");
        assert_eq!(c.kernel_spec(KernelName::Rz, None).unwrap_err().field, "H");
        assert!(c.kernel_spec(KernelName::Swanson, None).is_ok());
    }
}
