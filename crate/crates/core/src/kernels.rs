//! Covariance functions of the model and of the processes in its decomposition.
//!
//! Every evaluator is symmetric in `(t, s)` and orders its arguments internally. Integrals run
//! over `a ∈ [0, s]` with `t >= s`; when `t == s` the `(t - a)` factor is folded into the
//! endpoint weight so no singularity is left inside the integrand.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{
    integrate2d_singular, integrate_graded, integrate_graded_offsets, Endpoint, Integral2d, DEFAULT_NODES,
};
use crate::specfun::{ModelParams, KAPPA};

/// Which of the two integral representations of R^X / R^Y to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Primary,
    /// Integrated-by-parts representation; milder near `a = s`.
    #[default]
    Ibp,
}

/// One covariance function together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    BifBm {
        h: f64,
        k: f64,
    },
    Swanson,
    /// Time part of the noise covariance (spatial factor taken as 1).
    Noise {
        h: f64,
    },
    SolutionOracle {
        params: ModelParams,
        tol: f64,
    },
    Solution {
        params: ModelParams,
    },
    LeadTerm {
        params: ModelParams,
    },
    R1 {
        params: ModelParams,
    },
    Rx {
        h: f64,
        form: Form,
    },
    Ry {
        h: f64,
        form: Form,
    },
    Rz {
        h: f64,
    },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::BifBm { h, k } => check_bifbm(h, k),
            KernelSpec::Swanson => Ok(()),
            KernelSpec::Noise { h } => {
                if h > 0.0 && h < 1.0 {
                    Ok(())
                } else {
                    Err(invalid("H", format!("{h} is outside (0, 1)")))
                }
            }
            KernelSpec::SolutionOracle { tol, .. } => {
                if tol > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("tol", "must be positive"))
                }
            }
            KernelSpec::Solution { .. } | KernelSpec::LeadTerm { .. } | KernelSpec::R1 { .. } => Ok(()),
            KernelSpec::Rx { h, .. } | KernelSpec::Ry { h, .. } => ModelParams::new(h, 1).map(|_| ()),
            KernelSpec::Rz { h } => ModelParams::new(h, 3).map(|_| ()),
        }
    }

    /// Evaluates the kernel; `t, s >= 0`.
    pub fn eval(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(Error::Domain(format!("times must be non-negative, got ({t}, {s})")));
        }
        match *self {
            KernelSpec::BifBm { h, k } => bifbm_cov(h, k, t, s),
            KernelSpec::Swanson => Ok(swanson_cov(t, s)),
            KernelSpec::Noise { h } => Ok(noise_cov(h, t, s, 1.0, 1.0)),
            KernelSpec::SolutionOracle { params, tol } => {
                let r = solution_cov_oracle(&params, t, s, tol);
                if r.converged {
                    Ok(r.value)
                } else {
                    Err(Error::Domain(format!(
                        "oracle did not reach tol {tol:e} at ({t}, {s}); estimate {} ± {:e}",
                        r.value, r.err_est
                    )))
                }
            }
            KernelSpec::Solution { params } => Ok(solution_cov(&params, t, s)),
            KernelSpec::LeadTerm { params } => Ok(lead_term(&params, t, s)),
            KernelSpec::R1 { params } => Ok(r1(&params, t, s)),
            KernelSpec::Rx { h, form } => rx(h, t, s, form),
            KernelSpec::Ry { h, form } => ry(h, t, s, form),
            KernelSpec::Rz { h } => rz(h, t, s),
        }
    }

    /// Short label used in reports and file names.
    pub fn label(&self) -> String {
        match *self {
            KernelSpec::BifBm { h, k } => format!("bifbm(H={h},K={k})"),
            KernelSpec::Swanson => "swanson".into(),
            KernelSpec::Noise { h } => format!("noise(H={h})"),
            KernelSpec::SolutionOracle { params, .. } => format!("oracle(H={},d={})", params.h(), params.d()),
            KernelSpec::Solution { params } => format!("solution(H={},d={})", params.h(), params.d()),
            KernelSpec::LeadTerm { params } => format!("lead(H={},d={})", params.h(), params.d()),
            KernelSpec::R1 { params } => format!("r1(H={},d={})", params.h(), params.d()),
            KernelSpec::Rx { h, .. } => format!("rx(H={h})"),
            KernelSpec::Ry { h, .. } => format!("ry(H={h})"),
            KernelSpec::Rz { h } => format!("rz(H={h})"),
        }
    }
}

fn check_bifbm(h: f64, k: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(invalid("H", format!("{h} is outside (0, 1)")));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(invalid("K", format!("{k} is outside (0, 1]")));
    }
    Ok(())
}

fn ordered(t: f64, s: f64) -> (f64, f64) {
    if t >= s {
        (t, s)
    } else {
        (s, t)
    }
}

/// `∫_0^s (s-a)^exp f(a, s-a) da` with an optional near singularity at `a = s + near`.
fn right_weighted(f: impl Fn(f64, f64) -> f64, s: f64, exp: f64, near: Option<f64>) -> f64 {
    let right = Endpoint { exp, near };
    integrate_graded_offsets(|a, _, sa| f(a, sa), 0.0, s, Endpoint::REGULAR, right, DEFAULT_NODES)
}

/// Bifractional Brownian motion covariance 2^-K ((t^2H + s^2H)^K - |t-s|^2HK).
pub fn bifbm_cov(h: f64, k: f64, t: f64, s: f64) -> Result<f64> {
    check_bifbm(h, k)?;
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain(format!("times must be non-negative, got ({t}, {s})")));
    }
    let sum = t.powf(2.0 * h) + s.powf(2.0 * h);
    Ok(2f64.powf(-k) * (sum.powf(k) - (t - s).abs().powf(2.0 * h * k)))
}

/// Covariance of the solution driven by space-time white noise, (sqrt(t+s) - sqrt|t-s|) / sqrt(2 pi).
pub fn swanson_cov(t: f64, s: f64) -> f64 {
    2.0 * KAPPA * ((t + s).sqrt() - (t - s).abs().sqrt())
}

/// Noise covariance ½(t^2H + s^2H - |t-s|^2H) (x ∧ y).
pub fn noise_cov(h: f64, t: f64, s: f64, x: f64, y: f64) -> f64 {
    0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h)) * x.min(y)
}

/// Solution covariance from the defining double integral, (alpha_H / sqrt(2 pi)) times
/// `∫_0^t ∫_0^s |u-v|^(2H-2) (t+s-u-v)^(-d/2)`.
pub fn solution_cov_oracle(p: &ModelParams, t: f64, s: f64, tol: f64) -> Integral2d {
    let scale = 2.0 * KAPPA * p.constants().alpha_h;
    let r = integrate2d_singular(p, t, s, tol);
    Integral2d { value: scale * r.value, err_est: scale * r.err_est, ..r }
}

/// Leading term c0_sq ((t+s)^(2H-d/2) - |t-s|^(2H-d/2)).
pub fn lead_term(p: &ModelParams, t: f64, s: f64) -> f64 {
    let (t, s) = ordered(t, s);
    if s <= 0.0 {
        return 0.0;
    }
    let e = 2.0 * p.h() - f64::from(p.d()) / 2.0;
    p.constants().c0_sq * ((t + s).powf(e) - (t - s).powf(e))
}

/// Remainder of the decomposition: solution covariance minus the leading term.
pub fn r1(p: &ModelParams, t: f64, s: f64) -> f64 {
    let (t, s) = ordered(t, s);
    if s <= 0.0 {
        return 0.0;
    }
    let c = p.constants();
    let g = 2.0 * p.h() - 2.0;
    let q = 1.0 - f64::from(p.d()) / 2.0;
    let (d, tp) = (t - s, t + s);
    let n = DEFAULT_NODES;
    let reg = Endpoint::REGULAR;

    let a1 = integrate_graded(|a| (tp - a).powf(q), 0.0, s, Endpoint::power(g), reg.near(t), n);
    let (a2, b1) = if d > 0.0 {
        (
            integrate_graded(|a| (d + a).powf(q), 0.0, s, Endpoint::power(g).near(d), reg, n),
            right_weighted(|_, sa| (d + sa).powf(g), s, q, Some(d)),
        )
    } else {
        let e = g + q + 1.0;
        (s.powf(e) / e, s.powf(e) / e)
    };
    let b2 = integrate_graded(|a| (t + a).powf(g), 0.0, s, reg.near(t), Endpoint::power(q), n);
    KAPPA * c.alpha_h * c.c_d * (a1 - a2 - b1 - b2)
}

/// Covariance of the decomposition's X process (d = 1).
pub fn rx(h: f64, t: f64, s: f64, form: Form) -> Result<f64> {
    ModelParams::new(h, 1)?;
    Ok(rx_unchecked(h, t, s, form))
}

pub(crate) fn rx_unchecked(h: f64, t: f64, s: f64, form: Form) -> f64 {
    let (t, s) = ordered(t, s);
    if s <= 0.0 {
        return 0.0;
    }
    let d = t - s;
    match form {
        Form::Primary => {
            let g = 2.0 * h - 2.0;
            let v = if d > 0.0 {
                right_weighted(|a, sa| 2.0 * a / ((t + a).sqrt() + (d + sa).sqrt()), s, g, Some(d))
            } else {
                right_weighted(|a, _| (t + a).sqrt(), s, g, None) - right_weighted(|_, _| 1.0, s, g + 0.5, None)
            };
            2.0 * KAPPA * h * (2.0 * h - 1.0) * v
        }
        Form::Ibp => {
            let e = 2.0 * h - 1.0;
            let v = if d > 0.0 {
                right_weighted(|a, sa| (t + a).powf(-0.5) + (d + sa).powf(-0.5), s, e, Some(d))
            } else {
                right_weighted(|a, _| (t + a).powf(-0.5), s, e, None) + right_weighted(|_, _| 1.0, s, e - 0.5, None)
            };
            KAPPA * h * v
        }
    }
}

/// Covariance of the decomposition's Y process (d = 1).
pub fn ry(h: f64, t: f64, s: f64, form: Form) -> Result<f64> {
    ModelParams::new(h, 1)?;
    Ok(ry_unchecked(h, t, s, form))
}

pub(crate) fn ry_unchecked(h: f64, t: f64, s: f64, form: Form) -> f64 {
    let (t, s) = ordered(t, s);
    if s <= 0.0 {
        return 0.0;
    }
    let d = t - s;
    match form {
        Form::Primary => {
            let g = 2.0 * h - 2.0;
            let v = if d > 0.0 {
                right_weighted(|a, sa| (t + a).powf(g) + (d + sa).powf(g), s, 0.5, Some(d))
            } else {
                right_weighted(|a, _| (t + a).powf(g), s, 0.5, None) + right_weighted(|_, _| 1.0, s, g + 0.5, None)
            };
            2.0 * KAPPA * h * (2.0 * h - 1.0) * v
        }
        Form::Ibp => {
            let e = 2.0 * h - 1.0;
            let v = if d > 0.0 {
                right_weighted(|a, sa| (t + a).powf(e) - (d + sa).powf(e), s, -0.5, Some(d))
            } else {
                right_weighted(|a, _| (t + a).powf(e), s, -0.5, None) - right_weighted(|_, _| 1.0, s, e - 0.5, None)
            };
            KAPPA * h * v
        }
    }
}

/// The two non-negative summands of the d = 3 remainder covariance.
pub fn rz_parts(h: f64, t: f64, s: f64) -> Result<(f64, f64)> {
    ModelParams::new(h, 3)?;
    Ok(rz_parts_unchecked(h, t, s))
}

fn rz_parts_unchecked(h: f64, t: f64, s: f64) -> (f64, f64) {
    let (t, s) = ordered(t, s);
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    let g = 2.0 * h - 2.0;
    let d = t - s;
    let (first, second) = if d > 0.0 {
        (
            // (t-a)^(-1/2) - (t+a)^(-1/2) without cancellation
            right_weighted(
                |a, sa| 2.0 * a / (((d + sa) * (t + a)).sqrt() * ((t + a).sqrt() + (d + sa).sqrt())),
                s,
                g,
                Some(d),
            ),
            right_weighted(|a, sa| (t + a).powf(g) + (d + sa).powf(g), s, -0.5, Some(d)),
        )
    } else {
        let folded = right_weighted(|_, _| 1.0, s, g - 0.5, None);
        (
            folded - right_weighted(|a, _| (t + a).powf(-0.5), s, g, None),
            right_weighted(|a, _| (t + a).powf(g), s, -0.5, None) + folded,
        )
    };
    let c = 2.0 * KAPPA * h * (2.0 * h - 1.0);
    (c * first, c * second)
}

/// Covariance of the decomposition's Z process (d = 3).
pub fn rz(h: f64, t: f64, s: f64) -> Result<f64> {
    let (a, b) = rz_parts(h, t, s)?;
    Ok(a + b)
}

/// Solution covariance as leading term plus remainder.
pub fn solution_cov(p: &ModelParams, t: f64, s: f64) -> f64 {
    lead_term(p, t, s) + r1(p, t, s)
}
