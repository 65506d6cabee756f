//! Numerical verification of the structural identities: decomposition, integral forms,
//! law identities at covariance level, scaling, the `H -> 1/2` limit, increment bounds,
//! Hölder exponents and positive definiteness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{audit_psd, build_gram, TimeGrid};
use crate::kernels::{
    lead_term, rx_unchecked, ry_unchecked, rz, solution_cov, solution_cov_oracle, swanson_cov, Form, KernelSpec,
};
use crate::specfun::{beta, ModelParams, KAPPA};

/// Outcome of one check: `pass` holds exactly when the measured error is within `tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    #[serde(rename = "H")]
    pub h: f64,
    pub d: Option<u8>,
    pub worst_abs: f64,
    pub worst_rel: f64,
    /// Where the worst error occurred, when the check is located on the grid.
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub pass: bool,
    pub tolerance: f64,
    /// Whether `worst_rel` (rather than `worst_abs`) is compared with `tolerance`.
    pub relative: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    seen: usize,
}

impl PartialEq for VerificationReport {
    fn eq(&self, o: &Self) -> bool {
        (&self.check, self.h, self.d, self.worst_abs, self.worst_rel, self.t, self.s)
            == (&o.check, o.h, o.d, o.worst_abs, o.worst_rel, o.t, o.s)
            && (self.pass, self.tolerance, self.relative, &self.notes) == (o.pass, o.tolerance, o.relative, &o.notes)
    }
}

impl VerificationReport {
    fn new(check: impl Into<String>, h: f64, d: Option<u8>, tolerance: f64, relative: bool) -> Self {
        Self {
            check: check.into(),
            h,
            d,
            worst_abs: 0.0,
            worst_rel: 0.0,
            t: None,
            s: None,
            pass: true,
            tolerance,
            relative,
            notes: vec![],
            seen: 0,
        }
    }

    fn measured(&self) -> f64 {
        if self.relative {
            self.worst_rel
        } else {
            self.worst_abs
        }
    }

    // Keeps the worst (abs, rel) pair by the comparison metric and refreshes `pass`.
    fn record(&mut self, abs: f64, rel: f64, t: f64, s: f64) {
        self.record_at(abs, rel, Some(t), Some(s));
    }

    fn record_at(&mut self, abs: f64, rel: f64, t: Option<f64>, s: Option<f64>) {
        let key = if self.relative { rel } else { abs };
        if self.seen == 0 || key > self.measured() || key.is_nan() {
            self.worst_abs = abs;
            self.worst_rel = rel;
            self.t = t;
            self.s = s;
        }
        self.seen += 1;
        self.pass = self.measured() <= self.tolerance;
    }

    fn fail(&mut self, note: impl Into<String>) {
        self.pass = false;
        self.notes.push(note.into());
    }
}

/// Unordered pairs `(t_i, t_j)` with `i >= j`.
pub fn grid_pairs(grid: &TimeGrid) -> Vec<(f64, f64)> {
    let t = grid.times();
    (0..t.len()).flat_map(|i| (0..=i).map(move |j| (t[i], t[j]))).collect()
}

fn rel(abs: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        abs
    } else {
        abs / scale.abs()
    }
}

/// Oracle double integral against leading term plus remainder.
pub fn check_decomposition(p: &ModelParams, grid: &TimeGrid, tol: f64) -> VerificationReport {
    let oracle_tol = (tol * 1e-3).max(1e-12);
    let mut rep = VerificationReport::new("decomposition", p.h(), Some(p.d()), tol, true);
    let rows: Vec<_> = grid_pairs(grid)
        .into_par_iter()
        .map(|(t, s)| (t, s, solution_cov_oracle(p, t, s, oracle_tol), solution_cov(p, t, s)))
        .collect();
    for (t, s, o, fast) in rows {
        if !o.converged {
            rep.fail(format!("oracle not converged at ({t}, {s}): err {:e}", o.err_est));
        }
        let abs = (o.value - fast).abs();
        rep.record(abs, rel(abs, o.value), t, s);
        if !o.converged {
            rep.pass = false;
        }
    }
    rep
}

/// The kernels with two integral representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoForm {
    Rx,
    Ry,
}

/// Maximum absolute gap between the primary and integrated-by-parts forms, including `s = 0`.
pub fn check_form_equivalence(kind: TwoForm, h: f64, grid: &TimeGrid, tol: f64) -> Result<VerificationReport> {
    ModelParams::new(h, 1)?;
    let f = match kind {
        TwoForm::Rx => rx_unchecked,
        TwoForm::Ry => ry_unchecked,
    };
    let name = match kind {
        TwoForm::Rx => "form_equivalence_rx",
        TwoForm::Ry => "form_equivalence_ry",
    };
    let mut pairs = grid_pairs(grid);
    pairs.extend(grid.times().iter().map(|&t| (t, 0.0)));
    let mut rep = VerificationReport::new(name, h, Some(1), tol, false);
    let rows: Vec<_> =
        pairs.into_par_iter().map(|(t, s)| (t, s, f(h, t, s, Form::Primary), f(h, t, s, Form::Ibp))).collect();
    for (t, s, a, b) in rows {
        let abs = (a - b).abs();
        rep.record(abs, rel(abs, b), t, s);
    }
    Ok(rep)
}

/// `R + R^Y = Lead + R^X` for d = 1 and `R - Lead = R^Z` for d = 3, with R from the oracle.
pub fn check_law_identity(p: &ModelParams, grid: &TimeGrid, tol: f64) -> VerificationReport {
    let oracle_tol = (tol * 1e-3).max(1e-12);
    let h = p.h();
    let mut rep = VerificationReport::new("law_identity", h, Some(p.d()), tol, true);
    let rows: Vec<_> = grid_pairs(grid)
        .into_par_iter()
        .map(|(t, s)| {
            let o = solution_cov_oracle(p, t, s, oracle_tol);
            let lead = lead_term(p, t, s);
            let (lhs, rhs) = if p.d() == 1 {
                (o.value + ry_unchecked(h, t, s, Form::Ibp), lead + rx_unchecked(h, t, s, Form::Ibp))
            } else {
                (o.value - lead, rz(h, t, s).expect("d = 3 params imply H > 3/4"))
            };
            (t, s, o.converged, lhs, rhs)
        })
        .collect();
    for (t, s, ok, lhs, rhs) in rows {
        let abs = (lhs - rhs).abs();
        rep.record(abs, rel(abs, rhs), t, s);
        if !ok {
            rep.fail(format!("oracle not converged at ({t}, {s})"));
        }
    }
    rep
}

/// Kernels with a covariance-scaling law `K(ct, cs) = c^e K(t, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaled {
    Rx,
    Ry,
    Rz,
}

impl Scaled {
    /// `2H - 1/2` for R^X and R^Y, `2H - 3/2` for R^Z.
    pub fn exponent(self, h: f64) -> f64 {
        match self {
            Scaled::Rx | Scaled::Ry => 2.0 * h - 0.5,
            Scaled::Rz => 2.0 * h - 1.5,
        }
    }

    fn eval(self, h: f64, t: f64, s: f64) -> Result<f64> {
        match self {
            Scaled::Rx => crate::kernels::rx(h, t, s, Form::Ibp),
            Scaled::Ry => crate::kernels::ry(h, t, s, Form::Ibp),
            Scaled::Rz => rz(h, t, s),
        }
    }
}

/// Fitted exponent `log(K(ct,cs)/K(t,s)) / log c` against the expected one.
pub fn check_scaling(kind: Scaled, h: f64, c: f64, pairs: &[(f64, f64)], tol: f64) -> Result<VerificationReport> {
    if !(c > 0.0 && c != 1.0) {
        return Err(Error::Domain(format!("scale factor {c} must be positive and different from 1")));
    }
    let name = match kind {
        Scaled::Rx => "scaling_rx",
        Scaled::Ry => "scaling_ry",
        Scaled::Rz => "scaling_rz",
    };
    let d = if kind == Scaled::Rz { 3 } else { 1 };
    let want = kind.exponent(h);
    let mut rep = VerificationReport::new(format!("{name}(c={c})"), h, Some(d), tol, false);
    for &(t, s) in pairs {
        let base = kind.eval(h, t, s)?;
        let scaled = kind.eval(h, c * t, c * s)?;
        let fitted = (scaled / base).ln() / c.ln();
        let abs = (fitted - want).abs();
        rep.record(abs, rel(abs, want), t, s);
    }
    if kind == Scaled::Rz {
        rep.notes.push(format!(
            "exponent 2H-3/2 = {want}; the self-similarity label 2H-1/2 = {} does not describe this covariance",
            2.0 * h - 0.5
        ));
    }
    Ok(rep)
}

/// Behaviour as `H = 1/2 + eps` decreases to 1/2: one coefficient report and one R^X report
/// per `eps`, plus a report that `sup |R^Y|` strictly decreases along the list.
pub fn check_limit_half(eps: &[f64], grid: &TimeGrid) -> Result<Vec<VerificationReport>> {
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).expect("finite eps"));
    let pairs = grid_pairs(grid);
    let mut out = vec![];
    for &e in &eps {
        let h = 0.5 + e;
        ModelParams::new(h, 1)?;
        let v = h * (2.0 * h - 1.0) * beta(2.0 * h - 1.0, 1.5)?;
        let mut rep = VerificationReport::new("limit_coefficient", h, Some(1), 0.6 * e, false);
        rep.record_at((v - 0.5).abs(), (v - 0.5).abs() / 0.5, None, None);
        out.push(rep);
    }

    let sups: Vec<(f64, f64, f64, f64)> = eps
        .iter()
        .map(|&e| {
            let h = 0.5 + e;
            pairs
                .par_iter()
                .map(|&(t, s)| (ry_unchecked(h, t, s, Form::Ibp).abs(), t, s))
                .collect::<Vec<_>>()
                .into_iter()
                .fold((h, 0.0, f64::NAN, f64::NAN), |acc, (v, t, s)| if v > acc.1 { (h, v, t, s) } else { acc })
        })
        .collect();
    // worst ratio of consecutive sups; strictly below 1 means strictly decreasing
    let mut rep =
        VerificationReport::new("limit_ry_sup_decreasing", sups.last().map_or(0.5, |x| x.0), Some(1), 1.0, false);
    for w in sups.windows(2) {
        let ratio = w[1].1 / w[0].1;
        rep.record(ratio, ratio - 1.0, w[1].2, w[1].3);
    }
    rep.pass = sups.len() >= 2 && rep.worst_abs < 1.0;
    rep.notes = sups.iter().map(|(h, v, _, _)| format!("H={h}: sup|R^Y|={v:.6e}")).collect();
    out.push(rep);

    for &e in &eps {
        let h = 0.5 + e;
        let mut rep = VerificationReport::new("limit_rx", h, Some(1), 10.0 * e, false);
        let rows: Vec<_> = pairs
            .par_iter()
            .map(|&(t, s)| {
                let limit = KAPPA * ((t + s).sqrt() - (t - s).abs().sqrt());
                (t, s, rx_unchecked(h, t, s, Form::Ibp), limit)
            })
            .collect();
        for (t, s, v, limit) in rows {
            let abs = (v - limit).abs();
            rep.record(abs, rel(abs, limit), t, s);
        }
        out.push(rep);
    }
    Ok(out)
}

/// Relative gap between the solution covariance and the white-noise covariance.
pub fn check_swanson_limit(h: f64, grid: &TimeGrid, tol: f64) -> Result<VerificationReport> {
    let p = ModelParams::new(h, 1)?;
    let mut rep = VerificationReport::new("limit_swanson", h, Some(1), tol, true);
    let rows: Vec<_> = grid_pairs(grid).into_par_iter().map(|(t, s)| (t, s, solution_cov(&p, t, s))).collect();
    for (t, s, v) in rows {
        let w = swanson_cov(t, s);
        let abs = (v - w).abs();
        rep.record(abs, rel(abs, w), t, s);
    }
    Ok(rep)
}

/// The three pieces of `E|X_t - X_s|^2 / kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementTerms {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

fn graded(f: impl Fn(f64, f64) -> f64, a: f64, b: f64, exp: f64, near: Option<f64>) -> f64 {
    use crate::quadrature::{integrate_graded_offsets, Endpoint, DEFAULT_NODES};
    integrate_graded_offsets(|x, _, to_b| f(x, to_b), a, b, Endpoint::REGULAR, Endpoint { exp, near }, DEFAULT_NODES)
}

/// `T1 = H ∫_s^t (t-a)^(2H-1) g_t(a) da`, `T2 = H ∫_0^s ((t-a)^(2H-1) - (s-a)^(2H-1)) g_t(a) da`,
/// `T3 = H ∫_0^s (s-a)^(2H-1) (g_s(a) - g_t(a)) da` with `g_x(a) = (x+a)^(-1/2) + (x-a)^(-1/2)`.
pub fn increment_terms(h: f64, t: f64, s: f64) -> Result<IncrementTerms> {
    ModelParams::new(h, 1)?;
    if !(t > s && s > 0.0) {
        return Err(Error::Domain(format!("increment terms need t > s > 0, got ({t}, {s})")));
    }
    let e = 2.0 * h - 1.0;
    let d = t - s;
    let t1 = h * (graded(|a, _| (t + a).powf(-0.5), s, t, e, None) + d.powf(e + 0.5) / (e + 0.5));
    // (t-a)^e g_t(a) on [0, s]: near singularity of (t-a)^(-1/2) at distance d past s
    let t2a = graded(|a, sa| (d + sa).powf(e) * ((t + a).powf(-0.5) + (d + sa).powf(-0.5)), 0.0, s, 0.0, Some(d));
    let shared = graded(|a, sa| (t + a).powf(-0.5) + (d + sa).powf(-0.5), 0.0, s, e, Some(d));
    let own = graded(|a, _| (s + a).powf(-0.5), 0.0, s, e, None) + s.powf(e + 0.5) / (e + 0.5);
    Ok(IncrementTerms { t1, t2: h * (t2a - shared), t3: h * (own - shared) })
}

/// Bounds on the increment terms at each pair; violations are positive `worst_abs`.
///
/// Reported checks: `t1_lower` (½Δ^(2H-1/2)), `t1_upper` (2H/(2H-1/2) Δ^(2H-1/2)),
/// `t1_lower_h_over_2h_minus_1`, `t2_bound_h_half` ((H/2) Δ^(2H-1/2)), `t3_bound_h` (H Δ^(1/2)),
/// `t2_bound_sharp` (2H Δ^(2H-1) (sqrt(t+s) - sqrt(t-s))), `t3_bound_sharp` (2H s^(2H-1) Δ^(1/2))
/// and `increment_identity` (T1+T2+T3 against the R^X increment variance).
pub fn check_increment_bounds(h: f64, pairs: &[(f64, f64)]) -> Result<Vec<VerificationReport>> {
    type Bound = (&'static str, bool, fn(f64, f64, f64, &IncrementTerms) -> (f64, f64));
    // (name, is_lower, |h, t, s, terms| (value, bound))
    let bounds: [Bound; 7] = [
        ("t1_lower", true, |h, t, s, x| (x.t1, 0.5 * (t - s).powf(2.0 * h - 0.5))),
        ("t1_upper", false, |h, t, s, x| (x.t1, 2.0 * h / (2.0 * h - 0.5) * (t - s).powf(2.0 * h - 0.5))),
        ("t1_lower_h_over_2h_minus_1", true, |h, t, s, x| (x.t1, h / (2.0 * h - 1.0) * (t - s).powf(2.0 * h - 0.5))),
        ("t2_bound_h_half", false, |h, t, s, x| (x.t2, 0.5 * h * (t - s).powf(2.0 * h - 0.5))),
        ("t3_bound_h", false, |h, t, s, x| (x.t3, h * (t - s).sqrt())),
        ("t2_bound_sharp", false, |h, t, s, x| {
            (x.t2, 2.0 * h * (t - s).powf(2.0 * h - 1.0) * ((t + s).sqrt() - (t - s).sqrt()))
        }),
        ("t3_bound_sharp", false, |h, t, s, x| (x.t3, 2.0 * h * s.powf(2.0 * h - 1.0) * (t - s).sqrt())),
    ];
    let terms = pairs.iter().map(|&(t, s)| increment_terms(h, t, s)).collect::<Result<Vec<_>>>()?;
    let mut out: Vec<VerificationReport> = bounds
        .iter()
        .map(|(name, lower, f)| {
            let mut rep = VerificationReport::new(*name, h, Some(1), 0.0, false);
            for (&(t, s), x) in pairs.iter().zip(&terms) {
                let (v, b) = f(h, t, s, x);
                let excess = if *lower { b - v } else { v - b };
                rep.record(excess, rel(excess, b), t, s);
            }
            rep
        })
        .collect();
    let mut ident = VerificationReport::new("increment_identity", h, Some(1), 1e-8, false);
    for (&(t, s), x) in pairs.iter().zip(&terms) {
        let r = |a: f64, b: f64| rx_unchecked(h, a, b, Form::Ibp) / KAPPA;
        let var = r(t, t) - 2.0 * r(t, s) + r(s, s);
        let abs = (x.t1 + x.t2 + x.t3 - var).abs();
        ident.record(abs, rel(abs, var), t, s);
    }
    out.push(ident);
    Ok(out)
}

/// Least-squares fit of `log V(Δ)` on `log Δ`, `V(Δ) = K(t,t) - 2K(t,t-Δ) + K(t-Δ,t-Δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn holder_slope(kernel: &KernelSpec, t: f64, deltas: &[f64]) -> Result<HolderFit> {
    if deltas.len() < 3 {
        return Err(Error::DegenerateFit(deltas.len()));
    }
    let ktt = kernel.eval(t, t)?;
    let points = deltas
        .iter()
        .map(|&dl| {
            if !(dl > 0.0 && dl < t) {
                return Err(Error::Domain(format!("increment {dl} must lie in (0, {t})")));
            }
            let s = t - dl;
            let v = ktt - 2.0 * kernel.eval(t, s)? + kernel.eval(s, s)?;
            Ok((dl, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(HolderFit { slope, intercept: my - slope * mx, points })
}

/// Dyadic increments `2^-hi, ..., 2^-lo`.
pub fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).rev().map(|k| 2f64.powi(-k)).collect()
}

/// Fitted Hölder slope against `expected`.
pub fn check_holder(
    kernel: &KernelSpec,
    t: f64,
    deltas: &[f64],
    expected: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let fit = holder_slope(kernel, t, deltas)?;
    let (h, d) = kernel_hd(kernel);
    let mut rep = VerificationReport::new(format!("holder_slope:{}", kernel.label()), h, d, tol, false);
    let abs = (fit.slope - expected).abs();
    rep.record_at(abs, rel(abs, expected), Some(t), None);
    rep.notes.push(format!("slope {:.6}", fit.slope));
    Ok(rep)
}

fn kernel_hd(k: &KernelSpec) -> (f64, Option<u8>) {
    match *k {
        KernelSpec::BifBm { h, .. } | KernelSpec::Noise { h } => (h, None),
        KernelSpec::Swanson => (0.5, None),
        KernelSpec::SolutionOracle { params, .. }
        | KernelSpec::Solution { params }
        | KernelSpec::LeadTerm { params }
        | KernelSpec::R1 { params } => (params.h(), Some(params.d())),
        KernelSpec::Rx { h, .. } | KernelSpec::Ry { h, .. } => (h, Some(1)),
        KernelSpec::Rz { h } => (h, Some(3)),
    }
}

/// Minimum eigenvalue over trace, `-min_eigen / trace <= rel_tol`, for each kernel and size.
pub fn psd_scan(
    kernels: &[KernelSpec],
    sizes: &[usize],
    horizon: f64,
    rel_tol: f64,
) -> Result<Vec<VerificationReport>> {
    let mut out = vec![];
    for k in kernels {
        for &n in sizes {
            let g = build_gram(k, &TimeGrid::uniform(n, horizon)?)?;
            let (h, d) = kernel_hd(k);
            let mut rep = VerificationReport::new(format!("psd:{}:n={n}", k.label()), h, d, rel_tol, false);
            let min_eigen = g.min_eigen();
            let trace = g.trace();
            rep.record_at(-min_eigen / trace, -min_eigen / trace, None, None);
            match audit_psd(&g) {
                Ok(a) => rep.notes.push(format!("min eigenvalue {min_eigen:.3e}, factorized at jitter {:e}", a.jitter)),
                Err(e) => rep.fail(e.to_string()),
            }
            out.push(rep);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::uniform(10, 1.0).unwrap()
    }

    #[test]
    fn decomposition_small_grids() {
        let g = TimeGrid::uniform(4, 1.0).unwrap();
        let r = check_decomposition(&ModelParams::new(0.75, 1).unwrap(), &g, 1e-6);
        assert!(r.pass, "{r:?}");
        let r = check_decomposition(&ModelParams::new(0.9, 3).unwrap(), &g, 1e-5);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn forms_and_law_identity() {
        let g = TimeGrid::uniform(5, 1.0).unwrap();
        assert!(check_form_equivalence(TwoForm::Rx, 0.75, &g, 1e-8).unwrap().pass);
        assert!(check_form_equivalence(TwoForm::Ry, 0.95, &g, 1e-8).unwrap().pass);
        assert!(check_law_identity(&ModelParams::new(0.65, 1).unwrap(), &g, 1e-6).pass);
        assert!(check_law_identity(&ModelParams::new(0.8, 3).unwrap(), &g, 1e-5).pass);
    }

    #[test]
    fn scaling_exponents() {
        let pairs = [(1.0, 0.5), (0.7, 0.7), (0.3, 0.9)];
        assert!(check_scaling(Scaled::Rx, 0.75, 2.0, &pairs, 1e-6).unwrap().pass);
        assert!(check_scaling(Scaled::Ry, 0.6, 0.5, &pairs, 1e-6).unwrap().pass);
        let z = check_scaling(Scaled::Rz, 0.9, 2.0, &pairs, 1e-6).unwrap();
        assert!(z.pass && !z.notes.is_empty());
        assert!((Scaled::Rz.exponent(0.9) - 0.3).abs() < 1e-15);
        assert!(check_scaling(Scaled::Rx, 0.75, 1.0, &pairs, 1e-6).is_err());
    }

    #[test]
    fn limits() {
        let reps = check_limit_half(&[1e-1, 1e-2, 1e-3], &grid()).unwrap();
        assert!(reps.iter().all(|r| r.pass), "{reps:#?}");
        let one = TimeGrid::new(vec![1.0]).unwrap();
        assert!(check_swanson_limit(0.505, &one, 0.02).unwrap().pass);
        // both sides are self-similar, with exponents 2H-1/2 and 1/2, so the relative gap
        // on the diagonal at t is 1 - t^(2H-1) R(1,1)/S(1,1); it exceeds 2% by t = 0.1
        let r = check_swanson_limit(0.505, &grid(), 0.02).unwrap();
        let p = ModelParams::new(0.505, 1).unwrap();
        let at_one = solution_cov(&p, 1.0, 1.0) / swanson_cov(1.0, 1.0);
        let predicted = 1.0 - 0.1f64.powf(0.01) * at_one;
        assert_eq!((r.t, r.s), (Some(0.1), Some(0.1)));
        assert!((r.worst_rel - predicted).abs() < 1e-10, "{r:?}");
        assert!(!r.pass);
    }

    #[test]
    fn increment_terms_sum_to_variance() {
        let x = increment_terms(0.75, 1.0, 0.9).unwrap();
        // mpmath quadrature of the three integrals
        assert!((x.t1 - 0.086_352_688_081_646_307_99).abs() < 1e-12);
        assert!((x.t2 - 0.146_452_993_251_935_803_41).abs() < 1e-12);
        assert!((x.t3 - 0.114_995_956_823_964_864_95).abs() < 1e-12);
        assert!(increment_terms(0.75, 1.0, 1.0).is_err());
        let reps = check_increment_bounds(0.75, &[(1.0, 0.9), (1.0, 0.5), (0.5, 0.1)]).unwrap();
        let get = |n: &str| reps.iter().find(|r| r.check == n).unwrap();
        for name in ["t1_lower", "t1_upper", "t2_bound_sharp", "t3_bound_sharp", "increment_identity"] {
            assert!(get(name).pass, "{:?}", get(name));
        }
        assert!(!get("t2_bound_h_half").pass);
        assert!(!get("t1_lower_h_over_2h_minus_1").pass);
    }

    #[test]
    fn holder_slopes() {
        let deltas = dyadic(6, 14);
        let fit = holder_slope(&KernelSpec::BifBm { h: 0.5, k: 0.5 }, 1.0, &deltas).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.02, "{fit:?}");
        assert!(holder_slope(&KernelSpec::Swanson, 1.0, &deltas[..2]).is_err());
    }

    #[test]
    fn psd_small() {
        let reps = psd_scan(&[KernelSpec::Swanson, KernelSpec::Rz { h: 0.9 }], &[16], 1.0, 1e-10).unwrap();
        assert!(reps.iter().all(|r| r.pass), "{reps:#?}");
    }

    #[test]
    fn report_json_round_trip() {
        let r = check_scaling(Scaled::Rx, 0.75, 2.0, &[(1.0, 0.5)], 1e-6).unwrap();
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
