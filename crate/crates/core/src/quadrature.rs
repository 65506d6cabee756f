//! Gauss–Jacobi rules and integrators for weakly singular integrands.
//!
//! Endpoint power singularities are absorbed into Jacobi weights. Singularities that sit
//! just outside the interval ("near" singularities) are handled by geometric panel grading
//! towards the offending endpoint.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{beta, ModelParams};

/// Default node count for one-dimensional kernel integrals.
pub const DEFAULT_NODES: usize = 128;

const MAX_PANELS_PER_SIDE: usize = 60;

/// Nodes and weights for `∫_{-1}^{1} (1+x)^left_exp (1-x)^right_exp f(x) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub left_exp: f64,
    pub right_exp: f64,
}

impl JacobiRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of `w_i f(x_i)`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Builds an `n`-point Gauss–Jacobi rule (Golub–Welsch seed, Newton polish, Christoffel weights).
pub fn jacobi_rule(n: usize, left_exp: f64, right_exp: f64) -> Result<JacobiRule> {
    if n == 0 {
        return Err(Error::Domain("a quadrature rule needs at least one node".into()));
    }
    for e in [left_exp, right_exp] {
        if !(e > -1.0) {
            return Err(Error::NonIntegrable(e));
        }
    }
    // Standard notation: weight (1-x)^al (1+x)^be.
    let (al, be) = (right_exp, left_exp);
    let mu0 = 2f64.powf(al + be + 1.0) * beta(al + 1.0, be + 1.0)?;

    let ab = al + be;
    let a: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                (be - al) / (ab + 2.0)
            } else {
                let k2 = 2.0 * k as f64 + ab;
                (be * be - al * al) / (k2 * (k2 + 2.0))
            }
        })
        .collect();
    // sqrt of b_k for k = 0..n-1 (index 0 unused).
    let sb: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                0.0
            } else if k == 1 {
                (4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                let kf = k as f64;
                let k2 = 2.0 * kf + ab;
                (4.0 * kf * (kf + al) * (kf + be) * (kf + ab) / (k2 * k2 * (k2 + 1.0) * (k2 - 1.0))).sqrt()
            }
        })
        .collect();

    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = a[k];
        if k + 1 < n {
            jac[(k, k + 1)] = sb[k + 1];
            jac[(k + 1, k)] = sb[k + 1];
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));

    let p0 = mu0.sqrt().recip();
    // Orthonormal recurrence; returns (p_n up to scale, its derivative, sum_{k<n} p_k^2).
    let eval = |x: f64| {
        let (mut pm, mut p, mut dpm, mut dp) = (0.0, p0, 0.0, 0.0);
        let mut sum = p * p;
        for k in 0..n {
            let (np, ndp) = if k + 1 < n {
                let s = sb[k + 1];
                (((x - a[k]) * p - sb[k] * pm) / s, ((x - a[k]) * dp + p - sb[k] * dpm) / s)
            } else {
                ((x - a[k]) * p - sb[k] * pm, (x - a[k]) * dp + p - sb[k] * dpm)
            };
            pm = p;
            dpm = dp;
            p = np;
            dp = ndp;
            if k + 1 < n {
                sum += p * p;
            }
        }
        (p, dp, sum)
    };

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pn, dpn, _) = eval(*x);
            if dpn == 0.0 {
                break;
            }
            let step = pn / dpn;
            let next = *x - step;
            if !(next > -1.0 && next < 1.0) || step.abs() > 1e-6 {
                break;
            }
            *x = next;
            if step.abs() < 1e-17 {
                break;
            }
        }
        weights.push(1.0 / eval(*x).2);
    }
    Ok(JacobiRule { nodes, weights, left_exp, right_exp })
}

type RuleKey = (usize, u64, u64);

fn rule_store() -> &'static Mutex<HashMap<RuleKey, Arc<JacobiRule>>> {
    static STORE: OnceLock<Mutex<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    STORE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide memoized [`jacobi_rule`].
pub fn cached_rule(n: usize, left_exp: f64, right_exp: f64) -> Result<Arc<JacobiRule>> {
    let key = (n, left_exp.to_bits(), right_exp.to_bits());
    if let Some(r) = rule_store().lock().expect("rule store poisoned").get(&key) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(jacobi_rule(n, left_exp, right_exp)?);
    rule_store().lock().expect("rule store poisoned").insert(key, Arc::clone(&rule));
    Ok(rule)
}

fn rule(n: usize, left_exp: f64, right_exp: f64) -> Arc<JacobiRule> {
    cached_rule(n, left_exp, right_exp).unwrap_or_else(|e| panic!("invalid quadrature request (n = {n}): {e}"))
}

/// `∫_0^s a^left_exp (s-a)^right_exp f(a) da` with a single affine-mapped Jacobi rule.
///
/// Returns 0 when `s <= 0`.
pub fn integrate_weighted(f: impl Fn(f64) -> f64, s: f64, left_exp: f64, right_exp: f64, n: usize) -> Result<f64> {
    let r = cached_rule(n, left_exp, right_exp)?;
    if s <= 0.0 {
        return Ok(0.0);
    }
    let h = s / 2.0;
    Ok(h.powf(left_exp + right_exp + 1.0) * r.apply(|x| f(h * (1.0 + x))))
}

/// Behaviour of an integrand at one end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Endpoint {
    /// Power of the distance to this endpoint carried by the weight.
    pub exp: f64,
    /// Distance beyond this endpoint of a singularity hidden inside `f`.
    pub near: Option<f64>,
}

impl Endpoint {
    pub const REGULAR: Endpoint = Endpoint { exp: 0.0, near: None };

    pub fn power(exp: f64) -> Self {
        Self { exp, near: None }
    }

    pub fn near(self, dist: f64) -> Self {
        Self { near: Some(dist), ..self }
    }
}

fn grading(near: Option<f64>, len: f64) -> Option<f64> {
    near.filter(|&d| d > 0.0 && d < 0.25 * len)
}

// Offsets delta, 3 delta, 7 delta, ... from an endpoint, stopping short of `span`.
fn geometric_offsets(span: f64, delta: f64) -> Vec<f64> {
    let mut pts = vec![];
    let (mut x, mut w) = (0.0, delta);
    while pts.len() < MAX_PANELS_PER_SIDE && x + 1.5 * w < span {
        x += w;
        pts.push(x);
        w *= 2.0;
    }
    pts
}

/// `∫_a^b (x-a)^left.exp (b-x)^right.exp f(x) dx` using `n` nodes per panel.
///
/// Panels are graded geometrically towards an endpoint whose `near` distance is small
/// compared with `b - a`; the outermost panels carry the exact Jacobi weights.
///
/// # Panics
/// If an exponent is `<= -1` or `n == 0`.
pub fn integrate_graded(f: impl Fn(f64) -> f64, a: f64, b: f64, left: Endpoint, right: Endpoint, n: usize) -> f64 {
    integrate_graded_offsets(|x, _, _| f(x), a, b, left, right, n)
}

/// As [`integrate_graded`], but `f(x, x - a, b - x)` also receives both endpoint distances,
/// computed without cancellation so integrands can resolve singularities just past an end.
pub fn integrate_graded_offsets(
    f: impl Fn(f64, f64, f64) -> f64,
    a: f64,
    b: f64,
    left: Endpoint,
    right: Endpoint,
    n: usize,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let len = b - a;
    let gl = grading(left.near, len);
    let gr = grading(right.near, len);
    // Breakpoints as (offset from a, offset from b); panels past `split` are measured from b.
    let mut pts: Vec<(f64, f64)> = vec![(0.0, len)];
    let split = match (gl, gr) {
        (Some(_), Some(_)) => 0.5 * len,
        (Some(_), None) => len,
        _ => 0.0,
    };
    if let Some(d) = gl {
        pts.extend(geometric_offsets(split, d).into_iter().map(|x| (x, len - x)));
    }
    if split > 0.0 && split < len {
        pts.push((split, len - split));
    }
    if let Some(d) = gr {
        let mut rp: Vec<_> = geometric_offsets(len - split, d).into_iter().map(|x| (len - x, x)).collect();
        rp.reverse();
        pts.extend(rp);
    }
    pts.push((len, 0.0));

    let last = pts.len() - 2;
    let mut total = 0.0;
    for (k, win) in pts.windows(2).enumerate() {
        let (lo, hi) = (win[0], win[1]);
        let from_right = lo.0 >= split;
        let h = 0.5 * if from_right { lo.1 - hi.1 } else { hi.0 - lo.0 };
        let le = if k == 0 { left.exp } else { 0.0 };
        let re = if k == last { right.exp } else { 0.0 };
        let r = rule(n, le, re);
        let outer_left = k != 0 && left.exp != 0.0;
        let outer_right = k != last && right.exp != 0.0;
        let sum = r.apply(|x| {
            let (da, db) = if from_right {
                let db = hi.1 + h * (1.0 - x);
                (len - db, db)
            } else {
                let da = lo.0 + h * (1.0 + x);
                (da, len - da)
            };
            let p = if from_right { b - db } else { a + da };
            let mut v = f(p, da, db);
            if outer_left {
                v *= da.powf(left.exp);
            }
            if outer_right {
                v *= db.powf(right.exp);
            }
            v
        });
        total += h.powf(le + re + 1.0) * sum;
    }
    total
}

/// Result of a two-dimensional singular integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral2d {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub err_est: f64,
    pub converged: bool,
    /// Nodes per panel at the final level.
    pub nodes: usize,
}

const LEVELS: [usize; 6] = [12, 16, 24, 32, 48, 64];

/// `∫_0^t ∫_0^s |u-v|^(2H-2) (t+s-u-v)^(-d/2) dv du`, refined until the relative change
/// between levels is below `tol`.
pub fn integrate2d_singular(p: &ModelParams, t: f64, s: f64, tol: f64) -> Integral2d {
    integrate2d_singular_with(p, t, s, tol, |_, _| 1.0)
}

/// As [`integrate2d_singular`] with an extra smooth factor `m(u, v)` in the integrand.
pub fn integrate2d_singular_with(p: &ModelParams, t: f64, s: f64, tol: f64, m: impl Fn(f64, f64) -> f64) -> Integral2d {
    if t <= 0.0 || s <= 0.0 {
        return Integral2d { value: 0.0, err_est: 0.0, converged: true, nodes: 0 };
    }
    let g = 2.0 * p.h() - 2.0;
    let be = -f64::from(p.d()) / 2.0;
    let eval = |n: usize| {
        if t >= s {
            corner_integral(g, be, t, s, n, &m)
        } else {
            corner_integral(g, be, s, t, n, &|u: f64, v: f64| m(v, u))
        }
    };
    let mut prev = eval(LEVELS[0]);
    let mut err = f64::INFINITY;
    for &n in &LEVELS[1..] {
        let cur = eval(n);
        err = (cur - prev).abs();
        prev = cur;
        if err <= tol * cur.abs() {
            return Integral2d { value: cur, err_est: err, converged: true, nodes: n };
        }
    }
    Integral2d { value: prev, err_est: err, converged: false, nodes: LEVELS[LEVELS.len() - 1] }
}

// Corner coordinates x = t-u, y = s-v turn the integrand into |x-y-D|^g (x+y)^be on
// [0,t]x[0,s]. Triangles are arranged so every singular factor lands on a Duffy vertex or
// edge and becomes a Jacobi weight; near singularities are graded.
fn corner_integral(g: f64, be: f64, t: f64, s: f64, n: usize, m: &dyn Fn(f64, f64) -> f64) -> f64 {
    let d = t - s;
    let tp = t + s;
    if d <= 0.0 {
        let rho = rule(n, g + be + 1.0, 0.0);
        let eta = rule(n, 0.0, g);
        let mut sum = 0.0;
        for (&xr, &wr) in rho.nodes.iter().zip(&rho.weights) {
            let r = 0.5 * (1.0 + xr);
            for (&xe, &we) in eta.nodes.iter().zip(&eta.weights) {
                let e = 0.5 * (1.0 + xe);
                let w = (1.0 + e).powf(be);
                // below the diagonal: (x, y) = r t (1, e); above: r t (e, 1)
                let below = m(t - r * t, t - r * e * t);
                let above = m(t - r * e * t, t - r * t);
                sum += wr * we * w * (below + above);
            }
        }
        let scale = 0.5f64.powf(g + be + 2.0) * 0.5f64.powf(g + 1.0);
        return t.powf(g + be + 2.0) * scale * sum;
    }

    // A: vertices (0,0), (D,0), (t,s).
    let tri_a = {
        let rho = rule(n, 1.0 + be, g);
        let mut sum = 0.0;
        for (&xr, &wr) in rho.nodes.iter().zip(&rho.weights) {
            let r = 0.5 * (1.0 + xr);
            let inner = integrate_graded(
                |e| (d + 2.0 * s * e).powf(be) * m(t - r * (d + e * s), s - r * e * s),
                0.0,
                1.0,
                Endpoint::REGULAR.near(d / (2.0 * s)),
                Endpoint::REGULAR,
                n,
            );
            sum += wr * inner;
        }
        d.powf(g + 1.0) * s * 0.5f64.powf(1.0 + be + g + 1.0) * sum
    };

    // C: vertex (D,0), opposite edge (t,0)-(t,s).
    let tri_c = {
        let eta = rule(n, 0.0, g);
        let mut sum = 0.0;
        for (&xe, &we) in eta.nodes.iter().zip(&eta.weights) {
            let e = 0.5 * (1.0 + xe);
            let inner = integrate_graded(
                |r| (d + r * s * (1.0 + e)).powf(be) * m(s - r * s, s - r * e * s),
                0.0,
                1.0,
                Endpoint::power(g + 1.0).near(d / (s * (1.0 + e))),
                Endpoint::REGULAR,
                n,
            );
            sum += we * inner;
        }
        s.powf(g + 2.0) * 0.5f64.powf(g + 1.0) * sum
    };

    // B1: vertex (0,0), opposite edge M=(t/2,s/2) to (0,s).
    let tri_b1 = {
        let outer = |r: f64| {
            integrate_graded(
                |e| {
                    (tp - e * d).powf(be)
                        * (d * (1.0 - 0.5 * r) + 0.5 * r * e * tp).powf(g)
                        * m(t - 0.5 * r * (1.0 - e) * t, s - 0.5 * r * s * (1.0 + e))
                },
                0.0,
                1.0,
                Endpoint::REGULAR.near(d * (2.0 - r) / (r * tp)),
                Endpoint::REGULAR.near(2.0 * s / d),
                n,
            )
        };
        let v = integrate_graded(outer, 0.0, 1.0, Endpoint::power(1.0 + be).near(d / s), Endpoint::REGULAR, n);
        0.5 * t * s * 0.5f64.powf(be) * v
    };

    // B2: vertex (t,s), opposite edge (0,s) to M.
    let tri_b2 = {
        let outer = |e: f64| {
            let c = t - 0.5 * e * d;
            let inner = integrate_graded(
                |r| (tp - r * c).powf(be) * m(r * t * (1.0 - 0.5 * e), 0.5 * r * e * s),
                0.0,
                1.0,
                Endpoint::power(g + 1.0),
                Endpoint::REGULAR.near((s + 0.5 * e * d) / c),
                n,
            );
            (t - 0.5 * e * tp).powf(g) * inner
        };
        let v =
            integrate_graded(outer, 0.0, 1.0, Endpoint::REGULAR.near(2.0 * s / d), Endpoint::REGULAR.near(d / tp), n);
        0.5 * t * s * v
    };

    tri_a + tri_c + tri_b1 + tri_b2
}

/// The same double integral through rotated coordinates with the inner integral done in
/// closed form; an independent route used to cross-check [`integrate2d_singular`].
pub fn integrate2d_rotated(p: &ModelParams, t: f64, s: f64, n: usize) -> f64 {
    if t <= 0.0 || s <= 0.0 {
        return 0.0;
    }
    let (t, s) = if t >= s { (t, s) } else { (s, t) };
    let g = 2.0 * p.h() - 2.0;
    let q = 1.0 - f64::from(p.d()) / 2.0;
    let d = t - s;
    let tp = t + s;
    let j1 = integrate_graded(|w| (tp - w).powf(q), 0.0, t, Endpoint::power(g), Endpoint::REGULAR.near(s), n);
    let j3 = integrate_graded(|w| (tp - w).powf(q), 0.0, s, Endpoint::power(g), Endpoint::REGULAR.near(t), n);
    let (j2, j4) = if d > 0.0 {
        let below = integrate_graded(|_| 1.0, 0.0, d, Endpoint::power(g), Endpoint::power(q), n);
        let above = integrate_graded(|w| w.powf(g), d, t, Endpoint::power(q).near(d), Endpoint::REGULAR, n);
        let j4 = integrate_graded(|w| (d + w).powf(q), 0.0, s, Endpoint::power(g).near(d), Endpoint::REGULAR, n);
        (below + above, j4)
    } else {
        let e = g + q + 1.0;
        (t.powf(e) / e, s.powf(e) / e)
    };
    (j1 - j2 + j3 - j4) / (2.0 * q)
}
