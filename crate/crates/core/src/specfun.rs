//! Scalar special functions and the model constants shared by every kernel.

use libm::{erf, erfc, lgamma};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// 1 / (2 sqrt(2 pi)).
pub const KAPPA: f64 = 0.199_471_140_200_716_34;

/// Hurst index and spatial dimension of the model.
///
/// Valid points satisfy `1/2 < H < 1`, `d` in `{1, 3}` and `d < 4H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "H")]
    h: f64,
    d: u8,
}

impl ModelParams {
    pub fn new(h: f64, d: u8) -> Result<Self> {
        if !(h > 0.5 && h < 1.0) {
            return Err(invalid("H", format!("{h} is outside (1/2, 1)")));
        }
        if d != 1 && d != 3 {
            return Err(invalid("d", format!("{d} is not supported (use 1 or 3)")));
        }
        if f64::from(d) >= 4.0 * h {
            return Err(invalid("d", format!("d = {d} requires H > {}", f64::from(d) / 4.0)));
        }
        Ok(Self { h, d })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn constants(&self) -> Constants {
        constants(self)
    }
}

/// The named scalars attached to a [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// H(2H - 1)
    pub alpha_h: f64,
    /// 2 / (2 - d); negative for d = 3.
    pub c_d: f64,
    pub kappa: f64,
    /// Signed coefficient of the leading term.
    pub c0_sq: f64,
}

impl Constants {
    /// Real coefficient sqrt(|c0_sq|) used when the leading term is sampled.
    pub fn c0(&self) -> f64 {
        self.c0_sq.abs().sqrt()
    }
}

pub fn constants(p: &ModelParams) -> Constants {
    let h = p.h;
    let d = f64::from(p.d);
    let alpha_h = h * (2.0 * h - 1.0);
    let c_d = 2.0 / (2.0 - d);
    let b = beta(2.0 * h - 1.0, 2.0 - d / 2.0).expect("arguments positive for valid params");
    Constants { alpha_h, c_d, kappa: KAPPA, c0_sq: KAPPA * alpha_h * c_d * b }
}

/// Euler Beta function via log-gamma.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("beta({x}, {y}) needs positive arguments")));
    }
    Ok((lgamma(x) + lgamma(y) - lgamma(x + y)).exp())
}

/// Heat kernel (4 pi c t)^(-d/2) exp(-x^2 / (4 c t)); zero for t <= 0.
pub fn heat_kernel(c: f64, t: f64, x: f64, d: u8) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let var = 4.0 * c * t;
    (std::f64::consts::PI * var).powf(-f64::from(d) / 2.0) * (-x * x / var).exp()
}

/// Integral of the one-dimensional heat kernel centred at `x` over the cell `[a, b]`.
pub fn heat_cell_integral(c: f64, t: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    if t <= 0.0 || c <= 0.0 {
        return Err(Error::Domain(format!("heat_cell_integral needs c, t > 0 (c = {c}, t = {t})")));
    }
    if !(a < b) {
        return Err(Error::Domain(format!("empty cell [{a}, {b}]")));
    }
    Ok(cell_mass(c, t, x, a, b))
}

// Unchecked variant for hot loops; the tails use erfc so far cells keep relative accuracy.
pub(crate) fn cell_mass(c: f64, t: f64, x: f64, a: f64, b: f64) -> f64 {
    let scale = (4.0 * c * t).sqrt();
    let lo = (a - x) / scale;
    let hi = (b - x) / scale;
    if lo >= 0.0 {
        0.5 * (erfc(lo) - erfc(hi))
    } else if hi <= 0.0 {
        0.5 * (erfc(-hi) - erfc(-lo))
    } else {
        0.5 * (erf(hi) - erf(lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.75, 1).is_ok());
        assert!(ModelParams::new(0.5, 1).is_err());
        assert!(ModelParams::new(1.0, 1).is_err());
        assert!(ModelParams::new(0.75, 2).is_err());
        assert!(ModelParams::new(0.75, 3).is_err());
        assert!(ModelParams::new(0.76, 3).is_ok());
    }

    #[test]
    fn beta_values() {
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta(0.5, 1.5).unwrap() - PI / 2.0).abs() < 1e-13);
        // mpmath, 40 digits, cross-checked by quadrature of the defining integral
        let fixture = 49.396_958_424_229_480_127;
        assert!((beta(0.02, 1.5).unwrap() / fixture - 1.0).abs() < 1e-12);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
    }

    #[test]
    fn constants_values() {
        let c = ModelParams::new(0.75, 1).unwrap().constants();
        assert!((c.alpha_h - 0.375).abs() < 1e-15);
        assert_eq!(c.c_d, 2.0);
        assert!((c.c0_sq - 0.234_996_400_746_656_297).abs() < 1e-14);
        let c3 = ModelParams::new(0.9, 3).unwrap().constants();
        assert_eq!(c3.c_d, -2.0);
        assert!(c3.c0_sq < 0.0);
        assert!((KAPPA - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-17);
    }

    #[test]
    fn alpha_beta_tends_to_half() {
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let h = 0.5 + eps;
            let v = h * (2.0 * h - 1.0) * beta(2.0 * h - 1.0, 1.5).unwrap();
            let gap = (v - 0.5).abs();
            assert!(gap < prev);
            assert!(gap <= 0.6 * eps, "eps {eps}: gap {gap}");
            prev = gap;
        }
    }

    #[test]
    fn heat_kernel_values() {
        assert!((heat_kernel(1.0, 1.0, 0.0, 1) - (4.0 * PI).powf(-0.5)).abs() < 1e-15);
        assert_eq!(heat_kernel(1.0, -0.5, 3.0, 1), 0.0);
        assert!((heat_kernel(2.0, 1.0, 0.0, 1) - 0.199_471_140_200_716_34).abs() < 1e-15);
    }

    #[test]
    fn cell_integral_values() {
        // mpmath: erf(1/2)/2
        let fixture = 0.260_249_938_906_523_268_84;
        let v = heat_cell_integral(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((v - fixture).abs() < 1e-15, "{v}");
        assert!(heat_cell_integral(1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(heat_cell_integral(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cell_integrals_telescope_to_one() {
        for (c, t) in [(0.5f64, 0.01), (0.5, 1.0), (2.0, 1.0)] {
            let l = 12.0 * (c * t).sqrt() + 1.0;
            let n = 4096;
            let dx = 2.0 * l / n as f64;
            let total: f64 = (0..n)
                .map(|j| heat_cell_integral(c, t, 0.3, -l + j as f64 * dx, -l + (j + 1) as f64 * dx).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "c {c} t {t}: {total}");
        }
    }

    proptest! {
        #[test]
        fn beta_symmetric(x in 0.01f64..5.0, y in 0.01f64..5.0) {
            let a = beta(x, y).unwrap();
            let b = beta(y, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * a);
        }

        #[test]
        fn beta_with_unit_argument(x in 0.1f64..3.0) {
            prop_assert!((beta(x, 1.0).unwrap() - 1.0 / x).abs() < 1e-12);
        }

        #[test]
        fn symmetric_cell_is_two_halves(t in 0.01f64..3.0, x in -2.0f64..2.0, w in 0.01f64..2.0) {
            let whole = heat_cell_integral(0.7, t, x, x - w, x + w).unwrap();
            let half = heat_cell_integral(0.7, t, x, x, x + w).unwrap();
            prop_assert!((whole - 2.0 * half).abs() < 1e-14);
            prop_assert!(whole > 0.0 && whole < 1.0 + 1e-15);
        }
    }
}
