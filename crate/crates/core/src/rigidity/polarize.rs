use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MAX_POLARIZATION_ORDER: usize = 8;

const ANGLES: usize = 64;
/// Unknowns beyond the requested order that soak up the truncated tail.
const EXTRA_TERMS: usize = 2;
const MAX_CONDITION: f64 = 1e12;

/// `K(z, w) ~ sum c[m][n] (z - center)^m conj(w - center)^n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarizationTable {
    pub center: Complex64,
    pub order: usize,
    pub requested_order: usize,
    pub fit_radius: f64,
    pub coeffs: Vec<Vec<Complex64>>,
    /// Worst condition number of the radial fits.
    pub condition: f64,
    pub notice: Option<String>,
}

impl PolarizationTable {
    pub fn coefficient(&self, m: usize, n: usize) -> Complex64 {
        self.coeffs
            .get(m)
            .and_then(|row| row.get(n))
            .copied()
            .unwrap_or_default()
    }

    pub fn reconstruct(&self, z: Complex64, w: Complex64) -> Complex64 {
        let a = z - self.center;
        let b = (w - self.center).conj();
        let mut s = Complex64::new(0.0, 0.0);
        let mut am = Complex64::new(1.0, 0.0);
        for row in &self.coeffs {
            let mut bn = Complex64::new(1.0, 0.0);
            for &c in row {
                s += c * am * bn;
                bn *= b;
            }
            am *= a;
        }
        s
    }
}

/// Chebyshev-type radii in `(0, 1]`, denser near both ends.
fn radii(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| 0.5 * (1.0 - (PI * (i as f64 + 0.5) / count as f64).cos()) + 0.5 / count as f64)
        .map(|s: f64| s.min(1.0))
        .collect()
}

/// Fits the mixed Taylor coefficients of the real-analytic diagonal
/// `K(l, l)` about `center`.
///
/// On the circle `l = center + rho e^{i t}` the `k`-th Fourier mode of the
/// diagonal is `sum_n c[n+k][n] rho^{2n+k}`; each mode is fitted in `rho`
/// by least squares.
pub fn polarize(
    diagonal: impl Fn(Complex64) -> f64,
    center: Complex64,
    order: usize,
    fit_radius: f64,
) -> Result<PolarizationTable> {
    if order > MAX_POLARIZATION_ORDER {
        return Err(invalid("order", format!("at most {MAX_POLARIZATION_ORDER}, got {order}")));
    }
    if !(fit_radius > 0.0 && fit_radius.is_finite()) {
        return Err(invalid("fit_radius", format!("must be positive, got {fit_radius}")));
    }
    let rs = radii(order + EXTRA_TERMS + 6);
    // modes[i][k] for k = 0..=order
    let modes: Vec<Vec<Complex64>> = rs
        .iter()
        .map(|&s| {
            let samples: Vec<f64> = (0..ANGLES)
                .map(|j| diagonal(center + Complex64::from_polar(s * fit_radius, 2.0 * PI * j as f64 / ANGLES as f64)))
                .collect();
            (0..=order)
                .map(|k| {
                    samples
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / ANGLES as f64))
                        .sum::<Complex64>()
                        / ANGLES as f64
                })
                .collect()
        })
        .collect();

    let mut current = order;
    loop {
        match fit(&rs, &modes, current, fit_radius) {
            Some((coeffs, condition)) => {
                let notice = (current < order)
                    .then(|| format!("radial fit ill-conditioned at order {order}; reduced to {current}"));
                return Ok(PolarizationTable {
                    center,
                    order: current,
                    requested_order: order,
                    fit_radius,
                    coeffs,
                    condition,
                    notice,
                });
            }
            None if current > 0 => current -= 1,
            None => return Err(invalid("order", "radial fit ill-conditioned even at order 0")),
        }
    }
}

fn fit(rs: &[f64], modes: &[Vec<Complex64>], order: usize, fit_radius: f64) -> Option<(Vec<Vec<Complex64>>, f64)> {
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); order + 1]; order + 1];
    let mut worst: f64 = 1.0;
    for k in 0..=order {
        let kept = order - k + 1;
        let unknowns = kept + EXTRA_TERMS;
        let a = DMatrix::from_fn(rs.len(), unknowns, |i, n| Complex64::new(rs[i].powi((2 * n + k) as i32), 0.0));
        let b = DVector::from_fn(rs.len(), |i, _| modes[i][k]);
        let svd = a.svd(true, true);
        let sv = &svd.singular_values;
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_CONDITION) {
            return None;
        }
        worst = worst.max(cond);
        let x = svd.solve(&b, 0.0).ok()?;
        for n in 0..kept {
            // undo the radius scaling s = rho / fit_radius
            let c = x[n] / fit_radius.powi((2 * n + k) as i32);
            coeffs[n + k][n] = c;
            if k > 0 {
                coeffs[n][n + k] = c.conj();
            }
        }
    }
    Some((coeffs, worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_kernel() {
        let t = polarize(|_| 1.0, c(0.3, 0.1), 4, 0.5).unwrap();
        assert!((t.coefficient(0, 0) - 1.0).norm() < 1e-12);
        for m in 0..=4 {
            for n in 0..=4 {
                if (m, n) != (0, 0) {
                    assert!(t.coefficient(m, n).norm() < 1e-9, "c[{m}][{n}] = {}", t.coefficient(m, n));
                }
            }
        }
    }

    #[test]
    fn binomial_kernel() {
        let t = polarize(|l| (1.0 + l.norm_sqr()).powi(3), c(0.0, 0.0), 8, 0.5).unwrap();
        assert!(t.notice.is_none());
        let binom = [1.0, 3.0, 3.0, 1.0];
        for m in 0..=8 {
            for n in 0..=8 {
                let expected = if m == n && m <= 3 { binom[m] } else { 0.0 };
                // fitted in units of the fit radius, so errors grow like 0.5^-(m+n)
                let tol = 1e-8 * 0.5f64.powi(-((m + n) as i32));
                assert!((t.coefficient(m, n) - expected).norm() < tol, "c[{m}][{n}] = {}", t.coefficient(m, n));
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                let z = Complex64::from_polar(0.1 * (i as f64 / 19.0), 0.7 * i as f64 + 0.1);
                let w = Complex64::from_polar(0.1 * (j as f64 / 19.0), -1.3 * j as f64);
                let direct = (1.0 + z * w.conj()).powu(3);
                worst = worst.max((t.reconstruct(z, w) - direct).norm());
            }
        }
        assert!(worst <= 1e-6, "{worst}");
    }

    #[test]
    fn off_center_exponential() {
        // K(z, w) = exp(z conj w) about a shifted center
        let center = c(0.4, -0.2);
        let t = polarize(|l| l.norm_sqr().exp(), center, 8, 0.3).unwrap();
        let (z, w) = (center + c(0.05, 0.03), center + c(-0.04, 0.06));
        assert!((t.reconstruct(z, w) - (z * w.conj()).exp()).norm() < 1e-6);
    }

    #[test]
    fn order_limit() {
        assert!(polarize(|_| 1.0, c(0.0, 0.0), 9, 0.5).is_err());
    }
}
