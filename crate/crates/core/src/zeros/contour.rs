//! Argument-principle zero counting: `(1/2 pi i) \oint psi'/psi dz`.
//!
//! Circles use the composite trapezoid rule (spectrally accurate on a
//! smooth periodic integrand) with dyadic refinement that reuses nodes.
//! Rectangles use composite 8-point Gauss–Legendre on each edge with the
//! panel count doubled per level. Both stop once two consecutive levels
//! round to the same integer and the value is within `INTEGER_GAP` of it.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::ensembles::Region;
use crate::error::{GafError, Result};
use crate::poly::Polynomial;
use crate::quad::gauss_legendre;

/// Final distance of the contour integral from its nearest integer.
pub const INTEGER_GAP: f64 = 1e-3;
/// `|psi| / sum|a_k||z|^k` below this on a node flags a zero on the contour.
pub const BOUNDARY_THRESHOLD: f64 = 1e-10;

const MAX_TRAPEZOID_NODES: usize = 1 << 22;
const MAX_EDGE_PANELS: usize = 1 << 12;

/// Something holomorphic that can report its value, derivative and the
/// magnitude it was computed from.
pub trait Analytic {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64);
    fn magnitude_scale(&self, z: Complex64) -> f64;
}

impl Analytic for Polynomial {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        self.eval_with_derivative(z)
    }

    fn magnitude_scale(&self, z: Complex64) -> f64 {
        Polynomial::magnitude_scale(self, z)
    }
}

/// Result of one contour count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCount {
    pub count: usize,
    /// Unrounded `(1/2 pi i) \oint psi'/psi dz` at the final level.
    pub value: Complex64,
    pub nodes: usize,
}

impl ContourCount {
    pub fn integer_gap(&self) -> f64 {
        (self.value - Complex64::new(self.value.re.round(), 0.0)).norm()
    }
}

struct Refiner {
    prev: Option<Complex64>,
}

impl Refiner {
    /// `Some(count)` once the sequence of estimates has settled.
    fn push(&mut self, value: Complex64) -> Option<i64> {
        let rounded = value.re.round();
        let gap = (value - Complex64::new(rounded, 0.0)).norm();
        let settled = match self.prev {
            Some(p) => gap <= INTEGER_GAP && p.re.round() == rounded && (p - value).norm() <= 0.25,
            None => false,
        };
        self.prev = Some(value);
        settled.then_some(rounded as i64)
    }
}

fn finish(count: i64, value: Complex64, nodes: usize) -> Result<ContourCount> {
    if count < 0 {
        return Err(GafError::NotConverged { value: value.re });
    }
    Ok(ContourCount {
        count: count as usize,
        value,
        nodes,
    })
}

fn log_derivative<F: Analytic>(f: &F, z: Complex64, min_rel: &mut f64) -> Result<Complex64> {
    let (v, d) = f.value_and_derivative(z);
    let scale = f.magnitude_scale(z);
    let rel = if scale > 0.0 { v.norm() / scale } else { 0.0 };
    *min_rel = min_rel.min(rel);
    if rel < BOUNDARY_THRESHOLD || !rel.is_finite() {
        return Err(GafError::BoundaryZero { min_relative: rel });
    }
    Ok(d / v)
}

/// Count zeros inside the circle `|z - center| = radius`.
pub fn count_disk<F: Analytic>(f: &F, center: Complex64, radius: f64, degree_hint: usize) -> Result<ContourCount> {
    let mut m = (2 * degree_hint + 2).max(32).next_power_of_two();
    let mut min_rel = f64::INFINITY;
    let node = |k: usize, m: usize| -> Complex64 { Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64) };
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..m {
        let z = center + node(k, m);
        sum += log_derivative(f, z, &mut min_rel)? * (z - center);
    }
    let mut refiner = Refiner { prev: None };
    refiner.push(sum / m as f64);
    while m < MAX_TRAPEZOID_NODES {
        // add the odd nodes of the doubled rule
        let m2 = 2 * m;
        for k in (1..m2).step_by(2) {
            let z = center + node(k, m2);
            sum += log_derivative(f, z, &mut min_rel)? * (z - center);
        }
        m = m2;
        let value = sum / m as f64;
        if let Some(count) = refiner.push(value) {
            return finish(count, value, m);
        }
    }
    Err(GafError::NotConverged {
        value: refiner.prev.map_or(f64::NAN, |v| v.re),
    })
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Count zeros inside the axis-aligned rectangle `[lo, hi]`.
pub fn count_rect<F: Analytic>(f: &F, lo: Complex64, hi: Complex64) -> Result<ContourCount> {
    let corners = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
    let (xs, ws) = gl8();
    let mut min_rel = f64::INFINITY;
    let mut refiner = Refiner { prev: None };
    let mut panels = 1;
    while panels <= MAX_EDGE_PANELS {
        let mut total = Complex64::new(0.0, 0.0);
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let pa = a + h * p as f64;
                let mid = pa + 0.5 * h;
                let mut s = Complex64::new(0.0, 0.0);
                for (x, w) in xs.iter().zip(ws) {
                    let z = mid + 0.5 * h * *x;
                    s += log_derivative(f, z, &mut min_rel)? * *w;
                }
                total += s * 0.5 * h;
            }
        }
        let value = total / Complex64::new(0.0, 2.0 * PI);
        if let Some(count) = refiner.push(value) {
            return finish(count, value, panels * 32);
        }
        panels *= 2;
    }
    Err(GafError::NotConverged {
        value: refiner.prev.map_or(f64::NAN, |v| v.re),
    })
}

/// Count zeros in a region (no retries).
pub fn count_region<F: Analytic>(f: &F, region: &Region, degree_hint: usize) -> Result<ContourCount> {
    match *region {
        Region::Disk { center, radius } => count_disk(f, center, radius, degree_hint),
        Region::Rect { lo, hi } => count_rect(f, lo, hi),
    }
}

/// Boundary-zero jitter: the k-th retry scales the region by `1 + 1e-6 k`.
pub const MAX_JITTER_RETRIES: usize = 5;

pub fn jitter_factor(retry: usize) -> f64 {
    1.0 + 1e-6 * retry as f64
}

/// Count with up to [`MAX_JITTER_RETRIES`] dilated retries when a zero sits
/// on the contour. Returns the count and the number of retries used.
pub fn count_region_jittered<F: Analytic>(f: &F, region: &Region, degree_hint: usize) -> Result<(ContourCount, usize)> {
    let mut last_err = None;
    for retry in 0..=MAX_JITTER_RETRIES {
        let r = region.dilated(jitter_factor(retry));
        match count_region(f, &r, degree_hint) {
            Ok(c) => {
                if retry > 0 {
                    log::info!("contour count succeeded after {retry} jitter retries (factor {})", jitter_factor(retry));
                }
                return Ok((c, retry));
            }
            Err(e @ (GafError::BoundaryZero { .. } | GafError::NotConverged { .. })) => {
                log::debug!("contour retry {retry}: {e}");
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_counts_for_z_squared_minus_one() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let big = count_disk(&p, c(0.0, 0.0), 2.0, 2).unwrap();
        assert_eq!(big.count, 2);
        assert!(big.integer_gap() < INTEGER_GAP);
        assert_eq!(count_disk(&p, c(0.0, 0.0), 0.5, 2).unwrap().count, 0);
        assert_eq!(count_disk(&p, c(1.0, 0.0), 0.5, 2).unwrap().count, 1);
    }

    #[test]
    fn rect_counts() {
        let p = Polynomial::from_roots(&[c(0.2, 0.3), c(-0.7, 0.1), c(0.5, -0.5)]);
        assert_eq!(count_rect(&p, c(-1.0, -1.0), c(1.0, 1.0)).unwrap().count, 3);
        assert_eq!(count_rect(&p, c(0.0, 0.0), c(1.0, 1.0)).unwrap().count, 1);
        assert_eq!(count_rect(&p, c(0.0, -1.0), c(1.0, 0.0)).unwrap().count, 1);
        assert_eq!(count_rect(&p, c(-0.4, -0.4), c(-0.1, -0.1)).unwrap().count, 0);
    }

    #[test]
    fn zero_on_contour_is_detected_and_jitter_recovers() {
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(-0.3, 0.2)]);
        let err = count_disk(&p, c(0.0, 0.0), 1.0, 2).unwrap_err();
        assert!(matches!(err, GafError::BoundaryZero { .. } | GafError::NotConverged { .. }));
        let region = Region::disk(c(0.0, 0.0), 1.0).unwrap();
        let (cnt, retries) = count_region_jittered(&p, &region, 2).unwrap();
        assert!(retries >= 1);
        assert_eq!(cnt.count, 2);
    }

    #[test]
    fn close_to_contour_still_converges() {
        let p = Polynomial::from_roots(&[c(0.999, 0.0), c(0.0, 1.001)]);
        let cnt = count_disk(&p, c(0.0, 0.0), 1.0, 2).unwrap();
        assert_eq!(cnt.count, 1);
        assert!(cnt.integer_gap() < INTEGER_GAP);
    }
}
