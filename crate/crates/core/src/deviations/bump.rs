use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad;

/// Radial `C^2` bump: `1` on `|z - c| <= r`, `0` beyond `R`, quintic
/// smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    center: Complex64,
    inner: f64,
    outer: f64,
    /// `||Laplacian phi||_{L^1} = int |Phi'' + Phi'/t| 2 pi t dt`.
    laplacian_l1: f64,
    /// `2 pi int (t |Phi''| + |Phi'|) dt`, the triangle-inequality bound.
    triangle_bound: f64,
}

fn smoothstep(u: f64) -> (f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        u3 * (10.0 - 15.0 * u + 6.0 * u2),
        30.0 * u2 * (1.0 - u) * (1.0 - u),
        60.0 * u * (1.0 - u) * (1.0 - 2.0 * u),
    )
}

/// Bump centered at the origin.
pub fn build_bump(inner: f64, outer: f64) -> Result<TestFunction> {
    TestFunction::new(Complex64::new(0.0, 0.0), inner, outer)
}

impl TestFunction {
    pub fn new(center: Complex64, inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && inner.is_finite()) {
            return Err(invalid("r", format!("inner radius must be positive, got {inner}")));
        }
        if !(outer > inner && outer.is_finite()) {
            return Err(invalid("R", format!("need r < R, got r = {inner}, R = {outer}")));
        }
        let mut f = Self {
            center,
            inner,
            outer,
            laplacian_l1: 0.0,
            triangle_bound: 0.0,
        };
        let tol = 1e-13 * outer;
        // g(t) = t Phi'' + Phi'; split |g| at its sign changes
        let g = |t: f64| t * f.d2(t) + f.d1(t);
        let n = 256;
        let mut breaks = vec![inner];
        let step = (outer - inner) / n as f64;
        for k in 0..n {
            let a = inner + step * k as f64;
            let b = a + step;
            let (ga, gb) = (g(a), g(b));
            if ga != 0.0 && gb != 0.0 && (ga < 0.0) != (gb < 0.0) {
                breaks.push(quad::bisect(g, a, b));
            }
        }
        breaks.push(outer);
        let l1 = 2.0 * PI * quad::integrate_pieces(|t| g(t).abs(), &breaks, tol, 1e-14);
        // |Phi''| changes sign at the midpoint of the transition
        let mid = 0.5 * (inner + outer);
        let tri = 2.0
            * PI
            * quad::integrate_pieces(|t| t * f.d2(t).abs() + f.d1(t).abs(), &[inner, mid, outer], tol, 1e-14);
        f.laplacian_l1 = l1;
        f.triangle_bound = tri;
        Ok(f)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn laplacian_l1(&self) -> f64 {
        self.laplacian_l1
    }

    pub fn triangle_bound(&self) -> f64 {
        self.triangle_bound
    }

    fn u(&self, t: f64) -> f64 {
        (self.outer - t) / (self.outer - self.inner)
    }

    /// `Phi(t)`.
    pub fn profile(&self, t: f64) -> f64 {
        if t <= self.inner {
            1.0
        } else if t >= self.outer {
            0.0
        } else {
            smoothstep(self.u(t)).0
        }
    }

    /// `Phi'(t)`.
    pub fn d1(&self, t: f64) -> f64 {
        if t <= self.inner || t >= self.outer {
            0.0
        } else {
            -smoothstep(self.u(t)).1 / (self.outer - self.inner)
        }
    }

    /// `Phi''(t)`.
    pub fn d2(&self, t: f64) -> f64 {
        if t <= self.inner || t >= self.outer {
            0.0
        } else {
            let w = self.outer - self.inner;
            smoothstep(self.u(t)).2 / (w * w)
        }
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.profile((z - self.center).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_identities() {
        let f = build_bump(1.0, 2.0).unwrap();
        assert_eq!(f.profile(1.0), 1.0);
        assert_eq!(f.profile(2.0), 0.0);
        // the polynomial pieces agree with the constants at the joins
        let (s0, d0, dd0) = smoothstep(0.0);
        let (s1, d1, dd1) = smoothstep(1.0);
        assert_eq!((s0, d0, dd0), (0.0, 0.0, 0.0));
        assert_eq!((s1, d1, dd1), (1.0, 0.0, 0.0));
        assert!(f.d1(1.0 + 1e-9).abs() < 1e-15 && f.d1(2.0 - 1e-9).abs() < 1e-15);
        assert!(f.d2(1.0 + 1e-9).abs() < 1e-7 && f.d2(2.0 - 1e-9).abs() < 1e-7);
        assert!((f.profile(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laplacian_norm_matches_dense_riemann_sum() {
        let f = build_bump(1.0, 2.0).unwrap();
        let n = 2_000_000;
        let h = 1.0 / n as f64;
        let sum: f64 = (0..n)
            .map(|k| {
                let t = 1.0 + (k as f64 + 0.5) * h;
                (t * f.d2(t) + f.d1(t)).abs()
            })
            .sum();
        let riemann = 2.0 * PI * sum * h;
        assert!((f.laplacian_l1() - riemann).abs() < 1e-8, "{} vs {riemann}", f.laplacian_l1());
        // high-precision reference value
        assert!((f.laplacian_l1() - 35.822_457_599_031_69).abs() < 1e-9);
        assert!(f.laplacian_l1() <= f.triangle_bound());
        assert!((f.triangle_bound() - 41.626_102_660_064_76).abs() < 1e-9);
    }

    #[test]
    fn scale_invariance() {
        let base = build_bump(1.0, 2.0).unwrap();
        for s in [0.1, 0.37, 3.0, 25.0] {
            let f = build_bump(s, 2.0 * s).unwrap();
            assert!((f.laplacian_l1() - base.laplacian_l1()).abs() < 1e-9 * base.laplacian_l1());
        }
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(build_bump(2.0, 1.0).is_err());
        assert!(build_bump(1.0, 1.0).is_err());
        assert!(build_bump(0.0, 1.0).is_err());
    }
}
