//! The first intensity of the zero set, `mu = (1/2 pi) Laplacian log ||Psi|| dm`,
//! in closed form and by finite differences, and its integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deviations::TestFunction;
use crate::ensembles::{CurveFamily, Ensemble, Kernel, Region};
use crate::error::{invalid, GafError, Result};
use crate::quad;

const QUAD_REL: f64 = 1e-11;
const GL_POINTS: usize = 16;
const PANELS: usize = 8;
const ANGLES: usize = 128;

/// Density per unit area for the families with a closed-form norm.
pub fn density_closed(family: &CurveFamily, z: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr();
    match family {
        CurveFamily::Planar => Ok(1.0 / PI),
        CurveFamily::Hyperbolic => {
            if r2 >= 1.0 {
                return Err(GafError::OutsideDomain { z });
            }
            Ok(1.0 / (PI * (1.0 - r2).powi(2)))
        }
        CurveFamily::Kostlan { n } => Ok(*n as f64 / (PI * (1.0 + r2).powi(2))),
        CurveFamily::Explicit(_) => Err(GafError::NoClosedForm),
    }
}

fn stencil(f: &impl Fn(Complex64) -> f64, z: Complex64, h: f64) -> f64 {
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    (f(z + dx) + f(z - dx) + f(z + dy) + f(z - dy) - 4.0 * f(z)) / (h * h)
}

/// Five-point Laplacian at steps `h` and `h/2`, Richardson-combined.
pub fn richardson_laplacian(f: impl Fn(Complex64) -> f64, z: Complex64, h: f64) -> f64 {
    let coarse = stencil(&f, z, h);
    let fine = stencil(&f, z, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// `(1/4 pi) Laplacian log K(z, z)` for any kernel; no domain checks.
pub fn kernel_density<K: Kernel + ?Sized>(kernel: &K, z: Complex64, h: f64) -> f64 {
    richardson_laplacian(|w| kernel.log_squared_norm(w), z, h) / (4.0 * PI)
}

/// Finite-difference density; every stencil point must lie in the domain.
pub fn density_numeric(ensemble: &Ensemble, z: Complex64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("step must be positive, got {h}")));
    }
    for w in [z, z + h, z - h, z + Complex64::new(0.0, h), z - Complex64::new(0.0, h)] {
        ensemble.check_point(w)?;
    }
    Ok(kernel_density(ensemble, z, h))
}

/// Closed form where available, otherwise finite differences with step `h`.
pub fn density(ensemble: &Ensemble, z: Complex64, h: f64) -> Result<f64> {
    match ensemble.family() {
        CurveFamily::Explicit(_) => density_numeric(ensemble, z, h),
        f => {
            ensemble.check_point(z)?;
            density_closed(f, z)
        }
    }
}

/// Closed-form density depends only on `|z|`.
fn radial_about_origin(family: &CurveFamily) -> bool {
    !matches!(family, CurveFamily::Explicit(_))
}

fn check_region(ensemble: &Ensemble, region: &Region) -> Result<()> {
    if !ensemble.domain().contains_region(region) {
        return Err(GafError::RegionOutsideDomain);
    }
    if matches!(ensemble.family(), CurveFamily::Hyperbolic) {
        let far = match *region {
            Region::Disk { center, radius } => center.norm() + radius,
            Region::Rect { lo, hi } => [lo, hi, Complex64::new(lo.re, hi.im), Complex64::new(hi.re, lo.im)]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max),
        };
        if far >= 1.0 {
            return Err(GafError::RegionOutsideDomain);
        }
    }
    Ok(())
}

fn default_step(region: &Region) -> f64 {
    1e-3 * region.scale()
}

/// `mu(region)`.
pub fn mu_region(ensemble: &Ensemble, region: &Region) -> Result<f64> {
    check_region(ensemble, region)?;
    let family = ensemble.family();
    if let Region::Disk { center, radius } = *region {
        if center == Complex64::new(0.0, 0.0) || matches!(family, CurveFamily::Planar) {
            let r2 = radius * radius;
            let closed = match family {
                CurveFamily::Planar => Some(r2),
                CurveFamily::Hyperbolic if center.norm() == 0.0 => Some(r2 / (1.0 - r2)),
                CurveFamily::Kostlan { n } if center.norm() == 0.0 => Some(*n as f64 * r2 / (1.0 + r2)),
                _ => None,
            };
            if let Some(v) = closed {
                return Ok(v);
            }
        }
    }
    if let (CurveFamily::Planar, Region::Rect { lo, hi }) = (family, *region) {
        return Ok((hi.re - lo.re) * (hi.im - lo.im) / PI);
    }
    let h = default_step(region);
    let rho = |z: Complex64| match family {
        CurveFamily::Explicit(_) => kernel_density(ensemble, z, h),
        f => density_closed(f, z).unwrap_or(f64::NAN),
    };
    let v = integrate_region(&rho, region, &[]);
    if v.is_finite() {
        Ok(v.max(0.0))
    } else {
        Err(GafError::NotConverged { value: v })
    }
}

/// `int rho dm` over a region with a fixed composite rule: Gauss–Legendre
/// panels in the polar radius (about the disk center) or in each
/// coordinate, trapezoid in the angle. `radial_breaks` are extra panel
/// edges in the polar radius. A fixed rule keeps finite-difference noise in
/// `rho` from driving adaptive refinement.
fn integrate_region(rho: &impl Fn(Complex64) -> f64, region: &Region, radial_breaks: &[f64]) -> f64 {
    let (nodes, weights) = quad::gauss_legendre(GL_POINTS);
    let panel = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        nodes.iter().zip(&weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    };
    let composite = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let step = (b - a) / PANELS as f64;
        (0..PANELS)
            .map(|k| panel(a + step * k as f64, a + step * (k + 1) as f64, f))
            .sum()
    };
    match *region {
        Region::Disk { center, radius } => {
            let mut breaks = vec![0.0];
            breaks.extend(radial_breaks.iter().copied().filter(|&b| b > 0.0 && b < radius));
            breaks.push(radius);
            let ring = |t: f64| {
                let s: f64 = (0..ANGLES)
                    .map(|j| rho(center + Complex64::from_polar(t, 2.0 * PI * j as f64 / ANGLES as f64)))
                    .sum();
                t * s * 2.0 * PI / ANGLES as f64
            };
            breaks.windows(2).map(|w| composite(w[0], w[1], &ring)).sum()
        }
        Region::Rect { lo, hi } => composite(lo.re, hi.re, &|x| {
            composite(lo.im, hi.im, &|y| rho(Complex64::new(x, y)))
        }),
    }
}

/// `int phi dmu` for a radial bump `phi`.
pub fn mu_against(ensemble: &Ensemble, phi: &TestFunction) -> Result<f64> {
    let support = Region::disk(phi.center(), phi.outer())?;
    check_region(ensemble, &support)?;
    let family = ensemble.family();
    let (r, big_r) = (phi.inner(), phi.outer());
    let centered = phi.center() == Complex64::new(0.0, 0.0);
    if radial_about_origin(family) && (centered || matches!(family, CurveFamily::Planar)) {
        let integrand = |t: f64| {
            let rho = density_closed(family, Complex64::new(t, 0.0)).unwrap_or(f64::NAN);
            phi.profile(t) * rho * 2.0 * PI * t
        };
        let v = quad::integrate_pieces(integrand, &[0.0, r, big_r], 1e-14, QUAD_REL);
        return if v.is_finite() { Ok(v) } else { Err(GafError::NotConverged { value: v }) };
    }
    let h = default_step(&support);
    let rho = |z: Complex64| {
        let d = match family {
            CurveFamily::Explicit(_) => kernel_density(ensemble, z, h),
            f => density_closed(f, z).unwrap_or(f64::NAN),
        };
        d * phi.eval(z)
    };
    let v = integrate_region(&rho, &support, &[r]);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GafError::NotConverged { value: v })
    }
}

/// One grid cell center with its density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub re: f64,
    pub im: f64,
    /// Closed-form value when the family has one.
    pub closed: Option<f64>,
    pub numeric: f64,
}

/// Densities at the `width x height` cell centers of the region's bounding
/// box that fall inside the region.
pub fn density_grid(ensemble: &Ensemble, region: &Region, width: usize, height: usize, h: Option<f64>) -> Result<Vec<DensityPoint>> {
    if width == 0 || height == 0 {
        return Err(invalid("grid", "dimensions must be positive"));
    }
    check_region(ensemble, region)?;
    let h = h.unwrap_or_else(|| default_step(region));
    let (lo, hi) = region.bounding_rect();
    let mut out = Vec::with_capacity(width * height);
    for j in 0..height {
        for i in 0..width {
            let z = Complex64::new(
                lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / width as f64,
                lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / height as f64,
            );
            if !region.contains(z) {
                continue;
            }
            let numeric = density_numeric(ensemble, z, h)?;
            let closed = match ensemble.family() {
                CurveFamily::Explicit(_) => None,
                f => Some(density_closed(f, z)?),
            };
            out.push(DensityPoint { re: z.re, im: z.im, closed, numeric });
        }
    }
    Ok(out)
}

pub fn grid_to_csv(points: &[DensityPoint]) -> String {
    let mut s = String::from("re,im,density,closed\n");
    for p in points {
        let closed = p.closed.map(|c| format!("{c:.17e}")).unwrap_or_default();
        s.push_str(&format!("{:.17e},{:.17e},{:.17e},{}\n", p.re, p.im, p.numeric, closed));
    }
    s
}
