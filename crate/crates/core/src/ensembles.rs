//! Holomorphic curves `Psi = (psi_j)`, their domains, norms, reproducing
//! kernels and the truncation policy for infinite families.
//!
//! Throughout, `||Psi(z)||^2 = sum_j |psi_j(z)|^2` and
//! `K(z, w) = sum_j psi_j(z) conj(psi_j(w))`, so `K(z, z) = ||Psi(z)||^2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GafError, Result};
use crate::poly::Polynomial;

const CONTAIN_TOL: f64 = 1e-12;

/// Where a curve is evaluated. Every evaluation point is checked against it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    Disk { center: Complex64, radius: f64 },
    Rectangle { lo: Complex64, hi: Complex64 },
    PlaneWindow { radius: f64 },
}

impl Domain {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        let d = Domain::Disk { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn window(radius: f64) -> Result<Self> {
        let d = Domain::PlaneWindow { radius };
        d.validate()?;
        Ok(d)
    }

    /// Rectangle from two opposite corners in any order.
    pub fn rectangle(a: Complex64, b: Complex64) -> Result<Self> {
        let d = Domain::Rectangle {
            lo: Complex64::new(a.re.min(b.re), a.im.min(b.im)),
            hi: Complex64::new(a.re.max(b.re), a.im.max(b.im)),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Disk { radius, center } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(invalid("radius", format!("must be positive, got {radius}")));
                }
                if !(center.re.is_finite() && center.im.is_finite()) {
                    return Err(invalid("center", "must be finite"));
                }
            }
            Domain::PlaneWindow { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(invalid("radius", format!("must be positive, got {radius}")));
                }
            }
            Domain::Rectangle { lo, hi } => {
                if !(hi.re > lo.re && hi.im > lo.im) {
                    return Err(invalid(
                        "corners",
                        "rectangle corners must differ in both coordinates",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Domain::Disk { center, radius } => (z - center).norm() <= radius * (1.0 + CONTAIN_TOL),
            Domain::PlaneWindow { radius } => z.norm() <= radius * (1.0 + CONTAIN_TOL),
            Domain::Rectangle { lo, hi } => {
                let tol = CONTAIN_TOL * (hi - lo).norm();
                z.re >= lo.re - tol && z.re <= hi.re + tol && z.im >= lo.im - tol && z.im <= hi.im + tol
            }
        }
    }

    pub fn check(&self, z: Complex64) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(GafError::OutsideDomain { z })
        }
    }

    /// Largest `|z|` over the domain.
    pub fn max_modulus(&self) -> f64 {
        match *self {
            Domain::Disk { center, radius } => center.norm() + radius,
            Domain::PlaneWindow { radius } => radius,
            Domain::Rectangle { lo, hi } => [lo, hi, Complex64::new(lo.re, hi.im), Complex64::new(hi.re, lo.im)]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max),
        }
    }

    /// Smallest `|z|` over the domain.
    pub fn min_modulus(&self) -> f64 {
        match *self {
            Domain::Disk { center, radius } => (center.norm() - radius).max(0.0),
            Domain::PlaneWindow { .. } => 0.0,
            Domain::Rectangle { lo, hi } => {
                let x = if lo.re > 0.0 { lo.re } else if hi.re < 0.0 { -hi.re } else { 0.0 };
                let y = if lo.im > 0.0 { lo.im } else if hi.im < 0.0 { -hi.im } else { 0.0 };
                x.hypot(y)
            }
        }
    }

    pub fn contains_region(&self, region: &Region) -> bool {
        match *region {
            Region::Disk { center, radius } => match *self {
                Domain::Disk { center: c, radius: r } => {
                    (center - c).norm() + radius <= r * (1.0 + CONTAIN_TOL)
                }
                Domain::PlaneWindow { radius: r } => center.norm() + radius <= r * (1.0 + CONTAIN_TOL),
                Domain::Rectangle { lo, hi } => {
                    let tol = CONTAIN_TOL * (hi - lo).norm();
                    center.re - radius >= lo.re - tol
                        && center.re + radius <= hi.re + tol
                        && center.im - radius >= lo.im - tol
                        && center.im + radius <= hi.im + tol
                }
            },
            Region::Rect { lo, hi } => region_corners(lo, hi).iter().all(|&c| self.contains(c)),
        }
    }
}

fn region_corners(lo: Complex64, hi: Complex64) -> [Complex64; 4] {
    [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)]
}

/// A region in which zeros are counted or located.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    Rect { lo: Complex64, hi: Complex64 },
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Region::Disk { center, radius })
    }

    pub fn rect(a: Complex64, b: Complex64) -> Result<Self> {
        let lo = Complex64::new(a.re.min(b.re), a.im.min(b.im));
        let hi = Complex64::new(a.re.max(b.re), a.im.max(b.im));
        if !(hi.re > lo.re && hi.im > lo.im) {
            return Err(invalid("region", "rectangle corners must differ in both coordinates"));
        }
        Ok(Region::Rect { lo, hi })
    }

    /// Parses `disk:cx,cy,r` or `rect:x0,y0,x1,y1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| invalid("region", format!("expected `disk:cx,cy,r` or `rect:x0,y0,x1,y1`, got `{spec}`")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid("region", format!("bad number in `{spec}`: {e}")))?;
        match (kind, nums.as_slice()) {
            ("disk", [cx, cy, r]) => Region::disk(Complex64::new(*cx, *cy), *r),
            ("rect", [x0, y0, x1, y1]) => Region::rect(Complex64::new(*x0, *y0), Complex64::new(*x1, *y1)),
            _ => Err(invalid("region", format!("cannot parse `{spec}`"))),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() < radius,
            Region::Rect { lo, hi } => z.re > lo.re && z.re < hi.re && z.im > lo.im && z.im < hi.im,
        }
    }

    /// Half the diameter; the length scale for tolerances.
    pub fn scale(&self) -> f64 {
        match *self {
            Region::Disk { radius, .. } => radius,
            Region::Rect { lo, hi } => 0.5 * (hi - lo).norm(),
        }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Region::Disk { center, .. } => center,
            Region::Rect { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// Smallest axis-aligned rectangle containing the region.
    pub fn bounding_rect(&self) -> (Complex64, Complex64) {
        match *self {
            Region::Disk { center, radius } => (
                center - Complex64::new(radius, radius),
                center + Complex64::new(radius, radius),
            ),
            Region::Rect { lo, hi } => (lo, hi),
        }
    }

    /// Same region with the disk radius scaled; rectangles grow about
    /// their center.
    pub fn dilated(&self, factor: f64) -> Region {
        match *self {
            Region::Disk { center, radius } => Region::Disk {
                center,
                radius: radius * factor,
            },
            Region::Rect { lo, hi } => {
                let c = 0.5 * (lo + hi);
                Region::Rect {
                    lo: c + (lo - c) * factor,
                    hi: c + (hi - c) * factor,
                }
            }
        }
    }
}

/// The curve `Psi`.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveFamily {
    /// `psi_j = z^j / sqrt(j!)`, on a bounded plane window.
    Planar,
    /// `psi_j = z^j` on the unit disk.
    Hyperbolic,
    /// `psi_j = sqrt(C(n, j)) z^j`, `0 <= j <= n`.
    Kostlan { n: usize },
    /// Finitely many polynomial components.
    Explicit(ExplicitCurve),
}

impl CurveFamily {
    pub fn is_infinite(&self) -> bool {
        matches!(self, CurveFamily::Planar | CurveFamily::Hyperbolic)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurveFamily::Planar => "planar",
            CurveFamily::Hyperbolic => "hyperbolic",
            CurveFamily::Kostlan { .. } => "kostlan",
            CurveFamily::Explicit(_) => "explicit",
        }
    }

    /// `||Psi(z)||^2` in closed form, when one exists.
    pub fn closed_squared_norm(&self, z: Complex64) -> Option<f64> {
        let r2 = z.norm_sqr();
        match self {
            CurveFamily::Planar => Some(r2.exp()),
            CurveFamily::Hyperbolic => Some(1.0 / (1.0 - r2)),
            CurveFamily::Kostlan { n } => Some((1.0 + r2).powi(*n as i32)),
            CurveFamily::Explicit(_) => None,
        }
    }

    pub fn closed_kernel(&self, z: Complex64, w: Complex64) -> Option<Complex64> {
        let zw = z * w.conj();
        let one = Complex64::new(1.0, 0.0);
        match self {
            CurveFamily::Planar => Some(zw.exp()),
            CurveFamily::Hyperbolic => Some(one / (one - zw)),
            CurveFamily::Kostlan { n } => Some((one + zw).powu(*n as u32)),
            CurveFamily::Explicit(_) => None,
        }
    }

    /// Coefficient `c_j` in `psi_j = c_j z^j` for the monomial families.
    pub fn monomial_scale(&self, j: usize) -> Option<f64> {
        match self {
            CurveFamily::Planar => Some((-0.5 * ln_factorial(j)).exp()),
            CurveFamily::Hyperbolic => Some(1.0),
            CurveFamily::Kostlan { n } if j <= *n => {
                Some((0.5 * (ln_factorial(*n) - ln_factorial(j) - ln_factorial(n - j))).exp())
            }
            _ => None,
        }
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Polynomial components `psi_j`, linearly independent and without a
/// common zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCurve {
    rows: Vec<Polynomial>,
}

impl ExplicitCurve {
    pub fn new(rows: Vec<Polynomial>) -> Result<Self> {
        let curve = Self::new_unchecked_common_zero(rows)?;
        if let Some(z) = curve.common_zero() {
            return Err(GafError::KernelVanishes { z });
        }
        Ok(curve)
    }

    /// Only checks shape and linear independence; a shared zero is allowed.
    /// Rigidity experiments use this for curves carrying a `g` factor.
    pub(crate) fn new_unchecked_common_zero(rows: Vec<Polynomial>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("coeffs", "at least one component is required"));
        }
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        if width == 0 {
            return Err(invalid("coeffs", "components must have coefficients"));
        }
        let m = coefficient_matrix(&rows, width);
        let rank = numerical_rank(&m);
        if rank < rows.len() {
            return Err(GafError::RankDeficient {
                rank,
                expected: rows.len(),
            });
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Polynomial] {
        &self.rows
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.rows.iter().map(|r| r.eval(z)).collect()
    }

    pub fn squared_norm(&self, z: Complex64) -> f64 {
        self.rows.iter().map(|r| r.eval(z).norm_sqr()).sum()
    }

    pub fn kernel(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.rows.iter().map(|r| r.eval(z) * r.eval(w).conj()).sum()
    }

    /// A point where every component vanishes, if any.
    fn common_zero(&self) -> Option<Complex64> {
        // a nonzero constant component rules out common zeros
        let pivot = self
            .rows
            .iter()
            .filter(|r| r.degree().is_some())
            .min_by_key(|r| r.degree())?;
        if pivot.degree() == Some(0) {
            return None;
        }
        let roots = crate::zeros::companion_eigenvalues(pivot).ok()?;
        roots.into_iter().find(|&z| {
            self.rows.iter().all(|r| {
                let scale = r.magnitude_scale(z).max(f64::MIN_POSITIVE);
                r.eval(z).norm() <= 1e-9 * scale
            })
        })
    }
}

pub(crate) fn coefficient_matrix(rows: &[Polynomial], width: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), width, |i, k| {
        rows[i].coeffs().get(k).copied().unwrap_or_default()
    })
}

pub(crate) fn numerical_rank(m: &DMatrix<Complex64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    let tol = top * 1e-12 * (m.nrows().max(m.ncols()) as f64);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Controls how far an infinite series is summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub epsilon: f64,
    pub max_order: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_order: 4096,
        }
    }
}

/// Smallest `N*` such that the tail beyond `N*` at the domain's largest
/// modulus is at most `epsilon^2` times the head at its smallest modulus.
/// Finite families pass their top index through unchanged.
pub fn truncation_order(family: &CurveFamily, domain: &Domain, policy: &TruncationPolicy) -> Result<usize> {
    if !(policy.epsilon > 0.0 && policy.epsilon < 1.0) {
        return Err(invalid("epsilon", format!("must lie in (0, 1), got {}", policy.epsilon)));
    }
    let log_target = 2.0 * policy.epsilon.ln();
    let unreachable = || GafError::TruncationUnreachable {
        epsilon: policy.epsilon,
        max_order: policy.max_order,
    };
    let r_max = domain.max_modulus();
    let r_min = domain.min_modulus();
    match family {
        CurveFamily::Kostlan { n } => Ok(*n),
        CurveFamily::Explicit(c) => Ok(c.dimension() - 1),
        CurveFamily::Hyperbolic => {
            if r_max >= 1.0 {
                return Err(unreachable());
            }
            let q_max = r_max * r_max;
            let q_min = r_min * r_min;
            for n in 0..=policy.max_order {
                // tail sum_{j>n} q^j = q^{n+1}/(1-q); head sum_{j<=n} = (1-q^{n+1})/(1-q)
                let log_tail = (n as f64 + 1.0) * q_max.ln() - (1.0 - q_max).ln();
                let head = if q_min == 0.0 {
                    1.0
                } else {
                    (1.0 - q_min.powi(n as i32 + 1)) / (1.0 - q_min)
                };
                if q_max == 0.0 || log_tail - head.ln() <= log_target {
                    return Ok(n);
                }
            }
            Err(unreachable())
        }
        CurveFamily::Planar => {
            let q_max = r_max * r_max;
            let q_min = r_min * r_min;
            if q_max == 0.0 {
                return Ok(0);
            }
            // log of r^{2j}/j!, summed in scaled form
            let j_cap = policy.max_order + 64;
            let log_terms = |q: f64| -> Vec<f64> {
                let lq = q.ln();
                let mut lf = 0.0;
                (0..=j_cap)
                    .map(|j| {
                        if j > 0 {
                            lf += (j as f64).ln();
                        }
                        if q == 0.0 {
                            if j == 0 { 0.0 } else { f64::NEG_INFINITY }
                        } else {
                            j as f64 * lq - lf
                        }
                    })
                    .collect()
            };
            let lt_max = log_terms(q_max);
            let lt_min = log_terms(q_min);
            let m = lt_max.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut suffix = vec![0.0; j_cap + 2];
            for j in (0..=j_cap).rev() {
                suffix[j] = suffix[j + 1] + (lt_max[j] - m).exp();
            }
            let mut head = 0.0;
            for n in 0..=policy.max_order {
                head += lt_min[n].exp();
                let tail = suffix[n + 1];
                if tail == 0.0 {
                    return Ok(n);
                }
                if m + tail.ln() - head.ln() <= log_target {
                    return Ok(n);
                }
            }
            Err(unreachable())
        }
    }
}

/// A curve bound to its domain, with the truncation order already resolved.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Ensemble {
    family: CurveFamily,
    domain: Domain,
    policy: TruncationPolicy,
    order: usize,
}

impl Ensemble {
    pub fn new(family: CurveFamily, domain: Domain, policy: TruncationPolicy) -> Result<Self> {
        domain.validate()?;
        match (&family, &domain) {
            (CurveFamily::Planar, Domain::PlaneWindow { .. }) => {}
            (CurveFamily::Planar, _) => {
                return Err(invalid("domain", "the planar family is exposed only through a plane-window"))
            }
            (CurveFamily::Hyperbolic, _) if domain.max_modulus() >= 1.0 => {
                return Err(invalid("domain", "hyperbolic domain must lie strictly inside the unit disk"))
            }
            (CurveFamily::Kostlan { n }, _) if *n == 0 => {
                return Err(invalid("n", "Kostlan degree must be positive"))
            }
            _ => {}
        }
        let order = truncation_order(&family, &domain, &policy)?;
        Ok(Self {
            family,
            domain,
            policy,
            order,
        })
    }

    pub fn planar(window: f64) -> Result<Self> {
        Self::new(CurveFamily::Planar, Domain::window(window)?, TruncationPolicy::default())
    }

    pub fn hyperbolic(radius: f64) -> Result<Self> {
        Self::new(
            CurveFamily::Hyperbolic,
            Domain::disk(Complex64::new(0.0, 0.0), radius)?,
            TruncationPolicy::default(),
        )
    }

    pub fn kostlan(n: usize, window: f64) -> Result<Self> {
        Self::new(CurveFamily::Kostlan { n }, Domain::window(window)?, TruncationPolicy::default())
    }

    pub fn explicit(rows: Vec<Polynomial>, domain: Domain) -> Result<Self> {
        Self::new(
            CurveFamily::Explicit(ExplicitCurve::new(rows)?),
            domain,
            TruncationPolicy::default(),
        )
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    /// Highest retained component index.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of Gaussian coefficients a sample carries.
    pub fn num_coefficients(&self) -> usize {
        self.order + 1
    }

    pub(crate) fn check_point(&self, z: Complex64) -> Result<()> {
        if matches!(self.family, CurveFamily::Hyperbolic) && z.norm() >= 1.0 {
            return Err(GafError::OutsideDomain { z });
        }
        self.domain.check(z)
    }

    /// `||Psi(z)||^2`, closed form where available.
    pub fn squared_norm(&self, z: Complex64) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.squared_norm_unchecked(z))
    }

    pub fn kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        self.check_point(w)?;
        Ok(self.kernel_unchecked(z, w))
    }

    pub(crate) fn squared_norm_unchecked(&self, z: Complex64) -> f64 {
        match &self.family {
            CurveFamily::Explicit(c) => c.squared_norm(z),
            f => f.closed_squared_norm(z).unwrap(),
        }
    }

    pub(crate) fn kernel_unchecked(&self, z: Complex64, w: Complex64) -> Complex64 {
        match &self.family {
            CurveFamily::Explicit(c) => c.kernel(z, w),
            f => f.closed_kernel(z, w).unwrap(),
        }
    }

    /// `sum_{j <= N*} |psi_j(z)|^2`, the truncated series.
    pub fn truncated_squared_norm(&self, z: Complex64) -> Result<f64> {
        self.check_point(z)?;
        Ok(match &self.family {
            CurveFamily::Explicit(c) => c.squared_norm(z),
            f => {
                let r2 = z.norm_sqr();
                let mut pow = 1.0;
                let mut s = 0.0;
                for j in 0..=self.order {
                    let c = f.monomial_scale(j).unwrap();
                    s += c * c * pow;
                    pow *= r2;
                }
                s
            }
        })
    }

    /// Truncated kernel series, for cross-checking the closed forms.
    pub fn truncated_kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        self.check_point(w)?;
        Ok(match &self.family {
            CurveFamily::Explicit(c) => c.kernel(z, w),
            f => {
                let zw = z * w.conj();
                let mut pow = Complex64::new(1.0, 0.0);
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..=self.order {
                    let c = f.monomial_scale(j).unwrap();
                    s += pow * (c * c);
                    pow *= zw;
                }
                s
            }
        })
    }

    /// The polynomial `sum_j omega_j psi_j(z)` for a coefficient vector.
    pub fn realize(&self, omega: &[Complex64]) -> Polynomial {
        match &self.family {
            CurveFamily::Explicit(c) => c
                .rows()
                .iter()
                .zip(omega)
                .fold(Polynomial::new(vec![Complex64::new(0.0, 0.0)]), |acc, (row, &w)| {
                    acc.add(&Polynomial::new(row.coeffs().iter().map(|&a| a * w).collect()))
                }),
            f => Polynomial::new(
                omega
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| w * f.monomial_scale(j).unwrap())
                    .collect(),
            ),
        }
    }
}

/// Anything with a reproducing kernel that can be evaluated off and on the
/// diagonal.
pub trait Kernel {
    fn kernel_at(&self, z: Complex64, w: Complex64) -> Complex64;

    /// `log K(z, z)`; overridden where a closed form avoids overflow.
    fn log_squared_norm(&self, z: Complex64) -> f64 {
        self.kernel_at(z, z).re.ln()
    }
}

impl Kernel for Ensemble {
    fn kernel_at(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.kernel_unchecked(z, w)
    }

    fn log_squared_norm(&self, z: Complex64) -> f64 {
        let r2 = z.norm_sqr();
        match &self.family {
            CurveFamily::Planar => r2,
            CurveFamily::Hyperbolic => -(-r2).ln_1p(),
            CurveFamily::Kostlan { n } => *n as f64 * r2.ln_1p(),
            CurveFamily::Explicit(c) => c.squared_norm(z).ln(),
        }
    }
}

impl Kernel for ExplicitCurve {
    fn kernel_at(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.kernel(z, w)
    }
}
