//! Quadtree isolation driven by contour counts, then Newton refinement.

use num_complex::Complex64;

use super::contour::{count_rect, count_region_jittered, Analytic, ContourCount};
use super::{Method, Zero, ZeroSet, MERGE_TOLERANCE};
use crate::ensembles::Region;
use crate::error::{GafError, Result};
use crate::poly::Polynomial;

/// Split-point offsets (fractions of the cell side) tried in order when a
/// child contour passes too close to a zero.
const SPLIT_JITTER: [(f64, f64); 6] = [
    (0.0123, 0.0211),
    (-0.0317, 0.0143),
    (0.0417, -0.0373),
    (-0.0531, -0.0459),
    (0.0677, 0.0611),
    (-0.0791, 0.0733),
];

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: Complex64,
    hi: Complex64,
    count: usize,
}

impl Cell {
    fn size(&self) -> f64 {
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }

    fn center(&self) -> Complex64 {
        0.5 * (self.lo + self.hi)
    }

    fn contains_loose(&self, z: Complex64, slack: f64) -> bool {
        let s = slack * self.size();
        z.re >= self.lo.re - s && z.re <= self.hi.re + s && z.im >= self.lo.im - s && z.im <= self.hi.im + s
    }
}

fn count_cell(p: &Polynomial, lo: Complex64, hi: Complex64) -> Result<ContourCount> {
    count_rect(p, lo, hi)
}

fn split(p: &Polynomial, cell: &Cell) -> Result<[Cell; 4]> {
    let mut last = None;
    for (fx, fy) in SPLIT_JITTER {
        let mx = cell.lo.re + (0.5 + fx) * (cell.hi.re - cell.lo.re);
        let my = cell.lo.im + (0.5 + fy) * (cell.hi.im - cell.lo.im);
        let quads = [
            (cell.lo, Complex64::new(mx, my)),
            (Complex64::new(mx, cell.lo.im), Complex64::new(cell.hi.re, my)),
            (Complex64::new(cell.lo.re, my), Complex64::new(mx, cell.hi.im)),
            (Complex64::new(mx, my), cell.hi),
        ];
        let mut children = [*cell; 4];
        let mut ok = true;
        for (k, (lo, hi)) in quads.into_iter().enumerate() {
            match count_cell(p, lo, hi) {
                Ok(c) => children[k] = Cell { lo, hi, count: c.count },
                Err(e @ (GafError::BoundaryZero { .. } | GafError::NotConverged { .. })) => {
                    last = Some(e);
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok && children.iter().map(|c| c.count).sum::<usize>() == cell.count {
            return Ok(children);
        }
        if ok {
            log::debug!("child counts disagree with parent count {}; re-splitting", cell.count);
        }
    }
    Err(last.unwrap_or(GafError::NotConverged { value: cell.count as f64 }))
}

/// Newton (multiplicity 1) or Schröder (`m > 1`) iteration from `start`.
fn refine(p: &Polynomial, start: Complex64, multiplicity: usize, scale: f64) -> Option<Complex64> {
    let m = multiplicity as f64;
    let mut z = start;
    for _ in 0..80 {
        let (v, d) = p.value_and_derivative(z);
        if v.norm_sqr() == 0.0 {
            return Some(z);
        }
        if d.norm_sqr() == 0.0 || !d.re.is_finite() {
            return None;
        }
        let step = m * v / d;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(scale) {
            return Some(z);
        }
    }
    let (v, _) = p.value_and_derivative(z);
    (v.norm() <= 1e-12 * p.magnitude_scale(z)).then_some(z)
}

fn residual_ok(p: &Polynomial, z: Complex64) -> bool {
    p.eval(z).norm() <= 1e-12 * Analytic::magnitude_scale(p, z)
}

/// Locate all zeros of `p` strictly inside `region`.
///
/// Cells are split until each holds at most one zero (by contour count),
/// Newton is run from the cell center, and cells that shrink below the
/// merge tolerance while still holding `m >= 2` zeros become one zero of
/// multiplicity `m`. The result is checked against the argument-principle
/// count of the whole region.
pub fn locate_polynomial(p: &Polynomial, region: &Region) -> Result<ZeroSet> {
    let degree = p.len().saturating_sub(1);
    let (total, retries) = count_region_jittered(p, region, degree)?;
    let region = region.dilated(super::jitter_factor(retries));
    let scale = region.scale();
    let min_size = MERGE_TOLERANCE * scale;

    // top-level square, slightly larger than the region's bounding box
    let (blo, bhi) = region.bounding_rect();
    let c = 0.5 * (blo + bhi);
    let half = 0.5 * (bhi.re - blo.re).max(bhi.im - blo.im);
    let mut root = None;
    let mut last = None;
    for k in 0..6 {
        let h = half * (1.001 + 0.0037 * k as f64);
        let lo = c - Complex64::new(h, h);
        let hi = c + Complex64::new(h, h);
        match count_cell(p, lo, hi) {
            Ok(cnt) => {
                root = Some(Cell { lo, hi, count: cnt.count });
                break;
            }
            Err(e @ (GafError::BoundaryZero { .. } | GafError::NotConverged { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    let root = root.ok_or_else(|| last.unwrap())?;

    let mut found: Vec<Zero> = Vec::new();
    let mut stack = vec![root];
    while let Some(cell) = stack.pop() {
        if cell.count == 0 {
            continue;
        }
        if cell.count == 1 {
            if let Some(z) = refine(p, cell.center(), 1, scale) {
                if cell.contains_loose(z, 1e-9) && residual_ok(p, z) {
                    found.push(Zero { location: z, multiplicity: 1 });
                    continue;
                }
            }
            if cell.size() <= min_size {
                found.push(Zero { location: cell.center(), multiplicity: 1 });
                continue;
            }
        } else if cell.size() <= min_size {
            let z = refine(p, cell.center(), cell.count, scale)
                .filter(|&z| cell.contains_loose(z, 0.5))
                .unwrap_or_else(|| cell.center());
            found.push(Zero { location: z, multiplicity: cell.count });
            continue;
        }
        let children = split(p, &cell)?;
        // reverse push keeps the traversal order lo-left first
        stack.extend(children.into_iter().rev());
    }

    let inside: Vec<Zero> = merge(found, min_size)
        .into_iter()
        .filter(|z| region.contains(z.location))
        .collect();
    let located: usize = inside.iter().map(|z| z.multiplicity).sum();
    if located != total.count {
        return Err(GafError::BoundaryZero {
            min_relative: f64::NAN,
        });
    }
    Ok(ZeroSet {
        zeros: inside,
        region: Some(region),
        method: Method::ArgumentPrinciple,
    })
}

fn merge(zeros: Vec<Zero>, tol: f64) -> Vec<Zero> {
    let mut out: Vec<Zero> = Vec::with_capacity(zeros.len());
    for z in zeros {
        match out.iter_mut().find(|o| (o.location - z.location).norm() <= tol) {
            Some(o) => {
                let (a, b) = (o.multiplicity as f64, z.multiplicity as f64);
                o.location = (o.location * a + z.location * b) / (a + b);
                o.multiplicity += z.multiplicity;
            }
            None => out.push(z),
        }
    }
    out
}
