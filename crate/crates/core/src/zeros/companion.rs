//! Polynomial roots as eigenvalues of the companion matrix.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{invalid, GafError, Result};
use crate::poly::Polynomial;

/// Eigenvalues of the (rescaled) companion matrix of `p`, each polished by
/// Newton steps that are kept only while they reduce the residual.
pub fn companion_eigenvalues(p: &Polynomial) -> Result<Vec<Complex64>> {
    let degree = p.degree().ok_or_else(|| invalid("polynomial", "zero polynomial has no roots"))?;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let a = &p.coeffs()[..=degree];
    // count and strip roots at the origin
    let low = a.iter().position(|c| c.norm_sqr() > 0.0).unwrap();
    let a = &a[low..];
    let d = a.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    if d == 0 {
        return Ok(roots);
    }
    // z = s y equilibrates |a_0| and |a_d s^d|
    let s = (a[0].norm() / a[d].norm()).powf(1.0 / d as f64);
    let lead = a[d] * s.powi(d as i32);
    let b: Vec<Complex64> = a
        .iter()
        .enumerate()
        .map(|(k, &c)| c * s.powi(k as i32) / lead)
        .collect();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -b[i];
    }
    let schur = Schur::try_new(m, f64::EPSILON, 100_000).ok_or(GafError::NotConverged { value: f64::NAN })?;
    let eig = schur.eigenvalues().ok_or(GafError::NotConverged { value: f64::NAN })?;
    for y in eig.iter() {
        roots.push(polish(p, *y * s));
    }
    Ok(roots)
}

fn polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    let mut res = p.eval(z).norm();
    for _ in 0..8 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm_sqr() == 0.0 {
            break;
        }
        let next = z - v / dv;
        let r = p.eval(next).norm();
        if !(r < res) {
            break;
        }
        z = next;
        res = r;
    }
    z
}

/// Relative size below which `p^(k)` counts as vanishing at a cluster center.
const MULTIPLE_ROOT_TOL: f64 = 1e-12;

/// Group roots into `(location, multiplicity)`.
///
/// Roots closer than `merge_tol` are always merged. Looser clusters (within
/// `1e-4` of the root scale) are merged only when the polynomial and its
/// first `m - 1` derivatives all vanish at the refined cluster center to relative
/// accuracy `1e-12`, which separates a perturbed multiple root from two
/// distinct nearby roots.
pub fn cluster_roots(p: &Polynomial, roots: &[Complex64], merge_tol: f64) -> Vec<(Complex64, usize)> {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let loose = (1e-4 * scale).max(merge_tol);
    let n = roots.len();
    // single-linkage components at the loose tolerance
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= loose {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut index_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut label, i);
        if index_of[r] == usize::MAX {
            index_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of[r]].push(roots[i]);
    }
    let mut out = Vec::new();
    for g in groups {
        if g.len() == 1 {
            out.push((g[0], 1));
        } else if let Some(c) = multiple_root_center(p, &g) {
            out.push((c, g.len()));
        } else {
            // keep the tight merges only
            out.extend(merge_tight(&g, merge_tol));
        }
    }
    out
}

/// Center of an `m`-fold root: Newton on `p^(m-1)`, whose root there is
/// simple, then `p, ..., p^(m-2)` must vanish at it.
fn multiple_root_center(p: &Polynomial, group: &[Complex64]) -> Option<Complex64> {
    let m = group.len();
    let mut derivs = vec![p.clone()];
    for _ in 0..m {
        let next = derivs.last().unwrap().derivative();
        derivs.push(next);
    }
    let (q, dq) = (&derivs[m - 1], &derivs[m]);
    let mut c = group.iter().sum::<Complex64>() / m as f64;
    let mut res = q.eval(c).norm();
    for _ in 0..20 {
        let d = dq.eval(c);
        if d.norm_sqr() == 0.0 {
            break;
        }
        let next = c - q.eval(c) / d;
        let r = q.eval(next).norm();
        if !(r < res) {
            break;
        }
        c = next;
        res = r;
    }
    derivs[..m]
        .iter()
        .all(|d| {
            let scale = d.magnitude_scale(c);
            scale == 0.0 || d.eval(c).norm() <= MULTIPLE_ROOT_TOL * scale
        })
        .then_some(c)
}

fn merge_tight(g: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &r in g {
        match out.iter_mut().find(|(c, _)| (*c - r).norm() <= tol) {
            Some(entry) => {
                let m = entry.1 as f64;
                entry.0 = (entry.0 * m + r) / (m + 1.0);
                entry.1 += 1;
            }
            None => out.push((r, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let mut r: Vec<f64> = companion_eigenvalues(&p).unwrap().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 1.0).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triple_root_clusters() {
        let p = Polynomial::from_roots(&[c(2.0, 0.0); 3]);
        let roots = companion_eigenvalues(&p).unwrap();
        let groups = cluster_roots(&p, &roots, 1e-7 * 2.0);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].1, 3);
        assert!((groups[0].0 - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn nearby_distinct_roots_stay_separate() {
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(1.0 + 1e-5, 0.0), c(-1.0, 0.5)]);
        let roots = companion_eigenvalues(&p).unwrap();
        let groups = cluster_roots(&p, &roots, 1e-7);
        assert_eq!(groups.len(), 3);
    }

    #[test]
    fn roots_at_origin_are_stripped() {
        let p = Polynomial::from_real(&[0.0, 0.0, -1.0, 0.0, 1.0]);
        let roots = companion_eigenvalues(&p).unwrap();
        assert_eq!(roots.len(), 4);
        assert_eq!(roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }
}
