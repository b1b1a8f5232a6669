use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{unitarity_defect, KernelModel};
use crate::ensembles::Kernel;
use crate::error::{invalid, GafError, Result};
use crate::intensity::richardson_laplacian;

/// `d = log K_1 - log K_2` counts as harmonic below this Laplacian.
pub const HARMONIC_TOLERANCE: f64 = 1e-6;

const VANISH: f64 = 1e-300;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RieszReport {
    pub points: usize,
    pub step: f64,
    /// `max |Laplacian (log K_1 - log K_2)|` over the grid.
    pub max_laplacian: f64,
    pub tolerance: f64,
    pub same_measure: bool,
}

/// `n x n` cell centers of the square of half-width `half` about `center`.
pub fn square_grid(center: Complex64, half: f64, n: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            pts.push(center + Complex64::new(
                -half + 2.0 * half * (i as f64 + 0.5) / n as f64,
                -half + 2.0 * half * (j as f64 + 0.5) / n as f64,
            ));
        }
    }
    pts
}

/// Compares the Riesz measures of `log K_1` and `log K_2` on a grid.
pub fn riesz_compare(m1: &KernelModel, m2: &KernelModel, grid: &[Complex64], h: f64) -> Result<RieszReport> {
    if grid.is_empty() {
        return Err(invalid("grid", "no points"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("step must be positive, got {h}")));
    }
    let mut max_laplacian: f64 = 0.0;
    for &z in grid {
        for w in [z, z + h, z - h, z + Complex64::new(0.0, h), z - Complex64::new(0.0, h)] {
            for m in [m1, m2] {
                let k = m.kernel_at(w, w).re;
                if !(k > VANISH) || !m.log_squared_norm(w).is_finite() {
                    return Err(GafError::KernelVanishes { z: w });
                }
            }
        }
        let lap = richardson_laplacian(|w| m1.log_squared_norm(w) - m2.log_squared_norm(w), z, h);
        max_laplacian = max_laplacian.max(lap.abs());
    }
    Ok(RieszReport {
        points: grid.len(),
        step: h,
        max_laplacian,
        tolerance: HARMONIC_TOLERANCE,
        same_measure: max_laplacian <= HARMONIC_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValue {
    pub z: Complex64,
    pub g: Complex64,
}

/// Evidence that `Psi_2(z) = g(z) U Psi_1(z)` at the sample points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    /// Row-major.
    pub u: Vec<Vec<Complex64>>,
    pub g_values: Vec<GValue>,
    /// `max_i ||Psi_2(z_i) - g(z_i) U Psi_1(z_i)|| / ||Psi_2(z_i)||`.
    pub residual: f64,
    /// `||U* U - I||_2`.
    pub unitarity_defect: f64,
}

impl EquivalenceCertificate {
    pub fn u_matrix(&self) -> DMatrix<Complex64> {
        let n = self.u.len();
        DMatrix::from_fn(n, n, |i, j| self.u[i][j])
    }
}

fn rows_at(m: &KernelModel, points: &[Complex64]) -> DMatrix<Complex64> {
    let vs: Vec<Vec<Complex64>> = points.iter().map(|&z| m.components(z)).collect();
    DMatrix::from_fn(points.len(), m.dimension(), |i, j| vs[i][j])
}

fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Least-squares `U^T` from `A_1 U^T = D^{-1} A_2`.
fn solve_u(a1: &DMatrix<Complex64>, a2: &DMatrix<Complex64>, g: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let mut rhs = a2.clone();
    for (i, gi) in g.iter().enumerate() {
        let inv = 1.0 / gi;
        for j in 0..rhs.ncols() {
            rhs[(i, j)] *= inv;
        }
    }
    let ut = a1
        .clone()
        .svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| invalid("points", e.to_string()))?;
    Ok(ut.transpose())
}

/// Recovers `g` at the points and `U` with the gauge `arg g(z_0) = 0`.
pub fn recover_equivalence(m1: &KernelModel, m2: &KernelModel, points: &[Complex64]) -> Result<EquivalenceCertificate> {
    let n = m1.dimension();
    if m2.dimension() != n {
        // equivalent curves have the same dimension
        return Err(GafError::DimensionMismatch { left: n, right: m2.dimension() });
    }
    let p = points.len();
    if p < 2 * n {
        return Err(invalid("points", format!("need at least {} sample points, got {p}", 2 * n)));
    }
    let a1 = rows_at(m1, points);
    let a2 = rows_at(m2, points);
    let rank = crate::ensembles::numerical_rank(&a1);
    if rank < n {
        return Err(GafError::RankDeficient { rank, expected: n });
    }
    let k1 = m1.gram(points);
    let k2 = m2.gram(points);
    for i in 0..p {
        if !(k1[(i, i)].re > VANISH && k2[(i, i)].re > VANISH) {
            return Err(GafError::KernelVanishes { z: points[i] });
        }
    }
    let modulus: Vec<f64> = (0..p).map(|i| (k2[(i, i)].re / k1[(i, i)].re).sqrt()).collect();

    // phases along a maximum-correlation spanning tree rooted at z_0:
    // K_2(z_i, z_a) = g_i conj(g_a) K_1(z_i, z_a)
    let mut g: Vec<Option<Complex64>> = vec![None; p];
    g[0] = Some(Complex64::new(modulus[0], 0.0));
    let corr = |i: usize, a: usize| k1[(i, a)].norm() / (k1[(i, i)].re * k1[(a, a)].re).sqrt();
    for _ in 1..p {
        let mut best = (0.0, usize::MAX, usize::MAX);
        for i in (0..p).filter(|&i| g[i].is_none()) {
            for a in (0..p).filter(|&a| g[a].is_some()) {
                let c = corr(i, a);
                if c > best.0 {
                    best = (c, i, a);
                }
            }
        }
        let (_, i, a) = best;
        if i == usize::MAX {
            return Err(GafError::Unreliable("sample points are mutually orthogonal in the kernel".into()));
        }
        let ga = g[a].unwrap();
        let phase = unit(k2[(i, a)] / (ga.conj() * k1[(i, a)]));
        g[i] = Some(phase * modulus[i]);
    }
    let mut g: Vec<Complex64> = g.into_iter().map(Option::unwrap).collect();

    let mut u = solve_u(&a1, &a2, &g)?;
    // one alternating pass: phases from U, then U again
    for i in 0..p {
        let v = &u * a1.row(i).transpose();
        let w = a2.row(i).transpose();
        let num: Complex64 = v.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
        g[i] = unit(num) * modulus[i];
    }
    let gauge = unit(g[0]).conj();
    for gi in g.iter_mut() {
        *gi *= gauge;
    }
    u = solve_u(&a1, &a2, &g)?;

    let mut residual: f64 = 0.0;
    for i in 0..p {
        let v = &u * a1.row(i).transpose() * g[i];
        let w = a2.row(i).transpose();
        residual = residual.max((w.clone() - v).norm() / w.norm());
    }
    Ok(EquivalenceCertificate {
        u: (0..n).map(|i| (0..n).map(|j| u[(i, j)]).collect()).collect(),
        g_values: points.iter().zip(&g).map(|(&z, &g)| GValue { z, g }).collect(),
        residual,
        unitarity_defect: unitarity_defect(&u),
    })
}

#[cfg(test)]
mod tests {
    use super::super::random_unitary;
    use super::*;
    use crate::poly::Polynomial;
    use crate::sampling::SeedPath;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn monomials(n: usize) -> KernelModel {
        KernelModel::new(
            (0..n)
                .map(|j| {
                    let mut a = vec![0.0; j + 1];
                    a[j] = 1.0;
                    Polynomial::from_real(&a)
                })
                .collect(),
            None,
        )
        .unwrap()
    }

    fn points(k: usize) -> Vec<Complex64> {
        (0..k)
            .map(|i| Complex64::from_polar(0.3 + 0.6 * (i as f64 / k as f64), 2.4 * i as f64))
            .collect()
    }

    #[test]
    fn unitary_only() {
        let m1 = monomials(4);
        let mut rng = SeedPath::new(3, 0).rng();
        let u0 = random_unitary(4, &mut rng);
        let m2 = m1.transformed(&u0, &Polynomial::from_real(&[0.0])).unwrap();
        let cert = recover_equivalence(&m1, &m2, &points(10)).unwrap();
        assert!(cert.residual <= 1e-10);
        // U = U0 up to one global phase
        let u = cert.u_matrix();
        let phase = unit(u[(0, 0)] / u0[(0, 0)]);
        assert!((u - u0 * phase).norm() < 1e-9);
        assert!(cert.g_values.iter().all(|g| (g.g.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn exponential_factor() {
        let m1 = monomials(3);
        let m2 = m1
            .transformed(&DMatrix::identity(3, 3), &Polynomial::from_real(&[0.0, 1.0]))
            .unwrap();
        let pts = points(8);
        let cert = recover_equivalence(&m1, &m2, &pts).unwrap();
        assert!(cert.unitarity_defect <= 1e-10);
        let phase = unit(cert.g_values[0].g / pts[0].exp());
        for gv in &cert.g_values {
            assert!((gv.g - gv.z.exp() * phase).norm() < 1e-9 * gv.g.norm());
        }
        assert!(cert.g_values[0].g.im.abs() < 1e-15);
    }

    #[test]
    fn identity_pair() {
        let m = monomials(3);
        let cert = recover_equivalence(&m, &m, &points(6)).unwrap();
        assert!(cert.residual < 1e-12);
        assert!((cert.u_matrix() - DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-10);
        assert!(cert.g_values.iter().all(|g| (g.g - 1.0).norm() < 1e-12));
        let r = riesz_compare(&m, &m, &square_grid(c(0.0, 0.0), 0.5, 5), 1e-3).unwrap();
        assert_eq!(r.max_laplacian, 0.0);
    }

    #[test]
    fn riesz_examples() {
        let m1 = KernelModel::new(
            vec![Polynomial::from_real(&[1.0, 0.5]), Polynomial::from_real(&[0.0, 1.0, -0.3]), Polynomial::from_real(&[0.2, 0.0, 0.0, 1.0])],
            None,
        )
        .unwrap();
        let mut rng = SeedPath::new(4, 0).rng();
        let m2 = m1
            .transformed(&random_unitary(3, &mut rng), &Polynomial::new(vec![c(0.0, 0.0), c(1.0, 2.0)]))
            .unwrap();
        let grid = square_grid(c(0.0, 0.0), 0.6, 8);
        let r = riesz_compare(&m1, &m2, &grid, 1e-3).unwrap();
        assert!(r.same_measure, "{}", r.max_laplacian);
        let mut rows = m1.rows().to_vec();
        rows[1] = Polynomial::from_real(&[0.7, -0.2, 0.0, 0.0, 1.0]);
        let m3 = KernelModel::new(rows, None).unwrap();
        let r = riesz_compare(&m1, &m3, &grid, 1e-3).unwrap();
        assert!(!r.same_measure);
    }

    #[test]
    fn vanishing_kernel_rejected() {
        let m1 = KernelModel::new(vec![Polynomial::from_real(&[0.0, 1.0])], None).unwrap();
        let m2 = monomials(1);
        let grid = vec![c(0.0, 0.0)];
        assert!(matches!(riesz_compare(&m1, &m2, &grid, 1e-3), Err(GafError::KernelVanishes { .. })));
    }

    #[test]
    fn rejects_mismatch_and_too_few_points() {
        assert!(matches!(
            recover_equivalence(&monomials(2), &monomials(3), &points(10)),
            Err(GafError::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(recover_equivalence(&monomials(3), &monomials(3), &points(5)).is_err());
        // all points equal: A_1 has rank 1
        let same = vec![c(0.2, 0.1); 8];
        assert!(matches!(
            recover_equivalence(&monomials(3), &monomials(3), &same),
            Err(GafError::RankDeficient { .. })
        ));
    }
}
