//! Reproducing kernels of finite curves `Psi(z) = e^{q(z)} P(z)`, where `P`
//! has polynomial components: polarization from the diagonal, comparison of
//! Riesz measures, and recovery of `Psi_2 = g U Psi_1`.

mod polarize;
mod recover;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensembles::{coefficient_matrix, numerical_rank, ExplicitCurve, Kernel};
use crate::error::{invalid, GafError, Result};
use crate::poly::Polynomial;

pub use polarize::{polarize, PolarizationTable, MAX_POLARIZATION_ORDER};
pub use recover::{recover_equivalence, riesz_compare, square_grid, EquivalenceCertificate, GValue, RieszReport, HARMONIC_TOLERANCE};

pub const MAX_DIMENSION: usize = 64;

/// `psi_j(z) = exp(q(z)) p_j(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    rows: Vec<Polynomial>,
    multiplier: Polynomial,
}

impl KernelModel {
    /// Rejects linearly dependent components.
    pub fn new(rows: Vec<Polynomial>, multiplier: Option<Polynomial>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("rows", "at least one component is required"));
        }
        if rows.len() > MAX_DIMENSION {
            return Err(invalid("rows", format!("at most {MAX_DIMENSION} components, got {}", rows.len())));
        }
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        if width == 0 {
            return Err(invalid("rows", "components must have coefficients"));
        }
        let rank = numerical_rank(&coefficient_matrix(&rows, width));
        if rank < rows.len() {
            return Err(GafError::RankDeficient { rank, expected: rows.len() });
        }
        let multiplier = multiplier.unwrap_or_else(|| Polynomial::from_real(&[0.0]));
        if multiplier.is_empty() {
            return Err(invalid("multiplier", "needs at least one coefficient"));
        }
        Ok(Self { rows, multiplier })
    }

    pub fn from_curve(curve: &ExplicitCurve) -> Self {
        Self {
            rows: curve.rows().to_vec(),
            multiplier: Polynomial::from_real(&[0.0]),
        }
    }

    pub fn rows(&self) -> &[Polynomial] {
        &self.rows
    }

    pub fn multiplier(&self) -> &Polynomial {
        &self.multiplier
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// `Psi(z)`.
    pub fn components(&self, z: Complex64) -> Vec<Complex64> {
        let g = self.multiplier.eval(z).exp();
        self.rows.iter().map(|r| g * r.eval(z)).collect()
    }

    /// `e^{q_extra} U Psi`: mixes the polynomial rows by `U` and adds `q_extra`
    /// to the exponent.
    pub fn transformed(&self, u: &DMatrix<Complex64>, q_extra: &Polynomial) -> Result<Self> {
        let n = self.dimension();
        if u.nrows() != n || u.ncols() != n {
            return Err(GafError::DimensionMismatch { left: n, right: u.nrows() });
        }
        let width = self.rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let rows = (0..n)
            .map(|i| {
                Polynomial::new(
                    (0..width)
                        .map(|k| {
                            (0..n)
                                .map(|j| u[(i, j)] * self.rows[j].coeffs().get(k).copied().unwrap_or_default())
                                .sum()
                        })
                        .collect(),
                )
            })
            .collect();
        Self::new(rows, Some(self.multiplier.add(q_extra)))
    }

    /// `[K(z_i, z_j)]`.
    pub fn gram(&self, points: &[Complex64]) -> DMatrix<Complex64> {
        let vs: Vec<Vec<Complex64>> = points.iter().map(|&z| self.components(z)).collect();
        DMatrix::from_fn(points.len(), points.len(), |i, j| {
            vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b.conj()).sum()
        })
    }

    /// Smallest Gram eigenvalue is at least `-1e-10 trace`.
    pub fn gram_is_psd(&self, points: &[Complex64]) -> bool {
        let g = self.gram(points);
        let trace: f64 = (0..g.nrows()).map(|i| g[(i, i)].re).sum();
        let eig = g.symmetric_eigenvalues();
        eig.iter().all(|&l| l >= -1e-10 * trace)
    }
}

impl Kernel for KernelModel {
    fn kernel_at(&self, z: Complex64, w: Complex64) -> Complex64 {
        let base: Complex64 = self.rows.iter().map(|r| r.eval(z) * r.eval(w).conj()).sum();
        (self.multiplier.eval(z) + self.multiplier.eval(w).conj()).exp() * base
    }

    fn log_squared_norm(&self, z: Complex64) -> f64 {
        let s: f64 = self.rows.iter().map(|r| r.eval(z).norm_sqr()).sum();
        2.0 * self.multiplier.eval(z).re + s.ln()
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `||U* U - I||_2`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.ncols();
    let d = u.adjoint() * u - DMatrix::<Complex64>::identity(n, n);
    d.symmetric_eigenvalues().iter().fold(0.0, |m, &l| m.max(l.abs()))
}
