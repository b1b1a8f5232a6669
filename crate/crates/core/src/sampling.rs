//! Gaussian coefficient vectors and evaluation of `psi(z, omega) =
//! sum_j omega_j psi_j(z)`.
//!
//! Each trial owns its own random stream: a ChaCha8 generator seeded with
//! the master seed and switched to stream `trial_index`. A sample depends
//! only on `(master seed, trial index)`, never on scheduling.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensembles::Ensemble;
use crate::error::{invalid, Result};
use crate::poly::Polynomial;
use crate::quad;

/// `(master seed, trial index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub master: u64,
    pub trial: u64,
}

impl SeedPath {
    pub fn new(master: u64, trial: u64) -> Self {
        Self { master, trial }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.trial);
        rng
    }
}

/// Radial quantile `u -> r` of a rotation-invariant law.
pub type RadialQuantile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Law of each coefficient.
#[derive(Clone, Default)]
pub enum CoefficientLaw {
    /// Real and imaginary parts independent `N(0, 1/2)`.
    #[default]
    StandardGaussian,
    /// `quantile(U) e^{i Theta}` with `U ~ U(0,1)`, `Theta ~ U(0, 2 pi)`.
    RotationInvariant { name: String, quantile: RadialQuantile },
}

impl fmt::Debug for CoefficientLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientLaw::StandardGaussian => f.write_str("StandardGaussian"),
            CoefficientLaw::RotationInvariant { name, .. } => write!(f, "RotationInvariant({name})"),
        }
    }
}

impl CoefficientLaw {
    /// Validates `E|omega|^2 = int_0^1 q(u)^2 du = 1` to 1e-3 and that the
    /// law does not charge the origin.
    pub fn rotation_invariant(name: impl Into<String>, quantile: RadialQuantile) -> Result<Self> {
        for k in 1..=64 {
            let u = k as f64 / 65.0;
            let r = quantile(u);
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("quantile", format!("quantile({u}) = {r} must be positive")));
            }
        }
        let q = quantile.clone();
        let second = quad::integrate(move |u| q(u).powi(2), 0.0, 1.0, 1e-10, 1e-10);
        if (second - 1.0).abs() > 1e-3 {
            return Err(invalid(
                "quantile",
                format!("second moment {second} differs from 1 by more than 1e-3"),
            ));
        }
        Ok(CoefficientLaw::RotationInvariant {
            name: name.into(),
            quantile,
        })
    }

    /// All mass on the unit circle.
    pub fn unit_circle() -> Self {
        Self::rotation_invariant("unit-circle", Arc::new(|_| 1.0)).unwrap()
    }

    /// Uniform on the disk of radius `sqrt(2)`.
    pub fn uniform_disk() -> Self {
        Self::rotation_invariant("uniform-disk", Arc::new(|u: f64| (2.0 * u).sqrt())).unwrap()
    }

    pub fn name(&self) -> &str {
        match self {
            CoefficientLaw::StandardGaussian => "standard-gaussian",
            CoefficientLaw::RotationInvariant { name, .. } => name,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self {
            CoefficientLaw::StandardGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
            CoefficientLaw::RotationInvariant { quantile, .. } => {
                // open interval keeps the quantile away from u = 0
                let u: f64 = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                let theta: f64 = rng.random::<f64>() * 2.0 * PI;
                Complex64::from_polar(quantile(u), theta)
            }
        }
    }
}

/// One realization `omega` together with the realized polynomial.
#[derive(Debug, Clone)]
pub struct GafSample<'a> {
    ensemble: &'a Ensemble,
    coefficients: Vec<Complex64>,
    polynomial: Polynomial,
    seed: Option<SeedPath>,
}

/// Draw the coefficient vector for one trial.
pub fn draw<'a>(ensemble: &'a Ensemble, law: &CoefficientLaw, seed: SeedPath) -> GafSample<'a> {
    let mut rng = seed.rng();
    let coefficients: Vec<Complex64> = (0..ensemble.num_coefficients()).map(|_| law.sample(&mut rng)).collect();
    let mut s = GafSample::from_coefficients(ensemble, coefficients).expect("length matches ensemble");
    s.seed = Some(seed);
    s
}

impl<'a> GafSample<'a> {
    pub fn from_coefficients(ensemble: &'a Ensemble, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != ensemble.num_coefficients() {
            return Err(invalid(
                "coefficients",
                format!("expected {} coefficients, got {}", ensemble.num_coefficients(), coefficients.len()),
            ));
        }
        let polynomial = ensemble.realize(&coefficients);
        Ok(Self {
            ensemble,
            coefficients,
            polynomial,
            seed: None,
        })
    }

    pub fn ensemble(&self) -> &'a Ensemble {
        self.ensemble
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn seed(&self) -> Option<SeedPath> {
        self.seed
    }

    /// The realized polynomial `sum_k a_k z^k`.
    pub fn polynomial(&self) -> &Polynomial {
        &self.polynomial
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        self.ensemble.domain().check(z)?;
        Ok(self.polynomial.eval(z))
    }

    /// `(psi(z), psi'(z))` from the exact polynomial derivative.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.ensemble.domain().check(z)?;
        Ok(self.polynomial.eval_with_derivative(z))
    }

    /// Coefficient-wise sum of two samples of the same ensemble.
    pub fn sum(&self, other: &GafSample<'a>) -> Result<GafSample<'a>> {
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a + b)
            .collect();
        GafSample::from_coefficients(self.ensemble, coefficients)
    }
}

/// Serializable form of a batch of samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub trial: u64,
    pub coefficients: Vec<Complex64>,
}

pub fn draw_records(ensemble: &Ensemble, law: &CoefficientLaw, master: u64, trials: u64) -> Vec<SampleRecord> {
    (0..trials)
        .map(|t| SampleRecord {
            trial: t,
            coefficients: draw(ensemble, law, SeedPath::new(master, t)).coefficients,
        })
        .collect()
}
