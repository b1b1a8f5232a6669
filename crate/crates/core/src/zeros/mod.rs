//! Counting and locating zeros of a realized `psi(z, omega)`.

mod companion;
mod contour;
mod locate;

pub use companion::{cluster_roots, companion_eigenvalues};
pub use contour::{
    count_disk, count_rect, count_region, count_region_jittered, jitter_factor, Analytic, ContourCount,
    BOUNDARY_THRESHOLD, INTEGER_GAP, MAX_JITTER_RETRIES,
};
pub use locate::locate_polynomial;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deviations::TestFunction;
use crate::ensembles::{CurveFamily, Region};
use crate::error::{invalid, GafError, Result};
use crate::sampling::GafSample;

/// Relative merge tolerance for near-coincident zeros (times region scale).
pub const MERGE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ArgumentPrinciple,
    CompanionMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub location: Complex64,
    pub multiplicity: usize,
}

/// Located zeros with multiplicities. `region == None` means all of C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub region: Option<Region>,
    pub method: Method,
}

impl ZeroSet {
    /// Multiplicity-weighted count.
    pub fn total(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Multiplicity-weighted count of zeros strictly inside `region`.
    pub fn count_inside(&self, region: &Region) -> usize {
        self.zeros
            .iter()
            .filter(|z| region.contains(z.location))
            .map(|z| z.multiplicity)
            .sum()
    }

    /// CSV with columns `re,im,multiplicity`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,multiplicity\n");
        for z in &self.zeros {
            s.push_str(&format!("{:.17e},{:.17e},{}\n", z.location.re, z.location.im, z.multiplicity));
        }
        s
    }
}

fn check_region(sample: &GafSample<'_>, region: &Region) -> Result<()> {
    if sample.ensemble().domain().contains_region(region) {
        Ok(())
    } else {
        Err(GafError::RegionOutsideDomain)
    }
}

fn degree_hint(sample: &GafSample<'_>) -> usize {
    sample.polynomial().len().saturating_sub(1)
}

/// Zero count inside `region` by the argument principle, with boundary-zero
/// jitter retries.
pub fn count_in_region(sample: &GafSample<'_>, region: &Region) -> Result<usize> {
    count_in_region_detailed(sample, region).map(|(c, _)| c.count)
}

/// As [`count_in_region`], also returning the unrounded integral and the
/// number of jitter retries.
pub fn count_in_region_detailed(sample: &GafSample<'_>, region: &Region) -> Result<(ContourCount, usize)> {
    check_region(sample, region)?;
    count_region_jittered(sample.polynomial(), region, degree_hint(sample))
}

/// Quadtree location of every zero inside `region`.
pub fn locate(sample: &GafSample<'_>, region: &Region) -> Result<ZeroSet> {
    check_region(sample, region)?;
    locate_polynomial(sample.polynomial(), region)
}

/// All roots of a finite polynomial ensemble sample via the companion
/// matrix. Fails on a vanishing leading coefficient.
pub fn companion_roots(sample: &GafSample<'_>) -> Result<ZeroSet> {
    let ensemble = sample.ensemble();
    let nominal = match ensemble.family() {
        CurveFamily::Kostlan { n } => *n,
        CurveFamily::Explicit(c) => c.rows().iter().filter_map(|r| r.degree()).max().unwrap_or(0),
        _ if ensemble.family().is_infinite() => sample.polynomial().len() - 1,
        _ => unreachable!(),
    };
    if ensemble.family().is_infinite() {
        log::debug!("companion roots of a truncated series (degree {nominal})");
    }
    let p = sample.polynomial();
    let realized = p.degree().unwrap_or(0);
    if realized < nominal {
        return Err(GafError::DegreeDrop { nominal, realized });
    }
    let roots = companion_eigenvalues(p)?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let zeros = cluster_roots(p, &roots, MERGE_TOLERANCE * scale)
        .into_iter()
        .map(|(location, multiplicity)| Zero { location, multiplicity })
        .collect();
    Ok(ZeroSet {
        zeros,
        region: None,
        method: Method::CompanionMatrix,
    })
}

/// `sum over zeros of multiplicity * phi(location)`.
pub fn linear_statistic(zeros: &ZeroSet, phi: &TestFunction) -> Result<f64> {
    if let Some(region) = &zeros.region {
        let covers = match *region {
            Region::Disk { center, radius } => (phi.center() - center).norm() + phi.outer() <= radius * (1.0 + 1e-9),
            Region::Rect { lo, hi } => {
                let c = phi.center();
                let r = phi.outer();
                c.re - r >= lo.re && c.re + r <= hi.re && c.im - r >= lo.im && c.im + r <= hi.im
            }
        };
        if !covers {
            return Err(invalid("region", "zero set region does not cover the support of the test function"));
        }
    }
    Ok(zeros
        .zeros
        .iter()
        .map(|z| z.multiplicity as f64 * phi.eval(z.location))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deviations::build_bump;
    use crate::ensembles::{Domain, Ensemble};
    use crate::poly::Polynomial;
    use crate::sampling::{draw, CoefficientLaw, SeedPath};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_component(coeffs: &[f64]) -> Ensemble {
        // a constant second row keeps the curve free of common zeros
        Ensemble::explicit(
            vec![Polynomial::from_real(coeffs), Polynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
                .add(&Polynomial::from_real(&[1.0]))],
            Domain::window(100.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn count_examples_on_z_squared_minus_one() {
        let e = single_component(&[-1.0, 0.0, 1.0]);
        let s = crate::sampling::GafSample::from_coefficients(&e, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(count_in_region(&s, &Region::disk(c(0.0, 0.0), 2.0).unwrap()).unwrap(), 2);
        assert_eq!(count_in_region(&s, &Region::disk(c(0.0, 0.0), 0.5).unwrap()).unwrap(), 0);
        let outside = Region::disk(c(0.0, 0.0), 200.0).unwrap();
        assert!(matches!(count_in_region(&s, &outside), Err(GafError::RegionOutsideDomain)));
    }

    #[test]
    fn kostlan_twenty_has_twenty_zeros() {
        let e = Ensemble::kostlan(20, 1e7).unwrap();
        let s = draw(&e, &CoefficientLaw::default(), SeedPath::new(3, 0));
        let region = Region::disk(c(0.0, 0.0), 1e6).unwrap();
        assert_eq!(count_in_region(&s, &region).unwrap(), 20);
        assert_eq!(companion_roots(&s).unwrap().total(), 20);
    }

    #[test]
    fn companion_reexpands_to_input() {
        let e = Ensemble::kostlan(8, 10.0).unwrap();
        let s = draw(&e, &CoefficientLaw::default(), SeedPath::new(9, 2));
        let zs = companion_roots(&s).unwrap();
        assert_eq!(zs.total(), 8);
        let roots: Vec<Complex64> = zs.zeros.iter().map(|z| z.location).collect();
        let monic = Polynomial::from_roots(&roots);
        let p = s.polynomial();
        let lead = p.coeffs()[8];
        let norm: f64 = p.coeffs().iter().map(|a| a.norm()).fold(0.0, f64::max);
        for (a, b) in p.coeffs().iter().zip(monic.coeffs()) {
            assert!((a - b * lead).norm() <= 1e-8 * norm);
        }
    }

    #[test]
    fn degree_drop_is_reported() {
        let e = Ensemble::kostlan(3, 10.0).unwrap();
        let s = crate::sampling::GafSample::from_coefficients(&e, vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(matches!(companion_roots(&s), Err(GafError::DegreeDrop { nominal: 3, realized: 2 })));
    }

    #[test]
    fn linear_statistic_examples() {
        let phi = build_bump(1.0, 2.0).unwrap();
        let region = Region::disk(c(0.0, 0.0), 2.0).unwrap();
        let set = |zs: Vec<(Complex64, usize)>| ZeroSet {
            zeros: zs
                .into_iter()
                .map(|(location, multiplicity)| Zero { location, multiplicity })
                .collect(),
            region: Some(region),
            method: Method::ArgumentPrinciple,
        };
        // profile is 1 at radius 0.5 and 1/2 at radius 1.5 (smoothstep midpoint)
        let two = set(vec![(c(0.5, 0.0), 1), (c(0.0, 1.5), 1)]);
        assert!((linear_statistic(&two, &phi).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(linear_statistic(&set(vec![]), &phi).unwrap(), 0.0);
        let small = ZeroSet {
            region: Some(Region::disk(c(0.0, 0.0), 1.0).unwrap()),
            ..set(vec![])
        };
        assert!(linear_statistic(&small, &phi).is_err());
    }
}
