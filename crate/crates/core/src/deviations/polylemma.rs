//! Monte Carlo look at the log-concave polynomial inequality
//! `|(1/nu(E)) int_E log|P| dnu - int log|P| dnu| <= 2d log(C / nu(E))`
//! for the standard Gaussian on `R^n`, `n <= 2`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GafError, Result};
use crate::sampling::SeedPath;

/// A real polynomial in one or two variables as a list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial {
    pub dim: usize,
    /// `(coefficient, exponents)`; `exponents.len() == dim`.
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl RealPolynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(invalid("dim", format!("only 1 or 2 variables are supported, got {dim}")));
        }
        if terms.iter().any(|(_, e)| e.len() != dim) {
            return Err(invalid("terms", "every monomial needs one exponent per variable"));
        }
        if terms.iter().all(|(c, _)| *c == 0.0) {
            return Err(invalid("terms", "polynomial is identically zero"));
        }
        Ok(Self { dim, terms })
    }

    /// Parses `dim;c:e1[,e2];c:e1[,e2];...`, e.g. `2;1:2,0;1:0,2;-1:0,0`
    /// for `x^2 + y^2 - 1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.split(';');
        let dim: usize = parts
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| invalid("poly", format!("expected a leading dimension in `{spec}`")))?;
        let mut terms = Vec::new();
        for part in parts.filter(|p| !p.trim().is_empty()) {
            let (c, e) = part
                .split_once(':')
                .ok_or_else(|| invalid("poly", format!("term `{part}` should look like `coef:exp[,exp]`")))?;
            let c: f64 = c.trim().parse().map_err(|_| invalid("poly", format!("bad coefficient in `{part}`")))?;
            let e: Vec<u32> = e
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid("poly", format!("bad exponent in `{part}`")))?;
            terms.push((c, e));
        }
        Self::new(dim, terms)
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(_, e)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolyEvent {
    /// `{|P| <= s}`
    Sublevel { s: f64 },
    /// `{|P| > s}`
    Superlevel { s: f64 },
    /// Axis-aligned box.
    Box { lo: [f64; 2], hi: [f64; 2] },
}

impl PolyEvent {
    /// Parses `sub:s`, `sup:s` or `box:lo1,hi1[,lo2,hi2]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| invalid("event", format!("expected `sub:s`, `sup:s` or `box:...`, got `{spec}`")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid("event", format!("bad number in `{spec}`: {e}")))?;
        match (kind, nums.as_slice()) {
            ("sub", [s]) => Ok(PolyEvent::Sublevel { s: *s }),
            ("sup", [s]) => Ok(PolyEvent::Superlevel { s: *s }),
            ("box", [a, b]) => Ok(PolyEvent::Box { lo: [*a, f64::NEG_INFINITY], hi: [*b, f64::INFINITY] }),
            ("box", [a, b, c, d]) => Ok(PolyEvent::Box { lo: [*a, *c], hi: [*b, *d] }),
            _ => Err(invalid("event", format!("cannot parse `{spec}`"))),
        }
    }

    fn contains(&self, p: &RealPolynomial, x: &[f64], value: f64) -> bool {
        match *self {
            PolyEvent::Sublevel { s } => value.abs() <= s,
            PolyEvent::Superlevel { s } => value.abs() > s,
            PolyEvent::Box { lo, hi } => (0..p.dim).all(|i| x[i] >= lo[i] && x[i] <= hi[i]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyLemmaReport {
    pub degree: u32,
    pub trials: u64,
    pub hits: u64,
    pub nu_e: f64,
    /// `(1/nu(E)) int_E log|P| dnu`
    pub conditional_mean: f64,
    /// `int log|P| dnu`
    pub mean: f64,
    pub difference: f64,
    /// `C` solving `|difference| = 2d log(C / nu(E))`; absent for `d = 0`.
    pub c_emp: Option<f64>,
    pub finite: bool,
}

pub fn polynomial_lemma_check(p: &RealPolynomial, event: &PolyEvent, trials: u64, seed: u64) -> Result<PolyLemmaReport> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let mut rng = SeedPath::new(seed, 0).rng();
    let mut x = [0.0f64; 2];
    let (mut sum_all, mut sum_e, mut hits) = (0.0, 0.0, 0u64);
    for _ in 0..trials {
        for xi in x.iter_mut().take(p.dim) {
            *xi = rng.sample(StandardNormal);
        }
        let v = p.eval(&x[..p.dim]);
        let l = v.abs().ln();
        sum_all += l;
        if event.contains(p, &x[..p.dim], v) {
            sum_e += l;
            hits += 1;
        }
    }
    let nu_e = hits as f64 / trials as f64;
    if nu_e < 10.0 / trials as f64 {
        return Err(GafError::Unreliable(format!(
            "event mass estimate {nu_e} is below 10/trials; conditioning is unreliable"
        )));
    }
    let conditional_mean = sum_e / hits as f64;
    let mean = sum_all / trials as f64;
    let difference = conditional_mean - mean;
    let d = p.degree();
    let c_emp = (d > 0).then(|| nu_e * (difference.abs() / (2.0 * d as f64)).exp());
    Ok(PolyLemmaReport {
        degree: d,
        trials,
        hits,
        nu_e,
        conditional_mean,
        mean,
        difference,
        c_emp,
        finite: difference.is_finite() && c_emp.is_none_or(f64::is_finite),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_polynomial_has_zero_difference() {
        let p = RealPolynomial::parse("1;1:0").unwrap();
        assert_eq!(p.degree(), 0);
        let r = polynomial_lemma_check(&p, &PolyEvent::parse("box:-1,1").unwrap(), 10_000, 1).unwrap();
        assert_eq!(r.difference, 0.0);
        assert_eq!(r.mean, 0.0);
        assert!(r.c_emp.is_none());
    }

    #[test]
    fn linear_polynomial_against_quadrature() {
        let p = RealPolynomial::parse("1;1:1").unwrap();
        let r = polynomial_lemma_check(&p, &PolyEvent::parse("box:-1,1").unwrap(), 400_000, 3).unwrap();
        // reference: nu = 0.682689..., conditional mean -1.109189..., mean -(gamma + ln 2)/2
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let nu = 2.0 * crate::quad::integrate(pdf, 0.0, 1.0, 1e-15, 1e-14);
        let cond = 2.0 * crate::quad::integrate(|x: f64| x.ln() * pdf(x), 0.0, 1.0, 1e-15, 1e-13) / nu;
        let mean = -(super::super::lemma::EULER_GAMMA + 2f64.ln()) / 2.0;
        assert!((nu - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!((cond + 1.109_189_269_513_148_8).abs() < 1e-10);
        assert!((r.nu_e - nu).abs() < 0.005);
        // log|x| has variance pi^2/8 under N(0,1); several standard errors
        assert!((r.mean - mean).abs() < 5.0 * (std::f64::consts::PI.powi(2) / 8.0 / 400_000.0).sqrt());
        assert!((r.conditional_mean - cond).abs() < 0.02);
        assert!(r.difference < 0.0 && r.finite);
    }

    #[test]
    fn circle_polynomial_reports_finite_constant() {
        let p = RealPolynomial::parse("2;1:2,0;1:0,2;-1:0,0").unwrap();
        let r = polynomial_lemma_check(&p, &PolyEvent::parse("box:-2,2,-2,2").unwrap(), 100_000, 5).unwrap();
        assert_eq!(r.degree, 2);
        assert!(r.finite && r.c_emp.unwrap() > 0.0);
    }

    #[test]
    fn tiny_event_refused() {
        let p = RealPolynomial::parse("1;1:1").unwrap();
        let e = PolyEvent::parse("box:10,11").unwrap();
        assert!(matches!(polynomial_lemma_check(&p, &e, 1000, 1), Err(GafError::Unreliable(_))));
    }
}
