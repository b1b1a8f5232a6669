//! JSON descriptors for ensembles and kernel models.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ensembles::{CurveFamily, Domain, Ensemble, ExplicitCurve, TruncationPolicy};
use crate::error::{invalid, Result};
use crate::poly::Polynomial;
use crate::rigidity::KernelModel;
use crate::sampling::CoefficientLaw;

/// A coefficient written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coef> for Complex64 {
    fn from(c: Coef) -> Self {
        match c {
            Coef::Real(r) => Complex64::new(r, 0.0),
            Coef::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

fn polynomial(coeffs: &[Coef]) -> Polynomial {
    Polynomial::new(coeffs.iter().map(|&c| c.into()).collect())
}

fn default_kostlan_window() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum FamilyConfig {
    Planar {
        window: f64,
    },
    Hyperbolic {
        radius: f64,
    },
    Kostlan {
        n: usize,
        #[serde(default = "default_kostlan_window")]
        window: f64,
    },
    /// One coefficient list per component, lowest degree first.
    Explicit {
        coeffs: Vec<Vec<Coef>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawConfig {
    #[default]
    StandardGaussian,
    UnitCircle,
    UniformDisk,
}

impl LawConfig {
    pub fn law(self) -> CoefficientLaw {
        match self {
            LawConfig::StandardGaussian => CoefficientLaw::StandardGaussian,
            LawConfig::UnitCircle => CoefficientLaw::unit_circle(),
            LawConfig::UniformDisk => CoefficientLaw::uniform_disk(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(flatten)]
    pub family: FamilyConfig,
    /// Overrides the family's default domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default)]
    pub law: LawConfig,
}

impl EnsembleConfig {
    pub fn build(&self) -> Result<Ensemble> {
        let mut policy = TruncationPolicy::default();
        if let Some(e) = self.epsilon {
            policy.epsilon = e;
        }
        if let Some(m) = self.max_order {
            policy.max_order = m;
        }
        let (family, default_domain) = match &self.family {
            FamilyConfig::Planar { window } => (CurveFamily::Planar, Some(Domain::window(*window)?)),
            FamilyConfig::Hyperbolic { radius } => (
                CurveFamily::Hyperbolic,
                Some(Domain::disk(Complex64::new(0.0, 0.0), *radius)?),
            ),
            FamilyConfig::Kostlan { n, window } => (CurveFamily::Kostlan { n: *n }, Some(Domain::window(*window)?)),
            FamilyConfig::Explicit { coeffs } => (
                CurveFamily::Explicit(ExplicitCurve::new(coeffs.iter().map(|r| polynomial(r)).collect())?),
                None,
            ),
        };
        let domain = match (self.domain, default_domain) {
            (Some(d), _) => d,
            (None, Some(d)) => d,
            (None, None) => return Err(invalid("domain", "explicit ensembles need a `domain`")),
        };
        Ensemble::new(family, domain, policy)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `psi_j = exp(q) p_j`; `multiplier` is `q`, absent for `q = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub rows: Vec<Vec<Coef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<Vec<Coef>>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<KernelModel> {
        KernelModel::new(
            self.rows.iter().map(|r| polynomial(r)).collect(),
            self.multiplier.as_deref().map(polynomial),
        )
    }
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_variant() {
        let p = EnsembleConfig::from_json(r#"{"variant":"planar","window":3}"#).unwrap();
        assert_eq!(p.build().unwrap().order(), crate::ensembles::truncation_order(&CurveFamily::Planar, &Domain::window(3.0).unwrap(), &TruncationPolicy::default()).unwrap());
        let h = EnsembleConfig::from_json(r#"{"variant":"hyperbolic","radius":0.5,"epsilon":1e-8}"#).unwrap();
        assert!(h.build().unwrap().order() > 20);
        let k = EnsembleConfig::from_json(r#"{"variant":"kostlan","n":5,"law":"unit-circle"}"#).unwrap();
        assert_eq!(k.build().unwrap().order(), 5);
        assert_eq!(k.law, LawConfig::UnitCircle);
        let e = EnsembleConfig::from_json(
            r#"{"variant":"explicit","coeffs":[[1],[0,[0,1]]],"domain":{"kind":"disk","center":[0,0],"radius":2}}"#,
        )
        .unwrap();
        assert_eq!(e.build().unwrap().num_coefficients(), 2);
    }

    #[test]
    fn errors_name_the_field() {
        let err = EnsembleConfig::from_json(r#"{"variant":"hyperbolic"}"#).unwrap_err();
        assert!(err.to_string().contains("radius"), "{err}");
        let e = EnsembleConfig::from_json(r#"{"variant":"hyperbolic","radius":1.5}"#).unwrap();
        assert!(e.build().unwrap_err().to_string().contains("radius") || e.build().is_err());
        let e = EnsembleConfig::from_json(r#"{"variant":"explicit","coeffs":[[1]]}"#).unwrap();
        assert!(e.build().unwrap_err().to_string().contains("domain"));
    }

    #[test]
    fn model_round_trip() {
        let m: ModelConfig = serde_json::from_str(r#"{"rows":[[1],[0,1]],"multiplier":[0,[1,2]]}"#).unwrap();
        let km = m.build().unwrap();
        assert_eq!(km.dimension(), 2);
        assert_eq!(km.multiplier().coeffs()[1], Complex64::new(1.0, 2.0));
    }
}
