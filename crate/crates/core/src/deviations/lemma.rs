//! The integral inequality for one complex Gaussian `Z` with
//! `E|Z|^2 = sigma^2`:
//!
//! `| int_E log|Z| dnu - nu(E) log sigma | <= nu(E) [log(1/nu(E)) + c]`.
//!
//! With `E|Z|^2 = 1` the radial law is `Pr(|Z| <= s) = 1 - e^{-s^2}`. Under
//! that normalization the constant `1/4` fails for large sublevel sets
//! (for `E` = everything the left side is `gamma/2 ~ 0.2886`), so the
//! asserted constant `c` is the supremum of the deficit over sublevel sets,
//! which are the extremal events for the lower bound.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The constant as it appears in the literature.
pub const LITERAL_CONSTANT: f64 = 0.25;

/// A measurable event for `Z`, in the units of `Z` (not normalized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LemmaEvent {
    /// `{|Z| <= s}`
    Sublevel { s: f64 },
    /// `{|Z| > s}`
    Superlevel { s: f64 },
    /// `{arg Z in [from, to)}`, radians
    Sector { from: f64, to: f64 },
}

impl LemmaEvent {
    /// Sublevel set of prescribed mass for `E|Z|^2 = sigma^2`.
    pub fn sublevel_with_mass(nu: f64, sigma: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(invalid("nu", format!("mass must lie in (0, 1), got {nu}")));
        }
        Ok(LemmaEvent::Sublevel {
            s: sigma * (-(-nu).ln_1p()).sqrt(),
        })
    }

    /// Parses `sub:s`, `sup:s`, `sector:a,b` or `mass:nu` (a sublevel set of
    /// that mass, resolved against `sigma`).
    pub fn parse(spec: &str, sigma: f64) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| invalid("events", format!("expected `sub:s`, `sup:s`, `sector:a,b` or `mass:nu`, got `{spec}`")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid("events", format!("bad number in `{spec}`: {e}")))?;
        match (kind, nums.as_slice()) {
            ("sub", [s]) => Ok(LemmaEvent::Sublevel { s: *s }),
            ("sup", [s]) => Ok(LemmaEvent::Superlevel { s: *s }),
            ("sector", [a, b]) => Ok(LemmaEvent::Sector { from: *a, to: *b }),
            ("mass", [nu]) => Self::sublevel_with_mass(*nu, sigma),
            _ => Err(invalid("events", format!("cannot parse `{spec}`"))),
        }
    }

    /// The event for `W = Z / sigma`.
    fn normalized(&self, sigma: f64) -> Self {
        match *self {
            LemmaEvent::Sublevel { s } => LemmaEvent::Sublevel { s: s / sigma },
            LemmaEvent::Superlevel { s } => LemmaEvent::Superlevel { s: s / sigma },
            sector => sector,
        }
    }
}

/// `int_0^{s} log(t) 2t e^{-t^2} dt = (1/2) int_0^{s^2} log(v) e^{-v} dv`.
pub fn sublevel_log_integral(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = s * s;
    // int_0^a log v dv = a log a - a handles the singular end exactly
    let a = x.min(1e-3);
    let near = quad::integrate(|v: f64| v.ln() * ((-v).exp_m1()), 0.0, a, 1e-18, 1e-15) + (a * a.ln() - a);
    let far = if x > a {
        quad::integrate(|v: f64| v.ln() * (-v).exp(), a, x, 1e-16, 1e-14)
    } else {
        0.0
    };
    0.5 * (near + far)
}

/// `E log|W| = -gamma/2` for a standard complex Gaussian.
pub fn mean_log_modulus() -> f64 {
    -0.5 * EULER_GAMMA
}

/// `(nu(E), int_E log|W| dnu)` for a standard complex Gaussian `W`.
pub fn standard_event_integral(event: &LemmaEvent) -> (f64, f64) {
    match *event {
        LemmaEvent::Sublevel { s } => (-(-s * s).exp_m1(), sublevel_log_integral(s)),
        LemmaEvent::Superlevel { s } => ((-s * s).exp(), mean_log_modulus() - sublevel_log_integral(s)),
        LemmaEvent::Sector { from, to } => {
            let frac = ((to - from) / (2.0 * PI)).clamp(0.0, 1.0);
            (frac, frac * mean_log_modulus())
        }
    }
}

fn deficit(nu: f64) -> f64 {
    let s = (-(-nu).ln_1p()).sqrt();
    -sublevel_log_integral(s) / nu - (1.0 / nu).ln()
}

/// `sup_{0 < nu <= 1} [ -(1/nu) int_{|W| <= s(nu)} log|W| - log(1/nu) ]`.
pub fn lemma_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        // unimodal on [0.5, 1); golden-section search for the maximum
        let (mut a, mut b) = (0.5, 1.0 - 1e-9);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (deficit(x1), deficit(x2));
        while b - a > 1e-10 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = deficit(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = deficit(x1);
            }
        }
        // the full-space value is the limit at nu = 1
        f1.max(f2).max(-mean_log_modulus())
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub sigma: f64,
    pub event: LemmaEvent,
    pub nu: f64,
    /// `int_E log|Z| dnu`
    pub integral: f64,
    /// `|int_E log|Z| dnu - nu(E) log sigma|`
    pub lhs: f64,
    pub constant: f64,
    /// `nu(E) [log(1/nu(E)) + constant]`
    pub rhs: f64,
    pub holds: bool,
    /// Same inequality with the literal `1/4`, reported only.
    pub rhs_literal: f64,
    pub holds_literal: bool,
    /// Upper (Jensen) side: `int_E log|Z| - nu log sigma <= (nu/2) log(1/nu)`.
    pub jensen_upper: f64,
    pub jensen_holds: bool,
}

/// Evaluate both sides of the inequality after reducing to `sigma = 1`.
pub fn lemma_check(sigma: f64, event: &LemmaEvent) -> Result<LemmaReport> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let (nu, standard) = standard_event_integral(&event.normalized(sigma));
    if !(nu > 0.0) {
        return Err(invalid("events", "event has zero probability"));
    }
    let integral = standard + nu * sigma.ln();
    let shifted = integral - nu * sigma.ln();
    let lhs = shifted.abs();
    let constant = lemma_constant();
    let log_inv = -nu.ln();
    let rhs = nu * (log_inv + constant);
    let rhs_literal = nu * (log_inv + LITERAL_CONSTANT);
    let jensen_upper = 0.5 * nu * log_inv;
    Ok(LemmaReport {
        sigma,
        event: *event,
        nu,
        integral,
        lhs,
        constant,
        rhs,
        holds: lhs <= rhs,
        rhs_literal,
        holds_literal: lhs <= rhs_literal,
        jensen_upper,
        jensen_holds: shifted <= jensen_upper * (1.0 + 1e-12) + 1e-15,
    })
}
