//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use gafzeros_core::deviations::{
    build_bump, hole_probability, lemma_check, offord_tail, pointwise_exact_prob, LemmaEvent, McSpec, TailReport,
};
use gafzeros_core::intensity::{density_grid, mu_region};
use gafzeros_core::montecarlo::{mean_estimate, run_trials};
use gafzeros_core::num_complex::Complex64;
use gafzeros_core::rigidity::{polarize, random_unitary, recover_equivalence, riesz_compare, square_grid, KernelModel};
use gafzeros_core::zeros::{companion_roots, count_in_region, count_region_jittered};
use gafzeros_core::{draw, CoefficientLaw, Ensemble, Polynomial, Region, SeedPath};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20_240_601;

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mean_count(e: &Ensemble, region: Region, trials: u64, workers: usize) -> (f64, f64) {
    let law = CoefficientLaw::StandardGaussian;
    let degree = e.num_coefficients();
    let counts = run_trials(trials, workers, |t| {
        let s = draw(e, &law, SeedPath::new(SEED, t));
        count_region_jittered(s.polynomial(), &region, degree).map(|(c, _)| c.count as f64)
    })
    .expect("counting failed");
    let m = mean_estimate(&counts);
    (m.mean, m.std_err)
}

fn planar_intensity() -> Outcome {
    let e = Ensemble::planar(2.5).unwrap();
    let d2 = Region::disk(origin(), 2.0).unwrap();
    let expected = mu_region(&e, &d2).unwrap();
    let (mean, se) = mean_count(&e, d2, 4000, 0);
    check(
        expected == 4.0 && (mean - expected).abs() <= 4.0 * se,
        format!("mean {mean:.4} vs {expected} (SE {se:.4}, truncation order {})", e.order()),
    )
}

fn hyperbolic_intensity() -> Outcome {
    let e = Ensemble::hyperbolic(0.8).unwrap();
    let d = Region::disk(origin(), 0.5).unwrap();
    let expected = mu_region(&e, &d).unwrap();
    let (mean, se) = mean_count(&e, d, 4000, 0);
    check(
        (expected - 1.0 / 3.0).abs() < 1e-15 && (mean - expected).abs() <= 4.0 * se,
        format!("mean {mean:.4} vs {expected:.6} (SE {se:.4})"),
    )
}

fn kostlan_exactness() -> Outcome {
    let law = CoefficientLaw::StandardGaussian;
    let big = Region::disk(origin(), 1e3).unwrap();
    let mut notes = Vec::new();
    for n in [5usize, 20] {
        let e = Ensemble::kostlan(n, 1e6).unwrap();
        let rows = run_trials(500, 0, |t| {
            let s = draw(&e, &law, SeedPath::new(SEED, t));
            let roots = companion_roots(&s)?;
            let inside = roots.count_inside(&big);
            let counted = count_in_region(&s, &big)?;
            Ok((roots.total(), inside, counted))
        })
        .map_err(|err| format!("N = {n}: {err}"))?;
        let full = rows.iter().filter(|r| r.0 == n).count();
        let agree = rows.iter().filter(|r| r.1 == r.2).count();
        if full != 500 || agree != 500 {
            return Err(format!("N = {n}: full degree {full}/500, agreement {agree}/500"));
        }
        notes.push(format!("N = {n}: 500/500"));
    }
    Ok(notes.join(", "))
}

fn pointwise_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for lambda in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let p = pointwise_exact_prob(lambda);
        let b = 3.0 * (-lambda as f64).exp();
        if p > b {
            return Err(format!("lambda {lambda}: {p} > {b}"));
        }
        worst = worst.max(p / b);
    }
    Ok(format!("max probability/bound ratio {worst:.4}"))
}

fn tail_report(workers: usize, trials: u64) -> TailReport {
    let e = Ensemble::planar(2.5).unwrap();
    let phi = build_bump(1.0, 2.0).unwrap();
    let mc = McSpec { trials, seed: SEED, workers };
    offord_tail(&e, &CoefficientLaw::StandardGaussian, &phi, &[0.5, 1.0, 2.0, 4.0], mc, false).unwrap()
}

fn offord_tail_bound() -> Outcome {
    let rep = tail_report(0, 4000);
    let lines: Vec<String> = rep
        .estimates
        .iter()
        .map(|e| format!("l={}: lower {:.4} <= {:.4}", e.lambda, e.ci.lower, e.bound))
        .collect();
    check(rep.all_hold, lines.join("; "))
}

fn hole_bound() -> Outcome {
    let e = Ensemble::hyperbolic(0.8).unwrap();
    let mc = McSpec { trials: 10_000, seed: SEED, workers: 0 };
    let rep = hole_probability(&e, &CoefficientLaw::StandardGaussian, origin(), &[0.3, 0.5, 0.7], mc, 64).unwrap();
    let lines: Vec<String> = rep
        .estimates
        .iter()
        .map(|h| format!("R={}: p {:.4} (lower {:.4}) <= {:.4}", h.radius, h.empirical_prob, h.ci.lower, h.bound))
        .collect();
    check(rep.all_hold, lines.join("; "))
}

fn lemma_suite() -> Outcome {
    let mut failures = 0;
    let mut literal_failures = 0;
    let mut worst_margin = f64::INFINITY;
    for sigma in [0.5, 1.0, 5.0] {
        for nu in [1e-3, 1e-2, 0.1, 0.5] {
            let r = lemma_check(sigma, &LemmaEvent::sublevel_with_mass(nu, sigma).unwrap()).unwrap();
            if !r.holds {
                failures += 1;
            }
            if !r.holds_literal {
                literal_failures += 1;
            }
            worst_margin = worst_margin.min(r.rhs - r.lhs);
        }
    }
    check(
        failures == 0,
        format!("12 cases, {failures} failures, smallest margin {worst_margin:.3e}, literal-constant failures {literal_failures}"),
    )
}

fn random_model<R: Rng>(n: usize, rng: &mut R) -> KernelModel {
    loop {
        let rows = (0..n)
            .map(|_| {
                let deg = rng.random_range(0..=n + 1);
                Polynomial::new(
                    (0..=deg)
                        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                        .collect(),
                )
            })
            .collect();
        if let Ok(m) = KernelModel::new(rows, None) {
            return m;
        }
    }
}

fn rigidity_round_trip() -> Outcome {
    let mut rng = SeedPath::new(SEED, 7).rng();
    let grid = square_grid(origin(), 0.5, 8);
    let (mut worst_res, mut worst_def): (f64, f64) = (0.0, 0.0);
    let mut rejected = 0;
    for case in 0..50 {
        let n = 1 + case % 8;
        let m1 = random_model(n, &mut rng);
        let u = random_unitary(n, &mut rng);
        let q = Polynomial::new(
            (0..3)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(0.5 * re, 0.5 * im)
                })
                .collect(),
        );
        let m2 = m1.transformed(&u, &q).unwrap();
        let riesz = riesz_compare(&m1, &m2, &grid, 1e-3).map_err(|e| format!("case {case}: {e}"))?;
        if !riesz.same_measure {
            return Err(format!("case {case}: Laplacian {:.3e}", riesz.max_laplacian));
        }
        let pts: Vec<Complex64> = (0..2 * n + 6)
            .map(|_| Complex64::from_polar(rng.random_range(0.1..0.9), rng.random_range(0.0..6.283)))
            .collect();
        let cert = recover_equivalence(&m1, &m2, &pts).map_err(|e| format!("case {case}: {e}"))?;
        worst_res = worst_res.max(cert.residual);
        worst_def = worst_def.max(cert.unitarity_defect);
        // negative control: an independent model of the same dimension
        let other = random_model(n.max(2), &mut rng);
        let base = if n >= 2 { m1.clone() } else { random_model(2, &mut rng) };
        if let Ok(r) = riesz_compare(&base, &other, &grid, 1e-3) {
            if !r.same_measure {
                rejected += 1;
            }
        }
    }
    check(
        worst_res <= 1e-8 && worst_def <= 1e-8 && rejected == 50,
        format!("max residual {worst_res:.2e}, max unitarity defect {worst_def:.2e}, controls rejected {rejected}/50"),
    )
}

fn polarization() -> Outcome {
    let t = polarize(|l| (1.0 + l.norm_sqr()).powi(3), origin(), 8, 0.5).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..25 {
        for j in 0..25 {
            let z = Complex64::from_polar(0.1 * ((i % 5) as f64 + 1.0) / 5.0, 1.3 * i as f64);
            let w = Complex64::from_polar(0.1 * ((j % 5) as f64 + 1.0) / 5.0, -0.9 * j as f64);
            worst = worst.max((t.reconstruct(z, w) - (1.0 + z * w.conj()).powu(3)).norm());
        }
    }
    check(worst <= 1e-6, format!("max error {worst:.2e} on the 0.1 bidisk"))
}

fn numeric_intensity() -> Outcome {
    let cases = [
        (Ensemble::planar(3.0).unwrap(), Region::disk(origin(), 2.5).unwrap()),
        (Ensemble::hyperbolic(0.9).unwrap(), Region::disk(origin(), 0.8).unwrap()),
        (
            Ensemble::kostlan(20, 1e6).unwrap(),
            Region::rect(Complex64::new(-2.0, -2.0), Complex64::new(2.0, 2.0)).unwrap(),
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (e, r) in cases {
        let grid = density_grid(&e, &r, 30, 30, None).unwrap();
        let dev = grid.iter().map(|p| (p.numeric - p.closed.unwrap()).abs()).fold(0.0, f64::max);
        ok &= dev <= 1e-6;
        parts.push(format!("{} {dev:.1e}", e.family().name()));
    }
    check(ok, parts.join(", "))
}

fn reproducibility() -> Outcome {
    let one = serde_json::to_string(&tail_report(1, 1000)).unwrap();
    let eight = serde_json::to_string(&tail_report(8, 1000)).unwrap();
    let again = serde_json::to_string(&tail_report(8, 1000)).unwrap();
    let e = Ensemble::hyperbolic(0.8).unwrap();
    let hole = |w| {
        let mc = McSpec { trials: 1000, seed: SEED, workers: w };
        serde_json::to_string(&hole_probability(&e, &CoefficientLaw::StandardGaussian, origin(), &[0.5], mc, 16).unwrap())
            .unwrap()
    };
    check(
        one == eight && eight == again && hole(1) == hole(8),
        format!("tail report {} bytes, identical at 1 and 8 workers", one.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 planar mean zero count in D_2", planar_intensity),
        ("2 hyperbolic mean zero count in D_0.5", hyperbolic_intensity),
        ("3 Kostlan companion/contour agreement", kostlan_exactness),
        ("4 pointwise closed form below 3e^-lambda", pointwise_closed_form),
        ("5 smoothed-count tail below 3e^(-2 pi lambda/L)", offord_tail_bound),
        ("6 hyperbolic hole probability bound", hole_bound),
        ("7 log-integral inequality suite", lemma_suite),
        ("8 rigidity round trip and controls", rigidity_round_trip),
        ("9 polarization of (1+z conj w)^3", polarization),
        ("10 numeric vs closed intensity", numeric_intensity),
        ("11 reproducibility across worker counts", reproducibility),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
