use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gafzeros_core::config::{load_json, EnsembleConfig, ModelConfig};
use gafzeros_core::deviations::{
    hole_probability, lemma_check, offord_tail, pointwise_concentration, polynomial_lemma_check,
    LemmaEvent, McSpec, PolyEvent, RealPolynomial, TestFunction,
};
use gafzeros_core::intensity::{density_grid, grid_to_csv, mu_region};
use gafzeros_core::num_complex::Complex64;
use gafzeros_core::rigidity::{recover_equivalence, riesz_compare, square_grid, KernelModel};
use gafzeros_core::sampling::draw_records;
use gafzeros_core::zeros::{companion_roots, locate};
use gafzeros_core::{draw, Ensemble, Region, SeedPath};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{emit, envelope, plot_path};
use crate::{Cli, Command, Global};

/// Certificates above these thresholds count as a failed recovery.
const RESIDUAL_LIMIT: f64 = 1e-8;
const UNITARITY_LIMIT: f64 = 1e-8;

#[derive(Debug, Args)]
pub struct EnsembleArg {
    /// Ensemble JSON file, or inline JSON starting with `{`.
    #[arg(long)]
    pub ensemble: String,
}

impl EnsembleArg {
    fn load(&self) -> Result<(EnsembleConfig, Ensemble)> {
        let cfg: EnsembleConfig = if self.ensemble.trim_start().starts_with('{') {
            EnsembleConfig::from_json(&self.ensemble).context("parsing inline ensemble")?
        } else {
            load_json(Path::new(&self.ensemble)).with_context(|| format!("reading ensemble {}", self.ensemble))?
        };
        let e = cfg.build().context("building ensemble")?;
        Ok((cfg, e))
    }
}

fn ensemble_json(cfg: &EnsembleConfig, e: &Ensemble) -> Value {
    json!({
        "descriptor": cfg,
        "family": e.family().name(),
        "domain": e.domain(),
        "truncation_order": e.order(),
        "epsilon": e.policy().epsilon,
    })
}

fn parse_list(s: &str, field: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("`{field}`: bad number `{x}`")))
        .collect()
}

fn parse_point(s: &str, field: &str) -> Result<Complex64> {
    match parse_list(s, field)?.as_slice() {
        [x, y] => Ok(Complex64::new(*x, *y)),
        _ => bail!("`{field}` expects `x,y`, got `{s}`"),
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArg,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroMethod {
    ArgumentPrinciple,
    Companion,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArg,
    /// `disk:cx,cy,r` or `rect:x0,y0,x1,y1`.
    #[arg(long)]
    pub region: String,
    /// Which trial of the seed to use.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    #[arg(long, value_enum, default_value_t = ZeroMethod::ArgumentPrinciple)]
    pub method: ZeroMethod,
}

#[derive(Debug, Args)]
pub struct IntensityArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArg,
    #[arg(long)]
    pub region: String,
    /// Grid size `WxH` for the density table.
    #[arg(long)]
    pub grid: Option<String>,
    /// Finite-difference step; defaults to 1e-3 times the region scale.
    #[arg(long)]
    pub h: Option<f64>,
    /// Print `mu(region)` instead of a grid.
    #[arg(long)]
    pub expected_count: bool,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArg,
    /// Bump radii `r,R`.
    #[arg(long)]
    pub bump: String,
    /// Bump center `x,y`.
    #[arg(long, default_value = "0,0")]
    pub center: String,
    #[arg(long, default_value = "0.5,1,2,4")]
    pub lambdas: String,
    #[arg(long, default_value_t = 4000)]
    pub trials: u64,
    /// Keep every per-trial deviation in the report.
    #[arg(long)]
    pub keep_deviations: bool,
}

#[derive(Debug, Args)]
pub struct HoleArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArg,
    #[arg(long, default_value = "0.3,0.5,0.7")]
    pub radii: String,
    #[arg(long, default_value = "0,0")]
    pub center: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Inner radii scanned when optimizing the bound.
    #[arg(long, default_value_t = 64)]
    pub scan: usize,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value = "0.5,1,5")]
    pub sigma: String,
    /// Event: `sub:s`, `sup:s`, `sector:a,b` or `mass:nu`. Repeatable.
    #[arg(long = "event")]
    pub events: Vec<String>,
    /// Shorthand for sublevel events of these masses.
    #[arg(long)]
    pub masses: Option<String>,
    /// Also report the pointwise concentration probability at these lambdas.
    #[arg(long)]
    pub pointwise: Option<String>,
}

#[derive(Debug, Args)]
pub struct RigidityArgs {
    #[arg(long)]
    pub model1: String,
    #[arg(long)]
    pub model2: String,
    /// JSON list of `[x, y]` points, or `auto`.
    #[arg(long, default_value = "auto")]
    pub points: String,
    /// Half-width of the comparison grid about the origin.
    #[arg(long, default_value_t = 0.5)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
}

#[derive(Debug, Args)]
pub struct PolyLemmaArgs {
    /// `dim;c:e1[,e2];...`, e.g. `2;1:2,0;1:0,2;-1:0,0`.
    #[arg(long)]
    pub poly: String,
    /// `sub:s`, `sup:s` or `box:lo,hi[,lo,hi]`.
    #[arg(long)]
    pub event: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

/// `Ok(false)` means a bound or certificate check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Sample(a) => sample(g, a),
        Command::Zeros(a) => zeros(g, a),
        Command::Intensity(a) => intensity(g, a),
        Command::Tail(a) => tail(g, a),
        Command::Hole(a) => hole(g, a),
        Command::Lemma(a) => lemma(g, a),
        Command::Rigidity(a) => rigidity(g, a),
        Command::PolyLemma(a) => poly_lemma(g, a),
    }
}

fn out(g: &Global) -> Option<&Path> {
    g.out.as_deref()
}

fn sample(g: &Global, a: &SampleArgs) -> Result<bool> {
    let (cfg, e) = a.ensemble.load()?;
    let records = draw_records(&e, &cfg.law.law(), g.seed, a.trials);
    let config = json!({"ensemble": ensemble_json(&cfg, &e), "seed": g.seed, "trials": a.trials});
    emit(out(g), &envelope("sample", config, records)?)?;
    Ok(true)
}

fn zeros(g: &Global, a: &ZerosArgs) -> Result<bool> {
    let (cfg, e) = a.ensemble.load()?;
    let region = Region::parse(&a.region)?;
    let s = draw(&e, &cfg.law.law(), SeedPath::new(g.seed, a.trial));
    let set = match a.method {
        ZeroMethod::ArgumentPrinciple => locate(&s, &region)?,
        ZeroMethod::Companion => {
            let all = companion_roots(&s)?;
            let mut inside = all.clone();
            inside.zeros.retain(|z| region.contains(z.location));
            inside.region = Some(region);
            inside
        }
    };
    emit(out(g), &set.to_csv())?;
    Ok(true)
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X', '×'])
        .with_context(|| format!("`grid` expects `WxH`, got `{s}`"))?;
    Ok((
        w.trim().parse().with_context(|| format!("`grid`: bad width `{w}`"))?,
        h.trim().parse().with_context(|| format!("`grid`: bad height `{h}`"))?,
    ))
}

fn intensity(g: &Global, a: &IntensityArgs) -> Result<bool> {
    let (_, e) = a.ensemble.load()?;
    let region = Region::parse(&a.region)?;
    if a.expected_count {
        let mu = mu_region(&e, &region)?;
        emit(out(g), &format!("{mu:?}\n"))?;
        return Ok(true);
    }
    let (w, h) = parse_grid(a.grid.as_deref().unwrap_or("30x30"))?;
    let grid = density_grid(&e, &region, w, h, a.h)?;
    let csv = grid_to_csv(&grid);
    emit(out(g), &csv)?;
    if g.emit_plot_data {
        let mut plot = String::from("x,y\n");
        for p in &grid {
            plot.push_str(&format!("{},{}\n", (p.re * p.re + p.im * p.im).sqrt(), p.numeric));
        }
        std::fs::write(plot_path(out(g), "intensity.plot.csv"), plot)?;
    }
    Ok(true)
}

fn tail(g: &Global, a: &TailArgs) -> Result<bool> {
    let (cfg, e) = a.ensemble.load()?;
    let radii = parse_list(&a.bump, "bump")?;
    let [r, big_r] = radii.as_slice() else {
        bail!("`bump` expects `r,R`, got `{}`", a.bump);
    };
    let center = parse_point(&a.center, "center")?;
    let phi = TestFunction::new(center, *r, *big_r)?;
    let lambdas = parse_list(&a.lambdas, "lambdas")?;
    let mc = McSpec { trials: a.trials, seed: g.seed, workers: g.workers };
    let rep = offord_tail(&e, &cfg.law.law(), &phi, &lambdas, mc, a.keep_deviations)?;
    let config = json!({
        "ensemble": ensemble_json(&cfg, &e),
        "seed": g.seed,
        "trials": a.trials,
        "bump": {"r": r, "R": big_r, "center": center},
        "lambdas": lambdas,
    });
    emit(out(g), &envelope("tail", config, &rep)?)?;
    if g.emit_plot_data {
        let mut plot = String::from("lambda,empirical,ci_lower,ci_upper,bound\n");
        for est in &rep.estimates {
            plot.push_str(&format!(
                "{},{},{},{},{}\n",
                est.lambda, est.empirical_prob, est.ci.lower, est.ci.upper, est.bound
            ));
        }
        std::fs::write(plot_path(out(g), "tail.plot.csv"), plot)?;
    }
    Ok(rep.all_hold)
}

fn hole(g: &Global, a: &HoleArgs) -> Result<bool> {
    let (cfg, e) = a.ensemble.load()?;
    let radii = parse_list(&a.radii, "radii")?;
    let center = parse_point(&a.center, "center")?;
    let mc = McSpec { trials: a.trials, seed: g.seed, workers: g.workers };
    let rep = hole_probability(&e, &cfg.law.law(), center, &radii, mc, a.scan)?;
    let config = json!({
        "ensemble": ensemble_json(&cfg, &e),
        "seed": g.seed,
        "trials": a.trials,
        "radii": radii,
        "center": center,
        "scan": a.scan,
    });
    emit(out(g), &envelope("hole", config, &rep)?)?;
    if g.emit_plot_data {
        let mut plot = String::from("radius,empirical,ci_lower,ci_upper,bound\n");
        for est in &rep.estimates {
            plot.push_str(&format!(
                "{},{},{},{},{}\n",
                est.radius, est.empirical_prob, est.ci.lower, est.ci.upper, est.bound
            ));
        }
        std::fs::write(plot_path(out(g), "hole.plot.csv"), plot)?;
    }
    Ok(rep.all_hold)
}

fn lemma(g: &Global, a: &LemmaArgs) -> Result<bool> {
    let sigmas = parse_list(&a.sigma, "sigma")?;
    let masses = match &a.masses {
        Some(m) => parse_list(m, "masses")?,
        None if a.events.is_empty() => vec![1e-3, 1e-2, 0.1, 0.5],
        None => Vec::new(),
    };
    let mut reports = Vec::new();
    for &sigma in &sigmas {
        for spec in &a.events {
            reports.push(lemma_check(sigma, &LemmaEvent::parse(spec, sigma)?)?);
        }
        for &nu in &masses {
            reports.push(lemma_check(sigma, &LemmaEvent::sublevel_with_mass(nu, sigma)?)?);
        }
    }
    let pointwise = match &a.pointwise {
        Some(l) => parse_list(l, "pointwise")?
            .into_iter()
            .map(|lambda| {
                let e = Ensemble::planar(1.0)?;
                pointwise_concentration(&e, &Default::default(), Complex64::new(0.0, 0.0), lambda, None)
            })
            .collect::<gafzeros_core::Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let ok = reports.iter().all(|r| r.holds) && pointwise.iter().all(|p| p.holds);
    let config = json!({"sigma": sigmas, "events": a.events, "masses": masses, "pointwise": a.pointwise});
    let result = json!({"checks": reports, "pointwise": pointwise, "all_hold": ok});
    emit(out(g), &envelope("lemma", config, result)?)?;
    Ok(ok)
}

fn load_model(spec: &str) -> Result<(ModelConfig, KernelModel)> {
    let cfg: ModelConfig = if spec.trim_start().starts_with('{') {
        serde_json::from_str(spec).context("parsing inline model")?
    } else {
        load_json(&PathBuf::from(spec)).with_context(|| format!("reading model {spec}"))?
    };
    let m = cfg.build().with_context(|| format!("building model {spec}"))?;
    Ok((cfg, m))
}

fn rigidity(g: &Global, a: &RigidityArgs) -> Result<bool> {
    let (c1, m1) = load_model(&a.model1)?;
    let (c2, m2) = load_model(&a.model2)?;
    let points: Vec<Complex64> = if a.points == "auto" {
        let k = (2 * m1.dimension()).max(8) + 4;
        (0..k)
            .map(|i| Complex64::from_polar(a.half_width * (0.3 + 0.7 * i as f64 / k as f64), 2.4 * i as f64))
            .collect()
    } else {
        let raw: Vec<[f64; 2]> = load_json(Path::new(&a.points)).with_context(|| format!("reading points {}", a.points))?;
        raw.into_iter().map(|[x, y]| Complex64::new(x, y)).collect()
    };
    let grid = square_grid(Complex64::new(0.0, 0.0), a.half_width, 12);
    let riesz = riesz_compare(&m1, &m2, &grid, a.h)?;
    let cert = if riesz.same_measure {
        Some(recover_equivalence(&m1, &m2, &points)?)
    } else {
        None
    };
    let ok = cert
        .as_ref()
        .is_some_and(|c| c.residual <= RESIDUAL_LIMIT && c.unitarity_defect <= UNITARITY_LIMIT);
    let config = json!({"model1": c1, "model2": c2, "points": points, "half_width": a.half_width, "h": a.h});
    let result = json!({"riesz": riesz, "certificate": cert, "equivalent": ok});
    emit(out(g), &envelope("rigidity", config, result)?)?;
    Ok(ok)
}

fn poly_lemma(g: &Global, a: &PolyLemmaArgs) -> Result<bool> {
    let p = RealPolynomial::parse(&a.poly)?;
    let ev = PolyEvent::parse(&a.event)?;
    let rep = polynomial_lemma_check(&p, &ev, a.trials, g.seed)?;
    let config = json!({"poly": p, "event": ev, "trials": a.trials, "seed": g.seed});
    emit(out(g), &envelope("poly-lemma", config, &rep)?)?;
    Ok(rep.finite)
}
