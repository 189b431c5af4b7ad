//! One function per experiment. Each writes its data files and returns outputs and verdicts.

use std::f64::consts::PI;
use std::fmt::Display;
use std::time::Instant;

use ma_translators::analysis::{eccentricity_cascade, geometric_levels, growth_exponent, minimal_c1, AnalysisReport};
use ma_translators::grid::{Domain2D, GridFunction, RhsField};
use ma_translators::measure::{cells_to_csv, check_translator_identity, gauss_map_mass, lower_envelope, site_weighted_mass, subgradient_cells};
use ma_translators::oracle::{RadialProfile, SeparableSolution};
use ma_translators::sections::{
    balance_check, caffarelli_radius, doubling_constant, eccentricity, john_ellipsoid, DoublingOptions, Normalization, SectionSource,
};
use ma_translators::solver::{solve_with, DirichletProblem, Scheme, SolveOptions, SolveReport};
use ma_translators::Point2;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Config, ConfigError, DomainSpec, Experiment};
use crate::output::{dat_string, write_json, Comparison, ExperimentReport, OutputDir, Stage, Timings, Verdict};

/// Rays used for sections of closed-form functions.
const ANALYTIC_RAYS: usize = 1024;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// Solver non-convergence and other numerical failures.
    Numerical(String),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 3,
        }
    }
}

impl Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn num<E: Display>(e: E) -> RunError {
    RunError::Numerical(e.to_string())
}

/// Output of one experiment before it is wrapped into a report.
struct Outcome {
    outputs: Value,
    verdicts: Vec<Verdict>,
}

struct Clock {
    start: Instant,
    last: Instant,
    timings: Timings,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Clock { start: now, last: now, timings: Timings::default() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.stages.push(Stage { stage: stage.to_string(), seconds: (now - self.last).as_secs_f64() });
        self.last = now;
    }

    fn finish(mut self) -> Timings {
        self.timings.total = self.start.elapsed().as_secs_f64();
        self.timings
    }
}

/// Runs the experiment, writes `report.json`, `timings.json` and data files into the output directory.
pub fn run(cfg: &Config) -> Result<ExperimentReport, RunError> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut out = OutputDir::new(&cfg.output_dir);
    let mut clock = Clock::new();
    let outcome = match cfg.experiment {
        Experiment::Oracle => oracle(cfg, &mut out, &mut clock)?,
        Experiment::Solve => solve_exp(cfg, &mut out, &mut clock)?,
        Experiment::Sections => sections(cfg, &mut out, &mut clock)?,
        Experiment::Growth => growth(cfg, &mut out, &mut clock)?,
        Experiment::Cascade => cascade(cfg, &mut out, &mut clock)?,
        Experiment::Doubling => doubling(cfg, &mut out, &mut clock)?,
        Experiment::VerifyDual => verify_dual(cfg, &mut out, &mut clock)?,
        Experiment::VerifyTranslator => verify_translator(cfg, &mut out, &mut clock)?,
    };
    let pass = outcome.verdicts.iter().all(|v| v.pass);
    let report = ExperimentReport { config: cfg.clone(), outputs: outcome.outputs, files: out.files.clone(), verdicts: outcome.verdicts, pass };
    write_json(&cfg.output_dir.join("report.json"), &report)?;
    let timings = clock.finish();
    write_json(&cfg.output_dir.join("timings.json"), &timings)?;
    Ok(report)
}

fn domain(cfg: &Config) -> Result<Domain2D, RunError> {
    match cfg.domain.expect("domain defaulted") {
        DomainSpec::Square { half_width } => Domain2D::square(half_width),
        DomainSpec::Disk { radius } => Domain2D::disk(radius),
    }
    .map_err(num)
}

fn eta(cfg: &Config) -> f64 {
    cfg.eta.unwrap_or(1.0)
}

/// Closed-form functions that experiments take sections, fits and boundary data from.
enum Source {
    Quadratic,
    Dual(RadialProfile),
    Primal(RadialProfile),
    Separable(SeparableSolution),
}

impl Source {
    fn from_config(cfg: &Config) -> Result<Source, RunError> {
        Ok(match cfg.source() {
            "quadratic" => Source::Quadratic,
            "oracle-primal" => Source::Primal(RadialProfile::primal(cfg.alpha).map_err(num)?),
            "separable" => Source::Separable(SeparableSolution::new(cfg.alpha, cfg.a.unwrap_or(1.0)).map_err(num)?),
            _ => Source::Dual(RadialProfile::dual(cfg.alpha, eta(cfg)).map_err(num)?),
        })
    }

    fn value(&self, x: Point2) -> f64 {
        match self {
            Source::Quadratic => 0.5 * x.norm_sq(),
            Source::Dual(p) | Source::Primal(p) => p.value_at(x),
            Source::Separable(s) => s.value(x),
        }
    }

    /// Right-hand side `det D²v` of the source, used for section masses and Dirichlet problems.
    fn rhs(&self, cfg: &Config) -> RhsField {
        match self {
            Source::Quadratic => RhsField::Constant(1.0),
            Source::Dual(_) => RhsField::DualTranslator { alpha: cfg.alpha, eta: eta(cfg) },
            Source::Separable(_) => RhsField::Degenerate { alpha: cfg.alpha },
            Source::Primal(p) => {
                let p = p.clone();
                RhsField::CustomRadial(std::sync::Arc::new(move |r| p.rhs(r)))
            }
        }
    }
}

fn solve_options(cfg: &Config) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol.unwrap_or(1e-8),
        max_iters: cfg.max_iters.unwrap_or(1_000_000_000),
        scheme: if cfg.scheme.as_deref() == Some("oliker-prussner") { Scheme::OlikerPrussner } else { Scheme::Newton },
    }
}

fn solve_problem(problem: &DirichletProblem, cfg: &Config) -> Result<SolveReport, RunError> {
    solve_with(problem, &solve_options(cfg)).map_err(num)
}

/// Nodal `max|v − exact| / max|exact|`.
fn relative_error(g: &GridFunction, exact: impl Fn(Point2) -> f64) -> f64 {
    let scale = g.nodes().iter().map(|&x| exact(x).abs()).fold(0.0, f64::max);
    let err = g.nodes().iter().zip(g.values()).map(|(&x, &v)| (v - exact(x)).abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn oracle(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let prof = if cfg.profile.as_deref() == Some("primal") {
        RadialProfile::primal(cfg.alpha)
    } else {
        RadialProfile::dual(cfg.alpha, eta(cfg))
    }
    .map_err(num)?;
    let rmax = cfg.rmax.unwrap_or(256.0);
    let n = cfg.n_points.unwrap_or(257);
    let radii: Vec<f64> = (0..n).map(|k| rmax * k as f64 / (n - 1) as f64).collect();
    out.write("profile.csv", &prof.to_csv(&radii))?;
    let rows: Vec<Vec<f64>> = radii.iter().map(|&r| vec![r, prof.slope(r), prof.value(r)]).collect();
    out.write("profile.dat", &dat_string(&["r", "slope", "value"], &[rows]))?;
    clock.lap("profile");

    // Central differences of the slope against the radial equation on [0.01, 1e3].
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let r = 0.01 * 1e5f64.powf(k as f64 / 200.0);
        let d = 1e-4 * r;
        let dp = (prof.slope(r + d) - prof.slope(r - d)) / (2.0 * d);
        let rhs = prof.rhs(r);
        worst = worst.max((prof.slope(r) * dp / r - rhs).abs() / rhs);
    }
    clock.lap("substitution check");

    if let Some(path) = &cfg.gfn {
        let g = prof.sample(&domain(cfg)?, cfg.h.unwrap_or(0.5)).map_err(num)?;
        g.save(path).map_err(num)?;
        clock.lap("grid sample");
    }
    Ok(Outcome {
        outputs: json!({
            "kind": format!("{:?}", prof.kind()).to_lowercase(),
            "growth_exponent": prof.growth_exponent(),
            "value_at_rmax": prof.value(rmax),
            "slope_at_rmax": prof.slope(rmax),
        }),
        verdicts: vec![Verdict::new("substitution residual", worst, 1e-6, Comparison::AtMost, 1e-6)],
    })
}

fn solution_dat(g: &GridFunction, exact: impl Fn(Point2) -> f64) -> String {
    let rows = g.nodes().iter().zip(g.values()).map(|(&x, &v)| vec![x.x, x.y, v, exact(x)]).collect();
    dat_string(&["x", "y", "v", "exact"], &[rows])
}

fn solve_exp(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let src = Source::from_config(cfg)?;
    let problem = DirichletProblem::new(domain(cfg)?, cfg.h.unwrap(), src.rhs(cfg), |x| src.value(x)).map_err(num)?;
    clock.lap("setup");
    let rep = solve_problem(&problem, cfg)?;
    clock.lap("solve");
    let sol = rep.solution(&problem).map_err(num)?;
    let rel = relative_error(&sol, |x| src.value(x));
    sol.save(cfg.output_dir.join("solution.gfn")).map_err(num)?;
    out.files.push("solution.gfn".into());
    out.write("cells.csv", &cells_to_csv(&subgradient_cells(&rep.function)))?;
    out.write("solution.dat", &solution_dat(&sol, |x| src.value(x)))?;
    clock.lap("write");
    let tol = solve_options(cfg).tol;
    let etol = cfg.tolerance.unwrap();
    Ok(Outcome {
        outputs: json!({
            "sites": sol.len(),
            "interior_sites": problem.interior().len(),
            "solve": rep.summary(),
            "nodal_relative_error": rel,
        }),
        verdicts: vec![
            Verdict::new("mass residual", rep.max_residual, tol, Comparison::AtMost, tol),
            Verdict::new("nodal relative error", rel, etol, Comparison::AtMost, etol),
        ],
    })
}

fn normalization(cfg: &Config) -> Normalization {
    if cfg.normalization.as_deref() == Some("q-lambda") {
        Normalization::QLambda
    } else {
        Normalization::Symmetric
    }
}

/// Either a closed-form source or a solved dual problem, with its base point and right-hand side.
struct SectionInput {
    src: Option<Source>,
    grid: Option<GridFunction>,
    rhs: RhsField,
    x0: Point2,
    solve: Option<Value>,
}

impl SectionInput {
    fn build(cfg: &Config, clock: &mut Clock) -> Result<SectionInput, RunError> {
        if cfg.source() != "solve" {
            let src = Source::from_config(cfg)?;
            let rhs = src.rhs(cfg);
            return Ok(SectionInput { src: Some(src), grid: None, rhs, x0: Point2::ORIGIN, solve: None });
        }
        let oracle = RadialProfile::dual(cfg.alpha, eta(cfg)).map_err(num)?;
        let rhs = RhsField::DualTranslator { alpha: cfg.alpha, eta: eta(cfg) };
        let problem = DirichletProblem::new(domain(cfg)?, cfg.h.unwrap(), rhs.clone(), |x| oracle.value_at(x)).map_err(num)?;
        let rep = solve_problem(&problem, cfg)?;
        clock.lap("solve");
        let grid = rep.solution(&problem).map_err(num)?;
        let k = (0..grid.len()).min_by(|&a, &b| grid.values()[a].total_cmp(&grid.values()[b])).unwrap_or(0);
        let x0 = grid.nodes()[k];
        Ok(SectionInput { src: None, x0, rhs, grid: Some(grid), solve: Some(serde_json::to_value(rep.summary()).map_err(num)?) })
    }

    fn with_source<R>(&self, f: impl FnOnce(SectionSource<'_>) -> R) -> R {
        match (&self.src, &self.grid) {
            (_, Some(g)) => f(SectionSource::Grid(g)),
            (Some(s), None) => {
                let v = |x: Point2| s.value(x);
                f(SectionSource::Analytic { v: &v, n_rays: ANALYTIC_RAYS, r_max: 1e6 })
            }
            (None, None) => unreachable!("section input without a source"),
        }
    }
}

/// One row of `sections.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionRow {
    pub t: f64,
    pub area: f64,
    pub mass: f64,
    pub r: f64,
    pub ecc: f64,
    pub k0: f64,
    #[serde(rename = "A11")]
    pub a11: f64,
    #[serde(rename = "A12")]
    pub a12: f64,
    #[serde(rename = "A21")]
    pub a21: f64,
    #[serde(rename = "A22")]
    pub a22: f64,
}

fn levels(cfg: &Config) -> Vec<f64> {
    let l = cfg.levels.expect("levels defaulted");
    geometric_levels(l.t0, l.ratio, l.n)
}

fn sections(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let input = SectionInput::build(cfg, clock)?;
    let norm = normalization(cfg);
    let mut rows = Vec::new();
    let mut polys = Vec::new();
    for t in levels(cfg) {
        let s = input.with_source(|src| src.section(input.x0, Point2::ORIGIN, t)).map_err(num)?;
        let mass = s.rhs_mass(&input.rhs);
        let r = caffarelli_radius(t, mass).map_err(num)?;
        let fit = john_ellipsoid(&s.polygon, norm).map_err(num)?;
        let b = balance_check(&s, &fit, r).map_err(num)?;
        let a = fit.a;
        rows.push(SectionRow { t, area: s.area(), mass, r, ecc: eccentricity(&fit), k0: b.k0, a11: a[0][0], a12: a[0][1], a21: a[1][0], a22: a[1][1] });
        let mut block: Vec<Vec<f64>> = s.polygon.iter().map(|p| vec![p.x, p.y, t]).collect();
        block.push(block[0].clone());
        polys.push(block);
    }
    clock.lap("sections");
    out.csv("sections.csv", &rows)?;
    out.write("sections.dat", &dat_string(&["x", "y", "t"], &polys))?;
    let kmin = rows.iter().map(|r| r.k0).fold(f64::INFINITY, f64::min);
    let kmax = rows.iter().map(|r| r.k0).fold(0.0, f64::max);
    let spread = kmax / kmin;
    let tol = cfg.tolerance.unwrap();
    Ok(Outcome {
        outputs: json!({
            "base": [input.x0.x, input.x0.y],
            "k0_min": kmin,
            "k0_max": kmax,
            "k0_spread": spread,
            "solve": input.solve,
        }),
        verdicts: vec![Verdict::new("k0 spread", spread, tol, Comparison::Below, tol)],
    })
}

/// One row of `growth.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub r: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

fn growth(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let src = Source::from_config(cfg)?;
    let theory = match &src {
        Source::Quadratic => 2.0,
        Source::Dual(_) => 0.5 / cfg.alpha,
        Source::Primal(_) => 1.0 / (1.0 - 2.0 * cfg.alpha),
        Source::Separable(_) => unreachable!("rejected by validation"),
    };
    let fit = growth_exponent(&|x| src.value(x), cfg.rmin.unwrap(), cfg.rmax.unwrap(), cfg.n_circles.unwrap()).map_err(num)?;
    clock.lap("fit");
    let rows: Vec<GrowthRow> =
        (0..fit.radii.len()).map(|k| GrowthRow { r: fit.radii[k], min: fit.circle_min[k], max: fit.circle_max[k], mean: fit.circle_mean[k] }).collect();
    out.csv("growth.csv", &rows)?;
    let pts = rows.iter().map(|r| vec![r.r.ln(), r.mean.ln(), fit.intercept + fit.slope * r.r.ln()]).collect();
    out.write("growth.dat", &dat_string(&["log_r", "log_mean", "fit"], &[pts]))?;
    let tol = cfg.tolerance.unwrap();
    Ok(Outcome {
        outputs: json!({
            "analysis": AnalysisReport::from_growth(cfg.alpha, &fit, theory),
            "intercept": fit.intercept,
        }),
        verdicts: vec![Verdict::new("growth exponent", fit.slope, theory, Comparison::Relative, tol)],
    })
}

/// One row of `cascade.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeRow {
    pub t: f64,
    pub area: f64,
    pub ecc: f64,
    #[serde(rename = "A11")]
    pub a11: f64,
    #[serde(rename = "A12")]
    pub a12: f64,
    #[serde(rename = "A21")]
    pub a21: f64,
    #[serde(rename = "A22")]
    pub a22: f64,
}

fn cascade(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let input = SectionInput::build(cfg, clock)?;
    let ls = levels(cfg);
    let series = input.with_source(|src| eccentricity_cascade(src, input.x0, Point2::ORIGIN, &ls, normalization(cfg))).map_err(num)?;
    clock.lap("cascade");
    // Semi-axes (t/a)^{1/p} and (t/b)^{1/2} give |A_t| ∝ t^{(1/2 − 1/p)/2}; round sources have slope 0.
    let (theory, cmp) = match &input.src {
        Some(Source::Separable(s)) => (0.5 * (0.5 - 1.0 / s.p), Comparison::Relative),
        _ => (0.0, Comparison::Absolute),
    };
    let rows: Vec<CascadeRow> = series
        .levels
        .iter()
        .map(|l| CascadeRow { t: l.t, area: l.area, ecc: l.eccentricity, a11: l.fit.a[0][0], a12: l.fit.a[0][1], a21: l.fit.a[1][0], a22: l.fit.a[1][1] })
        .collect();
    out.csv("cascade.csv", &rows)?;
    let pts = rows.iter().map(|r| vec![r.t.ln(), r.ecc.ln()]).collect();
    out.write("cascade.dat", &dat_string(&["log_t", "log_ecc"], &[pts]))?;
    let (m, c1) = (cfg.m.unwrap(), cfg.c1.unwrap());
    let minimal = minimal_c1(&series, m);
    let tol = cfg.tolerance.unwrap();
    Ok(Outcome {
        outputs: json!({
            "analysis": AnalysisReport::from_cascade(cfg.alpha, &series, theory),
            "base": [input.x0.x, input.x0.y],
            "m": m,
            "minimal_c1": minimal,
            "solve": input.solve,
        }),
        verdicts: vec![
            Verdict::new("eccentricity slope", series.slope, theory, cmp, tol),
            // No level with |A| ≤ M makes the property vacuous.
            Verdict::new("minimal C1", minimal.unwrap_or(0.0), c1, Comparison::AtMost, c1),
        ],
    })
}

/// The single row of `doubling.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingRow {
    pub estimate: f64,
    pub n_samples: usize,
    pub cx: f64,
    pub cy: f64,
    pub a1: f64,
    pub a2: f64,
    pub angle: f64,
}

fn doubling(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let rhs = match cfg.rhs.as_deref() {
        Some("constant") => RhsField::Constant(1.0),
        Some("degenerate") => RhsField::Degenerate { alpha: cfg.alpha },
        _ => RhsField::DualTranslator { alpha: cfg.alpha, eta: eta(cfg) },
    };
    let f = |x: Point2| rhs.eval(x);
    let opts = DoublingOptions { ascent_rounds: cfg.ascent_rounds.unwrap() };
    let seed = cfg.seed.ok_or_else(|| num("seed is required"))?;
    let est = doubling_constant(&f, &domain(cfg)?, cfg.samples.unwrap(), seed, opts).map_err(num)?;
    clock.lap("estimate");
    let w = est.worst;
    out.csv(
        "doubling.csv",
        &[DoublingRow { estimate: est.estimate, n_samples: est.n_samples, cx: w.center.x, cy: w.center.y, a1: w.semi_axes.0, a2: w.semi_axes.1, angle: w.angle }],
    )?;
    let tol = cfg.tolerance.unwrap();
    let verdict = if matches!(rhs, RhsField::Constant(_)) {
        Verdict::new("doubling constant", est.estimate, 4.0, Comparison::Absolute, tol)
    } else {
        Verdict::new("doubling constant is finite", est.estimate, f64::MAX, Comparison::Below, f64::MAX)
    };
    Ok(Outcome { outputs: json!({ "estimate": est }), verdicts: vec![verdict] })
}

/// One row of `annuli.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRow {
    pub inner: f64,
    pub outer: f64,
    pub sites: usize,
    pub weighted_mass: f64,
    pub area: f64,
    pub gap: f64,
}

fn inradius(cfg: &Config) -> f64 {
    match cfg.domain.expect("domain defaulted") {
        DomainSpec::Square { half_width } => half_width,
        DomainSpec::Disk { radius } => radius,
    }
}

fn verify_dual(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let alpha = cfg.alpha;
    let oracle = RadialProfile::dual(alpha, eta(cfg)).map_err(num)?;
    let problem = DirichletProblem::new(domain(cfg)?, cfg.h.unwrap(), RhsField::DualTranslator { alpha, eta: eta(cfg) }, |x| oracle.value_at(x))
        .map_err(num)?;
    clock.lap("setup");
    let rep = solve_problem(&problem, cfg)?;
    clock.lap("solve");
    let sol = rep.solution(&problem).map_err(num)?;
    let rel = relative_error(&sol, |x| oracle.value_at(x));

    // Unit annuli that stay a full unit away from the boundary.
    let cells = subgradient_cells(&rep.function);
    let h2 = problem.h() * problem.h();
    let e = 2.0 - 0.5 / alpha;
    let mut rows = Vec::new();
    let mut k = 1.0;
    while k + 1.0 <= inradius(cfg) - 1.0 {
        let subset: Vec<usize> =
            (0..sol.len()).filter(|&i| !problem.is_boundary(i) && (k..k + 1.0).contains(&sol.nodes()[i].norm())).collect();
        if !subset.is_empty() {
            let wm = site_weighted_mass(&rep.function, &cells, &subset, |y| (1.0 + y.norm_sq()).powf(e)).map_err(num)?;
            let area = subset.len() as f64 * h2;
            rows.push(AnnulusRow { inner: k, outer: k + 1.0, sites: subset.len(), weighted_mass: wm, area, gap: (wm - area).abs() / area });
        }
        k += 1.0;
    }
    clock.lap("identity");
    if rows.is_empty() {
        return Err(RunError::Numerical("domain too small for an interior unit annulus".into()));
    }
    let worst = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    sol.save(cfg.output_dir.join("solution.gfn")).map_err(num)?;
    out.files.push("solution.gfn".into());
    out.csv("annuli.csv", &rows)?;
    let pts = sol.nodes().iter().zip(sol.values()).map(|(&x, &v)| vec![x.norm(), v, oracle.value_at(x)]).collect();
    out.write("profile.dat", &dat_string(&["r", "v", "oracle"], &[pts]))?;
    let tol = cfg.tolerance.unwrap();
    Ok(Outcome {
        outputs: json!({
            "sites": sol.len(),
            "solve": rep.summary(),
            "nodal_relative_error": rel,
            "worst_annulus_gap": worst,
        }),
        verdicts: vec![
            Verdict::new("nodal relative error", rel, tol, Comparison::Below, tol),
            Verdict::new("weighted-mass identity", worst, 0.05, Comparison::Below, 0.05),
        ],
    })
}

/// One row of `identity.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub inner: f64,
    pub outer: f64,
    pub measure: f64,
    pub integral: f64,
    pub relative: f64,
}

fn verify_translator(cfg: &Config, out: &mut OutputDir, clock: &mut Clock) -> Result<Outcome, RunError> {
    let prof = RadialProfile::primal(cfg.alpha).map_err(num)?;
    let u = prof.sample(&domain(cfg)?, cfg.h.unwrap()).map_err(num)?;
    let f = lower_envelope(u.nodes(), u.values()).map_err(num)?;
    clock.lap("envelope");
    let [lo, hi] = cfg.annulus.unwrap();
    let in_ring = |a: f64, b: f64| -> Vec<usize> { (0..u.len()).filter(|&i| (a..b).contains(&u.nodes()[i].norm())).collect() };
    let subset = in_ring(lo, hi);
    if subset.is_empty() {
        return Err(RunError::Numerical("annulus contains no sites".into()));
    }
    let id = check_translator_identity(&f, cfg.alpha, &subset).map_err(num)?;
    let gm = gauss_map_mass(&subgradient_cells(&f));
    let mut rows = Vec::new();
    for k in 0..10 {
        let (a, b) = (lo + (hi - lo) * k as f64 / 10.0, lo + (hi - lo) * (k + 1) as f64 / 10.0);
        let s = in_ring(a, b);
        if s.is_empty() {
            continue;
        }
        let r = check_translator_identity(&f, cfg.alpha, &s).map_err(num)?;
        rows.push(IdentityRow { inner: a, outer: b, measure: r.measure, integral: r.integral, relative: r.relative });
    }
    clock.lap("identity");
    out.csv("identity.csv", &rows)?;
    let pts = rows.iter().map(|r| vec![0.5 * (r.inner + r.outer), r.measure, r.integral]).collect();
    out.write("identity.dat", &dat_string(&["r", "measure", "integral"], &[pts]))?;
    let tol = cfg.tolerance.unwrap();
    Ok(Outcome {
        outputs: json!({
            "sites": u.len(),
            "annulus_sites": subset.len(),
            "identity": id,
            "gauss_map_mass": gm,
        }),
        verdicts: vec![
            Verdict::new("translator identity", id.relative, tol, Comparison::Below, tol),
            Verdict::new("Gauss-map mass", gm, 2.0 * PI, Comparison::AtMost, 2.0 * PI),
        ],
    })
}
