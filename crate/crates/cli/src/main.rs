use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use ma_translators_cli::config::{config_from_value, read_json, validate_config, ConfigError, Experiment};
use ma_translators_cli::experiments::{run, RunError};

#[derive(Parser)]
#[command(name = "ma-translators", version, about = "Numerical experiments for Monge-Ampère translators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(flatten)]
    Experiment(ExperimentCommand),
    /// Run an experiment, or the one named in `--config`.
    Run(RunCommand),
    /// Print every violation in a config file.
    Validate { path: PathBuf },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Tabulate a radial profile and check its ODE residual.
    Oracle(RunArgs),
    /// Solve a Dirichlet problem and compare with the exact solution.
    Solve(RunArgs),
    /// Sections, John ellipses and the balance constant k0.
    Sections(RunArgs),
    /// Fit the growth exponent on circles.
    Growth(RunArgs),
    /// Eccentricity of sections across levels.
    Cascade(RunArgs),
    /// Estimate the doubling constant of a right-hand side.
    Doubling(RunArgs),
    /// Solve the dual problem and check the weighted-mass identity on annuli.
    VerifyDual(RunArgs),
    /// Check the Monge-Ampère identity of the sampled translator.
    VerifyTranslator(RunArgs),
}

impl ExperimentCommand {
    fn split(self) -> (RunArgs, Experiment) {
        match self {
            ExperimentCommand::Oracle(a) => (a, Experiment::Oracle),
            ExperimentCommand::Solve(a) => (a, Experiment::Solve),
            ExperimentCommand::Sections(a) => (a, Experiment::Sections),
            ExperimentCommand::Growth(a) => (a, Experiment::Growth),
            ExperimentCommand::Cascade(a) => (a, Experiment::Cascade),
            ExperimentCommand::Doubling(a) => (a, Experiment::Doubling),
            ExperimentCommand::VerifyDual(a) => (a, Experiment::VerifyDual),
            ExperimentCommand::VerifyTranslator(a) => (a, Experiment::VerifyTranslator),
        }
    }
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct RunCommand {
    #[command(subcommand)]
    experiment: Option<ExperimentCommand>,
    #[command(flatten)]
    args: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// oracle-dual, oracle-primal, quadratic, separable or solve.
    #[arg(long)]
    source: Option<String>,
    /// dual or primal.
    #[arg(long)]
    profile: Option<String>,
    /// Disk domain of this radius.
    #[arg(long, conflicts_with = "half_width")]
    radius: Option<f64>,
    /// Square domain of this half width.
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Relative mass tolerance of the solver.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// newton or oliker-prussner.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    ascent_rounds: Option<u64>,
    /// constant, dual or degenerate.
    #[arg(long)]
    rhs: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    n_circles: Option<u64>,
    #[arg(long)]
    n_points: Option<u64>,
    /// Geometric levels as T0,RATIO,N.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    levels: Option<Vec<f64>>,
    /// symmetric or q-lambda.
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    /// Radii as INNER,OUTER.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    annulus: Option<Vec<f64>>,
    /// Tolerance of the pass/fail verdict.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Also save the sampled profile as a grid function.
    #[arg(long)]
    gfn: Option<PathBuf>,
}

impl RunArgs {
    /// The config file (or an empty object) with flags written over it.
    fn to_value(&self, experiment: Option<Experiment>) -> Result<Value, ConfigError> {
        let mut v = match &self.config {
            Some(p) => read_json(p)?,
            None => Value::Object(Map::new()),
        };
        let Some(obj) = v.as_object_mut() else {
            return Ok(v);
        };
        let mut set = |k: &str, x: Option<Value>| {
            if let Some(x) = x {
                obj.insert(k.to_string(), x);
            }
        };
        set("experiment", experiment.map(|e| json!(e.name())));
        set("output_dir", self.output_dir.as_ref().map(|p| json!(p)));
        set("alpha", self.alpha.map(|x| json!(x)));
        set("eta", self.eta.map(|x| json!(x)));
        set("source", self.source.as_ref().map(|x| json!(x)));
        set("profile", self.profile.as_ref().map(|x| json!(x)));
        set("domain", self.radius.map(|r| json!({"kind": "disk", "radius": r})));
        set("domain", self.half_width.map(|w| json!({"kind": "square", "half_width": w})));
        set("h", self.h.map(|x| json!(x)));
        set("tol", self.tol.map(|x| json!(x)));
        set("max_iters", self.max_iters.map(|x| json!(x)));
        set("scheme", self.scheme.as_ref().map(|x| json!(x)));
        set("seed", self.seed.map(|x| json!(x)));
        set("samples", self.samples.map(|x| json!(x)));
        set("ascent_rounds", self.ascent_rounds.map(|x| json!(x)));
        set("rhs", self.rhs.as_ref().map(|x| json!(x)));
        set("a", self.a.map(|x| json!(x)));
        set("rmin", self.rmin.map(|x| json!(x)));
        set("rmax", self.rmax.map(|x| json!(x)));
        set("n_circles", self.n_circles.map(|x| json!(x)));
        set("n_points", self.n_points.map(|x| json!(x)));
        set("levels", self.levels.as_ref().map(|l| json!({"t0": l[0], "ratio": l[1], "n": l[2] as u64})));
        set("normalization", self.normalization.as_ref().map(|x| json!(x)));
        set("m", self.m.map(|x| json!(x)));
        set("c1", self.c1.map(|x| json!(x)));
        set("annulus", self.annulus.as_ref().map(|x| json!(x)));
        set("tolerance", self.tolerance.map(|x| json!(x)));
        set("gfn", self.gfn.as_ref().map(|p| json!(p)));
        Ok(v)
    }
}

fn execute(args: &RunArgs, experiment: Option<Experiment>) -> Result<bool, RunError> {
    let cfg = config_from_value(args.to_value(experiment)?)?;
    let report = run(&cfg)?;
    for v in &report.verdicts {
        println!("{} {}: measured {:e}, expected {:e}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.measured, v.expected);
    }
    println!("report: {}", cfg.output_dir.join("report.json").display());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let (args, experiment) = match Cli::parse().command {
        Command::Validate { path } => {
            let violations = validate_config(&path);
            for v in &violations {
                println!("{v}");
            }
            return if violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) };
        }
        Command::Experiment(c) | Command::Run(RunCommand { experiment: Some(c), .. }) => {
            let (a, e) = c.split();
            (a, Some(e))
        }
        Command::Run(RunCommand { experiment: None, args }) => (args, None),
    };
    match execute(&args, experiment) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
