//! Batch command-line front end.
//!
//! Every command writes its artifacts into `--out` together with a
//! `manifest.json` recording the inputs, the calibrated constants in effect
//! and the list of files produced. Floats are written in shortest
//! round-trip form, so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use crate::action::{
    action_boundary, action_closed, coefficient_trace, first_caustic, nearest_caustics, ActionCoefficients,
};
use crate::calibration::{SHIPPED_CROSS_FACTOR, SHIPPED_KAPPA};
use crate::classical::{sample_trajectory, solve_modes, Endpoints};
use crate::error::{Error, Result};
use crate::evolve::io::{write_binary, write_csv};
use crate::evolve::{
    cat_state, gaussian, observables, propagate_with, CatState1DSpec, GaussianSpec, Grid2D, PropagationOptions,
    WaveField,
};
use crate::model::{derive, OscillatorConfig};
use crate::oracle::lagrangian_action;
use crate::propagator::{kernel, kernel_slice, GaugeTag};
use crate::spectrum::levels_sorted;
use crate::verify::{run_suite, CheckOutcome, Suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "magosc", version, about = "Exact propagator of a charged particle in a 2D anisotropic oscillator with a perpendicular magnetic field")]
pub struct Cli {
    /// Oscillator configuration (JSON: omega1, omega2, omega0, optional m and hbar).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "magosc-out")]
    pub out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomised verification draws.
    #[arg(long, global = true, default_value_t = VerifyOptions::default().seed)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest energy levels with Landau labels.
    Spectrum {
        /// Number of levels.
        #[arg(short = 'k', long, default_value_t = 10)]
        count: usize,
    },
    /// Classical path between two endpoints.
    Trajectory {
        #[command(flatten)]
        endpoints: EndpointArgs,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Classical action by three routes, plus coefficient traces.
    Action {
        #[command(flatten)]
        endpoints: EndpointArgs,
        /// End of the coefficient trace (defaults to t).
        #[arg(long)]
        trace_until: Option<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Propagator at a point or on a target grid.
    Kernel(KernelArgs),
    /// Wave-packet evolution by exact-kernel quadrature.
    Evolve(EvolveArgs),
    /// Acceptance checks; exits nonzero on any failure.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct EndpointArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub y1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub y2: f64,
    #[arg(long)]
    pub t: f64,
}

impl EndpointArgs {
    fn endpoints(&self) -> Endpoints {
        Endpoints::new(self.x1, self.y1, self.x2, self.y2, self.t)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GaugeArg {
    Symmetric,
    Weighted,
}

impl From<GaugeArg> for GaugeTag {
    fn from(g: GaugeArg) -> Self {
        match g {
            GaugeArg::Symmetric => GaugeTag::Symmetric,
            GaugeArg::Weighted => GaugeTag::Weighted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    All,
    Identities,
    Kernel,
    Spectrum,
    Evolution,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Kernel => Suite::Kernel,
            SuiteArg::Spectrum => Suite::Spectrum,
            SuiteArg::Evolution => Suite::Evolution,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = GaugeArg::Symmetric)]
    pub gauge: GaugeArg,
    /// Source point x1,y1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub source: Vec<f64>,
    /// Single target point x2,y2; otherwise a square target grid is written.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum StateKind {
    Gaussian,
    Cat,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum FieldFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum, default_value_t = StateKind::Gaussian)]
    pub state: StateKind,
    /// Output times.
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 96)]
    pub points: usize,
    #[arg(long, default_value_t = 5.0)]
    pub half_width: f64,
    #[arg(long, value_enum, default_value_t = GaugeArg::Symmetric)]
    pub gauge: GaugeArg,
    #[arg(long, value_enum, default_value_t = FieldFormat::Binary)]
    pub format: FieldFormat,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub px: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub py: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_x: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_y: f64,
    /// Cat separation (defaults to the Bohr radius, 1 in natural units).
    #[arg(long)]
    pub a0: Option<f64>,
    /// Cat hump variance.
    #[arg(long, default_value_t = 0.25)]
    pub sigma2: f64,
}

/// Reproducibility record written next to every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<OscillatorConfig>,
    pub outputs: Vec<PathBuf>,
    pub kappa: f64,
    pub cross_factor: f64,
    pub version: &'static str,
    pub seed: u64,
    pub warnings: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

struct Session {
    out: PathBuf,
    manifest: RunManifest,
}

impl Session {
    fn new(cli: &Cli, command: &str, config: Option<OscillatorConfig>) -> Result<Self> {
        fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
        Ok(Self {
            out: cli.out.clone(),
            manifest: RunManifest {
                command: command.into(),
                config,
                outputs: Vec::new(),
                kappa: SHIPPED_KAPPA.value(),
                cross_factor: SHIPPED_CROSS_FACTOR.value(),
                version: env!("CARGO_PKG_VERSION"),
                seed: cli.seed,
                warnings: Vec::new(),
            },
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.record(path.clone());
        Ok(path)
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).expect("plain data serialises");
        self.write_text(name, &(text + "\n"))
    }

    fn record(&mut self, path: PathBuf) {
        info!("wrote {}", path.display());
        self.manifest.outputs.push(path);
    }

    fn warn(&mut self, message: String) {
        warn!("{message}");
        self.manifest.warnings.push(message);
    }

    fn finish(mut self) -> Result<RunManifest> {
        let path = self.path(MANIFEST_NAME);
        self.manifest.outputs.push(path.clone());
        let text = serde_json::to_string_pretty(&self.manifest).expect("plain data serialises");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(self.manifest)
    }
}

/// Outcome of a command: the manifest and whether verification passed.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub success: bool,
}

fn require_config(cli: &Cli) -> Result<OscillatorConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("this command needs --config PATH".into()))?;
    OscillatorConfig::from_path(path)
}

/// Caustic errors are re-raised with the nearest safe and unsafe times.
fn explain(err: Error) -> Error {
    match err {
        Error::Caustic { time, nearby } if !nearby.is_empty() => {
            let list = nearby.iter().map(|t| format!("{t:.12}")).collect::<Vec<_>>().join(", ");
            Error::InvalidArgument(format!(
                "t = {time} is a caustic; nearby caustic times: [{list}]. Choose a time away from these values"
            ))
        }
        other => other,
    }
}

pub fn run(cli: &Cli) -> Result<RunOutcome> {
    if let Some(n) = cli.threads {
        // Ignored when a pool already exists (repeated calls in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let (manifest, success) = match &cli.command {
        Command::Spectrum { count } => (cmd_spectrum(cli, *count)?, true),
        Command::Trajectory { endpoints, samples } => (cmd_trajectory(cli, endpoints, *samples)?, true),
        Command::Action { endpoints, trace_until, samples } => (cmd_action(cli, endpoints, *trace_until, *samples)?, true),
        Command::Kernel(args) => (cmd_kernel(cli, args).map_err(explain)?, true),
        Command::Evolve(args) => (cmd_evolve(cli, args).map_err(explain)?, true),
        Command::Verify { suite } => cmd_verify(cli, (*suite).into())?,
    };
    Ok(RunOutcome { manifest, success })
}

fn cmd_spectrum(cli: &Cli, count: usize) -> Result<RunManifest> {
    let config = require_config(cli)?;
    let levels = levels_sorted(&config, count, SHIPPED_KAPPA)?;
    let mut csv = String::from("n1,n2,n_r,m,energy_printed,energy_canonical\n");
    for l in &levels {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            l.index.n1, l.index.n2, l.landau.n_r, l.landau.m, l.energy_printed, l.energy_canonical
        )
        .expect("string write");
    }
    let mut s = Session::new(cli, "spectrum", Some(config))?;
    s.write_text("spectrum.csv", &csv)?;
    s.finish()
}

fn cmd_trajectory(cli: &Cli, args: &EndpointArgs, samples: usize) -> Result<RunManifest> {
    let config = require_config(cli)?;
    let df = derive(&config)?;
    let ep = args.endpoints();
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let mc = solve_modes(&ep, &df, &config).map_err(explain)?;
    let times: Vec<f64> = (0..samples).map(|k| ep.t * k as f64 / (samples - 1) as f64).collect();
    let points = sample_trajectory(&mc, &df, &config, &times);
    let mut csv = String::from("t,x,y,vx,vy\n");
    for (t, p) in times.iter().zip(&points) {
        writeln!(csv, "{t},{},{},{},{}", p.x, p.y, p.vx, p.vy).expect("string write");
    }
    let mut s = Session::new(cli, "trajectory", Some(config))?;
    s.write_text("trajectory.csv", &csv)?;
    s.write_json("modes.json", &mc)?;
    s.finish()
}

#[derive(Serialize)]
struct ActionSummary {
    endpoints: Endpoints,
    closed: f64,
    boundary: f64,
    lagrangian: f64,
    lagrangian_error_estimate: f64,
    cross_factor: f64,
    first_caustic: f64,
}

fn cmd_action(cli: &Cli, args: &EndpointArgs, trace_until: Option<f64>, samples: usize) -> Result<RunManifest> {
    let config = require_config(cli)?;
    let df = derive(&config)?;
    let ep = args.endpoints();
    let closed = action_closed(&ep, &df, &config, SHIPPED_CROSS_FACTOR).map_err(explain)?;
    let quadrature = lagrangian_action(&ep, &df, &config).map_err(explain)?;
    let summary = ActionSummary {
        endpoints: ep,
        closed,
        boundary: action_boundary(&ep, &df, &config).map_err(explain)?,
        lagrangian: quadrature.value,
        lagrangian_error_estimate: quadrature.error_estimate,
        cross_factor: SHIPPED_CROSS_FACTOR.value(),
        first_caustic: first_caustic(&df, &config),
    };

    let mut s = Session::new(cli, "action", Some(config))?;
    s.write_json("action.json", &summary)?;
    if df.is_coupled() {
        let until = trace_until.unwrap_or(ep.t);
        if samples < 2 || !(until > 0.0) {
            return Err(Error::InvalidArgument("coefficient trace needs a positive end time and 2+ samples".into()));
        }
        let times: Vec<f64> = (0..samples).map(|k| until * k as f64 / (samples - 1) as f64).collect();
        let trace = coefficient_trace(&df, &config, &times);
        let mut csv = String::from("t,a1,a2,b1,b2,c1,c2,f1,f2,D\n");
        for (t, k) in times.iter().zip(&trace) {
            let ActionCoefficients { a1, a2, b1, b2, c1, c2, f1, f2, big_d } = *k;
            writeln!(csv, "{t},{a1},{a2},{b1},{b2},{c1},{c2},{f1},{f2},{big_d}").expect("string write");
        }
        s.write_text("coefficients.csv", &csv)?;
    } else {
        s.warn("coefficient functions are undefined without a field; no trace written".into());
    }
    s.finish()
}

#[derive(Serialize)]
struct PointKernel {
    endpoints: Endpoints,
    gauge: GaugeTag,
    re: f64,
    im: f64,
    abs: f64,
    arg: f64,
}

fn cmd_kernel(cli: &Cli, args: &KernelArgs) -> Result<RunManifest> {
    let config = require_config(cli)?;
    let df = derive(&config)?;
    let gauge: GaugeTag = args.gauge.into();
    let pair = |v: &[f64], what: &str| match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidArgument(format!("--{what} takes two comma-separated numbers"))),
    };
    let (x1, y1) = pair(&args.source, "source")?;
    let target = args.target.as_deref().map(|v| pair(v, "target")).transpose()?;
    let mut s = Session::new(cli, "kernel", Some(config))?;
    match target {
        Some((x2, y2)) => {
            let ep = Endpoints::new(x1, y1, x2, y2, args.t);
            let g = kernel(&ep, &df, &config, gauge)?.value;
            println!("{} {}", g.re, g.im);
            s.write_json("kernel_point.json", &PointKernel { endpoints: ep, gauge, re: g.re, im: g.im, abs: g.norm(), arg: g.arg() })?;
        }
        None => {
            let grid = Grid2D::square(args.points, args.half_width)?;
            let targets: Vec<(f64, f64)> = (0..grid.nx)
                .flat_map(|i| (0..grid.ny).map(move |j| (i, j)))
                .map(|(i, j)| (grid.x(i), grid.y(j)))
                .collect();
            let values = kernel_slice((x1, y1), &targets, args.t, &df, &config, gauge)?;
            let mut csv = String::from("x,y,re,im,abs,arg\n");
            for ((x, y), k) in targets.iter().zip(&values) {
                let g = k.value;
                writeln!(csv, "{x},{y},{},{},{},{}", g.re, g.im, g.norm(), g.arg()).expect("string write");
            }
            s.write_text("kernel_grid.csv", &csv)?;
        }
    }
    let near = nearest_caustics(&df, &config, args.t);
    if let Some(closest) = near.iter().map(|c| (c - args.t).abs()).reduce(f64::min) {
        if closest < 1e-3 * first_caustic(&df, &config) {
            s.warn(format!("t = {} lies within {closest:e} of a caustic", args.t));
        }
    }
    s.finish()
}

fn initial_state(config: &OscillatorConfig, args: &EvolveArgs, grid: &Grid2D) -> Result<WaveField> {
    match args.state {
        StateKind::Gaussian => {
            let spec = GaussianSpec {
                x0: args.x0,
                y0: args.y0,
                px: args.px,
                py: args.py,
                sigma_x: args.sigma_x,
                sigma_y: args.sigma_y,
            };
            gaussian(grid, &spec, config.hbar)
        }
        StateKind::Cat => {
            let a0 = args.a0.unwrap_or_else(|| CatState1DSpec::bohr_radius(1.0, 1.0, 1.0));
            cat_state(grid, &CatState1DSpec { a0, sigma2: args.sigma2 }, args.sigma_y)
        }
    }
}

fn cmd_evolve(cli: &Cli, args: &EvolveArgs) -> Result<RunManifest> {
    let config = require_config(cli)?;
    let grid = Grid2D::square(args.points, args.half_width)?;
    let psi = initial_state(&config, args, &grid)?;
    let options = PropagationOptions { gauge: args.gauge.into(), max_step: None };
    let mut s = Session::new(cli, "evolve", Some(config))?;
    let mut csv = String::from("t,norm,mean_x,mean_y,mean_x2,mean_y2,mean_px,mean_py,autocorrelation,escaped\n");
    for (k, &t) in args.times.iter().enumerate() {
        let run = propagate_with(&psi, &config, t, &options)?;
        for w in run.report.warnings() {
            s.warn(w);
        }
        let o = observables(&run.field, Some(&psi), config.hbar)?;
        writeln!(
            csv,
            "{t},{},{},{},{},{},{},{},{},{}",
            o.norm,
            o.mean_x,
            o.mean_y,
            o.mean_x2,
            o.mean_y2,
            o.mean_px,
            o.mean_py,
            o.autocorrelation.unwrap_or(f64::NAN),
            u8::from(run.report.escaped)
        )
        .expect("string write");
        let path = match args.format {
            FieldFormat::Csv => {
                let p = s.path(&format!("field_{k:04}.csv"));
                write_csv(&run.field, &p)?;
                p
            }
            FieldFormat::Binary => {
                let p = s.path(&format!("field_{k:04}.bin"));
                write_binary(&run.field, &p)?;
                p
            }
        };
        s.record(path);
    }
    s.write_text("observables.csv", &csv)?;
    s.finish()
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    suite: Suite,
    passed: bool,
    checks: &'a [CheckOutcome],
}

fn cmd_verify(cli: &Cli, suite: Suite) -> Result<(RunManifest, bool)> {
    let config = match &cli.config {
        Some(path) => Some(OscillatorConfig::from_path(path)?),
        None => None,
    };
    let outcomes = run_suite(suite, &VerifyOptions { seed: cli.seed });
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let mut s = Session::new(cli, "verify", config)?;
    if config.is_some() {
        s.warn("verification uses its built-in configurations; --config is recorded only".into());
    }
    s.write_json("verify_report.json", &VerifyReport { suite, passed, checks: &outcomes })?;
    for o in &outcomes {
        if let Some(artifact) = &o.artifact {
            let name = match o.criterion {
                3 => "arbitration_report.json".to_string(),
                8 => "calibration_report.json".to_string(),
                n => format!("criterion_{n}_artifact.json"),
            };
            s.write_json(&name, artifact)?;
        }
    }
    for o in outcomes.iter().filter(|o| !o.passed) {
        s.warn(format!("criterion {} ({}) failed", o.criterion, o.title));
    }
    Ok((s.finish()?, passed))
}

/// Output path helper for callers that want to read artifacts back.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.join(MANIFEST_NAME)
}
