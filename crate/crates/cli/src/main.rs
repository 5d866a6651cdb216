//! `biphoton-pmd` command-line front end.
//!
//! Exit codes: 0 success, 1 numeric or validation failure, 2 usage or parse error.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biphoton_pmd::io::{write_jsi_csv, write_rho_csv, write_sweep_csv, write_temporal_csv};
use biphoton_pmd::validation::{run_all, ValidationOptions};
use biphoton_pmd::{
    build_jsa, concurrence_gaussian, concurrence_numeric, concurrence_time_domain,
    density_matrix_from_overlap, optimal_dgd_gaussian, optimize_compensator, parse_profile,
    parse_pump, pump_limited_sensitivity_tolerance, sensitivity_tolerance, sweep_pump_bandwidth,
    sweep_taub, temporal_amplitude, BiphotonAmplitude, ConcurrenceModel, Engine, Error, GridChoice,
    Method, PhotonPairSource, PmdScenario, PumpShape, Shape, SweepCurve, UnitSystem,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::Config;

const THREADS_ENV: &str = "BIPHOTON_PMD_THREADS";
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "biphoton-pmd", version, about = "Nonlocal PMD compensation for polarization-entangled photon pairs")]
struct Cli {
    /// Dimensionless mode: times in units of tau_a, bandwidths in units of 1/tau_a.
    /// Unit suffixes are rejected.
    #[arg(long, global = true)]
    normalized: bool,

    /// JSON file whose keys mirror the long flag names; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concurrence for one (tau_a, tau_b) pair.
    Concurrence(ConcurrenceArgs),
    /// Compensator DGD maximizing the concurrence.
    Optimize(OptimizeArgs),
    /// Concurrence versus tau_b, or best concurrence versus pump bandwidth, as CSV.
    Sweep(SweepArgs),
    /// Run the built-in acceptance checks.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Pump spectrum: `cw`, `gaussian:B=<freq>` or `supergauss:n=<int>,B=<freq>`.
    /// B is the rms bandwidth; `GHz` etc. are ordinary frequency (x 2pi).
    #[arg(long)]
    pump: Option<String>,
    /// Alice's filter: `gaussian:B=..[,offset=..]`, `supergauss:n=..,B=..[,offset=..]` or `table:<csv>`.
    #[arg(long)]
    filter_a: Option<String>,
    /// Bob's filter, same grammar as --filter-a.
    #[arg(long)]
    filter_b: Option<String>,
    /// DGD of Alice's fiber, e.g. `1ps`.
    #[arg(long, visible_alias = "taua", allow_hyphen_values = true)]
    tau_a: Option<String>,
    /// auto, analytic, freq, time or cw.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug)]
struct ConcurrenceArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Compensator DGD in Bob's path.
    #[arg(long, visible_alias = "taub", allow_hyphen_values = true)]
    tau_b: Option<String>,
    /// Write |f(wa, wb)|^2 on the computation grid as CSV.
    #[arg(long, value_name = "FILE")]
    dump_jsa: Option<PathBuf>,
    /// Write |g(ta, tb)|^2 on the dual time grid as CSV.
    #[arg(long, value_name = "FILE")]
    dump_temporal: Option<PathBuf>,
    /// Write the two-qubit density matrix as CSV.
    #[arg(long, value_name = "FILE")]
    dump_rho: Option<PathBuf>,
    /// Also write the JSON result to this file.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Golden-section tolerance on tau_b (default 1e-7 |tau_a|).
    #[arg(long)]
    tol: Option<String>,
    /// Also report the DGD tolerance as 2/B_p, next to the curvature value `tau0`.
    #[arg(long)]
    pump_limited_tau0: bool,
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// `taub` (C versus tau_b) or `bp` (best C versus pump bandwidth).
    #[arg(long)]
    axis: Option<String>,
    /// Sweep range `a:b`, in time units for taub and frequency units for bp.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Number of evenly spaced points, endpoints included.
    #[arg(long)]
    points: Option<String>,
    /// Cross-check every point against a second engine; exit 1 on disagreement above 1e-6.
    #[arg(long)]
    validate: bool,
    /// Optimizer tolerance on tau_b for the bp axis (default 1e-7 |tau_a|).
    #[arg(long)]
    tol: Option<String>,
    /// CSV destination (default stdout).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// One JSON record per check instead of a table.
    #[arg(long)]
    json: bool,
    /// Added to the Gaussian closed-form oracle; exercises the harness.
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    inject_analytic_error: f64,
}

/// A failure with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidParameter(_) | Error::AnalyticRequiresGaussian => {
                Failure::Usage(e.to_string())
            }
            Error::SweepPoint { ref source, .. }
                if matches!(**source, Error::Parse(_) | Error::InvalidParameter(_)) =>
            {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("I/O error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{THREADS_ENV}='{value}' is not a thread count")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Numeric(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    configure_threads()?;
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let units = if cli.normalized || config.flag("normalized")? {
        UnitSystem::Normalized
    } else {
        UnitSystem::Physical
    };
    let ctx = Context { config, units };
    match cli.command {
        Command::Concurrence(a) => cmd_concurrence(&ctx, a),
        Command::Optimize(a) => cmd_optimize(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Validate(a) => cmd_validate(a),
    }
}

struct Context {
    config: Config,
    units: UnitSystem,
}

impl Context {
    fn value(&self, flag: &Option<String>, key: &str) -> CliResult<Option<String>> {
        match flag {
            Some(v) => Ok(Some(v.clone())),
            None => self.config.get(key),
        }
    }

    fn require(&self, flag: &Option<String>, key: &str) -> CliResult<String> {
        self.value(flag, key)?
            .ok_or_else(|| Failure::Usage(format!("missing --{key}")))
    }

    fn time(&self, flag: &Option<String>, key: &str) -> CliResult<f64> {
        Ok(self.units.time(&self.require(flag, key)?)?)
    }

    fn path(&self, flag: &Option<PathBuf>, key: &str) -> CliResult<Option<PathBuf>> {
        match flag {
            Some(p) => Ok(Some(p.clone())),
            None => Ok(self.config.get(key)?.map(PathBuf::from)),
        }
    }

    fn source(&self, args: &SourceArgs) -> CliResult<PhotonPairSource> {
        let pump = parse_pump(&self.require(&args.pump, "pump")?, &self.units)?;
        let filter_a = parse_profile(&self.require(&args.filter_a, "filter-a")?, &self.units)?;
        let filter_b = parse_profile(&self.require(&args.filter_b, "filter-b")?, &self.units)?;
        Ok(PhotonPairSource::new(pump, filter_a, filter_b))
    }

    fn method(&self, args: &SourceArgs, source: &PhotonPairSource) -> CliResult<Method> {
        let text = self.value(&args.method, "method")?.unwrap_or_else(|| "auto".into());
        let method = match text.as_str() {
            "auto" if source.pump.cw => Method::CwLimit,
            "auto" | "freq" => Method::FreqQuadrature,
            "analytic" => Method::GaussianAnalytic,
            "time" => Method::TimeDomain,
            "cw" => Method::CwLimit,
            other => {
                return Err(Failure::Usage(format!(
                    "unknown method '{other}' (auto, analytic, freq, time, cw)"
                )))
            }
        };
        if method == Method::GaussianAnalytic && !source.is_gaussian() {
            return Err(Error::AnalyticRequiresGaussian.into());
        }
        if method == Method::CwLimit && !source.pump.cw {
            return Err(Failure::Usage("method 'cw' requires --pump cw".into()));
        }
        Ok(method)
    }

    fn tolerance(&self, flag: &Option<String>, tau_a: f64, source: &PhotonPairSource) -> CliResult<f64> {
        match self.value(flag, "tol")? {
            Some(t) => Ok(self.units.time(&t)?),
            None => {
                let scale = if tau_a != 0.0 {
                    tau_a.abs()
                } else {
                    1.0 / source.filter_a.rms_bandwidth()
                };
                Ok(1e-7 * scale)
            }
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Numeric(format!("cannot create {}: {e}", path.display())))
}

fn emit_json(value: &serde_json::Value, output: Option<PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    println!("{text}");
    if let Some(path) = output {
        let mut w = create(&path)?;
        writeln!(w, "{text}")?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_concurrence(ctx: &Context, a: ConcurrenceArgs) -> CliResult<ExitCode> {
    let source = ctx.source(&a.source)?;
    let method = ctx.method(&a.source, &source)?;
    let tau_a = ctx.time(&a.source.tau_a, "tau-a")?;
    let tau_b = ctx.time(&a.tau_b, "tau-b")?;
    let scenario = PmdScenario::new(tau_a, tau_b)?;
    let engine = Engine::build(&source, method, scenario.max_abs())?;
    let result = engine.evaluate(&scenario)?;

    let dump_jsa = ctx.path(&a.dump_jsa, "dump-jsa")?;
    let dump_temporal = ctx.path(&a.dump_temporal, "dump-temporal")?;
    if dump_jsa.is_some() || dump_temporal.is_some() {
        if source.pump.cw {
            return Err(Failure::Usage(
                "a CW pump has no finite joint spectral amplitude to dump".into(),
            ));
        }
        let built;
        let jsa: &BiphotonAmplitude = match engine.jsa() {
            Some(j) => j,
            None => {
                built = build_jsa(&source, GridChoice::Auto { tau_max: scenario.max_abs() })?;
                &built
            }
        };
        if let Some(path) = dump_jsa {
            let mut w = create(&path)?;
            write_jsi_csv(jsa, &mut w)?;
            w.flush()?;
        }
        if let Some(path) = dump_temporal {
            let g = temporal_amplitude(jsa)?;
            let mut w = create(&path)?;
            write_temporal_csv(&g, &mut w)?;
            w.flush()?;
        }
    }
    if let Some(path) = ctx.path(&a.dump_rho, "dump-rho")? {
        let rho = density_matrix_from_overlap(result.kappa)?;
        let mut w = create(&path)?;
        write_rho_csv(&rho, &mut w)?;
        w.flush()?;
    }

    emit_json(
        &json!({
            "C": result.concurrence,
            "kappa_re": result.kappa.re,
            "kappa_im": result.kappa.im,
            "method": result.method.to_string(),
            "est_error": result.est_error,
        }),
        ctx.path(&a.output, "output")?,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(ctx: &Context, a: OptimizeArgs) -> CliResult<ExitCode> {
    let source = ctx.source(&a.source)?;
    let method = ctx.method(&a.source, &source)?;
    let tau_a = ctx.time(&a.source.tau_a, "tau-a")?;
    let b_p = source.pump.bandwidth();
    let b_a = source.filter_a.rms_bandwidth();
    let b_b = source.filter_b.rms_bandwidth();

    let mut report = serde_json::Map::new();
    if method == Method::GaussianAnalytic {
        let (tau_b_opt, c_opt) = optimal_dgd_gaussian(b_p, b_a, tau_a);
        report.insert("tau_b_opt".into(), json!(tau_b_opt));
        report.insert("C_opt".into(), json!(c_opt));
        report.insert("method".into(), json!(method.to_string()));
    } else {
        let tol = ctx.tolerance(&a.tol, tau_a, &source)?;
        let engine = Engine::build(&source, method, 2.0 * tau_a.abs())?;
        let res = optimize_compensator(&engine, tau_a, None, tol)?;
        if !res.converged {
            return Err(Failure::Numeric(format!(
                "optimizer did not converge after {} iterations (best tau_b {})",
                res.iterations, res.tau_b_opt
            )));
        }
        report.insert("tau_b_opt".into(), json!(res.tau_b_opt));
        report.insert("C_opt".into(), json!(res.c_opt));
        report.insert("method".into(), json!(engine.method().to_string()));
        report.insert("iterations".into(), json!(res.iterations));
    }
    if source.is_gaussian() {
        report.insert("tau0".into(), json!(sensitivity_tolerance(b_p, b_a, b_b)));
        if a.pump_limited_tau0 || ctx.config.flag("pump-limited-tau0")? {
            let pump_limited = pump_limited_sensitivity_tolerance(b_p);
            report.insert(
                "tau0_pump_limited".into(),
                if pump_limited.is_finite() { json!(pump_limited) } else { json!(null) },
            );
        }
    }
    emit_json(&serde_json::Value::Object(report), ctx.path(&a.output, "output")?)?;
    Ok(ExitCode::SUCCESS)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect()
}

fn parse_range(text: &str, parse: impl Fn(&str) -> biphoton_pmd::Result<f64>) -> CliResult<(f64, f64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("range '{text}': expected a:b")))?;
    Ok((parse(lo)?, parse(hi)?))
}

fn pump_shape(source: &PhotonPairSource) -> CliResult<PumpShape> {
    if source.pump.cw {
        return Ok(PumpShape::Gaussian);
    }
    match source.pump.profile.shape() {
        Shape::Gaussian => Ok(PumpShape::Gaussian),
        Shape::SuperGaussian { order } => Ok(PumpShape::SuperGaussian { order: *order }),
        Shape::Tabulated(_) => Err(Failure::Usage(
            "a bandwidth sweep needs a parametric pump shape".into(),
        )),
    }
}

fn cmd_sweep(ctx: &Context, a: SweepArgs) -> CliResult<ExitCode> {
    let axis = ctx.require(&a.axis, "axis")?;
    let points_text = ctx.require(&a.points, "points")?;
    let points: usize = points_text
        .parse()
        .map_err(|_| Failure::Usage(format!("--points '{points_text}' is not a count")))?;
    if points == 0 {
        return Err(Failure::Usage("--points must be at least 1".into()));
    }
    let range = ctx.require(&a.range, "range")?;
    let tau_a = ctx.time(&a.source.tau_a, "tau-a")?;
    // the bp axis sets the pump itself; --pump only selects its shape
    let mut src_args = a.source.clone();
    if axis == "bp" && ctx.value(&src_args.pump, "pump")?.is_none() {
        src_args.pump = Some("cw".into());
    }
    let source = ctx.source(&src_args)?;

    let mut mismatch = 0.0f64;
    let curve: SweepCurve = match axis.as_str() {
        "taub" => {
            let method = ctx.method(&a.source, &source)?;
            let (lo, hi) = parse_range(&range, |s| ctx.units.time(s))?;
            let grid = linspace(lo, hi, points);
            let tau_max = grid.iter().fold(tau_a.abs(), |m, t| m.max(t.abs()));
            let engine = Engine::build(&source, method, tau_max)?;
            let curve = sweep_taub(&engine, tau_a, &grid)?;
            if a.validate {
                mismatch = cross_check_taub(&source, &engine, tau_a, &grid)?;
            }
            curve
        }
        "bp" => {
            let shape = pump_shape(&source)?;
            let (lo, hi) = parse_range(&range, |s| ctx.units.frequency(s))?;
            let grid = linspace(lo, hi, points);
            let tol = ctx.tolerance(&a.tol, tau_a, &source)?;
            let mut curve = sweep_pump_bandwidth(&source.filter_a, &source.filter_b, shape, tau_a, &grid, tol)?;
            if a.validate {
                mismatch = cross_check_bp(&source, shape, tau_a, &grid, &curve, tol)?;
            }
            let x_units = match ctx.units {
                UnitSystem::Physical => "rad/s",
                UnitSystem::Normalized => "1/tau_a",
            };
            curve.metadata.push(("x_units".into(), x_units.into()));
            curve
        }
        other => return Err(Failure::Usage(format!("unknown axis '{other}' (taub, bp)"))),
    };

    match ctx.path(&a.output, "output")? {
        Some(path) => {
            let mut w = create(&path)?;
            write_sweep_csv(&curve, &mut w)?;
            w.flush()?;
        }
        None => write_sweep_csv(&curve, std::io::stdout().lock())?,
    }
    if a.validate {
        eprintln!("cross-check: max engine disagreement {mismatch:.3e}");
        if mismatch > CROSS_CHECK_TOL {
            return Err(Failure::Numeric(format!(
                "engine disagreement {mismatch:.3e} exceeds {CROSS_CHECK_TOL:e}"
            )));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Gaussian spectra with energy-conserving filter detuning.
fn closed_form_applies(source: &PhotonPairSource) -> bool {
    source.is_gaussian() && source.filter_a.center() + source.filter_b.center() == 0.0
}

/// Largest disagreement between the sweep engine and an independent one at each point.
fn cross_check_taub(
    source: &PhotonPairSource,
    engine: &Engine,
    tau_a: f64,
    grid: &[f64],
) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for &tau_b in grid {
        let s = PmdScenario::new(tau_a, tau_b)?;
        let primary = engine.evaluate(&s)?.concurrence;
        let mut others = Vec::new();
        if let Some(jsa) = engine.jsa() {
            others.push(concurrence_time_domain(jsa, &s)?.concurrence);
            others.push(concurrence_numeric(jsa, &s)?.concurrence);
        }
        if closed_form_applies(source) {
            others.push(concurrence_gaussian(
                source.pump.bandwidth(),
                source.filter_a.rms_bandwidth(),
                source.filter_b.rms_bandwidth(),
                tau_a,
                tau_b,
            ));
        }
        for c in others {
            worst = worst.max((c - primary).abs());
        }
    }
    Ok(worst)
}

fn cross_check_bp(
    source: &PhotonPairSource,
    shape: PumpShape,
    tau_a: f64,
    grid: &[f64],
    curve: &SweepCurve,
    tol: f64,
) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for (&b_p, &(_, c_curve)) in grid.iter().zip(&curve.points) {
        let src = PhotonPairSource::new(shape.pump(b_p)?, source.filter_a.clone(), source.filter_b.clone());
        if closed_form_applies(&src) {
            let (_, c_ref) = optimal_dgd_gaussian(b_p, src.filter_a.rms_bandwidth(), tau_a);
            worst = worst.max((c_ref - c_curve).abs());
        }
        if !src.pump.cw {
            let engine = Engine::build(&src, Method::TimeDomain, 2.0 * tau_a.abs())?;
            let c_time = optimize_compensator(&engine, tau_a, None, tol)?.c_opt;
            worst = worst.max((c_time - c_curve).abs());
        }
    }
    Ok(worst)
}

fn cmd_validate(a: ValidateArgs) -> CliResult<ExitCode> {
    let opts = ValidationOptions {
        analytic_perturbation: a.inject_analytic_error,
    };
    let outcomes = run_all(&opts);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&outcomes).expect("serializable"));
    } else {
        for o in &outcomes {
            println!("{}", o.line());
            for n in &o.notes {
                println!("       note: {n}");
            }
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{failed} of {} checks failed", outcomes.len());
        Ok(ExitCode::from(1))
    }
}
