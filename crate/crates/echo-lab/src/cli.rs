//! The `echo-lab` binary: simulate | fit | roundtrip | report.
//!
//! Exit codes: 0 success, 2 input error, 3 fit non-convergence,
//! 4 round-trip below its pass threshold. Setting `ECHO_LAB_OUT_DIR`
//! redirects bare output filenames into that directory.

use crate::config::{parse_quantity, parse_slope, RunConfig};
use crate::error::{Error, Result};
use crate::fit::{
    extrapolate_zero_power, fit_3ppe_joint, fit_curve, fit_hole_decay, fit_mims, FitOptions,
    FitProblem, JointAmplitude, ModelKind, Normalization, Weighting, DELAY_META_KEY,
};
use crate::report::{derive_report, ReportInputs};
use crate::series::{FitResult, TimeSeries};
use crate::synth::{
    monte_carlo_roundtrip, synthesize, synthesize_3ppe, Experiment, ExperimentKind,
    ExperimentSchedule, NoiseModel, ScheduleKind,
};
use crate::trace::{read_trace_file, write_trace_file};
use crate::units::Dimension;
use crate::params::{DecayModelParams, DiffusionParams, StarkParams};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "ECHO_LAB_OUT_DIR";

const EXIT_OK: i32 = 0;
const EXIT_INPUT: i32 = 2;
const EXIT_NO_CONVERGENCE: i32 = 3;
const EXIT_THRESHOLD: i32 = 4;

#[derive(Parser)]
#[command(
    name = "echo-lab",
    version,
    about = "Simulate, fit and report photon-echo and spectral-hole measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace from a forward model
    Simulate(SimulateArgs),
    /// Fit a model to one or more trace CSV files
    Fit(FitArgs),
    /// Monte-Carlo round trip: synthesize, refit, report recovery
    Roundtrip(RoundtripArgs),
    /// Print derived quantities for a parameter set
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Plain-text `key = value` config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model: hole-decay | mims | 3ppe | 2ppe-sd | stark | linear
    #[arg(long)]
    model: Option<String>,
    /// Schedule: shb-decay | shb-decay-bfield | 2ppe | 3ppe | stark-sweep | power-sweep
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Relative noise sigma (e.g. 0.02)
    #[arg(long)]
    noise: Option<String>,
    /// Additive noise floor
    #[arg(long)]
    floor: Option<String>,
    /// Output trace path (3PPE writes one file per delay)
    #[arg(long)]
    out: Option<String>,
    /// Waiting-time increment for the 3PPE schedule (e.g. 10us)
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    t1e: Option<String>,
    #[arg(long)]
    t1b: Option<String>,
    #[arg(long)]
    i0: Option<String>,
    #[arg(long)]
    t2: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    gamma0: Option<String>,
    #[arg(long = "gamma-sd")]
    gamma_sd: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    delay: Option<String>,
    /// Stark slope (24.6kHzcm/V) or linear-model slope (Hz per unit abscissa)
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    intercept: Option<String>,
    /// Electric field for a single-point Stark evaluation (e.g. 100V/mm)
    #[arg(long, allow_hyphen_values = true)]
    field: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model: hole-decay | mims | 3ppe | 2ppe-sd | stark | linear
    #[arg(long)]
    model: Option<String>,
    /// Input trace CSV files
    inputs: Vec<PathBuf>,
    /// Hold a parameter fixed: --fix t1b=2.4ms (repeatable)
    #[arg(long = "fix")]
    fixed: Vec<String>,
    /// Override an initial guess: --init t2=1us (repeatable)
    #[arg(long = "init")]
    init: Vec<String>,
    /// auto | uniform | sigma
    #[arg(long)]
    weighting: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    /// 3PPE input rescaling: none | common | per-set
    #[arg(long)]
    normalize: Option<String>,
    /// 3PPE amplitudes: shared | per-set | fixed:<value>
    #[arg(long = "amplitude-mode")]
    amplitude_mode: Option<String>,
    /// Prefix for the plot-data and residual CSV outputs
    #[arg(long = "out-prefix")]
    out_prefix: Option<String>,
}

#[derive(Args)]
struct RoundtripArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// hole-decay | hole-decay-bfield | mims | 3ppe | power-sweep
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    /// Base seed; runs use base..base+seeds
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    floor: Option<String>,
    /// Required pass fraction per parameter (overrides the preset)
    #[arg(long)]
    threshold: Option<String>,
    /// Override a tolerance magnitude: --tolerance gamma0=5e3 (repeatable)
    #[arg(long = "tolerance")]
    tolerance: Vec<String>,
    /// Write the recovery table as CSV
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter file (key = value)
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    t1e: Option<String>,
    #[arg(long)]
    t1b: Option<String>,
    #[arg(long)]
    gamma0: Option<String>,
    #[arg(long = "gamma-sd")]
    gamma_sd: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<String>,
    #[arg(long = "stark-field", allow_hyphen_values = true)]
    stark_field: Option<String>,
    #[arg(long = "afc-spacing")]
    afc_spacing: Option<String>,
    #[arg(long)]
    d1e: Option<String>,
    #[arg(long = "diffusion-time")]
    diffusion_time: Option<String>,
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run_from(&args)
}

/// Parse and execute; returns the process exit code.
pub fn run_from(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let command_line = args.join(" ");
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, &command_line),
        Command::Fit(a) => cmd_fit(&a, &command_line),
        Command::Roundtrip(a) => cmd_roundtrip(&a, &command_line),
        Command::Report(a) => cmd_report(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn out_path(name: &str) -> PathBuf {
    let p = PathBuf::from(name);
    if p.parent().is_none_or(|d| d.as_os_str().is_empty()) {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(p);
            }
        }
    }
    p
}

fn parse_name_value(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected name=value, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Dimension used when parsing a value for the named model parameter.
fn param_value(model: ModelKind, name: &str, text: &str) -> Result<f64> {
    match name {
        "t1e" | "t1b" | "t2" | "delay" => parse_quantity(text, Dimension::Time),
        "gamma0" | "gamma_sd" | "rate" | "intercept" => {
            parse_quantity(text, Dimension::Frequency)
        }
        "slope" if model == ModelKind::Stark => parse_slope(text),
        _ => text
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse `{text}` for `{name}`"))),
    }
}

fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------- simulate

const SIMULATE_KEYS: &[&str] = &[
    "model", "schedule", "seed", "noise", "floor", "out", "step", "amplitude", "b", "t1e", "t1b",
    "i0", "t2", "x", "gamma0", "gamma_sd", "rate", "delay", "slope", "intercept", "field",
];

fn simulate_config(a: &SimulateArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::from_file(path, SIMULATE_KEYS)?,
        None => RunConfig::default(),
    };
    for (key, value) in [
        ("model", &a.model),
        ("schedule", &a.schedule),
        ("seed", &a.seed),
        ("noise", &a.noise),
        ("floor", &a.floor),
        ("out", &a.out),
        ("step", &a.step),
        ("amplitude", &a.amplitude),
        ("b", &a.b),
        ("t1e", &a.t1e),
        ("t1b", &a.t1b),
        ("i0", &a.i0),
        ("t2", &a.t2),
        ("x", &a.x),
        ("gamma0", &a.gamma0),
        ("gamma_sd", &a.gamma_sd),
        ("rate", &a.rate),
        ("delay", &a.delay),
        ("slope", &a.slope),
        ("intercept", &a.intercept),
        ("field", &a.field),
    ] {
        cfg.set_flag(key, value.clone());
    }
    Ok(cfg)
}

fn gather_params(model: ModelKind, cfg: &RunConfig, skip: &[&str]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for &name in model.param_names() {
        if skip.contains(&name) {
            continue;
        }
        let value = match cfg.get(name) {
            Some(text) => param_value(model, name, text)?,
            // intensities are in arbitrary units; scale defaults to 1
            None if name == "i0" || name == "amplitude" => 1.0,
            None => {
                return Err(Error::Config(format!("missing required parameter `{name}`")))
            }
        };
        out.push((name.to_string(), value));
    }
    Ok(out)
}

fn provenance(command_line: &str, seed: Option<u64>) -> Vec<(String, String)> {
    let mut p = vec![
        ("command".to_string(), command_line.to_string()),
        ("version".to_string(), crate::VERSION.to_string()),
    ];
    if let Some(s) = seed {
        p.push(("seed".to_string(), s.to_string()));
    }
    p
}

fn write_sidecar(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".meta");
    std::fs::write(PathBuf::from(sidecar), text)?;
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, command_line: &str) -> Result<i32> {
    let cfg = simulate_config(a)?;
    let model_name = cfg
        .get("model")
        .ok_or_else(|| Error::Config("missing required flag --model".to_string()))?;
    let model = ModelKind::parse(model_name).map_err(|e| Error::Config(e.to_string()))?;

    // single-point Stark evaluation
    if model == ModelKind::Stark {
        if let Some(field_text) = cfg.get("field") {
            let field = parse_quantity(field_text, Dimension::ElectricField)?;
            let slope = parse_slope(
                cfg.get("slope")
                    .ok_or_else(|| Error::Config("missing required parameter `slope`".to_string()))?,
            )?;
            let s = StarkParams::new(slope)?;
            let shift = crate::models::stark_shift(field, &s)?;
            println!("stark_shift_hz = {}", fmt_full(shift));
            return Ok(EXIT_OK);
        }
    }

    let schedule_name = cfg
        .get("schedule")
        .ok_or_else(|| Error::Config("missing required flag --schedule".to_string()))?;
    let kind = ScheduleKind::parse(schedule_name)?;
    let schedule = if kind == ScheduleKind::ThreePulseEcho {
        match cfg.get("step") {
            Some(s) => ExperimentSchedule::three_pulse_with_step(parse_quantity(s, Dimension::Time)?),
            None => ExperimentSchedule::canonical(kind),
        }
    } else {
        ExperimentSchedule::canonical(kind)
    };
    let seed = cfg.get_u64("seed")?.unwrap_or(0);
    let noise = NoiseModel::new(
        cfg.get_f64("noise")?.unwrap_or(0.0),
        cfg.get_f64("floor")?.unwrap_or(0.0),
        seed,
    )?;

    let default_out = format!("{}_{}.csv", model.name(), kind.name());
    let out = out_path(cfg.get("out").unwrap_or(&default_out));

    let joint_3ppe =
        model == ModelKind::ThreePulseEcho && kind == ScheduleKind::ThreePulseEcho && !cfg.contains("delay");
    if joint_3ppe {
        let params = gather_params(model, &cfg, &["delay"])?;
        let sets = synthesize_3ppe(&params, &schedule, &noise)?;
        for series in &sets {
            let delay = series.meta_f64(DELAY_META_KEY).unwrap();
            let path = insert_suffix(&out, &format!("_td{}ns", (delay * 1e9).round() as i64));
            let prov = provenance(command_line, Some(seed));
            write_trace_file(&path, series, &prov)?;
            write_sidecar(&path, &sidecar_entries(command_line, model, kind, seed, &noise, &params))?;
            println!("wrote {}", path.display());
        }
        return Ok(EXIT_OK);
    }

    let params = gather_params(model, &cfg, &[])?;
    let series = synthesize(model, &params, &schedule, &noise)?;
    let prov = provenance(command_line, Some(seed));
    write_trace_file(&out, &series, &prov)?;
    write_sidecar(&out, &sidecar_entries(command_line, model, kind, seed, &noise, &params))?;
    println!("wrote {} ({} rows)", out.display(), series.len());
    Ok(EXIT_OK)
}

fn sidecar_entries(
    command_line: &str,
    model: ModelKind,
    kind: ScheduleKind,
    seed: u64,
    noise: &NoiseModel,
    params: &[(String, f64)],
) -> Vec<(String, String)> {
    let mut entries = vec![
        ("command".to_string(), command_line.to_string()),
        ("version".to_string(), crate::VERSION.to_string()),
        ("model".to_string(), model.name().to_string()),
        ("schedule".to_string(), kind.name().to_string()),
        ("seed".to_string(), seed.to_string()),
        ("noise".to_string(), format!("{:e}", noise.relative_sigma)),
        ("floor".to_string(), format!("{:e}", noise.additive_floor)),
    ];
    for (name, value) in params {
        entries.push((name.clone(), fmt_full(*value)));
    }
    entries
}

fn insert_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

// ---------------------------------------------------------------- fit

const FIT_KEYS: &[&str] = &[
    "model",
    "weighting",
    "max_iter",
    "normalize",
    "amplitude_mode",
    "out_prefix",
];

fn cmd_fit(a: &FitArgs, command_line: &str) -> Result<i32> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::from_file(path, FIT_KEYS)?,
        None => RunConfig::default(),
    };
    cfg.set_flag("model", a.model.clone());
    cfg.set_flag("weighting", a.weighting.clone());
    cfg.set_flag("max_iter", a.max_iter.clone());
    cfg.set_flag("normalize", a.normalize.clone());
    cfg.set_flag("amplitude_mode", a.amplitude_mode.clone());
    cfg.set_flag("out_prefix", a.out_prefix.clone());

    let model_name = cfg
        .get("model")
        .ok_or_else(|| Error::Config("missing required flag --model".to_string()))?;
    let model = ModelKind::parse(model_name).map_err(|e| Error::Config(e.to_string()))?;
    if a.inputs.is_empty() {
        return Err(Error::Config("no input files".to_string()));
    }
    let mut sets = Vec::new();
    for path in &a.inputs {
        sets.push(read_trace_file(path)?);
    }

    let weighting = match cfg.get("weighting").unwrap_or("auto") {
        "auto" => Weighting::Auto,
        "uniform" => Weighting::Uniform,
        "sigma" => Weighting::PerPointSigma,
        other => return Err(Error::Config(format!("unknown weighting `{other}`"))),
    };
    let mut opts = FitOptions {
        weighting,
        ..FitOptions::default()
    };
    if let Some(n) = cfg.get_u64("max_iter")? {
        opts.max_iterations = n as usize;
    }
    for entry in &a.fixed {
        let (name, value) = parse_name_value(entry)?;
        opts.fixed.push((name.clone(), param_value(model, &name, &value)?));
    }
    for entry in &a.init {
        let (name, value) = parse_name_value(entry)?;
        opts.init.push((name.clone(), param_value(model, &name, &value)?));
    }

    let result = match model {
        ModelKind::HoleDecay => {
            require_single(&sets)?;
            fit_hole_decay(&sets[0], &opts)?
        }
        ModelKind::Mims => {
            require_single(&sets)?;
            fit_mims(&sets[0], &opts)?
        }
        ModelKind::Linear => {
            require_single(&sets)?;
            extrapolate_zero_power(&sets[0])?
        }
        ModelKind::ThreePulseEcho => {
            let t1b = opts
                .fixed
                .iter()
                .find(|(n, _)| n == "t1b")
                .map(|&(_, v)| v)
                .ok_or_else(|| {
                    Error::Config("3ppe joint fit needs --fix t1b=<lifetime>".to_string())
                })?;
            let fit_opts = FitOptions {
                fixed: opts.fixed.iter().filter(|(n, _)| n != "t1b").cloned().collect(),
                ..opts.clone()
            };
            let amplitude = match cfg.get("amplitude_mode").unwrap_or("shared") {
                "shared" => JointAmplitude::Shared,
                "per-set" => JointAmplitude::PerSet,
                other => match other.strip_prefix("fixed:") {
                    Some(v) => JointAmplitude::Fixed(v.parse().map_err(|_| {
                        Error::Config(format!("cannot parse amplitude mode `{other}`"))
                    })?),
                    None => {
                        return Err(Error::Config(format!("unknown amplitude mode `{other}`")))
                    }
                },
            };
            let normalization = match cfg.get("normalize").unwrap_or("none") {
                "none" => Normalization::None,
                "common" => Normalization::CommonScale,
                "per-set" => Normalization::PerSet,
                other => return Err(Error::Config(format!("unknown normalization `{other}`"))),
            };
            fit_3ppe_joint(&sets, t1b, amplitude, normalization, &fit_opts)?
        }
        ModelKind::TwoPulseDiffusion | ModelKind::Stark => {
            require_single(&sets)?;
            generic_fit(model, &sets[0], &opts)?
        }
    };

    print_fit_report(model, &result);

    let default_prefix = a.inputs[0]
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("fit")
        .to_string();
    let prefix = cfg.get("out_prefix").unwrap_or(&default_prefix).to_string();
    write_fit_outputs(&prefix, model, &result, &sets, command_line)?;

    if result.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("fit did not converge; last iterate written");
        Ok(EXIT_NO_CONVERGENCE)
    }
}

fn require_single(sets: &[TimeSeries]) -> Result<()> {
    if sets.len() != 1 {
        return Err(Error::Config(
            "this model fits a single input file".to_string(),
        ));
    }
    Ok(())
}

/// Generic single-series fit for models without a dedicated procedure.
fn generic_fit(model: ModelKind, data: &TimeSeries, opts: &FitOptions) -> Result<FitResult> {
    let mut problem = FitProblem::new(model, data.clone());
    problem.weighting = opts.weighting;
    problem.max_iterations = opts.max_iterations;
    let y0 = data.values()[0];
    for &name in model.param_names() {
        if let Some(&(_, v)) = opts.fixed.iter().find(|(n, _)| n == name) {
            problem = problem.fixed(name, v);
            continue;
        }
        let default = match name {
            "i0" => y0.max(1e-300),
            "slope" => {
                // line through first and last point
                let (t, y) = (data.times(), data.values());
                let dt = t[t.len() - 1] - t[0];
                if dt > 0.0 {
                    (y[y.len() - 1] - y[0]) / dt
                } else {
                    1.0
                }
            }
            "gamma0" => {
                let (t, y) = (data.times(), data.values());
                let mid = t.len() / 2;
                let ratio = (y[mid] / y[0].max(1e-300)).max(1e-9);
                (-(ratio.ln()) / (2.0 * std::f64::consts::TAU * (t[mid] - t[0]))).max(1e3)
            }
            "gamma_sd" => 1e5,
            "rate" => 1e5,
            _ => 1.0,
        };
        let init = opts
            .init
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
            .unwrap_or(default);
        problem = problem.free(name, init);
    }
    fit_curve(&problem)
}

fn print_fit_report(model: ModelKind, result: &FitResult) {
    println!("model: {}", model.name());
    println!(
        "converged: {}   iterations: {}   residual norm: {:.6e}",
        result.converged, result.iterations, result.residual_norm
    );
    println!("{:<12} {:>16} {:>16}", "parameter", "estimate", "1-sigma");
    for (i, name) in result.names().iter().enumerate() {
        println!(
            "{:<12} {:>16.8e} {:>16.8e}",
            name,
            result.estimates()[i],
            result.uncertainties()[i]
        );
    }
    for (name, value) in result.fixed_params() {
        println!("{:<12} {:>16.8e}          (fixed)", name, value);
    }
    for (name, value) in result.derived() {
        println!("{:<12} {:>16.8e}          (derived)", name, value);
    }
    for note in result.notes() {
        println!("note: {note}");
    }
    // machine-readable block
    println!("fit.model = {}", model.name());
    println!("fit.converged = {}", result.converged);
    println!("fit.iterations = {}", result.iterations);
    println!("fit.residual_norm = {}", fmt_full(result.residual_norm));
    for (i, name) in result.names().iter().enumerate() {
        println!("fit.estimate.{name} = {}", fmt_full(result.estimates()[i]));
        println!("fit.sigma.{name} = {}", fmt_full(result.uncertainties()[i]));
    }
    for (name, value) in result.fixed_params() {
        println!("fit.fixed.{name} = {}", fmt_full(*value));
    }
    for (name, value) in result.derived() {
        println!("fit.derived.{name} = {}", fmt_full(*value));
    }
}

fn model_curve(model: ModelKind, result: &FitResult, set_index: usize, series: &TimeSeries, t: f64) -> f64 {
    let value = |name: &str| -> f64 {
        result
            .estimate(name)
            .or_else(|| result.fixed(name))
            .unwrap_or(f64::NAN)
    };
    match model {
        ModelKind::ThreePulseEcho => {
            let amp = result
                .estimate("i0")
                .or_else(|| result.estimate(&format!("i0_{set_index}")))
                .or_else(|| result.fixed("i0"))
                .unwrap_or(f64::NAN);
            let delay = series.meta_f64(DELAY_META_KEY).unwrap_or(f64::NAN);
            model.eval(
                &[
                    amp,
                    value("gamma0"),
                    value("gamma_sd"),
                    value("rate"),
                    value("b"),
                    value("t1e"),
                    value("t1b"),
                    delay,
                ],
                t,
            )
        }
        ModelKind::Linear => value("intercept") + value("slope") * t,
        _ => {
            let p: Vec<f64> = model.param_names().iter().map(|n| value(n)).collect();
            model.eval(&p, t)
        }
    }
}

fn write_fit_outputs(
    prefix: &str,
    model: ModelKind,
    result: &FitResult,
    sets: &[TimeSeries],
    command_line: &str,
) -> Result<()> {
    for (k, series) in sets.iter().enumerate() {
        let tag = if sets.len() > 1 {
            format!("_set{k}")
        } else {
            String::new()
        };
        let plot_path = out_path(&format!("{prefix}{tag}_fit.csv"));
        let resid_path = out_path(&format!("{prefix}{tag}_residuals.csv"));
        let mut plot = String::new();
        let mut resid = String::new();
        for text in [&mut plot, &mut resid] {
            text.push_str(&format!(
                "# echo-lab fit output\n# command = {command_line}\n# version = {}\n# model = {}\n",
                crate::VERSION,
                model.name()
            ));
        }
        plot.push_str("t_seconds,data,fit,residual\n");
        resid.push_str("t_seconds,residual\n");
        for p in series.points() {
            let fit = model_curve(model, result, k, series, p.t);
            let r = p.y - fit;
            plot.push_str(&format!(
                "{},{},{},{}\n",
                fmt_full(p.t),
                fmt_full(p.y),
                fmt_full(fit),
                fmt_full(r)
            ));
            resid.push_str(&format!("{},{}\n", fmt_full(p.t), fmt_full(r)));
        }
        std::fs::write(&plot_path, plot)?;
        std::fs::write(&resid_path, resid)?;
        println!("wrote {}", plot_path.display());
        println!("wrote {}", resid_path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------- roundtrip

const ROUNDTRIP_KEYS: &[&str] = &[
    "experiment",
    "seeds",
    "seed",
    "noise",
    "floor",
    "threshold",
    "out",
];

fn cmd_roundtrip(a: &RoundtripArgs, command_line: &str) -> Result<i32> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::from_file(path, ROUNDTRIP_KEYS)?,
        None => RunConfig::default(),
    };
    cfg.set_flag("experiment", a.experiment.clone());
    cfg.set_flag("seeds", a.seeds.clone());
    cfg.set_flag("seed", a.seed.clone());
    cfg.set_flag("noise", a.noise.clone());
    cfg.set_flag("floor", a.floor.clone());
    cfg.set_flag("threshold", a.threshold.clone());
    cfg.set_flag("out", a.out.clone());

    let kind_name = cfg
        .get("experiment")
        .ok_or_else(|| Error::Config("missing required flag --experiment".to_string()))?;
    let kind = ExperimentKind::parse(kind_name)?;
    let mut experiment = Experiment::reference(kind);
    if let Some(v) = cfg.get_f64("noise")? {
        experiment.relative_sigma = v;
    }
    if let Some(v) = cfg.get_f64("floor")? {
        experiment.additive_floor = v;
    }
    if let Some(v) = cfg.get_f64("threshold")? {
        experiment.pass_fraction = v;
    }
    for entry in &a.tolerance {
        let (name, value) = parse_name_value(entry)?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse tolerance `{entry}`")))?;
        let slot = experiment
            .tolerances
            .iter_mut()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Config(format!("no tolerance for parameter `{name}`")))?;
        slot.value = value;
    }
    let n_seeds = cfg.get_u64("seeds")?.unwrap_or(experiment.default_seeds as u64) as usize;
    let base_seed = cfg.get_u64("seed")?.unwrap_or(1);

    let report = monte_carlo_roundtrip(&experiment, n_seeds, base_seed)?;

    println!(
        "experiment: {}   seeds: {} (base {})   converged: {}   failed: {}",
        kind.name(),
        report.n_seeds,
        report.base_seed,
        report.n_converged,
        report.n_failed
    );
    println!(
        "{:<10} {:>14} {:>14} {:>14} {:>14} {:>10} {:>14}",
        "parameter", "truth", "median", "p5", "p95", "pass", "tolerance"
    );
    let mut csv = String::new();
    csv.push_str(&format!(
        "# echo-lab roundtrip report\n# command = {command_line}\n# version = {}\n# experiment = {}\n# seeds = {n_seeds}\n# base_seed = {base_seed}\n",
        crate::VERSION,
        kind.name()
    ));
    csv.push_str("parameter,truth,median,p5,p95,pass_fraction,tolerance\n");
    for p in &report.params {
        let (pass, tol) = match &p.tolerance {
            Some(t) => (format!("{:.3}", p.within_fraction), t.describe()),
            None => ("-".to_string(), "-".to_string()),
        };
        println!(
            "{:<10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>10} {:>14}",
            p.name, p.truth, p.median, p.p5, p.p95, pass, tol
        );
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.name,
            fmt_full(p.truth),
            fmt_full(p.median),
            fmt_full(p.p5),
            fmt_full(p.p95),
            pass,
            tol
        ));
    }
    let passed = report.passes();
    println!(
        "result: {} (required pass fraction {:.2})",
        if passed { "PASS" } else { "FAIL" },
        experiment.pass_fraction
    );
    if let Some(out) = cfg.get("out") {
        let path = out_path(out);
        std::fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(if passed { EXIT_OK } else { EXIT_THRESHOLD })
}

// ---------------------------------------------------------------- report

const REPORT_KEYS: &[&str] = &[
    "b",
    "t1e",
    "t1b",
    "gamma0",
    "gamma_sd",
    "rate",
    "slope",
    "stark_field",
    "afc_spacing",
    "d1e",
    "diffusion_time",
];

fn cmd_report(a: &ReportArgs) -> Result<i32> {
    let mut cfg = match (&a.params, &a.config) {
        (Some(path), _) | (None, Some(path)) => RunConfig::from_file(path, REPORT_KEYS)?,
        (None, None) => RunConfig::default(),
    };
    for (key, value) in [
        ("b", &a.b),
        ("t1e", &a.t1e),
        ("t1b", &a.t1b),
        ("gamma0", &a.gamma0),
        ("gamma_sd", &a.gamma_sd),
        ("rate", &a.rate),
        ("slope", &a.slope),
        ("stark_field", &a.stark_field),
        ("afc_spacing", &a.afc_spacing),
        ("d1e", &a.d1e),
        ("diffusion_time", &a.diffusion_time),
    ] {
        cfg.set_flag(key, value.clone());
    }

    let need = |key: &str| -> Result<&str> {
        cfg.get(key)
            .ok_or_else(|| Error::Config(format!("missing required parameter `{key}`")))
    };
    let b: f64 = need("b")?
        .parse()
        .map_err(|_| Error::Config("cannot parse `b`".to_string()))?;
    let t1e = parse_quantity(need("t1e")?, Dimension::Time)?;
    let t1b = parse_quantity(need("t1b")?, Dimension::Time)?;
    let gamma0 = parse_quantity(need("gamma0")?, Dimension::Frequency)?;
    let gamma_sd = parse_quantity(need("gamma_sd")?, Dimension::Frequency)?;
    let rate = match cfg.get("rate") {
        Some(v) => parse_quantity(v, Dimension::Frequency)?,
        None => 0.0,
    };

    let inputs = ReportInputs {
        decay: Some(DecayModelParams::new(b, t1e, t1b)?),
        diffusion: Some(DiffusionParams::new(gamma0, gamma_sd, rate)?),
        stark: match cfg.get("slope") {
            Some(s) => Some(StarkParams::new(parse_slope(s)?)?),
            None => None,
        },
        stark_field_v_per_cm: match cfg.get("stark_field") {
            Some(f) => Some(parse_quantity(f, Dimension::ElectricField)?),
            None => None,
        },
        afc_spacing_hz: match cfg.get("afc_spacing") {
            Some(f) => Some(parse_quantity(f, Dimension::Frequency)?),
            None => None,
        },
        dopant: match (cfg.get("d1e"), cfg.get("diffusion_time")) {
            (Some(d), Some(t)) => Some((
                d.parse()
                    .map_err(|_| Error::Config("cannot parse `d1e` (micrometers)".to_string()))?,
                t.parse()
                    .map_err(|_| Error::Config("cannot parse `diffusion_time` (hours)".to_string()))?,
            )),
            _ => None,
        },
    };
    let r = derive_report(&inputs)?;

    let print_row = |name: &str, value: Option<f64>| {
        if let Some(v) = value {
            println!("{name} = {}", fmt_full(v));
        }
    };
    print_row("natural_linewidth_hz", r.natural_linewidth_hz);
    print_row("branching_beta", r.branching_beta);
    print_row("saturation_linewidth_hz", r.saturation_linewidth_hz);
    print_row("hole_linewidth_prediction_hz", r.hole_linewidth_prediction_hz);
    print_row("afc_storage_time_s", r.afc_storage_time_s);
    print_row("stark_shift_hz", r.stark_shift_hz);
    print_row("diffusion_coefficient_um2_per_h", r.diffusion_coefficient_um2_per_h);
    Ok(EXIT_OK)
}
