//! The `bb1spin` command line.
//!
//! Every subcommand writes CSV (header row with units) or, with `--json`, one
//! object `{"meta": {...}, "data": [...]}`. Output goes to stdout unless
//! `--out` names a file. `--config FILE` reads `key=value` lines that use the
//! flag names; flags given on the command line take precedence.
//!
//! Exit codes: 0 success, 2 usage, domain or parse error, 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    bb1_fidelity, bb1_infidelity, estimate_rotation_error, eseem_ratio, magic_refocus_angle,
    prediction_max_deviation, scan_order, verify_phase_coefficients, EseemMode, EseemRatioSpec, ScanTarget,
    PHASE_OFFSET_WARNING,
};
use crate::angle::parse_angle;
use crate::error::{Error, Result};
use crate::error_model::{Distribution, EnsembleSpec, ErrorModel};
use crate::sequence::{format_program, parse_program};
use crate::simulator::{echo_train, rabi_trace, EchoConfig, EchoMode, Sample, Signal};
use crate::su2::{fidelity, infidelity, rotation, RotationSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bb1spin", version, about = "Hard-pulse spin dynamics with BB1 correction")]
#[command(args_override_self = true)]
struct Cli {
    /// Emit JSON instead of CSV or text.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Read default flag values from a key=value file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a pulse program and print its canonical form.
    Parse(ParseArgs),
    /// Fidelity of one simple or BB1-corrected rotation.
    Fidelity(FidelityArgs),
    /// Infidelity against amplitude error with a log-log order fit.
    Scan(ScanArgs),
    /// Compare the phase-sensitivity coefficients against direct propagation.
    #[command(name = "verify-eq5")]
    VerifyExpansion(VerifyArgs),
    /// Nutation trace, simple or BB1-corrected.
    Rabi(RabiArgs),
    /// CP or CPMG echo train.
    Echo(EchoArgs),
    /// Fit the refocusing error from CP and CPMG JSON outputs.
    EstimateError(EstimateArgs),
    /// Ratio of the two ESEEM components.
    EseemRatio(EseemArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Parse(_) => "parse",
            Command::Fidelity(_) => "fidelity",
            Command::Scan(_) => "scan",
            Command::VerifyExpansion(_) => "verify-eq5",
            Command::Rabi(_) => "rabi",
            Command::Echo(_) => "echo",
            Command::EstimateError(_) => "estimate-error",
            Command::EseemRatio(_) => "eseem-ratio",
        }
    }
}

fn angle_arg(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn mode_arg(s: &str) -> std::result::Result<EchoMode, String> {
    s.parse::<EchoMode>().map_err(|e| e.to_string())
}

fn target_arg(s: &str) -> std::result::Result<ScanTarget, String> {
    match s.to_ascii_lowercase().as_str() {
        "bb1" => Ok(ScanTarget::Bb1),
        "simple" => Ok(ScanTarget::Simple),
        _ => Err(format!("unknown target `{s}` (expected bb1 or simple)")),
    }
}

fn eseem_mode_arg(s: &str) -> std::result::Result<EseemMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "pi" => Ok(EseemMode::PiRefocus),
        "magic" => Ok(EseemMode::MagicRefocus),
        _ => Err(format!("unknown refocusing mode `{s}` (expected pi or magic)")),
    }
}

#[derive(Debug, Args, Serialize)]
struct ParseArgs {
    /// Pulse-program file.
    file: PathBuf,
    /// Print the parsed structure as JSON.
    #[arg(long)]
    ast: bool,
}

#[derive(Debug, Args, Serialize)]
struct FidelityArgs {
    /// Target angle, e.g. `1pi`, `90deg`.
    #[arg(long, value_parser = angle_arg, default_value = "1pi")]
    theta: f64,
    /// Fractional amplitude error.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    epsilon: f64,
    /// Use the BB1-corrected block.
    #[arg(long)]
    bb1: bool,
    /// Offset of the first correction phase.
    #[arg(long, value_parser = angle_arg, default_value = "0", allow_negative_numbers = true)]
    dphi1: f64,
    /// Offset of the second correction phase.
    #[arg(long, value_parser = angle_arg, default_value = "0", allow_negative_numbers = true)]
    dphi2: f64,
}

#[derive(Debug, Args, Serialize)]
struct ScanArgs {
    #[arg(long, value_parser = angle_arg, default_value = "1pi")]
    theta: f64,
    /// Smallest error scanned.
    #[arg(long, default_value_t = 1e-2)]
    lo: f64,
    /// Largest error scanned.
    #[arg(long, default_value_t = 1e-1)]
    hi: f64,
    /// Number of log-spaced points.
    #[arg(long, default_value_t = 11)]
    points: usize,
    /// `bb1` or `simple`.
    #[arg(long, value_parser = target_arg, default_value = "bb1")]
    target: ScanTarget,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// Largest offset on the prediction grid.
    #[arg(long, value_parser = angle_arg, default_value = "0.01pi")]
    max_offset: f64,
    /// Largest error on the prediction grid.
    #[arg(long, default_value_t = 0.1)]
    max_epsilon: f64,
    /// Grid intervals per axis.
    #[arg(long, default_value_t = 10)]
    grid_steps: usize,
}

#[derive(Debug, Args, Serialize)]
struct RabiArgs {
    /// Standard deviation of the fractional amplitude error.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Largest nominal angle.
    #[arg(long, value_parser = angle_arg, default_value = "40pi")]
    max: f64,
    /// Angle increment.
    #[arg(long, value_parser = angle_arg, default_value = "0.25pi")]
    step: f64,
    #[arg(long)]
    bb1: bool,
    /// Gauss-Hermite nodes over the error distribution.
    #[arg(long, default_value_t = 41)]
    nodes: usize,
}

#[derive(Debug, Args, Serialize)]
struct EchoArgs {
    /// `cp` or `cpmg`.
    #[arg(long, value_parser = mode_arg, default_value = "cpmg")]
    mode: EchoMode,
    /// Number of refocusing pulses.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Fractional error of the refocusing pulses.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    epsilon: f64,
    /// BB1-correct each refocusing pulse.
    #[arg(long)]
    bb1: bool,
    /// Half the echo spacing in seconds.
    #[arg(long, default_value_t = 1e-6)]
    tau: f64,
    /// Shared decay constant in seconds.
    #[arg(long)]
    t2: Option<f64>,
    /// Gauss-Legendre nodes over detuning; defaults to max(512, 16 n).
    #[arg(long)]
    detuning_nodes: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    /// JSON output of `echo --mode cp --json`.
    #[arg(long)]
    cp: PathBuf,
    /// JSON output of `echo --mode cpmg --json`.
    #[arg(long)]
    cpmg: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct EseemArgs {
    /// `pi` or `magic`.
    #[arg(long, value_parser = eseem_mode_arg, default_value = "pi")]
    mode: EseemMode,
    /// Absolute error of the refocusing pulse.
    #[arg(long, value_parser = angle_arg, allow_negative_numbers = true)]
    theta_eps: f64,
    /// Base modulation frequency in Hz.
    #[arg(long, default_value_t = 26e3)]
    delta_hz: f64,
}

/// Rendered result of one subcommand.
struct Output {
    text: String,
    notes: Vec<String>,
}

impl Output {
    fn new(text: String) -> Self {
        Self { text, notes: Vec::new() }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

struct Ctx {
    json: bool,
    command: &'static str,
    config: Value,
}

impl Ctx {
    fn document(&self, extra: Value, data: Vec<Value>) -> String {
        let mut meta = json!({
            "tool": "bb1spin",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
            m.extend(e);
        }
        let mut s = serde_json::to_string_pretty(&json!({ "meta": meta, "data": data })).expect("serializable");
        s.push('\n');
        s
    }
}

/// Runs the CLI on the process arguments.
pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_from(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI on explicit arguments and streams.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(ConfigError::Io(path, e)) => {
            let _ = writeln!(stderr, "error: cannot read config {}: {e}", path.display());
            return EXIT_IO;
        }
        Err(ConfigError::Syntax(msg)) => {
            let _ = writeln!(stderr, "error: config: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if !cli.quiet {
                for n in &out.notes {
                    let _ = writeln!(stderr, "{n}");
                }
            }
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &out.text) {
                        let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                        return EXIT_IO;
                    }
                    if !cli.quiet {
                        let _ = writeln!(stderr, "wrote {}", path.display());
                    }
                }
                None => {
                    if stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                        return EXIT_IO;
                    }
                }
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

enum ConfigError {
    Io(PathBuf, io::Error),
    Syntax(String),
}

/// Removes `--config FILE` from `args` and inserts the file's settings as
/// flags directly after the subcommand name, ahead of any explicit flags.
fn splice_config(mut args: Vec<OsString>) -> std::result::Result<Vec<OsString>, ConfigError> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" && i + 1 < args.len() {
            path = Some(PathBuf::from(args.remove(i + 1)));
            args.remove(i);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| ConfigError::Io(path.clone(), e))?;

    let root = Cli::command();
    let sub_pos = args
        .iter()
        .position(|a| root.get_subcommands().any(|s| a.to_str() == Some(s.get_name())));
    let Some(sub_pos) = sub_pos else { return Ok(args) };
    let sub = root
        .find_subcommand(args[sub_pos].to_str().unwrap_or_default())
        .expect("found above");

    let mut inserted = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ConfigError::Syntax(format!("line {}: expected key=value", n + 1)))?;
        let key = key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| ConfigError::Syntax(format!("line {}: unknown key `{key}`", n + 1)))?;
        if key == "config" {
            return Err(ConfigError::Syntax(format!("line {}: nested config", n + 1)));
        }
        if arg.get_action().takes_values() {
            inserted.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "" => inserted.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                _ => return Err(ConfigError::Syntax(format!("line {}: `{key}` takes true or false", n + 1))),
            }
        }
    }
    args.splice(sub_pos + 1..sub_pos + 1, inserted);
    Ok(args)
}

fn execute(cli: &Cli) -> Result<Output> {
    let config = match &cli.command {
        Command::Parse(a) => serde_json::to_value(a),
        Command::Fidelity(a) => serde_json::to_value(a),
        Command::Scan(a) => serde_json::to_value(a),
        Command::VerifyExpansion(a) => serde_json::to_value(a),
        Command::Rabi(a) => serde_json::to_value(a),
        Command::Echo(a) => serde_json::to_value(a),
        Command::EstimateError(a) => serde_json::to_value(a),
        Command::EseemRatio(a) => serde_json::to_value(a),
    }?;
    let ctx = Ctx {
        json: cli.json,
        command: cli.command.name(),
        config,
    };
    match &cli.command {
        Command::Parse(a) => cmd_parse(&ctx, a),
        Command::Fidelity(a) => cmd_fidelity(&ctx, a),
        Command::Scan(a) => cmd_scan(&ctx, a),
        Command::VerifyExpansion(a) => cmd_verify(&ctx, a),
        Command::Rabi(a) => cmd_rabi(&ctx, a),
        Command::Echo(a) => cmd_echo(&ctx, a),
        Command::EstimateError(a) => cmd_estimate(&ctx, a),
        Command::EseemRatio(a) => cmd_eseem(&ctx, a),
    }
}

fn cmd_parse(ctx: &Ctx, a: &ParseArgs) -> Result<Output> {
    let src = fs::read_to_string(&a.file)?;
    let mut program = parse_program(&src)?;
    program.name = a.file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let canonical = format_program(&program);
    if ctx.json {
        let data = vec![json!({ "canonical": canonical, "program": program })];
        return Ok(Output::new(ctx.document(json!({}), data)));
    }
    if a.ast {
        let mut s = serde_json::to_string_pretty(&program)?;
        s.push('\n');
        return Ok(Output::new(s));
    }
    Ok(Output::new(canonical))
}

fn cmd_fidelity(ctx: &Ctx, a: &FidelityArgs) -> Result<Output> {
    ErrorModel::amplitude(a.epsilon)?;
    let (f, inf) = if a.bb1 {
        let offsets = (a.dphi1, a.dphi2);
        (bb1_fidelity(a.theta, a.epsilon, offsets)?, bb1_infidelity(a.theta, a.epsilon, offsets)?)
    } else {
        if a.dphi1 != 0.0 || a.dphi2 != 0.0 {
            return Err(crate::error::domain("dphi1/dphi2", "only apply with --bb1"));
        }
        let ideal = rotation(RotationSpec::ideal(a.theta, 0.0)?);
        let actual = rotation(RotationSpec::new(a.theta, 0.0, a.epsilon)?);
        (fidelity(&ideal, &actual), infidelity(&ideal, &actual))
    };
    let mut out = if ctx.json {
        let data = vec![json!({ "fidelity": f, "infidelity": inf })];
        Output::new(ctx.document(json!({}), data))
    } else {
        Output::new(format!("F = {f:.11e}  1-F = {inf:.11e}\n"))
    };
    if a.dphi1.abs() > PHASE_OFFSET_WARNING || a.dphi2.abs() > PHASE_OFFSET_WARNING {
        out = out.note("warning: phase offsets exceed 0.05pi; small-offset expansion no longer applies");
    }
    Ok(out)
}

fn cmd_scan(ctx: &Ctx, a: &ScanArgs) -> Result<Output> {
    let (scan, slope) = scan_order(a.theta, (a.lo, a.hi), a.points, a.target)?;
    let text = if ctx.json {
        let data = scan.points.iter().map(|p| json!(p)).collect();
        ctx.document(json!({ "slope": slope }), data)
    } else {
        let mut s = String::from("epsilon [1],infidelity [1]\n");
        for p in &scan.points {
            let _ = writeln!(s, "{},{}", p.epsilon, p.infidelity);
        }
        s
    };
    Ok(Output::new(text).note(format!("log-log slope: {slope:.4}")))
}

fn cmd_verify(ctx: &Ctx, a: &VerifyArgs) -> Result<Output> {
    let report = verify_phase_coefficients()?;
    let grid = prediction_max_deviation(a.max_offset, a.max_epsilon, a.grid_steps)?;
    let text = if ctx.json {
        let data = report.rows.iter().map(|r| json!(r)).collect();
        ctx.document(
            json!({
                "max_relative_deviation": report.max_relative_deviation,
                "prediction_max_abs_deviation": grid,
            }),
            data,
        )
    } else {
        let mut s = String::from("coefficient,reference [1],fitted [1],relative deviation [1]\n");
        for r in &report.rows {
            let _ = writeln!(s, "{},{},{},{}", r.name, r.reference, r.fitted, r.relative_deviation);
        }
        s
    };
    Ok(Output::new(text)
        .note(format!("max relative deviation: {:.3e}", report.max_relative_deviation))
        .note(format!("prediction vs direct, max abs deviation on grid: {grid:.3e}")))
}

fn signal_csv(signal: &Signal) -> String {
    let mut s = format!(
        "{} [{}],{} [{}]\n",
        signal.x_label, signal.x_unit, signal.value_label, signal.value_unit
    );
    for p in &signal.samples {
        let _ = writeln!(s, "{},{}", p.x, p.value);
    }
    s
}

/// Signal metadata carried in JSON output so that it can be read back.
#[derive(Debug, Serialize, Deserialize)]
struct SignalMeta {
    x_label: String,
    x_unit: String,
    value_label: String,
    value_unit: String,
    provenance: crate::simulator::Provenance,
}

fn signal_output(ctx: &Ctx, signal: &Signal) -> Result<String> {
    if !ctx.json {
        return Ok(signal_csv(signal));
    }
    let meta = SignalMeta {
        x_label: signal.x_label.clone(),
        x_unit: signal.x_unit.clone(),
        value_label: signal.value_label.clone(),
        value_unit: signal.value_unit.clone(),
        provenance: signal.provenance.clone(),
    };
    let data = signal.samples.iter().map(|s| json!(s)).collect();
    Ok(ctx.document(json!({ "signal": serde_json::to_value(meta)? }), data))
}

fn read_signal(path: &Path) -> Result<Signal> {
    #[derive(Deserialize)]
    struct Meta {
        signal: SignalMeta,
    }
    #[derive(Deserialize)]
    struct Doc {
        meta: Meta,
        data: Vec<Sample>,
    }
    let text = fs::read_to_string(path)?;
    let doc: Doc = serde_json::from_str(&text)
        .map_err(|e| Error::SignalMismatch(format!("{}: not a signal document: {e}", path.display())))?;
    let m = doc.meta.signal;
    let signal = Signal {
        x_label: m.x_label,
        x_unit: m.x_unit,
        value_label: m.value_label,
        value_unit: m.value_unit,
        samples: doc.data,
        provenance: m.provenance,
    };
    if !signal.is_well_formed() {
        return Err(Error::SignalMismatch(format!("{}: samples are not well formed", path.display())));
    }
    Ok(signal)
}

fn cmd_rabi(ctx: &Ctx, a: &RabiArgs) -> Result<Output> {
    let spec = EnsembleSpec::amplitude(Distribution::Gaussian { mean: 0.0, sigma: a.sigma }, a.nodes)?;
    let signal = rabi_trace(a.max, a.step, &spec, a.bb1)?;
    Ok(Output::new(signal_output(ctx, &signal)?))
}

fn cmd_echo(ctx: &Ctx, a: &EchoArgs) -> Result<Output> {
    let mut cfg = EchoConfig::new(a.mode, a.n, a.epsilon)?
        .with_tau(a.tau)?
        .with_bb1(a.bb1)
        .with_t2(a.t2);
    if let Some(nodes) = a.detuning_nodes {
        let ens = cfg.ensemble.with_nodes(cfg.ensemble.epsilon_nodes(), nodes)?;
        cfg = cfg.with_ensemble(ens);
    }
    let signal = echo_train(&cfg)?;
    Ok(Output::new(signal_output(ctx, &signal)?))
}

fn cmd_estimate(ctx: &Ctx, a: &EstimateArgs) -> Result<Output> {
    let cp = read_signal(&a.cp)?;
    let cpmg = read_signal(&a.cpmg)?;
    let est = estimate_rotation_error(&cp, &cpmg)?;
    let text = if ctx.json {
        ctx.document(json!({}), vec![json!(est)])
    } else {
        format!("epsilon [1],residual rms [1]\n{},{}\n", est.epsilon, est.residual_rms)
    };
    Ok(Output::new(text))
}

fn cmd_eseem(ctx: &Ctx, a: &EseemArgs) -> Result<Output> {
    let spec = EseemRatioSpec {
        mode: a.mode,
        theta_eps: a.theta_eps,
        delta_hz: a.delta_hz,
    };
    let ratio = eseem_ratio(&spec)?;
    let (f1, f2) = spec.components();
    let refocus = match a.mode {
        EseemMode::PiRefocus => std::f64::consts::PI,
        EseemMode::MagicRefocus => magic_refocus_angle(),
    };
    let text = if ctx.json {
        let data = vec![json!({
            "refocus_angle": refocus,
            "theta_eps": a.theta_eps,
            "delta_hz": f1,
            "double_delta_hz": f2,
            "ratio": ratio,
        })];
        ctx.document(json!({}), data)
    } else {
        format!(
            "refocus angle [rad],theta_eps [rad],delta [Hz],2delta [Hz],ratio [1]\n{refocus},{},{f1},{f2},{ratio}\n",
            a.theta_eps
        )
    };
    Ok(Output::new(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_from(std::iter::once("bb1spin").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn fidelity_line() {
        let (code, out, _) = run_args(&["fidelity", "--theta", "1pi", "--epsilon", "0.1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "F = 9.87688340595e-1  1-F = 1.23116594049e-2\n");
    }

    #[test]
    fn domain_errors_exit_two() {
        assert_eq!(run_args(&["fidelity", "--epsilon", "1.5"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["fidelity", "--theta", "3"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["nonsense"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_exits_three() {
        assert_eq!(run_args(&["parse", "/nonexistent/p.txt"]).0, EXIT_IO);
        assert_eq!(run_args(&["--config", "/nonexistent/c", "fidelity"]).0, EXIT_IO);
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# defaults\ntheta = 1pi\nepsilon=0.1\nbb1=true\n").unwrap();
        let c = cfg.to_str().unwrap();
        let (_, from_file, _) = run_args(&["--config", c, "fidelity"]);
        let (_, direct, _) = run_args(&["fidelity", "--theta", "1pi", "--epsilon", "0.1", "--bb1"]);
        assert_eq!(from_file, direct);
        let (_, overridden, _) = run_args(&["fidelity", "--config", c, "--epsilon", "0.05"]);
        let (_, expected, _) = run_args(&["fidelity", "--epsilon", "0.05", "--bb1"]);
        assert_eq!(overridden, expected);
        fs::write(&cfg, "bogus=1\n").unwrap();
        assert_eq!(run_args(&["--config", c, "fidelity"]).0, EXIT_USAGE);
    }

    #[test]
    fn json_document_shape() {
        let (code, out, _) = run_args(&["--json", "eseem-ratio", "--mode", "magic", "--theta-eps", "0.1rad"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["meta"]["tool"], "bb1spin");
        assert_eq!(v["meta"]["command"], "eseem-ratio");
        assert!((v["data"][0]["ratio"].as_f64().unwrap() - 14.142).abs() < 1e-3);
    }

    #[test]
    fn quiet_suppresses_notes() {
        let (_, _, err) = run_args(&["scan", "--points", "5"]);
        assert!(err.contains("slope"));
        let (_, _, err) = run_args(&["--quiet", "scan", "--points", "5"]);
        assert!(err.is_empty());
    }

    #[test]
    fn echo_json_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cp.json");
        let p = p.to_str().unwrap();
        assert_eq!(run_args(&["--json", "--quiet", "--out", p, "echo", "--mode", "cp", "--n", "4", "--epsilon", "0.1"]).0, 0);
        let s = read_signal(Path::new(p)).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.provenance.program, "cp");
    }
}
