//! `bci` command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::branch::{BranchAngle, ProblemInstance, DEFAULT_EXCLUSION_BAND, DEFAULT_TOL};
use crate::report::{
    default_methods, eval_csv_rows, evaluate, format_float, EvaluationReport, InstanceJson, MethodChoice, Num,
    RenderOptions, ReportJson, ResultJson, Verdict, EVAL_CSV_HEADER,
};
use crate::verify::{run_suite, CheckKind, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DISAGREE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bci", version, about = "Contour integrals of z^beta/(z - alpha) around the unit circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one instance with several methods and compare them.
    Eval(EvalArgs),
    /// Evaluate a grid of instances, one output row per point.
    Sweep(SweepArgs),
    /// Run the built-in identity checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyFormat {
    Json,
    Jsonl,
}

#[derive(Debug, Args)]
struct Common {
    /// Agreement tolerance between methods.
    #[arg(long, env = "BCI_DEFAULT_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Half-width of the excluded annulus around |alpha| = 1.
    #[arg(long, default_value_t = DEFAULT_EXCLUSION_BAND)]
    exclusion_band: f64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// `re,im`, `mod@arg` or a real number.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    alpha: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    beta: Complex64,
    /// Branch angle in (0, 2pi); accepts `pi`, `pi/3`, `3*pi/2`.
    #[arg(long, value_parser = parse_angle)]
    theta: f64,
    /// Comma-separated: theorem, series, quadrature, rational:m/n.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<MethodChoice>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include per-method wall-clock times (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    diagnostics: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Moduli of alpha: `start:stop:step` or a comma list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    alpha_mod: Grid,
    /// Arguments of alpha: `start:stop:step` or a comma list.
    #[arg(long, value_parser = parse_grid, default_value = "0", allow_hyphen_values = true)]
    alpha_arg: Grid,
    /// Repeatable.
    #[arg(long, value_parser = parse_complex, required = true, allow_hyphen_values = true)]
    beta: Vec<Complex64>,
    /// Repeatable.
    #[arg(long, value_parser = parse_angle, default_value = "pi")]
    theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    methods: Vec<MethodChoice>,
    #[arg(long, value_enum, default_value_t = SweepFormat::Jsonl)]
    format: SweepFormat,
    #[arg(long)]
    diagnostics: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeatable or comma-separated; default is every check.
    #[arg(long, value_delimiter = ',')]
    check: Vec<CheckKind>,
    /// Largest n for the root-of-unity filter check.
    #[arg(long, default_value_t = 64)]
    nmax: u32,
    /// Exponent for the ODE check (repeatable).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    beta: Vec<Complex64>,
    /// Random instances in the agreement check.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = VerifyFormat::Json)]
    format: VerifyFormat,
    #[command(flatten)]
    common: Common,
}

/// Real number, `a/b` fraction, or angle-like `pi` expression.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s.contains("pi") {
        return parse_angle(s);
    }
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (parse_plain(a)?, parse_plain(b)?);
        if b == 0.0 {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(a / b);
    }
    parse_plain(s)
}

fn parse_plain(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: '{}'", s.trim()))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not finite: '{s}'"))
    }
}

/// `pi`, `2pi`, `-pi/2`, `3*pi/4`, or a plain number.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let Some(pos) = s.find("pi") else { return parse_plain(s) };
    let head = s[..pos].trim().trim_end_matches('*').trim();
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_plain(h)?,
    };
    let tail = s[pos + 2..].trim();
    let div = match tail.strip_prefix('/') {
        Some(d) => parse_plain(d)?,
        None if tail.is_empty() => 1.0,
        None => return Err(format!("bad angle '{s}'")),
    };
    if div == 0.0 {
        return Err(format!("zero denominator in '{s}'"));
    }
    Ok(coef * std::f64::consts::PI / div)
}

/// `re,im`, `mod@arg` or a single real.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    if let Some((m, a)) = s.split_once('@') {
        let m = parse_real(m)?;
        if m < 0.0 {
            return Err(format!("negative modulus in '{s}'"));
        }
        return Ok(Complex64::from_polar(m, parse_angle(a)?));
    }
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse_real(re)?, parse_real(im)?)),
        None => Ok(Complex64::new(parse_real(s)?, 0.0)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// `start:stop:step` (stop included when hit) or a comma list; empty text is an empty grid.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Grid(Vec::new()));
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_real(start)?, parse_real(stop)?, parse_real(step)?);
            if step == 0.0 {
                return Err("grid step must be non-zero".into());
            }
            let span = (stop - start) / step;
            if span < -1e-9 {
                return Ok(Grid(Vec::new()));
            }
            let count = (span + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("grid '{s}' has too many points"));
            }
            Ok(Grid((0..count).map(|k| start + k as f64 * step).collect()))
        }
        [_] => s.split(',').map(parse_real).collect::<Result<_, _>>().map(Grid),
        _ => Err(format!("bad grid '{s}': use start:stop:step or a comma list")),
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_ERROR
                }
            };
        }
    };
    let jobs = match &cli.command {
        Command::Eval(a) => a.common.jobs,
        Command::Sweep(a) => a.common.jobs,
        Command::Verify(a) => a.common.jobs,
    };
    let outcome = with_pool(jobs, || match cli.command {
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
    });
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(stderr, "bci: {msg}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<i32, String>;

fn with_pool(jobs: usize, f: impl FnOnce() -> CmdResult + Send) -> CmdResult {
    if jobs == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| format!("cannot start {jobs} worker threads: {e}"))?
        .install(f)
}

fn io_err(e: io::Error) -> String {
    format!("write failed: {e}")
}

/// Writes a complete document to `--out` (via a temporary file and rename) or stdout.
fn emit_document(out: &Option<PathBuf>, stdout: &mut (dyn Write + Send), text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            let tmp = path.with_extension("partial");
            std::fs::write(&tmp, text).map_err(|e| format!("{}: {e}", tmp.display()))?;
            std::fs::rename(&tmp, path).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            stdout.write_all(text.as_bytes()).map_err(io_err)?;
            stdout.flush().map_err(io_err)
        }
    }
}

fn to_json<T: Serialize>(v: &T, pretty: bool) -> Result<String, String> {
    let r = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) };
    r.map_err(|e| format!("serialisation failed: {e}"))
}

fn check_common(c: &Common) -> Result<(), String> {
    if !(c.tol.is_finite() && c.tol > 0.0) {
        return Err(format!("--tol must be positive and finite, got {}", c.tol));
    }
    if !(c.exclusion_band.is_finite() && c.exclusion_band >= 0.0 && c.exclusion_band < 1.0) {
        return Err(format!("--exclusion-band must be in [0, 1), got {}", c.exclusion_band));
    }
    Ok(())
}

fn methods_for(requested: &[MethodChoice], inst: &ProblemInstance) -> Vec<MethodChoice> {
    if requested.is_empty() {
        default_methods(inst)
    } else {
        requested.to_vec()
    }
}

fn cmd_eval(a: EvalArgs, stdout: &mut (dyn Write + Send)) -> CmdResult {
    check_common(&a.common)?;
    let theta = BranchAngle::new(a.theta).map_err(|e| e.to_string())?;
    let inst = ProblemInstance::with_band(a.alpha, a.beta, theta, a.common.tol, a.common.exclusion_band)
        .map_err(|e| format!("{}: {e}", e.kind()))?;
    let report = evaluate(&inst, &methods_for(&a.methods, &inst));
    let opts = RenderOptions { timing: a.timing, diagnostics: a.diagnostics };
    let text = match a.format {
        Format::Json => to_json(&ReportJson::new(&report, opts), true)? + "\n",
        Format::Jsonl => to_json(&ReportJson::new(&report, opts), false)? + "\n",
        Format::Csv => {
            let mut s = format!("{EVAL_CSV_HEADER}\n");
            for row in eval_csv_rows(&report) {
                s.push_str(&row);
                s.push('\n');
            }
            s
        }
    };
    emit_document(&a.common.out, stdout, &text)?;
    Ok(if report.all_failed() {
        EXIT_ERROR
    } else if report.verdict == Verdict::Disagree {
        EXIT_DISAGREE
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Clone, Copy)]
struct Point {
    alpha: Complex64,
    beta: Complex64,
    theta: f64,
}

#[derive(Serialize)]
struct SweepHeader {
    kind: &'static str,
    points: usize,
    methods: Vec<String>,
    tol: Num,
    exclusion_band: Num,
}

#[derive(Serialize)]
struct SweepRow {
    kind: &'static str,
    index: usize,
    instance: InstanceJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<Vec<ResultJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    disagreement: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<&'static str>,
}

#[derive(Serialize)]
struct SweepSummary {
    kind: &'static str,
    rows: usize,
    evaluated: usize,
    excluded: usize,
    failures: usize,
    max_disagreement: Num,
}

const SWEEP_CHUNK: usize = 64;

fn cmd_sweep(a: SweepArgs, stdout: &mut (dyn Write + Send)) -> CmdResult {
    check_common(&a.common)?;
    let mut points = Vec::new();
    for &theta in &a.theta {
        for &beta in &a.beta {
            for &m in &a.alpha_mod.0 {
                for &arg in &a.alpha_arg.0 {
                    points.push(Point { alpha: Complex64::from_polar(m, arg), beta, theta });
                }
            }
        }
    }

    let mut file_sink;
    let sink: &mut dyn Write = match &a.common.out {
        Some(p) => {
            file_sink = BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?);
            &mut file_sink
        }
        None => stdout,
    };
    // each line goes out whole and is flushed before the next one
    let mut line = |text: String| -> Result<(), String> {
        sink.write_all(text.as_bytes()).map_err(io_err)?;
        sink.write_all(b"\n").map_err(io_err)?;
        sink.flush().map_err(io_err)
    };

    let csv = a.format == SweepFormat::Csv;
    if csv {
        line(format!("index,{EVAL_CSV_HEADER},message"))?;
    } else {
        line(to_json(
            &SweepHeader {
                kind: "header",
                points: points.len(),
                methods: a.methods.iter().map(ToString::to_string).collect(),
                tol: Num(a.common.tol),
                exclusion_band: Num(a.common.exclusion_band),
            },
            false,
        )?)?;
    }

    let opts = RenderOptions { timing: false, diagnostics: a.diagnostics };
    let (mut evaluated, mut excluded, mut failures, mut worst) = (0, 0, 0, 0.0f64);
    for (chunk_no, chunk) in points.chunks(SWEEP_CHUNK).enumerate() {
        let outcomes: Vec<Result<EvaluationReport, crate::Error>> = chunk
            .par_iter()
            .map(|p| {
                let theta = BranchAngle::new(p.theta)?;
                let inst = ProblemInstance::with_band(p.alpha, p.beta, theta, a.common.tol, a.common.exclusion_band)?;
                Ok(evaluate(&inst, &methods_for(&a.methods, &inst)))
            })
            .collect();
        for (k, (p, outcome)) in chunk.iter().zip(outcomes).enumerate() {
            let index = chunk_no * SWEEP_CHUNK + k;
            match outcome {
                Ok(report) => {
                    evaluated += 1;
                    if report.verdict == Verdict::Disagree {
                        failures += 1;
                    }
                    if report.pairwise_max_relative_disagreement.is_finite() {
                        worst = worst.max(report.pairwise_max_relative_disagreement);
                    }
                    if csv {
                        for row in eval_csv_rows(&report) {
                            line(format!("{index},{row},"))?;
                        }
                    } else {
                        let r = ReportJson::new(&report, opts);
                        line(to_json(
                            &SweepRow {
                                kind: "row",
                                index,
                                instance: r.instance,
                                status: None,
                                message: None,
                                results: Some(r.results),
                                disagreement: Some(r.disagreement),
                                verdict: Some(r.verdict),
                            },
                            false,
                        )?)?;
                    }
                }
                Err(e) => {
                    excluded += 1;
                    if csv {
                        let msg = e.to_string().replace('"', "'");
                        line(format!(
                            "{index},{},{},{},{},{},,,,,{},,,\"{msg}\"",
                            format_float(p.alpha.re),
                            format_float(p.alpha.im),
                            format_float(p.beta.re),
                            format_float(p.beta.im),
                            format_float(p.theta),
                            e.kind()
                        ))?;
                    } else {
                        line(to_json(
                            &SweepRow {
                                kind: "row",
                                index,
                                instance: InstanceJson::new(p.alpha, p.beta, p.theta),
                                status: Some(e.kind()),
                                message: Some(e.to_string()),
                                results: None,
                                disagreement: None,
                                verdict: None,
                            },
                            false,
                        )?)?;
                    }
                }
            }
        }
    }

    let summary = SweepSummary {
        kind: "summary",
        rows: points.len(),
        evaluated,
        excluded,
        failures,
        max_disagreement: Num(worst),
    };
    if csv {
        line(format!(
            "# summary rows={} evaluated={evaluated} excluded={excluded} failures={failures} max_disagreement={}",
            points.len(),
            format_float(worst)
        ))?;
    } else {
        line(to_json(&summary, false)?)?;
    }
    Ok(if failures > 0 { EXIT_DISAGREE } else { EXIT_OK })
}

fn cmd_verify(a: VerifyArgs, stdout: &mut (dyn Write + Send)) -> CmdResult {
    check_common(&a.common)?;
    let pretty = a.format == VerifyFormat::Json;
    let opts = VerifyOptions {
        seed: a.seed,
        tol: a.common.tol,
        exclusion_band: a.common.exclusion_band,
        checks: a.check,
        nmax: a.nmax,
        ode_betas: a.beta,
        samples: a.samples,
    };
    let report = run_suite(&opts);
    emit_document(&a.common.out, stdout, &(to_json(&report, pretty)? + "\n"))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_DISAGREE })
}
