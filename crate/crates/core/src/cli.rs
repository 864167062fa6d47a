//! JSON ingestion, command dispatch and reports for the `deflate` binary.
//!
//! Every command returns a [`Output`]: the JSON text to print and the exit
//! code. Exit codes: 0 report, 1 usage or parse error, 2 gate, rank or
//! extraction failure, 3 numerical error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bergman::{BallContext, NormBackend};
use crate::certificates::{certify_trace, gamma_radius, CertificateReport};
use crate::deflation::{
    default_max_iters, deflation_sequence, newton_iterate, select, DeflationOptions,
    DeflationTrace, GateNorm, Provenance, SelectionEvent, SmallnessGate, StepKind,
};
use crate::error::{Error, Result};
use crate::rank::{numerical_rank, RankReport};
use crate::series::{Exponent, Scalar, TruncatedSeries};
use crate::system::AnalyticSystem;

/// Seed variable for stochastic oracles. Every norm is computed exactly, so
/// the value is validated and otherwise unused.
pub const SEED_VAR: &str = "DEFLATE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GATE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub type Complex = [f64; 2];

fn pair(z: Scalar) -> Complex {
    [z.re, z.im]
}

fn scalar(p: &Complex) -> Scalar {
    Scalar::new(p[0], p[1])
}

/// A coefficient or coordinate: `[re, im]`, or a bare real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Complex(Complex),
    Real(f64),
}

impl Number {
    pub fn value(&self) -> Scalar {
        match *self {
            Number::Complex(p) => scalar(&p),
            Number::Real(r) => Scalar::new(r, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff: Number,
    pub exponents: Vec<u32>,
}

fn default_order() -> usize {
    3
}

/// Polynomial system in absolute coordinates, a point and a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub vars: Vec<String>,
    pub equations: Vec<Vec<Term>>,
    pub point: Vec<Number>,
    pub radius: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub norm_backend: NormBackend,
    /// Center of the ambient ball; the point itself when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_center: Option<Vec<Number>>,
    #[serde(default)]
    pub gate: GateNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub matrix: Vec<Vec<Number>>,
}

/// A validated system file.
#[derive(Clone, Debug)]
pub struct ParsedSystem {
    pub file: SystemFile,
    /// The polynomial expanded around the ball center at full degree.
    pub polynomial: AnalyticSystem,
    /// The polynomial re-expanded around `point` and truncated at `order`.
    pub local: AnalyticSystem,
    pub point: Vec<Scalar>,
    pub order: usize,
}

#[derive(Clone, Debug)]
pub enum Input {
    System(Box<ParsedSystem>),
    Matrix(DMatrix<Scalar>),
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse("input", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::parse("input", e.to_string()))
}

/// A file holding `{"matrix": ...}` is a matrix, anything else a system.
pub fn parse_input(path: &Path) -> Result<Input> {
    let value = read_json(path)?;
    if value.get("matrix").is_some() {
        let file: MatrixFile =
            serde_json::from_value(value).map_err(|e| Error::parse("matrix", e.to_string()))?;
        return matrix_from_file(&file).map(Input::Matrix);
    }
    let file: SystemFile = serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("input")
            .to_string();
        Error::parse(field, msg)
    })?;
    system_from_file(file).map(|s| Input::System(Box::new(s)))
}

pub fn parse_system(path: &Path) -> Result<ParsedSystem> {
    match parse_input(path)? {
        Input::System(s) => Ok(*s),
        Input::Matrix(_) => Err(Error::parse("input", "expected a system, found a matrix")),
    }
}

pub fn matrix_from_file(file: &MatrixFile) -> Result<DMatrix<Scalar>> {
    let rows = file.matrix.len();
    let cols = file.matrix.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::parse("matrix", "the matrix is empty"));
    }
    if let Some(i) = file.matrix.iter().position(|r| r.len() != cols) {
        return Err(Error::parse(
            format!("matrix[{i}]"),
            format!("expected {cols} entries, found {}", file.matrix[i].len()),
        ));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        file.matrix[i][j].value()
    }))
}

fn finite_point(field: &str, p: &[Number], n: usize) -> Result<Vec<Scalar>> {
    if p.len() != n {
        return Err(Error::parse(
            field,
            format!("expected {n} coordinates, found {}", p.len()),
        ));
    }
    let v: Vec<Scalar> = p.iter().map(Number::value).collect();
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::parse(field, "coordinates must be finite"));
    }
    Ok(v)
}

pub fn system_from_file(file: SystemFile) -> Result<ParsedSystem> {
    let n = file.vars.len();
    if n == 0 {
        return Err(Error::parse("vars", "at least one variable is required"));
    }
    if file.equations.is_empty() {
        return Err(Error::parse(
            "equations",
            "at least one equation is required",
        ));
    }
    if !(file.radius.is_finite() && file.radius > 0.0) {
        return Err(Error::parse(
            "radius",
            format!("must be positive, got {}", file.radius),
        ));
    }
    if file.order == 0 {
        return Err(Error::parse("order", "must be at least 1"));
    }
    let point = finite_point("point", &file.point, n)?;
    let center = match &file.ball_center {
        Some(c) => finite_point("ball_center", c, n)?,
        None => point.clone(),
    };
    let mut degree = 0;
    for (i, eq) in file.equations.iter().enumerate() {
        for (j, t) in eq.iter().enumerate() {
            if t.exponents.len() != n {
                return Err(Error::parse(
                    format!("equations[{i}][{j}].exponents"),
                    format!("expected {n} exponents, found {}", t.exponents.len()),
                ));
            }
            degree = degree.max(t.exponents.iter().map(|&e| e as usize).sum());
        }
    }
    let ball = BallContext::new(center.clone(), file.radius)?;
    ball.nu(&point)
        .map_err(|_| Error::parse("point", "the point must lie inside the ball"))?;
    let full = degree.max(file.order);
    let equations = file
        .equations
        .iter()
        .map(|eq| {
            TruncatedSeries::polynomial(
                center.clone(),
                full,
                eq.iter()
                    .map(|t| (Exponent::new(t.exponents.clone()), t.coeff.value())),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let polynomial = AnalyticSystem::new(equations, ball)?;
    let local = polynomial.recenter(&point, file.order)?;
    Ok(ParsedSystem {
        order: file.order,
        file,
        polynomial,
        local,
        point,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub center: Vec<Complex>,
    pub order: usize,
    /// Terms in the shifted variables `z - center`.
    pub terms: Vec<Term>,
}

impl SeriesReport {
    pub fn new(s: &TruncatedSeries) -> Self {
        SeriesReport {
            center: s.center().iter().copied().map(pair).collect(),
            order: s.order(),
            terms: s
                .terms()
                .map(|(e, c)| Term {
                    coeff: Number::Complex(pair(*c)),
                    exponents: e.as_slice().to_vec(),
                })
                .collect(),
        }
    }
}

fn series_reports(f: &AnalyticSystem) -> Vec<SeriesReport> {
    f.equations().iter().map(SeriesReport::new).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub kind: StepKind,
    pub gate: SmallnessGate,
    pub rank: Option<RankReport>,
    pub provenance: Vec<Provenance>,
    pub selection_events: Vec<SelectionEvent>,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
    pub pivot_mu: Option<f64>,
    pub extracted_rows: Vec<usize>,
    pub equations: Vec<SeriesReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Deflated,
    GateFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub order: usize,
    pub norm_backend: NormBackend,
    pub gate: GateNorm,
    pub max_iters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub vars: Vec<String>,
    pub point: Vec<Complex>,
    pub options: RunOptions,
    pub status: Status,
    pub thickness: usize,
    pub steps: Vec<StepReport>,
    pub deflated: Option<Vec<SeriesReport>>,
    pub certificate: Option<CertificateReport>,
    pub iterates: Vec<Vec<Complex>>,
}

impl TraceReport {
    pub fn new(vars: Vec<String>, options: RunOptions, trace: &DeflationTrace) -> Self {
        let steps = trace
            .steps
            .iter()
            .map(|s| StepReport {
                kind: s.kind,
                gate: s.gate.clone(),
                rank: s.rank_report.clone(),
                provenance: s.selection.provenance.clone(),
                selection_events: s.selection.events.clone(),
                pivot_rows: s.pivot_rows.clone(),
                pivot_cols: s.pivot_cols.clone(),
                pivot_mu: s.pivot_mu,
                extracted_rows: s.extracted_rows.clone(),
                equations: series_reports(&s.system),
            })
            .collect();
        TraceReport {
            vars,
            point: trace.x0.iter().copied().map(pair).collect(),
            options,
            status: if trace.deflated.is_some() {
                Status::Deflated
            } else {
                Status::GateFailed
            },
            thickness: trace.thickness,
            steps,
            deflated: trace.deflated.as_ref().map(series_reports),
            certificate: None,
            iterates: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Complex,
    Appendix,
}

impl From<BackendArg> for NormBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Complex => NormBackend::ComplexExact,
            BackendArg::Appendix => NormBackend::AppendixSlice,
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "deflate",
    version,
    about = "Certified deflation of multiple roots"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, clap::Args)]
pub struct CommonArgs {
    /// System or matrix JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation order; overrides the file.
    #[arg(long)]
    pub order: Option<usize>,
    /// Singular Newton steps for `solve` and `certify`.
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    /// Overrides the file's norm backend.
    #[arg(long, value_enum)]
    pub norm_backend: Option<BackendArg>,
    /// Cap on kerneling rounds; `n * order^2` by default.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Compact JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented JSON.
    #[arg(long)]
    pub pretty: bool,
    /// `rank` only: use the raw Jacobian instead of the selected system's.
    #[arg(long)]
    pub no_select: bool,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Numerical rank of a matrix, or of the Jacobian of a system at its point.
    Rank(CommonArgs),
    /// Deflation sequence, deflated system and α-certificate.
    Deflate(CommonArgs),
    /// Singular Newton iterates.
    Solve(CommonArgs),
    /// α-theorem certificate of the deflated system.
    Certify(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Rank(a) | Command::Deflate(a) | Command::Solve(a) | Command::Certify(a) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_USAGE,
        Error::TruncationExhausted { .. } | Error::Extraction { .. } | Error::RankDeficiency(_) => {
            EXIT_GATE
        }
        _ => EXIT_NUMERIC,
    }
}

fn render<T: Serialize>(value: &T, pretty: bool) -> String {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    text.expect("reports contain only finite numbers and string keys")
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn error_output(e: &Error, pretty: bool) -> Output {
    let kind = match e {
        Error::Parse { .. } => "parse",
        Error::TruncationExhausted { .. } | Error::Extraction { .. } | Error::RankDeficiency(_) => {
            "deflation"
        }
        _ => "numerical",
    };
    Output {
        text: render(
            &ErrorReport {
                error: kind,
                message: e.to_string(),
            },
            pretty,
        ),
        code: exit_code(e),
    }
}

/// Validates [`SEED_VAR`] when set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::parse(SEED_VAR, format!("expected an unsigned integer, got {s:?}"))
        }),
        Err(_) => Ok(None),
    }
}

pub fn run(cli: &Cli) -> Output {
    let args = cli.command.args();
    let result = seed_from_env().and_then(|_| match &cli.command {
        Command::Rank(a) => cmd_rank(a),
        Command::Deflate(a) => cmd_deflate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Certify(a) => cmd_certify(a),
    });
    match result {
        Ok(out) => out,
        Err(e) => error_output(&e, args.pretty),
    }
}

/// Loads a system and applies the command-line overrides.
fn load(args: &CommonArgs) -> Result<(ParsedSystem, DeflationOptions, RunOptions)> {
    let mut file = match parse_input(&args.input)? {
        Input::System(s) => s.file,
        Input::Matrix(_) => {
            return Err(Error::parse("input", "this command needs a system file"));
        }
    };
    if let Some(order) = args.order {
        file.order = order;
    }
    if let Some(b) = args.norm_backend {
        file.norm_backend = b.into();
    }
    let parsed = system_from_file(file)?;
    let max_iters = args
        .max_iters
        .unwrap_or_else(|| default_max_iters(parsed.local.dim(), parsed.order));
    let opts = DeflationOptions::new(parsed.file.norm_backend)
        .gate(parsed.file.gate)
        .max_iters(max_iters);
    let run = RunOptions {
        order: parsed.order,
        norm_backend: opts.backend,
        gate: opts.gate,
        max_iters,
    };
    Ok((parsed, opts, run))
}

pub fn cmd_rank(args: &CommonArgs) -> Result<Output> {
    let m = match parse_input(&args.input)? {
        Input::Matrix(m) => m,
        Input::System(_) => {
            let (parsed, opts, _) = load(args)?;
            let f = if args.no_select {
                parsed.local
            } else {
                select(&parsed.local, opts.backend)?.system
            };
            f.jacobian_at(&parsed.point)
        }
    };
    Ok(Output {
        text: render(&numerical_rank(&m), args.pretty),
        code: EXIT_OK,
    })
}

fn trace_report(
    args: &CommonArgs,
) -> Result<(ParsedSystem, DeflationOptions, DeflationTrace, TraceReport)> {
    let (parsed, opts, run) = load(args)?;
    let trace = deflation_sequence(&parsed.local, &parsed.point, &opts)?;
    let report = TraceReport::new(parsed.file.vars.clone(), run, &trace);
    Ok((parsed, opts, trace, report))
}

pub fn cmd_deflate(args: &CommonArgs) -> Result<Output> {
    let (_, opts, trace, mut report) = trace_report(args)?;
    if trace.deflated.is_some() {
        report.certificate = Some(certify_trace(&trace, opts.backend)?);
    }
    let code = match report.status {
        Status::Deflated => EXIT_OK,
        Status::GateFailed => EXIT_GATE,
    };
    Ok(Output {
        text: render(&report, args.pretty),
        code,
    })
}

pub fn cmd_solve(args: &CommonArgs) -> Result<Output> {
    let (parsed, opts, _, mut report) = trace_report(args)?;
    let iterates = newton_iterate(
        &parsed.polynomial,
        &parsed.point,
        args.steps,
        parsed.order,
        &opts,
    )?;
    report.iterates = iterates
        .iter()
        .map(|x| x.iter().copied().map(pair).collect())
        .collect();
    let code = match report.status {
        Status::Deflated => EXIT_OK,
        Status::GateFailed => EXIT_GATE,
    };
    Ok(Output {
        text: render(&report, args.pretty),
        code,
    })
}

/// Failed hypotheses are reports with exit code 0; the γ-theorem radius is
/// evaluated at the last singular Newton iterate.
pub fn cmd_certify(args: &CommonArgs) -> Result<Output> {
    let (parsed, opts, _) = load(args)?;
    let report = match deflation_sequence(&parsed.local, &parsed.point, &opts) {
        Ok(trace) => {
            let mut report = certify_trace(&trace, opts.backend)?;
            if let (true, Some(deflated)) = (report.alpha_ok, &trace.deflated) {
                let iterates = newton_iterate(
                    &parsed.polynomial,
                    &parsed.point,
                    args.steps,
                    parsed.order,
                    &opts,
                )?;
                let zeta = iterates.last().expect("the trajectory holds x0");
                match gamma_radius(deflated, zeta, opts.backend) {
                    Ok(r) => report.gamma_radius = Some(r),
                    Err(e) => report.notes.push(format!("no gamma radius: {e}")),
                }
            }
            report
        }
        Err(e) if exit_code(&e) != EXIT_USAGE => {
            CertificateReport::failed(format!("deflation failed: {e}"))
        }
        Err(e) => return Err(e),
    };
    Ok(Output {
        text: render(&report, args.pretty),
        code: EXIT_OK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> Result<ParsedSystem> {
        let f: SystemFile = serde_json::from_str(json).unwrap();
        system_from_file(f)
    }

    const BASE: &str = r#"{"vars":["x","y"],"equations":[[{"coeff":[1,0],"exponents":[1,0]}],
        [{"coeff":[1,0],"exponents":[0,1]}]],"point":[[0.1,0],[0,0]],"radius":1}"#;

    #[test]
    fn defaults_and_recentering() {
        let p = file(BASE).unwrap();
        assert_eq!(p.order, 3);
        assert_eq!(p.file.norm_backend, NormBackend::ComplexExact);
        assert_eq!(p.local.center(), p.point.as_slice());
        assert_eq!(p.polynomial.ball().omega(), p.point.as_slice());
        assert_eq!(
            p.local.equations()[0].constant_term(),
            Scalar::new(0.1, 0.0)
        );
    }

    #[test]
    fn field_errors() {
        let bad_radius = BASE.replace("\"radius\":1", "\"radius\":0");
        assert!(matches!(file(&bad_radius), Err(Error::Parse { field, .. }) if field == "radius"));
        let bad_exp = BASE.replace("[1,0]}", "[1,0,0]}");
        assert!(
            matches!(file(&bad_exp), Err(Error::Parse { field, .. }) if field == "equations[0][0].exponents")
        );
        let bad_point = BASE.replace("[[0.1,0],[0,0]]", "[[0.1,0]]");
        assert!(matches!(file(&bad_point), Err(Error::Parse { field, .. }) if field == "point"));
        let outside = BASE.replace(
            "[[0.1,0],[0,0]]",
            "[[0.1,0],[0,0]],\"ball_center\":[[5,0],[0,0]]",
        );
        assert!(matches!(file(&outside), Err(Error::Parse { field, .. }) if field == "point"));
    }

    #[test]
    fn bare_reals_are_accepted() {
        let p = file(&BASE.replace("[[0.1,0],[0,0]]", "[0.1,0]")).unwrap();
        assert_eq!(p.point, vec![Scalar::new(0.1, 0.0), Scalar::new(0.0, 0.0)]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::parse("x", "y")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Extraction { n: 2, found: 1 }), EXIT_GATE);
        assert_eq!(exit_code(&Error::NonTermination(3)), EXIT_NUMERIC);
    }
}
