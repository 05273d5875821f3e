//! Argument handling and dispatch for the `mlbeta` binary.
//!
//! [`run`] never exits the process; it returns the exit code together with
//! the text destined for standard output and standard error.

mod render;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlbeta::dist::{self, DistSpec};
use mlbeta::extbeta::{self, BetaArgs, ExtParams, Representation};
use mlbeta::hyper::{self, EvalMethod, HyperArgs, SeriesResult};
use mlbeta::quad::QuadResult;
use mlbeta::suite::{run_suite, Suite, SuiteEntry};
use mlbeta::{mlf, Error};
use serde_json::{Map, Value};

pub use render::{fmt_num, json_num, render_table, Format, Row};

/// Quadrature tolerance used by `eval` and `table` when `--tol` is absent.
pub const DEFAULT_EVAL_TOL: f64 = 1e-12;
/// Series length for `dist mgf` when `--n` is absent.
pub const DEFAULT_MGF_TERMS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mlbeta", version, about = "Mittag-Leffler extended beta and hypergeometric functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one function at one point.
    Eval(EvalCmd),
    /// Evaluate a function over a grid of parameter values.
    Table(TableCmd),
    /// Run identity-verification suites on the default grid.
    Check(CheckCmd),
    /// Query the distribution built on the extended beta function.
    Dist(DistCmd),
}

#[derive(Args, Debug)]
struct EvalCmd {
    #[arg(value_enum, value_name = "FN")]
    function: Option<Function>,
    #[arg(long = "fn", value_enum, value_name = "NAME", conflicts_with = "function")]
    fn_flag: Option<Function>,
    #[command(flatten)]
    values: Values,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args, Debug)]
struct TableCmd {
    #[command(flatten)]
    eval: EvalCmd,
    /// Swept parameter; repeat for a multi-axis grid (first axis outermost).
    #[arg(long, value_name = "PARAM:START:STOP:COUNT", allow_hyphen_values = true)]
    sweep: Vec<String>,
}

#[derive(Args, Debug)]
struct CheckCmd {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Residual tolerance; raised to the per-identity floor where one applies.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct DistCmd {
    #[arg(value_enum)]
    query: DistQuery,
    #[command(flatten)]
    values: Values,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args, Debug, Default)]
struct Options {
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Integral representation for `extbeta`.
    #[arg(long, value_enum)]
    repr: Option<Repr>,
    /// Evaluation path for `f21` and `phi11`.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Derivative order, series length or sample size.
    #[arg(long)]
    n: Option<u32>,
}

macro_rules! values {
    ($($name:ident),* $(,)?) => {
        #[derive(Args, Debug, Default)]
        struct Values {
            $(
                #[arg(long, allow_negative_numbers = true)]
                $name: Option<f64>,
            )*
        }

        /// Real-valued parameter names accepted as `--<param> VALUE`.
        pub const PARAMS: &[&str] = &[$(stringify!($name)),*];

        impl Values {
            fn bound(&self) -> Bindings {
                let mut b = Bindings::default();
                $(
                    if let Some(v) = self.$name {
                        b.set(stringify!($name), v);
                    }
                )*
                b
            }
        }
    };
}

values!(eta1, eta2, eta3, p, q, lambda, sigma, tau, x, z, t, a, b, c, gamma, delta);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Function {
    /// Classical beta B(eta1, eta2).
    Beta,
    /// Extended beta function.
    Extbeta,
    /// Incomplete extended beta over (0, x).
    #[value(name = "extbeta_inc")]
    ExtbetaInc,
    /// Extended beta over (x, 1).
    #[value(name = "extbeta_upper")]
    ExtbetaUpper,
    /// Three-parameter Mittag-Leffler function E^delta_{lambda,gamma}(x).
    Ml,
    /// Gauss function 2F1(a, b; c; z).
    #[value(name = "2f1")]
    Gauss2f1,
    /// Kummer function 1F1(a; b; z).
    #[value(name = "1f1")]
    Kummer1f1,
    /// Extended Gauss function F(eta1, eta2; eta3; z).
    F21,
    /// Extended confluent function Phi(eta2; eta3; z).
    Phi11,
    /// n-th z-derivative of the extended Gauss function.
    #[value(name = "f21_deriv")]
    F21Deriv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Repr {
    Direct,
    Trigonometric,
    #[value(name = "semi_infinite")]
    SemiInfinite,
    Symmetric,
    /// Interval (a, c), defaults -2 and 3.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Series,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistQuery {
    Pdf,
    Cdf,
    Mean,
    Var,
    Mgf,
    Sample,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

/// Named parameter values in canonical order.
#[derive(Debug, Clone, Default, PartialEq)]
struct Bindings(BTreeMap<usize, f64>);

impl Bindings {
    fn slot(name: &str) -> usize {
        PARAMS.iter().position(|p| *p == name).expect("known parameter")
    }

    fn set(&mut self, name: &str, v: f64) {
        self.0.insert(Self::slot(name), v);
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.0.get(&Self::slot(name)).copied()
    }

    fn need(&self, name: &str) -> Result<f64, Fail> {
        self.get(name).ok_or_else(|| Fail::Usage(format!("missing --{name}")))
    }

    fn or(&self, name: &str, default: f64) -> f64 {
        self.get(name).unwrap_or(default)
    }

    fn pairs(&self) -> Vec<(String, f64)> {
        self.0.iter().map(|(&i, &v)| (PARAMS[i].to_string(), v)).collect()
    }

    fn ext_params(&self) -> Result<ExtParams, Fail> {
        Ok(ExtParams::new(
            self.or("p", 0.0),
            self.or("q", 0.0),
            self.or("lambda", 1.0),
            self.or("sigma", 1.0),
            self.or("tau", 1.0),
        )?)
    }
}

#[derive(Debug)]
enum Fail {
    /// Bad or missing arguments, or inputs outside the domain: exit 2.
    Usage(String),
    /// Numerical failure: exit 1.
    Numeric(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Divergent(_) => Fail::Usage(e.to_string()),
            Error::Overflow(_) | Error::NonConvergence(_) => Fail::Numeric(e.to_string()),
        }
    }
}

impl Fail {
    fn outcome(self, stdout: String) -> Outcome {
        match self {
            Fail::Usage(msg) => Outcome { code: 2, stdout, stderr: format!("error: {msg}\n\n{}\n", usage()) },
            Fail::Numeric(msg) => Outcome { code: 1, stdout, stderr: format!("error: {msg}\n") },
        }
    }
}

fn usage() -> &'static str {
    "Usage: mlbeta <eval|table|check|dist> [--fn NAME] [--<param> VALUE]... \
     [--sweep PARAM:START:STOP:COUNT]... [--format csv|json|plain] [--tol T] [--seed S]"
}

/// A computed value with its error estimate; `converged` is false when the
/// evaluator ran out of budget before meeting its tolerance.
#[derive(Debug, Clone, Copy)]
struct Value1 {
    value: f64,
    abs_err: f64,
    converged: bool,
}

impl Value1 {
    fn exact(value: f64) -> Self {
        Self { value, abs_err: 0.0, converged: true }
    }
}

impl From<QuadResult> for Value1 {
    fn from(r: QuadResult) -> Self {
        Self { value: r.value, abs_err: r.abs_error_estimate, converged: r.converged }
    }
}

impl From<SeriesResult> for Value1 {
    fn from(r: SeriesResult) -> Self {
        Self { value: r.value, abs_err: r.tail_estimate, converged: r.converged }
    }
}

fn representation(opts: &Options, b: &Bindings) -> Representation {
    match opts.repr.unwrap_or(Repr::Direct) {
        Repr::Direct => Representation::Direct,
        Repr::Trigonometric => Representation::Trigonometric,
        Repr::SemiInfinite => Representation::SemiInfinite,
        Repr::Symmetric => Representation::SymmetricInterval,
        Repr::General => Representation::GeneralInterval { a: b.or("a", -2.0), c: b.or("c", 3.0) },
    }
}

fn method(opts: &Options, z: f64) -> EvalMethod {
    match opts.method {
        Some(Method::Series) => EvalMethod::Series,
        Some(Method::Euler) => EvalMethod::EulerIntegral,
        None if z.abs() <= hyper::SERIES_Z_LIMIT => EvalMethod::Series,
        None => EvalMethod::EulerIntegral,
    }
}

fn evaluate(f: Function, b: &Bindings, opts: &Options, tol: f64) -> Result<Value1, Fail> {
    let shapes = |params: &ExtParams| -> Result<BetaArgs, Fail> {
        Ok(BetaArgs::regularized(b.need("eta1")?, b.need("eta2")?, params)?)
    };
    let hyper_args = || -> Result<HyperArgs, Fail> {
        Ok(HyperArgs::new(b.need("eta1")?, b.need("eta2")?, b.need("eta3")?, b.need("z")?)?)
    };
    Ok(match f {
        Function::Beta => Value1::exact(extbeta::classical_beta(BetaArgs::new(b.need("eta1")?, b.need("eta2")?)?)?),
        Function::Extbeta => {
            let params = b.ext_params()?;
            extbeta::ext_beta(shapes(&params)?, &params, representation(opts, b), tol)?.into()
        }
        Function::ExtbetaInc => {
            let params = b.ext_params()?;
            extbeta::ext_beta_incomplete(b.need("x")?, shapes(&params)?, &params, tol)?.into()
        }
        Function::ExtbetaUpper => {
            let params = b.ext_params()?;
            extbeta::ext_beta_upper(b.need("x")?, shapes(&params)?, &params, tol)?.into()
        }
        Function::Ml => {
            let v = mlf::ml_prabhakar(b.or("lambda", 1.0), b.or("gamma", 1.0), b.or("delta", 1.0), b.need("x")?)?;
            Value1::exact(v)
        }
        Function::Gauss2f1 => hyper::gauss_2f1(b.need("a")?, b.need("b")?, b.need("c")?, b.need("z")?)?.into(),
        Function::Kummer1f1 => hyper::kummer_1f1(b.need("a")?, b.need("b")?, b.need("z")?)?.into(),
        Function::F21 => {
            let args = hyper_args()?;
            hyper::ext_2f1(args, &b.ext_params()?, method(opts, args.z), tol)?.into()
        }
        Function::Phi11 => {
            let z = b.need("z")?;
            hyper::ext_1f1(b.need("eta2")?, b.need("eta3")?, z, &b.ext_params()?, method(opts, z), tol)?.into()
        }
        Function::F21Deriv => {
            let n = opts.n.unwrap_or(1);
            Value1::exact(hyper::ext_2f1_deriv(n, hyper_args()?, &b.ext_params()?)?)
        }
    })
}

fn tolerance(opts: &Options, default: f64) -> Result<f64, Fail> {
    match opts.tol {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(Fail::Usage(format!("--tol must be a positive finite number (got {t})"))),
    }
}

fn selected(cmd: &EvalCmd) -> Result<Function, Fail> {
    cmd.function.or(cmd.fn_flag).ok_or_else(|| Fail::Usage("no function selected (give FN or --fn NAME)".into()))
}

fn render(rows: &[Row], format: Format) -> Result<String, Fail> {
    render_table(rows, format).map_err(Fail::Numeric)
}

fn cmd_eval(cmd: &EvalCmd) -> Result<Outcome, Fail> {
    let f = selected(cmd)?;
    let tol = tolerance(&cmd.opts, DEFAULT_EVAL_TOL)?;
    let b = cmd.values.bound();
    let v = evaluate(f, &b, &cmd.opts, tol)?;
    let format = cmd.opts.format.unwrap_or(Format::Plain);
    let bindings = if format == Format::Plain { Vec::new() } else { b.pairs() };
    let out = render(&[Row { bindings, value: v.value, abs_err: v.abs_err }], format)?;
    if !v.converged {
        let msg = format!("evaluation did not converge (error estimate {})", fmt_num(v.abs_err));
        return Ok(Fail::Numeric(msg).outcome(out));
    }
    Ok(Outcome::ok(out))
}

/// One `--sweep` axis.
#[derive(Debug, Clone, PartialEq)]
struct Axis {
    name: &'static str,
    start: f64,
    stop: f64,
    count: usize,
}

impl Axis {
    fn parse(spec: &str) -> Result<Self, Fail> {
        let bad = |why: &str| Fail::Usage(format!("bad --sweep '{spec}': {why}"));
        let parts: Vec<&str> = spec.split(':').collect();
        let [name, start, stop, count] = parts[..] else {
            return Err(bad("expected PARAM:START:STOP:COUNT"));
        };
        let name = *PARAMS.iter().find(|p| **p == name).ok_or_else(|| bad("unknown parameter"))?;
        let start: f64 = start.parse().map_err(|_| bad("START is not a number"))?;
        let stop: f64 = stop.parse().map_err(|_| bad("STOP is not a number"))?;
        let count: usize = count.parse().map_err(|_| bad("COUNT is not a positive integer"))?;
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(bad("need finite START < STOP"));
        }
        if count < 2 {
            return Err(bad("COUNT must be at least 2"));
        }
        Ok(Self { name, start, stop, count })
    }

    fn at(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.stop;
        }
        self.start + (self.stop - self.start) * (i as f64 / (self.count - 1) as f64)
    }
}

/// Row-major grid over `axes`, first axis outermost.
fn sweep_points(axes: &[Axis]) -> Vec<Vec<(&'static str, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.count).map(move |i| {
                    let mut p = prefix.clone();
                    p.push((axis.name, axis.at(i)));
                    p
                })
            })
            .collect();
    }
    points
}

fn cmd_table(cmd: &TableCmd) -> Result<Outcome, Fail> {
    let f = selected(&cmd.eval)?;
    let opts = &cmd.eval.opts;
    let tol = tolerance(opts, DEFAULT_EVAL_TOL)?;
    let axes = cmd.sweep.iter().map(|s| Axis::parse(s)).collect::<Result<Vec<_>, _>>()?;
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|o| o.name == a.name) {
            return Err(Fail::Usage(format!("parameter {} is swept twice", a.name)));
        }
    }
    let base = cmd.eval.values.bound();
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    for point in sweep_points(&axes) {
        let mut b = base.clone();
        for &(k, v) in &point {
            b.set(k, v);
        }
        let bindings: Vec<(String, f64)> = point.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let (value, abs_err) = match evaluate(f, &b, opts, tol) {
            Ok(v) => {
                if !v.converged {
                    problems.push(format!("{bindings:?}: not converged"));
                }
                (v.value, v.abs_err)
            }
            // a missing argument is the same for every row
            Err(Fail::Usage(msg)) if msg.starts_with("missing --") => return Err(Fail::Usage(msg)),
            Err(Fail::Usage(msg) | Fail::Numeric(msg)) => {
                problems.push(format!("{bindings:?}: {msg}"));
                (f64::NAN, f64::INFINITY)
            }
        };
        rows.push(Row { bindings, value, abs_err });
    }
    let out = render(&rows, opts.format.unwrap_or(Format::Csv))?;
    if problems.is_empty() {
        Ok(Outcome::ok(out))
    } else {
        Ok(Outcome { code: 1, stdout: out, stderr: problems.join("\n") + "\n" })
    }
}

fn report_json(e: &SuiteEntry) -> Value {
    let r = &e.report;
    let mut point = Map::new();
    for (k, v) in &r.point {
        point.insert(k.clone(), json_num(*v));
    }
    let mut obj = Map::new();
    obj.insert("identity".into(), Value::from(r.identity.as_str()));
    obj.insert("point".into(), Value::Object(point));
    obj.insert("lhs".into(), json_num(r.lhs));
    obj.insert("rhs".into(), json_num(r.rhs));
    obj.insert("residual".into(), json_num(r.residual));
    obj.insert("tol".into(), json_num(r.tolerance));
    obj.insert("pass".into(), Value::Bool(r.pass));
    obj.insert("grid_index".into(), Value::from(e.grid_index));
    for (key, v) in
        [("tail", r.tail), ("partial_residual", r.partial_residual), ("printed_residual", r.printed_residual)]
    {
        if let Some(v) = v {
            obj.insert(key.into(), json_num(v));
        }
    }
    if !r.diagnostics.is_empty() {
        obj.insert("diagnostics".into(), Value::from(r.diagnostics.clone()));
    }
    Value::Object(obj)
}

fn cmd_check(cmd: &CheckCmd) -> Result<Outcome, Fail> {
    if let Some(t) = cmd.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Fail::Usage(format!("--tol must be a positive finite number (got {t})")));
        }
    }
    let entries = run_suite(cmd.suite, cmd.tol)?;
    let mut out = String::new();
    match cmd.format.unwrap_or(Format::Json) {
        Format::Json => {
            for e in &entries {
                let _ = writeln!(out, "{}", report_json(e));
            }
        }
        Format::Csv => {
            out.push_str("identity,grid_index,point,lhs,rhs,residual,tol,pass\n");
            for e in &entries {
                let r = &e.report;
                let point: Vec<String> = r.point.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.identity,
                    e.grid_index,
                    point.join(";"),
                    fmt_num(r.lhs),
                    fmt_num(r.rhs),
                    fmt_num(r.residual),
                    fmt_num(r.tolerance),
                    r.pass
                );
            }
        }
        Format::Plain => {
            for e in &entries {
                let r = &e.report;
                let _ = writeln!(
                    out,
                    "{:<20} {:>5}  residual {:<24} tol {:<8} {}",
                    r.identity.as_str(),
                    e.grid_index,
                    fmt_num(r.residual),
                    fmt_num(r.tolerance),
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
        }
    }
    let failed = entries.iter().filter(|e| !e.report.pass).count();
    let summary = format!("{} checks, {} failed\n", entries.len(), failed);
    Ok(Outcome { code: i32::from(failed > 0), stdout: out, stderr: summary })
}

fn cmd_dist(cmd: &DistCmd) -> Result<Outcome, Fail> {
    let b = cmd.values.bound();
    let spec = DistSpec::new(b.need("eta1")?, b.need("eta2")?, b.ext_params()?)?;
    let format = cmd.opts.format.unwrap_or(Format::Plain);
    if cmd.query == DistQuery::Sample {
        let n = cmd.opts.n.ok_or_else(|| Fail::Usage("missing --n (sample size)".into()))?;
        let xs = dist::sample(&spec, n as usize, cmd.opts.seed.unwrap_or(0))?;
        let out = match format {
            Format::Json => Value::Array(xs.iter().map(|&x| json_num(x)).collect()).to_string() + "\n",
            Format::Csv => {
                std::iter::once("x".to_string()).chain(xs.iter().map(|&x| fmt_num(x))).collect::<Vec<_>>().join("\n")
                    + "\n"
            }
            Format::Plain => xs.iter().map(|&x| fmt_num(x) + "\n").collect(),
        };
        return Ok(Outcome::ok(out));
    }
    // cdf and moments are computed to a fixed relative target; report it as the error estimate
    let nominal = |v: f64| Value1 { value: v, abs_err: dist::DIST_TOL * v.abs().max(1.0), converged: true };
    let v = match cmd.query {
        DistQuery::Pdf => Value1::exact(dist::pdf(&spec, b.need("x")?)),
        DistQuery::Cdf => nominal(dist::cdf(&spec, b.need("x")?)?),
        DistQuery::Mean => nominal(dist::mean_variance(&spec)?.0),
        DistQuery::Var => nominal(dist::mean_variance(&spec)?.1),
        DistQuery::Mgf => dist::mgf(&spec, b.need("t")?, cmd.opts.n.unwrap_or(DEFAULT_MGF_TERMS) as usize)?.into(),
        DistQuery::Sample => unreachable!("handled above"),
    };
    let bindings = if format == Format::Plain { Vec::new() } else { b.pairs() };
    let out = render(&[Row { bindings, value: v.value, abs_err: v.abs_err }], format)?;
    if !v.converged {
        return Ok(Fail::Numeric("series did not converge".into()).outcome(out));
    }
    Ok(Outcome::ok(out))
}

/// Parses `argv` (program name first) and runs the selected subcommand.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let result = match &cli.command {
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Table(cmd) => cmd_table(cmd),
        Command::Check(cmd) => cmd_check(cmd),
        Command::Dist(cmd) => cmd_dist(cmd),
    };
    result.unwrap_or_else(|e| e.outcome(String::new()))
}
