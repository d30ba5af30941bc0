//! The `mkgraph` command line. [`run`] is the whole program minus process exit,
//! so it can be driven from tests.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    bernstein_probe, dong_condition_probe, fit_gradient_bound, heinz_check, salavessa_check,
    stokes_check, unit_ball_constants, CheckOptions, QuadratureSpec, Sampling, Scheme, Verdict,
};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{
    hyperbolic_angle, induced_metric, point_report, unit_normal, Catalog, CausalType,
    GraphSurface, DEFAULT_LIGHTLIKE_TOLERANCE,
};
use crate::solvers::{solve_dirichlet_cmc, solve_radial_cmc, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "mkgraph", version, about = "Mean curvature checks for graphs in Lorentz-Minkowski space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Causal type at a point
    Classify(PointArgs),
    /// Mean curvature, tilt and causal type at a point
    Curvature(PointArgs),
    /// Hyperbolic angle and unit normal at a space-like point
    Angle(PointArgs),
    /// Induced metric and its determinant at a point
    Metric(PointArgs),
    /// Integral of nH over the ball against the boundary flux
    Stokes(CheckArgs),
    /// inf |H| <= M R^(2k-1) under the gradient bound
    Heinz(HeinzArgs),
    /// min |H| bounded by the boundary-to-volume ratio
    Salavessa(CheckArgs),
    /// Heinz ceiling with k = 1/2 - eps over growing radii
    Bernstein(BernsteinArgs),
    /// Growth of 1/sqrt(1 - |grad psi|^2) relative to r
    Dong(ProbeArgs),
    /// Smallest M with tilt <= M |u|^(2k) on a ball
    FitBound(FitArgs),
    /// Radial constant mean curvature profile
    SolveRadial(RadialArgs),
    /// Dirichlet problem for constant mean curvature on a disk
    SolveDirichlet(DirichletArgs),
    /// Closed-form surfaces
    Catalog(CatalogArgs),
    /// Volume of the unit ball and area of the unit sphere
    Constants(ConstantsArgs),
}

#[derive(Args, Debug, Clone)]
struct SurfaceArgs {
    /// Catalog entry: hyperboloid, hyperplane, translation, lightlike_plane
    #[arg(long)]
    surface: Option<String>,
    /// Height function in u1..un
    #[arg(long)]
    expr: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Mean curvature of the hyperboloid
    #[arg(long = "H", allow_negative_numbers = true)]
    h: Option<f64>,
    /// Slope vector of the hyperplane
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,
    /// Offset of the hyperplane
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Profile h(u1) of the translation surface
    #[arg(long = "h-expr")]
    h_expr: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    /// key=value file supplying any flag; the command line wins
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct NumericArgs {
    /// Absolute tolerance of the checks
    #[arg(long, default_value_t = crate::analysis::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Width of the light-like band
    #[arg(long, default_value_t = DEFAULT_LIGHTLIKE_TOLERANCE)]
    tau: f64,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Points per axis (tensor-polar) or sample count (monte-carlo)
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampling lattice points per axis for sup/inf estimates
    #[arg(long = "per-axis")]
    per_axis: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    TensorPolar,
    MonteCarlo,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    point: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_LIGHTLIKE_TOLERANCE)]
    tau: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long = "R")]
    r: f64,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct HeinzArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long = "R")]
    r: f64,
    #[arg(long = "M")]
    m: f64,
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long = "R")]
    r: f64,
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct BernsteinArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long = "R-list", value_delimiter = ',')]
    r_list: Vec<f64>,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long = "R-list", value_delimiter = ',')]
    r_list: Vec<f64>,
    #[command(flatten)]
    numeric: NumericArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct RadialArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "H")]
    h: f64,
    #[arg(long = "r-max")]
    r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct DirichletArgs {
    #[arg(long = "H", allow_negative_numbers = true)]
    h: f64,
    #[arg(long = "R")]
    r: f64,
    /// Boundary data as a function of u1, u2, evaluated at grid nodes outside the open disk;
    /// `hyperboloid` stands for the hyperboloid with the given H
    #[arg(long)]
    boundary: String,
    #[arg(long, default_value_t = 32)]
    m: usize,
    #[arg(long = "newton-tol", default_value_t = 1e-10)]
    newton_tol: f64,
    #[arg(long = "max-iters", default_value_t = 50)]
    max_iters: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    out: OutputArgs,
}

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Why a command did not succeed, short of a usage error.
enum Failure {
    Usage(Error),
    /// Exit 1 with this JSON body.
    Negative(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

struct Report {
    body: String,
    passed: bool,
}

impl Report {
    fn json<T: Serialize>(value: &T, passed: bool) -> Self {
        Report {
            body: serde_json::to_string_pretty(value).expect("reports serialize") + "\n",
            passed,
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Syntax { .. } => "syntax",
        Error::VariableOutOfRange { .. } => "variable-out-of-range",
        Error::Arity { .. } => "arity",
        Error::Domain { .. } => "domain",
        Error::LightLike { .. } => "light-like",
        Error::NotSpaceLike { .. } => "not-space-like",
        Error::MixedCausalType { .. } => "mixed-causal-type",
        Error::InvalidParameter(_) => "invalid-parameter",
        Error::UnboundedFit(_) => "unbounded-fit",
        Error::Hypothesis { .. } => "hypothesis",
        Error::CausalBreakdown { .. } => "causal-breakdown",
        Error::NonConvergence { .. } => "non-convergence",
        Error::Singular(_) => "singular",
        Error::Io(_) => "io",
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": error_kind(e), "message": e.to_string() });
    match e {
        Error::Syntax { position, .. } | Error::VariableOutOfRange { position, .. } => {
            v["position"] = json!(position);
        }
        _ => {
            if let Some(loc) = e.location() {
                v["location"] = json!(loc);
            }
        }
    }
    v
}

fn hypothesis_failure(check: &str, e: &Error) -> Failure {
    Failure::Negative(json!({
        "check": check,
        "outcome": "hypothesis-failure",
        "reason": e.to_string(),
        "location": e.location(),
    }))
}

/// Check errors that mean "hypothesis not met" become exit 1, the rest exit 2.
fn classify_check_error(check: &str, e: Error) -> Failure {
    if e.is_hypothesis_failure() {
        hypothesis_failure(check, &e)
    } else {
        Failure::Usage(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(Error::InvalidParameter(msg.into()))
}

impl SurfaceArgs {
    fn build(&self) -> Result<GraphSurface> {
        match (&self.surface, &self.expr) {
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "give exactly one of --surface and --expr".into(),
            )),
            (None, None) => Err(Error::InvalidParameter(
                "a surface is required: --surface NAME or --expr TEXT".into(),
            )),
            (None, Some(text)) => {
                let n = self
                    .n
                    .ok_or_else(|| Error::InvalidParameter("--expr needs --n".into()))?;
                GraphSurface::parse(text, n)
            }
            (Some(name), None) => self.catalog(name)?.build(),
        }
    }

    fn catalog(&self, name: &str) -> Result<Catalog> {
        let need_n = || {
            self.n
                .ok_or_else(|| Error::InvalidParameter(format!("--surface {name} needs --n")))
        };
        match name {
            "hyperboloid" => Ok(Catalog::Hyperboloid {
                n: need_n()?,
                h: self
                    .h
                    .ok_or_else(|| Error::InvalidParameter("hyperboloid needs --H".into()))?,
            }),
            "hyperplane" => {
                let a = self
                    .a
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("hyperplane needs --a".into()))?;
                Ok(Catalog::Hyperplane {
                    n: self.n.unwrap_or(a.len()),
                    a,
                    b: self.b.unwrap_or(0.0),
                })
            }
            "translation" => Ok(Catalog::Translation {
                n: self.n.unwrap_or(2),
                h: self.h_expr.clone().unwrap_or_else(|| "exp(u1)".into()),
            }),
            "lightlike_plane" | "lightlike-plane" => Ok(Catalog::LightlikePlane { n: need_n()? }),
            other => Err(Error::InvalidParameter(format!(
                "unknown catalog surface `{other}`, expected one of {:?}",
                Catalog::names()
            ))),
        }
    }
}

impl NumericArgs {
    fn options(&self, n: usize) -> Result<CheckOptions> {
        if !(self.tol >= 0.0) || !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need --tol >= 0 and --tau > 0, got {} and {}",
                self.tol, self.tau
            )));
        }
        let quadrature = match (self.scheme, self.resolution) {
            (None, None) => None,
            (scheme, resolution) => {
                let default = QuadratureSpec::default_for(n);
                let scheme = match scheme {
                    Some(SchemeArg::TensorPolar) => Scheme::TensorPolar,
                    Some(SchemeArg::MonteCarlo) => Scheme::MonteCarlo,
                    None => default.scheme,
                };
                let q = QuadratureSpec {
                    scheme,
                    resolution: resolution.unwrap_or(match scheme {
                        Scheme::TensorPolar if default.scheme == Scheme::TensorPolar => default.resolution,
                        Scheme::TensorPolar => 64,
                        Scheme::MonteCarlo => 200_000,
                    }),
                    seed: self.seed,
                };
                q.validate(n)?;
                Some(q)
            }
        };
        let quadrature = quadrature.or_else(|| {
            (self.seed != 0).then(|| QuadratureSpec {
                seed: self.seed,
                ..QuadratureSpec::default_for(n)
            })
        });
        Ok(CheckOptions {
            tolerance: self.tol,
            tau: self.tau,
            sampling: self.per_axis.map(Sampling::new),
            quadrature,
        })
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("--R-list is required".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "radii must be positive and increasing".into(),
        ));
    }
    Ok(())
}

fn require_json(out: &OutputArgs) -> std::result::Result<(), Failure> {
    if out.format == Format::Csv {
        return Err(usage("this subcommand only writes JSON"));
    }
    Ok(())
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn execute(command: &Command) -> std::result::Result<Report, Failure> {
    match command {
        Command::Classify(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let r = point_report(&s, &a.point, a.tau)?;
            Ok(Report::json(
                &json!({ "point": r.point, "grad_norm": r.grad_norm, "causal": r.causal }),
                true,
            ))
        }
        Command::Curvature(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let r = point_report(&s, &a.point, a.tau)?;
            if r.causal == CausalType::LightLike {
                return Err(Error::LightLike { quantity: "mean curvature", point: a.point.clone() }.into());
            }
            Ok(Report::json(&r, true))
        }
        Command::Angle(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let theta = hyperbolic_angle(&s, &a.point)?;
            let normal = unit_normal(&s, &a.point)?;
            Ok(Report::json(
                &json!({
                    "point": a.point,
                    "theta": theta,
                    "sinh_theta": theta.sinh(),
                    "cosh_theta": theta.cosh(),
                    "unit_normal": normal,
                }),
                true,
            ))
        }
        Command::Metric(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let m = induced_metric(&s, &a.point)?;
            Ok(Report::json(
                &json!({ "point": a.point, "g": m.g, "det": m.det, "causal": m.causal(a.tau) }),
                true,
            ))
        }
        Command::Stokes(a) | Command::Salavessa(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let opts = a.numeric.options(s.n())?;
            let (name, result) = match command {
                Command::Stokes(_) => ("stokes", stokes_check(&s, a.r, &opts)),
                _ => ("salavessa", salavessa_check(&s, a.r, &opts)),
            };
            let report = result.map_err(|e| classify_check_error(name, e))?;
            let passed = report.passed;
            Ok(Report::json(&report, passed))
        }
        Command::Heinz(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let opts = a.numeric.options(s.n())?;
            let report = heinz_check(&s, a.r, a.m, a.k, &opts).map_err(|e| classify_check_error("heinz", e))?;
            let passed = report.passed;
            Ok(Report::json(&report, passed))
        }
        Command::FitBound(a) => {
            require_json(&a.out)?;
            let s = a.surface.build()?;
            let opts = a.numeric.options(s.n())?;
            let fit = fit_gradient_bound(&s, a.r, a.k, &opts).map_err(|e| classify_check_error("fit-bound", e))?;
            let valid = fit.valid;
            Ok(Report::json(&fit, valid))
        }
        Command::Bernstein(a) => {
            check_radii(&a.r_list)?;
            let s = a.surface.build()?;
            let opts = a.numeric.options(s.n())?;
            let probe = bernstein_probe(&s, a.eps, &a.r_list, &opts)?;
            let passed = probe.verdict == Verdict::ConsistentWithVanishing;
            match a.out.format {
                Format::Json => Ok(Report::json(&probe, passed)),
                Format::Csv => Ok(Report {
                    body: csv_table(
                        &["R", "M_R", "alpha_R", "ceiling"],
                        probe.rows.iter().map(|r| vec![r.radius, r.m, r.alpha, r.ceiling]),
                    )?,
                    passed,
                }),
            }
        }
        Command::Dong(a) => {
            check_radii(&a.r_list)?;
            let s = a.surface.build()?;
            let opts = a.numeric.options(s.n())?;
            let probe = dong_condition_probe(&s, &a.r_list, &opts)?;
            let passed = probe.verdict == Verdict::ConsistentWithVanishing;
            match a.out.format {
                Format::Json => Ok(Report::json(&probe, passed)),
                Format::Csv => Ok(Report {
                    body: csv_table(
                        &["R", "sup_inv_width", "ratio", "max_abs_h"],
                        probe.rows.iter().map(|r| vec![r.radius, r.sup_inv_width, r.ratio, r.max_abs_h]),
                    )?,
                    passed,
                }),
            }
        }
        Command::SolveRadial(a) => {
            let p = solve_radial_cmc(a.n, a.h, a.r_max, a.step)?;
            match a.out.format {
                Format::Json => Ok(Report::json(&p, true)),
                Format::Csv => {
                    let mut buf = Vec::new();
                    p.write_csv(&mut buf)?;
                    Ok(Report { body: String::from_utf8(buf).expect("csv output is UTF-8"), passed: true })
                }
            }
        }
        Command::SolveDirichlet(a) => {
            let boundary = if a.boundary == "hyperboloid" {
                Catalog::Hyperboloid { n: 2, h: a.h }.build()?.psi().clone()
            } else {
                Expression::parse(&a.boundary, 2)?
            };
            let config = SolverConfig {
                newton_tol: a.newton_tol,
                max_iters: a.max_iters,
                ..SolverConfig::default()
            };
            let result = solve_dirichlet_cmc(a.h, a.r, |x, y| boundary.evaluate(&[x, y]), a.m, config);
            let sol = match result {
                Ok(sol) => sol,
                Err(e @ (Error::CausalBreakdown { .. } | Error::NonConvergence { .. })) => {
                    let history = match &e {
                        Error::NonConvergence { history } => Some(history.clone()),
                        _ => None,
                    };
                    return Err(Failure::Negative(json!({
                        "check": "solve-dirichlet",
                        "outcome": "solver-failure",
                        "reason": e.to_string(),
                        "location": e.location(),
                        "residual_history": history,
                    })));
                }
                Err(e) => return Err(e.into()),
            };
            match a.out.format {
                Format::Json => Ok(Report::json(&sol.header(), true)),
                Format::Csv => {
                    let mut buf = Vec::new();
                    sol.write_csv(&mut buf)?;
                    Ok(Report { body: String::from_utf8(buf).expect("csv output is UTF-8"), passed: true })
                }
            }
        }
        Command::Catalog(a) => {
            require_json(&a.out)?;
            if a.surface.surface.is_none() && a.surface.expr.is_none() {
                return Ok(Report::json(&json!({ "entries": Catalog::names() }), true));
            }
            if a.surface.expr.is_some() {
                return Err(usage("catalog takes --surface, not --expr"));
            }
            let s = a.surface.build()?;
            let reference = s.reference().expect("catalog surfaces carry a reference");
            Ok(Report::json(
                &json!({
                    "name": reference.name,
                    "n": s.n(),
                    "expression": s.psi().render(),
                    "mean_curvature": reference.mean_curvature,
                    "causal": reference.causal,
                }),
                true,
            ))
        }
        Command::Constants(a) => {
            require_json(&a.out)?;
            let (v, area) = unit_ball_constants(a.n)?;
            Ok(Report::json(&json!({ "V_n": v, "A_{n-1}": area }), true))
        }
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Classify(a) | Command::Curvature(a) | Command::Angle(a) | Command::Metric(a) => &a.out,
        Command::Stokes(a) | Command::Salavessa(a) => &a.out,
        Command::Heinz(a) => &a.out,
        Command::FitBound(a) => &a.out,
        Command::Bernstein(a) => &a.out,
        Command::Dong(a) => &a.out,
        Command::SolveRadial(a) => &a.out,
        Command::SolveDirichlet(a) => &a.out,
        Command::Catalog(a) => &a.out,
        Command::Constants(a) => &a.out,
    }
}

/// Turn `key = value` lines into flags; blank lines and `#` comments are skipped.
fn config_flags(text: &str) -> std::result::Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            continue;
        }
        flags.push(format!("--{key}"));
        flags.push(value.trim().to_string());
    }
    Ok(flags)
}

/// Insert the flags of any `--config` file right after the subcommand, so
/// later command-line occurrences override them.
fn expand_config(args: Vec<String>) -> std::result::Result<Vec<String>, String> {
    let mut path = None;
    for (i, arg) in args.iter().enumerate() {
        if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if arg == "--config" {
            path = args.get(i + 1).cloned();
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let flags = config_flags(&text)?;
    let at = args
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(args.len());
    let mut out = args[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn usage_outcome(e: &Error) -> Outcome {
    Outcome {
        code: 2,
        stdout: serde_json::to_string_pretty(&error_json(e)).expect("errors serialize") + "\n",
        stderr: format!("error: {e}\n"),
    }
}

/// Parse `args` (program name first), run the subcommand and collect its output.
///
/// Exit codes: 0 success or passed check, 1 failed check or hypothesis, 2 usage
/// or domain error.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(msg) => return usage_outcome(&Error::InvalidParameter(msg)),
    };
    let command = Cli::command().mut_subcommands(|sub| sub.args_override_self(true));
    let cli = match command
        .try_get_matches_from(&args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    let (code, body) = match execute(&cli.command) {
        Ok(report) => (if report.passed { 0 } else { 1 }, report.body),
        Err(Failure::Negative(v)) => (1, serde_json::to_string_pretty(&v).expect("serializes") + "\n"),
        Err(Failure::Usage(e)) => return usage_outcome(&e),
    };
    match &output_args(&cli.command).output {
        Some(path) => match std::fs::write(path, &body) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => usage_outcome(&Error::from(e)),
        },
        None => Outcome { code, stdout: body, stderr: String::new() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(line: &str) -> Outcome {
        run(std::iter::once("mkgraph").chain(line.split_whitespace()))
    }

    fn parse(o: &Outcome) -> Value {
        serde_json::from_str(&o.stdout).unwrap()
    }

    #[test]
    fn heinz_equality() {
        let o = run_str("heinz --surface hyperboloid --n 2 --H 1 --R 3 --M 1 --k 0.5");
        assert_eq!(o.code, 0, "{o:?}");
        let v = parse(&o);
        assert!((v["lhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((v["rhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn constants_and_curvature() {
        let v = parse(&run_str("constants --n 3"));
        assert!((v["V_n"].as_f64().unwrap() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
        assert!((v["A_{n-1}"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-14);

        let o = run(["mkgraph", "curvature", "--expr", "u2 + exp(u1)", "--n", "2", "--point", "0,0"]);
        assert_eq!(o.code, 0);
        let v = parse(&o);
        assert_eq!(v["causal"], "TimeLike");
        assert_eq!(v["mean_curvature"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn parse_errors_exit_2_with_position() {
        let o = run(["mkgraph", "classify", "--expr", "u1 + * u2", "--n", "2", "--point", "0,0"]);
        assert_eq!(o.code, 2);
        assert_eq!(parse(&o)["position"], 6);
        let o = run_str("classify --point 0,0");
        assert_eq!(o.code, 2);
        let o = run_str("heinz --surface hyperboloid --n 2 --H 1");
        assert_eq!(o.code, 2);
    }

    #[test]
    fn hypothesis_failure_is_distinguished() {
        let o = run_str("heinz --surface hyperboloid --n 2 --H 1 --R 3 --M 0.5 --k 0.5");
        assert_eq!(o.code, 1);
        let v = parse(&o);
        assert_eq!(v["outcome"], "hypothesis-failure");
        assert!(v["location"].is_array());
    }

    #[test]
    fn negative_point_coordinates() {
        let o = run_str("classify --surface hyperplane --a -0.5,0.2 --point -1,-2");
        assert_eq!(o.code, 0, "{o:?}");
        assert_eq!(parse(&o)["causal"], "SpaceLike");
    }

    #[test]
    fn config_file_is_overridden_by_command_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# heinz setup\nsurface = hyperboloid\nn=2\nH=1\nR=3\nM=1\nk=0.5\n").unwrap();
        let cfg = path.to_str().unwrap();
        let o = run(["mkgraph", "heinz", "--config", cfg]);
        assert_eq!(o.code, 0, "{o:?}");
        let o = run(["mkgraph", "heinz", "--config", cfg, "--M", "0.5"]);
        assert_eq!(o.code, 1, "{o:?}");
    }

    #[test]
    fn csv_tables() {
        let o = run_str("solve-radial --n 2 --H 1 --r-max 0.002 --step 0.001 --format csv");
        assert_eq!(o.code, 0);
        assert!(o.stdout.starts_with("r,psi,psi_prime\n"));
        let o = run_str("bernstein --surface hyperplane --a 0.6,0 --eps 0.5 --R-list 1,10,100 --per-axis 21 --format csv");
        assert_eq!(o.code, 0, "{o:?}");
        let mut lines = o.stdout.lines();
        assert_eq!(lines.next(), Some("R,M_R,alpha_R,ceiling"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert!((first[1] - 0.75).abs() < 1e-14 && first[2] == 0.0);
    }

    #[test]
    fn output_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let o = run(["mkgraph", "constants", "--n", "2", "--output", path.to_str().unwrap()]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.is_empty());
        assert!(std::fs::read_to_string(path).unwrap().contains("V_n"));
    }
}
