//! The `veq` command line: parse a problem file, rewrite it into
//! operator-linear form, and certify rewrites and operator identities
//! numerically.
//!
//! [`run`] does all the work and returns the exit code with the captured
//! output, so the binary is a thin wrapper and tests can call it directly.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use veq_core::dsl::{self, ParseError, ParseOptions, Problem};
use veq_core::quad::{self, Assignment, CheckReport, Evaluable, Oracle};
use veq_core::{linearize, to_operated, CoefFn, EvalError, OperatedExpr, OperatedMonomial, TensorExpr};

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const TWIST: i32 = 3;
    pub const DEPTH_CAP: i32 = 4;
    pub const CHECK_FAILED: i32 = 5;
    pub const NUMERIC: i32 = 6;
}

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] veq_core::Error),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Parse { .. } | CliError::Usage(_) => exit::PARSE,
            CliError::Core(veq_core::Error::MissingTwist { .. }) => exit::TWIST,
            CliError::Core(veq_core::Error::DepthCap { .. }) => exit::DEPTH_CAP,
            CliError::Core(veq_core::Error::Eval(_)) | CliError::Eval(_) => exit::NUMERIC,
            CliError::Core(veq_core::Error::Invalid(_)) => exit::PARSE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "veq", version, about = "Normalize and check integral equations with separable Volterra operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite the equation into operator-linear normal form.
    Linearize(RunConfig),
    /// Compare the equation numerically with its normal form (or its claim).
    Verify(RunConfig),
    /// Check the matching twisted Rota-Baxter identity for the declared operators.
    CheckMtrba(RunConfig),
    /// Evaluate the equation (and claim) for given unknowns.
    Eval(RunConfig),
    /// Print the parsed equation.
    Render(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Grid,
    Naive,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Problem file.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long)]
    pub json: bool,
    /// Relative tolerance (default 1e-6 for verify, 1e-7 for check-mtrba).
    #[arg(long, value_parser = positive)]
    pub tol: Option<f64>,
    /// Seed for sample points, pool assignment and parameter values.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the normal form with the original operators P instead of their
    /// conjugates Int_P.
    #[arg(long)]
    pub twisted: bool,
    #[arg(long, value_enum, default_value_t = OracleArg::Grid)]
    pub oracle: OracleArg,
    /// Skip the sampled zero-freeness check of kernels and reciprocals.
    #[arg(long)]
    pub assume_nonzero: bool,
    #[arg(long, default_value_t = veq_core::shuffle::DEFAULT_DEPTH_CAP)]
    pub depth_cap: usize,
    /// Evaluation point (repeatable); default is seeded sample points.
    #[arg(long = "at", allow_negative_numbers = true)]
    pub at: Vec<f64>,
    /// Number of seeded sample points when no --at is given.
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    /// Fix an unknown, e.g. `--assign y=x^2` (repeatable).
    #[arg(long)]
    pub assign: Vec<String>,
    /// check-mtrba: also check the Reynolds identity.
    #[arg(long)]
    pub reynolds: bool,
    /// check-mtrba: also check the conjugate operator identities.
    #[arg(long)]
    pub lemma: bool,
}

impl RunConfig {
    fn oracle(&self) -> Oracle {
        match self.oracle {
            OracleArg::Grid => Oracle::Grid,
            OracleArg::Naive => Oracle::Naive,
        }
    }

    fn wants_json(&self) -> bool {
        self.json || self.format == Format::Json
    }

    fn output(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line; `VEQ_SEED` in the environment overrides `--seed`.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_seed(args, std::env::var("VEQ_SEED").ok().as_deref())
}

pub fn run_with_seed<I, T>(args: I, seed_override: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::PARSE } else { exit::OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let (name, mut cfg) = match cli.command {
        Command::Linearize(c) => ("linearize", c),
        Command::Verify(c) => ("verify", c),
        Command::CheckMtrba(c) => ("check-mtrba", c),
        Command::Eval(c) => ("eval", c),
        Command::Render(c) => ("render", c),
    };
    if let Some(s) = seed_override {
        match s.trim().parse() {
            Ok(seed) => cfg.seed = seed,
            Err(_) => {
                return Outcome { code: exit::PARSE, stdout: String::new(), stderr: format!("error: VEQ_SEED=`{s}` is not an integer\n") }
            }
        }
    }
    let result = match name {
        "linearize" => cmd_linearize(&cfg),
        "verify" => cmd_verify(&cfg),
        "check-mtrba" => cmd_check_mtrba(&cfg),
        "eval" => cmd_eval(&cfg),
        _ => cmd_render(&cfg),
    };
    match result {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn load(cfg: &RunConfig) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(&cfg.file).map_err(|source| CliError::Io { path: cfg.file.clone(), source })?;
    dsl::parse_with(&text, ParseOptions { assume_nonzero: cfg.assume_nonzero })
        .map_err(|source| CliError::Parse { path: cfg.file.display().to_string(), source })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn render_operated(e: &OperatedExpr, format: Format) -> String {
    match format {
        Format::Text => format!("{}\n", dsl::render_expr(e)),
        Format::Latex => format!("{}\n", dsl::render_latex(e)),
        Format::Json => pretty(&dsl::expr_to_json(e)),
    }
}

/// The normal form of the problem's equation.
pub fn normal_form(problem: &Problem, cfg: &RunConfig) -> Result<TensorExpr, CliError> {
    Ok(linearize(&problem.expr, cfg.depth_cap)?)
}

pub fn cmd_linearize(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let problem = load(cfg)?;
    let t = normal_form(&problem, cfg)?;
    let e = to_operated(&t, cfg.twisted)?;
    let out = match cfg.output() {
        Format::Json => pretty(&json!({
            "problem": problem.name,
            "words": dsl::tensor_to_json(&t),
            "operated": dsl::expr_to_json(&e),
        })),
        f => render_operated(&e, f),
    };
    Ok((exit::OK, out))
}

pub fn cmd_render(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let problem = load(cfg)?;
    Ok((exit::OK, render_operated(&problem.expr, cfg.output())))
}

fn has_fractional_powers(e: &OperatedExpr) -> bool {
    fn mono(m: &OperatedMonomial) -> bool {
        m.head.mono.has_fractional_exponent() || m.brackets.iter().any(|(_, b)| mono(b))
    }
    e.iter().any(|(m, _)| mono(m))
}

fn fixed_assignments(problem: &Problem, cfg: &RunConfig) -> Result<Assignment, CliError> {
    let mut fixed = Assignment::new();
    for spec in &cfg.assign {
        let (name, expr) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--assign expects NAME=EXPR, got `{spec}`")))?;
        let name = name.trim();
        if !problem.unknowns.iter().any(|u| &**u == name) {
            return Err(CliError::Usage(format!("--assign: `{name}` is not a declared unknown")));
        }
        let f = problem
            .parse_coef(expr)
            .map_err(|source| CliError::Parse { path: "--assign".into(), source })?;
        fixed.insert(Arc::from(name), f);
    }
    Ok(fixed)
}

/// Assignments of the unknowns: explicit `--assign` values, and for the
/// rest one assignment per pool function. The first free unknown walks the
/// pool in order, the others draw from it with the seeded generator.
pub fn assignment_pool(problem: &Problem, cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Assignment>, CliError> {
    let fixed = fixed_assignments(problem, cfg)?;
    let free: Vec<&Arc<str>> = problem.unknowns.iter().filter(|u| !fixed.contains_key(*u)).collect();
    if free.is_empty() {
        return Ok(vec![fixed]);
    }
    let fractional = has_fractional_powers(&problem.expr) || problem.claim.as_ref().is_some_and(has_fractional_powers);
    let funcs = if fractional {
        quad::positive_pool(&problem.interval, &problem.env(cfg.seed))
    } else {
        quad::test_pool()
    };
    if funcs.is_empty() {
        return Err(CliError::Usage("no test function is positive on the interval; use --assign".into()));
    }
    let mut pool = Vec::with_capacity(funcs.len());
    for f in &funcs {
        let mut sigma = fixed.clone();
        sigma.insert(free[0].clone(), f.clone());
        for u in &free[1..] {
            sigma.insert((*u).clone(), funcs[rng.random_range(0..funcs.len())].clone());
        }
        pool.push(sigma);
    }
    Ok(pool)
}

fn sample_points(problem: &Problem, cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, CliError> {
    if cfg.at.is_empty() {
        return Ok(problem.interval.sample_points(cfg.points.max(1), rng));
    }
    for &x in &cfg.at {
        if !problem.interval.contains_interior(x) {
            return Err(CliError::Usage(format!("--at {x} is not inside the interval")));
        }
    }
    Ok(cfg.at.clone())
}

fn assignment_text(sigma: &Assignment) -> String {
    let parts: Vec<String> = sigma.iter().map(|(u, f)| format!("{u} = {}", dsl::render_coef(f))).collect();
    parts.join(", ")
}

fn assignment_json(sigma: &Assignment) -> Value {
    let map: BTreeMap<String, String> = sigma.iter().map(|(u, f)| (u.to_string(), dsl::render_coef(f))).collect();
    json!(map)
}

fn report_text(out: &mut String, title: &str, report: &CheckReport, pool: &[Assignment]) {
    let verdict = if report.pass { "pass" } else { "FAIL" };
    let _ = writeln!(
        out,
        "{title}: {verdict} ({} evaluations, max abs {:.3e}, max rel {:.3e}, tol {:.1e})",
        report.residuals.len(),
        report.max_abs,
        report.max_rel,
        report.tol
    );
    let bad: Vec<_> = report.residuals.iter().filter(|r| r.error.is_some() || r.rel > report.tol).collect();
    for r in bad.iter().take(10) {
        let who = pool.get(r.assignment).map(assignment_text).unwrap_or_default();
        match &r.error {
            Some(e) => {
                let _ = writeln!(out, "  x = {}, {who}: error: {e}", r.x);
            }
            None => {
                let _ = writeln!(out, "  x = {}, {who}: lhs {} vs rhs {} (abs {:.3e}, rel {:.3e})", r.x, r.lhs, r.rhs, r.abs, r.rel);
            }
        }
    }
    if bad.len() > 10 {
        let _ = writeln!(out, "  ... {} more", bad.len() - 10);
    }
}

fn report_json(report: &CheckReport, pool: &[Assignment]) -> Value {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    v["assignments"] = Value::Array(pool.iter().map(assignment_json).collect());
    v
}

fn verdict(reports: &[&CheckReport]) -> i32 {
    if reports.iter().all(|r| r.pass) {
        exit::OK
    } else if reports.iter().any(|r| r.first_error().is_some()) && reports.iter().all(|r| r.residuals.iter().all(|x| x.error.is_some() || x.rel <= r.tol)) {
        exit::NUMERIC
    } else {
        exit::CHECK_FAILED
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let problem = load(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let env = problem.env(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pool = assignment_pool(&problem, cfg, &mut rng)?;
    let xs = sample_points(&problem, cfg, &mut rng)?;
    let normal;
    let (label, rhs): (&str, &dyn Evaluable) = match &problem.claim {
        Some(c) => ("claim", c),
        None => {
            normal = normal_form(&problem, cfg)?;
            ("normal form", &normal)
        }
    };
    let report = quad::check_identity(&problem.expr, rhs, &pool, &xs, tol, &env, cfg.oracle());
    let code = verdict(&[&report]);
    let out = if cfg.wants_json() {
        pretty(&json!({
            "command": "verify",
            "problem": problem.name,
            "compared": ["equation", label],
            "seed": cfg.seed,
            "points": xs,
            "report": report_json(&report, &pool),
        }))
    } else {
        let mut out = String::new();
        if let Some(name) = &problem.name {
            let _ = writeln!(out, "problem: {name}");
        }
        let pts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(out, "points: {}", pts.join(", "));
        let _ = writeln!(out, "assignments: {}", pool.len());
        report_text(&mut out, &format!("equation vs {label}"), &report, &pool);
        out
    };
    Ok((code, out))
}

pub fn cmd_check_mtrba(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let problem = load(cfg)?;
    if problem.ops.is_empty() {
        return Err(CliError::Usage("the problem declares no operators".into()));
    }
    let tol = cfg.tol.unwrap_or(1e-7);
    let env = problem.env(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xs = sample_points(&problem, cfg, &mut rng)?;
    let pool = quad::pair_pool(&quad::test_pool());
    let mut sections = vec![("matching twisted Rota-Baxter", quad::check_mtrba_family(&problem.ops, &pool, &xs, tol, &env, cfg.oracle())?)];
    if cfg.reynolds {
        let reports = problem.ops.iter().map(|op| quad::check_reynolds(op, &pool, &xs, tol, &env));
        sections.push(("Reynolds", CheckReport::merge(reports, tol)));
    }
    if cfg.lemma {
        sections.push(("conjugate operator identities", quad::check_lemma(&problem.ops, &pool, &xs, tol, &env)?));
    }
    let code = verdict(&sections.iter().map(|(_, r)| r).collect::<Vec<_>>());
    let ops: Vec<&str> = problem.ops.iter().map(|o| o.name()).collect();
    let out = if cfg.wants_json() {
        let checks: Vec<Value> = sections
            .iter()
            .map(|(name, r)| {
                let mut v = serde_json::to_value(r).expect("reports serialize");
                v["identity"] = json!(name);
                v
            })
            .collect();
        let pool_json: Vec<Value> = pool.iter().map(assignment_json).collect();
        pretty(&json!({
            "command": "check-mtrba",
            "problem": problem.name,
            "ops": ops,
            "seed": cfg.seed,
            "points": xs,
            "assignments": pool_json,
            "checks": checks,
        }))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "operators: {}", ops.join(", "));
        let pts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(out, "points: {}", pts.join(", "));
        for (name, r) in &sections {
            report_text(&mut out, name, r, &pool);
        }
        out
    };
    Ok((code, out))
}

struct Evaluation {
    label: &'static str,
    text: String,
    closed_form: Option<CoefFn>,
    values: Vec<Result<f64, EvalError>>,
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let problem = load(cfg)?;
    let env = problem.env(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sigma = assignment_pool(&problem, cfg, &mut rng)?.swap_remove(0);
    let xs = sample_points(&problem, cfg, &mut rng)?;
    let mut sides = vec![("equation", &problem.expr)];
    if let Some(c) = &problem.claim {
        sides.push(("claim", c));
    }
    let evals: Vec<Evaluation> = sides
        .into_iter()
        .map(|(label, e)| {
            let closed = e.substitute(&sigma);
            let closed_form = match closed.len() {
                0 => Some(CoefFn::zero()),
                1 => closed.iter().next().filter(|(m, _)| m.is_coefficient()).map(|(m, q)| m.head.coef.scale(q)),
                _ => None,
            };
            let values = xs.iter().map(|&x| e.eval_at(&sigma, x, &env, cfg.oracle())).collect();
            Evaluation { label, text: dsl::render_expr(e), closed_form, values }
        })
        .collect();
    let code = if evals.iter().any(|e| e.values.iter().any(|v| v.is_err())) { exit::NUMERIC } else { exit::OK };
    let value_json = |v: &Result<f64, EvalError>| match v {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let out = if cfg.wants_json() {
        let sides: Vec<Value> = evals
            .iter()
            .map(|e| {
                json!({
                    "side": e.label,
                    "expr": e.text,
                    "closed_form": e.closed_form.as_ref().map(dsl::render_coef),
                    "values": e.values.iter().map(value_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        pretty(&json!({
            "command": "eval",
            "problem": problem.name,
            "assignment": assignment_json(&sigma),
            "points": xs,
            "sides": sides,
        }))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "with {}", assignment_text(&sigma));
        for e in &evals {
            let _ = writeln!(out, "{}: {}", e.label, e.text);
            if let Some(c) = &e.closed_form {
                let _ = writeln!(out, "  = {}", dsl::render_coef(c));
            }
            for (x, v) in xs.iter().zip(&e.values) {
                match v {
                    Ok(v) => {
                        let _ = writeln!(out, "  x = {x}: {v}");
                    }
                    Err(err) => {
                        let _ = writeln!(out, "  x = {x}: error: {err}");
                    }
                }
            }
        }
        if let [a, b] = &evals[..] {
            for (i, x) in xs.iter().enumerate() {
                if let (Ok(l), Ok(r)) = (&a.values[i], &b.values[i]) {
                    let _ = writeln!(out, "residual at x = {x}: {}", l - r);
                }
            }
        }
        out
    };
    Ok((code, out))
}
