//! `skt`: verification of Hermitian structures on Lie algebras from the
//! command line.
//!
//! Exit codes: `0` every check passed, `1` a mathematical check failed,
//! `2` invalid input (malformed JSON, schema violations, inadmissible
//! catalog parameters, bad arguments).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use skt_core::catalog::{self, Instance, Params};
use skt_core::connections::{self, Connection};
use skt_core::hermitian::{ComplexStructure, HermitianStructure, Metric};
use skt_core::taming::SearchConfig;
use skt_core::tangent::{self, lift_endomorphism};
use skt_core::{Error, DEFAULT_TOLERANCE};

pub mod input;
pub mod report;

use input::Input;
use report::{analyze, render_text};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Exit code 2.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Exit code 1.
    #[error("check failed: {0}")]
    Math(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Math(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::NotAlmostComplex { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Inadmissible { .. }
            | Error::UnknownEntry(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "skt", version, about = "Hermitian structures on Lie algebras: SKT, generalized Kahler, taming forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Iteration budget shared by all restarts.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full analysis of an input file.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Skip the Kahler and taming searches.
        #[arg(long)]
        no_search: bool,
        #[arg(long)]
        text: bool,
    },
    /// Catalog of example algebras.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Emit the tangent algebra as a new input file.
    Tangent {
        /// Input file or catalog id.
        target: String,
        /// `canonical`, `family:a12,a13,a14,a34` or `family:` followed by the
        /// twelve entries of the rows `a_1, a_2, a_4`.
        #[arg(long, default_value = "canonical")]
        connection: String,
        /// Catalog parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Beta solver plus Kahler and Hermitian-symplectic searches.
    Taming {
        target: String,
        #[arg(long)]
        params: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        text: bool,
    },
    /// Combined report over catalog ids and input files (all catalog
    /// entries when no target is given).
    Report {
        targets: Vec<String>,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogCommand {
    /// List entries with parameters and admissibility conditions.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Build an entry and check it against its expected values.
    Verify {
        id: String,
        #[arg(long)]
        params: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        text: bool,
    },
}

impl SearchArgs {
    fn config(&self, tol: f64) -> SearchConfig {
        SearchConfig { budget: self.budget, restarts: self.restarts.max(1), seed: self.seed, tol }
    }
}

/// Tolerance from `SKT_TOL`, then the input file, then the default.
fn tolerance(env: Option<&str>, file: Option<f64>) -> Result<f64, CliError> {
    match env {
        Some(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => Err(CliError::Invalid(format!("SKT_TOL: expected a positive number, got `{s}`"))),
        },
        None => Ok(file.unwrap_or(DEFAULT_TOLERANCE)),
    }
}

fn parse_params(text: Option<&str>) -> Result<Params, CliError> {
    let Some(text) = text else {
        return Ok(Params::new());
    };
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("--params: malformed JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| CliError::Invalid("--params: expected a JSON object".into()))?;
    obj.iter()
        .map(|(k, x)| {
            x.as_f64()
                .map(|f| (k.clone(), f))
                .ok_or_else(|| CliError::Invalid(format!("--params.{k}: expected a number")))
        })
        .collect()
}

fn read_input(path: &Path, env_tol: Option<&str>) -> Result<(Input, f64), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    // the file's own tolerance is only known after parsing
    let probe: Option<f64> = serde_json::from_str::<Value>(&text).ok().and_then(|v| v.get("tolerance")?.as_f64());
    let tol = tolerance(env_tol, probe.filter(|t| *t > 0.0))?;
    let input = Input::from_json(&text, tol).map_err(|e| match e {
        CliError::Invalid(m) => CliError::Invalid(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((input, tol))
}

pub fn instance_input(inst: &Instance) -> Input {
    Input {
        algebra: inst.algebra().clone(),
        j: Some(inst.complex_structure().endomorphism().clone()),
        j_minus: inst.j_minus.as_ref().map(|j| j.endomorphism().clone()),
        metric: Some(inst.metric().matrix().clone()),
        tolerance: None,
    }
}

/// A catalog id (when no file of that name exists) or an input file.
fn resolve_target(target: &str, params: Option<&str>, env_tol: Option<&str>) -> Result<(Input, f64), CliError> {
    if catalog::info(target).is_ok() && !Path::new(target).exists() {
        let tol = tolerance(env_tol, None)?;
        let inst = catalog::build(target, &parse_params(params)?, tol)?;
        return Ok((instance_input(&inst), tol));
    }
    if params.is_some() {
        return Err(CliError::Invalid("--params only applies to catalog ids".into()));
    }
    read_input(Path::new(target), env_tol)
}

fn hermitian_parts(input: &Input, tol: f64) -> Result<(ComplexStructure, Metric), CliError> {
    match (&input.j, &input.metric) {
        (Some(j), Some(g)) => Ok((ComplexStructure::new(j.clone(), tol)?, Metric::new(g.clone(), tol)?)),
        _ => Err(CliError::Invalid("input has no J and metric".into())),
    }
}

fn parse_connection(arg: &str, input: &Input, tol: f64) -> Result<Connection, CliError> {
    if arg == "canonical" {
        let (j, g) = hermitian_parts(input, tol)?;
        return Ok(connections::canonical_flat_connection(&input.algebra, &j, &g, tol)?);
    }
    let Some(list) = arg.strip_prefix("family:") else {
        return Err(CliError::Invalid(format!("--connection: expected `canonical` or `family:...`, got `{arg}`")));
    };
    let values = list
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("--connection: `{s}` is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    if input.dim() != 4 {
        return Err(CliError::Invalid("--connection family:... needs a 4-dimensional base".into()));
    }
    match values.len() {
        4 => Ok(connections::family_g1(values[0], values[1], values[2], values[3])),
        12 => {
            let row = |r: usize| [values[4 * r], values[4 * r + 1], values[4 * r + 2], values[4 * r + 3]];
            Ok(connections::family_g3([row(0), row(1), row(2)], tol).connection)
        }
        n => Err(CliError::Invalid(format!("--connection: expected 4 or 12 values, got {n}"))),
    }
}

/// The tangent algebra as an input file, with warnings for what could not
/// be lifted.
pub fn tangent_input(input: &Input, d: &Connection, tol: f64) -> Result<(Input, Vec<String>), CliError> {
    let mut warnings = Vec::new();
    let (j, g) = match hermitian_parts(input, tol) {
        Ok(p) => (Some(p.0), Some(p.1)),
        Err(_) => (None, None),
    };
    let (total, lifted) = match (&j, &g) {
        (Some(j), Some(g)) => {
            let t = tangent::build_tangent(&input.algebra, d, j, g, tol)?;
            warnings.extend(t.warnings.iter().cloned());
            let lifted = t.hermitian.as_ref().map(|h: &HermitianStructure| {
                (h.complex_structure().endomorphism().clone(), h.metric().matrix().clone())
            });
            (t.total, lifted)
        }
        _ => {
            warnings.push("input has no Hermitian structure; emitting the raw semidirect product".into());
            (tangent::semidirect_product(&input.algebra, d, tol)?, None)
        }
    };
    let j_minus = match (&input.j_minus, &lifted) {
        (Some(jm), Some(_)) => {
            let defect = d.commutation_defect(jm);
            if defect <= tol {
                Some(lift_endomorphism(jm))
            } else {
                warnings.push(format!("D does not commute with Jminus (defect {defect:.3e}); Jminus dropped"));
                None
            }
        }
        _ => None,
    };
    let (jt, gt) = match lifted {
        Some((j, g)) => (Some(j), Some(g)),
        None => (None, None),
    };
    Ok((Input { algebra: total, j: jt, j_minus, metric: gt, tolerance: input.tolerance }, warnings))
}

pub fn catalog_verify(id: &str, params: &Params, tol: f64, search: &SearchConfig) -> Result<(Value, bool), CliError> {
    let inst = catalog::build(id, params, tol)?;
    let r = catalog::verify_instance(&inst, tol, search)?;
    let analysis = analyze(&instance_input(&inst), tol, None)?;
    let items: Vec<Value> = r
        .items
        .iter()
        .map(|i| json!({"name": i.name, "passed": i.passed, "residual": i.value, "detail": i.detail}))
        .collect();
    let passed = r.passed() && analysis.passed;
    let info = catalog::info(id)?;
    Ok((
        json!({
            "entry": id,
            "name": info.name,
            "params": inst.params,
            "items": items,
            "analysis": analysis.value,
            "passed": passed,
        }),
        passed,
    ))
}

fn emit(out: &mut dyn Write, v: &Value, text: bool) -> Result<(), CliError> {
    let s = if text { render_text(v) } else { serde_json::to_string_pretty(v).expect("serializable") + "\n" };
    out.write_all(s.as_bytes()).map_err(|e| CliError::Invalid(format!("cannot write output: {e}")))
}

fn execute(cli: Cli, env_tol: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let verdict = |passed: bool| if passed { 0 } else { 1 };
    match cli.command {
        Command::Verify { file, search, no_search, text } => {
            let (input, tol) = read_input(&file, env_tol)?;
            let cfg = search.config(tol);
            let a = analyze(&input, tol, (!no_search).then_some(&cfg))?;
            emit(out, &a.value, text)?;
            Ok(verdict(a.passed))
        }
        Command::Catalog(CatalogCommand::List { json }) => {
            if json {
                let list: Vec<Value> = catalog::entries()
                    .iter()
                    .map(|e| {
                        let params: Map<String, Value> = e.params.iter().map(|(p, d)| (p.to_string(), json!(d))).collect();
                        json!({"id": e.id, "name": e.name, "defaults": params, "conditions": e.conditions})
                    })
                    .collect();
                emit(out, &Value::Array(list), false)?;
            } else {
                for e in catalog::entries() {
                    let params: Vec<String> = e.params.iter().map(|(p, d)| format!("{p}={d}")).collect();
                    let line = format!("{:<8} {}\n         params: {}\n         conditions: {}\n", e.id, e.name, if params.is_empty() { "none".into() } else { params.join(", ") }, if e.conditions.is_empty() { "none" } else { e.conditions });
                    out.write_all(line.as_bytes()).map_err(|e| CliError::Invalid(e.to_string()))?;
                }
            }
            Ok(0)
        }
        Command::Catalog(CatalogCommand::Verify { id, params, search, text }) => {
            let tol = tolerance(env_tol, None)?;
            let (v, passed) = catalog_verify(&id, &parse_params(params.as_deref())?, tol, &search.config(tol))?;
            emit(out, &v, text)?;
            Ok(verdict(passed))
        }
        Command::Tangent { target, connection, params, output } => {
            let (input, tol) = resolve_target(&target, params.as_deref(), env_tol)?;
            if input.algebra.jacobi_defect() > tol {
                return Err(CliError::Math(format!("base fails Jacobi (defect {:.3e})", input.algebra.jacobi_defect())));
            }
            let d = parse_connection(&connection, &input, tol)?;
            let (t, warnings) = tangent_input(&input, &d, tol)?;
            for w in warnings {
                writeln!(err, "warning: {w}").ok();
            }
            let text = serde_json::to_string_pretty(&t.to_value()).expect("serializable") + "\n";
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?,
                None => out.write_all(text.as_bytes()).map_err(|e| CliError::Invalid(e.to_string()))?,
            }
            Ok(0)
        }
        Command::Taming { target, params, search, text } => {
            let (input, tol) = resolve_target(&target, params.as_deref(), env_tol)?;
            let a = analyze(&input, tol, Some(&search.config(tol)))?;
            let v = &a.value;
            let mut m = Map::new();
            for key in ["input_digest", "structure_equations", "tolerance", "seed", "version", "checks", "taming"] {
                if let Some(x) = v.get(key) {
                    m.insert(key.into(), x.clone());
                }
            }
            m.insert("passed".into(), json!(a.passed));
            emit(out, &Value::Object(m), text)?;
            Ok(verdict(a.passed))
        }
        Command::Report { targets, json: _, text } => {
            let tol = tolerance(env_tol, None)?;
            let cfg = SearchConfig { tol, ..SearchConfig::default() };
            let targets = if targets.is_empty() { catalog::IDS.iter().map(|s| s.to_string()).collect() } else { targets };
            let mut entries = Vec::new();
            let mut all = true;
            for t in &targets {
                let (v, passed) = if catalog::info(t).is_ok() && !Path::new(t).exists() {
                    catalog_verify(t, &Params::new(), tol, &cfg)?
                } else {
                    let (input, ftol) = read_input(Path::new(t), env_tol)?;
                    let a = analyze(&input, ftol, Some(&cfg))?;
                    (json!({"file": t, "analysis": a.value, "passed": a.passed}), a.passed)
                };
                all &= passed;
                entries.push(v);
            }
            if text {
                for (t, e) in targets.iter().zip(&entries) {
                    let head = format!("== {t}: {}\n", if e["passed"] == json!(true) { "PASS" } else { "FAIL" });
                    out.write_all(head.as_bytes()).map_err(|e| CliError::Invalid(e.to_string()))?;
                    emit(out, e, true)?;
                }
            } else {
                emit(out, &json!({"entries": entries, "passed": all, "tolerance": tol, "version": env!("CARGO_PKG_VERSION")}), false)?;
            }
            Ok(verdict(all))
        }
    }
}

/// Runs the command line with an explicit `SKT_TOL` value and returns the
/// exit code.
pub fn run_with_env<I, T>(args: I, env_tol: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                out.write_all(rendered.as_bytes()).ok();
            } else {
                err.write_all(rendered.as_bytes()).ok();
            }
            return code;
        }
    };
    match execute(cli, env_tol, out, err) {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "{e}").ok();
            e.code()
        }
    }
}

/// Runs the command line, reading `SKT_TOL` from the environment.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var("SKT_TOL").ok();
    run_with_env(args, env.as_deref(), out, err)
}
