//! Analysis reports as JSON values, plus a plain-text rendering.

use nalgebra::DVector;
use serde_json::{json, Map, Value};

use skt_core::hermitian::{generalized_kahler_check, ComplexStructure, HermitianStructure, Metric};
use skt_core::taming::{self, SearchConfig, SearchReport};
use skt_core::{KForm, LieAlgebra};

use crate::input::Input;
use crate::CliError;

pub fn check(passed: bool, residual: f64) -> Value {
    json!({"passed": passed, "residual": residual})
}

pub fn form_json(f: &KForm, tol: f64) -> Value {
    let f = f.pruned(tol);
    let terms: Vec<Value> = f
        .terms()
        .map(|(idx, c)| {
            let mut t = vec![json!(c)];
            t.extend(idx.iter().map(|i| json!(i + 1)));
            Value::Array(t)
        })
        .collect();
    json!({"terms": terms, "text": f.to_string(), "norm": f.norm()})
}

/// The basis triple with the largest Jacobi residual.
fn jacobi_witness(l: &LieAlgebra) -> [usize; 3] {
    let n = l.dim();
    let e = |a: usize| DVector::from_fn(n, |r, _| if r == a { 1.0 } else { 0.0 });
    let mut worst = (0.0, [1, 2, 3]);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (x, y, z) = (e(i), e(j), e(k));
                let s = l.bracket(&x, &l.bracket(&y, &z)) + l.bracket(&y, &l.bracket(&z, &x)) + l.bracket(&z, &l.bracket(&x, &y));
                if s.amax() > worst.0 {
                    worst = (s.amax(), [i + 1, j + 1, k + 1]);
                }
            }
        }
    }
    worst.1
}

pub fn fingerprint_json(l: &LieAlgebra, tol: f64) -> Result<Value, CliError> {
    let fp = l.fingerprint(tol)?;
    Ok(json!({
        "derived_series": fp.derived_series,
        "lower_central_series": fp.lower_central_series,
        "center_dim": fp.center_dim,
        "solvable_step": fp.solvable_step,
        "nilpotent_step": fp.nilpotent_step,
        "unimodular": fp.unimodular,
        "unimodularity_defect": l.unimodularity_defect(),
        "betti": fp.betti,
    }))
}

pub fn search_json(r: &SearchReport, tol: f64) -> Value {
    let found = r.found.as_ref().map(|t| {
        json!({"form": form_json(&t.omega, tol), "d_norm": t.d_norm, "min_eigenvalue": t.min_eigenvalue})
    });
    json!({
        "found": found,
        "confidence": r.confidence.label(),
        "best_objective": r.best_objective,
        "restart_objectives": r.restart_objectives,
        "iterations": r.iterations,
        "subspace_dim": r.subspace_dim,
        "certificate": r.certificate.as_ref().map(|c| c.iter().copied().collect::<Vec<_>>()),
        "budget": r.config.budget,
        "restarts": r.config.restarts,
        "seed": r.config.seed,
    })
}

/// β solution and taming form for a Hermitian structure, or `null` when
/// the `∂ω = ∂̄β` system has no solution.
pub fn beta_json(h: &HermitianStructure, tol: f64) -> Result<Value, CliError> {
    let Some(sol) = taming::solve_beta(h, tol)? else {
        return Ok(Value::Null);
    };
    let t = taming::assemble_taming(h, &sol, tol)?;
    let coefficients: Vec<Value> = sol.coefficients.iter().map(|c| json!([c.re, c.im])).collect();
    Ok(json!({
        "coefficients": coefficients,
        "residual": sol.residual,
        "taming_form": form_json(&t.omega, tol),
        "sign": t.sign,
        "d_norm": t.d_norm,
        "min_eigenvalue": t.min_eigenvalue,
        "metric_min_eigenvalue": h.metric().min_eigenvalue(),
    }))
}

pub struct Analysis {
    pub value: Value,
    pub passed: bool,
}

/// Full pipeline: structure checks, classification with certificates,
/// fingerprint and (optionally) the feasibility searches.
pub fn analyze(input: &Input, tol: f64, search: Option<&SearchConfig>) -> Result<Analysis, CliError> {
    let l = &input.algebra;
    let mut checks = Map::new();
    let mut out = Map::new();
    out.insert("input_digest".into(), json!(input.digest()));
    out.insert("dim".into(), json!(l.dim()));
    out.insert("structure_equations".into(), json!(l.structure_equations("e")));
    out.insert("tolerance".into(), json!(tol));
    out.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    out.insert("seed".into(), json!(search.map(|s| s.seed)));

    let defect = l.jacobi_defect();
    let mut jacobi = check(defect <= tol, defect);
    if defect > tol {
        jacobi["witness"] = json!(jacobi_witness(l));
    }
    checks.insert("jacobi".into(), jacobi);
    if defect > tol {
        out.insert("checks".into(), Value::Object(checks));
        out.insert("passed".into(), json!(false));
        return Ok(Analysis { value: Value::Object(out), passed: false });
    }
    out.insert("fingerprint".into(), fingerprint_json(l, tol)?);

    if let (Some(jm), Some(gm)) = (&input.j, &input.metric) {
        let j = ComplexStructure::new(jm.clone(), tol)?;
        let g = Metric::new(gm.clone(), tol)?;
        let nij = j.nijenhuis_norm(l);
        let compat = g.compatibility_defect(&j);
        checks.insert("integrability".into(), check(nij <= tol, nij));
        checks.insert("compatibility".into(), check(compat <= tol, compat));
        if nij <= tol && compat <= tol {
            let h = HermitianStructure::new(l.clone(), j.clone(), g.clone(), tol)?;
            let class = h.classify(tol)?;
            let dc = h.dc_identity_residual(tol)?;
            let paths = h.bismut_torsion().try_add(&class.torsion)?.norm();
            let bismut = h.bismut_defects(&h.bismut_connection()).max();
            checks.insert("dc_identity".into(), check(dc <= tol, dc));
            checks.insert("torsion_paths".into(), check(paths <= tol, paths));
            checks.insert("bismut_connection".into(), check(bismut <= tol, bismut));
            checks.insert("ddbar_paths".into(), check(class.paths_agree, class.ddbar_norm));
            out.insert(
                "classification".into(),
                json!({
                    "kind": class.kind.label(),
                    "d_omega": form_json(&class.d_omega, tol),
                    "torsion": form_json(&class.torsion, tol),
                    "d_torsion": form_json(&class.d_torsion, tol),
                    "ddbar_omega_norm": class.ddbar_norm,
                }),
            );
            if let Some(jm_minus) = &input.j_minus {
                let j_minus = ComplexStructure::new(jm_minus.clone(), tol)?;
                let gk = generalized_kahler_check(l, &j, &j_minus, &g, tol)?;
                let residual = gk.torsion_sum_norm.unwrap_or(f64::NAN);
                let mut item = check(gk.holds(), residual);
                item["failures"] = json!(gk.failures);
                checks.insert("generalized_kahler".into(), item);
            }
            let mut tam = Map::new();
            tam.insert("beta".into(), beta_json(&h, tol)?);
            if let Some(cfg) = search {
                tam.insert("kahler_search".into(), search_json(&taming::kahler_search(l, &j, cfg)?, tol));
                tam.insert(
                    "hermitian_symplectic_search".into(),
                    search_json(&taming::hermitian_symplectic_search(l, &j, cfg)?, tol),
                );
            }
            out.insert("taming".into(), Value::Object(tam));
        }
    }
    let passed = checks.values().all(|c| c["passed"] == json!(true));
    out.insert("checks".into(), Value::Object(checks));
    out.insert("passed".into(), json!(passed));
    Ok(Analysis { value: Value::Object(out), passed })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) if m.contains_key("text") && m.contains_key("terms") => {
            out.push_str(&format!("{prefix} = {}\n", scalar(&m["text"])));
        }
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            out.push_str(&format!("{prefix} = [{}]\n", items.join(", ")));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{}]", i + 1), x, out);
            }
        }
        _ => out.push_str(&format!("{prefix} = {}\n", scalar(v))),
    }
}

/// Checks first as `PASS`/`FAIL` lines, then every other leaf as `path = value`.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    if let Some(checks) = v.get("checks").and_then(Value::as_object) {
        for (name, c) in checks {
            let verdict = if c["passed"] == json!(true) { "PASS" } else { "FAIL" };
            out.push_str(&format!("{verdict}  {name:<22} residual {}\n", scalar(&c["residual"])));
        }
    }
    if let Some(Value::Array(items)) = v.get("items") {
        for c in items {
            let verdict = if c["passed"] == json!(true) { "PASS" } else { "FAIL" };
            out.push_str(&format!("{verdict}  {:<26} {}\n", scalar(&c["name"]), scalar(&c["detail"])));
        }
    }
    if let Value::Object(m) = v {
        for (k, x) in m {
            if k != "checks" && k != "items" {
                flatten(k, x, &mut out);
            }
        }
    }
    out
}
