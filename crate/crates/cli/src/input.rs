//! The JSON input format.
//!
//! ```json
//! {"dim": 4,
//!  "d": {"1": [[1.0, 2, 4]], "2": [[-1.0, 1, 4]], "3": [[1.0, 1, 2]]},
//!  "J": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
//!  "metric": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}
//! ```
//!
//! `d.k` lists the terms `coeff · e^{ij}` of `de^k` with `i < j`. All indices
//! are 1-based. `J` and `Jminus` are given as rows; column `b` holds the
//! coordinates of `J e_b`. `metric` is the Gram matrix. `Jminus` and
//! `tolerance` are optional, and so are `J` and `metric` (together).

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use skt_core::{Endomorphism, KForm, LieAlgebra};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub algebra: LieAlgebra,
    pub j: Option<Endomorphism>,
    pub j_minus: Option<Endomorphism>,
    pub metric: Option<DMatrix<f64>>,
    pub tolerance: Option<f64>,
}

fn invalid(at: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{at}: {msg}"))
}

fn number(v: &Value, at: &str) -> Result<f64, CliError> {
    let x = v.as_f64().ok_or_else(|| invalid(at, "expected a number"))?;
    if !x.is_finite() {
        return Err(invalid(at, "number is not finite"));
    }
    Ok(x)
}

fn index(v: &Value, n: usize, at: &str) -> Result<usize, CliError> {
    let i = v.as_u64().ok_or_else(|| invalid(at, "expected a positive integer index"))? as usize;
    if i == 0 || i > n {
        return Err(invalid(at, format!("index {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

fn square(v: &Value, n: usize, at: &str) -> Result<DMatrix<f64>, CliError> {
    let rows = v.as_array().ok_or_else(|| invalid(at, "expected an array of rows"))?;
    if rows.len() != n {
        return Err(invalid(at, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::zeros(n, n);
    for (a, row) in rows.iter().enumerate() {
        let at_row = format!("{at}[{}]", a + 1);
        let row = row.as_array().ok_or_else(|| invalid(&at_row, "expected an array"))?;
        if row.len() != n {
            return Err(invalid(&at_row, format!("expected {n} entries, found {}", row.len())));
        }
        for (b, x) in row.iter().enumerate() {
            m[(a, b)] = number(x, &format!("{at}[{}][{}]", a + 1, b + 1))?;
        }
    }
    Ok(m)
}

fn complex_structure(v: &Value, n: usize, at: &str, tol: f64) -> Result<Endomorphism, CliError> {
    if n % 2 == 1 {
        return Err(invalid(at, format!("a complex structure needs even dimension, dim is {n}")));
    }
    let j = Endomorphism::new(square(v, n, at)?).map_err(|e| invalid(at, e))?;
    let defect = j.almost_complex_defect();
    if defect > tol {
        return Err(invalid(at, format!("J^2 != -id (defect {defect:.3e})")));
    }
    Ok(j)
}

impl Input {
    /// Parses and validates; `tol` decides the `J² = -id` and metric checks.
    pub fn from_json(text: &str, tol: f64) -> Result<Input, CliError> {
        let v: Value = serde_json::from_str(text).map_err(|e| invalid("input", format!("malformed JSON: {e}")))?;
        Input::from_value(&v, tol)
    }

    pub fn from_value(v: &Value, tol: f64) -> Result<Input, CliError> {
        let obj = v.as_object().ok_or_else(|| invalid("input", "expected a JSON object"))?;
        for key in obj.keys() {
            if !["dim", "d", "J", "Jminus", "metric", "tolerance"].contains(&key.as_str()) {
                return Err(invalid(key, "unknown field"));
            }
        }
        let n = obj
            .get("dim")
            .ok_or_else(|| invalid("dim", "missing"))?
            .as_u64()
            .filter(|&n| n > 0)
            .ok_or_else(|| invalid("dim", "expected a positive integer"))? as usize;
        let tolerance = match obj.get("tolerance") {
            None => None,
            Some(t) => {
                let t = number(t, "tolerance")?;
                if t <= 0.0 {
                    return Err(invalid("tolerance", "must be positive"));
                }
                Some(t)
            }
        };
        let d = obj.get("d").ok_or_else(|| invalid("d", "missing"))?;
        let d = d.as_object().ok_or_else(|| invalid("d", "expected an object keyed by 1..=dim"))?;
        let mut terms: Vec<Vec<(f64, Vec<usize>)>> = vec![Vec::new(); n];
        for (key, list) in d {
            let at = format!("d.{key}");
            let k = key
                .parse::<usize>()
                .ok()
                .filter(|k| (1..=n).contains(k))
                .ok_or_else(|| invalid(&at, format!("key must be an integer in 1..={n}")))?;
            let list = list.as_array().ok_or_else(|| invalid(&at, "expected an array of [coeff, i, j]"))?;
            for (t, term) in list.iter().enumerate() {
                let at = format!("{at}[{}]", t + 1);
                let term = term.as_array().filter(|a| a.len() == 3).ok_or_else(|| invalid(&at, "expected [coeff, i, j]"))?;
                let c = number(&term[0], &at)?;
                let i = index(&term[1], n, &at)?;
                let j = index(&term[2], n, &at)?;
                if i >= j {
                    return Err(invalid(&at, format!("indices must satisfy i < j, got ({}, {})", i + 1, j + 1)));
                }
                terms[k - 1].push((c, vec![i, j]));
            }
        }
        let differentials = terms
            .into_iter()
            .map(|t| KForm::from_terms(n, 2, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid("d", e))?;
        let algebra = LieAlgebra::from_differentials(differentials).map_err(|e| invalid("d", e))?;
        let j = obj.get("J").map(|v| complex_structure(v, n, "J", tol)).transpose()?;
        let j_minus = obj.get("Jminus").map(|v| complex_structure(v, n, "Jminus", tol)).transpose()?;
        let metric = obj.get("metric").map(|v| square(v, n, "metric")).transpose()?;
        if j.is_some() != metric.is_some() {
            return Err(invalid(if j.is_some() { "metric" } else { "J" }, "J and metric must be given together"));
        }
        if j_minus.is_some() && j.is_none() {
            return Err(invalid("Jminus", "requires J and metric"));
        }
        if let Some(g) = &metric {
            let asym = (g - g.transpose()).abs().max();
            if asym > tol {
                return Err(invalid("metric", format!("not symmetric (defect {asym:.3e})")));
            }
            let min = g.clone().symmetric_eigen().eigenvalues.min();
            if min <= tol {
                return Err(invalid("metric", format!("not positive definite (min eigenvalue {min:.3e})")));
            }
        }
        Ok(Input { algebra, j, j_minus, metric, tolerance })
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Canonical form: sorted keys, every `d.k` present, terms in
    /// lexicographic order of `(i, j)`.
    pub fn to_value(&self) -> Value {
        let n = self.dim();
        let mut d = Map::new();
        for (k, f) in self.algebra.differentials().iter().enumerate() {
            let terms: Vec<Value> = f.terms().map(|(idx, c)| json!([c, idx[0] + 1, idx[1] + 1])).collect();
            d.insert((k + 1).to_string(), Value::Array(terms));
        }
        let rows = |m: &DMatrix<f64>| -> Value { (0..n).map(|a| (0..n).map(|b| m[(a, b)]).collect::<Vec<_>>()).collect() };
        let mut obj = Map::new();
        obj.insert("dim".into(), json!(n));
        obj.insert("d".into(), Value::Object(d));
        if let Some(j) = &self.j {
            obj.insert("J".into(), rows(j.matrix()));
        }
        if let Some(j) = &self.j_minus {
            obj.insert("Jminus".into(), rows(j.matrix()));
        }
        if let Some(g) = &self.metric {
            obj.insert("metric".into(), rows(g));
        }
        if let Some(t) = self.tolerance {
            obj.insert("tolerance".into(), json!(t));
        }
        Value::Object(obj)
    }

    pub fn canonical_string(&self) -> String {
        serde_json::to_string(&self.to_value()).expect("values are finite")
    }

    /// `sha256:` followed by the hex digest of the canonical serialization.
    pub fn digest(&self) -> String {
        let bytes = Sha256::digest(self.canonical_string().as_bytes());
        let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}
