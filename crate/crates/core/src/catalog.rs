//! Parameterized example algebras with their Hermitian data and the values
//! the verification pipeline is expected to reproduce.
//!
//! | id        | algebra                         | parameters              |
//! |-----------|---------------------------------|-------------------------|
//! | `g1`      | `(e^24, -e^14, e^12, 0)`        | none                    |
//! | `g2`      | Inoue surface `S^0` algebra      | `a, b ≠ 0`              |
//! | `g3`      | `(0, 0, e^12, 0)`               | none                    |
//! | `r3x`     | `R × r_{3,0}`                   | `u1 ≥ 0, w1 > 0`        |
//! | `affxaff` | `aff_R × aff_R`                 | `x1, x3, y2, u1, u3, v2, t` |
//! | `r4p`     | `r'_{4,λ,0}`                    | `x1 > 0, y1 ≥ 0, y3 ≠ 0` |
//! | `d42`     | `d_{4,2}`                       | `x1 > 0, y1, u1`        |
//! | `d4p`     | `d'_{4,λ}`                      | `q, r, k, z3, t`        |
//! | `d4half`  | `d_{4,1/2}`                     | `q, r, k, t`            |
//!
//! All entries use the standard complex structure `J e_1 = e_2, J e_3 = e_4`
//! (for `g2` also `J₋` with `J₋ e_3 = -e_4`).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hermitian::{adjoint_defects, generalized_kahler_check, ComplexStructure, HermitianStructure, Metric, MetricKind};
use crate::liealg::LieAlgebra;
use crate::linalg;
use crate::multilinear::{Endomorphism, KForm};
use crate::taming::{self, SearchConfig};

pub type Params = BTreeMap<String, f64>;

pub const IDS: [&str; 9] = ["g1", "g2", "g3", "r3x", "affxaff", "r4p", "d42", "d4p", "d4half"];

/// The entries carrying a closed-form `β` coefficient and a Kähler form.
pub const FAMILIES: [&str; 6] = ["r3x", "affxaff", "r4p", "d42", "d4p", "d4half"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryInfo {
    pub id: &'static str,
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub conditions: &'static str,
}

const ENTRIES: [EntryInfo; 9] = [
    EntryInfo { id: "g1", name: "secondary Kodaira surface algebra (e^24, -e^14, e^12, 0)", params: &[], conditions: "" },
    EntryInfo {
        id: "g2",
        name: "Inoue surface S^0 algebra (a e^14 + b e^24, -b e^14 + a e^24, -2a e^34, 0)",
        params: &[("a", 1.0), ("b", 1.0)],
        conditions: "a != 0, b != 0",
    },
    EntryInfo { id: "g3", name: "primary Kodaira surface algebra (0, 0, e^12, 0)", params: &[], conditions: "" },
    EntryInfo {
        id: "r3x",
        name: "R x r_{3,0}",
        params: &[("u1", 1.0), ("w1", 1.0)],
        conditions: "w1 > 0, u1 >= 0",
    },
    EntryInfo {
        id: "affxaff",
        name: "aff_R x aff_R",
        params: &[("x1", 1.0), ("x3", 1.0), ("y2", 2.0), ("u1", 1.0), ("u3", 2.0), ("v2", 3.0), ("t", 0.0)],
        conditions: "four quadratic constraints, de^2 and de^4 independent, x3 + v2 != 0, |t| < 1",
    },
    EntryInfo {
        id: "r4p",
        name: "r'_{4,lambda,0}",
        params: &[("x1", 1.0), ("y1", 2.0), ("y3", 1.0)],
        conditions: "x1 > 0, y1 >= 0, y3 != 0",
    },
    EntryInfo {
        id: "d42",
        name: "d_{4,2}",
        params: &[("x1", 1.0), ("y1", 3.0), ("u1", 6.0)],
        conditions: "x1 > 0",
    },
    EntryInfo {
        id: "d4p",
        name: "d'_{4,lambda}",
        params: &[("q", 0.0), ("r", 1.0), ("k", 1.0), ("z3", 1.0), ("t", 0.0)],
        conditions: "q^2 + r^2 = 1, r > 0, k != 0, z3 != 0, |t| < 1",
    },
    EntryInfo {
        id: "d4half",
        name: "d_{4,1/2}",
        params: &[("q", 0.0), ("r", 1.0), ("k", 1.0), ("t", 0.0)],
        conditions: "q^2 + r^2 = 1, r > 0, k != 0, |t| < 1",
    },
];

pub fn entries() -> &'static [EntryInfo] {
    &ENTRIES
}

pub fn info(id: &str) -> Result<&'static EntryInfo> {
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

/// Default parameters overridden by `given`; unknown names are rejected.
pub fn resolve_params(id: &str, given: &Params) -> Result<Params> {
    let entry = info(id)?;
    for name in given.keys() {
        if !entry.params.iter().any(|(p, _)| p == name) {
            return Err(Error::InvalidInput(format!("entry `{id}` has no parameter `{name}`")));
        }
    }
    for (name, v) in given {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("parameter `{name}` is not finite")));
        }
    }
    Ok(entry
        .params
        .iter()
        .map(|(p, d)| (p.to_string(), given.get(*p).copied().unwrap_or(*d)))
        .collect())
}

/// What the pipeline should find for an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    /// `true` when the metric must be SKT and not Kähler, `false` when SKT
    /// suffices (some family members are Kähler).
    pub strictly_skt: bool,
    pub generalized_kahler: bool,
    pub a: Option<Complex64>,
    pub unimodular: Option<bool>,
    pub b3_zero: bool,
    pub lambda: Option<f64>,
    /// A Kähler form is expected to exist; `false` for `g3`.
    pub kahler: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub params: Params,
    pub hermitian: HermitianStructure,
    pub j_minus: Option<ComplexStructure>,
    pub expected: Expected,
}

impl Instance {
    pub fn algebra(&self) -> &LieAlgebra {
        self.hermitian.algebra()
    }

    pub fn complex_structure(&self) -> &ComplexStructure {
        self.hermitian.complex_structure()
    }

    pub fn metric(&self) -> &Metric {
        self.hermitian.metric()
    }

    fn p(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// The displayed Kähler form of the family with weight `m`, offset `n`
    /// above its lower bound by `slack`, and (for `affxaff`) off-diagonal
    /// weight `p`. `None` when the entry has no such form or the weights
    /// violate its conditions.
    pub fn stated_kahler_form(&self, m: f64, slack: f64, p: f64) -> Option<KForm> {
        if m <= 0.0 || slack <= 0.0 {
            return None;
        }
        let two = |terms: &[(f64, [usize; 2])]| {
            KForm::from_terms(4, 2, terms.iter().map(|(c, i)| (*c, vec![i[0] - 1, i[1] - 1]))).expect("valid indices")
        };
        match self.id.as_str() {
            "r3x" => {
                let (u1, w1) = (self.p("u1"), self.p("w1"));
                let s = (u1 * w1).sqrt();
                let n = m * u1 / w1 + slack;
                Some(two(&[(n, [1, 2]), (m, [3, 4]), (m * s / w1, [1, 4]), (-m * s / w1, [2, 3])]))
            }
            "affxaff" => {
                let (x1, x3, u1, u3) = (self.p("x1"), self.p("x3"), self.p("u1"), self.p("u3"));
                if x3 == 0.0 {
                    return None;
                }
                let n = (m * u1 - p * (u3 - x1)) / x3;
                if n * m <= p * p {
                    return None;
                }
                Some(two(&[(n, [1, 2]), (m, [3, 4]), (p, [1, 4]), (-p, [2, 3])]))
            }
            "r4p" => {
                let (x1, y1, y3) = (self.p("x1"), self.p("y1"), self.p("y3"));
                let nn = x1 * x1 + y3 * y3;
                let n = (m * y1 * (y3 - x1) / nn).max(0.0) + slack;
                let c = m * y1 * y3 / nn;
                let d = m * y1 * x1 / nn;
                Some(two(&[(n, [1, 2]), (m, [3, 4]), (c, [1, 4]), (-c, [2, 3]), (-d, [1, 3]), (-d, [2, 4])]))
            }
            "d42" => {
                let (x1, u1) = (self.p("x1"), self.p("u1"));
                let n = m * 4.0 * u1 * u1 / (9.0 * x1 * x1) + slack;
                let c = m * 2.0 * u1 / (3.0 * x1);
                Some(two(&[(n, [1, 2]), (m, [3, 4]), (c, [1, 4]), (-c, [2, 3])]))
            }
            "d4p" | "d4half" => {
                let (q, r) = (self.p("q"), self.p("r"));
                let c = m * q / r;
                Some(two(&[(m * (1.0 + q * q) / (r * r), [1, 2]), (m, [3, 4]), (c, [1, 4]), (-c, [2, 3])]))
            }
            _ => None,
        }
    }
}

fn inadmissible(id: &str, predicate: &str) -> Error {
    Error::Inadmissible { entry: id.to_string(), predicate: predicate.to_string() }
}

fn form(terms: &[(f64, [usize; 2])]) -> KForm {
    KForm::from_terms(4, 2, terms.iter().map(|(c, i)| (*c, vec![i[0] - 1, i[1] - 1]))).expect("valid indices")
}

fn zero() -> KForm {
    KForm::zero(4, 2)
}

/// `ω = e^12 + e^34 + t(e^13 + e^24)` turned into the metric `g(X,Y) = ω(X,JY)`.
fn metric_from_t(t: f64, j: &ComplexStructure, tol: f64) -> Result<Metric> {
    let omega = form(&[(1.0, [1, 2]), (1.0, [3, 4]), (t, [1, 3]), (t, [2, 4])]);
    Metric::new(omega.to_skew_matrix()? * j.endomorphism().matrix(), tol)
}

fn require(ok: bool, id: &str, predicate: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(inadmissible(id, predicate))
    }
}

/// Residuals of the four `aff × aff` constraints.
pub fn affxaff_constraints(p: &Params) -> [f64; 4] {
    let (x1, x3, y2, u1, u3, v2) = (p["x1"], p["x3"], p["y2"], p["u1"], p["u3"], p["v2"]);
    [
        y2 * x1 - y2 * u3 + v2 * x3 - x3 * x3,
        u1 * v2 - u1 * x3 + u3 * x1 - u3 * u3,
        u3 * x3 - y2 * u1,
        (u1 - x3) * (v2 + x3) - (u3 + x1) * (u3 - y2),
    ]
}

/// Builds an instance after checking the admissibility predicates.
pub fn build(id: &str, given: &Params, tol: f64) -> Result<Instance> {
    let params = resolve_params(id, given)?;
    let p = |n: &str| params[n];
    let j = ComplexStructure::standard(4)?;
    let mut metric = Metric::identity(4);
    let mut j_minus = None;
    let mut expected = Expected {
        strictly_skt: false,
        generalized_kahler: false,
        a: None,
        unimodular: Some(false),
        b3_zero: false,
        lambda: None,
        kahler: Some(true),
    };
    let differentials = match id {
        "g1" => {
            expected.strictly_skt = true;
            expected.unimodular = Some(true);
            expected.kahler = None;
            vec![form(&[(1.0, [2, 4])]), form(&[(-1.0, [1, 4])]), form(&[(1.0, [1, 2])]), zero()]
        }
        "g2" => {
            let (a, b) = (p("a"), p("b"));
            require(a != 0.0, id, "a != 0")?;
            require(b != 0.0, id, "b != 0")?;
            expected.strictly_skt = true;
            expected.generalized_kahler = true;
            expected.unimodular = Some(true);
            expected.kahler = None;
            j_minus = Some(ComplexStructure::new(Endomorphism::block_complex(&[1.0, -1.0]), tol)?);
            vec![
                form(&[(a, [1, 4]), (b, [2, 4])]),
                form(&[(-b, [1, 4]), (a, [2, 4])]),
                form(&[(-2.0 * a, [3, 4])]),
                zero(),
            ]
        }
        "g3" => {
            expected.strictly_skt = true;
            expected.unimodular = Some(true);
            expected.kahler = Some(false);
            vec![zero(), zero(), form(&[(1.0, [1, 2])]), zero()]
        }
        "r3x" => {
            let (u1, w1) = (p("u1"), p("w1"));
            require(w1 > 0.0, id, "w1 > 0")?;
            require(u1 >= 0.0, id, "u1 >= 0")?;
            let s = (u1 * w1).sqrt();
            expected.a = Some(Complex64::new(0.0, s / (2.0 * w1)));
            vec![zero(), zero(), zero(), form(&[(u1, [1, 2]), (s, [1, 4]), (-s, [2, 3]), (w1, [3, 4])])]
        }
        "affxaff" => {
            let (x1, x3, y2, u1, u3, v2, t) = (p("x1"), p("x3"), p("y2"), p("u1"), p("u3"), p("v2"), p("t"));
            let scale = [x1, x3, y2, u1, u3, v2].iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            let names = [
                "y2 x1 - y2 u3 + v2 x3 - x3^2 = 0",
                "u1 v2 - u1 x3 + u3 x1 - u3^2 = 0",
                "u3 x3 - y2 u1 = 0",
                "(u1 - x3)(v2 + x3) - (u3 + x1)(u3 - y2) = 0",
            ];
            for (r, name) in affxaff_constraints(&params).iter().zip(names) {
                require(r.abs() <= tol * scale * scale, id, name)?;
            }
            let pair = DMatrix::from_row_slice(2, 4, &[x1, x3, -x3, y2, u1, u3, -u3, v2]);
            let rank = linalg::numerical_rank(&pair, tol).rank;
            require(rank == 2, id, "de^2 and de^4 linearly independent")?;
            require((x3 + v2).abs() > tol * scale, id, "x3 + v2 != 0")?;
            require(t.abs() < 1.0, id, "|t| < 1")?;
            metric = metric_from_t(t, &j, tol)?;
            expected.a = Some(Complex64::new(-t / 2.0, (u3 - y2) / (2.0 * (x3 + v2))));
            expected.b3_zero = true;
            vec![
                zero(),
                form(&[(x1, [1, 2]), (x3, [1, 4]), (-x3, [2, 3]), (y2, [3, 4])]),
                zero(),
                form(&[(u1, [1, 2]), (u3, [1, 4]), (-u3, [2, 3]), (v2, [3, 4])]),
            ]
        }
        "r4p" => {
            let (x1, y1, y3) = (p("x1"), p("y1"), p("y3"));
            require(x1 > 0.0, id, "x1 > 0")?;
            require(y1 >= 0.0, id, "y1 >= 0")?;
            require(y3 != 0.0, id, "y3 != 0")?;
            let nn = x1 * x1 + y3 * y3;
            expected.a = Some(Complex64::new(x1, y3) * (-y1 / (2.0 * nn)));
            expected.lambda = Some((x1 / y3).abs());
            vec![zero(), form(&[(x1, [1, 2])]), form(&[(y1, [1, 2]), (y3, [1, 4])]), form(&[(-y3, [1, 3])])]
        }
        "d42" => {
            let (x1, y1, u1) = (p("x1"), p("y1"), p("u1"));
            require(x1 > 0.0, id, "x1 > 0")?;
            expected.a = Some(Complex64::new(-y1, u1) / (3.0 * x1));
            vec![
                zero(),
                form(&[(x1, [1, 2])]),
                form(&[(y1, [1, 2]), (-x1 / 2.0, [1, 3])]),
                form(&[(u1, [1, 2]), (x1 / 2.0, [1, 4]), (-x1, [2, 3])]),
            ]
        }
        "d4p" | "d4half" => {
            let (q, r, k, t) = (p("q"), p("r"), p("k"), p("t"));
            let z3 = if id == "d4p" { p("z3") } else { 0.0 };
            require(((q * q + r * r) - 1.0).abs() <= tol, id, "q^2 + r^2 = 1")?;
            require(r > 0.0, id, "r > 0")?;
            require(k != 0.0, id, "k != 0")?;
            if id == "d4p" {
                require(z3 != 0.0, id, "z3 != 0")?;
                expected.lambda = Some((k / (2.0 * z3)).abs());
                expected.b3_zero = true;
            }
            require(t.abs() < 1.0, id, "|t| < 1")?;
            metric = metric_from_t(t, &j, tol)?;
            expected.a = Some(Complex64::new(-t / 2.0, -q / (2.0 * r)));
            vec![
                zero(),
                form(&[(-k * (1.0 + q * q), [1, 2]), (-k * q * r, [1, 4]), (k * q * r, [2, 3]), (-k * r * r, [3, 4])]),
                form(&[(z3 * q / r, [1, 2]), (-k / 2.0, [1, 3]), (z3, [1, 4])]),
                form(&[
                    (q / r * (k * q * q + k / 2.0), [1, 2]),
                    (-z3, [1, 3]),
                    (k * q * q - k / 2.0, [1, 4]),
                    (-k * q * q, [2, 3]),
                    (k * q * r, [3, 4]),
                ]),
            ]
        }
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    let algebra = LieAlgebra::from_differentials(differentials)?;
    let hermitian = HermitianStructure::new(algebra, j, metric, tol)?;
    Ok(Instance { id: id.to_string(), params, hermitian, j_minus, expected })
}

fn signed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let v = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        -v
    } else {
        v
    }
}

/// Random admissible parameters for an entry.
pub fn sample_params<R: Rng + ?Sized>(id: &str, rng: &mut R) -> Result<Params> {
    let mut p = Params::new();
    let mut set = |name: &str, v: f64| {
        p.insert(name.to_string(), v);
    };
    match id {
        "g1" | "g3" => {}
        "g2" => {
            set("a", signed(rng, 0.3, 2.0));
            set("b", signed(rng, 0.3, 2.0));
        }
        "r3x" => {
            set("u1", rng.random_range(0.0..3.0));
            set("w1", rng.random_range(0.2..3.0));
        }
        "affxaff" => loop {
            // every solution found numerically lies on the branch
            // x3 = u1, y2 = u3, v2 = (u1^2 + u3^2 - u3 x1) / u1
            let x1: f64 = rng.random_range(-2.0..2.0);
            let u1 = signed(rng, 0.3, 2.0);
            let u3: f64 = rng.random_range(-2.0..2.0);
            let v2 = (u1 * u1 + u3 * u3 - u3 * x1) / u1;
            let pair = DMatrix::from_row_slice(2, 4, &[x1, u1, -u1, u3, u1, u3, -u3, v2]);
            let sigma = pair.singular_values().min();
            if (u1 + v2).abs() < 0.1 || sigma < 0.05 {
                continue;
            }
            for (n, v) in [("x1", x1), ("x3", u1), ("y2", u3), ("u1", u1), ("u3", u3), ("v2", v2)] {
                p.insert(n.to_string(), v);
            }
            p.insert("t".to_string(), rng.random_range(-0.9..0.9));
            break;
        },
        "r4p" => {
            set("x1", rng.random_range(0.2..3.0));
            set("y1", rng.random_range(0.0..3.0));
            set("y3", signed(rng, 0.2, 3.0));
        }
        "d42" => {
            set("x1", rng.random_range(0.2..3.0));
            set("y1", rng.random_range(-3.0..3.0));
            set("u1", rng.random_range(-3.0..3.0));
        }
        "d4p" | "d4half" => {
            let theta: f64 = rng.random_range(0.05..PI - 0.05);
            set("q", theta.cos());
            set("r", theta.sin());
            set("k", signed(rng, 0.2, 3.0));
            if id == "d4p" {
                set("z3", signed(rng, 0.2, 3.0));
            }
            set("t", rng.random_range(-0.9..0.9));
        }
        other => return Err(Error::UnknownEntry(other.to_string())),
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    /// The number the verdict was based on (a residual, a norm, ...).
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub id: String,
    pub params: Params,
    pub items: Vec<CheckItem>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

struct Items(Vec<CheckItem>);

impl Items {
    fn push(&mut self, name: &str, passed: bool, value: f64, detail: impl Into<String>) {
        self.0.push(CheckItem { name: name.to_string(), passed, value, detail: detail.into() });
    }

    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value <= tol, value, format!("{value:.3e} <= {tol:.1e}"));
    }
}

/// Builds the instance and runs every check that applies to it.
pub fn verify(id: &str, given: &Params, tol: f64) -> Result<VerifyReport> {
    verify_instance(&build(id, given, tol)?, tol, &SearchConfig { tol, ..SearchConfig::default() })
}

pub fn verify_instance(inst: &Instance, tol: f64, search: &SearchConfig) -> Result<VerifyReport> {
    let h = &inst.hermitian;
    let l = inst.algebra();
    let j = inst.complex_structure();
    let mut items = Items(Vec::new());
    items.at_most("jacobi", l.jacobi_defect(), tol);
    items.at_most("integrability", h.nijenhuis_norm(), tol);
    items.at_most("compatibility", inst.metric().compatibility_defect(j), tol);
    let class = h.classify(tol)?;
    let class_ok = if inst.expected.strictly_skt { class.kind == MetricKind::SktNotKahler } else { class.kind.is_skt() };
    let want = if inst.expected.strictly_skt { "SKT-not-Kahler" } else { "SKT" };
    items.push("classification", class_ok, class.d_torsion.norm(), format!("{} (expected {want})", class.kind.label()));
    items.push(
        "ddbar-cross-check",
        class.paths_agree,
        class.ddbar_norm,
        format!("|ddbar w| = {:.3e}", class.ddbar_norm),
    );
    items.at_most("dc-identity", h.dc_identity_residual(tol)?, tol);
    let bismut = h.bismut_torsion();
    items.at_most("bismut-torsion", bismut.try_add(&class.torsion)?.norm(), tol);

    if inst.expected.generalized_kahler {
        let jm = inst.j_minus.as_ref().expect("generalized Kahler entries carry J-");
        let gk = generalized_kahler_check(l, j, jm, inst.metric(), tol)?;
        items.push("generalized-kahler", gk.holds(), gk.torsion_sum_norm.unwrap_or(f64::NAN), gk.failures.join("; "));
        let a = inst.params["a"];
        let target = KForm::basis(4, &[0, 1, 2])?.scale(2.0 * a);
        items.at_most("dc-plus", h.dc_form(h.fundamental_form(), tol)?.distance(&target)?, tol);
    }

    if let Some(a_expected) = inst.expected.a {
        match taming::solve_beta(h, tol)? {
            Some(sol) => {
                let err = (sol.a() - a_expected).norm();
                items.push("beta-coefficient", err <= tol, err, format!("a = {} (closed form {a_expected})", sol.a()));
                let t = taming::assemble_taming(h, &sol, tol)?;
                let g_min = inst.metric().min_eigenvalue();
                items.at_most("taming-closed", t.d_norm, tol);
                items.push(
                    "taming-positive",
                    t.min_eigenvalue >= g_min - tol,
                    t.min_eigenvalue,
                    format!("min eig h = {:.6}, min eig g = {g_min:.6}", t.min_eigenvalue),
                );
            }
            None => items.push("beta-coefficient", false, f64::NAN, "no solution of the beta equation"),
        }
    }

    if let Some(wk) = inst.stated_kahler_form(1.0, 0.5, 0.0) {
        let d = l.ce_differential(&wk)?.norm();
        let min_eig = linalg::min_eigen(&taming::taming_pairing(&wk, j.endomorphism())?).0;
        items.at_most("stated-kahler-closed", d, tol);
        items.push("stated-kahler-positive", min_eig > tol, min_eig, format!("min eig = {min_eig:.4}"));
    }

    match inst.expected.kahler {
        Some(true) => {
            let r = taming::kahler_search(l, j, search)?;
            items.push("kahler-search", r.found.is_some(), r.best_objective, r.confidence.label());
        }
        Some(false) => {
            let r = taming::hermitian_symplectic_search(l, j, search)?;
            items.push(
                "taming-search",
                r.found.is_none(),
                r.best_objective,
                format!("{} (no taming form expected)", r.confidence.label()),
            );
            let k = taming::kahler_search(l, j, search)?;
            items.push("kahler-search", k.found.is_none(), k.best_objective, format!("{} (none expected)", k.confidence.label()));
        }
        None => {}
    }

    let cohomology = l.cohomology(tol)?;
    if inst.expected.b3_zero {
        items.push("b3", cohomology.betti[3] == 0, cohomology.betti[3] as f64, format!("b = {:?}", cohomology.betti));
    }
    if let Some(u) = inst.expected.unimodular {
        let defect = l.unimodularity_defect();
        items.push("unimodular", (defect <= tol) == u, defect, format!("expected {u}"));
        let b4 = cohomology.betti[4];
        items.push("top-betti", b4 == usize::from(u), b4 as f64, format!("b4 = {b4}"));
    }
    if let Some(lambda) = inst.expected.lambda {
        let p = &inst.params;
        let derived = if inst.id == "r4p" { (p["x1"] / p["y3"]).abs() } else { (p["k"] / (2.0 * p["z3"])).abs() };
        items.at_most("lambda", (derived - lambda).abs(), tol);
    }
    let (adj_c, adj_i) = adjoint_defects(l, j, inst.metric());
    items.push("adjoint-inadmissible", adj_c > tol || adj_i > tol, adj_c.max(adj_i), "g is not a complex Lie algebra with bi-invariant metric");
    Ok(VerifyReport { id: inst.id.clone(), params: inst.params.clone(), items: items.0 })
}
