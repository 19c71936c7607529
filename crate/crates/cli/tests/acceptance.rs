//! Acceptance criteria 1-10, one line each.
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines always
//! show up in `cargo test` output. A criterion may be red only through the
//! sub-cases listed in its `known_red` set: those are catalog statements
//! that do not hold. Any other failure makes the run fail.

use std::collections::BTreeSet;
use std::process::Command;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use skt_core::catalog::{self, Params, FAMILIES, IDS};
use skt_core::connections::{self, canonical_flat_connection, family_g1, family_g3};
use skt_core::hermitian::{generalized_kahler_check, random_compatible_metric, ComplexStructure, HermitianStructure, Metric, MetricKind};
use skt_core::linalg::{self, combinations};
use skt_core::taming::{self, SearchConfig};
use skt_core::tangent::{self, build_tangent, lift_endomorphism};
use skt_core::{Error, Endomorphism, KForm, LieAlgebra};

const TOL: f64 = 1e-9;

struct Outcome {
    /// Failed sub-cases, each tagged so it can be matched against `known_red`.
    failures: Vec<(String, String)>,
    summary: String,
    known_red: &'static [&'static str],
}

impl Outcome {
    fn new(known_red: &'static [&'static str]) -> Self {
        Outcome { failures: Vec::new(), summary: String::new(), known_red }
    }

    fn require(&mut self, ok: bool, tag: &str, what: impl Into<String>) {
        if !ok {
            self.failures.push((tag.to_string(), what.into()));
        }
    }

    fn unexpected(&self) -> Vec<&(String, String)> {
        self.failures.iter().filter(|(t, _)| !self.known_red.contains(&t.as_str())).collect()
    }
}

fn e(n: usize, idx: &[usize]) -> KForm {
    KForm::basis(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>()).unwrap()
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn skt() -> std::path::PathBuf {
    env!("CARGO_BIN_EXE_skt").into()
}

fn c1_catalog_soundness() -> Outcome {
    let mut o = Outcome::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for id in IDS {
        for draw in 0..20 {
            let p = catalog::sample_params(id, &mut rng).unwrap();
            let inst = match catalog::build(id, &p, TOL) {
                Ok(i) => i,
                Err(err) => {
                    o.require(false, id, format!("{id} draw {draw}: {err}"));
                    continue;
                }
            };
            let jac = inst.algebra().jacobi_defect();
            let nij = inst.hermitian.nijenhuis_norm();
            let com = inst.metric().compatibility_defect(inst.complex_structure());
            worst = worst.max(jac).max(nij).max(com);
            o.require(jac <= TOL && nij <= TOL && com <= TOL, id, format!("{id} draw {draw}: defects {jac:.2e} {nij:.2e} {com:.2e}"));
            let kind = inst.hermitian.classify(TOL).unwrap().kind;
            let ok = if inst.expected.strictly_skt { kind == MetricKind::SktNotKahler } else { kind.is_skt() };
            o.require(ok, id, format!("{id} draw {draw}: classified {}", kind.label()));
        }
    }
    o.summary = format!("9 entries x 20 draws, worst defect {worst:.1e}");
    o
}

fn c2_tangent_regression() -> Outcome {
    let mut o = Outcome::new(&[]);
    let g1 = catalog::build("g1", &Params::new(), TOL).unwrap();
    let d = canonical_flat_connection(g1.algebra(), g1.complex_structure(), g1.metric(), TOL).unwrap();
    let t = build_tangent(g1.algebra(), &d, g1.complex_structure(), g1.metric(), TOL).unwrap();
    let expected = [
        e(8, &[2, 4]),
        -e(8, &[1, 4]),
        e(8, &[1, 2]),
        KForm::zero(8, 2),
        -e(8, &[4, 6]),
        e(8, &[4, 5]),
        -e(8, &[4, 8]),
        e(8, &[4, 7]),
    ];
    let err = t
        .total
        .differentials()
        .iter()
        .zip(&expected)
        .map(|(a, b)| a.distance(b).unwrap())
        .fold(0.0, f64::max);
    o.require(err <= 1e-12, "equations", format!("coefficient error {err:.2e}"));
    let kind = t.hermitian.as_ref().unwrap().classify(TOL).unwrap().kind;
    o.require(kind.is_skt(), "skt", format!("classified {}", kind.label()));
    let fp = t.total.fingerprint(TOL).unwrap();
    o.require(fp.solvable_step == Some(3), "solvable", format!("solvable step {:?}", fp.solvable_step));
    o.require(fp.unimodular, "unimodular", "not unimodular");

    // the same through the command line: tangent, then verify the emitted file
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tg1.json");
    let status = Command::new(skt()).args(["tangent", "g1", "--connection", "canonical", "-o"]).arg(&file).status().unwrap();
    o.require(status.code() == Some(0), "cli", format!("tangent exit {:?}", status.code()));
    let out = Command::new(skt()).args(["verify", "--no-search"]).arg(&file).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    o.require(out.status.code() == Some(0), "cli", format!("verify exit {:?}", out.status.code()));
    o.require(v["classification"]["kind"] == "SKT-not-Kahler", "cli", format!("cli kind {}", v["classification"]["kind"]));
    o.require(v["fingerprint"]["solvable_step"] == 3, "cli", "cli solvable step");
    o.summary = format!("{} (error {err:.0e}), {}, 3-step solvable, unimodular", t.total.structure_equations("f"), kind.label());
    o
}

fn c3_skt_biconditional() -> Outcome {
    let mut o = Outcome::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut skt_bases, mut other_bases, mut worst) = (0, 0, 0.0_f64);
    for n in 0..60 {
        let id = IDS[n % IDS.len()];
        let p = catalog::sample_params(id, &mut rng).unwrap();
        let inst = catalog::build(id, &p, TOL).unwrap();
        let l = inst.algebra();
        let j = inst.complex_structure();
        o.require(l.fingerprint(TOL).unwrap().solvable_step.is_some(), "solvable", format!("{id} not solvable"));
        let g = if n % 2 == 0 { inst.metric().clone() } else { random_compatible_metric(j, &mut rng) };
        let d = connections::random_flat_hermitian(l, j, &g, TOL, &mut rng).unwrap();
        o.require(
            d.curvature_norm(l) <= TOL && d.is_hermitian_parallel(j, &g, TOL),
            "connection",
            format!("instance {n}: connection not flat Hermitian"),
        );
        let r = tangent::skt_transfer_report(l, j, &g, &d, TOL).unwrap();
        if r.base_class.is_skt() {
            skt_bases += 1;
        } else {
            other_bases += 1;
        }
        worst = worst.max(r.torsion_restriction_error).max(r.dc_restriction_error);
        o.require(r.consistent(), "biconditional", format!("instance {n} ({id}): base {} tangent {}", r.base_class.label(), r.tangent_class.label()));
        o.require(r.restrictions_ok(TOL), "restriction", format!("instance {n}: restriction errors {:.2e} {:.2e}", r.torsion_restriction_error, r.dc_restriction_error));
    }
    o.summary = format!("60 instances ({skt_bases} SKT bases, {other_bases} non-SKT), no counterexamples, restriction error {worst:.1e}");
    o
}

fn tangent_gk(base: &LieAlgebra, jp: &ComplexStructure, jm: &ComplexStructure, g: &Metric, d: &connections::Connection) -> Result<(), String> {
    let t = build_tangent(base, d, jp, g, TOL).map_err(|e| e.to_string())?;
    let h = t.hermitian.ok_or_else(|| t.warnings.join("; "))?;
    let jm_t = ComplexStructure::new(lift_endomorphism(jm.endomorphism()), TOL).map_err(|e| e.to_string())?;
    let r = generalized_kahler_check(&t.total, h.complex_structure(), &jm_t, h.metric(), TOL).map_err(|e| e.to_string())?;
    if r.holds() {
        Ok(())
    } else {
        Err(r.failures.join("; "))
    }
}

fn c4_generalized_kahler() -> Outcome {
    let mut o = Outcome::new(&["random-draw"]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut random_pass = 0;
    let mut sub_pass = 0;
    for (a, b) in [(1.0, 1.0), (2.0, -3.0)] {
        let inst = catalog::build("g2", &params(&[("a", a), ("b", b)]), TOL).unwrap();
        let jp = inst.complex_structure();
        let jm = inst.j_minus.clone().unwrap();
        let g = inst.metric();
        let target = e(4, &[1, 2, 3]).scale(2.0 * a);
        let hm = HermitianStructure::new(inst.algebra().clone(), jm.clone(), g.clone(), TOL).unwrap();
        let dcp = inst.hermitian.dc_form(inst.hermitian.fundamental_form(), TOL).unwrap();
        let dcm = hm.dc_form(hm.fundamental_form(), TOL).unwrap();
        let err = dcp.distance(&target).unwrap().max(dcm.try_add(&target).unwrap().norm());
        o.require(err <= TOL, "dc", format!("(a,b)=({a},{b}): dc error {err:.2e}"));
        let d = canonical_flat_connection(inst.algebra(), jp, g, TOL).unwrap();
        if let Err(m) = tangent_gk(inst.algebra(), jp, &jm, g, &d) {
            o.require(false, "canonical", format!("(a,b)=({a},{b}) canonical: {m}"));
        }
        for draw in 0..20 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            match tangent_gk(inst.algebra(), jp, &jm, g, &family_g1(x[0], x[1], x[2], x[3])) {
                Ok(()) => random_pass += 1,
                Err(m) => o.require(false, "random-draw", format!("(a,b)=({a},{b}) draw {draw} a13={:.2} a14={:.2}: {m}", x[1], x[2])),
            }
            // the a13 = a14 = 0 subfamily commutes with J-
            match tangent_gk(inst.algebra(), jp, &jm, g, &family_g1(x[0], 0.0, 0.0, x[3])) {
                Ok(()) => sub_pass += 1,
                Err(m) => o.require(false, "subfamily", format!("draw {draw} with a13 = a14 = 0: {m}")),
            }
        }
    }
    o.summary = format!(
        "dc identities and canonical GK hold; random Ď draws {random_pass}/40 GK (lifted J- not integrable when (a13,a14) != 0), a13=a14=0 subfamily {sub_pass}/40"
    );
    o
}

fn c5_beta_coefficients() -> Outcome {
    let mut o = Outcome::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for id in FAMILIES {
        for draw in 0..10 {
            let p = catalog::sample_params(id, &mut rng).unwrap();
            let inst = catalog::build(id, &p, TOL).unwrap();
            let Some(sol) = taming::solve_beta(&inst.hermitian, TOL).unwrap() else {
                o.require(false, id, format!("{id} draw {draw}: no beta"));
                continue;
            };
            let err = (sol.a() - inst.expected.a.unwrap()).norm();
            worst = worst.max(err);
            o.require(err <= TOL, id, format!("{id} draw {draw}: a = {} expected {}", sol.a(), inst.expected.a.unwrap()));
            let t = taming::assemble_taming(&inst.hermitian, &sol, TOL).unwrap();
            let g_min = inst.metric().min_eigenvalue();
            o.require(t.d_norm <= TOL, id, format!("{id} draw {draw}: |dOmega| = {:.2e}", t.d_norm));
            o.require(t.min_eigenvalue >= g_min - TOL, id, format!("{id} draw {draw}: min eig {} < {g_min}", t.min_eigenvalue));
        }
    }
    o.summary = format!("6 families x 10 draws, worst |a - a_closed| {worst:.1e}");
    o
}

fn c6_kahler_forms() -> Outcome {
    let mut o = Outcome::new(&["r4p-positive", "d42-closed"]);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut found = 0;
    for id in FAMILIES {
        for draw in 0..10 {
            let p = catalog::sample_params(id, &mut rng).unwrap();
            let inst = catalog::build(id, &p, TOL).unwrap();
            let wk = loop {
                let m = rng.random_range(0.2..3.0);
                let slack = rng.random_range(0.05..2.0);
                let pp = rng.random_range(-1.0..1.0);
                if let Some(w) = inst.stated_kahler_form(m, slack, pp) {
                    break w;
                }
            };
            let d = inst.algebra().ce_differential(&wk).unwrap().norm();
            let h = taming::taming_pairing(&wk, inst.complex_structure().endomorphism()).unwrap();
            let min = linalg::min_eigen(&h).0;
            o.require(d <= TOL, &format!("{id}-closed"), format!("{id} draw {draw}: |d w_k| = {d:.2e}"));
            o.require(min > TOL, &format!("{id}-positive"), format!("{id} draw {draw}: min eig {min:.3}"));
            let r = taming::kahler_search(inst.algebra(), inst.complex_structure(), &SearchConfig::default()).unwrap();
            let ok = r.found.as_ref().is_some_and(|f| f.d_norm <= TOL && f.min_eigenvalue > 0.0);
            if ok {
                found += 1;
            }
            o.require(ok, &format!("{id}-search"), format!("{id} draw {draw}: kahler_search {}", r.confidence.label()));
        }
    }
    let mut red: BTreeSet<&str> = BTreeSet::new();
    for (t, _) in &o.failures {
        red.insert(t.as_str());
    }
    o.summary = format!(
        "kahler_search found {found}/60; stated forms failing: {}",
        if red.is_empty() { "none".to_string() } else { red.into_iter().collect::<Vec<_>>().join(", ") }
    );
    o
}

fn c7_cohomology() -> Outcome {
    let mut o = Outcome::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let abelian = LieAlgebra::abelian(4);
    let b = abelian.cohomology(TOL).unwrap().betti;
    o.require(b == vec![1, 4, 6, 4, 1], "abelian", format!("abelian betti {b:?}"));
    let mut nonuni = 0;
    for id in FAMILIES {
        for _ in 0..10 {
            let p = catalog::sample_params(id, &mut rng).unwrap();
            let inst = catalog::build(id, &p, TOL).unwrap();
            let l = inst.algebra();
            let betti = l.cohomology(TOL).unwrap().betti;
            if id == "affxaff" || id == "d4p" {
                o.require(betti[3] == 0, "b3", format!("{id}: b = {betti:?}"));
            }
            if !l.is_unimodular(TOL) {
                nonuni += 1;
                o.require(betti[4] == 0, "b4", format!("{id}: non-unimodular with b4 = {}", betti[4]));
            }
        }
    }
    for (id, p) in [("g1", params(&[])), ("g2", params(&[])), ("g2", params(&[("a", 2.0), ("b", -3.0)])), ("g3", params(&[]))] {
        let betti = catalog::build(id, &p, TOL).unwrap().algebra().cohomology(TOL).unwrap().betti;
        o.require(betti[4] == 1, "top", format!("{id}: b = {betti:?}"));
    }
    o.summary = format!("b3 = 0 on affxaff/d4p, abelian binomial, b4 = 0 on {nonuni}/60 non-unimodular instances, b4 = 1 on g1, g2, g3");
    o
}

fn c8_flat_families() -> Outcome {
    let mut o = Outcome::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for id in ["g1", "g2"] {
        let inst = catalog::build(id, &Params::new(), TOL).unwrap();
        for draw in 0..100 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let d = family_g1(x[0], x[1], x[2], x[3]);
            let k = d.curvature_norm(inst.algebra());
            worst = worst.max(k);
            o.require(k <= TOL, id, format!("{id} draw {draw}: curvature {k:.2e}"));
            o.require(d.is_hermitian_parallel(inst.complex_structure(), inst.metric(), TOL), id, format!("{id} draw {draw}: not Hermitian"));
        }
    }
    let g3 = catalog::build("g3", &Params::new(), TOL).unwrap();
    for draw in 0..100 {
        let f = family_g3(connections::sample_g3_params(&mut rng), TOL);
        let k = f.connection.curvature_norm(g3.algebra());
        worst = worst.max(k);
        o.require(f.admissible, "g3", format!("g3 draw {draw}: constraint residuals {:?}", f.residuals));
        o.require(k <= TOL, "g3", format!("g3 draw {draw}: curvature {k:.2e}"));
        o.require(f.connection.is_hermitian_parallel(g3.complex_structure(), g3.metric(), TOL), "g3", format!("g3 draw {draw}: not Hermitian"));
    }
    let bad = family_g3([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0; 4]], TOL);
    let k = bad.connection.curvature_norm(g3.algebra());
    o.require(!bad.admissible && k > 1e-3, "violating", format!("violating draw: admissible {} curvature {k:.2e}", bad.admissible));
    o.summary = format!("300 admissible draws, worst curvature {worst:.1e}; violating g3 draw curvature {k:.2}");
    o
}

fn c9_negative_controls() -> Outcome {
    let mut o = Outcome::new(&[]);
    let g3 = catalog::build("g3", &Params::new(), TOL).unwrap();
    let r = taming::hermitian_symplectic_search(g3.algebra(), g3.complex_structure(), &SearchConfig::default()).unwrap();
    o.require(r.found.is_none(), "g3", "g3 taming search found a form");

    // so(3) + so(3)
    let mut ds = vec![e(6, &[2, 3]), -e(6, &[1, 3]), e(6, &[1, 2])];
    ds.extend([e(6, &[5, 6]), -e(6, &[4, 6]), e(6, &[4, 5])]);
    let perfect = LieAlgebra::from_differentials(ds).unwrap();
    let j = ComplexStructure::standard(6).unwrap();
    let res = canonical_flat_connection(&perfect, &j, &Metric::identity(6), TOL);
    o.require(matches!(res, Err(Error::NoSuchConnection)), "perfect", format!("perfect algebra gave {:?}", res.err()));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 3, "d": {"1": [[1, 2, 3]], "2": [[1, 2, 3]], "3": [[1, 1, 2]]}}"#).unwrap();
    let out = Command::new(skt()).arg("verify").arg(&bad).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    let defect = v["checks"]["jacobi"]["residual"].as_f64().unwrap_or(0.0);
    o.require(out.status.code() == Some(1), "jacobi", format!("exit {:?}", out.status.code()));
    o.require(defect > 0.0 && v["checks"]["jacobi"]["witness"].is_array(), "jacobi", "no defect certificate");
    o.summary = format!(
        "g3 taming search {}; perfect algebra -> no-such-connection; Jacobi violation exit 1, defect {defect:.2}",
        r.confidence.label()
    );
    o
}

fn random_instance(rng: &mut ChaCha8Rng) -> HermitianStructure {
    let id = IDS[rng.random_range(0..IDS.len())];
    let p = catalog::sample_params(id, rng).unwrap();
    let inst = catalog::build(id, &p, TOL).unwrap();
    let basis = DMatrix::identity(4, 4) + DMatrix::from_fn(4, 4, |_, _| rng.random_range(-0.4..0.4));
    let inv = basis.clone().try_inverse().unwrap();
    let l = inst.algebra().change_basis(&basis).unwrap();
    let j = ComplexStructure::new(Endomorphism::new(&inv * inst.complex_structure().endomorphism().matrix() * &basis).unwrap(), 1e-8).unwrap();
    let g = random_compatible_metric(&j, rng);
    HermitianStructure::new(l, j, g, 1e-8).unwrap()
}

fn c10_property_suites() -> Outcome {
    let mut o = Outcome::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut algebras: Vec<LieAlgebra> = Vec::new();
    for id in IDS {
        let inst = catalog::build(id, &catalog::sample_params(id, &mut rng).unwrap(), TOL).unwrap();
        let d = connections::random_flat_hermitian(inst.algebra(), inst.complex_structure(), inst.metric(), TOL, &mut rng).unwrap();
        algebras.push(tangent::semidirect_product(inst.algebra(), &d, TOL).unwrap());
        algebras.push(inst.algebra().clone());
    }
    algebras.push(LieAlgebra::abelian(2));
    let mut forms = 0;
    for l in &algebras {
        let n = l.dim();
        for k in 0..=n {
            for idx in combinations(n, k) {
                let f = KForm::basis(n, &idx).unwrap();
                let dd = l.ce_differential(&l.ce_differential(&f).unwrap()).unwrap().norm();
                forms += 1;
                o.require(dd <= 1e-12, "d2", format!("dim {n}: d^2 e^{idx:?} = {dd:.2e}"));
            }
        }
    }
    let mut worst: f64 = 0.0;
    for n in 0..50 {
        let h = random_instance(&mut rng);
        let defects = h.bismut_defects(&h.bismut_connection());
        worst = worst.max(defects.max());
        o.require(defects.max() <= 1e-8, "bismut", format!("instance {n}: {defects:?}"));
    }
    let mut paths: f64 = 0.0;
    for id in IDS {
        for _ in 0..5 {
            let inst = catalog::build(id, &catalog::sample_params(id, &mut rng).unwrap(), TOL).unwrap();
            let h = &inst.hermitian;
            let gap = h.bismut_torsion().try_add(&h.torsion_three_form()).unwrap().norm();
            paths = paths.max(gap);
            o.require(gap <= TOL, "torsion", format!("{id}: torsion paths differ by {gap:.2e}"));
        }
    }
    o.summary = format!("d^2 = 0 on {forms} basis forms (dims 2-8); Bismut defects <= {worst:.0e} on 50 instances; torsion paths agree to {paths:.0e}");
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("catalog soundness", c1_catalog_soundness),
        ("tangent of g1 regression", c2_tangent_regression),
        ("SKT transfer biconditional", c3_skt_biconditional),
        ("generalized Kahler on g2 and its tangents", c4_generalized_kahler),
        ("beta coefficients", c5_beta_coefficients),
        ("Kahler forms", c6_kahler_forms),
        ("cohomology", c7_cohomology),
        ("flat families", c8_flat_families),
        ("negative controls", c9_negative_controls),
        ("property suites", c10_property_suites),
    ];
    let mut unexpected = 0;
    for (n, (title, f)) in criteria.iter().enumerate() {
        let o = f();
        let verdict = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict}  {title}: {}", n + 1, o.summary);
        for (tag, what) in o.failures.iter().take(3) {
            let known = if o.known_red.contains(&tag.as_str()) { "known" } else { "UNEXPECTED" };
            println!("    {known} [{tag}] {what}");
        }
        if o.failures.len() > 3 {
            println!("    ... {} more", o.failures.len() - 3);
        }
        unexpected += o.unexpected().len();
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failures");
        std::process::exit(1);
    }
}
