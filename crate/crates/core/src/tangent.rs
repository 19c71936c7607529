//! The tangent Lie algebra `T_D g = g ⋉_D R^{2n}` of a flat connection and
//! the transfer of SKT and generalized Kähler structures to it.
//!
//! The basis of `T_D g` is `(e_1, ..., e_{2n}, f_1, ..., f_{2n})`, stored
//! with indices `0..4n`; the bracket is
//! `[(X1, X2), (Y1, Y2)] = ([X1, Y1], D_{X1} Y2 - D_{Y1} X2)`.

use nalgebra::DMatrix;

use crate::connections::Connection;
use crate::error::{Error, Result};
use crate::hermitian::{generalized_kahler_check, ComplexStructure, GeneralizedKahlerReport, HermitianStructure, Metric, MetricKind};
use crate::liealg::LieAlgebra;
use crate::multilinear::{Endomorphism, KForm};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentAlgebra {
    pub base: LieAlgebra,
    pub connection: Connection,
    pub total: LieAlgebra,
    /// Lifted `(J̃, g̃)`, present when the base data could be lifted.
    pub hermitian: Option<HermitianStructure>,
    pub warnings: Vec<String>,
}

impl TangentAlgebra {
    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// Coframe labels `e^1..e^{2n}, f^1..f^{2n}`.
    pub fn labels(&self) -> Vec<String> {
        let m = self.base_dim();
        (0..2 * m)
            .map(|i| if i < m { format!("e^{}", i + 1) } else { format!("f^{}", i - m + 1) })
            .collect()
    }
}

/// `blockdiag(A, A)`.
pub fn lift_endomorphism(a: &Endomorphism) -> Endomorphism {
    let m = a.dim();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(a.matrix());
    out.view_mut((m, m), (m, m)).copy_from(a.matrix());
    Endomorphism::new(out).expect("finite")
}

pub fn lift_metric(g: &Metric) -> Metric {
    let m = g.dim();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(g.matrix());
    out.view_mut((m, m), (m, m)).copy_from(g.matrix());
    Metric::new(out, f64::INFINITY).expect("block diagonal of a positive definite matrix")
}

/// Embeds a form on the base into `T_D g` (fiber indices unused).
pub fn lift_form(form: &KForm) -> KForm {
    let terms = form.terms().map(|(idx, c)| (c, idx.to_vec()));
    KForm::from_terms(2 * form.dim(), form.degree(), terms).expect("indices stay increasing")
}

/// The semidirect product only, without Hermitian data.
pub fn semidirect_product(base: &LieAlgebra, d: &Connection, tol: f64) -> Result<LieAlgebra> {
    let m = base.dim();
    if d.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: d.dim() });
    }
    let norm = d.curvature_norm(base);
    if norm > tol {
        return Err(Error::NotFlat { norm });
    }
    LieAlgebra::from_brackets(2 * m, |k, i, j| {
        // only i < j is queried
        match (i < m, j < m, k < m) {
            (true, true, true) => base.structure_constant(k, i, j),
            (true, false, false) => d.map(i).matrix()[(k - m, j - m)],
            _ => 0.0,
        }
    })
}

/// Builds `T_D g` and, when `D` is Hermitian-parallel and `J` integrable,
/// the lifted Hermitian structure. Otherwise the raw semidirect product is
/// returned with a warning.
pub fn build_tangent(
    base: &LieAlgebra,
    d: &Connection,
    j: &ComplexStructure,
    g: &Metric,
    tol: f64,
) -> Result<TangentAlgebra> {
    let total = semidirect_product(base, d, tol)?;
    let mut warnings = Vec::new();
    let nij = j.nijenhuis_norm(base);
    let parallel = d.hermitian_parallel_defect(j, g);
    let hermitian = if nij > tol {
        warnings.push(format!("J is not integrable on the base (Nijenhuis norm {nij:.3e}); no Hermitian lift"));
        None
    } else if parallel > tol {
        warnings.push(format!("D does not preserve (J, g) (defect {parallel:.3e}); no Hermitian lift"));
        None
    } else {
        let jt = ComplexStructure::new(lift_endomorphism(j.endomorphism()), tol)?;
        Some(HermitianStructure::new(total.clone(), jt, lift_metric(g), tol)?)
    };
    Ok(TangentAlgebra { base: base.clone(), connection: d.clone(), total, hermitian, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SktTransferReport {
    pub base_class: MetricKind,
    pub tangent_class: MetricKind,
    /// `|c̃ - lift(c)|`: `c̃` agrees with `c` on base triples and vanishes
    /// as soon as one argument lies in the ideal.
    pub torsion_restriction_error: f64,
    /// Same for `dc̃` against `dc`.
    pub dc_restriction_error: f64,
    pub tangent_jacobi_defect: f64,
    pub tangent_nijenhuis_norm: f64,
}

impl SktTransferReport {
    pub fn restrictions_ok(&self, tol: f64) -> bool {
        self.torsion_restriction_error <= tol && self.dc_restriction_error <= tol
    }

    /// Base SKT iff tangent SKT.
    pub fn consistent(&self) -> bool {
        self.base_class.is_skt() == self.tangent_class.is_skt()
    }
}

pub fn skt_transfer_report(
    base: &LieAlgebra,
    j: &ComplexStructure,
    g: &Metric,
    d: &Connection,
    tol: f64,
) -> Result<SktTransferReport> {
    let h = HermitianStructure::new(base.clone(), j.clone(), g.clone(), tol)?;
    let base_class = h.classify(tol)?;
    let t = build_tangent(base, d, j, g, tol)?;
    let ht = t
        .hermitian
        .as_ref()
        .ok_or_else(|| Error::Precondition(t.warnings.join("; ")))?;
    let tangent_class = ht.classify(tol)?;
    Ok(SktTransferReport {
        base_class: base_class.kind,
        tangent_class: tangent_class.kind,
        torsion_restriction_error: tangent_class.torsion.distance(&lift_form(&base_class.torsion))?,
        dc_restriction_error: tangent_class.d_torsion.distance(&lift_form(&base_class.d_torsion))?,
        tangent_jacobi_defect: t.total.jacobi_defect(),
        tangent_nijenhuis_norm: ht.nijenhuis_norm(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GkTransferReport {
    pub base: GeneralizedKahlerReport,
    pub tangent: GeneralizedKahlerReport,
}

impl GkTransferReport {
    pub fn holds(&self) -> bool {
        self.base.holds() && self.tangent.holds()
    }
}

/// Runs the generalized Kähler check on `T_D g` with `J̃₊, J̃₋, g̃`.
/// Requires `DJ₊ = DJ₋ = Dg = 0`.
pub fn gk_transfer_report(
    base: &LieAlgebra,
    j_plus: &ComplexStructure,
    j_minus: &ComplexStructure,
    g: &Metric,
    d: &Connection,
    tol: f64,
) -> Result<GkTransferReport> {
    let defect = d.commutation_defect(j_minus.endomorphism());
    if defect > tol {
        return Err(Error::Precondition(format!("D does not commute with J- (defect {defect:.3e})")));
    }
    let base_report = generalized_kahler_check(base, j_plus, j_minus, g, tol)?;
    let t = build_tangent(base, d, j_plus, g, tol)?;
    if t.hermitian.is_none() {
        return Err(Error::Precondition(t.warnings.join("; ")));
    }
    let jp = ComplexStructure::new(lift_endomorphism(j_plus.endomorphism()), tol)?;
    let jm = ComplexStructure::new(lift_endomorphism(j_minus.endomorphism()), tol)?;
    let tangent = generalized_kahler_check(&t.total, &jp, &jm, &lift_metric(g), tol)?;
    Ok(GkTransferReport { base: base_report, tangent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{canonical_flat_connection, family_g1};

    const TOL: f64 = 1e-9;

    fn e(n: usize, idx: &[usize]) -> KForm {
        KForm::basis(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>()).unwrap()
    }

    fn g1() -> LieAlgebra {
        LieAlgebra::from_differentials(vec![e(4, &[2, 4]), -e(4, &[1, 4]), e(4, &[1, 2]), KForm::zero(4, 2)])
            .unwrap()
    }

    fn g2(a: f64, b: f64) -> LieAlgebra {
        LieAlgebra::from_differentials(vec![
            a * e(4, &[1, 4]) + b * e(4, &[2, 4]),
            -b * e(4, &[1, 4]) + a * e(4, &[2, 4]),
            -2.0 * a * e(4, &[3, 4]),
            KForm::zero(4, 2),
        ])
        .unwrap()
    }

    fn jstd() -> ComplexStructure {
        ComplexStructure::standard(4).unwrap()
    }

    fn jminus() -> ComplexStructure {
        ComplexStructure::new(Endomorphism::block_complex(&[1.0, -1.0]), TOL).unwrap()
    }

    #[test]
    fn g1_tangent_equations() {
        let g = Metric::identity(4);
        let d = canonical_flat_connection(&g1(), &jstd(), &g, TOL).unwrap();
        let t = build_tangent(&g1(), &d, &jstd(), &g, TOL).unwrap();
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
        for (k, want) in expected.iter().enumerate() {
            assert!(t.total.differential(k).distance(want).unwrap() <= 1e-12, "slot {k}");
        }
        assert_eq!(
            t.total.structure_equations("f"),
            "(f^{24}, -f^{14}, f^{12}, 0, -f^{46}, f^{45}, -f^{48}, f^{47})"
        );
        let f = t.total.fingerprint(TOL).unwrap();
        assert_eq!(f.solvable_step, Some(3));
        assert!(f.unimodular);
        let h = t.hermitian.unwrap();
        assert_eq!(h.classify(TOL).unwrap().kind, MetricKind::SktNotKahler);
    }

    #[test]
    fn g2_tangent_third_slot_sign() {
        // the third slot keeps the base differential -2a e^{34}
        let (a, b) = (1.0, 1.0);
        let g = Metric::identity(4);
        let d = canonical_flat_connection(&g2(a, b), &jstd(), &g, TOL).unwrap();
        let t = build_tangent(&g2(a, b), &d, &jstd(), &g, TOL).unwrap();
        assert!(t.total.differential(2).distance(&(-2.0 * a * e(8, &[3, 4]))).unwrap() < 1e-12);
        assert!(t.total.differential(4).distance(&-e(8, &[4, 6])).unwrap() < 1e-12);
    }

    #[test]
    fn zero_connection_gives_direct_sum() {
        let t = build_tangent(&g1(), &Connection::zero(4), &jstd(), &Metric::identity(4), TOL).unwrap();
        for k in 4..8 {
            assert!(t.total.differential(k).is_zero(0.0));
        }
        for k in 0..4 {
            assert_eq!(t.total.differential(k), &lift_form(g1().differential(k)));
        }
    }

    #[test]
    fn refuses_non_flat_and_degrades_non_parallel() {
        let neg = Connection::new((0..4).map(|i| g1().ad(i).scale(-1.0)).collect()).unwrap();
        assert!(matches!(
            build_tangent(&g1(), &neg, &jstd(), &Metric::identity(4), TOL),
            Err(Error::NotFlat { .. })
        ));
        let mut maps = vec![Endomorphism::zero(4); 4];
        maps[3] = Endomorphism::identity(4);
        let d = Connection::new(maps).unwrap();
        let t = build_tangent(&g1(), &d, &jstd(), &Metric::identity(4), TOL).unwrap();
        assert!(t.hermitian.is_none());
        assert_eq!(t.warnings.len(), 1);
        assert!(t.total.jacobi_defect() <= TOL);
    }

    #[test]
    fn skt_transfer_on_g1_and_abelian() {
        let g = Metric::identity(4);
        let d = canonical_flat_connection(&g1(), &jstd(), &g, TOL).unwrap();
        let r = skt_transfer_report(&g1(), &jstd(), &g, &d, TOL).unwrap();
        assert!(r.base_class.is_skt() && r.tangent_class.is_skt());
        assert!(r.restrictions_ok(TOL));
        let a = LieAlgebra::abelian(4);
        let r = skt_transfer_report(&a, &jstd(), &g, &Connection::zero(4), TOL).unwrap();
        assert_eq!(r.base_class, MetricKind::Kahler);
        assert_eq!(r.tangent_class, MetricKind::Kahler);
    }

    #[test]
    fn gk_transfer_on_g2() {
        let g = Metric::identity(4);
        let l = g2(1.0, 1.0);
        let d = canonical_flat_connection(&l, &jstd(), &g, TOL).unwrap();
        assert!(gk_transfer_report(&l, &jstd(), &jminus(), &g, &d, TOL).unwrap().holds());
        // the (e1,e2) x (e3,e4) block of the family anticommutes with J-
        let d = family_g1(0.5, 1.0, 0.0, 2.0);
        assert!(matches!(
            gk_transfer_report(&l, &jstd(), &jminus(), &g, &d, TOL),
            Err(Error::Precondition(_))
        ));
        let d = family_g1(0.5, 0.0, 0.0, 2.0);
        assert!(gk_transfer_report(&l, &jstd(), &jminus(), &g, &d, TOL).unwrap().holds());
    }

    #[test]
    fn iterated_tangent() {
        let g = Metric::identity(4);
        let d = canonical_flat_connection(&g1(), &jstd(), &g, TOL).unwrap();
        let t = build_tangent(&g1(), &d, &jstd(), &g, TOL).unwrap();
        let h = t.hermitian.unwrap();
        let d2 = canonical_flat_connection(h.algebra(), h.complex_structure(), h.metric(), TOL).unwrap();
        let t2 = build_tangent(h.algebra(), &d2, h.complex_structure(), h.metric(), TOL).unwrap();
        assert_eq!(t2.total.dim(), 16);
        assert!(t2.total.jacobi_defect() <= TOL);
        assert!(t2.hermitian.unwrap().classify(TOL).unwrap().kind.is_skt());
    }
}
