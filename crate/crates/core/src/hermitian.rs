//! Complex structures, compatible metrics, the Bismut connection and the
//! Kähler / SKT / generalized Kähler classifiers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::connections::Connection;
use crate::error::{Error, Result};
use crate::liealg::{unit, LieAlgebra};
use crate::linalg::{self, max_abs};
use crate::multilinear::{check_almost_complex, ComplexKForm, Endomorphism, KForm};

/// An endomorphism with `J² = -id`. Integrability depends on the Lie
/// algebra and is checked separately with [`ComplexStructure::nijenhuis_norm`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    j: Endomorphism,
}

impl ComplexStructure {
    pub fn new(j: Endomorphism, tol: f64) -> Result<Self> {
        check_almost_complex(&j, tol)?;
        Ok(ComplexStructure { j })
    }

    /// `J e_{2i-1} = e_{2i}`, `J e_{2i} = -e_{2i-1}`.
    pub fn standard(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("complex structures need even dimension, got {dim}")));
        }
        Ok(ComplexStructure { j: Endomorphism::standard_complex(dim) })
    }

    pub fn endomorphism(&self) -> &Endomorphism {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    /// Max norm over basis pairs of
    /// `N(X,Y) = J([X,Y] - [JX,JY]) - ([JX,Y] + [X,JY])`.
    pub fn nijenhuis_norm(&self, algebra: &LieAlgebra) -> f64 {
        let n = algebra.dim();
        let je: Vec<DVector<f64>> = (0..n).map(|i| self.j.image(i)).collect();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                let inner = algebra.bracket_basis(a, b) - algebra.bracket(&je[a], &je[b]);
                let mixed = algebra.bracket(&je[a], &unit(n, b)) + algebra.bracket(&unit(n, a), &je[b]);
                worst = worst.max((self.j.apply(&inner) - mixed).amax());
            }
        }
        worst
    }

    pub fn is_integrable(&self, algebra: &LieAlgebra, tol: f64) -> bool {
        self.nijenhuis_norm(algebra) <= tol
    }
}

/// `nijenhuis_norm` as a free function.
pub fn nijenhuis_norm(algebra: &LieAlgebra, j: &ComplexStructure) -> f64 {
    j.nijenhuis_norm(algebra)
}

/// A symmetric positive-definite Gram matrix in the `e`-basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    g: DMatrix<f64>,
}

impl Metric {
    pub fn new(g: DMatrix<f64>, tol: f64) -> Result<Self> {
        if g.nrows() != g.ncols() || g.nrows() == 0 {
            return Err(Error::InvalidInput("metric must be a non-empty square matrix".into()));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("metric has non-finite entries".into()));
        }
        let asym = max_abs(&(&g - g.transpose()));
        if asym > tol * max_abs(&g).max(1.0) {
            return Err(Error::InvalidInput(format!("metric is not symmetric (defect {asym:.3e})")));
        }
        let g = linalg::symmetrize(&g);
        let (min_eigenvalue, _) = linalg::min_eigen(&g);
        if min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(Metric { g })
    }

    pub fn identity(dim: usize) -> Self {
        Metric { g: DMatrix::identity(dim, dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.g * y))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigen(&self.g).0
    }

    /// `max |g(J·, J·) - g|`.
    pub fn compatibility_defect(&self, j: &ComplexStructure) -> f64 {
        let jm = j.endomorphism().matrix();
        max_abs(&(jm.transpose() * &self.g * jm - &self.g))
    }
}

/// A Lie algebra with a compatible pair `(J, g)` and its fundamental form
/// `ω(X, Y) = g(JX, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianStructure {
    algebra: LieAlgebra,
    j: ComplexStructure,
    g: Metric,
    omega: KForm,
}

impl HermitianStructure {
    /// Fails when dimensions differ or `g` is not `J`-invariant. `J` need
    /// not be integrable here; the `∂`/`∂̄` based methods check that.
    pub fn new(algebra: LieAlgebra, j: ComplexStructure, g: Metric, tol: f64) -> Result<Self> {
        let n = algebra.dim();
        for found in [j.dim(), g.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        let defect = g.compatibility_defect(&j);
        if defect > tol * max_abs(g.matrix()).max(1.0) {
            return Err(Error::Incompatible { defect });
        }
        let omega = KForm::from_skew_matrix(&(j.endomorphism().matrix().transpose() * g.matrix()));
        Ok(HermitianStructure { algebra, j, g, omega })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn complex_structure(&self) -> &ComplexStructure {
        &self.j
    }

    pub fn metric(&self) -> &Metric {
        &self.g
    }

    pub fn fundamental_form(&self) -> &KForm {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn nijenhuis_norm(&self) -> f64 {
        self.j.nijenhuis_norm(&self.algebra)
    }

    fn require_integrable(&self, tol: f64) -> Result<()> {
        let norm = self.nijenhuis_norm();
        if norm > tol {
            return Err(Error::NotIntegrable { norm });
        }
        Ok(())
    }

    pub fn d(&self, form: &KForm) -> Result<KForm> {
        self.algebra.ce_differential(form)
    }

    pub fn d_omega(&self) -> KForm {
        self.d(&self.omega).expect("ω lives on the algebra")
    }

    fn d_complex(&self, form: &ComplexKForm) -> Result<ComplexKForm> {
        ComplexKForm::new(self.d(&form.re)?, self.d(&form.im)?)
    }

    /// `(∂α, ∂̄α)` for a complex form, splitting `α` by bidegree first.
    pub fn del_delbar(&self, form: &ComplexKForm, tol: f64) -> Result<(ComplexKForm, ComplexKForm)> {
        self.require_integrable(tol)?;
        let j = self.j.endomorphism();
        let k = form.degree();
        let n = self.dim();
        let mut del = ComplexKForm::zero(n, k + 1);
        let mut delbar = ComplexKForm::zero(n, k + 1);
        for (p, part) in form.bidegree_decompose(j, tol)?.into_iter().enumerate() {
            let dp = self.d_complex(&part)?;
            del = del.try_add(&dp.bidegree_part(j, p + 1, tol)?)?;
            delbar = delbar.try_add(&dp.bidegree_part(j, p, tol)?)?;
        }
        Ok((del, delbar))
    }

    /// `d^c α = i(∂̄ - ∂)α` for a real form.
    pub fn dc_form(&self, form: &KForm, tol: f64) -> Result<KForm> {
        let (del, delbar) = self.del_delbar(&ComplexKForm::from_real(form.clone()), tol)?;
        let diff = delbar.try_sub(&del)?;
        // i(u + iv) = -v + iu; the imaginary part u must vanish for real input
        if diff.re.norm() > tol * diff.im.norm().max(1.0) {
            return Err(Error::Internal(format!(
                "d^c of a real form has imaginary part {:.3e}",
                diff.re.norm()
            )));
        }
        Ok(diff.im.scale(-1.0))
    }

    /// `c = -J*dω`, i.e. `c(X,Y,Z) = -dω(JX,JY,JZ)`.
    pub fn torsion_three_form(&self) -> KForm {
        -self.d_omega().pullback(self.j.endomorphism()).expect("same dimension")
    }

    /// `|d^cω - c|` where `c` comes from the pullback identity.
    pub fn dc_identity_residual(&self, tol: f64) -> Result<f64> {
        let dc = self.dc_form(&self.omega, tol)?;
        dc.distance(&self.torsion_three_form())
    }

    /// Solves the Bismut equation
    /// `2g(∇_X Y, Z) = g([X,Y] - [JX,JY], Z) - g([Y,Z] + [JY,JZ], X) - g([X,Z] - [JX,JZ], Y)`
    /// on basis triples.
    pub fn bismut_connection(&self) -> Connection {
        let n = self.dim();
        let g = self.g.matrix();
        let ginv = g.clone().try_inverse().expect("positive definite");
        let je: Vec<DVector<f64>> = (0..n).map(|i| self.j.endomorphism().image(i)).collect();
        let l = &self.algebra;
        // gb[(x, y)] = g([e_x, e_y], ·) and gjb = g([Je_x, Je_y], ·) as row vectors
        let mut gb = vec![DVector::zeros(n); n * n];
        let mut gjb = vec![DVector::zeros(n); n * n];
        for x in 0..n {
            for y in 0..n {
                gb[x * n + y] = g * l.bracket_basis(x, y);
                gjb[x * n + y] = g * l.bracket(&je[x], &je[y]);
            }
        }
        let maps = (0..n)
            .map(|x| {
                let mut lowered = DMatrix::zeros(n, n);
                for y in 0..n {
                    for z in 0..n {
                        let v = (gb[x * n + y][z] - gjb[x * n + y][z])
                            - (gb[y * n + z][x] + gjb[y * n + z][x])
                            - (gb[x * n + z][y] - gjb[x * n + z][y]);
                        lowered[(z, y)] = 0.5 * v;
                    }
                }
                Endomorphism::new(&ginv * lowered).expect("finite")
            })
            .collect();
        Connection::new(maps).expect("n maps of size n")
    }

    /// `g(X, T(Y, Z))` of a connection as a full `n×n×n` array indexed
    /// `[x][y][z]`, with `T(Y,Z) = ∇_Y Z - ∇_Z Y - [Y,Z]`.
    pub fn torsion_tensor(&self, conn: &Connection) -> Vec<f64> {
        let n = self.dim();
        let g = self.g.matrix();
        let mut out = vec![0.0; n * n * n];
        for y in 0..n {
            for z in 0..n {
                let t = conn.map(y).image(z) - conn.map(z).image(y) - self.algebra.bracket_basis(y, z);
                let gt = g * t;
                for x in 0..n {
                    out[(x * n + y) * n + z] = gt[x];
                }
            }
        }
        out
    }

    /// Checks the three defining properties of the Bismut connection.
    pub fn bismut_defects(&self, conn: &Connection) -> BismutDefects {
        let n = self.dim();
        let g = self.g.matrix();
        let j = self.j.endomorphism();
        let mut metric: f64 = 0.0;
        let mut complex: f64 = 0.0;
        for i in 0..n {
            let d = conn.map(i).matrix();
            metric = metric.max(max_abs(&(g * d + d.transpose() * g)));
            complex = complex.max(conn.map(i).commutator(j).norm());
        }
        let c = self.torsion_tensor(conn);
        let mut skew: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let v = c[(x * n + y) * n + z];
                    skew = skew.max((v + c[(y * n + x) * n + z]).abs());
                    skew = skew.max((v + c[(x * n + z) * n + y]).abs());
                }
            }
        }
        BismutDefects { metric, complex, skew }
    }

    /// The skew part of the torsion tensor as a 3-form.
    pub fn torsion_form_of(&self, conn: &Connection) -> KForm {
        let n = self.dim();
        let c = self.torsion_tensor(conn);
        let terms = linalg::combinations(n, 3)
            .into_iter()
            .map(|idx| (c[(idx[0] * n + idx[1]) * n + idx[2]], idx));
        KForm::from_terms(n, 3, terms).expect("increasing indices")
    }

    /// Torsion 3-form extracted from the Bismut equation. With the equation
    /// taken literally this equals `+J*dω = -c`.
    pub fn bismut_torsion(&self) -> KForm {
        self.torsion_form_of(&self.bismut_connection())
    }

    pub fn classify(&self, tol: f64) -> Result<MetricClass> {
        self.require_integrable(tol)?;
        let d_omega = self.d_omega();
        let torsion = self.torsion_three_form();
        let d_torsion = self.d(&torsion)?;
        let j = self.j.endomorphism();
        let (_, delbar) = self.del_delbar(&ComplexKForm::from_real(self.omega.clone()), tol)?;
        let (del_delbar, _) = self.del_delbar(&delbar, tol)?;
        let ddbar_norm = del_delbar.bidegree_part(j, 2, tol)?.norm();
        let kind = if d_omega.norm() <= tol {
            MetricKind::Kahler
        } else if d_torsion.norm() <= tol {
            MetricKind::SktNotKahler
        } else {
            MetricKind::NotSkt
        };
        let paths_agree = (d_torsion.norm() <= tol) == (ddbar_norm <= tol);
        Ok(MetricClass { kind, d_omega, torsion, d_torsion, ddbar_norm, paths_agree })
    }
}

/// Max defects of `∇g = 0`, `∇J = 0` and total skewness of `g(X, T(Y,Z))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BismutDefects {
    pub metric: f64,
    pub complex: f64,
    pub skew: f64,
}

impl BismutDefects {
    pub fn max(&self) -> f64 {
        self.metric.max(self.complex).max(self.skew)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Kahler,
    SktNotKahler,
    NotSkt,
}

impl MetricKind {
    pub fn is_skt(self) -> bool {
        self != MetricKind::NotSkt
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Kahler => "Kahler",
            MetricKind::SktNotKahler => "SKT-not-Kahler",
            MetricKind::NotSkt => "not-SKT",
        }
    }
}

/// Classification with its certificates. `paths_agree` records whether
/// `dc = 0` and `∂∂̄ω = 0` gave the same verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricClass {
    pub kind: MetricKind,
    pub d_omega: KForm,
    pub torsion: KForm,
    pub d_torsion: KForm,
    pub ddbar_norm: f64,
    pub paths_agree: bool,
}

/// Outcome of the generalized Kähler test for `(J₊, J₋, g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedKahlerReport {
    pub plus: Option<MetricClass>,
    pub minus: Option<MetricClass>,
    /// `|c₊ + c₋|` when both torsions could be computed.
    pub torsion_sum_norm: Option<f64>,
    pub failures: Vec<String>,
}

impl GeneralizedKahlerReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn generalized_kahler_check(
    algebra: &LieAlgebra,
    j_plus: &ComplexStructure,
    j_minus: &ComplexStructure,
    g: &Metric,
    tol: f64,
) -> Result<GeneralizedKahlerReport> {
    let mut failures = Vec::new();
    let mut classify = |j: &ComplexStructure, name: &str| -> Result<Option<MetricClass>> {
        let h = match HermitianStructure::new(algebra.clone(), j.clone(), g.clone(), tol) {
            Ok(h) => h,
            Err(Error::Incompatible { defect }) => {
                failures.push(format!("g is not {name}-compatible (defect {defect:.3e})"));
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let norm = h.nijenhuis_norm();
        if norm > tol {
            failures.push(format!("{name} is not integrable (Nijenhuis norm {norm:.3e})"));
            return Ok(None);
        }
        let class = h.classify(tol)?;
        if !class.kind.is_skt() {
            failures.push(format!("({name}, g) is not SKT (|dc| = {:.3e})", class.d_torsion.norm()));
        }
        Ok(Some(class))
    };
    let plus = classify(j_plus, "J+")?;
    let minus = classify(j_minus, "J-")?;
    let torsion_sum_norm = match (&plus, &minus) {
        (Some(p), Some(m)) => Some(p.torsion.try_add(&m.torsion)?.norm()),
        _ => None,
    };
    if let Some(s) = torsion_sum_norm {
        if s > tol {
            failures.push(format!("c+ + c- = {s:.3e} is not zero"));
        }
    }
    Ok(GeneralizedKahlerReport { plus, minus, torsion_sum_norm, failures })
}

/// `(max |ad_{JX} - J ad_X|, max |g([X,Y],Z) + g(Y,[X,Z])|)` over the basis.
pub fn adjoint_defects(algebra: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> (f64, f64) {
    let n = algebra.dim();
    let jm = j.endomorphism();
    let mut complex: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for x in 0..n {
        let ad = algebra.ad(x);
        let ad_j = algebra.ad_vector(&jm.image(x));
        complex = complex.max(ad_j.add(&jm.compose(&ad).scale(-1.0)).norm());
        let m = g.matrix() * ad.matrix();
        invariance = invariance.max(max_abs(&(&m + m.transpose())));
    }
    (complex, invariance)
}

/// True iff `(g, J)` is a complex Lie algebra with a bi-invariant metric.
pub fn adjoint_admissible(algebra: &LieAlgebra, j: &ComplexStructure, g: &Metric, tol: f64) -> bool {
    let (c, i) = adjoint_defects(algebra, j, g);
    c <= tol && i <= tol
}

/// Random metric compatible with `J`: `(H + JᵀHJ) / 2` for a random
/// positive definite `H` with eigenvalues bounded away from zero.
pub fn random_compatible_metric<R: Rng + ?Sized>(j: &ComplexStructure, rng: &mut R) -> Metric {
    let n = j.dim();
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let h = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
    let jm = j.endomorphism().matrix();
    Metric { g: (&h + jm.transpose() * &h * jm) * 0.5 }
}
