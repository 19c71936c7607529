//! Linear connections on Lie algebras, their curvature and Hermitian
//! parallelism, the canonical flat connection and two explicit families.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::hermitian::{ComplexStructure, Metric};
use crate::liealg::{unit, LieAlgebra};
use crate::linalg::max_abs;
use crate::multilinear::Endomorphism;

/// `D_{e_1}, ..., D_{e_n}`, extended linearly in the lower slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    maps: Vec<Endomorphism>,
}

impl Connection {
    pub fn new(maps: Vec<Endomorphism>) -> Result<Self> {
        let n = maps.len();
        if n == 0 {
            return Err(Error::InvalidInput("a connection needs at least one map".into()));
        }
        if let Some(bad) = maps.iter().find(|m| m.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        Ok(Connection { maps })
    }

    pub fn zero(n: usize) -> Self {
        Connection { maps: vec![Endomorphism::zero(n); n] }
    }

    /// `D_X = ad_X`. Flat for every Lie algebra, by the Jacobi identity.
    pub fn adjoint(algebra: &LieAlgebra) -> Self {
        Connection { maps: (0..algebra.dim()).map(|i| algebra.ad(i)).collect() }
    }

    /// `D_Y = φ(Y) M`. Flat whenever `φ` vanishes on `[g, g]`.
    pub fn rank_one(phi: &DVector<f64>, m: &Endomorphism) -> Result<Self> {
        if phi.len() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: phi.len() });
        }
        Connection::new(phi.iter().map(|&p| m.scale(p)).collect())
    }

    pub fn dim(&self) -> usize {
        self.maps.len()
    }

    pub fn map(&self, i: usize) -> &Endomorphism {
        &self.maps[i]
    }

    pub fn maps(&self) -> &[Endomorphism] {
        &self.maps
    }

    /// `D_X` for an arbitrary vector.
    pub fn along(&self, x: &DVector<f64>) -> Endomorphism {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, d) in self.maps.iter().enumerate() {
            if x[i] != 0.0 {
                m += d.matrix() * x[i];
            }
        }
        Endomorphism::new(m).expect("finite")
    }

    /// Max entry of `R(e_i, e_j) = [D_i, D_j] - D_{[e_i, e_j]}` over pairs.
    pub fn curvature_norm(&self, algebra: &LieAlgebra) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let r = self.maps[i].commutator(&self.maps[j]).matrix()
                    - self.along(&algebra.bracket_basis(i, j)).matrix();
                worst = worst.max(max_abs(&r));
            }
        }
        worst
    }

    /// Max of `|g D_i + D_iᵀ g|` and `|[D_i, J]|`.
    pub fn hermitian_parallel_defect(&self, j: &ComplexStructure, g: &Metric) -> f64 {
        let gm = g.matrix();
        self.maps
            .iter()
            .map(|d| {
                let skew = max_abs(&(gm * d.matrix() + d.matrix().transpose() * gm));
                skew.max(d.commutator(j.endomorphism()).norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian_parallel(&self, j: &ComplexStructure, g: &Metric, tol: f64) -> bool {
        self.hermitian_parallel_defect(j, g) <= tol
    }

    /// Max of `|[D_i, A]|`, e.g. to test `DJ₋ = 0` for a second structure.
    pub fn commutation_defect(&self, a: &Endomorphism) -> f64 {
        self.maps.iter().map(|d| d.commutator(a).norm()).fold(0.0, f64::max)
    }
}

pub fn curvature_norm(algebra: &LieAlgebra, d: &Connection) -> f64 {
    d.curvature_norm(algebra)
}

pub fn hermitian_parallel_check(d: &Connection, j: &ComplexStructure, g: &Metric, tol: f64) -> bool {
    d.is_hermitian_parallel(j, g, tol)
}

/// The flat Hermitian connection `D_Y = φ(Y)(-J)`.
///
/// `φ(Y) = g(P e_*, Y) / g(P e_*, e_*)` where `P` is the `g`-orthogonal
/// projection onto `[g, g]^⊥` and `e_*` is the basis vector farthest from
/// `[g, g]` (lowest index on ties). When `[g, g]` is spanned by the other
/// basis vectors this is `D_{e_*} = -J` and zero on the rest.
pub fn canonical_flat_connection(
    algebra: &LieAlgebra,
    j: &ComplexStructure,
    g: &Metric,
    tol: f64,
) -> Result<Connection> {
    let n = algebra.dim();
    let (star, p_star) = transversal_direction(algebra, g, tol)?;
    let gm = g.matrix();
    let phi = (gm * &p_star) / p_star.dot(&(gm * unit(n, star)));
    Connection::rank_one(&phi, &j.endomorphism().scale(-1.0))
}

/// Index of the basis vector farthest (in `g`) from `[g, g]` and its
/// projection onto the orthogonal complement.
pub fn transversal_direction(algebra: &LieAlgebra, g: &Metric, tol: f64) -> Result<(usize, DVector<f64>)> {
    let n = algebra.dim();
    let b = algebra.derived_algebra(tol);
    if b.ncols() == n {
        return Err(Error::NoSuchConnection);
    }
    let gm = g.matrix();
    let proj = if b.ncols() == 0 {
        DMatrix::identity(n, n)
    } else {
        let gram = b.transpose() * gm * &b;
        let inv = gram.try_inverse().ok_or_else(|| Error::Internal("singular Gram matrix".into()))?;
        DMatrix::identity(n, n) - &b * inv * b.transpose() * gm
    };
    let dist: Vec<f64> = (0..n)
        .map(|i| {
            let v = proj.column(i).into_owned();
            v.dot(&(gm * &v)).max(0.0).sqrt()
        })
        .collect();
    let best = dist.iter().cloned().fold(0.0, f64::max);
    let star = dist.iter().position(|&d| d >= best - tol * best.max(1.0)).expect("non-empty");
    Ok((star, proj.column(star).into_owned()))
}

/// The 4×4 pattern shared by both families:
/// rows `[0,x1,x2,x3], [-x1,0,-x3,x2], [-x2,x3,0,x4], [-x3,-x2,-x4,0]`.
pub fn unitary_pattern(x: [f64; 4]) -> Endomorphism {
    let [x1, x2, x3, x4] = x;
    Endomorphism::new(DMatrix::from_row_slice(4, 4, &[
        0.0, x1, x2, x3, //
        -x1, 0.0, -x3, x2, //
        -x2, x3, 0.0, x4, //
        -x3, -x2, -x4, 0.0,
    ]))
    .expect("finite")
}

/// `D_{e_1} = D_{e_2} = D_{e_3} = 0` and `D_{e_4}` the displayed matrix in
/// `(a12, a13, a14, a34)`.
pub fn family_g1(a12: f64, a13: f64, a14: f64, a34: f64) -> Connection {
    let mut maps = vec![Endomorphism::zero(4); 4];
    maps[3] = unitary_pattern([a12, a13, a14, a34]);
    Connection { maps }
}

/// A member of the `g₃` family together with its stated constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct G3Family {
    pub connection: Connection,
    /// Residuals of the four constraint equations.
    pub residuals: [f64; 4],
    pub admissible: bool,
}

/// `D_{e_3} = 0` and `D_{e_i}` the pattern in `(a_{i,1}, ..., a_{i,4})` for
/// `i = 1, 2, 4`; `rows` holds those three parameter rows in that order.
///
/// The constraint list is read with `a_{3,j}` meaning `a_{4,j}` since the
/// family has no third row.
pub fn family_g3(rows: [[f64; 4]; 3], tol: f64) -> G3Family {
    let [a1, a2, a4] = rows;
    let mut maps = vec![Endomorphism::zero(4); 4];
    maps[0] = unitary_pattern(a1);
    maps[1] = unitary_pattern(a2);
    maps[3] = unitary_pattern(a4);
    let residuals = [
        a2[1] * (a1[0] - a1[3]) - a1[1] * (a2[0] - a2[3]),
        a1[2] * a2[1] - a1[1] * a2[2],
        a4[2] * a2[1] - a4[1] * a2[2],
        a2[1] * (a4[0] - a4[3]) - a4[1] * (a2[0] - a2[3]),
    ];
    let scale = rows.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
    let admissible = residuals.iter().all(|r| r.abs() <= tol * scale * scale);
    G3Family { connection: Connection { maps }, residuals, admissible }
}

/// Random parameters for the `g₃` family satisfying the constraints with
/// `a_{2,2} ≠ 0`: the `su(2)` parts `(a_{i,1} - a_{i,4}, a_{i,2}, a_{i,3})`
/// are all multiples of the second row's.
pub fn sample_g3_params<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 4]; 3] {
    let mut a22: f64 = rng.random_range(0.2..2.0);
    if rng.random_bool(0.5) {
        a22 = -a22;
    }
    let v = [rng.random_range(-2.0..2.0), a22, rng.random_range(-2.0..2.0)];
    let mut rows = [[0.0; 4]; 3];
    for (i, row) in rows.iter_mut().enumerate() {
        let lambda = if i == 1 { 1.0 } else { rng.random_range(-2.0..2.0) };
        let trace: f64 = rng.random_range(-2.0..2.0);
        *row = [
            (trace + lambda * v[0]) / 2.0,
            lambda * v[1],
            lambda * v[2],
            (trace - lambda * v[0]) / 2.0,
        ];
    }
    rows
}

/// Random element of `u(J, g)`: commutes with `J` and is `g`-skew.
pub fn random_unitary<R: Rng + ?Sized>(j: &ComplexStructure, g: &Metric, rng: &mut R) -> Endomorphism {
    let n = j.dim();
    let s = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let jm = j.endomorphism().matrix();
    let s1 = (&s - jm * &s * jm) * 0.5;
    let gm = g.matrix();
    let ginv = gm.clone().try_inverse().expect("positive definite");
    let m = (&s1 - &ginv * s1.transpose() * gm) * 0.5;
    Endomorphism::new(m).expect("finite")
}

/// A random flat Hermitian connection `D_Y = φ(Y) M` with `M ∈ u(J, g)` and
/// `φ = g(P e_*, ·)` as in [`canonical_flat_connection`].
pub fn random_flat_hermitian<R: Rng + ?Sized>(
    algebra: &LieAlgebra,
    j: &ComplexStructure,
    g: &Metric,
    tol: f64,
    rng: &mut R,
) -> Result<Connection> {
    let (_, p_star) = transversal_direction(algebra, g, tol)?;
    let phi = g.matrix() * p_star;
    Connection::rank_one(&phi, &random_unitary(j, g, rng))
}
