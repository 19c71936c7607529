//! Lie algebras given by coframe differentials, their Chevalley-Eilenberg
//! complex and basis-independent invariants.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, binomial, combinations};
use crate::multilinear::{Endomorphism, KForm};

/// Largest dimension for which [`LieAlgebra::fingerprint`] computes Betti
/// numbers (the middle exterior power grows like `C(n, n/2)`).
pub const MAX_BETTI_DIM: usize = 12;

/// A real Lie algebra with basis `e_1..e_n`.
///
/// The structure is stored both as the coframe differentials `de^k` and as
/// the bracket constants `[e_i, e_j] = Σ_k c^k_{ij} e_k`, related by
/// `de^k(e_i, e_j) = -c^k_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    differentials: Vec<KForm>,
    constants: Vec<f64>,
}

impl LieAlgebra {
    /// Builds the algebra from `de^1, ..., de^n`.
    pub fn from_differentials(differentials: Vec<KForm>) -> Result<Self> {
        let dim = differentials.len();
        if dim == 0 {
            return Err(Error::InvalidInput("a Lie algebra needs positive dimension".into()));
        }
        for (k, f) in differentials.iter().enumerate() {
            if f.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "de^{} lives in dimension {}, expected {dim}",
                    k + 1,
                    f.dim()
                )));
            }
            if f.degree() != 2 {
                return Err(Error::InvalidInput(format!(
                    "de^{} has degree {}, expected 2",
                    k + 1,
                    f.degree()
                )));
            }
        }
        let mut constants = vec![0.0; dim * dim * dim];
        for (k, f) in differentials.iter().enumerate() {
            for (idx, c) in f.terms() {
                let (i, j) = (idx[0], idx[1]);
                constants[(k * dim + i) * dim + j] = -c;
                constants[(k * dim + j) * dim + i] = c;
            }
        }
        Ok(LieAlgebra { dim, differentials, constants })
    }

    /// Builds the algebra from bracket constants, `c(k, i, j)` being the
    /// coefficient of `e_k` in `[e_i, e_j]`. Only `i < j` is read.
    pub fn from_brackets(dim: usize, c: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut differentials = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut terms = Vec::new();
            for i in 0..dim {
                for j in i + 1..dim {
                    let v = c(k, i, j);
                    if v != 0.0 {
                        terms.push((-v, vec![i, j]));
                    }
                }
            }
            differentials.push(KForm::from_terms(dim, 2, terms)?);
        }
        LieAlgebra::from_differentials(differentials)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra::from_differentials((0..dim).map(|_| KForm::zero(dim, 2)).collect())
            .expect("zero differentials are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `de^{k+1}` (zero-based `k`).
    pub fn differential(&self, k: usize) -> &KForm {
        &self.differentials[k]
    }

    pub fn differentials(&self) -> &[KForm] {
        &self.differentials
    }

    /// The tuple `(de^1, ..., de^n)` in the usual shorthand.
    pub fn structure_equations(&self, letter: &str) -> String {
        let parts: Vec<String> = self.differentials.iter().map(|f| f.display_with(letter).to_string()).collect();
        format!("({})", parts.join(", "))
    }

    /// Coefficient of `e_k` in `[e_i, e_j]`.
    pub fn structure_constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.constants[(k * self.dim + i) * self.dim + j]
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += w * self.structure_constant(k, i, j);
                }
            }
        }
        out
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| self.structure_constant(k, i, j))
    }

    /// `ad_{e_i}` as an endomorphism.
    pub fn ad(&self, i: usize) -> Endomorphism {
        let n = self.dim;
        Endomorphism::new(DMatrix::from_fn(n, n, |k, j| self.structure_constant(k, i, j)))
            .expect("square finite matrix")
    }

    pub fn ad_vector(&self, x: &DVector<f64>) -> Endomorphism {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] != 0.0 {
                m += self.ad(i).matrix() * x[i];
            }
        }
        Endomorphism::new(m).expect("square finite matrix")
    }

    /// Largest entry of the Jacobiator `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]`
    /// over basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let ek = unit(n, k);
                    let ei = unit(n, i);
                    let ej = unit(n, j);
                    let s = self.bracket(&self.bracket_basis(i, j), &ek)
                        + self.bracket(&self.bracket_basis(j, k), &ei)
                        + self.bracket(&self.bracket_basis(k, i), &ej);
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// Chevalley-Eilenberg differential, extended from `de^k` as a graded
    /// derivation.
    pub fn ce_differential(&self, form: &KForm) -> Result<KForm> {
        if form.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: form.dim() });
        }
        let n = self.dim;
        let mut out = KForm::zero(n, form.degree() + 1);
        for (idx, c) in form.terms() {
            for pos in 0..idx.len() {
                let left = KForm::basis(n, &idx[..pos])?;
                let right = KForm::basis(n, &idx[pos + 1..])?;
                let term = left.wedge(&self.differentials[idx[pos]])?.wedge(&right)?;
                let sign = if pos % 2 == 0 { c } else { -c };
                out = out.try_add(&term.scale(sign))?;
            }
        }
        Ok(out)
    }

    /// Matrix of `d: Λ^k → Λ^{k+1}` in the lexicographic bases.
    pub fn ce_matrix(&self, k: usize) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let cols = combinations(n, k);
        let mut m = DMatrix::zeros(binomial(n, k + 1), cols.len());
        for (c, idx) in cols.iter().enumerate() {
            let image = self.ce_differential(&KForm::basis(n, idx)?)?;
            m.set_column(c, &image.to_vector());
        }
        Ok(m)
    }

    /// Betti numbers `b_0..b_n` of the Chevalley-Eilenberg complex.
    pub fn cohomology(&self, tol: f64) -> Result<Cohomology> {
        let n = self.dim;
        // ranks[k] = rank of d on Λ^k
        let mut ranks = vec![0usize; n + 1];
        let mut ambiguous_degrees = Vec::new();
        for k in 1..n {
            let info = linalg::numerical_rank(&self.ce_matrix(k)?, tol);
            ranks[k] = info.rank;
            if info.ambiguous {
                ambiguous_degrees.push(k);
            }
        }
        let betti = (0..=n)
            .map(|k| {
                let prev = if k == 0 { 0 } else { ranks[k - 1] };
                binomial(n, k) - ranks[k] - prev
            })
            .collect();
        Ok(Cohomology { betti, ambiguous_degrees })
    }

    pub fn cohomology_dims(&self, tol: f64) -> Result<Vec<usize>> {
        Ok(self.cohomology(tol)?.betti)
    }

    /// Orthonormal basis (columns) of `[A, B]` for subspaces given as columns.
    pub fn bracket_span(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
        let mut cols = Vec::with_capacity(a.ncols() * b.ncols());
        for i in 0..a.ncols() {
            let x = a.column(i).into_owned();
            for j in 0..b.ncols() {
                cols.push(self.bracket(&x, &b.column(j).into_owned()));
            }
        }
        linalg::column_span(&linalg::from_columns(self.dim, &cols), tol)
    }

    /// Orthonormal basis (columns) of `[g, g]`.
    pub fn derived_algebra(&self, tol: f64) -> DMatrix<f64> {
        let id = DMatrix::identity(self.dim, self.dim);
        self.bracket_span(&id, &id, tol)
    }

    pub fn derived_series(&self, tol: f64) -> Vec<usize> {
        let mut current = DMatrix::identity(self.dim, self.dim);
        let mut dims = vec![self.dim];
        loop {
            let next = self.bracket_span(&current, &current, tol);
            if next.ncols() == current.ncols() {
                return dims;
            }
            dims.push(next.ncols());
            if next.ncols() == 0 {
                return dims;
            }
            current = next;
        }
    }

    pub fn lower_central_series(&self, tol: f64) -> Vec<usize> {
        let id = DMatrix::identity(self.dim, self.dim);
        let mut current = id.clone();
        let mut dims = vec![self.dim];
        loop {
            let next = self.bracket_span(&id, &current, tol);
            if next.ncols() == current.ncols() {
                return dims;
            }
            dims.push(next.ncols());
            if next.ncols() == 0 {
                return dims;
            }
            current = next;
        }
    }

    pub fn center_dim(&self, tol: f64) -> usize {
        // X is central iff Σ_i x_i c^k_{ij} = 0 for all j, k
        let n = self.dim;
        let m = DMatrix::from_fn(n * n, n, |row, i| {
            let (j, k) = (row / n, row % n);
            self.structure_constant(k, i, j)
        });
        linalg::null_space(&m, tol).ncols()
    }

    /// `max_i |tr ad_{e_i}|`.
    pub fn unimodularity_defect(&self) -> f64 {
        (0..self.dim).map(|i| self.ad(i).trace().abs()).fold(0.0, f64::max)
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.unimodularity_defect() <= tol
    }

    pub fn fingerprint(&self, tol: f64) -> Result<Fingerprint> {
        let derived_series = self.derived_series(tol);
        let lower_central_series = self.lower_central_series(tol);
        let step = |s: &[usize]| (s.last() == Some(&0)).then(|| s.len() - 1);
        let betti = if self.dim <= MAX_BETTI_DIM { Some(self.cohomology_dims(tol)?) } else { None };
        Ok(Fingerprint {
            solvable_step: step(&derived_series),
            nilpotent_step: step(&lower_central_series),
            derived_series,
            lower_central_series,
            center_dim: self.center_dim(tol),
            unimodular: self.is_unimodular(tol),
            betti,
        })
    }

    /// The same algebra in the basis `e'_i = Σ_a p[(a, i)] e_a`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<LieAlgebra> {
        let n = self.dim;
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.nrows() });
        }
        let inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("change of basis is singular".into()))?;
        let cols: Vec<DVector<f64>> = (0..n).map(|i| p.column(i).into_owned()).collect();
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let b = &inv * self.bracket(&cols[i], &cols[j]);
                for k in 0..n {
                    c[(k * n + i) * n + j] = b[k];
                }
            }
        }
        LieAlgebra::from_brackets(n, |k, i, j| c[(k * n + i) * n + j])
    }
}

pub(crate) fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Betti numbers plus the degrees whose rank decision was close to the
/// threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohomology {
    pub betti: Vec<usize>,
    pub ambiguous_degrees: Vec<usize>,
}

/// Basis-independent invariants used in place of isomorphism testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub derived_series: Vec<usize>,
    pub lower_central_series: Vec<usize>,
    pub center_dim: usize,
    pub solvable_step: Option<usize>,
    pub nilpotent_step: Option<usize>,
    pub unimodular: bool,
    /// `None` above [`MAX_BETTI_DIM`].
    pub betti: Option<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, idx: &[usize]) -> KForm {
        KForm::basis(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>()).unwrap()
    }

    fn g1() -> LieAlgebra {
        LieAlgebra::from_differentials(vec![e(4, &[2, 4]), -e(4, &[1, 4]), e(4, &[1, 2]), KForm::zero(4, 2)])
            .unwrap()
    }

    fn g3() -> LieAlgebra {
        LieAlgebra::from_differentials(vec![
            KForm::zero(4, 2),
            KForm::zero(4, 2),
            e(4, &[1, 2]),
            KForm::zero(4, 2),
        ])
        .unwrap()
    }

    #[test]
    fn brackets_follow_sign_convention() {
        let g = g1();
        // de^3 = e^{12} means [e_1, e_2] = -e_3
        assert_eq!(g.bracket_basis(0, 1), -unit(4, 2));
        assert_eq!(g.bracket_basis(1, 0), unit(4, 2));
    }

    #[test]
    fn jacobi_examples() {
        assert!(g1().jacobi_defect() <= 1e-12);
        assert_eq!(LieAlgebra::abelian(4).jacobi_defect(), 0.0);
        let mut d = g1().differentials().to_vec();
        d[2] = &d[2] + &e(4, &[3, 4]);
        let bad = LieAlgebra::from_differentials(d).unwrap();
        // triple (e_1, e_2, e_4): [[e1,e2],e4] = [-e3, e4] = e3, the other two vanish
        assert!((bad.jacobi_defect() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn differential_examples() {
        let g = g1();
        assert_eq!(g.ce_differential(&e(4, &[3])).unwrap(), e(4, &[1, 2]));
        // derivation oracle: d(e^{12}) = de^1 ∧ e^2 - e^1 ∧ de^2
        let oracle = &e(4, &[2, 4]).wedge(&e(4, &[2])).unwrap() - &e(4, &[1]).wedge(&-e(4, &[1, 4])).unwrap();
        assert!(oracle.is_zero(0.0));
        assert!(g.ce_differential(&e(4, &[1, 2])).unwrap().is_zero(0.0));
        for k in 0..4 {
            for idx in combinations(4, k) {
                let f = KForm::basis(4, &idx).unwrap();
                let dd = g.ce_differential(&g.ce_differential(&f).unwrap()).unwrap();
                assert!(dd.is_zero(1e-12));
            }
        }
    }

    #[test]
    fn cohomology_examples() {
        assert_eq!(LieAlgebra::abelian(4).cohomology_dims(1e-9).unwrap(), vec![1, 4, 6, 4, 1]);
        let b = g1().cohomology_dims(1e-9).unwrap();
        assert_eq!(b[0], 1);
        // oracle: ker(d|Λ^1) is cut out by the rank of the 6x4 matrix of d on 1-forms
        let rank = linalg::numerical_rank(&g1().ce_matrix(1).unwrap(), 1e-9).rank;
        assert_eq!(rank, 3);
        assert_eq!(b[1], 4 - rank);
        assert_eq!(b[1], 1);
        assert_eq!(b[4], 1);
    }

    #[test]
    fn fingerprint_examples() {
        let f = g3().fingerprint(1e-9).unwrap();
        assert_eq!(f.nilpotent_step, Some(2));
        assert_eq!(f.solvable_step, Some(2));
        assert_eq!(f.derived_series, vec![4, 1, 0]);
        assert_eq!(f.center_dim, 2);
        assert!(f.unimodular);
        let a = LieAlgebra::abelian(3).fingerprint(1e-9).unwrap();
        assert_eq!(a.nilpotent_step, Some(1));
        assert_eq!(a.center_dim, 3);
        let g = g1().fingerprint(1e-9).unwrap();
        assert_eq!(g.nilpotent_step, None);
        assert_eq!(g.derived_series, vec![4, 3, 1, 0]);
        assert_eq!(g.solvable_step, Some(3));
        assert_eq!(g.center_dim, 1);
    }

    #[test]
    fn perfect_algebra_has_no_steps() {
        // so(3): de^1 = e^{23}, de^2 = -e^{13}, de^3 = e^{12}
        let so3 = LieAlgebra::from_differentials(vec![e(3, &[2, 3]), -e(3, &[1, 3]), e(3, &[1, 2])]).unwrap();
        assert!(so3.jacobi_defect() < 1e-12);
        let f = so3.fingerprint(1e-9).unwrap();
        assert_eq!(f.derived_series, vec![3]);
        assert_eq!(f.solvable_step, None);
        assert_eq!(f.betti, Some(vec![1, 0, 0, 1]));
    }

    #[test]
    fn change_basis_roundtrip() {
        let g = g1();
        let p = DMatrix::from_row_slice(4, 4, &[
            1.0, 2.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 1.0, //
            0.0, 0.0, 3.0, 0.0, //
            1.0, 0.0, 0.0, 1.0,
        ]);
        let h = g.change_basis(&p).unwrap();
        assert!(h.jacobi_defect() < 1e-12);
        let back = h.change_basis(&p.try_inverse().unwrap()).unwrap();
        for k in 0..4 {
            assert!(back.differential(k).distance(g.differential(k)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(LieAlgebra::from_differentials(vec![]).is_err());
        assert!(LieAlgebra::from_differentials(vec![e(3, &[1, 2]), KForm::zero(3, 2)]).is_err());
        assert!(LieAlgebra::from_differentials(vec![e(2, &[1]), KForm::zero(2, 2)]).is_err());
    }
}
