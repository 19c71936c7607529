//! Alternating forms on `R^n`, their complexification and the `(p, q)`
//! splitting induced by an almost complex structure.
//!
//! A [`KForm`] stores coefficients on strictly increasing multi-indices, so
//! `e^{13}` is the key `[0, 2]`. Evaluation uses the determinant convention
//! `(e^1 ∧ e^2)(e_1, e_2) = 1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, combinations};

/// Sorts `idx` in place and returns the sign of the sorting permutation, or
/// `None` when an index repeats.
fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    Some(sign)
}

/// Real alternating `k`-form on `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        KForm { dim, degree, coeffs: BTreeMap::new() }
    }

    /// The constant 0-form `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        let mut f = KForm::zero(dim, 0);
        f.add_term(Vec::new(), c);
        f
    }

    /// `e^{i_1} ∧ ... ∧ e^{i_k}` for zero-based indices in any order.
    pub fn basis(dim: usize, idx: &[usize]) -> Result<Self> {
        KForm::from_terms(dim, idx.len(), [(1.0, idx.to_vec())])
    }

    /// Builds a form from `(coefficient, zero-based multi-index)` terms. The
    /// indices need not be sorted; repeated indices contribute nothing.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<usize>)>,
    {
        let mut f = KForm::zero(dim, degree);
        for (c, mut idx) in terms {
            if idx.len() != degree {
                return Err(Error::DimensionMismatch { expected: degree, found: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidInput(format!(
                    "index {} out of range for dimension {dim}",
                    bad + 1
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient {c}")));
            }
            if let Some(s) = sort_with_sign(&mut idx) {
                f.add_term(idx, s * c);
            }
        }
        Ok(f)
    }

    /// The 1-form `Σ c_i e^i`.
    pub fn covector(coeffs: &[f64]) -> Self {
        let mut f = KForm::zero(coeffs.len(), 1);
        for (i, &c) in coeffs.iter().enumerate() {
            f.add_term(vec![i], c);
        }
        f
    }

    /// Coordinates in the lexicographic basis of `Λ^k`.
    pub fn from_vector(dim: usize, degree: usize, v: &DVector<f64>) -> Self {
        let mut f = KForm::zero(dim, degree);
        for (idx, &c) in combinations(dim, degree).into_iter().zip(v.iter()) {
            f.add_term(idx, c);
        }
        f
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let basis = combinations(self.dim, self.degree);
        DVector::from_iterator(basis.len(), basis.iter().map(|i| self.coeff_sorted(i)))
    }

    fn add_term(&mut self, idx: Vec<usize>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.coeffs.entry(idx) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn coeff_sorted(&self, idx: &[usize]) -> f64 {
        self.coeffs.get(idx).copied().unwrap_or(0.0)
    }

    /// Coefficient on `e^{idx}` for indices in any order (antisymmetric).
    pub fn coeff(&self, idx: &[usize]) -> f64 {
        let mut idx = idx.to_vec();
        match sort_with_sign(&mut idx) {
            Some(s) => s * self.coeff_sorted(&idx),
            None => 0.0,
        }
    }

    /// Non-zero terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest absolute coefficient.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        KForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().filter(|(_, v)| v.abs() > tol).map(|(k, &v)| (k.clone(), v)).collect(),
        }
    }

    fn check_same_space(&self, other: &KForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, found: other.degree });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &KForm) -> Result<KForm> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (k, &v) in &other.coeffs {
            out.add_term(k.clone(), v);
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> KForm {
        let mut out = KForm::zero(self.dim, self.degree);
        for (k, &v) in &self.coeffs {
            out.add_term(k.clone(), c * v);
        }
        out
    }

    /// Largest coefficient of `self - other`.
    pub fn distance(&self, other: &KForm) -> Result<f64> {
        self.check_same_space(other)?;
        Ok((self - other).norm())
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = KForm::zero(self.dim, self.degree + other.degree);
        if self.degree + other.degree > self.dim {
            return Ok(out);
        }
        for (a, &x) in &self.coeffs {
            for (b, &y) in &other.coeffs {
                let mut idx = Vec::with_capacity(a.len() + b.len());
                idx.extend_from_slice(a);
                idx.extend_from_slice(b);
                if let Some(s) = sort_with_sign(&mut idx) {
                    out.add_term(idx, s * x * y);
                }
            }
        }
        Ok(out)
    }

    /// `(A^*α)(X_1, ..., X_k) = α(A X_1, ..., A X_k)`.
    pub fn pullback(&self, a: &Endomorphism) -> Result<KForm> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        let rows: Vec<KForm> = (0..self.dim).map(|i| a.pullback_covector(i)).collect();
        let mut out = KForm::zero(self.dim, self.degree);
        for (idx, &c) in &self.coeffs {
            let mut acc = KForm::constant(self.dim, c);
            for &i in idx {
                acc = acc.wedge(&rows[i])?;
            }
            out = out.try_add(&acc)?;
        }
        Ok(out)
    }

    /// Extension of `α ↦ α∘A` on 1-forms to all degrees as a derivation:
    /// `A·(α ∧ β) = (A·α) ∧ β + α ∧ (A·β)`.
    pub fn derivation(&self, a: &Endomorphism) -> Result<KForm> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        let m = a.matrix();
        let mut out = KForm::zero(self.dim, self.degree);
        for (idx, &c) in &self.coeffs {
            for pos in 0..idx.len() {
                let row = idx[pos];
                for b in 0..self.dim {
                    let entry = m[(row, b)];
                    if entry == 0.0 {
                        continue;
                    }
                    let mut new_idx = idx.clone();
                    new_idx[pos] = b;
                    if let Some(s) = sort_with_sign(&mut new_idx) {
                        out.add_term(new_idx, s * c * entry);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `α(v_1, ..., v_k)`.
    pub fn evaluate(&self, vectors: &[DVector<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, found: vectors.len() });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let k = self.degree;
        let mut total = 0.0;
        for (idx, &c) in &self.coeffs {
            let m = DMatrix::from_fn(k, k, |l, j| vectors[j][idx[l]]);
            total += c * if k == 0 { 1.0 } else { m.determinant() };
        }
        Ok(total)
    }

    /// Value on basis vectors `e_{i_1}, ..., e_{i_k}` (any order).
    pub fn evaluate_basis(&self, idx: &[usize]) -> f64 {
        self.coeff(idx)
    }

    /// Full antisymmetric matrix `(α(e_a, e_b))` of a 2-form.
    pub fn to_skew_matrix(&self) -> Result<DMatrix<f64>> {
        if self.degree != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.degree });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (idx, &c) in &self.coeffs {
            m[(idx[0], idx[1])] = c;
            m[(idx[1], idx[0])] = -c;
        }
        Ok(m)
    }

    /// The 2-form with `α(e_a, e_b) = m[(a, b)]`, read from the upper triangle.
    pub fn from_skew_matrix(m: &DMatrix<f64>) -> KForm {
        let n = m.nrows();
        let mut f = KForm::zero(n, 2);
        for a in 0..n {
            for b in a + 1..n {
                f.add_term(vec![a, b], m[(a, b)]);
            }
        }
        f
    }
}

impl Add for &KForm {
    type Output = KForm;
    /// Panics on a dimension or degree mismatch; use [`KForm::try_add`] to
    /// get an error instead.
    fn add(self, rhs: &KForm) -> KForm {
        self.try_add(rhs).expect("adding forms of different type")
    }
}

impl Add for KForm {
    type Output = KForm;
    fn add(self, rhs: KForm) -> KForm {
        &self + &rhs
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        self + &rhs.scale(-1.0)
    }
}

impl Sub for KForm {
    type Output = KForm;
    fn sub(self, rhs: KForm) -> KForm {
        &self - &rhs
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

impl Neg for KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-1.0)
    }
}

impl Mul<&KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: &KForm) -> KForm {
        rhs.scale(self)
    }
}

impl Mul<KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: KForm) -> KForm {
        rhs.scale(self)
    }
}

fn write_index(f: &mut fmt::Formatter<'_>, letter: &str, idx: &[usize], dim: usize) -> fmt::Result {
    let sep = if dim >= 10 { "," } else { "" };
    let body: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    if idx.is_empty() {
        write!(f, "1")
    } else {
        write!(f, "{letter}^{{{}}}", body.join(sep))
    }
}

impl KForm {
    /// Like `Display` but with another coframe letter, e.g. `f^{24}`.
    pub fn display_with<'a>(&'a self, letter: &'a str) -> impl fmt::Display + 'a {
        Labelled { form: self, letter }
    }
}

struct Labelled<'a> {
    form: &'a KForm,
    letter: &'a str,
}

impl fmt::Display for Labelled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.form.write_with(f, self.letter)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, "e")
    }
}

impl KForm {
    fn write_with(&self, f: &mut fmt::Formatter<'_>, letter: &str) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (n, (idx, &c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            if n == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            }
            if (mag - 1.0).abs() > 0.0 || idx.is_empty() {
                write!(f, "{mag} ")?;
            }
            write_index(f, letter, idx, self.dim)?;
        }
        Ok(())
    }
}

/// Complex-valued alternating form `re + i·im`, optionally tagged with a
/// bidegree `(p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexKForm {
    pub re: KForm,
    pub im: KForm,
    pub bidegree: Option<(usize, usize)>,
}

impl ComplexKForm {
    pub fn new(re: KForm, im: KForm) -> Result<Self> {
        re.check_same_space(&im)?;
        Ok(ComplexKForm { re, im, bidegree: None })
    }

    pub fn from_real(re: KForm) -> Self {
        let im = KForm::zero(re.dim, re.degree);
        ComplexKForm { re, im, bidegree: None }
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        ComplexKForm::from_real(KForm::zero(dim, degree))
    }

    pub fn dim(&self) -> usize {
        self.re.dim
    }

    pub fn degree(&self) -> usize {
        self.re.degree
    }

    pub fn with_bidegree(mut self, p: usize, q: usize) -> Self {
        self.bidegree = Some((p, q));
        self
    }

    pub fn coeff(&self, idx: &[usize]) -> Complex64 {
        Complex64::new(self.re.coeff(idx), self.im.coeff(idx))
    }

    pub fn norm(&self) -> f64 {
        let mut keys: Vec<&Vec<usize>> = self.re.coeffs.keys().collect();
        keys.extend(self.im.coeffs.keys());
        keys.into_iter()
            .map(|k| Complex64::new(self.re.coeff_sorted(k), self.im.coeff_sorted(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        ComplexKForm {
            re: self.re.clone(),
            im: self.im.scale(-1.0),
            bidegree: self.bidegree.map(|(p, q)| (q, p)),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexKForm {
            re: &self.re.scale(c.re) - &self.im.scale(c.im),
            im: &self.re.scale(c.im) + &self.im.scale(c.re),
            bidegree: self.bidegree,
        }
    }

    pub fn try_add(&self, other: &ComplexKForm) -> Result<Self> {
        let bidegree = if self.bidegree == other.bidegree { self.bidegree } else { None };
        Ok(ComplexKForm { re: self.re.try_add(&other.re)?, im: self.im.try_add(&other.im)?, bidegree })
    }

    pub fn try_sub(&self, other: &ComplexKForm) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn wedge(&self, other: &ComplexKForm) -> Result<Self> {
        let re = self.re.wedge(&other.re)?.try_add(&self.im.wedge(&other.im)?.scale(-1.0))?;
        let im = self.re.wedge(&other.im)?.try_add(&self.im.wedge(&other.re)?)?;
        let bidegree = match (self.bidegree, other.bidegree) {
            (Some((p, q)), Some((r, s))) => Some((p + r, q + s)),
            _ => None,
        };
        Ok(ComplexKForm { re, im, bidegree })
    }

    pub fn derivation(&self, a: &Endomorphism) -> Result<Self> {
        Ok(ComplexKForm { re: self.re.derivation(a)?, im: self.im.derivation(a)?, bidegree: None })
    }

    pub fn pullback(&self, a: &Endomorphism) -> Result<Self> {
        Ok(ComplexKForm { re: self.re.pullback(a)?, im: self.im.pullback(a)?, bidegree: self.bidegree })
    }

    /// Interleaved `(re, im)` coordinates in the lexicographic basis.
    pub fn to_real_vector(&self) -> DVector<f64> {
        let re = self.re.to_vector();
        let im = self.im.to_vector();
        DVector::from_iterator(2 * re.len(), re.iter().zip(im.iter()).flat_map(|(&a, &b)| [a, b]))
    }

    /// Projection onto the `(p, k - p)` component.
    pub fn bidegree_part(&self, j: &Endomorphism, p: usize, tol: f64) -> Result<Self> {
        check_almost_complex(j, tol)?;
        let k = self.degree();
        if p > k {
            return Ok(ComplexKForm::zero(self.dim(), k).with_bidegree(p, 0));
        }
        Ok(project_eigen(self, j, p)?.with_bidegree(p, k - p))
    }

    /// All `(p, q)` components with `p + q = k`, in order of increasing `p`.
    /// They sum to the input.
    pub fn bidegree_decompose(&self, j: &Endomorphism, tol: f64) -> Result<Vec<ComplexKForm>> {
        check_almost_complex(j, tol)?;
        let k = self.degree();
        (0..=k).map(|p| Ok(project_eigen(self, j, p)?.with_bidegree(p, k - p))).collect()
    }
}

impl fmt::Display for ComplexKForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + i({})", self.re, self.im)
    }
}

/// On `Λ^{p,q}` the derivation extension of `α ↦ α∘J` acts as `i(p - q)`.
/// The projection onto `Λ^{p,k-p}` is the Lagrange interpolation polynomial
/// in that operator.
fn project_eigen(form: &ComplexKForm, j: &Endomorphism, p: usize) -> Result<ComplexKForm> {
    let k = form.degree();
    let nu = |p: usize| 2.0 * p as f64 - k as f64;
    let target = nu(p);
    let mut r = ComplexKForm { bidegree: None, ..form.clone() };
    for other in (0..=k).filter(|&o| o != p) {
        let mu = nu(other);
        let l = r.derivation(j)?;
        // (L - iμ) r
        let u = l.re.try_add(&r.im.scale(mu))?;
        let v = l.im.try_add(&r.re.scale(-mu))?;
        // divide by i(target - μ)
        let d = target - mu;
        r = ComplexKForm { re: v.scale(1.0 / d), im: u.scale(-1.0 / d), bidegree: None };
    }
    Ok(r)
}

/// `max |J² + id|`; errors when it exceeds `tol`.
pub fn check_almost_complex(j: &Endomorphism, tol: f64) -> Result<()> {
    let defect = j.almost_complex_defect();
    if defect > tol * j.norm().powi(2).max(1.0) || !j.dim().is_multiple_of(2) {
        return Err(Error::NotAlmostComplex { defect });
    }
    Ok(())
}

/// Linear endomorphism of `R^n`; entry `(a, b)` is the coefficient of `e_a`
/// in the image of `e_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Endomorphism(DMatrix<f64>);

impl Endomorphism {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Endomorphism(m))
    }

    pub fn identity(n: usize) -> Self {
        Endomorphism(DMatrix::identity(n, n))
    }

    pub fn zero(n: usize) -> Self {
        Endomorphism(DMatrix::zeros(n, n))
    }

    /// The complex structure `J e_{2i-1} = e_{2i}, J e_{2i} = -e_{2i-1}`
    /// (one-based).
    pub fn standard_complex(n: usize) -> Self {
        Endomorphism::block_complex(&vec![1.0; n / 2])
    }

    /// Block complex structure with `J e_{2i-1} = s_i e_{2i}`.
    pub fn block_complex(signs: &[f64]) -> Self {
        let n = 2 * signs.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &s) in signs.iter().enumerate() {
            m[(2 * i + 1, 2 * i)] = s;
            m[(2 * i, 2 * i + 1)] = -s;
        }
        Endomorphism(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    /// Image of the basis vector `e_b`.
    pub fn image(&self, b: usize) -> DVector<f64> {
        self.0.column(b).into_owned()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Endomorphism) -> Endomorphism {
        Endomorphism(&self.0 * &other.0)
    }

    pub fn commutator(&self, other: &Endomorphism) -> Endomorphism {
        Endomorphism(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn scale(&self, c: f64) -> Endomorphism {
        Endomorphism(&self.0 * c)
    }

    pub fn add(&self, other: &Endomorphism) -> Endomorphism {
        Endomorphism(&self.0 + &other.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Largest absolute entry.
    pub fn norm(&self) -> f64 {
        linalg::max_abs(&self.0)
    }

    pub fn almost_complex_defect(&self) -> f64 {
        let n = self.dim();
        linalg::max_abs(&(&self.0 * &self.0 + DMatrix::identity(n, n)))
    }

    /// `A^* e^i = Σ_b A_{ib} e^b`.
    fn pullback_covector(&self, i: usize) -> KForm {
        KForm::covector(&self.0.row(i).iter().cloned().collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, idx: &[usize]) -> KForm {
        let zero_based: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        KForm::basis(dim, &zero_based).unwrap()
    }

    fn j4() -> Endomorphism {
        Endomorphism::standard_complex(4)
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(e(4, &[1]).wedge(&e(4, &[2])).unwrap(), e(4, &[1, 2]));
        assert!(e(4, &[1, 2]).wedge(&e(4, &[1, 2])).unwrap().is_zero(0.0));
        assert!(e(4, &[2, 4]).wedge(&e(4, &[2])).unwrap().is_zero(0.0));
        assert_eq!(e(4, &[2]).wedge(&e(4, &[1])).unwrap(), -e(4, &[1, 2]));
        assert!(matches!(e(4, &[1]).wedge(&e(3, &[1])), Err(Error::DimensionMismatch { .. })));
        // degree overflow yields the zero form
        let top = e(4, &[1, 2, 3]).wedge(&e(4, &[4, 1])).unwrap();
        assert_eq!(top.degree(), 5);
        assert!(top.is_zero(0.0));
    }

    #[test]
    fn pullback_examples() {
        let j = j4();
        let f = e(4, &[1, 3]) + 2.0 * e(4, &[2, 4]);
        assert_eq!(f.pullback(&Endomorphism::identity(4)).unwrap(), f);
        // hand evaluation: (J^*e^1)(e_b) = e^1(J e_b), nonzero only for b = 2 with value -1
        assert_eq!(e(4, &[1]).pullback(&j).unwrap(), -e(4, &[2]));
        // oracle: evaluate e^{124} on the J-images of every basis triple
        let pulled = e(4, &[1, 2, 4]).pullback(&j).unwrap();
        let basis: Vec<DVector<f64>> = (0..4).map(|i| DVector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
        for idx in combinations(4, 3) {
            let args: Vec<DVector<f64>> = idx.iter().map(|&i| basis[i].clone()).collect();
            let images: Vec<DVector<f64>> = args.iter().map(|v| j.apply(v)).collect();
            let oracle = e(4, &[1, 2, 4]).evaluate(&images).unwrap();
            assert_eq!(pulled.evaluate(&args).unwrap(), oracle);
        }
        assert_eq!(pulled, e(4, &[1, 2, 3]));
        assert!(matches!(f.pullback(&Endomorphism::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn omega_is_single_one_one_component() {
        let w = ComplexKForm::from_real(e(4, &[1, 2]) + e(4, &[3, 4]));
        let parts = w.bidegree_decompose(&j4(), 1e-12).unwrap();
        assert!(parts[0].norm() < 1e-12 && parts[2].norm() < 1e-12);
        assert!(parts[1].try_sub(&w).unwrap().norm() < 1e-12);
        assert_eq!(parts[1].bidegree, Some((1, 1)));
    }

    fn alpha(dim: usize, a: usize, b: usize) -> ComplexKForm {
        ComplexKForm::new(e(dim, &[a]), e(dim, &[b])).unwrap()
    }

    #[test]
    fn alpha12_is_pure_two_zero() {
        let a12 = alpha(4, 1, 2).wedge(&alpha(4, 3, 4)).unwrap();
        let j = j4();
        // eigen-oracle: a (p,q)-form pulls back by J to i^{p-q} times itself,
        // and (1,0)-forms satisfy α(JX) = iα(X)
        let jpull = a12.pullback(&j).unwrap();
        assert!(jpull.try_sub(&a12.scale(Complex64::new(-1.0, 0.0))).unwrap().norm() < 1e-12);
        let parts = a12.bidegree_decompose(&j, 1e-12).unwrap();
        assert!(parts[2].try_sub(&a12).unwrap().norm() < 1e-12);
        assert!(parts[0].norm() < 1e-12 && parts[1].norm() < 1e-12);
    }

    #[test]
    fn e124_splits_into_conjugate_pair() {
        let f = ComplexKForm::from_real(e(4, &[1, 2, 4]));
        let parts = f.bidegree_decompose(&j4(), 1e-12).unwrap();
        assert!(parts[0].norm() < 1e-12 && parts[3].norm() < 1e-12);
        assert!(parts[1].norm() > 0.1 && parts[2].norm() > 0.1);
        assert!(parts[1].try_sub(&parts[2].conj()).unwrap().norm() < 1e-12);
        // each part is an eigenvector of J^*: (2,1) -> i^{1} = i, (1,2) -> -i
        let j = j4();
        let p21 = &parts[2];
        let pulled = p21.pullback(&j).unwrap();
        assert!(pulled.try_sub(&p21.scale(Complex64::new(0.0, 1.0))).unwrap().norm() < 1e-12);
    }

    #[test]
    fn decomposition_rejects_non_complex() {
        let f = ComplexKForm::from_real(e(4, &[1, 2]));
        assert!(matches!(
            f.bidegree_decompose(&Endomorphism::identity(4), 1e-9),
            Err(Error::NotAlmostComplex { .. })
        ));
    }

    #[test]
    fn skew_matrix_roundtrip() {
        let f = e(4, &[1, 2]) + 0.5 * e(4, &[2, 4]);
        let m = f.to_skew_matrix().unwrap();
        assert_eq!(m[(3, 1)], -0.5);
        assert_eq!(KForm::from_skew_matrix(&m), f);
    }

    #[test]
    fn display_uses_one_based_labels() {
        let f = e(4, &[2, 4]) - 2.0 * e(4, &[1, 4]);
        assert_eq!(f.to_string(), "-2 e^{14} + e^{24}");
        assert_eq!(KForm::zero(4, 2).to_string(), "0");
    }
}
