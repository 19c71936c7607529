//! Taming symplectic forms: the `∂ω = ∂̄β` solver, assembly of
//! `Ω = ω ± (β + β̄)` and feasibility searches for closed forms whose
//! `J`-pairing is positive definite.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hermitian::{ComplexStructure, HermitianStructure};
use crate::liealg::LieAlgebra;
use crate::linalg::{self, combinations};
use crate::multilinear::{ComplexKForm, Endomorphism, KForm};

/// `β = Σ a_{jk} α^j ∧ α^k` solving `∂ω = ∂̄β`, `∂β = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSolution {
    pub beta: ComplexKForm,
    /// Coefficients `a_{jk}` for `j < k` in lexicographic order; in real
    /// dimension 4 this is the single `a` with `β = a α^{12}`.
    pub coefficients: Vec<Complex64>,
    /// The `(1,0)`-coframe `α^1, ..., α^m` used.
    pub coframe: Vec<ComplexKForm>,
    pub residual: f64,
}

impl BetaSolution {
    pub fn a(&self) -> Complex64 {
        self.coefficients[0]
    }
}

/// A closed 2-form with its taming certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TamingForm {
    pub omega: KForm,
    /// `|dΩ|`.
    pub d_norm: f64,
    /// Smallest eigenvalue of `h(X,Y) = ½(Ω(X,JY) + Ω(Y,JX))`.
    pub min_eigenvalue: f64,
    /// Sign `s` in `Ω = ω + s(β + β̄)`; `1` for forms found by search.
    pub sign: f64,
}

impl TamingForm {
    pub fn is_taming(&self, tol: f64) -> bool {
        self.d_norm <= tol && self.min_eigenvalue > tol
    }
}

/// `h = sym(Ω J)`, the matrix of `½(Ω(X,JY) + Ω(Y,JX))`.
pub fn taming_pairing(omega: &KForm, j: &Endomorphism) -> Result<DMatrix<f64>> {
    Ok(linalg::symmetrize(&(omega.to_skew_matrix()? * j.matrix())))
}

/// `e^b - i J*e^b`, greedily skipping dependent ones, until `n/2` are found.
pub fn holomorphic_coframe(j: &Endomorphism, tol: f64) -> Result<Vec<ComplexKForm>> {
    let n = j.dim();
    let mut chosen: Vec<ComplexKForm> = Vec::new();
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for b in 0..n {
        let mut coeffs = vec![0.0; n];
        coeffs[b] = 1.0;
        let eb = KForm::covector(&coeffs);
        let cand = ComplexKForm::new(eb.clone(), -eb.pullback(j)?)?;
        // complex independence over C of the candidates, tested on R^{2n}
        let mut trial = rows.clone();
        let v = cand.to_real_vector();
        let iv = cand.scale(Complex64::i()).to_real_vector();
        trial.push(v.clone());
        trial.push(iv.clone());
        let m = linalg::from_columns(2 * n, &trial);
        if linalg::numerical_rank(&m, tol).rank == trial.len() {
            rows = trial;
            chosen.push(cand.with_bidegree(1, 0));
        }
        if chosen.len() == n / 2 {
            break;
        }
    }
    if chosen.len() != n / 2 {
        return Err(Error::Internal("could not build a (1,0)-coframe".into()));
    }
    Ok(chosen)
}

/// Least-squares solve of `∂̄β = ∂ω` with `∂β = 0` over `(2,0)`-forms.
/// Returns `None` when the residual exceeds `tol`.
pub fn solve_beta(h: &HermitianStructure, tol: f64) -> Result<Option<BetaSolution>> {
    let j = h.complex_structure().endomorphism();
    let coframe = holomorphic_coframe(j, tol)?;
    let m = coframe.len();
    let omega = ComplexKForm::from_real(h.fundamental_form().clone());
    let (del_omega, _) = h.del_delbar(&omega, tol)?;
    let basis: Vec<ComplexKForm> = combinations(m, 2)
        .into_iter()
        .map(|p| coframe[p[0]].wedge(&coframe[p[1]]))
        .collect::<Result<_>>()?;
    let rhs_top = del_omega.to_real_vector();
    let len = rhs_top.len();
    let mut cols = Vec::with_capacity(2 * basis.len());
    for b in &basis {
        for unit in [Complex64::new(1.0, 0.0), Complex64::i()] {
            let (del, delbar) = h.del_delbar(&b.scale(unit), tol)?;
            let mut col = DVector::zeros(2 * len);
            col.rows_mut(0, len).copy_from(&delbar.to_real_vector());
            col.rows_mut(len, len).copy_from(&del.to_real_vector());
            cols.push(col);
        }
    }
    let a = linalg::from_columns(2 * len, &cols);
    let mut rhs = DVector::zeros(2 * len);
    rhs.rows_mut(0, len).copy_from(&rhs_top);
    let x = linalg::lstsq(&a, &rhs, 1e-12);
    let residual = (&a * &x - &rhs).amax();
    if residual > tol {
        return Ok(None);
    }
    let coefficients: Vec<Complex64> = (0..basis.len()).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
    let mut beta = ComplexKForm::zero(h.dim(), 2);
    for (b, c) in basis.iter().zip(&coefficients) {
        beta = beta.try_add(&b.scale(*c))?;
    }
    Ok(Some(BetaSolution { beta: beta.with_bidegree(2, 0), coefficients, coframe, residual }))
}

/// `Ω = ω + s(β + β̄)`, trying `s = 1` first and then `s = -1`; the one
/// giving `dΩ = 0` is kept.
pub fn assemble_taming(h: &HermitianStructure, beta: &BetaSolution, tol: f64) -> Result<TamingForm> {
    let real_part = beta.beta.re.scale(2.0);
    let j = h.complex_structure().endomorphism();
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let omega = h.fundamental_form().try_add(&real_part.scale(sign))?;
        let d_norm = h.d(&omega)?.norm();
        if d_norm <= tol {
            let min_eigenvalue = linalg::min_eigen(&taming_pairing(&omega, j)?).0;
            return Ok(TamingForm { omega, d_norm, min_eigenvalue, sign });
        }
        best = best.min(d_norm);
    }
    Err(Error::Internal(format!("ω ± (β + β̄) is not closed for either sign (best |dΩ| = {best:.3e})")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Total number of ascent iterations, shared by the restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: 10_000, restarts: 8, seed: 0, tol: crate::DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    /// A closed form with positive definite pairing was found and checked.
    Certified,
    /// A nonzero `X` with `Ω(X, JX) = 0` for every admissible `Ω` exists.
    ProvedInfeasible,
    /// Nothing found; this is not a proof of non-existence.
    NotFoundWithinBudget,
}

impl Confidence {
    pub fn label(self) -> &'static str {
        match self {
            Confidence::Certified => "certified",
            Confidence::ProvedInfeasible => "proved-infeasible",
            Confidence::NotFoundWithinBudget => "not-found-within-budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub found: Option<TamingForm>,
    pub confidence: Confidence,
    /// Best `λ_min(h)` under the normalization `tr h = 1`.
    pub best_objective: f64,
    /// Best objective reached by each restart.
    pub restart_objectives: Vec<f64>,
    pub iterations: usize,
    /// Dimension of the searched subspace of closed forms.
    pub subspace_dim: usize,
    /// Rank-one obstruction `X`, when found.
    pub certificate: Option<DVector<f64>>,
    pub config: SearchConfig,
}

/// Searches closed `J`-invariant 2-forms with positive pairing, i.e.
/// Kähler forms for `J`.
pub fn kahler_search(algebra: &LieAlgebra, j: &ComplexStructure, config: &SearchConfig) -> Result<SearchReport> {
    search(algebra, j, config, true)
}

/// Searches all closed 2-forms `Ω` with `Ω(X, JX) > 0`, i.e. symplectic
/// forms taming `J`.
pub fn hermitian_symplectic_search(
    algebra: &LieAlgebra,
    j: &ComplexStructure,
    config: &SearchConfig,
) -> Result<SearchReport> {
    search(algebra, j, config, false)
}

fn search(algebra: &LieAlgebra, j: &ComplexStructure, config: &SearchConfig, type_11: bool) -> Result<SearchReport> {
    let n = algebra.dim();
    if j.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: j.dim() });
    }
    let tol = config.tol;
    let norm = j.nijenhuis_norm(algebra);
    if norm > tol {
        return Err(Error::NotIntegrable { norm });
    }
    let jm = j.endomorphism();
    let d2 = algebra.ce_matrix(2)?;
    let constraints = if type_11 {
        let pull = pullback_matrix(n, jm)?;
        let id = DMatrix::identity(pull.nrows(), pull.ncols());
        let mut stacked = DMatrix::zeros(d2.nrows() + pull.nrows(), d2.ncols());
        stacked.rows_mut(0, d2.nrows()).copy_from(&d2);
        stacked.rows_mut(d2.nrows(), pull.nrows()).copy_from(&(pull - id));
        stacked
    } else {
        d2
    };
    let basis = linalg::null_space(&constraints, tol);
    let r = basis.ncols();
    let pairings: Vec<DMatrix<f64>> = (0..r)
        .map(|c| taming_pairing(&KForm::from_vector(n, 2, &basis.column(c).into_owned()), jm))
        .collect::<Result<_>>()?;
    let certificate = if type_11 { None } else { rank_one_certificate(&pairings, n, tol) };
    let traces = DVector::from_iterator(r, pairings.iter().map(|p| p.trace()));
    let mut report = SearchReport {
        found: None,
        confidence: Confidence::NotFoundWithinBudget,
        best_objective: f64::NEG_INFINITY,
        restart_objectives: Vec::new(),
        iterations: 0,
        subspace_dim: r,
        certificate: certificate.clone(),
        config: *config,
    };
    if certificate.is_some() {
        report.confidence = Confidence::ProvedInfeasible;
        return Ok(report);
    }
    let tt = traces.norm_squared();
    if r == 0 || tt <= tol * tol {
        // every candidate pairing is traceless, hence never definite
        return Ok(report);
    }
    let h_of = |y: &DVector<f64>| {
        let mut h = DMatrix::zeros(n, n);
        for (i, p) in pairings.iter().enumerate() {
            h += p * y[i];
        }
        h
    };
    let normalize = |y: &mut DVector<f64>| {
        let s = (1.0 - traces.dot(y)) / tt;
        *y += &traces * s;
    };
    let per_restart = (config.budget / config.restarts.max(1)).max(1);
    let target = 1e-3 / n as f64;
    let mut best: Option<(f64, DVector<f64>)> = None;
    for restart in 0..config.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
        let mut y = DVector::from_fn(r, |_, _| rng.random_range(-1.0..1.0));
        normalize(&mut y);
        let mut local_best = f64::NEG_INFINITY;
        let mut local_y = y.clone();
        for k in 0..per_restart {
            report.iterations += 1;
            let (lambda, v) = linalg::min_eigen(&h_of(&y));
            if lambda > local_best {
                local_best = lambda;
                local_y = y.clone();
            }
            if lambda >= target {
                break;
            }
            let grad = DVector::from_iterator(r, pairings.iter().map(|p| v.dot(&(p * &v))));
            let proj = &grad - &traces * (grad.dot(&traces) / tt);
            let gn = proj.norm();
            if gn <= f64::EPSILON {
                break;
            }
            let step = 0.5 / ((k + 1) as f64).sqrt();
            y += proj * (step / gn);
            normalize(&mut y);
        }
        report.restart_objectives.push(local_best);
        // strict comparison keeps the lowest restart index on ties
        if best.as_ref().is_none_or(|(b, _)| local_best > *b) {
            best = Some((local_best, local_y));
        }
        if local_best >= target {
            break;
        }
    }
    let (objective, y) = best.expect("at least one restart");
    report.best_objective = objective;
    let omega = KForm::from_vector(n, 2, &(&basis * &y)).pruned(1e-14);
    let d_norm = algebra.ce_differential(&omega)?.norm();
    let min_eigenvalue = linalg::min_eigen(&taming_pairing(&omega, jm)?).0;
    let form = TamingForm { omega, d_norm, min_eigenvalue, sign: 1.0 };
    if form.is_taming(tol) {
        report.found = Some(form);
        report.confidence = Confidence::Certified;
    }
    Ok(report)
}

/// Matrix of `α ↦ A*α` on 2-forms in the lexicographic basis.
fn pullback_matrix(n: usize, a: &Endomorphism) -> Result<DMatrix<f64>> {
    let idx = combinations(n, 2);
    let mut m = DMatrix::zeros(idx.len(), idx.len());
    for (c, i) in idx.iter().enumerate() {
        m.set_column(c, &KForm::basis(n, i)?.pullback(a)?.to_vector());
    }
    Ok(m)
}

/// A basis vector `e_a` with `h_i(e_a, e_a) = 0` for every pairing, which
/// rules out positivity for the whole subspace.
fn rank_one_certificate(pairings: &[DMatrix<f64>], n: usize, tol: f64) -> Option<DVector<f64>> {
    (0..n)
        .find(|&a| pairings.iter().all(|p| p[(a, a)].abs() <= tol))
        .map(|a| crate::liealg::unit(n, a))
}
