//! Small dense linear algebra: numerical rank, null spaces, spans and
//! least squares. Every routine goes through an SVD; dimensions here stay
//! in the low hundreds so conditioning and cost are not a concern.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular values closer than this factor to the rank threshold make the
/// rank decision ambiguous.
const AMBIGUITY_FACTOR: f64 = 1e3;

/// Numerical rank together with a flag for values close to the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: usize,
    pub ambiguous: bool,
}

/// Lexicographically ordered strictly increasing `k`-tuples of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still move
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn padded(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() >= m.ncols() {
        return m.clone();
    }
    let mut p = DMatrix::zeros(m.ncols(), m.ncols());
    p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    p
}

fn threshold(singular: &DVector<f64>, tol: f64) -> f64 {
    let smax = singular.iter().cloned().fold(0.0, f64::max);
    tol * smax.max(1.0)
}

/// Rank with singular values `<= tol * max(1, σ_max)` counted as zero.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo { rank: 0, ambiguous: false };
    }
    let sv = m.clone().singular_values();
    let thr = threshold(&sv, tol);
    let rank = sv.iter().filter(|&&s| s > thr).count();
    let ambiguous = sv
        .iter()
        .any(|&s| s > thr / AMBIGUITY_FACTOR && s < thr * AMBIGUITY_FACTOR);
    RankInfo { rank, ambiguous }
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = padded(m).svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let thr = threshold(&svd.singular_values, tol);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= thr)
        .map(|i| v_t.row(i).transpose())
        .collect();
    from_columns(n, &cols)
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_span(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let thr = threshold(&svd.singular_values, tol);
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thr)
        .map(|i| u.column(i).into_owned())
        .collect();
    from_columns(rows, &cols)
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let thr = threshold(&svd.singular_values, tol);
    svd.solve(b, thr).expect("U and V^T were computed")
}

/// Smallest eigenvalue of a symmetric matrix with a unit eigenvector.
pub fn min_eigen(sym: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(sym.clone());
    let (i, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    (val, eig.eigenvectors.column(i).into_owned())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn from_columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
