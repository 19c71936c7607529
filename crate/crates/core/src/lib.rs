//! Hermitian geometry on finite-dimensional real Lie algebras.
//!
//! A Lie algebra is given by the differentials `de^k` of a fixed coframe
//! `e^1, ..., e^n`; brackets are derived from them through
//! `de^k(X, Y) = -e^k([X, Y])`. On top of that the crate provides:
//!
//! * [`multilinear`]: alternating forms, wedge products, pullbacks and the
//!   `(p, q)` splitting induced by an almost complex structure;
//! * [`liealg`]: Jacobi defect, Chevalley-Eilenberg differential and
//!   cohomology, derived/lower central series;
//! * [`hermitian`]: Nijenhuis tensor, fundamental form, Bismut connection,
//!   torsion 3-form and the Kähler / SKT / generalized Kähler classifiers;
//! * [`connections`]: curvature and Hermitian parallelism of linear
//!   connections, the canonical flat connection and two explicit families;
//! * [`tangent`]: the semidirect product `g ⋉_D R^{2n}` with the lifted
//!   Hermitian structure and the SKT / generalized Kähler transfer checks;
//! * [`taming`]: the `∂ω = ∂̄β` solver, taming forms and feasibility searches
//!   for Kähler and Hermitian-symplectic forms;
//! * [`catalog`]: parameterized example algebras with expected results.
//!
//! # Conventions
//!
//! Vectors `e_1..e_n` are indexed from zero internally. An [`Endomorphism`]
//! stores in entry `(a, b)` the coefficient of `e_a` in the image of `e_b`.
//! The standard complex structure acts by `J e_1 = e_2, J e_2 = -e_1,
//! J e_3 = e_4, J e_4 = -e_3`, so the `(1,0)`-forms (those with
//! `α(JX) = iα(X)`) are spanned by `e^1 + i e^2` and `e^3 + i e^4`.
//! Forms are evaluated with the determinant convention
//! `e^{12}(e_1, e_2) = 1`.

pub mod catalog;
pub mod connections;
mod error;
pub mod hermitian;
pub mod liealg;
pub mod linalg;
pub mod multilinear;
pub mod tangent;
pub mod taming;

pub use connections::Connection;
pub use error::{Error, Result};
pub use hermitian::{ComplexStructure, HermitianStructure, Metric, MetricClass};
pub use liealg::{Fingerprint, LieAlgebra};
pub use multilinear::{ComplexKForm, Endomorphism, KForm};

/// Default comparison tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Comparison tolerance for "numerically zero".
///
/// A quantity `x` is zero when `|x| <= tol * max(1, scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOLERANCE)
    }
}

impl Tolerance {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive and finite, got {tol}"
            )));
        }
        Ok(Tolerance(tol))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self, x: f64) -> bool {
        x.abs() <= self.0
    }

    pub fn is_zero_scaled(self, x: f64, scale: f64) -> bool {
        x.abs() <= self.0 * scale.abs().max(1.0)
    }
}
