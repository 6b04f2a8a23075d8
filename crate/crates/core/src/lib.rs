//! Explicit simulation of the parabolic Hessian quotient flow
//!
//! ```text
//! ∂u/∂t = log(χ_u^k ∧ ω^{n-k} / χ_u^l ∧ ω^{n-l}) - log ψ,   u(·, 0) = 0
//! ```
//!
//! on flat complex tori `ℂⁿ/ℤ^{2n}`, with the monitors needed to check the
//! flow numerically: cone preservation, the maximum principle for `∂_t u`,
//! monotonicity of `J_l`, and convergence of `û` to a solution of the
//! elliptic quotient equation.

pub mod error;
pub mod field;
pub mod flow;
pub mod functionals;
pub mod hermitian;
pub mod oracle;
pub mod selftest;
pub mod subsolution;
pub mod symfun;

pub use error::{Error, Result};
pub use field::{ChiSpec, FormField, FourierMode, Grid, ModeKind, ScalarField, TorusGeometry, TrigPoly};
pub use flow::{FlowConfig, FlowReport, FlowState, RunStatus, SeriesRecord};
pub use hermitian::HermitianPoint;
pub use subsolution::SubsolutionReport;
pub use symfun::{EigenTuple, QuotientLevels};
