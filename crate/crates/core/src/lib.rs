//! p-gamma and p-psi special functions, the function
//! `θ_{p,α}(x) = x^α [ln(px/(x+p+1)) − ψ_p(x)]`, and numerical machinery for
//! checking complete monotonicity of such functions.
//!
//! Three independent routes are provided for the derivatives of `θ_{p,1}`:
//!
//! - closed forms via the general Leibniz rule ([`theta::theta_nth`]),
//! - Richardson-extrapolated finite differences ([`cmcheck::fd_derivative`]),
//! - moment integrals of the Laplace density ([`quad::cm_moment`]).
//!
//! [`cmcheck::cm_scan`] combines these into sign-pattern scans over `(n, x)` grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cmcheck;
mod ddouble;
pub mod error;
pub mod kernel;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod sum;
pub mod theta;

pub use error::{Error, Result};
pub use specfun::{PIndex, N_MAX};
pub use theta::ThetaParams;
