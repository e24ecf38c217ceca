//! Operator algebra over rational functions and the exact verification steps
//! built on it.

pub mod certificate;
pub mod expr;
pub mod holonomic;
pub mod integrand;
pub mod mpoly;
#[allow(clippy::module_inception)]
pub mod ore;
pub mod ratfun;

pub use certificate::{certify_telescoper, parse_operator, verify_certificate, CertReport};
pub use holonomic::{apply_ode_to_series, indicial_polynomial, ode_to_recurrence, quotient_closure};
pub use integrand::{apply_operator_to_integrand, IntegrandSpec};
pub use ore::OrePoly;
pub use ratfun::RatFun;

/// Product in the Ore algebra.
pub fn ore_multiply(a: &OrePoly, b: &OrePoly) -> OrePoly {
    a.mul(b)
}
