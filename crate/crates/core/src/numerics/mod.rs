//! Special functions, quadrature and the integrals built on them.

mod bessel;
mod marginal;
mod pairing;
mod quadrature;

pub use bessel::{bessel_j, bessel_jn};
pub use marginal::{
    marginal_closed_form, marginal_p_em, mollified_fourier_cos, mollified_fourier_cos_reference, smeared_peaks,
    MarginalPoint, FourierSample,
};
pub use pairing::{weak_pairing, Family, TestFunction};
pub use quadrature::{adaptive_integrate, adaptive_integrate_2d, QuadResult, QuadValue, QuadratureConfig, Substitution};

use thiserror::Error;

use crate::wigner::WignerError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("subdivision budget exhausted after {intervals} intervals (|value| ~ {value:e}, error ~ {error:e})")]
    BudgetExhausted { value: f64, error: f64, intervals: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("family has no integrable form against this test function: {0}")]
    Unpairable(String),
    #[error(transparent)]
    Wigner(#[from] WignerError),
}
