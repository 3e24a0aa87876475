//! Spectral risk measure estimation for left-truncated right-censored loss
//! data.
//!
//! The product-limit fit ([`pl::fit_pl`]) turns `(y, t, delta)` triples into
//! a step distribution whose quantile function is integrated exactly against
//! a risk spectrum ([`estimators::srm_from_quantile`]). Competing estimators,
//! inference and a Monte Carlo harness are built on the same pieces.

// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dependent;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod io;
pub mod mc;
pub mod pl;
pub mod quadrature;
pub mod rng;
pub mod severity;
pub mod spectrum;

pub use error::{Result, SrmError};
