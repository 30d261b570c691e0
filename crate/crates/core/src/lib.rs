//! Estimation of the finite upper endpoint of a magnitude distribution.
//!
//! The crate covers the whole pipeline from a raw event catalog to endpoint
//! estimates and upper confidence bounds:
//!
//! - [`catalog`]: parsing, filtering, tie smoothing, magnitude/energy conversion.
//! - [`diagnostics`]: QQ coordinates, mean excess, Hill statistic.
//! - [`evt`]: truncated GPD (magnitude scale) and truncated Pareto (energy
//!   scale) endpoint estimators, truncation odds, truncation tests, bounds.
//! - [`classical`]: N-P-G, N-P-OS, FL, EFL, R-W, R-W-C, Kijko-Sellevoll and the
//!   Cooke / Robson-Whitlock / Pisarenko bounds.
//! - [`simulation`]: truncated Gutenberg-Richter sampling and the Monte Carlo
//!   comparison study.
//! - [`cli`]: the `tmax` command line front end.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod classical;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evt;
pub mod numeric;
pub mod output;
pub mod simulation;
pub mod special;

mod endpoint;

pub use catalog::{MagnitudeSample, SeismicEvent};
pub use endpoint::{Bound, EndpointResult, Estimator};
pub use error::{Error, Result};
