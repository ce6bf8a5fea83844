//! Jamming covariance design for MIMO Gaussian links.
//!
//! A jammer with a power budget chooses the covariance of its Gaussian
//! transmission to minimize the information rate of one or more legitimate
//! links. The crate provides the rate model ([`scenario`]), closed-form
//! optimal solutions ([`spectral`]), an iterative solver for the general case
//! ([`spca`]), a closed-form suboptimal repair ([`suboptimal`]) and
//! extensions to several legitimate links ([`multi_target`]).

// Input checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod multi_target;
pub mod scenario;
pub mod spca;
pub mod spectral;
pub mod suboptimal;

pub use error::{JamError, Result};
pub use linalg::{ComplexMatrix, Hermitian, C64};
pub use scenario::{
    effective_quantities, rate_single, unjammed_rate, waterfilling, Diagnostics,
    EffectiveDecomposition, JammerSolution, JammingScenario, Method,
};
pub use spca::{spca_iterate, spca_iterate_from, SpcaOptions, SpcaTrace};
pub use spectral::{solve_single, Fallback};
