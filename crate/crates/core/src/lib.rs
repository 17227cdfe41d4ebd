//! Uniformly stable first-order optimization for smooth empirical risk
//! minimization.
//!
//! Two algorithms are provided:
//!
//! * [`stabreg_convex`]: a black-box conversion for Euclidean geometry that
//!   runs a base optimizer (GD, NAG, ...) in epochs on a sequence of
//!   regularized objectives `F_S(x) + (λ_k/2)‖x − x_0‖²` with `λ_k` halved
//!   between epochs.
//! * [`stabreg_rel`]: mirror descent with an extra `λR(x)` term in every
//!   step, for general norms (ℓp balls, the probability simplex).
//!
//! The [`harness`] module estimates uniform stability empirically, fits
//! convergence slopes, and runs the numerical lemma checks that back the
//! algorithms' guarantees.

// `!(x > 0.0)` is how NaN gets rejected along with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base_opt;
pub mod check;
pub mod error;
pub mod harness;
pub mod mirror;
pub mod objectives;
pub mod par;
pub mod persist;
pub mod stabreg_convex;
pub mod stabreg_rel;
pub mod tolerances;
pub mod vecspace;

pub use error::{Error, Result};
