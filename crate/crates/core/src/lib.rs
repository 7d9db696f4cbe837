//! # cgens
//!
//! Ensemble learning by column generation on kernel-machine objectives.
//!
//! Instead of translating an SVM into an LP-boosting problem, the trainers
//! here solve the SVM (binary) and simplex least-squares SVM (multi-class)
//! programs directly. Each iteration prices the weak learner whose response
//! column most violates the KKT condition `w = Σ yᵢαᵢΦ(xᵢ)`, appends it to
//! the explicit feature map `Φ`, and re-solves the restricted problem over
//! all selected learners (fully corrective).
//!
//! - [`cg_binary`]: binary trainer over an embedded dual coordinate descent
//!   linear SVM solver ([`linsvm`]).
//! - [`mc_simplex`]: multi-class trainer with simplex label codes, closed-form
//!   restricted solves and a rank-one maintained inverse.
//! - [`weak`]: decision stumps, perceptrons and Fourier cosine features, plus
//!   the pricing routines that select among them.
//! - [`baselines`]: discrete AdaBoost for comparison.
//! - [`eval`]: error metrics, cross-validated grid selection and benchmarks.

pub mod baselines;
pub mod cg_binary;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod linsvm;
pub mod mc_simplex;
pub mod model;
pub mod seed;
pub mod toy;
pub mod weak;

pub use error::{Error, Result};
