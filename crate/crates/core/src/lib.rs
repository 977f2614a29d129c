//! Fixed-step first-order methods for smooth convex minimization.
//!
//! The crate implements the gradient method (GM), Nesterov's fast gradient
//! method (FGM), the optimized gradient method (OGM) and its gradient-norm
//! counterpart OGM-G, both through their step-coefficient triangles and
//! through their efficient momentum forms. Alongside the methods it ships
//! the relaxed performance-estimation matrices, a verifier for dual
//! certificates of those matrices, and the analytic instances on which GM
//! and OGM-G attain their worst-case gradient bounds exactly.
//!
//! Module map:
//!
//! * [`oracle`] smooth convex test functions and problem instances
//! * [`schedule`] the theta sequences and momentum coefficients
//! * [`stepmatrix`] step-coefficient triangles and their identities
//! * [`engine`] runs methods and records traces
//! * [`certificate`] relaxed-PEP matrices and dual certificate verification
//! * [`worstcase`] tight worst-case instances

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certificate;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod schedule;
pub mod stepmatrix;
pub mod tolerance;
pub mod worstcase;

pub use error::{FomError, Result};
