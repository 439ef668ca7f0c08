//! Optimality certificates for smooth cone-constrained vector optimization
//!
//! ```text
//! Min_{R^m_+} { f(x) : x ∈ R^n, g(x) ∈ −Θ }
//! ```
//!
//! with polynomial `f`, `g` and a finite-dimensional closed convex cone `Θ`.
//! The crate verifies and searches for KKT multipliers, verifies and
//! generates approximate-KKT (AKKT) sequences, judges multiplier boundedness
//! (BAKKT), and checks the constraint qualifications RCQ, MFCQ and
//! AKKT-regularity.

pub mod certify;
pub mod cone;
pub mod cq;
pub mod error;
pub mod fixtures;
pub mod generate;
mod lsq;
pub mod model;

pub use cone::Cone;
pub use error::{Error, Result};
pub use model::{Evaluation, Polynomial, Problem};
