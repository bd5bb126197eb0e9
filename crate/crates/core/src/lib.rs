//! Exact computer algebra for deformation quantization.
//!
//! The crate computes, over the Gaussian rationals and to a caller-chosen
//! truncation order in the formal parameter:
//!
//! - Gutt and standard-ordered star products,
//! - stationary-phase (Feynman graph) expansions of oscillatory integrals,
//!   with an independent Wick-contraction oracle,
//! - quantized momentum maps attached to polynomial Lie algebra actions,
//! - formal amplitude systems for group actions and their Maurer-Cartan,
//!   morphism, equivariance, and invariant-Hamiltonian checks.
//!
//! Everything is exact: all identities verified by the test suites hold as
//! polynomial equalities, never numerically.

pub mod scalar;
pub mod vars;
pub mod poly;
pub mod series;
pub mod parse;
pub mod linalg;
pub mod lie;
pub mod uea;
pub mod action;
pub mod feynman;
pub mod gsystem;
pub mod gutt;
pub mod qmm;
pub mod quantize;

pub use lie::{bch, LieAlgebra, LieError};
pub use poly::{Monomial, MultiPoly, PolyError};
pub use scalar::GaussianRational;
pub use series::{HbarSeries, SeriesError};
pub use vars::{Family, Var, VarUniverse};
