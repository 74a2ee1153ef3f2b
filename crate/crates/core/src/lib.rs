//! Embedded Trefftz discontinuous Galerkin methods.
//!
//! A standard DG discretization is assembled as usual; element by element
//! the numerical kernel of a local differential operator matrix is extracted
//! and the global system is Galerkin-projected onto that (weak) Trefftz
//! subspace. Inhomogeneous sources are handled by element-local particular
//! solutions.

pub mod analysis;
pub mod basis;
pub mod densela;
pub mod dgforms;
pub mod diffop;
pub mod embedding;
pub mod error;
pub mod mesh;
pub mod scalar;
pub mod sparsela;
pub mod study;

pub use error::{Error, Result};
pub use scalar::{Complex64, Scalar};
