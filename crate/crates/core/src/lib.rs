//! Two-sided bounds for the maximum-norm error constant `C^L(K)` of linear Lagrange
//! interpolation on a triangle `K`:
//!
//! ```text
//! ||u - Pi^L u||_inf <= C^L(K) |u|_{2,K}   for all u in H^2(K).
//! ```
//!
//! Upper bounds come from a Fujino-Morley discretization whose sup-norm constraint is
//! relaxed to the Bernstein control points; lower bounds come from Rayleigh quotients
//! of explicit polynomials.

pub mod bernstein;
pub mod bounds;
pub mod certify;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod morley;
pub mod optimize;
pub mod pipeline;
pub mod sparse;

pub use error::{Error, Result};
