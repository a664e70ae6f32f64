//! Symmetric Bayes-Nash equilibria of single-item first-price auctions with
//! i.i.d. values on `[0, 1]`.
//!
//! - [`ccfpa_explicit`]: the exact canonical equilibrium for piecewise-polynomial cdfs.
//! - [`ccfpa_blackbox`]: an ε-equilibrium bid function from cdf queries alone.
//! - [`cdfpa`]: equilibria over a finite bid grid.
//! - [`verify`]: regret certification for all three.

pub mod ccfpa_blackbox;
pub mod ccfpa_explicit;
pub mod cdfpa;
pub mod dist;
pub mod error;
pub mod numeric;
pub mod poly;
pub mod serde_rational;
pub mod verify;

pub use error::{Error, Result};
