//! Positive periodic and Neumann solutions of
//! `u'' + c u' + (a⁺(t) − μ a⁻(t)) g(u) = 0` for sign-changing weights:
//! threshold constants, shooting solvers, coded subharmonics and the
//! combinatorics of their counts.

pub mod eigen;
pub mod bounds;
pub mod config;
pub mod error;
pub mod expr;
pub mod integrator;
pub mod lyndon;
pub mod nonlinearity;
pub mod quad;
pub mod radial;
pub mod report;
pub mod shooting;
pub mod subharmonic;
pub mod weight;

pub use error::{Error, Result};
