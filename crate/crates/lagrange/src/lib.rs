//! Stability toolkit for the Lagrange relative equilibria of the planar
//! three-body problem: linear stability, Birkhoff normal forms, convexity
//! and steepness diagnostics, and reduced-system integration.

pub mod error;
pub mod classifier;
pub mod dynamics;
pub mod hamiltonian;
pub mod linear_stability;
pub mod nbody;
pub mod normal_form;
pub mod poly;

pub use error::{Error, Result};
