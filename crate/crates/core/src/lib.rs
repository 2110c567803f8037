//! Max-Cut on graphs that contain a large independent set.
//!
//! The crate bundles the pieces needed to run and check the threshold
//! rounding algorithm: Gaussian special functions, the noise-stability
//! landscapes behind the matching hardness gadgets, small exact gadget
//! graphs, the independence-constrained SDP, threshold rounding, and an
//! interval-arithmetic verifier for the per-edge soundness inequality.

pub mod error;
pub mod gadget;
pub mod gaussian;
pub mod interval;
pub mod landscape;
pub mod pipeline;
pub mod rounding;
pub mod sdp;

pub use error::{Error, Result};
