//! Exact conditional tests for two-level fractional factorial designs.

pub mod datasets;
pub mod correspond;
pub mod design;
pub mod error;
pub mod family;
pub mod fiber;
pub mod formats;
pub mod glm;
pub mod lattice;
pub mod model;
pub mod moves;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
