//! Numerical tools for the Dirichlet Laplacian on planar wedges with mixed
//! power weights.

pub mod error;
pub mod geometry;
pub mod hankel;
pub mod jet;
pub mod kernels;
pub mod quad;
pub mod spaces;
pub mod special;
pub mod spectral;
pub mod transforms;

pub use error::{Result, WedgeError};
pub use geometry::{Point2, WedgeParams, WeightSpec};
