//! Numerics for s-Riesz transforms of planar measures.

pub mod cantor;
pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod measure;
pub mod oracle;
pub mod params;
pub mod profiles;
pub mod quadrature;
pub mod riesz;
pub mod special;
pub mod spectral;
pub mod topcover;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Disk, Point2, Region};
pub use grid::{GridField, GridSpec};
pub use measure::Measure;
