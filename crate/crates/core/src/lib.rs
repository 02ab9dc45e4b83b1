pub mod analysis;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod galerkin;
pub mod grid;
pub mod io;
pub mod linear;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod spectral;
pub mod stencil;
pub mod symmetry;
pub mod transform;

pub use error::{Error, Result};
