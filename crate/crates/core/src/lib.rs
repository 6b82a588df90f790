pub mod analytic;
pub mod bimaterial;
pub mod cli;
pub mod elast3d;
pub mod error;
pub mod field;
pub mod inversion;
pub mod load;
pub mod mesh;
pub mod mode12;
pub mod mode3;
pub mod quadrature;
pub mod sif;
pub mod singular_ops;

pub use error::{CrackError, Result};
