pub mod error;
pub mod catalog;
pub mod cli;
pub mod curvature;
pub mod expr;
pub mod geodesics;
pub mod geometry;
pub mod jets;
pub mod nonriem;
pub mod symmetry;
pub mod tensor;

pub use error::{Error, Result};
