//! Numerical verification engine for Poisson groupoids and double Bruhat cells of `SL_n(ℂ)`.

pub mod cells;
pub mod charts;
pub mod double;
pub mod error;
pub mod gdbc;
pub mod lie;
pub mod linalg;
pub mod poisson;
pub mod report;
pub mod sampling;
pub mod suites;
pub mod twist;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
