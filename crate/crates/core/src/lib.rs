pub mod distortion;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod optimize2d;
pub mod quadrature;
pub mod quantize1d;
pub mod reference;
pub mod report;

pub use error::{Error, Result};
