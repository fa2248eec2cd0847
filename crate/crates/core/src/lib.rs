pub mod decomp;
pub mod error;
pub mod graphgen;
pub mod lab;
pub mod rng;
pub mod spectral;
pub mod sphere;
pub mod walks;

pub use error::{Error, Result};
