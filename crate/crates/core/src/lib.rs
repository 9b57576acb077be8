pub mod effective;
pub mod ensembles;
pub mod fluctuations;
pub mod harness;
pub mod error;
pub mod langevin;
pub mod laser;
pub mod linalg;
pub mod seed;

pub use error::{Error, Result};
