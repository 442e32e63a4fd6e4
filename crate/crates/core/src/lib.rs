pub mod cli;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod normalform;
pub mod polyalg;
pub mod simulator;
pub mod spectrum;
pub mod stability;
pub mod weights;

pub use error::{Error, Result};
