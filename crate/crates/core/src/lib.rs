pub mod checks;
pub mod circuit;
pub mod error;
pub mod exec;
pub mod gatelib;
pub mod models;
pub mod numkit;
pub mod rng;
pub mod simulator;
pub mod symmetry;
pub mod varopt;

pub use error::{Error, Result};
