pub mod arith;
pub mod cli;
pub mod constructions;
pub mod density;
pub mod error;
pub mod eval;
pub mod logic;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
