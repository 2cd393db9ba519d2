pub mod energy;
pub mod cli;
pub mod error;
pub mod minimize;
pub mod selfmag;
pub mod solitons;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
