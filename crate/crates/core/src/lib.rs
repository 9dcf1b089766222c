pub mod drl;
pub mod dwa;
pub mod env;
pub mod error;
pub mod geom;
pub mod harness;
pub mod perception;
pub mod reward;
pub mod terrain;
pub mod world;

pub use error::{Error, Result};
