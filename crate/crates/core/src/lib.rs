pub mod cli;
pub mod elliptic;
pub mod emden;
pub mod error;
pub mod geometry;
pub mod plasma;
pub mod spikes;
pub mod thresholds;

pub use error::{Error, Result};
