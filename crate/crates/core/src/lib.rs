pub mod cointegration;
pub mod cwt;
pub mod error;
pub mod ingest;
mod linalg;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod synthetic;
pub mod unitroot;
pub mod vargranger;
pub mod wavelets;

pub use error::{Error, ErrorCategory, Result};
