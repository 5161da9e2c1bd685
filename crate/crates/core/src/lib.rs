pub mod bosonic;
pub mod channels;
pub mod codesim;
pub mod error;
pub mod optim;
pub mod parallel;
pub mod qlinalg;
pub mod regions;

pub use error::{QrpsError, Result};
