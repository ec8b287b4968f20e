pub mod adversary;
pub mod detect;
pub mod error;
pub mod harness;
pub mod model;
pub mod randmat;
pub mod rates;
pub mod specfun;

pub use error::{Error, Result};
