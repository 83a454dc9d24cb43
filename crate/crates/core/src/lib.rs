pub mod error;
pub mod operator;
pub mod params;
pub mod polar;
pub mod stability;
pub mod symbol;

pub use error::{Error, Result};
pub use params::PhysicalParams;
