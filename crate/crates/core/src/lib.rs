pub mod curvature;
pub mod error;
pub mod fracops;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod surface;

pub use error::{Error, Result};
