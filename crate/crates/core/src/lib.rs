//! Splitting methods for composite convex minimization, runtime certificates
//! of modified Fejér monotonicity, and closed-form rate bounds to compare runs
//! against.

pub mod algorithms;
pub mod cli;
pub mod error;
pub mod fejer;
pub mod numerics;
pub mod oracles;
pub mod problems;
pub mod rates;

pub use error::{Error, Result};
pub use numerics::Point;
