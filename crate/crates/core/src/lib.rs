//! Skew loops on quadrics and developable surfaces.

pub mod census;
pub mod cli;
pub mod corpus;
pub mod developable;
pub mod curve;
pub mod error;
pub mod format;
pub mod genericity;
pub mod morse;
pub mod oracle;
pub mod pair;
pub mod pipeline;
pub mod quadric;
pub mod report;
pub mod torus;
pub mod trig;

pub use error::{Error, Result};
