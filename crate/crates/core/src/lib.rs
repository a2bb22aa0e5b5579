//! Multi-objective tabular Q-learning with nonlinear utility transforms,
//! evaluated on small side-effect gridworlds.

pub mod agents;
pub mod analysis;
pub mod error;
pub mod gridworlds;
pub mod harness;
pub mod rng;
pub mod sweep;
pub mod transforms;

pub use error::{Error, Result};
