//! Finite-alphabet network information theory toolkit.
//!
//! Conventions used across the crate:
//! - every logarithm is base 2 and `0 log 0 = 0`;
//! - divergences that are infinite are returned as `f64::INFINITY`;
//! - nodes, symbols, messages and time-step positions inside tables are 0-based,
//!   while `bit_pipe_schedule` takes the 1-based time index `t` in `1..=n`;
//! - sequences are ranked in mixed radix with the first symbol most significant.

pub mod codes;
pub mod coupling;
pub mod error;
pub mod exponents;
pub mod measures;
pub mod model;
pub mod regions;

pub use error::{Error, Result};
pub use model::{
    bit_pipe_schedule, validate_network, Channel, Code, CodeLayout, Decoder, Distribution, JointDistribution,
    ModifiedNetwork, Network, NetworkDescription, PipeTables, RateVector,
};
