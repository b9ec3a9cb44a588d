//! Channels, networks, codes and the edge-added network.

mod code;
mod distribution;
mod network;
mod schedule;

pub use code::{Code, CodeLayout, Decoder, PipeTables};
pub use distribution::{Channel, Distribution, JointDistribution, LOAD_TOL, PROB_TOL};
pub use network::{validate_network, ModifiedNetwork, Network, NetworkDescription, RateVector};
pub use schedule::{bit_pipe_schedule, cumulative_bits, schedule_vector};

pub(crate) use distribution::check_stochastic;

/// Effective cardinality of an alphabet; size 0 stands for the empty alphabet,
/// which carries a single dummy symbol.
pub fn effective_size(size: usize) -> usize {
    size.max(1)
}

/// `base^exp` with overflow reported as `None`.
pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
