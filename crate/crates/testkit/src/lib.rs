//! Random instance generators and independent reference oracles.
//!
//! Oracles re-derive results from raw edge scans and plain enumeration; they
//! share no code with the engine's matchmaker, diagnosis or scheduler.

pub mod gen;
pub mod oracle;

use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
