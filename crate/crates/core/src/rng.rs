//! Deterministic random streams.
//!
//! Every stochastic subsystem draws from its own ChaCha12 stream whose seed is
//! hashed from the scenario seed plus a textual tag (plus optional numeric
//! lanes). Subsystems therefore never perturb each other: adding draws to one
//! stream leaves every other stream untouched, which is what makes runs
//! reproducible down to the byte.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

fn digest(seed: u64, tag: &str, lanes: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0x1f]);
    h.update(tag.as_bytes());
    for lane in lanes {
        h.update([0x1f]);
        h.update(lane.to_le_bytes());
    }
    h.finalize().into()
}

/// Stream for a named subsystem, e.g. `stream(seed, "traffic")`.
pub fn stream(seed: u64, tag: &str) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(digest(seed, tag, &[]))
}

/// Stream for one indexed member of a subsystem, e.g. one mobility stream per
/// vehicle: `substream(seed, "mobility", vehicle_id)`.
pub fn substream(seed: u64, tag: &str, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(digest(seed, tag, &[index]))
}

/// Collapse a tagged tuple into a plain `u64`, used to derive the scenario
/// seed of each cell in a parameter sweep.
pub fn derive_u64(seed: u64, tag: &str, lanes: &[u64]) -> u64 {
    let d = digest(seed, tag, lanes);
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}
