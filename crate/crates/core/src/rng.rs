//! Keyed ChaCha8 streams.
//!
//! Every random stream is derived from `(global seed, domain, a, b)` so the
//! draws a tip or droplet sees do not depend on processing order or on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes; keeps emission and fission draws disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Emission = 1,
    Fission = 2,
}

pub fn keyed_stream(seed: u64, domain: StreamDomain, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream for the emitter at `(head, tip)`.
pub fn emission_stream(seed: u64, head: usize, tip: usize) -> ChaCha8Rng {
    keyed_stream(seed, StreamDomain::Emission, head as u64, tip as u64)
}

/// Stream for the `event`-th fission of droplet `droplet_id`.
pub fn fission_stream(seed: u64, droplet_id: u64, event: u32) -> ChaCha8Rng {
    keyed_stream(seed, StreamDomain::Fission, droplet_id, event as u64)
}
