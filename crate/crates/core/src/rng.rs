//! Seeded random streams.
//!
//! Every random draw comes from a ChaCha8 generator keyed by
//! `(seed, replicate)`: the 32-byte key holds `seed` in bytes 0..8 and
//! `replicate` in bytes 8..16 (little endian, remaining bytes zero). Distinct
//! uses of randomness within a replicate select distinct ChaCha streams, so
//! parameters, data and each EM restart are reproducible independently of
//! one another and of execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Parameter generation.
    Params,
    /// Group sampling.
    Data,
    /// Initial labels of an EM restart.
    Restart(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Params => 1,
            Stream::Data => 2,
            Stream::Restart(r) => (3 << 32) | u64::from(r),
        }
    }
}

pub fn stream_rng(seed: u64, replicate: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replicate.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream.id());
    rng
}
