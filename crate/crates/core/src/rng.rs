//! Deterministic, splittable random streams.
//!
//! Reproducibility contract: a stream is identified by `(seed, stream id)`
//! and yields the same draws on every platform and thread layout. Substreams
//! are derived by mixing a purpose index into the stream id with SplitMix64,
//! so simulation times, marks and claim sizes each consume an independent
//! stream — drawing more of one never shifts the others.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose indices for the substreams a single path consumes.
pub mod stream_purpose {
    /// Candidate event times (thinning proposals and accept/reject draws).
    pub const TIMES: u64 = 0;
    /// Mark draws, one per accepted event.
    pub const MARKS: u64 = 1;
    /// Claim-size draws for compound/risk functionals.
    pub const CLAIMS: u64 = 2;
}

/// Handle to a deterministic random stream (ChaCha12, 64-bit seed + stream).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    /// Root stream for a given seed.
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derive the `index`-th child stream. Children with distinct indices
    /// (and children of distinct parents) are statistically independent.
    pub fn substream(&self, index: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index ^ 0x9e37_79b9_7f4a_7c15)),
        }
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// SplitMix64 finalizer; full-period bijective mixer on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
