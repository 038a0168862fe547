//! Seeded random streams.
//!
//! Every chain draws from ChaCha8 keyed by the 64-bit seed, on its own
//! stream index. Streams of one key are independent by construction, so
//! replicates and benchmark cells use `(seed, cell index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
