use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG substream: stream `stream` of the generator seeded by
/// `seed`. Streams with distinct indices never overlap, so batch draws can
/// derive one substream per item from `(seed, item index)`.
pub(crate) fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
