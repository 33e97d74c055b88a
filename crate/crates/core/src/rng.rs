//! Reproducible random streams.
//!
//! Every unit of Monte Carlo work draws from its own ChaCha8 stream selected
//! by `(seed, stream_id)`. Work is cut into fixed-size chunks whose stream id
//! is the chunk index, so results never depend on how many threads ran them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream_id` under master `seed`.
pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// A contiguous slice of the sample index space with its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub stream_id: u64,
    pub start: u64,
    pub len: u64,
}

/// Splits `total` samples into `parts` chunks whose sizes differ by at most one.
pub fn split_even(total: u64, parts: u64) -> Vec<Chunk> {
    let parts = parts.max(1).min(total.max(1));
    let base = total / parts;
    let extra = total % parts;
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let len = base + u64::from(i < extra);
            let c = Chunk { stream_id: i, start, len };
            start += len;
            c
        })
        .collect()
}

/// Splits `total` samples into chunks of `chunk_len` (last one shorter).
pub fn split_fixed(total: u64, chunk_len: u64) -> Vec<Chunk> {
    let chunk_len = chunk_len.max(1);
    let parts = total.div_ceil(chunk_len);
    (0..parts)
        .map(|i| Chunk {
            stream_id: i,
            start: i * chunk_len,
            len: chunk_len.min(total - i * chunk_len),
        })
        .collect()
}

/// Runs `work` on every chunk in parallel on the current rayon pool and
/// returns the per-chunk results in chunk order.
pub fn map_chunks<R, F>(seed: u64, chunks: &[Chunk], work: F) -> Vec<R>
where
    R: Send,
    F: Fn(&Chunk, &mut StreamRng) -> R + Sync,
{
    chunks
        .par_iter()
        .map(|c| {
            let mut rng = stream(seed, c.stream_id);
            work(c, &mut rng)
        })
        .collect()
}
