//! Chunked, stream-split Monte Carlo generation.
//!
//! Draw `i` belongs to chunk `i / CHUNK`, and chunk `k` owns the generator of
//! `stream.substream(k)`. Results therefore depend only on the stream and
//! the sample count, never on the number of worker threads.

use rayon::prelude::*;

use crate::rng::{RngStream, StreamRng};

pub const CHUNK: usize = 1024;

/// Runs `draw` `n` times in parallel and returns the results in draw order.
pub fn par_generate<T, F>(n: usize, stream: RngStream, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.substream(k as u64).rng();
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for c in chunks {
        out.extend(c);
    }
    out
}

/// Like [`par_generate`] but drops draws that fail, returning the kept
/// values and the number of failures.
pub fn par_generate_filtered<T, E, F>(n: usize, stream: RngStream, draw: F) -> (Vec<T>, usize)
where
    T: Send,
    E: Send,
    F: Fn(&mut StreamRng) -> Result<T, E> + Sync,
{
    let all = par_generate(n, stream, draw);
    let mut rejected = 0;
    let kept = all
        .into_iter()
        .filter_map(|r| match r {
            Ok(v) => Some(v),
            Err(_) => {
                rejected += 1;
                None
            }
        })
        .collect();
    (kept, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn independent_of_thread_count() {
        let s = RngStream::new(8, 2);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| par_generate(5000, s, |r| r.next_u64()));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| par_generate(5000, s, |r| r.next_u64()));
        assert_eq!(one, four);
        assert_eq!(one.len(), 5000);
    }

    #[test]
    fn filtered_counts_failures() {
        let (kept, rejected) =
            par_generate_filtered(3000, RngStream::new(1, 1), |r| if r.next_u32() % 2 == 0 { Ok(1) } else { Err(()) });
        assert_eq!(kept.len() + rejected, 3000);
        assert!(rejected > 1300 && rejected < 1700);
    }
}
