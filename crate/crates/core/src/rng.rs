//! Reproducible random streams.
//!
//! A [`RngStream`] is an immutable `(seed, stream_id)` token. Every generator
//! derived from it is a ChaCha8 keystream keyed by the seed, with the stream
//! id selecting the 64-bit ChaCha nonce. The output is therefore a pure
//! function of the token, and distinct stream ids address disjoint
//! keystreams, so parallel workers never share generator state.
//!
//! Gaussian variates are drawn with `rand_distr::StandardNormal`, the
//! ZIGNOR ziggurat of Doornik (2005). That choice is fixed for the crate and
//! is part of the bit-reproducibility contract of every report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Generator type behind every stream.
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives the `index`-th child stream. Children of one parent have
    /// distinct ids, and the parent id is mixed in so that the children of
    /// different parents do not line up.
    pub fn substream(&self, index: u64) -> RngStream {
        let mixed = splitmix64(splitmix64(self.stream_id) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
        RngStream {
            seed: self.seed,
            stream_id: mixed,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform draw on the open interval (0, 1).
#[inline]
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::Open01)
}

/// Draw from N(mean, variance). A zero variance returns `mean` without
/// consuming randomness.
pub fn sample_normal<R: Rng + ?Sized>(mean: f64, variance: f64, rng: &mut R) -> Result<f64> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(invalid("variance", format!("must be finite and >= 0, got {variance}")));
    }
    if !mean.is_finite() {
        return Err(invalid("mean", format!("must be finite, got {mean}")));
    }
    if variance == 0.0 {
        return Ok(mean);
    }
    Ok(mean + variance.sqrt() * standard_normal(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_token_same_bytes() {
        let s = RngStream::new(42, 0);
        let a: Vec<u64> = (0..16).map({
            let mut r = s.rng();
            move |_| r.next_u64()
        }).collect();
        let mut r = s.rng();
        let b: Vec<u64> = (0..16).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(1, 0).rng();
        let mut b = RngStream::new(1, 1).rng();
        let mut c = RngStream::new(2, 0).rng();
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn substreams_are_distinct() {
        let parent = RngStream::new(3, 9);
        let mut ids: Vec<u64> = (0..10_000).map(|i| parent.substream(i).stream_id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 10_000);
        assert_ne!(parent.substream(0), RngStream::new(3, 10).substream(0));
    }

    #[test]
    fn degenerate_normal() {
        let mut rng = RngStream::new(0, 0).rng();
        assert_eq!(sample_normal(0.0, 0.0, &mut rng).unwrap(), 0.0);
        assert_eq!(sample_normal(3.0, 0.0, &mut rng).unwrap(), 3.0);
        assert!(sample_normal(0.0, -1.0, &mut rng).is_err());
        assert!(sample_normal(0.0, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn normal_mean_clt_bound() {
        let n = 100_000;
        let mut rng = RngStream::new(11, 0).rng();
        let mean = (0..n).map(|_| sample_normal(0.0, 4.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * 2.0 / (n as f64).sqrt(), "mean {mean}");
    }
}
