//! Exact joint sampling of a Brownian endpoint and its local time at a
//! fixed level, plus two pathwise estimators used as cross-checks.
//!
//! Local time is the semimartingale (Tanaka) one, so that `L^0_t` has the
//! law of `|B_t|` and the running maximum `M_t`.
//!
//! The sampler for a level `c != 0` splits at the first hitting time
//! `T_c ~ c²/Z²`. On `{T_c > t}` the local time is zero and the endpoint
//! follows the killed (reflection) sub-density `p_t(y) - p_t(2c - y)` on the
//! side of `c` containing the origin; it is drawn by rejection from a
//! normal proposal truncated to that side, accepting `y` with probability
//! `1 - exp(-2c(c - y)/t)`. On `{T_c <= t}` the path restarts at `c` and the
//! remaining `t - T_c` time units are handled by the level-zero sampler.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::paths::BrownianPath;
use crate::rng::{open_uniform, standard_normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelLocalTimeSample {
    pub endpoint: f64,
    pub local_time: f64,
    pub hit: bool,
    pub level: f64,
    pub horizon: f64,
    /// Proposals rejected while drawing a no-hit endpoint.
    pub rejections: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingTimeSample {
    pub level: f64,
    pub time: f64,
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("horizon must be finite and > 0, got {t}")))
    }
}

/// First passage time of level `c`, drawn as `c² / Z²`.
pub fn sample_hitting_time<R: Rng + ?Sized>(c: f64, rng: &mut R) -> Result<HittingTimeSample> {
    if c == 0.0 || !c.is_finite() {
        return Err(invalid("c", format!("level must be finite and non-zero, got {c}")));
    }
    let z = standard_normal(rng);
    Ok(HittingTimeSample {
        level: c,
        time: c * c / (z * z),
    })
}

/// `(B_t, L^0_t)` via Lévy's theorem: `W ~ N(0, t)`, then the running
/// maximum given `W` as `(W + sqrt(W² - 2t ln U)) / 2`, and an independent
/// sign for the endpoint `±(M - W)`.
pub fn sample_levy_pair<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<LevelLocalTimeSample> {
    check_horizon(t)?;
    Ok(levy_pair_unchecked(t, rng))
}

fn levy_pair_unchecked<R: Rng + ?Sized>(t: f64, rng: &mut R) -> LevelLocalTimeSample {
    let w = t.sqrt() * standard_normal(rng);
    let u = open_uniform(rng);
    let m = 0.5 * (w + (w * w - 2.0 * t * u.ln()).sqrt());
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    LevelLocalTimeSample {
        endpoint: sign * (m - w),
        local_time: m,
        hit: true,
        level: 0.0,
        horizon: t,
        rejections: 0,
    }
}

/// Endpoint of a Brownian motion on `[0, t]` conditioned never to reach
/// `c > 0`. Returns the endpoint and the number of rejected proposals.
fn killed_endpoint<R: Rng + ?Sized>(t: f64, c: f64, rng: &mut R) -> (f64, u32) {
    let sd = t.sqrt();
    let mut rejections = 0u32;
    loop {
        let y = sd * standard_normal(rng);
        if y >= c {
            rejections += 1;
            continue;
        }
        let accept = -(-2.0 * c * (c - y) / t).exp_m1();
        if open_uniform(rng) < accept {
            return (y, rejections);
        }
        rejections += 1;
    }
}

/// Exact draw of `(B_t, L^c_t)`.
pub fn sample_bm_with_local_time<R: Rng + ?Sized>(t: f64, c: f64, rng: &mut R) -> Result<LevelLocalTimeSample> {
    check_horizon(t)?;
    if !c.is_finite() {
        return Err(invalid("c", format!("level must be finite, got {c}")));
    }
    if c == 0.0 {
        return Ok(levy_pair_unchecked(t, rng));
    }
    let hit_time = sample_hitting_time(c, rng)?.time;
    if hit_time > t {
        let (y, rejections) = killed_endpoint(t, c.abs(), rng);
        return Ok(LevelLocalTimeSample {
            endpoint: if c > 0.0 { y } else { -y },
            local_time: 0.0,
            hit: false,
            level: c,
            horizon: t,
            rejections,
        });
    }
    let remaining = t - hit_time;
    if remaining <= 0.0 {
        return Ok(LevelLocalTimeSample {
            endpoint: c,
            local_time: 0.0,
            hit: true,
            level: c,
            horizon: t,
            rejections: 0,
        });
    }
    let after = levy_pair_unchecked(remaining, rng);
    Ok(LevelLocalTimeSample {
        endpoint: c + after.endpoint,
        local_time: after.local_time,
        hit: true,
        level: c,
        horizon: t,
        rejections: 0,
    })
}

/// Box-kernel occupation estimate `(1/2h) Leb{s <= t : |p(s) - c| < h}`,
/// with the occupation time measured exactly on the linear interpolant of
/// the grid values.
pub fn occupation_local_time(p: &BrownianPath, c: f64, bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(invalid("bandwidth", format!("must be finite and > 0, got {bandwidth}")));
    }
    let lo = c - bandwidth;
    let hi = c + bandwidth;
    let step = p.grid().step();
    let mut time = 0.0;
    for w in p.values().windows(2) {
        let (u, v) = (w[0], w[1]);
        if u == v {
            if u > lo && u < hi {
                time += step;
            }
            continue;
        }
        // Fraction of the segment whose linear interpolant lies in (lo, hi).
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let overlap = (b.min(hi) - a.max(lo)).max(0.0);
        time += step * overlap / (b - a);
    }
    Ok(time / (2.0 * bandwidth))
}

/// Default occupation bandwidth `step^{1/4}`.
pub fn default_bandwidth(p: &BrownianPath) -> f64 {
    p.grid().step().powf(0.25)
}

/// `(max_{s<=t} p(s) - |c|)^+`, equal in law to `L^c_t`.
///
/// The maximum is taken over grid values, which sits about
/// `0.58 sqrt(step)` below the continuous one; see [`bridge_maximum`].
pub fn levy_max_local_time(p: &BrownianPath, c: f64) -> f64 {
    (p.max() - c.abs()).max(0.0)
}

/// Exact draw of the continuous-time maximum of a Brownian motion given its
/// grid values: on each step the bridge from `u` to `v` peaks at
/// `(u + v + sqrt((v - u)² - 2h ln U)) / 2`.
pub fn bridge_maximum<R: Rng + ?Sized>(p: &BrownianPath, rng: &mut R) -> f64 {
    let h = p.grid().step();
    p.values()
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            0.5 * (w[0] + w[1] + (d * d - 2.0 * h * open_uniform(rng).ln()).sqrt())
        })
        .fold(0.0, f64::max)
}
