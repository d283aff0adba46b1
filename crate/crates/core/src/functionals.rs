//! The exponential functional `A_t = ∫₀ᵗ exp(2 B_s) ds` along grid paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc;
use crate::paths::{time_reverse_path, BrownianPath, GridSpec};
use crate::rng::{standard_normal, RngStream};

/// Paths whose maximum exceeds this level are rejected rather than allowed
/// to push `exp(2B)` (and sums of it) towards the end of the double range.
pub const OVERFLOW_LEVEL: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub b_t: f64,
    pub a_t: f64,
    pub exp_b: f64,
    pub exp_neg_b: f64,
}

impl FunctionalSample {
    fn new(b_t: f64, a_t: f64) -> Self {
        Self {
            b_t,
            a_t,
            exp_b: b_t.exp(),
            exp_neg_b: (-b_t).exp(),
        }
    }
}

fn check_overflow(max: f64) -> Result<()> {
    if max > OVERFLOW_LEVEL {
        Err(Error::Overflow {
            max,
            limit: OVERFLOW_LEVEL,
        })
    } else {
        Ok(())
    }
}

/// Trapezoidal rule for `∫ exp(2 p(s)) ds` over the path's grid.
pub fn trapezoid_exp2(values: &[f64], step: f64) -> f64 {
    let n = values.len() - 1;
    let mut acc = 0.5 * (2.0 * values[0]).exp();
    for v in &values[1..n] {
        acc += (2.0 * v).exp();
    }
    acc += 0.5 * (2.0 * values[n]).exp();
    acc * step
}

pub fn exp_functional(p: &BrownianPath) -> Result<FunctionalSample> {
    check_overflow(p.max())?;
    let a_t = trapezoid_exp2(p.values(), p.grid().step());
    Ok(FunctionalSample::new(p.endpoint(), a_t))
}

/// `(e^{B_t}, A_t)` from `p` and `(e^{-B_t}, e^{-2B_t} A_t)` realised as the
/// functional of the time-reversed path.
pub fn reversed_pair(p: &BrownianPath) -> Result<(FunctionalSample, FunctionalSample)> {
    let forward = exp_functional(p)?;
    let reversed = exp_functional(&time_reverse_path(p))?;
    Ok((forward, reversed))
}

/// Samples a Brownian path and its functional in one pass without storing
/// the path. Bit-identical to `exp_functional(&sample_brownian_path(grid, rng))`.
pub fn sample_functional<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> Result<FunctionalSample> {
    let n = grid.n_steps();
    let sd = grid.step().sqrt();
    let mut b = 0.0f64;
    let mut max = 0.0f64;
    let mut acc = 0.5 * (2.0 * b).exp();
    for k in 1..=n {
        b += sd * standard_normal(rng);
        max = max.max(b);
        if k < n {
            acc += (2.0 * b).exp();
        } else {
            acc += 0.5 * (2.0 * b).exp();
        }
    }
    check_overflow(max)?;
    Ok(FunctionalSample::new(b, acc * grid.step()))
}

/// A batch of functional draws and the number of paths rejected by the
/// overflow policy.
#[derive(Debug, Clone)]
pub struct FunctionalBatch {
    pub samples: Vec<FunctionalSample>,
    pub rejected: usize,
}

pub fn sample_functionals(grid: &GridSpec, n: usize, stream: RngStream) -> FunctionalBatch {
    let (samples, rejected) = mc::par_generate_filtered(n, stream, |rng| sample_functional(grid, rng));
    FunctionalBatch { samples, rejected }
}

/// Quadrature values of a deterministic path on `n`, `2n` and `4n` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonEstimate {
    pub coarse: f64,
    pub medium: f64,
    pub fine: f64,
    /// `log2(|coarse - medium| / |medium - fine|)`, 2 for the trapezoid rule on
    /// smooth integrands.
    pub observed_order: f64,
}

pub fn richardson_order(path_fn: impl Fn(f64) -> f64, t_end: f64, n_steps: usize) -> Result<RichardsonEstimate> {
    let a = |n: usize| -> Result<f64> {
        let p = BrownianPath::from_fn(GridSpec::new(t_end, n)?, &path_fn)?;
        Ok(exp_functional(&p)?.a_t)
    };
    let coarse = a(n_steps)?;
    let medium = a(2 * n_steps)?;
    let fine = a(4 * n_steps)?;
    let observed_order = ((coarse - medium).abs() / (medium - fine).abs()).log2();
    Ok(RichardsonEstimate {
        coarse,
        medium,
        fine,
        observed_order,
    })
}

/// `A` on the full grid minus `A` on every other grid point: a per-path
/// estimate of three times the discretisation error of the full-grid value.
pub fn discretization_gap(p: &BrownianPath) -> Result<f64> {
    let full = exp_functional(p)?.a_t;
    let half = exp_functional(&p.subsample(2)?)?.a_t;
    Ok(full - half)
}
