//! Uniform time grids and Brownian paths sampled on them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// Default number of steps on the unit horizon.
pub const DEFAULT_STEPS: usize = 4096;

/// Uniform grid `s_k = k * t_end / n_steps`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    t_end: f64,
    n_steps: usize,
}

impl GridSpec {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!("horizon must be finite and > 0, got {t_end}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be >= 1".into()));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|k| self.time(k))
    }
}

/// Path values on a grid, `values[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    grid: GridSpec,
    values: Vec<f64>,
}

impl BrownianPath {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_steps + 1 {
            return Err(Error::DimensionMismatch {
                expected: grid.n_steps + 1,
                found: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidArgument {
                name: "values",
                reason: format!("path must start at 0, starts at {}", values[0]),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "values",
                reason: "path values must be finite".into(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples a deterministic function on the grid. `f(0)` must be zero.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.times().map(f).collect())
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_steps + 1],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn endpoint(&self) -> f64 {
        self.values[self.grid.n_steps]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Keeps every `factor`-th grid point: the same path seen on a grid with
    /// `n_steps / factor` steps.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.grid.n_steps.is_multiple_of(factor) {
            return Err(Error::InvalidArgument {
                name: "factor",
                reason: format!("must divide n_steps = {}, got {factor}", self.grid.n_steps),
            });
        }
        let grid = GridSpec::new(self.grid.t_end, self.grid.n_steps / factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Self { grid, values })
    }

    /// The path restricted to `[0, s_k]`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.grid.n_steps {
            return Err(Error::InvalidArgument {
                name: "k",
                reason: format!("must lie in 1..={}, got {k}", self.grid.n_steps),
            });
        }
        let grid = GridSpec::new(self.grid.time(k), k)?;
        Ok(Self {
            grid,
            values: self.values[..=k].to_vec(),
        })
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }
}

/// Standard Brownian motion on `grid`: i.i.d. N(0, step) increments from 0.
pub fn sample_brownian_path<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> BrownianPath {
    let sd = grid.step().sqrt();
    let mut values = Vec::with_capacity(grid.n_steps + 1);
    let mut b = 0.0;
    values.push(b);
    for _ in 0..grid.n_steps {
        b += sd * standard_normal(rng);
        values.push(b);
    }
    BrownianPath { grid: *grid, values }
}

/// `s ↦ p(t - s) - p(t)`, the time reversal of a path from its endpoint.
pub fn time_reverse_path(p: &BrownianPath) -> BrownianPath {
    let end = p.endpoint();
    let values = p.values.iter().rev().map(|v| v - end).collect();
    BrownianPath { grid: p.grid, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1.0, 0).is_err());
        assert!(GridSpec::new(0.0, 4).is_err());
        assert!(GridSpec::new(-1.0, 4).is_err());
        assert!(GridSpec::new(f64::NAN, 4).is_err());
        let g = GridSpec::new(2.0, 8).unwrap();
        assert_eq!(g.step(), 0.25);
        assert_eq!(g.time(8), 2.0);
    }

    #[test]
    fn single_step_path() {
        let g = GridSpec::new(1.0, 1).unwrap();
        let p = sample_brownian_path(&g, &mut RngStream::new(5, 0).rng());
        assert_eq!(p.values().len(), 2);
        assert_eq!(p.values()[0], 0.0);
    }

    #[test]
    fn deterministic_per_stream() {
        let g = GridSpec::new(1.0, 256).unwrap();
        let a = sample_brownian_path(&g, &mut RngStream::new(42, 0).rng());
        let b = sample_brownian_path(&g, &mut RngStream::new(42, 0).rng());
        assert_eq!(a, b);
        let c = sample_brownian_path(&g, &mut RngStream::new(42, 1).rng());
        assert_ne!(a, c);
    }

    #[test]
    fn two_point_reversal() {
        let g = GridSpec::new(1.0, 1).unwrap();
        let p = BrownianPath::from_values(g, vec![0.0, 1.0]).unwrap();
        assert_eq!(time_reverse_path(&p).values(), &[0.0, -1.0]);
    }

    #[test]
    fn from_values_rejects_bad_input() {
        let g = GridSpec::new(1.0, 2).unwrap();
        assert!(BrownianPath::from_values(g, vec![0.0, 1.0]).is_err());
        assert!(BrownianPath::from_values(g, vec![1.0, 1.0, 2.0]).is_err());
        assert!(BrownianPath::from_values(g, vec![0.0, f64::INFINITY, 2.0]).is_err());
    }

    #[test]
    fn subsample_and_truncate() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let p = BrownianPath::from_fn(g, |s| s).unwrap();
        let q = p.subsample(4).unwrap();
        assert_eq!(q.values(), &[0.0, 0.5, 1.0]);
        assert!(p.subsample(3).is_err());
        let r = p.truncate(4).unwrap();
        assert_eq!(r.grid().t_end(), 0.5);
        assert_eq!(r.endpoint(), 0.5);
    }

    proptest! {
        #[test]
        fn reversal_is_an_involution(seed in any::<u64>(), n in 1usize..64) {
            let g = GridSpec::new(1.0, n).unwrap();
            let p = sample_brownian_path(&g, &mut RngStream::new(seed, 0).rng());
            let r = time_reverse_path(&p);
            prop_assert_eq!(r.values()[0], 0.0);
            prop_assert_eq!(r.endpoint(), -p.endpoint());
            // Exact: subtracting the same endpoint twice undoes itself only up
            // to rounding, so compare to one ulp-scale tolerance.
            let rr = time_reverse_path(&r);
            for (a, b) in rr.values().iter().zip(p.values()) {
                prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * (1.0 + b.abs() + p.endpoint().abs()));
            }
        }
    }
}
