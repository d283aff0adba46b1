//! Exponential functionals of Brownian motion, Brownian local times, and
//! Monte Carlo verification of Bougerol-type identities in law.
//!
//! The crate is organised bottom-up:
//!
//! * [`rng`] and [`paths`]: reproducible random streams and Brownian paths
//!   on uniform grids;
//! * [`functionals`]: `A_t = ∫₀ᵗ e^{2B_s} ds` along sampled paths;
//! * [`localtime`]: exact joint draws of `(B_t, L^c_t)`;
//! * [`closedform`]: the analytic laws the simulations are checked against;
//! * [`sde`]: the SDE `dX = sqrt(1+X²) dγ + X/2 dt` and its explicit solution;
//! * [`stats`]: two-sample tests and the top-level identity checks.

pub mod closedform;
mod error;
pub mod functionals;
pub mod localtime;
pub mod mc;
pub mod paths;
pub mod quadrature;
pub mod rng;
pub mod sde;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use paths::{sample_brownian_path, time_reverse_path, BrownianPath, GridSpec};
pub use rng::{RngStream, StreamRng};

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
