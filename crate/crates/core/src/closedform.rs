//! Analytic laws: the oscillatory density of `A_t`, its Mellin transform,
//! and the joint distribution of a Brownian endpoint with its local time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::sample_functionals;
use crate::paths::GridSpec;
use crate::quadrature::{integrate, integrate_panels, QuadResult, MAX_PANELS};
use crate::rng::RngStream;
pub use crate::special::{asinh, normal_cdf};
use crate::special::{gamma, ln_cosh};

/// Below this horizon the `exp(π²/8t)` prefactor of the density amplifies
/// the cancellation in the oscillatory expectation, and evaluations carry a
/// warning flag.
pub const STABILITY_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEval {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
    /// `abs_error_estimate <= tol`.
    pub accurate: bool,
    /// `t < STABILITY_FLOOR`.
    pub below_stability_floor: bool,
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("must be finite and > 0, got {t}")))
    }
}

fn check_b(name: &'static str, b: f64) -> Result<()> {
    if b > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {b}")))
    }
}

/// Half-width of the integration window for the Gaussian expectation in the
/// density: covers the `cosh`-tilted normal out to ten standard deviations.
fn density_window(t: f64) -> f64 {
    t + 10.0 * t.sqrt()
}

/// Density of `A_t` at `v`:
/// `exp(π²/8t) E[cosh B_t / sqrt(2πv³) exp(-cosh²B_t / 2v) cos(πB_t / 2t)]`.
///
/// The expectation is integrated over `b ∈ [0, L]` (the integrand is even)
/// with adaptive Gauss–Kronrod seeded by one panel per oscillation period
/// `4t`, so every period gets at least fifteen nodes.
pub fn density_a(t: f64, v: f64, tol: f64) -> Result<DensityEval> {
    check_t(t)?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid("v", format!("must be finite and > 0, got {v}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    let prefactor = PI * PI / (8.0 * t);
    let ln_2v = (2.0 * v).ln();
    let norm = 1.0 / (2.0 * PI * (v * v * v * t).sqrt());
    let freq = PI / (2.0 * t);
    let integrand = |b: f64| {
        let lc = ln_cosh(b);
        let spread = (2.0 * lc - ln_2v).exp();
        let exponent = prefactor - b * b / (2.0 * t) + lc - spread;
        if exponent < -745.0 {
            return 0.0;
        }
        2.0 * norm * exponent.exp() * (freq * b).cos()
    };
    let window = density_window(t);
    let period = 4.0 * t;
    let n_panels = ((window / period).ceil() as usize).max(4);
    let breaks: Vec<f64> = (0..=n_panels).map(|k| window * k as f64 / n_panels as f64).collect();
    let r = integrate_panels(integrand, &breaks, tol, MAX_PANELS);
    Ok(DensityEval {
        value: r.value,
        abs_error_estimate: r.abs_error,
        nodes_used: r.evaluations,
        accurate: r.converged,
        below_stability_floor: t < STABILITY_FLOOR,
    })
}

/// `log v` bounds outside which `A_t` has negligible mass: below, the
/// `exp(-1/2v)` factor kills the density; above, `A_t <= t exp(2 max B)`
/// bounds the tail by `2Φ(-8)`.
fn log_support(t: f64) -> (f64, f64) {
    (-6.0, t.ln() + 16.0 * t.sqrt())
}

/// `P(v_lo <= A_t <= v_hi)` by integrating [`density_a`] in `u = ln v`.
/// `v_lo = 0` and `v_hi = ∞` are allowed.
pub fn a_probability(t: f64, v_lo: f64, v_hi: f64, tol: f64) -> Result<QuadResult> {
    check_t(t)?;
    if !(v_lo >= 0.0) || !(v_hi > v_lo) {
        return Err(invalid("v_hi", format!("need 0 <= v_lo < v_hi, got [{v_lo}, {v_hi}]")));
    }
    let (u_min, u_max) = log_support(t);
    let lo = if v_lo == 0.0 { u_min } else { v_lo.ln().max(u_min) };
    let hi = v_hi.ln().min(u_max);
    if hi <= lo {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let inner_tol = 1e-3 * tol;
    let r = integrate(
        |u: f64| {
            let v = u.exp();
            density_a(t, v, inner_tol).map(|d| d.value * v).unwrap_or(f64::NAN)
        },
        lo,
        hi,
        tol,
    );
    Ok(r)
}

/// Monte Carlo and analytic sides of
/// `E[A_t^{ν-1}] = √π / (2^{ν-1} Γ(ν - 1/2)) E[|sinh B_t|^{2ν-2}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinEval {
    pub lhs: f64,
    pub rhs: f64,
    pub mc_se: f64,
    pub rhs_abs_error: f64,
    pub n_used: usize,
    pub rejected: usize,
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.5 && nu.is_finite() {
        Ok(())
    } else {
        Err(invalid("nu", format!("must exceed 1/2, got {nu}")))
    }
}

/// `E|sinh N(0, t)|^p` for `p > -1` by quadrature on the half line.
///
/// For `p < 1` the substitution `b = w^{1/(p+1)}` absorbs the `|b|^p`
/// behaviour at the origin and leaves a smooth integrand.
pub fn abs_sinh_moment(t: f64, p: f64) -> Result<QuadResult> {
    check_t(t)?;
    if !(p > -1.0) {
        return Err(invalid("p", format!("must exceed -1, got {p}")));
    }
    if p == 0.0 {
        return Ok(QuadResult {
            value: 1.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let sd = t.sqrt();
    let dens = move |b: f64| 2.0 * (-b * b / (2.0 * t)).exp() / ((2.0 * PI).sqrt() * sd);
    let upper = p.max(0.0) * t + 12.0 * sd;
    let tol = 1e-13;
    let r = if p < 1.0 {
        let k = 1.0 / (p + 1.0);
        integrate(
            move |w: f64| {
                let b = w.powf(k);
                if b == 0.0 {
                    return k * dens(0.0);
                }
                k * (b.sinh() / b).powf(p) * dens(b)
            },
            0.0,
            upper.powf(p + 1.0),
            tol,
        )
    } else {
        // log-space keeps sinh^p from overflowing when p t is large
        integrate(
            move |b: f64| {
                if b == 0.0 {
                    return 0.0;
                }
                (p * b.sinh().ln() - b * b / (2.0 * t)).exp() * 2.0 / ((2.0 * PI).sqrt() * sd)
            },
            0.0,
            upper,
            tol,
        )
    };
    Ok(r)
}

/// The analytic side of the Mellin relation, with its quadrature error.
pub fn mellin_rhs(t: f64, nu: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    check_nu(nu)?;
    let moment = abs_sinh_moment(t, 2.0 * nu - 2.0)?;
    let factor = if nu == 1.0 {
        1.0
    } else {
        PI.sqrt() / (2f64.powf(nu - 1.0) * gamma(nu - 0.5))
    };
    Ok((factor * moment.value, factor * moment.abs_error))
}

pub fn mellin_a(t: f64, nu: f64, n_mc: usize, n_steps: usize, stream: RngStream) -> Result<MellinEval> {
    check_t(t)?;
    check_nu(nu)?;
    if n_mc == 0 {
        return Err(invalid("n_mc", "must be >= 1"));
    }
    let grid = GridSpec::new(t, n_steps)?;
    let batch = sample_functionals(&grid, n_mc, stream);
    let n = batch.samples.len();
    if n == 0 {
        return Err(invalid("n_mc", "every path was rejected by the overflow policy"));
    }
    let powers: Vec<f64> = batch.samples.iter().map(|s| s.a_t.powf(nu - 1.0)).collect();
    let lhs = powers.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        powers.iter().map(|p| (p - lhs).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let (rhs, rhs_abs_error) = mellin_rhs(t, nu)?;
    Ok(MellinEval {
        lhs,
        rhs,
        mc_se: (var / n as f64).sqrt(),
        rhs_abs_error,
        n_used: n,
        rejected: batch.rejected,
    })
}

/// `P(B_t <= a, L^0_t >= b)` for `b > 0`.
pub fn joint_cdf_bl(t: f64, a: f64, b: f64) -> Result<f64> {
    joint_cdf_bl_level(t, 0.0, a, b)
}

/// `P(B_t <= a, L^x_t >= b)` for `b > 0`.
pub fn joint_cdf_bl_level(t: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    check_t(t)?;
    check_b("b", b)?;
    let sd = t.sqrt();
    let shift = b + x.abs();
    let p = if a >= x {
        let tail = normal_cdf(-shift / sd);
        tail + (tail - normal_cdf((x - a - shift) / sd))
    } else {
        normal_cdf((a - x - shift) / sd)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// `P(x + B_t <= a, L^{-x}_t >= b)` for `b > 0`.
pub fn joint_cdf_shifted(t: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    check_t(t)?;
    check_b("b", b)?;
    let sd = t.sqrt();
    let shift = b + x.abs();
    let p = if a >= 0.0 {
        let tail = normal_cdf(-shift / sd);
        tail + (tail - normal_cdf((-a - shift) / sd))
    } else {
        normal_cdf((a - shift) / sd)
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Joint density of `(B_t, L^x_t)` on `b > 0`.
pub fn joint_pdf_bl(t: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    check_t(t)?;
    check_b("b", b)?;
    let r = (a - x).abs() + b + x.abs();
    Ok(r / (2.0 * PI * t * t * t).sqrt() * (-r * r / (2.0 * t)).exp())
}

/// `P(L^x_t = 0)`, the probability that level `x` is not reached by `t`.
pub fn no_hit_probability(t: f64, x: f64) -> Result<f64> {
    check_t(t)?;
    Ok(1.0 - 2.0 * normal_cdf(-x.abs() / t.sqrt()))
}

/// `P(sinh(x + B_t) <= y, sinh(|x| + L^{-x}_t) - sinh|x| >= z)` for `z > 0`.
///
/// Both transforms are monotone, so the event is
/// `{x + B_t <= asinh y, L^{-x}_t >= asinh(z + sinh|x|) - |x|}` and the
/// shifted joint law applies with the threshold `s = asinh(z + sinh|x|)`:
/// `Φ((asinh y - s)/√t)` for `y < 0` and
/// `2Φ(-s/√t) - Φ((-asinh y - s)/√t)` for `y >= 0`.
pub fn theorem_rhs_cdf(t: f64, x: f64, y: f64, z: f64) -> Result<f64> {
    check_t(t)?;
    check_b("z", z)?;
    let sd = t.sqrt();
    let s = asinh(z + x.abs().sinh());
    let ay = asinh(y);
    let p = if y < 0.0 {
        normal_cdf((ay - s) / sd)
    } else {
        let tail = normal_cdf(-s / sd);
        tail + (tail - normal_cdf((-ay - s) / sd))
    };
    Ok(p.clamp(0.0, 1.0))
}
