//! The SDE `dX = sqrt(1 + X²) dγ + X/2 dt`, `X_0 = sinh x`, three ways: the
//! explicit functional `e^{-B_t}(sinh x + ∫₀ᵗ e^{B_s} dW_s)`, Euler–Maruyama
//! against a driving Brownian motion, and the closed form `sinh(x + γ_t)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{sample_functional, OVERFLOW_LEVEL};
use crate::mc::{par_generate, par_generate_filtered};
use crate::paths::{sample_brownian_path, BrownianPath, GridSpec};
use crate::rng::{standard_normal, RngStream};
use crate::stats::{binomial_check, ks_two_sample, Experiment, SampleSet, TestReport};

pub fn drift(x: f64) -> f64 {
    0.5 * x
}

pub fn diffusion(x: f64) -> f64 {
    x.hypot(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeRunConfig {
    pub x: f64,
    pub grid: GridSpec,
    pub scheme_steps: usize,
}

impl SdeRunConfig {
    pub fn new(x: f64, grid: GridSpec, scheme_steps: usize) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid("x", format!("must be finite, got {x}")));
        }
        if scheme_steps == 0 {
            return Err(invalid("scheme_steps", "must be >= 1"));
        }
        Ok(Self { x, grid, scheme_steps })
    }
}

/// Output of the explicit construction on one pair of driving paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitRun {
    /// `X` on the grid.
    pub x_path: Vec<f64>,
    /// `γ` accumulated on the grid with left-point (Itô) sums.
    pub gamma_path: Vec<f64>,
    pub gamma_end: f64,
    /// `Σ (Δγ)²`.
    pub quadratic_variation: f64,
}

impl ExplicitRun {
    /// `max_k |X_k - sinh(x + γ_k)|`.
    pub fn max_residual(&self, x: f64) -> f64 {
        self.x_path
            .iter()
            .zip(&self.gamma_path)
            .map(|(xv, g)| (xv - (x + g).sinh()).abs())
            .fold(0.0, f64::max)
    }

    pub fn end_residual(&self, x: f64) -> f64 {
        self.x_path.last().unwrap() - (x + self.gamma_end).sinh()
    }
}

/// `X^x` built from the paths `b` (for `B`) and `w` (for `W`) on a common grid.
pub fn explicit_solution(x: f64, b: &BrownianPath, w: &BrownianPath) -> Result<ExplicitRun> {
    if b.grid() != w.grid() {
        return Err(invalid("w", "driving paths must share a grid"));
    }
    let worst = b.max().max(-b.min());
    if worst > OVERFLOW_LEVEL {
        return Err(Error::Overflow {
            max: worst,
            limit: OVERFLOW_LEVEL,
        });
    }
    let n = b.grid().n_steps();
    let (bv, wv) = (b.values(), w.values());
    let sx = x.sinh();
    let mut x_path = Vec::with_capacity(n + 1);
    let mut gamma_path = Vec::with_capacity(n + 1);
    let mut integral = 0.0;
    let mut gamma = 0.0;
    let mut qv = 0.0;
    x_path.push(sx);
    gamma_path.push(0.0);
    for k in 0..n {
        let xk = x_path[k];
        let db = bv[k + 1] - bv[k];
        let dw = wv[k + 1] - wv[k];
        let dg = (-xk * db + dw) / diffusion(xk);
        gamma += dg;
        qv += dg * dg;
        integral += bv[k].exp() * dw;
        x_path.push((-bv[k + 1]).exp() * (sx + integral));
        gamma_path.push(gamma);
    }
    Ok(ExplicitRun {
        x_path,
        gamma_path,
        gamma_end: gamma,
        quadratic_variation: qv,
    })
}

pub fn simulate_x_explicit<R: Rng + ?Sized>(cfg: &SdeRunConfig, rng: &mut R) -> Result<ExplicitRun> {
    let b = sample_brownian_path(&cfg.grid, rng);
    let w = sample_brownian_path(&cfg.grid, rng);
    explicit_solution(cfg.x, &b, &w)
}

/// Euler–Maruyama endpoint for `X_0 = sinh x` driven by the increments of `gamma`.
pub fn euler_maruyama(x: f64, gamma: &BrownianPath) -> Result<f64> {
    let h = gamma.grid().step();
    let mut xv = x.sinh();
    for dg in gamma.increments() {
        xv += diffusion(xv) * dg + drift(xv) * h;
        if !xv.is_finite() {
            return Err(Error::Overflow {
                max: xv,
                limit: f64::MAX,
            });
        }
    }
    Ok(xv)
}

/// Euler–Maruyama endpoint on `scheme_steps` steps over the horizon of
/// `cfg.grid`, against a fresh driving Brownian motion.
pub fn simulate_x_em<R: Rng + ?Sized>(cfg: &SdeRunConfig, rng: &mut R) -> Result<f64> {
    let grid = GridSpec::new(cfg.grid.t_end(), cfg.scheme_steps)?;
    let gamma = sample_brownian_path(&grid, rng);
    euler_maruyama(cfg.x, &gamma)
}

/// Errors at several resolutions of the same driving noise, and the
/// least-squares slope of `log(error)` against `log(step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub steps: Vec<usize>,
    pub rms_errors: Vec<f64>,
    pub observed_order: f64,
    pub paths: usize,
}

fn fitted_order(t: f64, steps: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|&n| (t / n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn check_levels(steps: &[usize]) -> Result<usize> {
    let finest = *steps.iter().max().ok_or_else(|| invalid("steps", "need at least two levels"))?;
    if steps.len() < 2 || steps.iter().any(|&n| n == 0 || !finest.is_multiple_of(n)) {
        return Err(invalid("steps", "need >= 2 levels, each dividing the finest"));
    }
    Ok(finest)
}

/// RMS strong error of Euler–Maruyama against `sinh(x + γ_t)` on shared noise.
pub fn em_strong_error(x: f64, t: f64, steps: &[usize], n_paths: usize, stream: RngStream) -> Result<ConvergenceStudy> {
    let finest = check_levels(steps)?;
    let grid = GridSpec::new(t, finest)?;
    let (sq, _) = par_generate_filtered(n_paths, stream, |rng| {
        let gamma = sample_brownian_path(&grid, rng);
        let exact = (x + gamma.endpoint()).sinh();
        steps
            .iter()
            .map(|&n| Ok((euler_maruyama(x, &gamma.subsample(finest / n)?)? - exact).powi(2)))
            .collect::<Result<Vec<f64>>>()
    });
    summarise(t, steps, &sq)
}

/// RMS of the endpoint residual `X_t - sinh(x + γ_t)` of the explicit
/// construction, at several resolutions of the same `(B, W)` paths.
pub fn explicit_residual(x: f64, t: f64, steps: &[usize], n_paths: usize, stream: RngStream) -> Result<ConvergenceStudy> {
    let finest = check_levels(steps)?;
    let grid = GridSpec::new(t, finest)?;
    let (sq, _) = par_generate_filtered(n_paths, stream, |rng| {
        let b = sample_brownian_path(&grid, rng);
        let w = sample_brownian_path(&grid, rng);
        steps
            .iter()
            .map(|&n| {
                let f = finest / n;
                Ok(explicit_solution(x, &b.subsample(f)?, &w.subsample(f)?)?.end_residual(x).powi(2))
            })
            .collect::<Result<Vec<f64>>>()
    });
    summarise(t, steps, &sq)
}

fn summarise(t: f64, steps: &[usize], sq: &[Vec<f64>]) -> Result<ConvergenceStudy> {
    if sq.is_empty() {
        return Err(invalid("n_paths", "no path survived"));
    }
    let rms_errors: Vec<f64> = (0..steps.len())
        .map(|i| (sq.iter().map(|v| v[i]).sum::<f64>() / sq.len() as f64).sqrt())
        .collect();
    Ok(ConvergenceStudy {
        observed_order: fitted_order(t, steps, &rms_errors),
        steps: steps.to_vec(),
        rms_errors,
        paths: sq.len(),
    })
}

/// `e^{B_t} sinh x + β_{A_t} ≐ sinh(x + B_t)`: a two-sample KS test with
/// `β_{A_t} = sqrt(A_t) Z`, plus both sample means against
/// `E sinh(x + B_t) = sinh(x) e^{t/2}`.
pub fn bougerol_drift_check(exp: &Experiment, x: f64) -> Result<Vec<TestReport>> {
    if !x.is_finite() {
        return Err(invalid("x", format!("must be finite, got {x}")));
    }
    let grid = exp.grid();
    let sx = x.sinh();
    let s1 = exp.component(1);
    let s2 = exp.component(2);
    let (lhs, rejected) = par_generate_filtered(exp.n_mc, s1, |rng| {
        let f = sample_functional(&grid, rng)?;
        Ok::<_, Error>(f.exp_b * sx + f.a_t.sqrt() * standard_normal(rng))
    });
    let sd = exp.t.sqrt();
    let rhs: Vec<f64> = par_generate(exp.n_mc, s2, |rng| (x + sd * standard_normal(rng)).sinh());
    let mut reports = vec![ks_two_sample(
        &SampleSet::from_values("drifted_beta_at_A", lhs.clone())?.with_seed(s1),
        &SampleSet::from_values("sinh_x_plus_B", rhs.clone())?.with_seed(s2),
    )?
    .scoped("alili_gruet")];
    let target = sx * (0.5 * exp.t).exp();
    for (name, v) in [("lhs_mean", &lhs), ("rhs_mean", &rhs)] {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let diff = (mean - target).abs();
        reports.push(
            TestReport::new(name, diff, 3.0 * se, v.len(), 0, diff <= 3.0 * se)
                .scoped("alili_gruet")
                .with_meta("mean", mean)
                .with_meta("expected", target),
        );
    }
    let mut meta = exp.metadata();
    meta.insert("x".into(), x.into());
    meta.insert("rejected_paths".into(), rejected.into());
    Ok(reports.into_iter().map(|r| r.extend_meta(&meta)).collect())
}

/// Pass/fail summary of the convergence checks used by the `sde-check`
/// command: EM strong order within `0.5 ± 0.1`, explicit residual shrinking
/// monotonically, and `⟨γ⟩_t` within 5% of `t`.
pub fn convergence_reports(x: f64, t: f64, n_paths: usize, stream: RngStream) -> Result<Vec<TestReport>> {
    let levels = [256, 1024, 4096];
    let em = em_strong_error(x, t, &levels, n_paths, stream.substream(1))?;
    let ex = explicit_residual(x, t, &levels, n_paths, stream.substream(2))?;
    let mut out = Vec::new();
    let dev = (em.observed_order - 0.5).abs();
    out.push(
        TestReport::new("em_strong_order", em.observed_order, 0.1, n_paths, 0, dev <= 0.1)
            .with_meta("rms_256", em.rms_errors[0])
            .with_meta("rms_1024", em.rms_errors[1])
            .with_meta("rms_4096", em.rms_errors[2]),
    );
    let shrinking = ex.rms_errors.windows(2).all(|w| w[1] < w[0]);
    out.push(
        TestReport::new("explicit_residual_order", ex.observed_order, 0.0, n_paths, 0, shrinking && ex.observed_order > 0.0)
            .with_meta("rms_256", ex.rms_errors[0])
            .with_meta("rms_1024", ex.rms_errors[1])
            .with_meta("rms_4096", ex.rms_errors[2]),
    );
    let grid = GridSpec::new(t, 4096)?;
    let cfg = SdeRunConfig::new(x, grid, 4096)?;
    let qvs: Vec<f64> = par_generate(16, stream.substream(3), |rng| {
        simulate_x_explicit(&cfg, rng).map(|r| r.quadratic_variation).unwrap_or(f64::NAN)
    });
    let mean_qv = qvs.iter().sum::<f64>() / qvs.len() as f64;
    let rel = (mean_qv / t - 1.0).abs();
    out.push(TestReport::new("gamma_quadratic_variation", rel, 0.05, qvs.len(), 0, rel <= 0.05).with_meta("mean_qv", mean_qv));
    // P(X_t > 0) = P(x + γ_t > 0) = Φ(x/√t) is a cheap exact anchor for the EM law.
    let em_cfg = SdeRunConfig::new(x, grid, 4096)?;
    let n = n_paths.max(100);
    let ends: Vec<f64> = par_generate(n, stream.substream(4), |rng| simulate_x_em(&em_cfg, rng).unwrap_or(f64::NAN));
    let positives = ends.iter().filter(|&&v| v > 0.0).count();
    out.push(binomial_check("em_positive_mass", positives, n, crate::special::normal_cdf(x / t.sqrt())));
    let meta = [("x", x), ("t", t)];
    Ok(out
        .into_iter()
        .map(|r| {
            let r = r.scoped("sde").with_meta("seed", stream.seed).with_meta("stream_id", stream.stream_id);
            meta.iter().fold(r, |r, (k, v)| r.with_meta(k, *v))
        })
        .collect())
}
