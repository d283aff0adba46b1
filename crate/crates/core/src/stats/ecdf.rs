use crate::error::{invalid, Error, Result};

use super::{TestReport, ALPHA};
use super::SampleSet;

/// Pooled-quantile levels used per coordinate for the comparison grid.
pub const GRID_PROBS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Fraction of rows with every coordinate `<= point`.
pub fn ecdf_at(s: &SampleSet, point: &[f64]) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let hits = s.rows().filter(|r| r.iter().zip(point).all(|(v, p)| v <= p)).count();
    hits as f64 / s.len() as f64
}

/// Sum of the one-sample DKW radii `sqrt(ln(2/α) / 2n)` of both samples.
/// For equal sizes this is `2 sqrt(ln(2/α) / 2n)`.
pub fn dkw_threshold(n1: usize, n2: usize, alpha: f64) -> f64 {
    let eps = |n: usize| ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt();
    eps(n1) + eps(n2)
}

fn quantiles(mut v: Vec<f64>, probs: &[f64]) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    let mut q: Vec<f64> = probs
        .iter()
        .map(|p| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)])
        .collect();
    q.dedup();
    q
}

/// Cartesian grid of pooled per-coordinate quantiles at `probs`. Repeated
/// quantiles (from atoms) are collapsed.
pub fn quantile_grid(s1: &SampleSet, s2: &SampleSet, probs: &[f64]) -> Result<Vec<[f64; 2]>> {
    if s1.dim() != 2 || s2.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if s1.dim() != 2 { s1.dim() } else { s2.dim() },
        });
    }
    if s1.is_empty() && s2.is_empty() {
        return Err(invalid("samples", "cannot build a grid from empty samples"));
    }
    let pooled = |j: usize| {
        let mut c = s1.column(j);
        c.extend(s2.column(j));
        quantiles(c, probs)
    };
    let (qx, qy) = (pooled(0), pooled(1));
    Ok(qx.iter().flat_map(|&x| qy.iter().map(move |&y| [x, y])).collect())
}

/// Maximum ECDF gap over `grid`, judged against [`dkw_threshold`] at `ALPHA`.
pub fn ecdf_grid_compare(s1: &SampleSet, s2: &SampleSet, grid: &[[f64; 2]]) -> Result<TestReport> {
    if s1.dim() != 2 || s2.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if s1.dim() != 2 { s1.dim() } else { s2.dim() },
        });
    }
    if grid.is_empty() {
        return Err(invalid("grid", "must contain at least one point"));
    }
    if s1.is_empty() || s2.is_empty() {
        return Err(invalid("samples", "must be non-empty"));
    }
    let mut worst = 0.0f64;
    let mut worst_at = grid[0];
    for g in grid {
        let d = (ecdf_at(s1, g) - ecdf_at(s2, g)).abs();
        if d > worst {
            worst = d;
            worst_at = *g;
        }
    }
    let threshold = dkw_threshold(s1.len(), s2.len(), ALPHA);
    Ok(TestReport::new("ecdf_grid", worst, threshold, s1.len(), s2.len(), worst <= threshold)
        .with_meta("grid_points", grid.len())
        .with_meta("worst_x", worst_at[0])
        .with_meta("worst_y", worst_at[1]))
}

/// Compares the empirical `P(X <= x, Y >= y)` of a 2-D sample with a closed
/// form at every grid point with `y > 0`; passes when each gap is within
/// three binomial standard errors of the closed-form probability.
pub fn closed_form_grid_check(
    s: &SampleSet,
    grid: &[[f64; 2]],
    closed_form: impl Fn(f64, f64) -> Result<f64>,
) -> Result<TestReport> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: s.dim(),
        });
    }
    let n = s.len();
    let points: Vec<[f64; 2]> = grid.iter().copied().filter(|g| g[1] > 0.0).collect();
    if points.is_empty() || n == 0 {
        return Err(invalid("grid", "no grid point with positive second coordinate"));
    }
    let mut worst = 0.0f64;
    let mut worst_at = points[0];
    for g in &points {
        let hits = s.rows().filter(|r| r[0] <= g[0] && r[1] >= g[1]).count();
        let freq = hits as f64 / n as f64;
        let p = closed_form(g[0], g[1])?;
        let se = (p * (1.0 - p) / n as f64).sqrt().max(f64::MIN_POSITIVE);
        let z = (freq - p).abs() / se;
        if z > worst {
            worst = z;
            worst_at = *g;
        }
    }
    Ok(TestReport::new("closed_form_grid", worst, super::atoms::SE_MULTIPLIER, n, 0, worst <= super::atoms::SE_MULTIPLIER)
        .with_meta("grid_points", points.len())
        .with_meta("worst_x", worst_at[0])
        .with_meta("worst_y", worst_at[1]))
}
