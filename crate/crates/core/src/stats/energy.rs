use rand::Rng;

use crate::error::{invalid, Error, Result};

use super::{SampleSet, TestReport, ALPHA};

/// Larger samples are reduced to a random subsample of this many rows per
/// side before the O(n²) permutation test.
pub const ENERGY_MAX_PER_SAMPLE: usize = 500;

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pairwise distances of the pooled rows, row-major `m x m`.
fn pooled_distances(rows: &[&[f64]]) -> Vec<f64> {
    let m = rows.len();
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = distance(rows[i], rows[j]);
            d[i * m + j] = v;
            d[j * m + i] = v;
        }
    }
    d
}

/// Scaled energy statistic `n1 n2 / (n1 + n2) * (2 E|X-Y| - E|X-X'| - E|Y-Y'|)`
/// for the labelling `in_first`, given pooled distances and their total.
fn statistic_for(d: &[f64], m: usize, in_first: &[bool], total: f64) -> f64 {
    let mut w1 = 0.0;
    let mut w2 = 0.0;
    for i in 0..m {
        let row = &d[i * m..(i + 1) * m];
        let li = in_first[i];
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for j in (i + 1)..m {
            if in_first[j] {
                s1 += row[j];
            } else {
                s2 += row[j];
            }
        }
        if li {
            w1 += s1;
        } else {
            w2 += s2;
        }
    }
    let n1 = in_first.iter().filter(|&&b| b).count() as f64;
    let n2 = m as f64 - n1;
    let cross = total - w1 - w2;
    let e = 2.0 * cross / (n1 * n2) - 2.0 * w1 / (n1 * n1) - 2.0 * w2 / (n2 * n2);
    n1 * n2 / (n1 + n2) * e
}

fn rows_of(s: &SampleSet) -> Vec<&[f64]> {
    s.rows().collect()
}

/// Energy statistic of two samples without subsampling.
pub fn energy_statistic(s1: &SampleSet, s2: &SampleSet) -> Result<f64> {
    check(s1, s2)?;
    let mut rows = rows_of(s1);
    rows.extend(rows_of(s2));
    let m = rows.len();
    let d = pooled_distances(&rows);
    let total = d.iter().sum::<f64>() / 2.0;
    let labels: Vec<bool> = (0..m).map(|i| i < s1.len()).collect();
    Ok(statistic_for(&d, m, &labels, total))
}

fn check(s1: &SampleSet, s2: &SampleSet) -> Result<()> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    if s1.is_empty() || s2.is_empty() {
        return Err(invalid("samples", "must be non-empty"));
    }
    Ok(())
}

fn subsample<'a, R: Rng + ?Sized>(s: &'a SampleSet, rng: &mut R) -> Vec<&'a [f64]> {
    if s.len() <= ENERGY_MAX_PER_SAMPLE {
        return rows_of(s);
    }
    let mut idx = rand::seq::index::sample(rng, s.len(), ENERGY_MAX_PER_SAMPLE).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| s.row(i)).collect()
}

/// Energy-distance two-sample test with a permutation p-value
/// `(1 + #{T_perm >= T_obs}) / (1 + n_perm)`.
pub fn energy_perm_test<R: Rng + ?Sized>(s1: &SampleSet, s2: &SampleSet, n_perm: usize, rng: &mut R) -> Result<TestReport> {
    check(s1, s2)?;
    if n_perm < 99 {
        return Err(invalid("n_perm", format!("must be >= 99, got {n_perm}")));
    }
    let r1 = subsample(s1, rng);
    let r2 = subsample(s2, rng);
    let (k1, k2) = (r1.len(), r2.len());
    let mut rows = r1;
    rows.extend(r2);
    let m = rows.len();
    let d = pooled_distances(&rows);
    let total = d.iter().sum::<f64>() / 2.0;
    let mut labels: Vec<bool> = (0..m).map(|i| i < k1).collect();
    let observed = statistic_for(&d, m, &labels, total);
    // Relative slack so that permutations reproducing the observed split
    // up to summation order count as ties.
    let slack = 1e-12 * observed.abs().max(1e-300);
    let mut exceed = 0usize;
    for _ in 0..n_perm {
        for i in (1..m).rev() {
            let j = rng.random_range(0..=i);
            labels.swap(i, j);
        }
        if statistic_for(&d, m, &labels, total) >= observed - slack {
            exceed += 1;
        }
    }
    let p = (1 + exceed) as f64 / (1 + n_perm) as f64;
    Ok(TestReport::new("energy", observed, p, s1.len(), s2.len(), p > ALPHA)
        .with_meta("n_perm", n_perm)
        .with_meta("subsample1", k1)
        .with_meta("subsample2", k2))
}
