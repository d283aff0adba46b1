use crate::error::{Error, Result};

use super::{SampleSet, TestReport, ALPHA};

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Largest ECDF gap between two samples, evaluated after each block of tied
/// values so that atoms are handled correctly.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let a = sorted(a);
    let b = sorted(b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{k-1} exp(-2k²λ²)`, with
/// the Jacobi-theta form for small `λ` where the alternating series is slow.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let p = (2.0 * std::f64::consts::PI).sqrt() / lambda * (y + y.powi(9) + y.powi(25) + y.powi(49));
        (1.0 - p).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        (2.0 * (x - x.powi(4) + x.powi(9) - x.powi(16))).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value with effective size `n1 n2 / (n1 + n2)` and Stephens'
/// small-sample correction of the scaling.
pub fn ks_pvalue(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let sq = ne.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

pub fn ks_two_sample(s1: &SampleSet, s2: &SampleSet) -> Result<TestReport> {
    if s1.dim() != 1 || s2.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: s1.dim().max(s2.dim()),
        });
    }
    let (a, b) = (s1.column(0), s2.column(0));
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(crate::error::invalid("samples", "KS needs non-empty samples"));
    }
    let d = ks_statistic(&a, &b);
    let p = ks_pvalue(d, n1, n2);
    Ok(TestReport::new("ks", d, p, n1, n2, p > ALPHA)
        .with_meta("sample1", s1.label())
        .with_meta("sample2", s2.label()))
}

/// One-sample KS statistic and asymptotic p-value against a continuous CDF.
pub fn ks_one_sample(values: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let v = sorted(values);
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    });
    let sq = n.sqrt();
    (d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::from_values("s", v.to_vec()).unwrap()
    }

    /// Brute force: evaluate both ECDFs at every pooled point.
    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        a.iter().chain(b).map(|&x| (ecdf(a, x) - ecdf(b, x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn reference_statistics() {
        let r = ks_two_sample(&set(&[1.0, 2.0, 3.0]), &set(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.threshold_or_pvalue, 1.0);
        assert!(r.passed());
        assert_eq!(ks_two_sample(&set(&[0.0]), &set(&[1.0])).unwrap().statistic, 1.0);
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.5, 2.5, 3.5, 4.5];
        assert_eq!(brute_force(&a, &b), 0.25);
        assert_eq!(ks_two_sample(&set(&a), &set(&b)).unwrap().statistic, 0.25);
    }

    #[test]
    fn ties_match_brute_force() {
        let a = [0.0, 0.0, 0.0, 1.0, 2.0, 2.0];
        let b = [0.0, 1.0, 1.0, 1.0, 3.0];
        assert!((ks_statistic(&a, &b) - brute_force(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn dimension_checked() {
        let two = SampleSet::from_pairs("p", &[[0.0, 1.0]]).unwrap();
        assert!(ks_two_sample(&two, &set(&[1.0])).is_err());
    }

    #[test]
    fn kolmogorov_known_values() {
        // Q(1.3581) ≈ 0.05, Q(1.6276) ≈ 0.01
        assert!((kolmogorov_sf(1.358_099) - 0.05).abs() < 1e-5);
        assert!((kolmogorov_sf(1.627_624) - 0.01).abs() < 1e-5);
        // The two branches agree where they meet.
        assert!((kolmogorov_sf(1.18 - 1e-12) - kolmogorov_sf(1.18)).abs() < 1e-9);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn statistic_matches_brute_force(
            a in proptest::collection::vec(-5i32..5, 1..30),
            b in proptest::collection::vec(-5i32..5, 1..30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            proptest::prop_assert!((ks_statistic(&a, &b) - brute_force(&a, &b)).abs() < 1e-12);
        }
    }
}
