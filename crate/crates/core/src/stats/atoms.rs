use super::{TestReport, ALPHA};

/// Number of standard errors tolerated by the binomial checks.
pub const SE_MULTIPLIER: f64 = 3.0;

/// Two-proportion comparison of the mass both samples put on `atom`:
/// passes when `|p1 - p2| <= 3 SE` with the pooled standard error.
pub fn atom_frequency_compare(a: &[f64], b: &[f64], atom: f64) -> TestReport {
    let (n1, n2) = (a.len(), b.len());
    let k1 = a.iter().filter(|&&v| v == atom).count();
    let k2 = b.iter().filter(|&&v| v == atom).count();
    let p1 = k1 as f64 / n1.max(1) as f64;
    let p2 = k2 as f64 / n2.max(1) as f64;
    let pooled = (k1 + k2) as f64 / (n1 + n2).max(1) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1.max(1) as f64 + 1.0 / n2.max(1) as f64)).sqrt();
    let diff = (p1 - p2).abs();
    let threshold = SE_MULTIPLIER * se;
    TestReport::new("atom", diff, threshold, n1, n2, diff <= threshold)
        .with_meta("atom", atom)
        .with_meta("freq1", p1)
        .with_meta("freq2", p2)
        .with_meta("alpha", ALPHA)
}

/// Observed frequency `count / n` against a known probability `p0`,
/// passing within three binomial standard errors.
pub fn binomial_check(name: &str, count: usize, n: usize, p0: f64) -> TestReport {
    let freq = count as f64 / n.max(1) as f64;
    let se = (p0 * (1.0 - p0) / n.max(1) as f64).sqrt();
    let diff = (freq - p0).abs();
    let threshold = SE_MULTIPLIER * se;
    TestReport::new(name, diff, threshold, n, 0, diff <= threshold)
        .with_meta("frequency", freq)
        .with_meta("expected", p0)
}
