//! Two-sample equality-in-law tests and the identity checks built on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;

mod atoms;
mod ecdf;
mod energy;
mod ks;
mod verify;

pub use atoms::{atom_frequency_compare, binomial_check};
pub use ecdf::{closed_form_grid_check, dkw_threshold, ecdf_at, ecdf_grid_compare, quantile_grid, GRID_PROBS};
pub use energy::{energy_perm_test, energy_statistic, ENERGY_MAX_PER_SAMPLE};
pub use ks::{kolmogorov_sf, ks_one_sample, ks_pvalue, ks_statistic, ks_two_sample};
pub use verify::{
    beta_at_a_full_path, verify_bdy, verify_boug, verify_main, verify_reversal, verify_second, Experiment, DEFAULT_PERMUTATIONS,
};

/// Significance level shared by every test.
pub const ALPHA: f64 = 0.01;

/// Rows of a 1- or 2-dimensional sample, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
    label: String,
    seed_info: Option<RngStream>,
}

impl SampleSet {
    pub fn new(dim: usize, data: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid("dim", format!("must be 1 or 2, got {dim}")));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(invalid("rows", format!("non-finite value {bad}")));
        }
        Ok(Self {
            dim,
            data,
            label: label.into(),
            seed_info: None,
        })
    }

    pub fn from_values(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::new(1, values, label)
    }

    pub fn from_pairs(label: impl Into<String>, rows: &[[f64; 2]]) -> Result<Self> {
        Self::new(2, rows.iter().flatten().copied().collect(), label)
    }

    pub fn with_seed(mut self, stream: RngStream) -> Self {
        self.seed_info = Some(stream);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed_info(&self) -> Option<RngStream> {
        self.seed_info
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Applies `f` to every coordinate. Equality in law is preserved when
    /// both samples go through the same bijection.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::new(self.dim, self.data.iter().map(|&v| f(v)).collect(), self.label.clone())?;
        out.seed_info = self.seed_info;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Flag(bool),
    UInt(u64),
    Int(i64),
    Real(f64),
    Text(String),
}

impl std::fmt::Display for MetaValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetaValue::Flag(b) => write!(f, "{b}"),
            MetaValue::UInt(v) => write!(f, "{v}"),
            MetaValue::Int(v) => write!(f, "{v}"),
            MetaValue::Real(v) => write!(f, "{v}"),
            MetaValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<bool> for MetaValue {
    fn from(v: bool) -> Self {
        MetaValue::Flag(v)
    }
}
impl From<u64> for MetaValue {
    fn from(v: u64) -> Self {
        MetaValue::UInt(v)
    }
}
impl From<usize> for MetaValue {
    fn from(v: usize) -> Self {
        MetaValue::UInt(v as u64)
    }
}
impl From<i64> for MetaValue {
    fn from(v: i64) -> Self {
        MetaValue::Int(v)
    }
}
impl From<f64> for MetaValue {
    fn from(v: f64) -> Self {
        MetaValue::Real(v)
    }
}
impl From<&str> for MetaValue {
    fn from(v: &str) -> Self {
        MetaValue::Text(v.to_owned())
    }
}
impl From<String> for MetaValue {
    fn from(v: String) -> Self {
        MetaValue::Text(v)
    }
}

/// Outcome of one decision: a statistic, the p-value or threshold it was
/// compared with, and the verdict of the documented rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub threshold_or_pvalue: f64,
    pub n1: usize,
    pub n2: usize,
    pub verdict: Verdict,
    pub metadata: BTreeMap<String, MetaValue>,
}

impl TestReport {
    pub fn new(test_name: impl Into<String>, statistic: f64, threshold_or_pvalue: f64, n1: usize, n2: usize, pass: bool) -> Self {
        Self {
            test_name: test_name.into(),
            statistic,
            threshold_or_pvalue,
            n1,
            n2,
            verdict: Verdict::from_bool(pass),
            metadata: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<MetaValue>) -> Self {
        self.metadata.insert(key.to_owned(), value.into());
        self
    }

    pub fn extend_meta(mut self, meta: &BTreeMap<String, MetaValue>) -> Self {
        for (k, v) in meta {
            self.metadata.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self
    }

    /// Prefixes the test name with `scope/`.
    pub fn scoped(mut self, scope: &str) -> Self {
        self.test_name = format!("{scope}/{}", self.test_name);
        self
    }
}

pub fn all_pass(reports: &[TestReport]) -> bool {
    reports.iter().all(TestReport::passed)
}

/// The reports that carry the pass/fail decision of an identity check:
/// grid-ECDF, energy and atom-frequency comparisons. Marginal and
/// closed-form diagnostics are excluded.
pub fn decisive(reports: &[TestReport]) -> impl Iterator<Item = &TestReport> {
    reports.iter().filter(|r| {
        r.test_name.ends_with("/ecdf_grid") || r.test_name.ends_with("/energy") || r.test_name.ends_with("/atom")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_set_shape_checks() {
        assert!(SampleSet::new(3, vec![0.0; 3], "x").is_err());
        assert!(SampleSet::new(2, vec![0.0; 3], "x").is_err());
        assert!(SampleSet::new(1, vec![f64::NAN], "x").is_err());
        let s = SampleSet::from_pairs("p", &[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(1), &[3.0, 4.0]);
        assert_eq!(s.column(0), vec![1.0, 3.0]);
    }

    #[test]
    fn report_serialises_flat_snake_case() {
        let r = TestReport::new("ks", 0.1, 0.5, 10, 12, true).with_meta("seed", 7u64);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"verdict\":\"pass\""), "{json}");
        assert!(json.contains("\"threshold_or_pvalue\":0.5"), "{json}");
        assert!(json.contains("\"seed\":7"), "{json}");
    }
}
