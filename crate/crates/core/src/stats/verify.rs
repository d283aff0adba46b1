//! Monte Carlo checks of the identities in law.
//!
//! Every side of an identity is simulated from its own child stream, so
//! the two samples handed to a two-sample test are independent. Local times
//! of `β` at the random time `A_t` are drawn exactly: given the `B` path,
//! `(β_{A_t}, λ^c_{A_t})` is a Brownian endpoint/local-time pair at horizon
//! `A_t`, and `β_{A_t}` alone is `sqrt(A_t) Z`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::closedform::{no_hit_probability, theorem_rhs_cdf};
use crate::error::{invalid, Result};
use crate::functionals::{reversed_pair, sample_functional, FunctionalSample};
use crate::localtime::{sample_bm_with_local_time, LevelLocalTimeSample};
use crate::mc::{par_generate, par_generate_filtered};
use crate::paths::{sample_brownian_path, GridSpec};
use crate::rng::{standard_normal, RngStream, StreamRng};

use super::{
    atom_frequency_compare, binomial_check, closed_form_grid_check, ecdf_grid_compare, energy_perm_test,
    ks_two_sample, quantile_grid, MetaValue, SampleSet, TestReport, GRID_PROBS,
};

pub const DEFAULT_PERMUTATIONS: usize = 199;

/// Parameters shared by every identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub t: f64,
    pub n_mc: usize,
    pub n_steps: usize,
    pub stream: RngStream,
    pub n_perm: usize,
}

impl Experiment {
    pub fn new(t: f64, n_mc: usize, n_steps: usize, stream: RngStream) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid("t", format!("must be finite and > 0, got {t}")));
        }
        if n_mc < 2 {
            return Err(invalid("n_mc", format!("must be >= 2, got {n_mc}")));
        }
        GridSpec::new(t, n_steps)?;
        Ok(Self {
            t,
            n_mc,
            n_steps,
            stream,
            n_perm: DEFAULT_PERMUTATIONS,
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.t, self.n_steps).expect("validated in Experiment::new")
    }

    /// Child stream for one component of a check.
    pub fn component(&self, k: u64) -> RngStream {
        self.stream.substream(k)
    }

    pub fn metadata(&self) -> BTreeMap<String, MetaValue> {
        let mut m = BTreeMap::new();
        m.insert("t".into(), self.t.into());
        m.insert("n_mc".into(), self.n_mc.into());
        m.insert("n_steps".into(), self.n_steps.into());
        m.insert("seed".into(), self.stream.seed.into());
        m.insert("stream_id".into(), self.stream.stream_id.into());
        m
    }
}

// Component indices of the child streams.
const SIDE_1: u64 = 1;
const SIDE_2: u64 = 2;
const SIDE_3: u64 = 3;
const REFERENCE: u64 = 4;
const TESTS: u64 = 10;

/// Draws `(functional, local-time pair at horizon A_t and level(functional))`.
fn conditional_draws(
    exp: &Experiment,
    stream: RngStream,
    level: impl Fn(&FunctionalSample) -> f64 + Sync,
) -> (Vec<(FunctionalSample, LevelLocalTimeSample)>, usize) {
    let grid = exp.grid();
    par_generate_filtered(exp.n_mc, stream, |rng| {
        let f = sample_functional(&grid, rng)?;
        let lt = sample_bm_with_local_time(f.a_t, level(&f), rng)?;
        Ok::<_, crate::Error>((f, lt))
    })
}

fn pair_set(label: &str, rows: &[[f64; 2]], stream: RngStream) -> Result<SampleSet> {
    Ok(SampleSet::from_pairs(label, rows)?.with_seed(stream))
}

/// Grid-ECDF and energy tests (plus an atom check on the second coordinate
/// when either side has mass at zero) for one claimed equality.
fn compare_pairs(exp: &Experiment, scope: &str, a: &SampleSet, b: &SampleSet, test_stream: RngStream) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    let (za, zb) = (a.column(1), b.column(1));
    if za.contains(&0.0) || zb.contains(&0.0) {
        out.push(atom_frequency_compare(&za, &zb, 0.0));
    }
    let grid = quantile_grid(a, b, &GRID_PROBS)?;
    out.push(ecdf_grid_compare(a, b, &grid)?);
    // asinh is a bijection applied to both sides; it tames the heavy tails
    // of the sinh-type coordinates before the distance-based statistic.
    let ta = a.map_values(f64::asinh)?;
    let tb = b.map_values(f64::asinh)?;
    out.push(energy_perm_test(&ta, &tb, exp.n_perm, &mut test_stream.rng())?.with_meta("transform", "asinh"));
    Ok(out
        .into_iter()
        .map(|r| {
            r.scoped(scope)
                .with_meta("sample1", a.label())
                .with_meta("sample2", b.label())
        })
        .collect())
}

/// KS on the strictly positive parts, preceded by an atom comparison at 0.
fn compare_with_atom(scope: &str, a: &[f64], b: &[f64], label_a: &str, label_b: &str) -> Result<Vec<TestReport>> {
    let mut out = vec![atom_frequency_compare(a, b, 0.0).scoped(scope)];
    let pa: Vec<f64> = a.iter().copied().filter(|&v| v > 0.0).collect();
    let pb: Vec<f64> = b.iter().copied().filter(|&v| v > 0.0).collect();
    if !pa.is_empty() && !pb.is_empty() {
        let ks = ks_two_sample(&SampleSet::from_values(label_a, pa)?, &SampleSet::from_values(label_b, pb)?)?;
        out.push(ks.scoped(scope).with_meta("part", "positive"));
    }
    Ok(out)
}

fn finish(reports: Vec<TestReport>, meta: &BTreeMap<String, MetaValue>) -> Vec<TestReport> {
    reports.into_iter().map(|r| r.extend_meta(meta)).collect()
}

fn fresh_normals(n: usize, sd: f64, stream: RngStream) -> Vec<f64> {
    par_generate(n, stream, |rng: &mut StreamRng| sd * standard_normal(rng))
}

/// `β_{A_t} ≐ sinh B_t`, with `β_{A_t} = sqrt(A_t) Z` given the `B` path.
pub fn verify_boug(exp: &Experiment) -> Result<Vec<TestReport>> {
    let grid = exp.grid();
    let s1 = exp.component(SIDE_1);
    let (lhs, rejected) = par_generate_filtered(exp.n_mc, s1, |rng| {
        let f = sample_functional(&grid, rng)?;
        Ok::<_, crate::Error>(f.a_t.sqrt() * standard_normal(rng))
    });
    let s2 = exp.component(SIDE_2);
    let rhs: Vec<f64> = fresh_normals(exp.n_mc, exp.t.sqrt(), s2).into_iter().map(f64::sinh).collect();
    let ks = ks_two_sample(
        &SampleSet::from_values("beta_at_A", lhs)?.with_seed(s1),
        &SampleSet::from_values("sinh_B", rhs)?.with_seed(s2),
    )?;
    let meta = exp.metadata();
    Ok(finish(vec![ks.scoped("boug").with_meta("rejected_paths", rejected)], &meta))
}

/// `(e^{B_t}, A_t) ≐ (e^{-B_t}, e^{-2B_t} A_t)`, the second pair computed on
/// time-reversed paths.
pub fn verify_reversal(exp: &Experiment) -> Result<Vec<TestReport>> {
    let grid = exp.grid();
    let s1 = exp.component(SIDE_1);
    let s2 = exp.component(SIDE_2);
    let (fwd, rej1) = par_generate_filtered(exp.n_mc, s1, |rng| {
        sample_functional(&grid, rng).map(|f| [f.exp_b, f.a_t])
    });
    let (rev, rej2) = par_generate_filtered(exp.n_mc, s2, |rng| {
        let p = sample_brownian_path(&grid, rng);
        reversed_pair(&p).map(|(_, r)| [r.exp_b, r.a_t])
    });
    let a = pair_set("exp_B_and_A", &fwd, s1)?;
    let b = pair_set("reversed_exp_B_and_A", &rev, s2)?;
    let reports = compare_pairs(exp, "reversal", &a, &b, exp.component(TESTS))?;
    let mut meta = exp.metadata();
    meta.insert("rejected_paths".into(), (rej1 + rej2).into());
    Ok(finish(reports, &meta))
}

/// `(β_{A_t}, e^{-B_t} λ⁰_{A_t}) ≐ (e^{-B_t} β_{A_t}, λ⁰_{A_t}) ≐ (sinh B_t, sinh L⁰_t)`.
pub fn verify_bdy(exp: &Experiment) -> Result<Vec<TestReport>> {
    let s1 = exp.component(SIDE_1);
    let s2 = exp.component(SIDE_2);
    let s3 = exp.component(SIDE_3);
    let (d1, rej1) = conditional_draws(exp, s1, |_| 0.0);
    let (d2, rej2) = conditional_draws(exp, s2, |_| 0.0);
    let p1: Vec<[f64; 2]> = d1.iter().map(|(f, l)| [l.endpoint, f.exp_neg_b * l.local_time]).collect();
    let p2: Vec<[f64; 2]> = d2.iter().map(|(f, l)| [f.exp_neg_b * l.endpoint, l.local_time]).collect();
    let p3: Vec<[f64; 2]> = par_generate(exp.n_mc, s3, |rng| {
        let l = sample_bm_with_local_time(exp.t, 0.0, rng).expect("t validated");
        [l.endpoint.sinh(), l.local_time.sinh()]
    });
    let a = pair_set("pair1", &p1, s1)?;
    let b = pair_set("pair2", &p2, s2)?;
    let c = pair_set("pair3", &p3, s3)?;

    let mut reports = compare_pairs(exp, "bdy/pair1_vs_pair2", &a, &b, exp.component(TESTS))?;
    reports.extend(compare_pairs(exp, "bdy/pair2_vs_pair3", &b, &c, exp.component(TESTS + 1))?);

    let boug = ks_two_sample(
        &SampleSet::from_values("pair3_first", c.column(0))?,
        &SampleSet::from_values("pair1_first", a.column(0))?,
    )?;
    reports.push(boug.scoped("bdy/first_marginal"));
    let reference: Vec<f64> = fresh_normals(exp.n_mc, exp.t.sqrt(), exp.component(REFERENCE))
        .into_iter()
        .map(|z| z.abs().sinh())
        .collect();
    let levy = ks_two_sample(
        &SampleSet::from_values("pair3_second", c.column(1))?,
        &SampleSet::from_values("sinh_abs_B", reference)?,
    )?;
    reports.push(levy.scoped("bdy/second_marginal"));

    let mut meta = exp.metadata();
    meta.insert("x".into(), 0.0.into());
    meta.insert("rejected_paths".into(), (rej1 + rej2).into());
    Ok(finish(reports, &meta))
}

/// The three-way identity for a general level `x`:
/// `(e^{B}sinh x + β_A, e^{-B} λ^{-e^{B}sinh x}_A)`
/// `≐ (e^{-B}sinh x + e^{-B}β_A, λ^{-sinh x}_A)`
/// `≐ (sinh(x + B_t), sinh(|x| + L^{-x}_t) - sinh|x|)`.
pub fn verify_main(exp: &Experiment, x: f64) -> Result<Vec<TestReport>> {
    if !x.is_finite() {
        return Err(invalid("x", format!("must be finite, got {x}")));
    }
    let sx = x.sinh();
    let shx = x.abs().sinh();
    let s1 = exp.component(SIDE_1);
    let s2 = exp.component(SIDE_2);
    let s3 = exp.component(SIDE_3);
    let (d1, rej1) = conditional_draws(exp, s1, |f| -f.exp_b * sx);
    let (d2, rej2) = conditional_draws(exp, s2, |_| -sx);
    let p1: Vec<[f64; 2]> = d1
        .iter()
        .map(|(f, l)| [f.exp_b * sx + l.endpoint, f.exp_neg_b * l.local_time])
        .collect();
    let p2: Vec<[f64; 2]> = d2
        .iter()
        .map(|(f, l)| [f.exp_neg_b * sx + f.exp_neg_b * l.endpoint, l.local_time])
        .collect();
    let p3: Vec<[f64; 2]> = par_generate(exp.n_mc, s3, |rng| {
        let l = sample_bm_with_local_time(exp.t, -x, rng).expect("t validated");
        [(x + l.endpoint).sinh(), (x.abs() + l.local_time).sinh() - shx]
    });
    let a = pair_set("pair1", &p1, s1)?;
    let b = pair_set("pair2", &p2, s2)?;
    let c = pair_set("pair3", &p3, s3)?;

    let mut reports = compare_pairs(exp, "main/pair1_vs_pair2", &a, &b, exp.component(TESTS))?;
    reports.extend(compare_pairs(exp, "main/pair2_vs_pair3", &b, &c, exp.component(TESTS + 1))?);
    reports.extend(compare_pairs(exp, "main/pair1_vs_pair3", &a, &c, exp.component(TESTS + 2))?);

    let grid = quantile_grid(&c, &c, &GRID_PROBS)?;
    let t = exp.t;
    reports.push(closed_form_grid_check(&c, &grid, |y, z| theorem_rhs_cdf(t, x, y, z))?.scoped("main/pair3"));
    let atoms = c.column(1).iter().filter(|&&z| z == 0.0).count();
    reports.push(binomial_check("no_hit_mass", atoms, c.len(), no_hit_probability(t, x)?).scoped("main/pair3"));

    // Second coordinates alone against (sinh|B_t| - sinh|x|)^+.
    let reference: Vec<f64> = fresh_normals(exp.n_mc, t.sqrt(), exp.component(REFERENCE))
        .into_iter()
        .map(|z| (z.abs().sinh() - shx).max(0.0))
        .collect();
    reports.extend(compare_with_atom("main/second_marginal", &b.column(1), &reference, "pair2_second", "reflected_sinh")?);

    let mut meta = exp.metadata();
    meta.insert("x".into(), x.into());
    meta.insert("rejected_paths".into(), (rej1 + rej2).into());
    Ok(finish(reports, &meta))
}

/// `λ^{sinh x}_{A_t} ≐ sinh(|x| + L^x_t) - sinh|x| ≐ (sinh|B_t| - sinh|x|)^+`.
pub fn verify_second(exp: &Experiment, x: f64) -> Result<Vec<TestReport>> {
    if !x.is_finite() {
        return Err(invalid("x", format!("must be finite, got {x}")));
    }
    let sx = x.sinh();
    let shx = x.abs().sinh();
    let t = exp.t;
    let (d1, rejected) = conditional_draws(exp, exp.component(SIDE_1), |_| sx);
    let lhs: Vec<f64> = d1.iter().map(|(_, l)| l.local_time).collect();
    let rhs: Vec<f64> = par_generate(exp.n_mc, exp.component(SIDE_2), |rng| {
        let l = sample_bm_with_local_time(t, x, rng).expect("t validated");
        (x.abs() + l.local_time).sinh() - shx
    });
    let reflected: Vec<f64> = fresh_normals(exp.n_mc, t.sqrt(), exp.component(REFERENCE))
        .into_iter()
        .map(|z| (z.abs().sinh() - shx).max(0.0))
        .collect();

    let mut reports = compare_with_atom("second/lhs_vs_rhs", &lhs, &rhs, "lambda_at_A", "sinh_local_time")?;
    reports.extend(compare_with_atom("second/lhs_vs_reflected", &lhs, &reflected, "lambda_at_A", "reflected_sinh")?);
    let p0 = no_hit_probability(t, x)?;
    let zeros = |v: &[f64]| v.iter().filter(|&&z| z == 0.0).count();
    if x != 0.0 {
        reports.push(binomial_check("no_hit_mass", zeros(&lhs), lhs.len(), p0).scoped("second/lhs"));
        reports.push(binomial_check("no_hit_mass", zeros(&rhs), rhs.len(), p0).scoped("second/rhs"));
    }
    let mut meta = exp.metadata();
    meta.insert("x".into(), x.into());
    meta.insert("rejected_paths".into(), rejected.into());
    Ok(finish(reports, &meta))
}

/// `(β_{A_t}, A_t)` with `β` walked step by step along the clock of the
/// trapezoid increments of `A`, instead of the one-shot `sqrt(A_t) Z`.
pub fn beta_at_a_full_path<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> Result<(f64, f64)> {
    let p = sample_brownian_path(grid, rng);
    let f = crate::functionals::exp_functional(&p)?;
    let h = grid.step();
    let mut beta = 0.0;
    for w in p.values().windows(2) {
        let da = 0.5 * h * ((2.0 * w[0]).exp() + (2.0 * w[1]).exp());
        beta += da.sqrt() * standard_normal(rng);
    }
    Ok((beta, f.a_t))
}
