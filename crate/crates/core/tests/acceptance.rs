//! Acceptance suite: one PASS/FAIL line per criterion at full scale (10^5
//! paths of 4096 steps per sample). Seeds are fixed, so each run is a single
//! draw of every test; a FAIL is reported, not retried. The exit status is
//! non-zero on a FAIL only when `BOUGEROL_ACCEPTANCE_STRICT` is set.

use std::process::ExitCode;
use std::time::Instant;

use bougerol::closedform::{a_probability, joint_cdf_bl_level, mellin_a, no_hit_probability};
use bougerol::functionals::sample_functionals;
use bougerol::localtime::sample_bm_with_local_time;
use bougerol::mc::par_generate;
use bougerol::rng::standard_normal;
use bougerol::sde::{em_strong_error, explicit_residual};
use bougerol::special::normal_cdf;
use bougerol::stats::{
    atom_frequency_compare, binomial_check, closed_form_grid_check, decisive, ecdf_grid_compare, energy_perm_test,
    ks_two_sample, quantile_grid, verify_bdy, verify_boug, verify_main, verify_reversal, verify_second, Experiment,
    SampleSet, TestReport, DEFAULT_PERMUTATIONS, GRID_PROBS,
};
use bougerol::{GridSpec, RngStream};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const N: usize = 100_000;
const STEPS: usize = 4096;
const SEEDS: u64 = 20;

type Criterion = fn() -> (bool, String);

fn exp(t: f64, seed: u64, stream_id: u64) -> Experiment {
    Experiment::new(t, N, STEPS, RngStream::new(seed, stream_id)).unwrap()
}

fn decisive_pass(reports: &[TestReport]) -> bool {
    let mut any = false;
    for r in decisive(reports) {
        any = true;
        if !r.passed() {
            return false;
        }
    }
    any
}

fn failures(reports: &[TestReport]) -> String {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} ({:.4} vs {:.4})", r.test_name, r.statistic, r.threshold_or_pvalue))
        .collect();
    if bad.is_empty() {
        "all sub-tests pass".into()
    } else {
        bad.join(", ")
    }
}

fn bougerol() -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let passes = (0..SEEDS)
            .filter(|&seed| verify_boug(&exp(t, seed, 1)).unwrap().iter().all(TestReport::passed))
            .count();
        ok &= passes >= 18;
        detail.push(format!("t={t}: {passes}/{SEEDS}"));
    }
    (ok, detail.join(", "))
}

fn density() -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let mass = a_probability(t, 0.0, f64::INFINITY, 1e-9).unwrap().value;
        ok &= (mass - 1.0).abs() <= 1e-6;
        detail.push(format!("mass(t={t})-1={:.1e}", mass - 1.0));
    }

    // 40 equal bins on [0.1, 5] plus the two outer cells.
    let t = 1.0;
    let n = 1_000_000;
    let mut edges = vec![0.0];
    edges.extend((0..=40).map(|k| 0.1 + 4.9 * k as f64 / 40.0));
    edges.push(f64::INFINITY);
    let grid = GridSpec::new(t, STEPS).unwrap();
    let batch = sample_functionals(&grid, n, RngStream::new(2024, 2));
    let mut counts = vec![0usize; edges.len() - 1];
    for s in &batch.samples {
        let k = edges.partition_point(|&e| e <= s.a_t) - 1;
        counts[k] += 1;
    }
    let m = batch.samples.len() as f64;
    let mut chi2 = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let p = a_probability(t, edges[k], edges[k + 1], 1e-10).unwrap().value;
        chi2 += (c as f64 - m * p).powi(2) / (m * p);
    }
    let df = (counts.len() - 1) as f64;
    let pval = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
    ok &= pval > 0.001;
    detail.push(format!("chi2={chi2:.1} df={df} p={pval:.3}"));
    (ok, detail.join(", "))
}

fn mellin() -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, t) in [0.5, 1.0].into_iter().enumerate() {
        for (j, nu) in [1.0, 1.5, 2.0].into_iter().enumerate() {
            let m = mellin_a(t, nu, N, STEPS, RngStream::new(7, (3 * i + j) as u64)).unwrap();
            let diff = (m.lhs - m.rhs).abs();
            let pass = if nu == 1.0 {
                m.lhs == 1.0 && m.rhs == 1.0
            } else {
                diff <= 3.0 * m.mc_se
            };
            ok &= pass;
            detail.push(format!("(t={t},nu={nu}): |d|/se={:.2}", diff / m.mc_se.max(f64::MIN_POSITIVE)));
        }
    }
    (ok, detail.join(", "))
}

fn lemma() -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (t, x)) in [(1.0, 0.0), (1.0, 0.5), (2.0, -1.0)].into_iter().enumerate() {
        let draws = par_generate(N, RngStream::new(11, i as u64), |rng| {
            let s = sample_bm_with_local_time(t, x, rng).unwrap();
            [s.endpoint, s.local_time]
        });
        let sd: f64 = t.sqrt();
        let mut worst: f64 = 0.0;
        let mut fails = 0;
        for a in [-1.0, -0.4, 0.0, 0.4, 1.0].map(|k| x + k * sd) {
            for b in [0.05, 0.2, 0.4, 0.7, 1.0].map(|k| k * sd) {
                let hits = draws.iter().filter(|d| d[0] <= a && d[1] >= b).count();
                let p0 = joint_cdf_bl_level(t, x, a, b).unwrap();
                let r = binomial_check("lemma", hits, N, p0);
                worst = worst.max(r.statistic / (r.threshold_or_pvalue / 3.0));
                fails += usize::from(!r.passed());
            }
        }
        ok &= fails == 0;
        detail.push(format!("(t={t},x={x}): max z={worst:.2}"));
    }
    (ok, detail.join(", "))
}

fn bdy() -> (bool, String) {
    let passes = (0..SEEDS)
        .filter(|&seed| decisive_pass(&verify_bdy(&exp(1.0, seed, 5)).unwrap()))
        .count();
    (passes >= 18, format!("{passes}/{SEEDS} seeds"))
}

fn main_theorem() -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (t, x)) in [(1.0, 0.5), (1.0, -0.5), (2.0, 1.0)].into_iter().enumerate() {
        let reports = verify_main(&exp(t, 13, i as u64), x).unwrap();
        let closed = reports
            .iter()
            .filter(|r| r.test_name.ends_with("closed_form_grid"))
            .all(TestReport::passed);
        let pass = decisive_pass(&reports) && closed;
        ok &= pass;
        detail.push(format!("(t={t},x={x}): {}", if pass { "ok".into() } else { failures(&reports) }));
    }
    (ok, detail.join("; "))
}

fn second() -> (bool, String) {
    let reports = verify_second(&exp(1.0, 17, 0), 1.0).unwrap();
    let p0 = no_hit_probability(1.0, 1.0).unwrap();
    let expected = 2.0 * normal_cdf(1.0) - 1.0;
    let ok = reports.iter().all(TestReport::passed) && (p0 - expected).abs() < 1e-15;
    (ok, failures(&reports))
}

fn sde() -> (bool, String) {
    let levels = [256, 1024, 4096];
    let em = em_strong_error(0.7, 1.0, &levels, 4000, RngStream::new(19, 0)).unwrap();
    let ex = explicit_residual(0.7, 1.0, &levels, 4000, RngStream::new(19, 1)).unwrap();
    let shrinking = ex.rms_errors.windows(2).all(|w| w[1] < w[0]);
    let ok = (em.observed_order - 0.5).abs() <= 0.1 && shrinking;
    (
        ok,
        format!(
            "EM order {:.3} (rms {:.2e}/{:.2e}/{:.2e}); explicit residual {:.2e}/{:.2e}/{:.2e}",
            em.observed_order, em.rms_errors[0], em.rms_errors[1], em.rms_errors[2], ex.rms_errors[0], ex.rms_errors[1], ex.rms_errors[2]
        ),
    )
}

fn reversal() -> (bool, String) {
    let reports = verify_reversal(&exp(1.0, 23, 0)).unwrap();
    (decisive_pass(&reports), failures(&reports))
}

/// Every test on two independent samples from one law.
fn null_calibration() -> (bool, String) {
    const REPEATS: u64 = 20;
    let n = 20_000;
    let names = ["ks", "ecdf_grid", "energy", "atom", "binomial", "closed_form_grid"];
    let mut passes = [0usize; 6];
    for rep in 0..REPEATS {
        let s = RngStream::new(29, rep);
        let pairs = |k: u64| {
            par_generate(n, s.substream(k), |rng| {
                let u = standard_normal(rng);
                let v = standard_normal(rng);
                [u, (u + v).max(0.0)]
            })
        };
        let a = SampleSet::from_pairs("a", &pairs(1)).unwrap();
        let b = SampleSet::from_pairs("b", &pairs(2)).unwrap();
        let ks = ks_two_sample(
            &SampleSet::from_values("a", a.column(0)).unwrap(),
            &SampleSet::from_values("b", b.column(0)).unwrap(),
        )
        .unwrap();
        let grid = quantile_grid(&a, &b, &GRID_PROBS).unwrap();
        let ecdf = ecdf_grid_compare(&a, &b, &grid).unwrap();
        let energy = energy_perm_test(&a, &b, DEFAULT_PERMUTATIONS, &mut s.substream(3).rng()).unwrap();
        let atom = atom_frequency_compare(&a.column(1), &b.column(1), 0.0);
        let zeros = a.column(1).iter().filter(|&&z| z == 0.0).count();
        let binom = binomial_check("zeros", zeros, n, 0.5);
        // Independent coordinates with P(X <= x, Y >= y) = Φ(x)(1 - Φ(y)).
        let indep = par_generate(n, s.substream(4), |rng| [standard_normal(rng), standard_normal(rng)]);
        let indep = SampleSet::from_pairs("indep", &indep).unwrap();
        let cgrid: Vec<[f64; 2]> = quantile_grid(&indep, &indep, &GRID_PROBS)
            .unwrap()
            .into_iter()
            .filter(|p| p[1] > 0.0)
            .collect();
        let closed = closed_form_grid_check(&indep, &cgrid, |x, y| Ok(normal_cdf(x) * normal_cdf(-y))).unwrap();
        for (k, r) in [ks, ecdf, energy, atom, binom, closed].iter().enumerate() {
            passes[k] += usize::from(r.passed());
        }
    }
    let need = (0.95 * REPEATS as f64).ceil() as usize;
    let ok = passes.iter().all(|&p| p >= need);
    let detail: Vec<String> = names.iter().zip(passes).map(|(n, p)| format!("{n} {p}/{REPEATS}")).collect();
    (ok, detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("bougerol identity, KS over 20 seeds", bougerol),
        ("density of A_t: normalisation and chi-square", density),
        ("Mellin relation", mellin),
        ("joint law of (B_t, L^x_t)", lemma),
        ("three-way identity at level 0, 20 seeds", bdy),
        ("three-way identity at general level", main_theorem),
        ("local time at A_t vs reflected sinh", second),
        ("SDE: EM order and explicit-solution convergence", sde),
        ("time reversal of (e^B, A)", reversal),
        ("null calibration of every test", null_calibration),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        passed += usize::from(ok);
        println!(
            "{} criterion {:>2}: {name} [{detail}] ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() && std::env::var_os("BOUGEROL_ACCEPTANCE_STRICT").is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
