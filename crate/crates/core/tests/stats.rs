use bougerol::closedform::theorem_rhs_cdf;
use bougerol::mc::par_generate;
use bougerol::localtime::sample_bm_with_local_time;
use bougerol::rng::standard_normal;
use bougerol::stats::{
    atom_frequency_compare, decisive, ecdf_grid_compare, energy_perm_test, ks_two_sample, quantile_grid, verify_bdy,
    verify_main, verify_second, Experiment, SampleSet, DEFAULT_PERMUTATIONS, GRID_PROBS,
};
use bougerol::RngStream;

const N: usize = 100_000;

fn named<'a>(reports: &'a [bougerol::stats::TestReport], name: &str) -> &'a bougerol::stats::TestReport {
    reports.iter().find(|r| r.test_name == name).unwrap_or_else(|| panic!("no report {name}"))
}

#[test]
fn bdy_marginals() {
    let exp = Experiment::new(1.0, N, 4096, RngStream::new(61, 0)).unwrap();
    let reports = verify_bdy(&exp).unwrap();
    assert!(named(&reports, "bdy/first_marginal/ks").passed());
    assert!(named(&reports, "bdy/second_marginal/ks").passed());
    for r in &reports {
        assert_eq!(r.metadata["seed"].to_string(), "61");
        assert_eq!(r.metadata["n_steps"].to_string(), "4096");
    }
}

#[test]
fn main_at_level_zero_reproduces_bdy() {
    let exp = Experiment::new(1.0, 4000, 256, RngStream::new(67, 0)).unwrap();
    let bdy = verify_bdy(&exp).unwrap();
    let main = verify_main(&exp, 0.0).unwrap();
    for pair in ["pair1_vs_pair2", "pair2_vs_pair3"] {
        for test in ["ecdf_grid", "energy"] {
            let a = named(&bdy, &format!("bdy/{pair}/{test}"));
            let b = named(&main, &format!("main/{pair}/{test}"));
            assert_eq!(a.statistic, b.statistic, "{pair}/{test}");
        }
    }
}

#[test]
fn main_grid_point_and_second_marginal() {
    let exp = Experiment::new(1.0, N, 4096, RngStream::new(71, 0)).unwrap();
    let reports = verify_main(&exp, 0.5).unwrap();
    for r in reports.iter().filter(|r| r.test_name.starts_with("main/second_marginal")) {
        assert!(r.passed(), "{r:?}");
    }
    assert!(named(&reports, "main/pair3/closed_form_grid").passed());
    // Pair 3 at the single point (y, z) = (-0.25, 0.4).
    let p3 = par_generate(N, RngStream::new(71, 9), |rng| {
        let s = sample_bm_with_local_time(1.0, -0.5, rng).unwrap();
        ((0.5 + s.endpoint).sinh(), (0.5 + s.local_time).sinh() - 0.5f64.sinh())
    });
    let hits = p3.iter().filter(|(y, z)| *y <= -0.25 && *z >= 0.4).count();
    let p0 = theorem_rhs_cdf(1.0, 0.5, -0.25, 0.4).unwrap();
    let r = bougerol::stats::binomial_check("point", hits, N, p0);
    assert!(r.passed(), "{r:?}");
}

#[test]
fn second_at_level_zero() {
    let exp = Experiment::new(1.0, N, 4096, RngStream::new(73, 0)).unwrap();
    let reports = verify_second(&exp, 0.0).unwrap();
    assert!(named(&reports, "second/lhs_vs_rhs/ks").passed());
}

#[test]
fn second_sign_of_level_is_immaterial() {
    let exp = Experiment::new(2.0, N, 4096, RngStream::new(79, 0)).unwrap();
    let reports = verify_second(&exp, -0.8).unwrap();
    for r in &reports {
        assert!(r.passed(), "{r:?}");
    }
}

fn normal_pairs(n: usize, shift: f64, stream: RngStream) -> SampleSet {
    let rows = par_generate(n, stream, |rng| {
        let u = standard_normal(rng);
        [u + shift, (u + standard_normal(rng)).max(0.0) + shift]
    });
    SampleSet::from_pairs("pairs", &rows).unwrap()
}

#[test]
fn every_test_rejects_a_one_sd_shift() {
    let n = 10_000;
    let a = normal_pairs(n, 0.0, RngStream::new(83, 0));
    let b = normal_pairs(n, 1.0, RngStream::new(83, 1));
    let ks = ks_two_sample(
        &SampleSet::from_values("a", a.column(0)).unwrap(),
        &SampleSet::from_values("b", b.column(0)).unwrap(),
    )
    .unwrap();
    assert!(!ks.passed());
    let grid = quantile_grid(&a, &b, &GRID_PROBS).unwrap();
    assert!(!ecdf_grid_compare(&a, &b, &grid).unwrap().passed());
    let energy = energy_perm_test(&a, &b, DEFAULT_PERMUTATIONS, &mut RngStream::new(83, 2).rng()).unwrap();
    assert!(!energy.passed());
    // The shift also moves the atom of the second coordinate off zero.
    assert!(!atom_frequency_compare(&a.column(1), &b.column(1), 0.0).passed());
}

#[test]
fn decisive_reports_cover_every_comparison() {
    let exp = Experiment::new(1.0, 2000, 64, RngStream::new(89, 0)).unwrap();
    let reports = verify_main(&exp, 0.5).unwrap();
    let names: Vec<&str> = decisive(&reports).map(|r| r.test_name.as_str()).collect();
    for pair in ["pair1_vs_pair2", "pair2_vs_pair3", "pair1_vs_pair3"] {
        assert!(names.contains(&format!("main/{pair}/ecdf_grid").as_str()));
        assert!(names.contains(&format!("main/{pair}/energy").as_str()));
    }
}
