use bougerol::closedform::{density_a, mellin_a};
use bougerol::sde::{bougerol_drift_check, convergence_reports};
use bougerol::stats::{
    verify_bdy, verify_boug, verify_main, verify_reversal, verify_second, Experiment, TestReport,
};
use bougerol::{RngStream, VERSION};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::output::Row;

/// Stream id of every run; the seed alone selects the randomness.
const STREAM_ID: u64 = 0;
const DENSITY_TOL: f64 = 1e-10;
/// Paths per level in the SDE convergence study.
const SDE_PATHS: usize = 2000;

pub struct Outcome {
    pub rows: Vec<Row>,
    pub passed: bool,
}

fn base_row(cfg: &RunConfig) -> Row {
    let mut row = Row::default();
    row.push("command", json!(cfg.command.name()));
    row.push("version", json!(VERSION));
    row.push("seed", json!(cfg.seed));
    row.push("t", json!(cfg.t));
    match cfg.command {
        Command::Density => {
            row.push("v_min", json!(cfg.v_min));
            row.push("v_max", json!(cfg.v_max));
            row.push("points", json!(cfg.points));
        }
        Command::Mellin => {
            row.push("nu", json!(cfg.nu));
            row.push("n_mc", json!(cfg.n_mc));
            row.push("n_steps", json!(cfg.n_steps));
        }
        _ => {
            row.push("x", json!(cfg.x));
            row.push("n_mc", json!(cfg.n_mc));
            row.push("n_steps", json!(cfg.n_steps));
        }
    }
    row
}

fn report_row(cfg: &RunConfig, r: &TestReport) -> Row {
    let mut row = base_row(cfg);
    row.push("test_name", json!(r.test_name));
    row.push("statistic", json!(r.statistic));
    row.push("threshold_or_pvalue", json!(r.threshold_or_pvalue));
    row.push("n1", json!(r.n1));
    row.push("n2", json!(r.n2));
    row.push("verdict", serde_json::to_value(r.verdict).unwrap_or(Value::Null));
    for (k, v) in &r.metadata {
        row.push(&format!("meta_{k}"), serde_json::to_value(v).unwrap_or(Value::Null));
    }
    row
}

fn reports(cfg: &RunConfig, reports: Vec<TestReport>) -> Outcome {
    let passed = reports.iter().all(TestReport::passed);
    Outcome {
        rows: reports.iter().map(|r| report_row(cfg, r)).collect(),
        passed,
    }
}

pub fn execute(cfg: &RunConfig) -> bougerol::Result<Outcome> {
    let stream = RngStream::new(cfg.seed, STREAM_ID);
    let exp = || Experiment::new(cfg.t, cfg.n_mc, cfg.n_steps, stream);
    Ok(match cfg.command {
        Command::VerifyBoug => reports(cfg, verify_boug(&exp()?)?),
        Command::VerifyBdy => reports(cfg, verify_bdy(&exp()?)?),
        Command::VerifyMain => reports(cfg, verify_main(&exp()?, cfg.x)?),
        Command::VerifySecond => reports(cfg, verify_second(&exp()?, cfg.x)?),
        Command::VerifyReversal => reports(cfg, verify_reversal(&exp()?)?),
        Command::SdeCheck => {
            let mut all = convergence_reports(cfg.x, cfg.t, SDE_PATHS, stream.substream(100))?;
            all.extend(bougerol_drift_check(&exp()?, cfg.x)?);
            reports(cfg, all)
        }
        Command::Density => density(cfg)?,
        Command::Mellin => mellin(cfg, stream)?,
    })
}

fn density(cfg: &RunConfig) -> bougerol::Result<Outcome> {
    let mut rows = Vec::with_capacity(cfg.points);
    for k in 0..cfg.points {
        let v = if cfg.points == 1 {
            cfg.v_min
        } else {
            cfg.v_min + (cfg.v_max - cfg.v_min) * k as f64 / (cfg.points - 1) as f64
        };
        let d = density_a(cfg.t, v, DENSITY_TOL)?;
        let mut row = base_row(cfg);
        row.push("v", json!(v));
        row.push("density", json!(d.value));
        row.push("err_estimate", json!(d.abs_error_estimate));
        row.push("nodes_used", json!(d.nodes_used));
        row.push("accurate", json!(d.accurate));
        row.push("below_stability_floor", json!(d.below_stability_floor));
        rows.push(row);
    }
    // Evaluations carry no verdict.
    Ok(Outcome { rows, passed: true })
}

fn mellin(cfg: &RunConfig, stream: RngStream) -> bougerol::Result<Outcome> {
    let m = mellin_a(cfg.t, cfg.nu, cfg.n_mc, cfg.n_steps, stream)?;
    let diff = (m.lhs - m.rhs).abs();
    let threshold = 3.0 * m.mc_se + m.rhs_abs_error;
    let report = TestReport::new("mellin", diff, threshold, m.n_used, 0, diff <= threshold);
    let mut row = report_row(cfg, &report);
    row.push("lhs", json!(m.lhs));
    row.push("rhs", json!(m.rhs));
    row.push("mc_se", json!(m.mc_se));
    row.push("rhs_abs_error", json!(m.rhs_abs_error));
    row.push("rejected_paths", json!(m.rejected));
    Ok(Outcome {
        rows: vec![row],
        passed: report.passed(),
    })
}
