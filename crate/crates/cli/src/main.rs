//! `bougerol`: run an identity check or evaluator and write its report.
//!
//! Exit status: 0 when every verdict passes, 2 when a statistical test
//! fails, 1 on bad input or I/O errors.

mod config;
mod output;
mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use config::{parse_flags, RunConfig, SEED_ENV};

const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;

fn write(cfg: &RunConfig, rows: &[output::Row]) -> io::Result<()> {
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output::write_rows(rows, cfg.format, &mut w)?;
            w.flush()
        }
        None => output::write_rows(rows, cfg.format, io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match parse_flags(std::env::args_os(), env_seed.as_deref()) {
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
        Ok(Err(e)) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Ok(Ok(cfg)) => cfg,
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match run::execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = write(&cfg, &outcome.rows) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}
