use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "BOUGEROL_SEED";
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_N_MC: usize = 100_000;
pub const MIN_N_MC: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// β at time A_t against sinh B_t (two-sample KS)
    VerifyBoug,
    /// three-way identity at level 0
    VerifyBdy,
    /// three-way identity at level x
    VerifyMain,
    /// local time of β at A_t against the reflected sinh form
    VerifySecond,
    /// (e^B, A) against its time reversal
    VerifyReversal,
    /// density of A_t on a grid of v
    Density,
    /// Monte Carlo and analytic sides of the Mellin relation
    Mellin,
    /// SDE convergence checks and the drifted identity
    SdeCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyBoug => "verify-boug",
            Command::VerifyBdy => "verify-bdy",
            Command::VerifyMain => "verify-main",
            Command::VerifySecond => "verify-second",
            Command::VerifyReversal => "verify-reversal",
            Command::Density => "density",
            Command::Mellin => "mellin",
            Command::SdeCheck => "sde-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Raw flags. Values stay strings so that validation can report every bad
/// flag at once instead of stopping at the first.
#[derive(Debug, Parser)]
#[command(name = "bougerol", version, about = "Monte Carlo checks of Bougerol-type identities in law")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: RawFlags,
}

#[derive(Debug, Default, clap::Args)]
pub struct RawFlags {
    /// time horizon t > 0
    #[arg(long, global = true, allow_hyphen_values = true, default_value = "1")]
    pub t: String,
    /// level x (finite)
    #[arg(long, global = true, allow_hyphen_values = true, default_value = "0")]
    pub x: String,
    /// Monte Carlo sample size per side (>= 100)
    #[arg(long = "n-mc", global = true, allow_hyphen_values = true)]
    pub n_mc: Option<String>,
    /// grid steps per path (power of two)
    #[arg(long = "n-steps", global = true, allow_hyphen_values = true, default_value = "4096")]
    pub n_steps: String,
    /// seed (default: $BOUGEROL_SEED, else 0)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// json or csv
    #[arg(long, global = true, default_value = "json")]
    pub format: String,
    /// output file (default: stdout)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// worker threads for sample generation (default: all cores)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub threads: Option<String>,
    /// density: smallest v
    #[arg(long = "v-min", global = true, allow_hyphen_values = true, default_value = "0.1")]
    pub v_min: String,
    /// density: largest v
    #[arg(long = "v-max", global = true, allow_hyphen_values = true, default_value = "5")]
    pub v_max: String,
    /// density: number of evaluation points
    #[arg(long, global = true, allow_hyphen_values = true, default_value = "100")]
    pub points: String,
    /// mellin: order ν > 1/2
    #[arg(long, global = true, allow_hyphen_values = true, default_value = "1.5")]
    pub nu: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub t: f64,
    pub x: f64,
    pub n_mc: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub v_min: f64,
    pub v_max: f64,
    pub points: usize,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagError {
    pub flag: &'static str,
    pub message: String,
}

/// Every invalid flag of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub Vec<FlagError>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "invalid --{}: {}", e.flag, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

struct Checker(Vec<FlagError>);

impl Checker {
    fn fail(&mut self, flag: &'static str, message: String) {
        self.0.push(FlagError { flag, message });
    }

    fn real(&mut self, flag: &'static str, raw: &str, ok: impl Fn(f64) -> bool, rule: &str) -> f64 {
        match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && ok(v) => v,
            Ok(v) => {
                self.fail(flag, format!("{rule}, got {v}"));
                f64::NAN
            }
            Err(_) => {
                self.fail(flag, format!("expected a number, got {raw:?}"));
                f64::NAN
            }
        }
    }

    fn uint(&mut self, flag: &'static str, raw: &str, ok: impl Fn(u64) -> bool, rule: &str) -> u64 {
        match raw.trim().parse::<u64>() {
            Ok(v) if ok(v) => v,
            Ok(v) => {
                self.fail(flag, format!("{rule}, got {v}"));
                0
            }
            Err(_) => {
                self.fail(flag, format!("expected a non-negative integer, got {raw:?}"));
                0
            }
        }
    }
}

impl RawFlags {
    /// Validates every flag; `env_seed` is the value of [`SEED_ENV`], if set.
    pub fn validate(&self, command: Command, env_seed: Option<&str>) -> Result<RunConfig, ConfigError> {
        let mut c = Checker(Vec::new());
        let t = c.real("t", &self.t, |v| v > 0.0, "must be > 0");
        let x = c.real("x", &self.x, |_| true, "must be finite");
        let n_mc = match &self.n_mc {
            Some(raw) => c.uint("n-mc", raw, |v| v >= MIN_N_MC as u64, "must be >= 100") as usize,
            None => DEFAULT_N_MC,
        };
        let n_steps = c.uint("n-steps", &self.n_steps, |v| v.is_power_of_two(), "must be a power of two") as usize;
        let seed = match (&self.seed, env_seed) {
            (Some(raw), _) => c.uint("seed", raw, |_| true, ""),
            (None, Some(raw)) => match raw.trim().parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    c.fail("seed", format!("{SEED_ENV} must be a non-negative integer, got {raw:?}"));
                    0
                }
            },
            (None, None) => DEFAULT_SEED,
        };
        let format = match self.format.as_str() {
            "json" => Format::Json,
            "csv" => Format::Csv,
            other => {
                c.fail("format", format!("allowed values are json, csv; got {other:?}"));
                Format::Json
            }
        };
        let threads = self
            .threads
            .as_ref()
            .map(|raw| c.uint("threads", raw, |v| v >= 1, "must be >= 1") as usize);
        let v_min = c.real("v-min", &self.v_min, |v| v > 0.0, "must be > 0");
        let v_max = c.real("v-max", &self.v_max, |v| v > 0.0, "must be > 0");
        if v_min.is_finite() && v_max.is_finite() && v_max < v_min {
            c.fail("v-max", format!("must be >= --v-min ({v_min}), got {v_max}"));
        }
        let points = c.uint("points", &self.points, |v| v >= 1, "must be >= 1") as usize;
        let nu = c.real("nu", &self.nu, |v| v > 0.5, "must be > 0.5");
        if !c.0.is_empty() {
            return Err(ConfigError(c.0));
        }
        Ok(RunConfig {
            command,
            t,
            x,
            n_mc,
            n_steps,
            seed,
            format,
            output: self.output.clone(),
            threads,
            v_min,
            v_max,
            points,
            nu,
        })
    }
}

/// Parses `argv` (program name first). Help and version requests and clap's
/// own usage errors come back as the clap error.
pub fn parse_flags<I, S>(argv: I, env_seed: Option<&str>) -> Result<Result<RunConfig, ConfigError>, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(cli.flags.validate(cli.command, env_seed))
}
