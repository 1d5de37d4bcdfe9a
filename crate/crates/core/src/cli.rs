//! Subcommand drivers behind the `skfb` binary.
//!
//! Exit codes: 0 success, 1 I/O or numerical failure, 2 configuration or
//! argument error, 3 converse scan overflow, 4 asserted inequality violated.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{sweep, UpperMode};
use crate::config::{Mode, SweepConfig};
use crate::error::{Error, Result};
use crate::leakage::leakage_profile;
use crate::report::{self, BoundRow, LeakageRow, SimulateRow};
use crate::schemes::{exact_excess_probability, monte_carlo_excess_profile, SchemeVariant};
use crate::verify::{run_suite, CheckLine, Suite, VerifySettings};

#[derive(Debug, Parser)]
#[command(name = "skfb", version, about = "SK feedback schemes over the Gaussian wiretap channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when absent and the config names none).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized commands; a fresh one is drawn and printed if absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Classic,
    Modified,
}

impl From<VariantArg> for SchemeVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Classic => SchemeVariant::Classic,
            VariantArg::Modified => SchemeVariant::Modified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Asymptotic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate bracket over the distortion grid.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Converse used for the upper bound.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Monte Carlo excess-distortion probability at every grid distortion.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "modified")]
        variant: VariantArg,
        /// Blocklength.
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Exact leakage against the analytic bound for N = 1..=nmax.
    Leakage {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "modified")]
        variant: VariantArg,
        #[arg(long, default_value_t = 200)]
        nmax: usize,
    },
    /// Monte Carlo checks of the converse machinery.
    Verify {
        #[command(flatten)]
        common: Common,
        /// mgf, moments or berry_esseen; all three when absent.
        #[arg(long)]
        suite: Option<String>,
        /// Trials per grid point (suite default when absent).
        #[arg(long)]
        trials: Option<u64>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::Domain { .. } => 2,
        Error::ScanOverflow { .. } => 3,
        Error::Assertion(_) => 4,
        Error::Io(_) | Error::Degenerate(_) | Error::CorruptedState { .. } | Error::InadmissibleContext { .. } => 1,
    }
}

fn load_config(common: &Common) -> Result<SweepConfig> {
    let mut cfg = match &common.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.output = common.out.clone();
    }
    Ok(cfg)
}

fn resolve_seed(cfg: &SweepConfig) -> u64 {
    cfg.seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn sink(cfg: &SweepConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn param_comment(cfg: &SweepConfig) -> String {
    let p = &cfg.params;
    format!(
        "sigma_s2={} sigma_eta2={} sigma_e2={} sigma_e2_tilde={} P={} epsilon={} delta={}",
        p.sigma_s2, p.sigma_eta2, p.sigma_e2, p.sigma_e2_tilde, p.power, cfg.epsilon, cfg.delta
    )
}

/// Upper-bound mode: the flag wins, then the config's modes.
pub fn upper_mode(cfg: &SweepConfig, flag: Option<ModeArg>) -> UpperMode {
    match flag {
        Some(ModeArg::Exact) => UpperMode::Exact,
        Some(ModeArg::Asymptotic) => UpperMode::ASYMPTOTIC,
        None if !cfg.has(Mode::UpperExact) && cfg.has(Mode::UpperAsymptotic) => UpperMode::ASYMPTOTIC,
        None => UpperMode::Exact,
    }
}

pub fn run_bounds(cfg: &SweepConfig, mode: UpperMode) -> Result<(Vec<String>, Vec<BoundRow>)> {
    cfg.validate()?;
    let reports = sweep(&cfg.params, cfg.epsilon, cfg.delta, &cfg.d_grid, mode)?;
    let rows = reports.iter().map(|r| BoundRow::from_report(r, &cfg.modes)).collect();
    let mut comments = vec![
        "units: nats; delta in nats per channel use; rates in source symbols per channel use".to_string(),
        param_comment(cfg),
    ];
    comments.push(match mode {
        UpperMode::Exact => "upper bound: exact converse".to_string(),
        UpperMode::AsymptoticF1 { o_coefficient } => {
            format!("upper bound: asymptotic F1 with O(sqrt x) coefficient {o_coefficient} (approximate)")
        }
    });
    Ok((comments, rows))
}

pub fn run_simulate(
    cfg: &SweepConfig,
    variant: SchemeVariant,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<(Vec<String>, Vec<SimulateRow>)> {
    cfg.validate()?;
    let reports = monte_carlo_excess_profile(variant, &cfg.params, n, &cfg.d_grid, trials, seed)?;
    let rows = cfg
        .d_grid
        .iter()
        .zip(&reports)
        .map(|(&d, r)| {
            let exact = exact_excess_probability(variant, &cfg.params, n, d)?.value();
            Ok(SimulateRow::new(variant, n, d, r, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let comments = vec![
        "excess-distortion probability P[(S - S_hat_N)^2 >= d]; ci_halfwidth is 3 sigma".to_string(),
        param_comment(cfg),
    ];
    Ok((comments, rows))
}

/// Margins are asserted for the modified scheme only.
pub fn run_leakage(
    cfg: &SweepConfig,
    variant: SchemeVariant,
    n_max: usize,
) -> Result<(Vec<String>, Vec<LeakageRow>, Vec<usize>)> {
    cfg.validate()?;
    let profile = leakage_profile(variant, &cfg.params, n_max)?;
    let violations = match variant {
        SchemeVariant::Modified => profile.violations(1e-10),
        SchemeVariant::Classic => Vec::new(),
    };
    let comments = vec![
        format!("variant={variant}; leakage in nats per channel use"),
        param_comment(cfg),
        format!("joint covariance condition estimate {}", report::num(profile.condition)),
        match variant {
            SchemeVariant::Modified => "margin = f2_bound - exact_leakage, asserted >= 0".to_string(),
            SchemeVariant::Classic => "margin = f2_bound - exact_leakage, informational".to_string(),
        },
    ];
    Ok((comments, report::leakage_rows(&profile), violations))
}

pub fn run_verify(
    cfg: &SweepConfig,
    suites: &[Suite],
    trials: Option<u64>,
    seed: u64,
) -> Result<(Vec<String>, Vec<CheckLine>)> {
    cfg.validate()?;
    let settings = VerifySettings {
        p_prime: cfg.params.power / (1.0 - cfg.epsilon),
        sigma_eta2: cfg.params.sigma_eta2,
        trials,
        seed,
    };
    let mut lines = Vec::new();
    for (i, &s) in suites.iter().enumerate() {
        let seeded = VerifySettings {
            seed: seed.wrapping_add(1000 * i as u64),
            ..settings
        };
        lines.extend(run_suite(s, &seeded)?);
    }
    let comments = vec![
        format!("P'={} sigma_eta2={} seed={seed}", report::num(settings.p_prime), settings.sigma_eta2),
    ];
    Ok((comments, lines))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Bounds { common, mode } => {
            let mut cfg = load_config(&common)?;
            let upper = upper_mode(&cfg, mode);
            let requested = match upper {
                UpperMode::Exact => Mode::UpperExact,
                UpperMode::AsymptoticF1 { .. } => Mode::UpperAsymptotic,
            };
            if mode.is_some() && !cfg.has(requested) {
                cfg.modes.push(requested);
            }
            let (comments, rows) = run_bounds(&cfg, upper)?;
            report::write_bounds(sink(&cfg)?, &comments, &rows)
        }
        Command::Simulate {
            common,
            variant,
            n,
            trials,
        } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let seed = resolve_seed(&cfg);
            let (mut comments, rows) = run_simulate(&cfg, variant.into(), n, trials, seed)?;
            comments.push(format!("seed={seed}"));
            report::write_simulate(sink(&cfg)?, &comments, &rows)
        }
        Command::Leakage {
            common,
            variant,
            nmax,
        } => {
            let cfg = load_config(&common)?;
            let (comments, rows, violations) = run_leakage(&cfg, variant.into(), nmax)?;
            report::write_leakage(sink(&cfg)?, &comments, &rows)?;
            if violations.is_empty() {
                Ok(())
            } else {
                Err(Error::Assertion(format!("exact leakage exceeds the bound at N = {violations:?}")))
            }
        }
        Command::Verify {
            common,
            suite,
            trials,
        } => {
            let cfg = load_config(&common)?;
            let suites = match suite {
                Some(s) => vec![s.parse::<Suite>()?],
                None => Suite::ALL.to_vec(),
            };
            cfg.validate()?;
            let seed = resolve_seed(&cfg);
            let (comments, lines) = run_verify(&cfg, &suites, trials, seed)?;
            report::write_checks(sink(&cfg)?, &comments, &lines)?;
            let failed: Vec<&str> = lines.iter().filter(|l| !l.passed()).map(|l| l.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Error::Assertion(format!("failed checks: {}", failed.join(", "))))
            }
        }
    }
}

fn threads(command: &Command) -> Option<usize> {
    match command {
        Command::Bounds { common, .. }
        | Command::Simulate { common, .. }
        | Command::Leakage { common, .. }
        | Command::Verify { common, .. } => common.threads,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match threads(&cli.command) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config {
                    line: None,
                    message: format!("cannot build a pool of {n} threads: {e}"),
                })?;
            pool.install(|| execute(cli.command))
        }
        None => execute(cli.command),
    }
}
