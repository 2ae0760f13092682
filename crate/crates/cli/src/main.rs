mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use derandom_core::io::{load_json, ExperimentConfig};

/// Exact adversarial-risk experiments on finite metric spaces.
///
/// Inputs are JSON, tables are CSV. Exit codes: 0 success, 1 invalid input or
/// cap exceeded, 2 a known reference value did not match, 3 a checked
/// property was violated.
#[derive(Debug, Parser)]
#[command(name = "derandom", version)]
struct Cli {
    /// Experiment configuration (JSON). Paths inside are relative to its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of random instances for `verify`.
    #[arg(long, global = true)]
    instances: Option<usize>,
    /// Attack radius; overrides the config and the instance file.
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Adversarial and natural risk of a classifier.
    Risk,
    /// Level-set risk profile of a classifier and the integral identity.
    Derandomize,
    /// Threshold-ensemble decomposition of a mixture's risk.
    MixtureDecompose,
    /// Noise injection against its smoothed thresholds over all α.
    SmoothingCompare,
    /// Exact (or, past the size cap, iterative) solution of a matrix game.
    Game,
    /// VC, dual VC, Sauer and Rademacher checks for a classifier family.
    Complexity,
    /// Worked examples with known values.
    PaperExamples,
    /// Exact identities and inequalities over seeded random instances.
    Verify,
}

/// Config merged with command-line overrides; paths resolved.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub config: ExperimentConfig,
    pub base: PathBuf,
    pub out: Option<PathBuf>,
}

impl Settings {
    fn load(cli: &Cli) -> Result<Self> {
        let (mut config, base) = match &cli.config {
            Some(path) => {
                let config: ExperimentConfig = load_json(path).with_context(|| format!("loading config {}", path.display()))?;
                (config, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (ExperimentConfig::default(), PathBuf::new()),
        };
        if cli.seed.is_some() {
            config.seed = cli.seed;
        }
        if cli.instances.is_some() {
            config.instances = cli.instances;
        }
        if cli.eps.is_some() {
            config.eps = cli.eps;
        }
        let out = cli.out.clone().or_else(|| config.out.as_ref().map(|p| base.join(p)));
        Ok(Settings { config, base, out })
    }

    /// Resolve an input path named in the config.
    pub fn input(&self, field: &str, value: &Option<String>) -> Result<PathBuf> {
        let rel = value.as_ref().with_context(|| format!("config field \"{field}\" is required for this command"))?;
        Ok(self.base.join(rel))
    }

    pub fn seed(&self) -> Result<u64> {
        self.config.seed.context("a seed is required (--seed or \"seed\" in the config)")
    }
}

/// Non-error outcomes with their exit codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ReferenceMismatch(String),
    PropertyViolation(String),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = Settings::load(&cli).and_then(|s| commands::run(cli.command, &s));
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ReferenceMismatch(msg)) => {
            eprintln!("reference value mismatch: {msg}");
            ExitCode::from(2)
        }
        Ok(Outcome::PropertyViolation(msg)) => {
            eprintln!("property violated: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
