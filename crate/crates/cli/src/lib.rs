//! Command-line front end: synthetic data generation, localization,
//! evaluation, template encoding and matching, and the loss gradient check.
//!
//! Every subcommand is also callable in-process through [`run`], which
//! returns the process exit code.

pub mod commands;
pub mod manifest;

use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};
use irisparse::formats::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "irisparse", version, about = "Iris localization and recognition pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for batch commands (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic eyes with annotations and corrupted probability maps.
    Synth(commands::synth::SynthArgs),
    /// Localize iris circles from probability maps.
    Localize(commands::localize::LocalizeArgs),
    /// Score localization results against annotations.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Normalize and encode iris templates.
    Encode(commands::recognize::EncodeArgs),
    /// Build the all-pairs comparison list for a template directory.
    Pairs(commands::recognize::PairsArgs),
    /// Match template pairs.
    Match(commands::recognize::MatchArgs),
    /// Report EER and decidability for a scores file.
    Verify(commands::recognize::VerifyArgs),
    /// Compare analytic loss gradients with finite differences.
    Gradcheck(commands::gradcheck::GradcheckArgs),
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: PipelineConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Context {
    pub fn from_args(g: &GlobalArgs) -> Result<Self> {
        let config = match &g.config {
            Some(p) => PipelineConfig::read(p).with_context(|| format!("reading config {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        Ok(Self { config, seed: g.seed, out: g.out.clone() })
    }

    pub fn out_dir(&self) -> Result<&PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let ctx = Context::from_args(&cli.global)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build()?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => commands::synth::run(&ctx, a),
        Command::Localize(a) => commands::localize::run(&ctx, a),
        Command::Evaluate(a) => commands::evaluate::run(&ctx, a),
        Command::Encode(a) => commands::recognize::encode(&ctx, a),
        Command::Pairs(a) => commands::recognize::pairs(&ctx, a),
        Command::Match(a) => commands::recognize::match_pairs(&ctx, a),
        Command::Verify(a) => commands::recognize::verify(&ctx, a),
        Command::Gradcheck(a) => commands::gradcheck::run(&ctx, a),
    })
}

/// Parses `args` (program name first) and runs them.
pub fn run_args<I, T>(args: I) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?)
}
