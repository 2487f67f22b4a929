use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hemascreen::{commands, CohortChoice, Error, RunConfig};

/// SARS-CoV-2 screening from full blood counts.
///
/// Exit codes: 0 success, 1 output failure, 2 input or configuration error,
/// 3 statistics error, 4 modeling error.
#[derive(Debug, Parser)]
#[command(name = "hemascreen", version)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Source CSV.
    #[arg(long, global = true, env = "HEMASCREEN_DATA")]
    data: Option<PathBuf>,
    /// Column mapping JSON (detected from the header when omitted).
    #[arg(long, global = true)]
    mapping: Option<PathBuf>,
    /// community, regular-ward or all-modeled.
    #[arg(long, global = true)]
    cohort: Option<CohortChoice>,
    /// Comma-separated: ann, rf, glmnet, lr-ml, lr-mle, lr-mlep.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    repeats: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Balance every training fold with SMOTE.
    #[arg(long, global = true)]
    smote: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_plots: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the source CSV, write canonical cohort files and an ingestion report.
    Ingest,
    /// Per-location class counts and pathogen tabulation.
    Summary,
    /// Rank-sum screen of every blood count, positive vs negative, with box plots.
    Stats,
    /// Cross-validated evaluation of the requested models.
    Evaluate,
    /// Held-out variable importance (rf and glmnet).
    Importance,
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.data.is_some() {
        cfg.data = cli.data.clone();
    }
    if cli.mapping.is_some() {
        cfg.mapping = cli.mapping.clone();
    }
    if cli.cohort.is_some() {
        cfg.cohort = cli.cohort;
    }
    if let Some(m) = &cli.models {
        cfg.models = m.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(k) = cli.folds {
        cfg.folds = k;
    }
    if let Some(r) = cli.repeats {
        cfg.repeats = r;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.smote {
        cfg.smote = true;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if cli.no_plots {
        cfg.plots = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| match cli.command {
        Command::Ingest => commands::ingest(&cfg),
        Command::Summary => commands::summary(&cfg),
        Command::Stats => commands::stats(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::Importance => commands::importance(&cfg),
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
