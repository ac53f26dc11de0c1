//! crashbench: benchmark-adjusted crashed-vehicle rate comparisons.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crashbench_cli::config::StudyConfig;
use crashbench_cli::stages::{self, names};
use crashbench_cli::CliError;

#[derive(Parser)]
#[command(
    name = "crashbench",
    version,
    about = "Crashed-vehicle rate benchmarking pipeline",
    after_help = "Logs go to stderr (level via CRASHBENCH_LOG); data goes to files only."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Study configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts and the run manifest.
    #[arg(long)]
    out: PathBuf,
    /// Significance level for confidence intervals.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Override the underreporting-correction switch.
    #[arg(long, value_parser = ["on", "off"])]
    underreporting: Option<String>,
    /// Override the dynamic spatial-adjustment switch.
    #[arg(long, value_parser = ["on", "off"])]
    dynamic: Option<String>,
    /// Output format for report tables.
    #[arg(long, default_value = "csv", value_parser = ["csv", "md"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Parse configured source files into canonical records.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify canonical records (crash type, outcomes, movement).
    Classify {
        /// Canonical record CSVs from the ingest stage.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build adjusted human benchmark rates.
    Benchmark {
        #[command(flatten)]
        common: CommonArgs,
        /// Classified human corpus and canonical exposure CSV.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Compare the fleet corpus against the benchmark set.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Classified fleet corpus and benchmarks CSV.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Emit comparison tables, event counts, and the sensitivity grid.
    ///
    /// When two classified corpora are given, the first is the fleet corpus
    /// and the second the human corpus.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Comparisons CSV, fleet classified, human classified, exposure.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Run every stage on the configured inputs.
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic corpus with known ground truth.
    Simulate {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn apply_overrides(config: &mut StudyConfig, common: &CommonArgs) {
    config.alpha = common.alpha;
    if let Some(flag) = &common.underreporting {
        config.benchmark.underreporting = flag == "on";
    }
    if let Some(flag) = &common.dynamic {
        config.benchmark.dynamic = flag == "on";
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { common } => {
            let mut config = StudyConfig::load(&common.config)?;
            apply_overrides(&mut config, &common);
            stages::run_ingest(&config, &common.out)
        }
        Command::Classify { input, out } => stages::run_classify(&input, &out),
        Command::Benchmark { common, input } => {
            let mut config = StudyConfig::load(&common.config)?;
            apply_overrides(&mut config, &common);
            let sorted = stages::sort_inputs(&input)?;
            let human = sorted.classified.first().ok_or_else(|| {
                CliError::DataGap("benchmark needs a classified human corpus".to_string())
            })?;
            let exposure = sorted.exposure.first().ok_or_else(|| {
                CliError::DataGap("benchmark needs a canonical exposure CSV".to_string())
            })?;
            stages::run_benchmark(&config, human, exposure, &common.out)
        }
        Command::Compare { common, input } => {
            let mut config = StudyConfig::load(&common.config)?;
            apply_overrides(&mut config, &common);
            let sorted = stages::sort_inputs(&input)?;
            let ads = sorted.classified.first().ok_or_else(|| {
                CliError::DataGap("compare needs a classified fleet corpus".to_string())
            })?;
            let benchmarks = sorted.benchmarks.first().ok_or_else(|| {
                CliError::DataGap(format!(
                    "compare needs '{}' from the benchmark stage",
                    names::BENCHMARKS
                ))
            })?;
            stages::run_compare(&config, ads, benchmarks, &common.out)
        }
        Command::Report { common, input } => {
            let mut config = StudyConfig::load(&common.config)?;
            apply_overrides(&mut config, &common);
            let sorted = stages::sort_inputs(&input)?;
            let comparisons = sorted.comparisons.first().ok_or_else(|| {
                CliError::DataGap("report needs the comparisons CSV".to_string())
            })?;
            let [ads, human] = sorted.classified.as_slice() else {
                return Err(CliError::DataGap(
                    "report needs two classified corpora: fleet first, human second"
                        .to_string(),
                ));
            };
            let exposure = sorted.exposure.first().ok_or_else(|| {
                CliError::DataGap("report needs the canonical exposure CSV".to_string())
            })?;
            stages::run_report(
                &config,
                comparisons,
                ads,
                human,
                exposure,
                &common.out,
                common.format == "md",
            )
        }
        Command::Pipeline { common } => {
            let mut config = StudyConfig::load(&common.config)?;
            apply_overrides(&mut config, &common);
            stages::run_pipeline(&config, &common.out, common.format == "md")
        }
        Command::Simulate { config, out, seed } => stages::run_simulate(&config, seed, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter("CRASHBENCH_LOG")
            .default_filter_or("warn"),
    )
    .target(env_logger::Target::Stderr)
    .init();

    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error[{}]: {error}", error.class().as_str());
            ExitCode::from(error.class().exit_code() as u8)
        }
    }
}
