use clap::{Parser, Subcommand};

use lakeice_cli::{commands, CliError, ConfigFlags, PipelineConfig};

#[derive(Parser)]
#[command(name = "lakeice", version, about = "Lake ice phenology from satellite pixel time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: ConfigFlags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Train the frozen / non-frozen classifier on labelled samples.
    Train,
    /// Predict every sample with a trained model.
    Classify,
    /// Build raw and smoothed non-frozen timelines from predictions.
    Timeline,
    /// Fit freeze-up and break-up dates per lake-winter.
    Phenology,
    /// Linear trends of the event dates across winters.
    Trends,
    /// Correlate events with station climate indicators.
    Correlate,
    /// Mean absolute difference between two timeline sets.
    Compare,
    /// Write a synthetic dataset with known truth.
    Simulate,
    /// Summary table and one plot per lake-winter.
    Report,
}

fn run(cli: &Cli) -> Result<std::path::PathBuf, CliError> {
    let cfg = PipelineConfig::load(&cli.flags)?;
    match cli.command {
        Command::Train => commands::train(&cfg),
        Command::Classify => commands::classify(&cfg),
        Command::Timeline => commands::timeline(&cfg),
        Command::Phenology => commands::phenology(&cfg),
        Command::Trends => commands::trends(&cfg),
        Command::Correlate => commands::correlate(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Report => commands::report(&cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => eprintln!("wrote {}", manifest.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
