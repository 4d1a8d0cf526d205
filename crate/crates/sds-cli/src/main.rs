use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sds_cli::{cmd_cosine, cmd_init_compare, cmd_run, cmd_sweep_c, OutputFormat};

/// Direct search experiment runner: solve, measure direction-set geometry,
/// and verify evaluation-count guarantees against recorded runs.
#[derive(Parser)]
#[command(name = "sds", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for output files (trace, report, tables).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Which trace formats to write.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Both)]
    format: FormatArg,

    /// Seed for sampled computations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Both => OutputFormat::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config: initialize, solve, verify, write outputs.
    Run { config: PathBuf },
    /// Report the exact and sampled cosine measure of a direction set.
    Cosine {
        /// Direction-set JSON file ({"dimension": n, "directions": [...]}).
        #[arg(long, conflicts_with = "mpb")]
        file: Option<PathBuf>,
        /// Use the maximal positive basis of this dimension.
        #[arg(long)]
        mpb: Option<usize>,
        /// Number of sampled unit vectors.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Sweep the forcing constant over a grid, comparing the theoretical
    /// dominant bound term with observed evaluation counts.
    SweepC {
        config: PathBuf,
        /// Comma-separated forcing constants, e.g. 0.25,0.5,1,2.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
    /// Run all three initialization strategies on the same starting data.
    InitCompare { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config, cli.out_dir.as_deref(), cli.format.into()),
        Command::Cosine { file, mpb, samples } => {
            cmd_cosine(file.as_deref(), *mpb, *samples, cli.seed)
        }
        Command::SweepC { config, grid } => {
            cmd_sweep_c(config, grid, cli.out_dir.as_deref())
        }
        Command::InitCompare { config } => cmd_init_compare(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
