use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

#[derive(Debug, Parser)]
#[command(name = "gafzeros", version, about = "Zeros of Gaussian analytic functions: sampling, intensities, deviation bounds, kernel rigidity")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Master seed; trial `t` draws from stream `t` of this seed.
    #[arg(long, global = true, env = "GAFZEROS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write (x, y) series next to the report.
    #[arg(long, global = true)]
    pub emit_plot_data: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw coefficient vectors.
    Sample(commands::SampleArgs),
    /// Locate the zeros of one sample in a region (CSV).
    Zeros(commands::ZerosArgs),
    /// Density grid (CSV) or expected zero count in a region.
    Intensity(commands::IntensityArgs),
    /// Tail of a smoothed zero count against the exponential bound.
    Tail(commands::TailArgs),
    /// Probability of a zero-free disk against the optimized bound.
    Hole(commands::HoleArgs),
    /// Log-integral inequality for one complex Gaussian.
    Lemma(commands::LemmaArgs),
    /// Compare two kernels and recover `g` and `U`.
    Rigidity(commands::RigidityArgs),
    /// Monte Carlo check of the log-concave polynomial inequality.
    PolyLemma(commands::PolyLemmaArgs),
}

/// Exit statuses.
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VIOLATED: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
