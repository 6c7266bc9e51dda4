//! `eraser`: phase sweeps, intensity-product correlations, closed-form
//! verification, photon-counting runs and figure data for the quantum-eraser
//! superresolution bench.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "eraser", version, about = "Quantum-eraser intensity-product simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Projection phases pi + 2 pi k / N, independent of the config's blocks.
    Canonical,
    /// The first N ports of the config, with its retarder phases as written.
    Literal,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Canonical => "canonical",
            Mode::Literal => "literal",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-port intensity over one phase period.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config's grid.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Nth-order intensity product with fringe metrics.
    Correlate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Mode::Canonical)]
        mode: Mode,
        #[arg(long)]
        grid: Option<usize>,
        /// Fringe threshold as a fraction of the trace maximum.
        #[arg(long, default_value_t = eraser_core::fringe::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Canonical product against sin^2(N phi / 2) for each order.
    Verify {
        /// Orders to check, e.g. `--order 1,2,4,8`.
        #[arg(long = "order", value_delimiter = ',')]
        orders: Vec<usize>,
        /// Grid size; defaults to max(8192, 64 N) per order.
        #[arg(long)]
        grid: Option<usize>,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Poisson photon-counting estimate of an Nth-order product.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        exposure: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Canonical)]
        mode: Mode,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Data series behind figure 2, 3 or 4.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=4))]
        which: u8,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { config, out, grid } => commands::sweep(&config, &out, grid),
        Command::Correlate { config, order, mode, grid, threshold, out } => {
            commands::correlate(&config, order, mode, grid, threshold, &out)
        }
        Command::Verify { orders, grid, out } => commands::verify(&orders, grid, out.as_deref()),
        Command::Montecarlo { config, order, exposure, seed, mode, grid, out } => {
            commands::montecarlo(&config, order, exposure, seed, mode, grid, &out)
        }
        Command::Figure { which, out } => commands::figure(which, &out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
