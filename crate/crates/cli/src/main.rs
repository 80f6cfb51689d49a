use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdel_cli::{
    cmd_check, cmd_construct, cmd_rate_table, cmd_search, cmd_simulate, cmd_vt, CliError,
    SimulateMode, EXIT_IO,
};

/// Quantum single-deletion codes: construct, check and simulate.
#[derive(Parser)]
#[command(name = "qdel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Varshamov-Tenengolts code VT_n(a).
    Vt {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check partition, homogeneity and the three conditions of a family file.
    Check { file: PathBuf },
    /// Build the high-rate partition for (E, N).
    Construct {
        #[arg(long = "E")]
        e: u32,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify encode, delete and decode for every deletion position.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SimulateMode::Exhaustive)]
        mode: SimulateMode,
        /// Write the TSV report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate high-rate parameters against a target rate.
    RateTable {
        #[arg(long = "R")]
        r: String,
    },
    /// Search a small code for homogeneous partitions.
    Search {
        /// "vt N A", "highrate E N" or "file PATH".
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 12)]
        max_cells: usize,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QDEL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("QDEL_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_IO as u8);
    }
    let result = match cli.command {
        Command::Vt { n, a, out } => cmd_vt(n, a, out.as_deref()),
        Command::Check { file } => cmd_check(&file),
        Command::Construct { e, n, out } => cmd_construct(e, n, &out),
        Command::Simulate {
            file,
            trials,
            seed,
            mode,
            out,
        } => cmd_simulate(&file, trials, seed, mode, out.as_deref()),
        Command::RateTable { r } => cmd_rate_table(&r),
        Command::Search { source, max_cells } => cmd_search(&source, max_cells),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
