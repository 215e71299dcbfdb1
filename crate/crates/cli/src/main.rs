// SPDX-License-Identifier: Apache-2.0

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "hyperflow", version, about = "Hyperflow graphs and information flow coverage for RTL designs")]
struct Cli {
    /// Let clock-sensitivity edges take part in path searches and exports.
    #[arg(long, global = true)]
    include_clocked: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DesignArgs {
    /// RTL source files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Top module name.
    #[arg(long)]
    top: String,
}

#[derive(Subcommand)]
enum Command {
    /// Build the hyperflow graph of a design.
    Build {
        #[command(flatten)]
        design: DesignArgs,
        /// Output graph file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate with taint tracking; writes a functional VCD and one taint
    /// VCD per generated property.
    Simulate {
        #[command(flatten)]
        design: DesignArgs,
        /// Asset configuration (TOML).
        #[arg(long)]
        assets: PathBuf,
        /// Stimulus file.
        #[arg(long)]
        stimulus: PathBuf,
        /// Directory for the VCD files.
        #[arg(long)]
        out_dir: PathBuf,
        /// Only taint bits where a tainted select can change the result.
        #[arg(long)]
        precise: bool,
    },
    /// Attach trace data to a graph file.
    Annotate {
        graph: PathBuf,
        #[arg(long)]
        func: PathBuf,
        #[arg(long)]
        taint: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compute coverage metrics for an asset against targets.
    Report {
        graph: PathBuf,
        #[arg(long)]
        asset: String,
        /// Comma-separated target signals.
        #[arg(long, value_delimiter = ',', conflicts_with = "all_outputs", required_unless_present = "all_outputs")]
        targets: Vec<String>,
        /// Use every top-level output as a target.
        #[arg(long)]
        all_outputs: bool,
        /// Window fractions in percent, comma-separated.
        #[arg(long, value_delimiter = ',', value_parser = percent, default_values_t = vec![25.0, 50.0, 75.0, 100.0])]
        windows: Vec<f64>,
        /// Time step for the shortest path metric (last step by default).
        #[arg(long)]
        spm_time: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        max_paths: usize,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render a graph for visualization.
    Export {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[arg(long, conflicts_with = "implicit_only")]
        explicit_only: bool,
        #[arg(long)]
        implicit_only: bool,
        /// Keep only paths from the first to the second signal.
        #[arg(long, num_args = 2, value_names = ["FROM", "TO"])]
        path: Option<Vec<String>>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Elements,
}

fn percent(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v <= 100.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 100]"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
