use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, Command, Settings};
use crate::runner::{execute, export_tree};
use crate::Result;

#[derive(Debug, Parser)]
#[command(
    name = "optree",
    version,
    about = "Regularized decision trees by tree search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Repeated runs on the XOR stream.
    Synth(RunArgs),
    /// Fit on a CSV dataset, optionally scoring a held-out CSV.
    Fit(RunArgs),
    /// k-fold cross-validation over a lambda grid.
    Crossval(RunArgs),
    /// Render a saved JSON tree as text and DOT.
    ExportTree(ExportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Tree JSON written by a run.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line and returns the lines to print.
pub fn run(cli: Cli) -> Result<Vec<String>> {
    let (command, args) = match cli.command {
        Cmd::Synth(a) => (Command::Synth, a),
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Crossval(a) => (Command::Crossval, a),
        Cmd::ExportTree(a) => {
            let (txt, dot) = export_tree(&a.input, a.out.as_deref())?;
            return Ok(vec![
                format!("wrote {}", txt.display()),
                format!("wrote {}", dot.display()),
            ]);
        }
    };
    let spec = load_config(command, args.config.as_deref(), args.settings)?;
    execute(&spec)
}
