use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use overload::pipeline::{
    cmd_analyze, cmd_describe, cmd_export_graph, cmd_simulate, cmd_validate, Format, Overrides,
    RunConfig, EXIT_IO,
};

#[derive(Parser)]
#[command(
    name = "overload",
    version,
    about = "Load, homophily instruments and IV ordered-logit models for advice networks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    employees: Option<PathBuf>,
    #[arg(long, global = true)]
    citations: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the input tables and write a validation report.
    Validate,
    /// Write descriptive tables and network summaries.
    Describe,
    /// Run the full pipeline and write the report bundle.
    Analyze,
    /// Generate a synthetic organization and run the endogeneity study.
    Simulate {
        /// Monte Carlo replications; 0 writes the tables only.
        #[arg(long)]
        replications: Option<usize>,
        /// Emit the pinned survey-scale fixture instead of the configured scenario.
        #[arg(long)]
        survey: bool,
    },
    /// Write the citation network as GraphML and the instrument as CSV.
    ExportGraph,
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with I/O failures; 2 means invalid data.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_IO)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let g = cli.global;
    let mut config = match &g.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_IO);
            }
        },
        None => RunConfig::default(),
    };
    let replications = match &cli.command {
        Command::Simulate {
            replications,
            survey,
        } => {
            config.simulation.survey |= *survey;
            *replications
        }
        _ => None,
    };
    config.apply(&Overrides {
        seed: g.seed,
        out_dir: g.out_dir,
        format: g.format,
        employees: g.employees,
        citations: g.citations,
        replications,
    });
    let outcome = match cli.command {
        Command::Validate => cmd_validate(&config),
        Command::Describe => cmd_describe(&config),
        Command::Analyze => cmd_analyze(&config),
        Command::Simulate { .. } => cmd_simulate(&config),
        Command::ExportGraph => cmd_export_graph(&config),
    };
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr.trim_end());
    }
    ExitCode::from(outcome.code)
}
