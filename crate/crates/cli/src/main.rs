use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use patrolscope_cli::commands::{self, Output};
use patrolscope_cli::{server, Failure, EXIT_IO};
use patrolscope_core::aggregation::AggregationRule;
use patrolscope_core::layout::LayoutParams;
use patrolscope_core::simulation::{DEFAULT_AGENTS, DEFAULT_HORIZON};
use serde_json::json;

/// Analyse randomized patrol strategies.
///
/// Exit status: 0 success, 1 I/O error, 2 invalid strategy, 3 analysis failure.
/// Diagnostics are written to stderr as JSON lines.
#[derive(Parser)]
#[command(name = "patrolscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Sum,
    Max,
    Average,
}

impl From<Rule> for AggregationRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Sum => AggregationRule::Sum,
            Rule::Max => AggregationRule::Max,
            Rule::Average => AggregationRule::Average,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a strategy file.
    Validate { file: PathBuf },
    /// Full analysis report.
    Analyze {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Adds a seeded agent-ensemble check to the report.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate an ensemble of patrols and print per-step occupancy.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = DEFAULT_AGENTS)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        /// Drawn at random and echoed in the output when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Edge thresholds at which elements stop lying on a loop.
    Sweep {
        file: PathBuf,
        /// Aggregate to locations instead of listing memory nodes.
        #[arg(long)]
        locations: bool,
        #[arg(long, value_enum, default_value_t = Rule::Average)]
        rule: Rule,
    },
    /// Force-directed positions for locations and memory nodes.
    Layout {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Location to draw open; repeatable.
        #[arg(long = "open")]
        open: Vec<String>,
        #[arg(long)]
        open_all: bool,
    },
    /// Graphviz description of the memory-node graph.
    ExportDot { file: PathBuf },
    /// Build a strategy file from a CSV transition matrix and a node-to-location map.
    Import {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        locations: PathBuf,
        #[arg(long, default_value = "imported")]
        name: String,
    },
    /// Print a built-in example strategy.
    Generate {
        #[arg(value_parser = commands::GENERATORS)]
        kind: String,
        /// Interior length for `corridor`.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Corridor with memory nodes.
        #[arg(long)]
        memory: bool,
    },
    /// Run the local session service.
    Serve {
        #[arg(long, env = "PATROLSCOPE_PORT", default_value_t = server::DEFAULT_PORT)]
        port: u16,
    },
}

fn run(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Validate { file } => commands::validate(&file),
        Command::Analyze { file, report, seed } => {
            commands::analyze_cmd(&file, seed, report.as_deref())
        }
        Command::Simulate {
            file,
            start,
            count,
            horizon,
            seed,
        } => {
            let seed = seed.unwrap_or_else(rand::random);
            commands::simulate(&file, &start, count, horizon, seed)
        }
        Command::Sweep {
            file,
            locations,
            rule,
        } => commands::sweep(&file, locations, rule.into()),
        Command::Layout {
            file,
            seed,
            max_iter,
            tolerance,
            open,
            open_all,
        } => {
            let params = LayoutParams {
                seed,
                ..Default::default()
            };
            commands::layout(&file, params, &open, open_all, tolerance, max_iter)
        }
        Command::ExportDot { file } => commands::export_dot(&file),
        Command::Import {
            matrix,
            locations,
            name,
        } => commands::import(&matrix, &locations, &name),
        Command::Generate { kind, n, memory } => commands::generate(&kind, n, memory),
        Command::Serve { .. } => unreachable!("handled in main"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { port } = cli.command {
        let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match runtime.block_on(server::serve(port)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{}", json!({ "level": "error", "code": "Io", "message": e.to_string() }));
                ExitCode::from(EXIT_IO as u8)
            }
        };
    }
    match run(cli.command) {
        Ok(out) => {
            for d in &out.diagnostics {
                eprintln!("{d}");
            }
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.diagnostic());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
