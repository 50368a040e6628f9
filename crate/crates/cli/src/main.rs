use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use icterm::{
    analyze, corpus, parse_strategy, prove, trace, tree, AnalyzeOptions, CliError, ProveOptions,
};
use icterm_core::corpus::RunConfig;
use icterm_core::engine::Budget;
use icterm_core::ictree::DEFAULT_NODE_BUDGET;

#[derive(Parser)]
#[command(
    name = "icterm",
    version,
    about = "Input-consuming derivations and termination of moded logic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Modedness, dependency classes and quasi-recurrency of a program.
    Analyze {
        file: PathBuf,
        /// Also search body permutations.
        #[arg(long)]
        permute: bool,
        /// Infer a level mapping even if one is declared.
        #[arg(long)]
        infer: bool,
        #[arg(long)]
        timings: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a query with input-consuming steps.
    Trace {
        file: PathBuf,
        query: String,
        /// `leftmost` or `script:ATOM:CLAUSE,...` (e.g. script:1:c2,1:c1).
        #[arg(long, default_value = "leftmost")]
        strategy: String,
        #[arg(long, env = "ICTERM_BUDGET", default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 10_000)]
        max_backtracks: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Build the IC-tree of a query.
    Tree {
        file: PathBuf,
        query: String,
        #[arg(long, env = "ICTERM_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        /// Print the tree as JSON.
        #[arg(long)]
        dump: bool,
    },
    /// Check the hypotheses of the input-termination theorem.
    Prove {
        file: PathBuf,
        /// `builtins`, `empty`, or a program file the program is built on.
        #[arg(long)]
        base: Option<String>,
        /// Take a program base to be input terminating.
        #[arg(long)]
        assume_base: bool,
        #[arg(long)]
        infer: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check the bundled programs (or a JSON manifest) against expectations.
    Corpus {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, env = "ICTERM_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn emit<T: serde::Serialize>(format: Format, report: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("reports serialize")
        ),
        Format::Text => print!("{}", text()),
    }
}

fn main_result(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Analyze {
            file,
            permute,
            infer,
            timings,
            format,
        } => {
            let r = analyze(
                &file,
                AnalyzeOptions {
                    permute,
                    infer,
                    timings,
                },
            )?;
            emit(format, &r, || r.render());
            Ok(true)
        }
        Command::Trace {
            file,
            query,
            strategy,
            max_steps,
            max_backtracks,
            format,
        } => {
            let strategy = parse_strategy(&strategy)?;
            let r = trace(
                &file,
                &query,
                &strategy,
                Budget {
                    max_steps,
                    max_backtracks,
                },
            )?;
            emit(format, &r, || r.render());
            Ok(true)
        }
        Command::Tree {
            file,
            query,
            budget,
            dump,
        } => {
            let t = tree(&file, &query, budget)?;
            let format = if dump { Format::Json } else { Format::Text };
            emit(format, &t.dump, || t.text.clone());
            Ok(true)
        }
        Command::Prove {
            file,
            base,
            assume_base,
            infer,
            format,
        } => {
            let r = prove(
                &file,
                &ProveOptions {
                    base,
                    assume_base,
                    infer,
                },
            )?;
            emit(format, &r, || r.render());
            Ok(r.proven)
        }
        Command::Corpus {
            filter,
            manifest,
            budget,
            format,
        } => {
            let config = RunConfig {
                node_budget: budget,
                ..RunConfig::default()
            };
            let r = corpus(manifest.as_deref(), filter.as_deref(), &config)?;
            emit(format, &r, || r.render());
            Ok(r.failed == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_result(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("icterm: {e}");
            ExitCode::from(2)
        }
    }
}
