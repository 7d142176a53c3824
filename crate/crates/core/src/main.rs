use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tegi::cli::{self, RunConfig};

#[derive(Parser)]
#[command(name = "tegi", version, about = "Tensor index-notation language interpreter")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a script and print every non-definition result.
    Run {
        file: PathBuf,
        /// Print the program after desugaring instead of running it.
        #[arg(long)]
        dump_desugared: bool,
        /// Bind a symbol to a float and print results numerically.
        #[arg(long = "bind", value_name = "SYM=FLOAT", value_parser = cli::parse_binding)]
        bindings: Vec<(String, f64)>,
        /// Digits after the decimal point in numeric output.
        #[arg(long, default_value_t = 12)]
        precision: usize,
    },
    /// Interactive session.
    Repl,
    /// Check `;=>` annotations of every .tegi file in a directory.
    Check { dir: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match args.command {
        Command::Run {
            file,
            dump_desugared,
            bindings,
            precision,
        } => {
            let config = RunConfig {
                dump_desugared,
                bindings: bindings.into_iter().collect(),
                precision,
            };
            cli::run_script(&file, &config, &mut io::stdout(), &mut io::stderr())
        }
        Command::Repl => cli::run_repl(&mut io::stdin().lock(), &mut io::stdout(), &RunConfig::default()),
        Command::Check { dir } => cli::check_corpus(&dir, &mut io::stdout(), &mut io::stderr()),
    };
    ExitCode::from(code as u8)
}
