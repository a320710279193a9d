mod cmd;
mod opts;

use clap::Parser;
use opts::{Cli, Command};

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Benchmarks { action } => cmd::reg::benchmarks(&cli.registry, action),
        Command::Runtimes { action } => cmd::reg::runtimes(&cli.registry, action),
        Command::Run(args) => cmd::run::run(&cli.registry, &cli.output_dir, args),
        Command::Check(args) => cmd::check::check(&cli.registry, args),
        Command::Export(args) => cmd::eval::export(args),
        Command::Plot(args) => cmd::eval::plot(&cli.output_dir, args),
        Command::Analyze(args) => cmd::eval::analyze(args),
        Command::Pca(args) => cmd::eval::pca(&cli.output_dir, args),
    }
}
