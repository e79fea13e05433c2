mod commands;
mod config;
mod output;

use clap::Parser;

fn main() {
    let cli = commands::Cli::parse();
    if let Err(failure) = commands::run(cli) {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}
