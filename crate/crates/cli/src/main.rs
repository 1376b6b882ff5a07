//! `launcher`: control server, accuracy sweeps, data set generation and
//! target shooting from the command line.

mod cli;
mod commands;
mod error;

use clap::Parser;
use launcher_server::ServerConfig;

use cli::{Cli, Command};
use error::Result;

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => ServerConfig::load(path)?,
        None => ServerConfig::default(),
    };
    match cli.command {
        Command::Serve(a) => commands::serve(cfg, a),
        Command::Sweep(a) => commands::sweep(cfg, a),
        Command::Dataset(a) => commands::dataset(cfg, a),
        Command::Train(a) => commands::train_model(a),
        Command::Eval(a) => commands::eval(cfg, a),
        Command::Config(a) => commands::print_config(&cfg, a),
    }
}

fn main() {
    // clap exits with 2 on usage errors and 0 for --help
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
