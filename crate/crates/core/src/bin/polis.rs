use clap::Parser;

use polis::cli::{self, Cli};

fn main() {
    let result = cli::run(Cli::parse());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    std::process::exit(cli::exit_code(&result));
}
