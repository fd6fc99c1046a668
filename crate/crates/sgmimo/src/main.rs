use clap::Parser;
use sgmimo::cli::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
