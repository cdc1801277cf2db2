use clap::Parser;
use hyperspin::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
