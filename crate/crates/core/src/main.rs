use clap::Parser;

use irbox::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("irbox: {err}");
        std::process::exit(err.exit_code());
    }
}
