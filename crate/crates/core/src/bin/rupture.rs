use clap::Parser;
use rupture_core::cli::{run, Cli, RunManifest};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&RunManifest::from(cli.command)));
}
