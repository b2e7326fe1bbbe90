use clap::Parser;
use wedge_diffraction::cli::{run, Args};

fn main() {
    std::process::exit(run(&Args::parse()));
}
