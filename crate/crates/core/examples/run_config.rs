//! Parse a run config and execute it in-process, printing the diagnostics.
//! Usage: `run_config [PATH]`, defaulting to the normal-incidence config.

use std::path::PathBuf;

use wedge_diffraction::cli::{diffraction_csv, execute, parse_config};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/normal.toml"));
    let text = std::fs::read_to_string(&path).expect("readable config");
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("{e}");
            }
            std::process::exit(2);
        }
    };
    let out = execute(&cfg, &[]).unwrap_or_else(|e| panic!("{e:?}"));
    print!("{}", out.report);
    print!("{}", out.diagnostics.render());
    for line in diffraction_csv(&out.table).lines().take(4) {
        println!("{line}");
    }
}
