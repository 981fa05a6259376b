//! Run the bundled scenario through the report runner.
//!
//!     cargo run --example report -- [scenario.json]

use hecke_tyurin::report::{self, RunFlags};
use std::path::PathBuf;

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/g2-default.json")
    });
    let (rep, code) = report::run(&path, None, &RunFlags::default());
    print!("{}", rep.summary());
    std::process::exit(code);
}
