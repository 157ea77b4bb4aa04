//! Runs every invariant suite and prints the report.

use rabinovich::verify::{run_verify, Suite};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let report = run_verify(Suite::All, seed);
    print!("{}", report.to_text());
    std::process::exit(report.exit_code());
}
