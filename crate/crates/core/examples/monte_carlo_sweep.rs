//! Run a plan file through the harness and print the aggregate CSV.
//!
//! `cargo run --release --example monte_carlo_sweep -- examples/plans/quick.toml`

use ris_chanest::cli::{parse_plan_file, results_csv};
use ris_chanest::harness::{aggregate, run_plan};

fn main() -> ris_chanest::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/plans/quick.toml").into());
    let (plan, _) = parse_plan_file(path.as_ref())?;
    let records = run_plan(&plan, 0)?;
    let failures: usize = records.iter().map(|r| r.failures.len()).sum();
    print!("{}", results_csv(&aggregate(&records)?));
    eprintln!("{} runs, {failures} method failures", records.len());
    Ok(())
}
