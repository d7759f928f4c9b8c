//! Mean HOSVD-STI runtime as the number of RIS elements grows (K = N).

use ris_chanest::estimators::Method;
use ris_chanest::harness::{aggregate, run_plan, ExperimentPlan, ScenarioGrid};

fn main() -> ris_chanest::Result<()> {
    let plan = ExperimentPlan {
        grid: ScenarioGrid { snr_db: vec![20.0], n: vec![4, 8, 16, 32, 64], k_equals_n: true, ..Default::default() },
        omega: 50,
        methods: vec![Method::HosvdSti, Method::Bals],
        ..Default::default()
    };
    let rows = aggregate(&run_plan(&plan, 1)?)?;
    println!("{:<10} {:>4} {:>12}", "method", "N", "runtime us");
    for r in &rows {
        println!("{:<10} {:>4} {:>12.1}", r.method.as_str(), r.point.n, r.runtime_s.mean * 1e6);
    }
    Ok(())
}
