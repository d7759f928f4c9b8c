//! HOSVD-STI against the ideal-RIS BALS baseline and the clairvoyant bound on
//! the same realizations.

use ris_chanest::estimators::{BalsOptions, Method};
use ris_chanest::harness::{run_method, Stat};
use ris_chanest::scenario::{ImpairmentConfig, Scenario, ScenarioConfig};

fn main() -> ris_chanest::Result<()> {
    let runs = 100;
    let mut h = vec![Vec::new(); 3];
    for seed in 0..runs {
        let cfg = ScenarioConfig { m: 4, l: 4, n: 8, k: 8, p: 5, snr_db: 20.0, seed };
        let sc = Scenario::generate(&cfg, &ImpairmentConfig::default())?;
        let bals = BalsOptions { seed: seed ^ 0xb415, ..Default::default() };
        for (i, m) in Method::ALL.into_iter().enumerate() {
            h[i].push(run_method(m, &sc, &bals)?.nmse_h);
        }
    }
    println!("mean NMSE(H) at 20 dB, r_b = 0.5, {runs} paired runs");
    for (i, m) in Method::ALL.into_iter().enumerate() {
        let s = Stat::from_samples(&h[i]).unwrap();
        println!("  {:<12} {:>7.2} dB", m.as_str(), s.mean_db());
    }
    Ok(())
}
