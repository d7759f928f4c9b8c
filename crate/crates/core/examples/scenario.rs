//! Draw one seeded realization and inspect its parts.

use ris_chanest::scenario::{ImpairmentConfig, ImpairmentMode, Scenario, ScenarioConfig};

fn main() -> ris_chanest::Result<()> {
    let cfg = ScenarioConfig { m: 4, l: 4, n: 8, k: 8, p: 5, snr_db: 15.0, seed: 42 };
    let imp = ImpairmentConfig { r_b: 0.5, mode: ImpairmentMode::Full, redraw_per_frame: true };
    let sc = Scenario::generate(&cfg, &imp)?;

    println!("received tensor dims {:?} (L, M, K, P)", sc.received.dims());
    println!("impaired elements per frame: {}", imp.impaired_count(cfg.n));
    let gram = sc.pattern.s.adjoint_matmul(&sc.pattern.s)?;
    println!("S^H S diagonal: {:.3} (K = {})", gram[(0, 0)].re, cfg.k);

    println!("impairment magnitudes |E| (frames x elements):");
    let e = &sc.truth.impairments.e;
    for p in 0..e.rows() {
        let row: Vec<String> = e.row(p).iter().map(|z| format!("{:.2}", z.norm())).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
