//! Closed-form estimation of G, H and E from one noisy realization.

use ris_chanest::estimators::{disambiguate, estimate_hosvd_sti};
use ris_chanest::harness::nmse;
use ris_chanest::scenario::{ImpairmentConfig, Scenario, ScenarioConfig};

fn main() -> ris_chanest::Result<()> {
    for snr_db in [0.0, 10.0, 20.0, 30.0, f64::INFINITY] {
        let cfg = ScenarioConfig { m: 4, l: 4, n: 8, k: 8, p: 5, snr_db, seed: 1 };
        let sc = Scenario::generate(&cfg, &ImpairmentConfig::default())?;
        let est = estimate_hosvd_sti(&sc.received, &sc.pattern)?;
        // scaling ambiguity resolved against the truth before scoring
        let (aligned, _) = disambiguate(&est, &sc.truth)?;
        let db = |x: f64| 10.0 * x.log10();
        println!(
            "SNR {snr_db:>5} dB: NMSE G {:>8.2} dB  H {:>8.2} dB  E {:>8.2} dB",
            db(nmse(&sc.truth.channels.g, &aligned.g_hat)?),
            db(nmse(&sc.truth.channels.h, &aligned.h_hat)?),
            db(nmse(&sc.truth.impairments.e, aligned.e_hat.as_ref().unwrap())?),
        );
    }
    Ok(())
}
