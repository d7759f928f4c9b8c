mod common;

use common::*;
use rand::Rng;
use ris_chanest::estimators::*;
use ris_chanest::harness::nmse;
use ris_chanest::scenario::*;
use ris_chanest::tensor::{kron_vec, norm2, ComplexMatrix, DenseTensor};
use ris_chanest::{Complex64, Error};

fn scenario(l: usize, m: usize, n: usize, k: usize, p: usize, snr_db: f64, r_b: f64, seed: u64) -> Scenario {
    let cfg = ScenarioConfig { m, l, n, k, p, snr_db, seed };
    Scenario::generate(&cfg, &ImpairmentConfig { r_b, ..Default::default() }).unwrap()
}

fn nmse_all(est: &FactorEstimates, truth: &Truth) -> (f64, f64, Option<f64>) {
    let (aligned, _) = disambiguate(est, truth).unwrap();
    let e = aligned.e_hat.as_ref().map(|e| nmse(&truth.impairments.e, e).unwrap());
    (nmse(&truth.channels.h, &aligned.h_hat).unwrap(), nmse(&truth.channels.g, &aligned.g_hat).unwrap(), e)
}

fn cascade(e: &ComplexMatrix, h: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    e.khatri_rao(h).unwrap().khatri_rao(g).unwrap()
}

#[test]
fn noiseless_matched_filter_inverts_the_pattern() {
    for (n, k) in [(8, 8), (4, 8), (5, 5)] {
        let sc = scenario(3, 4, n, k, 2, f64::INFINITY, 0.5, 51);
        let yt = matched_filter(&sc.received, &sc.pattern).unwrap();
        let t = &sc.truth;
        let expect = cascade(&t.impairments.e, &t.channels.h, &t.channels.g);
        assert!(mat_rel_err(&yt, &expect) <= 1e-10);
    }
}

#[test]
fn identity_pattern_returns_transposed_unfolding() {
    let sc = scenario(3, 2, 4, 4, 2, 10.0, 0.5, 52);
    let pattern = ActivationPattern { s: ComplexMatrix::identity(4) };
    let yt = matched_filter(&sc.received, &pattern).unwrap();
    assert!(mat_rel_err(&yt, &sc.received.unfold(2).unwrap().transpose()) <= 1e-14);
}

#[test]
fn matched_filter_is_the_least_squares_solution() {
    let mut r = rng(53);
    for use_dft in [true, false] {
        let sc = scenario(3, 4, 5, 7, 2, 5.0, 0.5, 54);
        let pattern = if use_dft { sc.pattern.clone() } else { ActivationPattern { s: random_matrix(7, 5, &mut r) } };
        let yt = matched_filter(&sc.received, &pattern).unwrap();
        // Z^T = argmin ||Y_(k) - S Z^T||
        let oracle = normal_equations(&pattern.s, &sc.received.unfold(2).unwrap()).transpose();
        assert!(mat_rel_err(&yt, &oracle) <= 1e-8, "dft = {use_dft}");
    }
}

#[test]
fn rank_deficient_or_short_patterns_are_not_identifiable() {
    let sc = scenario(2, 2, 3, 4, 2, 10.0, 0.5, 55);
    let mut s = sc.pattern.s.clone();
    let first = s.col(0).to_vec();
    s.set_col(2, &first);
    let err = matched_filter(&sc.received, &ActivationPattern { s }).unwrap_err();
    assert!(matches!(err, Error::Identifiability(_)));

    let y = DenseTensor::zeros(&[2, 2, 3, 2]).unwrap();
    let short = ActivationPattern { s: ComplexMatrix::from_fn(3, 4, |_, _| c(1.0, 0.0)) };
    for result in [
        matched_filter(&y, &short).map(|_| ()),
        estimate_hosvd_sti(&y, &short).map(|_| ()),
        bals_baseline(&y, &short, &BalsOptions::default()).map(|_| ()),
    ] {
        let err = result.unwrap_err();
        assert!(matches!(err, Error::Identifiability(_)), "{err}");
        assert!(err.to_string().contains("K >= N"));
    }
}

#[test]
fn literal_rank_one_column_is_recovered() {
    let g = [c(1.0, 0.0), c(2.0, 0.0)];
    let h = [c(1.0, 0.0), c(-1.0, 0.0)];
    let e = [c(1.0, 0.0), c(1.0, 0.0)];
    let col = kron_vec(&e, &h, &g);
    let y = ComplexMatrix::from_columns(&[col.clone()]).unwrap();
    let est = hosvd_sti(&y, [2, 2, 2]).unwrap();
    let rec = kron_vec(est.e_hat.as_ref().unwrap().col(0), est.h_hat.col(0), est.g_hat.col(0));
    assert!(rel_err(&rec, &col) <= 1e-10);
}

#[test]
fn noiseless_exact_recovery_over_random_sizes() {
    let mut r = rng(56);
    let pick = |r: &mut rand_chacha::ChaCha8Rng, xs: &[usize]| xs[r.random_range(0..xs.len())];
    for trial in 0..50 {
        let l = pick(&mut r, &[2, 4, 8]);
        let m = pick(&mut r, &[2, 4, 8]);
        let n = pick(&mut r, &[2, 4, 8]);
        let p = pick(&mut r, &[2, 5]);
        let k = n + r.random_range(0..3);
        let r_b = [0.0, 0.2, 0.5, 1.0][trial % 4];
        let sc = scenario(l, m, n, k, p, f64::INFINITY, r_b, 1000 + trial as u64);
        let est = estimate_hosvd_sti(&sc.received, &sc.pattern).unwrap();
        assert!(est.degenerate_columns.is_empty());
        let (nh, ng, ne) = nmse_all(&est, &sc.truth);
        let ne = ne.unwrap();
        assert!(nh <= 1e-20 && ng <= 1e-20 && ne <= 1e-20, "L{l} M{m} N{n} K{k} P{p}: {nh:e} {ng:e} {ne:e}");
    }
}

fn column_tensor(yt: &ComplexMatrix, col: usize) -> Vec<Complex64> {
    yt.col(col).to_vec()
}

#[test]
fn hosvd_column_beats_random_rank_one_competitors() {
    let sc = scenario(4, 4, 8, 8, 5, 5.0, 0.5, 57);
    let yt = matched_filter(&sc.received, &sc.pattern).unwrap();
    let est = hosvd_sti(&yt, [4, 4, 5]).unwrap();
    let mut r = rng(58);
    for col in 0..8 {
        let t = column_tensor(&yt, col);
        let ours = kron_vec(est.e_hat.as_ref().unwrap().col(col), est.h_hat.col(col), est.g_hat.col(col));
        let ours_err = rel_err(&ours, &t);
        for _ in 0..100 {
            let unit = |v: Vec<Complex64>| {
                let nv = norm2(&v);
                v.into_iter().map(|z| z / nv).collect::<Vec<_>>()
            };
            let u = unit(random_vec(4, &mut r));
            let v = unit(random_vec(4, &mut r));
            let w = unit(random_vec(5, &mut r));
            let basis = kron_vec(&w, &v, &u);
            // optimal complex scale for a unit-norm rank-one direction
            let sigma: Complex64 = basis.iter().zip(&t).map(|(b, y)| b.conj() * y).sum();
            let competitor: Vec<Complex64> = basis.iter().map(|b| b * sigma).collect();
            assert!(ours_err <= rel_err(&competitor, &t));
        }
    }
}

#[test]
fn trilinear_scale_is_conserved() {
    for seed in 0..10 {
        let sc = scenario(4, 4, 8, 8, 5, f64::INFINITY, 0.5, 60 + seed);
        let est = estimate_hosvd_sti(&sc.received, &sc.pattern).unwrap();
        let (_, report) = disambiguate(&est, &sc.truth).unwrap();
        for scales in &report.columns {
            assert!((scales.product() - c(1.0, 0.0)).norm() <= 1e-8, "{:?}", scales);
        }
    }
}

#[test]
fn pure_scalings_are_removed_exactly() {
    let sc = scenario(3, 3, 4, 4, 2, f64::INFINITY, 0.5, 61);
    let t = &sc.truth;
    let phase = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
    let est = FactorEstimates {
        method: Method::HosvdSti,
        g_hat: t.channels.g.scale(c(2.0, 0.0)),
        h_hat: t.channels.h.scale(phase),
        e_hat: Some(t.impairments.e.clone()),
        degenerate_columns: vec![],
        iterations: None,
        converged: true,
    };
    let (aligned, report) = disambiguate(&est, t).unwrap();
    for s in &report.columns {
        assert!((s.g - c(0.5, 0.0)).norm() < 1e-14);
        assert!((s.h - phase.conj()).norm() < 1e-14);
    }
    assert!(nmse(&t.channels.g, &aligned.g_hat).unwrap() < 1e-28);
    assert!(nmse(&t.channels.h, &aligned.h_hat).unwrap() < 1e-28);

    let mut zeroed = est.clone();
    zeroed.h_hat.set_col(1, &[c(0.0, 0.0); 3]);
    assert!(matches!(disambiguate(&zeroed, t), Err(Error::DegenerateColumn { column: 1, .. })));
}

#[test]
fn cascade_is_invariant_to_normalization() {
    let sc = scenario(4, 4, 8, 8, 5, f64::INFINITY, 0.5, 62);
    let yt = matched_filter(&sc.received, &sc.pattern).unwrap();
    let est = hosvd_sti(&yt, [4, 4, 5]).unwrap();
    let normalized = normalize_reference(&est);
    for variant in [&est, &normalized] {
        let rec = cascade(variant.e_hat.as_ref().unwrap(), &variant.h_hat, &variant.g_hat);
        assert!(mat_rel_err(&rec, &yt) <= 1e-12);
    }
    assert!(normalized.h_hat.row(0).iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
}

#[test]
fn parallel_columns_are_bitwise_identical() {
    for seed in 0..5 {
        let sc = scenario(4, 4, 16, 16, 5, 10.0, 0.5, 63 + seed);
        let yt = matched_filter(&sc.received, &sc.pattern).unwrap();
        let seq = hosvd_sti(&yt, [4, 4, 5]).unwrap();
        let par = hosvd_sti_parallel(&yt, [4, 4, 5]).unwrap();
        assert_eq!(seq.g_hat, par.g_hat);
        assert_eq!(seq.h_hat, par.h_hat);
        assert_eq!(seq.e_hat, par.e_hat);
    }
}

#[test]
fn fully_blocked_element_is_flagged_not_fatal() {
    let sc = scenario(3, 3, 4, 4, 3, f64::INFINITY, 0.0, 64);
    let mut truth = sc.truth.clone();
    for p in 0..3 {
        truth.impairments.e[(p, 2)] = c(0.0, 0.0);
    }
    let cfg = sc.config;
    let y = build_received(&cfg, &truth.channels, &sc.pattern, &truth.impairments, &mut rng(0)).unwrap();
    let est = estimate_hosvd_sti(&y, &sc.pattern).unwrap();
    assert_eq!(est.degenerate_columns, vec![2]);
    assert!(est.g_hat.col(2).iter().all(|z| *z == c(0.0, 0.0)));
    assert!(est.e_hat.as_ref().unwrap().col(2).iter().all(|z| *z == c(0.0, 0.0)));
}

#[test]
fn bals_recovers_an_ideal_noiseless_surface() {
    for seed in 0..5 {
        let cfg = ScenarioConfig { m: 4, l: 4, n: 8, k: 8, p: 5, snr_db: f64::INFINITY, seed: 70 + seed };
        let imp = ImpairmentConfig { r_b: 0.5, mode: ImpairmentMode::Ideal, redraw_per_frame: true };
        let sc = Scenario::generate(&cfg, &imp).unwrap();
        let est = bals_baseline(&sc.received, &sc.pattern, &BalsOptions { seed, ..Default::default() }).unwrap();
        assert!(est.converged);
        assert!(est.e_hat.is_none());
        let (nh, ng, _) = nmse_all(&est, &sc.truth);
        assert!(nh <= 1e-16 && ng <= 1e-16, "{nh:e} {ng:e}");
    }
}

#[test]
fn bals_iteration_accounting() {
    let sc = scenario(4, 4, 8, 8, 5, 20.0, 0.5, 75);
    let one = bals_baseline(&sc.received, &sc.pattern, &BalsOptions { max_iters: 1, tol: 0.0, seed: 1 }).unwrap();
    assert_eq!(one.iterations, Some(1));
    assert!(!one.converged);
    let capped = bals_baseline(&sc.received, &sc.pattern, &BalsOptions { max_iters: 7, tol: 0.0, seed: 1 }).unwrap();
    assert_eq!(capped.iterations, Some(7));
    assert!(capped.g_hat.is_finite() && capped.h_hat.is_finite());
    let zero = bals_baseline(&sc.received, &sc.pattern, &BalsOptions { max_iters: 0, tol: 0.0, seed: 1 });
    assert!(matches!(zero, Err(Error::Argument(_))));
}

#[test]
fn bals_is_deterministic_per_seed() {
    let sc = scenario(4, 4, 8, 8, 5, 10.0, 0.5, 76);
    let opts = BalsOptions { seed: 9, ..Default::default() };
    let a = bals_baseline(&sc.received, &sc.pattern, &opts).unwrap();
    let b = bals_baseline(&sc.received, &sc.pattern, &opts).unwrap();
    assert_eq!(a.g_hat, b.g_hat);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn clairvoyant_is_exact_without_noise() {
    for seed in 0..10 {
        let sc = scenario(4, 4, 8, 8, 5, f64::INFINITY, 0.5, 80 + seed);
        let est = clairvoyant(&sc.received, &sc.truth, &sc.pattern).unwrap();
        let (nh, ng, ne) = nmse_all(&est, &sc.truth);
        assert!(nh <= 1e-24 && ng <= 1e-24 && ne.unwrap() <= 1e-24, "{nh:e} {ng:e} {:e}", ne.unwrap());
    }
}

#[test]
fn clairvoyant_residual_matches_projection_oracle() {
    let sc = scenario(3, 2, 4, 5, 3, f64::INFINITY, 0.5, 90);
    let mut y = sc.received.clone();
    let delta = c(0.3, -0.2);
    let idx = [1, 0, 3, 2];
    *y.get_mut(&idx) += delta;
    let est = clairvoyant(&y, &sc.truth, &sc.pattern).unwrap();
    let t = &sc.truth;
    let z = t.impairments.e.khatri_rao(&sc.pattern.s).unwrap().khatri_rao(&t.channels.h).unwrap();
    let y1 = y.unfold(0).unwrap();
    let residual = y1.sub(&naive_matmul(&est.g_hat, &z.transpose())).unwrap();

    let mut d = DenseTensor::zeros(y.dims()).unwrap();
    *d.get_mut(&idx) = delta;
    let d1t = d.unfold(0).unwrap().transpose();
    let coeff = normal_equations(&z, &d1t);
    let oracle = d1t.sub(&naive_matmul(&z, &coeff)).unwrap().transpose();
    assert!(residual.sub(&oracle).unwrap().frobenius_norm() <= 1e-12);
    assert!(residual.frobenius_norm() > 0.0);
}

#[test]
fn clairvoyant_rejects_mismatched_truth() {
    let sc = scenario(3, 2, 4, 5, 3, 10.0, 0.5, 91);
    let other = scenario(3, 3, 4, 5, 3, 10.0, 0.5, 92);
    assert!(matches!(clairvoyant(&sc.received, &other.truth, &sc.pattern), Err(Error::Dimension(_))));
}

#[test]
fn clairvoyant_dominates_hosvd_on_average() {
    for snr in [0.0, 10.0, 20.0] {
        let mut sums = [[0.0; 3]; 2];
        for seed in 0..100 {
            let sc = scenario(4, 4, 8, 8, 5, snr, 0.5, 2000 + seed);
            let h = nmse_all(&estimate_hosvd_sti(&sc.received, &sc.pattern).unwrap(), &sc.truth);
            let cv = nmse_all(&clairvoyant(&sc.received, &sc.truth, &sc.pattern).unwrap(), &sc.truth);
            for (slot, v) in [(0, h), (1, cv)] {
                sums[slot][0] += v.0;
                sums[slot][1] += v.1;
                sums[slot][2] += v.2.unwrap();
            }
        }
        for f in 0..3 {
            assert!(sums[1][f] / 100.0 <= sums[0][f] / 100.0 + 1e-12, "snr {snr} factor {f}");
        }
    }
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
    }
    assert!("svd".parse::<Method>().is_err());
}
