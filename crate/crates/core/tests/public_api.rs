use apmc_core::metrics::curve_accuracy;
use apmc_core::{
    hitting_fraction, kappa, predict_r2, run_batch, two_rx_asymptote, AbsorptionPolicy, FitOrder, KappaInputs,
    PolicyKind, RvLedger, Scene,
};

const UM: f64 = 1e-6;

#[test]
fn apmc_tracks_the_hitting_curve_for_a_small_receiver() {
    let n = 400_000;
    let scene = Scene::single(0.5 * UM, 50.0 * UM, 1e-9, 0.1, 50, n).unwrap();
    let batch = run_batch(&scene, &AbsorptionPolicy::plain(PolicyKind::Apmc), 5, 1, 1).unwrap();
    for (t, f) in batch.curve.times.iter().zip(&batch.curve.fractions[0]) {
        let exact = hitting_fraction(0.5 * UM, 50.0 * UM, 1e-9, *t).unwrap();
        let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((f - exact).abs() <= 3.0 * sigma + 1e-12, "t = {t}: {f} vs {exact}");
    }
    // APMC draws one uniform per free molecule per step, SMC none
    assert!(batch.ledger.n_uniform > 0);
    let smc = run_batch(&scene, &AbsorptionPolicy::plain(PolicyKind::Smc), 5, 1, 1).unwrap();
    assert_eq!(smc.ledger.n_uniform, 0);
}

#[test]
fn threshold_only_removes_uniform_draws() {
    let scene = Scene::single(10.0 * UM, 50.0 * UM, 1e-9, 1.0, 20, 20_000).unwrap();
    let plain = run_batch(&scene, &AbsorptionPolicy::plain(PolicyKind::Rmc), 9, 2, 1).unwrap();
    let cut = run_batch(&scene, &AbsorptionPolicy::new(PolicyKind::Rmc, 0.05).unwrap(), 9, 2, 1).unwrap();
    assert!(cut.ledger.n_uniform < plain.ledger.n_uniform);
    assert!(AbsorptionPolicy::new(PolicyKind::Rmc, 1.0).is_err());
}

#[test]
fn rmc_small_step_accuracy() {
    let scene = Scene::single(20.0 * UM, 50.0 * UM, 1e-9, 0.1, 100, 50_000).unwrap();
    let batch = run_batch(&scene, &AbsorptionPolicy::plain(PolicyKind::Rmc), 2, 2, 0).unwrap();
    let report = curve_accuracy(&scene, &batch.curve).unwrap();
    assert!(report.r_squared > 0.99, "{report:?}");
    assert_eq!(report.samples, 100);
}

#[test]
fn predictor_and_ledger_arithmetic() {
    let k = kappa(&KappaInputs { radius: 3.0 * UM, distance: 100.0 * UM, diffusion: 1e-9, dt: 0.01 });
    assert!((k - 0.3).abs() < 1e-12);
    assert!((predict_r2(k, FitOrder::ClampedCubic) - 0.82263).abs() < 1e-9);
    assert_eq!(predict_r2(0.05, FitOrder::ClampedCubic), 0.0);
    assert_eq!(predict_r2(0.7, FitOrder::ClampedCubic), 1.0);
    let total = RvLedger::new(100, 300).total();
    assert!((total - (100.0 + 1200.0 / std::f64::consts::PI)).abs() < 1e-9);
}

#[test]
fn asymptote_bounds() {
    for (a, d) in [(10.0, 100.0), (40.0, 100.0), (20.0, 25.0), (1.0, 1000.0)] {
        let r = two_rx_asymptote(a * UM, d * UM, 1e-12, 100_000).unwrap();
        assert!(r.converged, "{a}/{d}");
        assert!(r.value >= a / (2.0 * d) && r.value <= a / d, "{a}/{d}: {}", r.value);
    }
    assert!(two_rx_asymptote(50.0 * UM, 40.0 * UM, 1e-12, 100).is_err());
}
