//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL ...` line straight to stderr so the verdicts are
//! visible without `--nocapture`.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use apmc_core::absorption::{AbsorptionPolicy, PolicyKind};
use apmc_core::analytics::two_rx_asymptote;
use apmc_core::engine::{run_batch, BatchResult, Realization, Scene};
use apmc_core::geometry::{segment_intersects_sphere, SphereReceiver, Vector3};
use apmc_core::metrics::{analytic_curve, curve_accuracy, kappa, predict_r2, rmse, FitOrder, KappaInputs};
use apmc_core::{ChannelParams, MetricsError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UM: f64 = 1e-6;
const DESK_N: usize = 100_000;
const DESK_REALIZATIONS: u64 = 20;
const SEED: u64 = 20_190_101;

fn verdict(n: u32, pass: bool, detail: String) {
    let line = format!("\ncriterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn desk_batch(scene: &Scene, kind: PolicyKind) -> BatchResult {
    run_batch(scene, &AbsorptionPolicy::plain(kind), SEED, DESK_REALIZATIONS, 0).unwrap()
}

/// Binomial standard deviation of a fraction estimated from `n` molecules.
fn binomial_sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

fn one_step_r2(radius: f64, distance: f64, diffusion: f64, dt: f64, kind: PolicyKind) -> Result<f64, MetricsError> {
    let params = ChannelParams::new(diffusion, distance, radius, dt, DESK_N).unwrap();
    apmc_core::metrics::measure_one_step_accuracy(&params, &AbsorptionPolicy::plain(kind), SEED, DESK_REALIZATIONS, 0)
        .map(|r| r.r_squared)
}

#[test]
fn criterion_01_apmc_matches_hitting_curve_for_small_receiver() {
    let scene = Scene::single(0.5 * UM, 50.0 * UM, 1e-9, 0.1, 100, DESK_N).unwrap();
    let batch = desk_batch(&scene, PolicyKind::Apmc);
    let analytic = analytic_curve(&scene).unwrap();
    let max_err = analytic.iter().zip(&batch.curve.fractions[0]).map(|(a, s)| (a - s).abs()).fold(0.0, f64::max);
    let r2 = curve_accuracy(&scene, &batch.curve).unwrap().r_squared;
    verdict(1, max_err <= 5e-4 && r2 >= 0.99, format!("max |sim - analytic| = {max_err:.3e} (<= 5e-4), R^2 = {r2:.5} (>= 0.99)"));
}

#[test]
fn criterion_02_small_step_ordering() {
    let scene = Scene::single(20.0 * UM, 50.0 * UM, 1e-9, 0.1, 100, DESK_N).unwrap();
    let analytic = analytic_curve(&scene).unwrap();
    let total = (DESK_N as u64 * DESK_REALIZATIONS) as f64;
    let rmc = desk_batch(&scene, PolicyKind::Rmc);
    let smc = desk_batch(&scene, PolicyKind::Smc);
    let apmc = desk_batch(&scene, PolicyKind::Apmc);
    let r2 = curve_accuracy(&scene, &rmc.curve).unwrap().r_squared;
    let smc_below = analytic
        .iter()
        .zip(&smc.curve.fractions[0])
        .all(|(&p, &s)| s <= p + 3.0 * binomial_sigma(p, total));
    let apmc_above = analytic
        .iter()
        .zip(&apmc.curve.fractions[0])
        .all(|(&p, &s)| s >= p - 3.0 * binomial_sigma(p, total));
    verdict(
        2,
        r2 >= 0.99 && smc_below && apmc_above,
        format!("RMC R^2 = {r2:.5} (>= 0.99), SMC <= analytic + 3 sigma: {smc_below}, APMC >= analytic - 3 sigma: {apmc_above}"),
    );
}

#[test]
fn criterion_03_large_step_separation() {
    let scene = Scene::single(10.0 * UM, 50.0 * UM, 1e-9, 5.0, 10, DESK_N).unwrap();
    let analytic = analytic_curve(&scene).unwrap();
    let apmc = desk_batch(&scene, PolicyKind::Apmc);
    let rmc = desk_batch(&scene, PolicyKind::Rmc);
    let max_err = analytic.iter().zip(&apmc.curve.fractions[0]).map(|(a, s)| (a - s).abs()).fold(0.0, f64::max);
    let min_ratio = scene
        .times()
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t >= 10.0)
        .map(|(i, _)| rmc.curve.fractions[0][i] / apmc.curve.fractions[0][i])
        .fold(f64::INFINITY, f64::min);
    verdict(
        3,
        max_err <= 0.01 && min_ratio >= 1.5,
        format!("APMC max |sim - analytic| = {max_err:.4} (<= 0.01), min RMC/APMC for t >= 10 s = {min_ratio:.3} (>= 1.5)"),
    );
}

#[test]
fn criterion_04_accuracy_depends_on_diffusion_step_product() {
    // D dt = 2000 um^2 split three ways
    let splits = [(1e-9, 2.0), (2e-9, 1.0), (0.5e-9, 4.0)];
    let r2: Vec<f64> = splits
        .iter()
        .map(|&(d, dt)| one_step_r2(20.0 * UM, 50.0 * UM, d, dt, PolicyKind::Rmc).unwrap())
        .collect();
    let spread = r2.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - r2.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(4, spread < 0.02, format!("one-step RMC R^2 = {r2:.5?}, spread = {spread:.5} (< 0.02)"));
}

#[test]
fn criterion_05_kappa_prediction_fidelity() {
    // (a) radii 20, 25, 30 um at 50 um, D dt over the 40..141 um RMS step range
    let products_um2 = [800.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0, 7500.0, 10000.0];
    let mut worst_mean = 0.0f64;
    let mut means = Vec::new();
    for a in [20.0, 25.0, 30.0] {
        let diffs: Vec<f64> = products_um2
            .iter()
            .map(|&p| {
                let dt = p * 1e-12 / 1e-9;
                let measured = one_step_r2(a * UM, 50.0 * UM, 1e-9, dt, PolicyKind::Rmc).unwrap();
                let k = kappa(&KappaInputs { radius: a * UM, distance: 50.0 * UM, diffusion: 1e-9, dt });
                (measured - predict_r2(k, FitOrder::ClampedCubic)).abs()
            })
            .collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        worst_mean = worst_mean.max(mean);
        means.push(mean);
    }
    // (b) radii 15, 20 um at 40 um: RMSE of each fit against measurement
    let grid_um2 = [100.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0, 7500.0, 10000.0];
    let mut ordering_ok = true;
    let mut table = Vec::new();
    for a in [15.0, 20.0] {
        let mut measured = Vec::new();
        let mut fits = [Vec::new(), Vec::new(), Vec::new()];
        for &p in &grid_um2 {
            let dt = p * 1e-12 / 1e-9;
            measured.push(one_step_r2(a * UM, 40.0 * UM, 1e-9, dt, PolicyKind::Rmc).unwrap());
            let k = kappa(&KappaInputs { radius: a * UM, distance: 40.0 * UM, diffusion: 1e-9, dt });
            fits[0].push(predict_r2(k, FitOrder::Linear));
            fits[1].push(predict_r2(k, FitOrder::Quadratic));
            fits[2].push(predict_r2(k, FitOrder::ClampedCubic));
        }
        let e: Vec<f64> = fits.iter().map(|f| rmse(f, &measured).unwrap()).collect();
        ordering_ok &= e[2] < e[0] && e[2] < e[1];
        table.push((a, e));
    }
    verdict(
        5,
        worst_mean < 0.06 && ordering_ok,
        format!("mean |measured - clamped cubic| for a = 20/25/30 um: {means:.4?} (< 0.06); fit RMSE (1st, 2nd, 3rd) {table:.4?}"),
    );
}

#[test]
fn criterion_06_polynomial_pins() {
    let c = predict_r2(0.3, FitOrder::Cubic);
    let lo = predict_r2(0.05, FitOrder::ClampedCubic);
    let hi = predict_r2(0.7, FitOrder::ClampedCubic);
    let pass = (c - 0.82263).abs() < 1e-12 && lo == 0.0 && hi == 1.0;
    verdict(6, pass, format!("cubic(0.3) = {c:.12}, clamped(0.05) = {lo}, clamped(0.7) = {hi}"));
}

/// Walk-on-spheres estimate of the probability that a Brownian particle
/// starting at the origin ever hits `rxs[0]` before any other sphere.
/// Beyond `far * r0` the particle escapes with probability `1 - r0/|x|`,
/// otherwise it restarts uniformly on the sphere of radius `r0`.
fn walk_on_spheres_capture(rxs: &[SphereReceiver], walkers: usize, seed: u64) -> f64 {
    let r0 = rxs.iter().map(|rx| rx.center.norm() + rx.radius).fold(0.0, f64::max);
    let far = 1e4 * r0;
    let shell = 1e-9 * rxs[0].radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let on_sphere = |rng: &mut ChaCha8Rng, r: f64| loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (r / n);
        }
    };
    let mut hits = 0usize;
    for _ in 0..walkers {
        let mut x = Vector3::ZERO;
        loop {
            let (idx, gap) = rxs
                .iter()
                .enumerate()
                .map(|(i, rx)| (i, (x - rx.center).norm() - rx.radius))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
            if gap < shell {
                hits += (idx == 0) as usize;
                break;
            }
            let r = x.norm();
            if r > far {
                if rng.random::<f64>() >= r0 / r {
                    break;
                }
                x = on_sphere(&mut rng, r0);
                continue;
            }
            x += on_sphere(&mut rng, gap);
        }
    }
    hits as f64 / walkers as f64
}

#[test]
fn criterion_07_two_receiver_asymptote() {
    let (a, d) = (40.0 * UM, 100.0 * UM);
    let series = two_rx_asymptote(a, d, 1e-12, 10_000).unwrap();
    let limit = two_rx_asymptote(1.0, 1000.0, 1e-12, 10_000).unwrap();
    let v1 = series.value;
    let series_ok = series.converged
        && (a / (2.0 * d)..=a / d).contains(&v1)
        && limit.converged
        && (limit.value / 1e-3 - 1.0).abs() < 1e-3;

    let scene = Scene::symmetric(2, a, d, 1.05e-9, 2.0, 5000, 20_000).unwrap();
    let walkers = 200_000;
    let oracle = walk_on_spheres_capture(&scene.receivers, walkers, SEED);
    let oracle_sigma = binomial_sigma(oracle, walkers as f64);
    let oracle_ok = (oracle - v1).abs() <= 4.0 * oracle_sigma;

    // long-horizon run at reduced molecule count, one realization
    let batch = run_batch(&scene, &AbsorptionPolicy::plain(PolicyKind::Apmc), SEED, 1, 0).unwrap();
    let last = scene.samples - 1;
    let per_rx: Vec<f64> = batch.curve.fractions.iter().map(|f| f[last]).collect();
    let sim_ok = per_rx.iter().all(|&v| v >= v1 - 0.02 && v <= v1 + 0.01);
    verdict(
        7,
        series_ok && oracle_ok && sim_ok,
        format!(
            "V1 = {v1:.6} ({} terms), walk-on-spheres {oracle:.4} +- {oracle_sigma:.4}, d/a = 1000 gives {:.6e}; \
             APMC per-receiver at t = {:.0} s: {per_rx:.4?} (window [{:.4}, {:.4}])",
            series.terms,
            limit.value,
            scene.times()[last],
            v1 - 0.02,
            v1 + 0.01
        ),
    );
}

#[test]
fn criterion_08_threshold_economics() {
    let xis = [0.0, 0.005, 0.01, 0.015, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1, 0.15];
    let sweep = |a: f64| -> Vec<(u64, f64, f64)> {
        let scene = Scene::single(a * UM, 50.0 * UM, 1e-9, 10.0, 10, DESK_N).unwrap();
        xis.iter()
            .map(|&xi| {
                let policy = AbsorptionPolicy::new(PolicyKind::Apmc, xi).unwrap();
                let b = run_batch(&scene, &policy, SEED, DESK_REALIZATIONS, 0).unwrap();
                let r2 = curve_accuracy(&scene, &b.curve).unwrap().r_squared;
                (b.ledger.n_uniform, b.ledger.total(), r2)
            })
            .collect()
    };
    let small = sweep(10.0);
    let large = sweep(20.0);

    let nonincreasing = small.windows(2).all(|w| w[1].0 <= w[0].0);
    let totals: Vec<f64> = small.iter().map(|r| r.1).collect();
    let (argmin, &min_total) = totals.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap();
    let interior = argmin > 0 && argmin < totals.len() - 1 && totals[totals.len() - 1] > min_total;
    let best_saving = small
        .iter()
        .filter(|r| small[0].2 - r.2 < 0.05)
        .map(|r| 1.0 - r.1 / small[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let at = xis.iter().position(|&x| x == 0.05).unwrap();
    let penalty_small = small[0].2 - small[at].2;
    let penalty_large = large[0].2 - large[at].2;
    verdict(
        8,
        nonincreasing && interior && best_saving >= 0.10 && penalty_large < penalty_small,
        format!(
            "n_uniform nonincreasing: {nonincreasing}; min n_total at xi = {} (interior: {interior}); \
             best saving with R^2 drop < 0.05: {:.1}%; R^2 penalty at xi = 0.05: a=10 um {penalty_small:.4}, a=20 um {penalty_large:.4}",
            xis[argmin],
            100.0 * best_saving
        ),
    );
}

fn simulate_csv(dir: &Path, workers: usize) -> String {
    let config = dir.join("det.toml");
    std::fs::write(
        &config,
        "algorithm = \"apmc\"\nseed = 77\nrealizations = 8\n[scene]\nmolecules = 2000\nsamples = 30\nreceivers = 2\nradius = \"10 um\"\ndistance = \"40 um\"\ntime_step = \"0.5 s\"\n",
    )
    .unwrap();
    let out = dir.join(format!("w{workers}"));
    let status = Command::new(env!("CARGO_BIN_EXE_apmc"))
        .args(["--config", config.to_str().unwrap(), "--workers", &workers.to_string(), "--out", out.to_str().unwrap(), "simulate"])
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read_to_string(out.join("simulate.csv")).unwrap()
}

#[test]
fn criterion_09_determinism_and_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let one = simulate_csv(dir.path(), 1);
    let eight = simulate_csv(dir.path(), 8);
    let identical = one == eight;

    let mut conserved = true;
    let mut outside = true;
    let scenes = [
        Scene::single(10.0 * UM, 30.0 * UM, 1e-9, 0.5, 40, 500).unwrap(),
        Scene::symmetric(4, 10.0 * UM, 30.0 * UM, 1e-9, 2.0, 40, 500).unwrap(),
    ];
    for scene in &scenes {
        for kind in PolicyKind::ALL {
            for idx in 0..3 {
                let mut r = Realization::new(scene, AbsorptionPolicy::plain(kind), SEED, idx);
                loop {
                    let absorbed = r.histogram().cumulative_at(r.current_sample()) as usize;
                    conserved &= absorbed + r.free_count() == scene.molecules;
                    outside &= r.molecules().iter().filter(|m| m.is_free()).all(|m| {
                        scene.receivers.iter().all(|rx| rx.center_distance(m.position) >= rx.radius)
                    });
                    if r.is_finished() {
                        break;
                    }
                    r.step().unwrap();
                }
            }
        }
    }
    verdict(
        9,
        identical && conserved && outside,
        format!("CSV identical for 1 and 8 workers: {identical}; absorbed + free = N: {conserved}; free molecules outside: {outside}"),
    );
}

/// Dense parameter sampling with a small tolerance on ball membership.
fn sampled_hit(p0: Vector3, p1: Vector3, rx: &SphereReceiver, samples: usize) -> bool {
    (0..=samples).any(|i| {
        let t = i as f64 / samples as f64;
        let p = p0 + (p1 - p0) * t;
        (p - rx.center).norm() <= rx.radius + 1e-12
    })
}

#[test]
fn criterion_10_segment_predicate_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut disagreements = 0;
    for _ in 0..10_000 {
        let mut v = || Vector3::new(rng.random_range(-60.0..60.0) * UM, rng.random_range(-60.0..60.0) * UM, rng.random_range(-60.0..60.0) * UM);
        let (p0, p1, c) = (v(), v(), v());
        let rx = SphereReceiver::new(1, c, rng.random_range(1.0..30.0) * UM).unwrap();
        if segment_intersects_sphere(p0, p1, &rx) != sampled_hit(p0, p1, &rx, 10_000) {
            disagreements += 1;
        }
    }
    verdict(10, disagreements == 0, format!("{disagreements} disagreements in 10000 random segments"));
}
