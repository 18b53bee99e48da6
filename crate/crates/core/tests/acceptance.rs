//! Acceptance gate. Each test prints one `PASS`/`FAIL` line, then asserts.
//!
//! Lines go straight to stdout so they show up even when libtest captures
//! the output of passing tests.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use dronesim_core::analytic::{self, coverage_model1, coverage_model2, rate, rate_from_coverage};
use dronesim_core::density::{interferer_density, DisplacementKernel};
use dronesim_core::monte_carlo::{
    coverage_from_sinr, displaced_annulus_histogram, displaced_ppp_sector_counts, rate_from_sinr,
    MonteCarlo, SectorLayout, SimulationWindow,
};
use dronesim_core::params::{cell_edge_distance, db_to_linear, noise_power};
use dronesim_core::quadrature::Tolerance;
use dronesim_core::{MobilitySpec, NetworkParams, ServiceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA_DB: [f64; 3] = [-5.0, 0.0, 5.0];
const TIMES: [f64; 4] = [0.0, 20.0, 50.0, 200.0];
const SEED: u64 = 20_240_901;

fn report(id: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let secs = started.elapsed().as_secs_f64();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance [{id:02}] {verdict} {name}: {detail} ({secs:.1} s)");
}

fn reference() -> NetworkParams {
    NetworkParams::reference()
}

fn gamma_grid_db(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn kernel_normalization() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tol = Tolerance::new(1e-10, 1e-10);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ux = 1.0 + 4999.0 * rng.random::<f64>();
        let d = 1.0 + 4999.0 * rng.random::<f64>();
        let mass = DisplacementKernel::new(ux, d).unwrap().normalization(tol).unwrap().value;
        worst = worst.max((mass - 1.0).abs());
    }
    let pass = worst <= 1e-6 && started.elapsed().as_secs_f64() < 10.0;
    report(1, "kernel normalization", pass, &format!("max |mass - 1| = {worst:.3e} over 100 pairs, tol 1e-6"), started);
    assert!(pass);
}

#[test]
fn density_histogram_and_continuity() {
    let started = Instant::now();
    let (u0, v, lambda0) = (500.0, 12.5, 1e-6);
    let mut fractions = Vec::new();
    for (k, t) in [20.0, 40.0, 50.0, 200.0].into_iter().enumerate() {
        let h = displaced_annulus_histogram(u0, v * t, 10_000_000, 10.0, 2000.0, SEED + k as u64).unwrap();
        assert_eq!(h.bins.len(), 200);
        fractions.push((t, h.fraction_within(3.0)));
    }
    let hist_ok = fractions.iter().all(|&(_, f)| f >= 0.99);

    // The ring branch evaluated on each boundary must agree with the branch
    // on the other side of it.
    let ring = |ux: f64, d: f64| {
        lambda0 * ((u0 * u0 - ux * ux - d * d) / (2.0 * ux * d)).clamp(-1.0, 1.0).acos() / PI
    };
    let mut continuity: f64 = 0.0;
    for t in [1.0, 20.0, 39.0, 40.0, 41.0, 50.0, 200.0] {
        let d: f64 = v * t;
        let outer = u0 + d;
        continuity = continuity.max((ring(outer, d) - lambda0).abs());
        continuity = continuity.max((interferer_density(outer * (1.0 + 1e-15), u0, t, v, lambda0).unwrap() - lambda0).abs());
        let inner: f64 = (u0 - d).abs();
        if inner > 0.0 {
            let inside = if d > u0 { lambda0 } else { 0.0 };
            continuity = continuity.max((ring(inner, d) - inside).abs());
        }
    }
    let cont_ok = continuity <= 1e-12 * lambda0;
    let pass = hist_ok && cont_ok && started.elapsed().as_secs_f64() < 120.0;
    let detail = format!(
        "bins within 3 sigma {} (need >= 0.99), boundary gap {:.2e} x lambda0 (tol 1e-12)",
        fractions
            .iter()
            .map(|(t, f)| format!("t={t}:{f:.3}"))
            .collect::<Vec<_>>()
            .join(" "),
        continuity / lambda0
    );
    report(2, "density histogram", pass, &detail, started);
    assert!(pass);
}

#[test]
fn displaced_ppp_region_counts() {
    let started = Instant::now();
    let layout = SectorLayout {
        radius: 4000.0,
        rings: 4,
        sectors: 5,
    };
    let test = displaced_ppp_sector_counts(
        1e-6,
        &MobilitySpec::straight_line(12.5),
        100.0,
        layout,
        2000,
        SEED,
    )
    .unwrap();
    let pass = test.regions.len() == 20 && test.pooled.p_value > 0.01;
    let detail = format!(
        "pooled chi2 = {:.1} on {} dof, p = {:.3} (need > 0.01); smallest per-region p = {:.3}",
        test.pooled.statistic,
        test.pooled.dof,
        test.pooled.p_value,
        test.min_p_value()
    );
    report(3, "displaced PPP stays Poisson", pass, &detail, started);
    assert!(pass);
}

#[test]
fn cross_engine_coverage() {
    let started = Instant::now();
    let params = reference();
    let mc = MonteCarlo::new(params, ServiceModel::UeDependent, SimulationWindow::for_times(&TIMES).unwrap(), SEED);
    let samples = mc.sinr_samples(&TIMES, 100_000).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut lines = Vec::new();
    for (k, &t) in TIMES.iter().enumerate() {
        for g_db in GAMMA_DB {
            let g = db_to_linear(g_db);
            let exact = coverage_model2(g, t, &params).unwrap().value;
            let est = coverage_from_sinr(&samples[k], g);
            let allowed = (2.0 * est.half_width_95).max(1e-3);
            let diff = (exact - est.mean).abs();
            worst_excess = worst_excess.max(diff / allowed);
            lines.push(format!("t={t} g={g_db}dB |d|={diff:.4}/{allowed:.4}"));
        }
    }
    let pass = worst_excess <= 1.0 && started.elapsed().as_secs_f64() < 600.0;
    let detail = format!("worst |diff|/allowed = {worst_excess:.3}; {}", lines.join(", "));
    report(4, "analytic vs Monte Carlo coverage", pass, &detail, started);
    assert!(pass);
}

#[test]
fn collapse_at_time_zero() {
    let started = Instant::now();
    let params = reference();
    let mut worst: f64 = 0.0;
    for g_db in gamma_grid_db(20, -10.0, 20.0) {
        let g = db_to_linear(g_db);
        let a = coverage_model2(g, 0.0, &params).unwrap().value;
        let b = coverage_model1(g, &params).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    let pass = worst <= 1e-8;
    report(5, "t = 0 collapse", pass, &format!("max |model2(t=0) - model1| = {worst:.2e} over 20 thresholds, tol 1e-8"), started);
    assert!(pass);
}

#[test]
fn model2_dominates_model1() {
    let started = Instant::now();
    let params = reference();
    let mut worst = f64::INFINITY;
    let mut points = 0;
    for g_db in gamma_grid_db(7, -10.0, 20.0).into_iter().chain(GAMMA_DB) {
        let g = db_to_linear(g_db);
        let base = coverage_model1(g, &params).unwrap().value;
        for t in [5.0, 20.0, 50.0, 100.0, 200.0] {
            worst = worst.min(coverage_model2(g, t, &params).unwrap().value - base);
            points += 1;
        }
    }
    let pass = worst >= 0.0;
    report(6, "model 2 dominates model 1", pass, &format!("min(model2 - model1) = {worst:.4e} over {points} points with t > 0"), started);
    assert!(pass);
}

#[test]
fn rate_orderings() {
    let started = Instant::now();
    let with = |alpha: f64, h: f64| NetworkParams::builder().alpha(alpha).height(h).build().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [0.0, 100.0] {
        let model = ServiceModel::UeDependent;
        let hi_alpha = rate(t, model, &with(3.5, 100.0)).unwrap();
        let lo_alpha = rate(t, model, &with(2.5, 100.0)).unwrap();
        let low_h = rate(t, model, &with(3.0, 100.0)).unwrap();
        let high_h = rate(t, model, &with(3.0, 200.0)).unwrap();
        let alpha_gap = hi_alpha.value - lo_alpha.value;
        let h_gap = low_h.value - high_h.value;
        pass &= alpha_gap > hi_alpha.error + lo_alpha.error;
        pass &= h_gap > low_h.error + high_h.error;
        parts.push(format!(
            "t={t}: R(a=3.5)-R(a=2.5)={alpha_gap:.4} (err {:.1e}), R(h=100)-R(h=200)={h_gap:.4} (err {:.1e})",
            hi_alpha.error + lo_alpha.error,
            low_h.error + high_h.error
        ));
    }
    report(7, "rate orderings in alpha and height", pass, &parts.join("; "), started);
    assert!(pass);
}

#[test]
fn interference_limited() {
    let started = Instant::now();
    let params = reference();
    let quiet = params.without_noise();
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, ServiceModel::UeIndependent);
    for model in ServiceModel::ALL {
        for t in TIMES {
            for g_db in GAMMA_DB {
                let g = db_to_linear(g_db);
                let a = analytic::coverage(g, t, model, &params).unwrap().value;
                let b = analytic::coverage(g, t, model, &quiet).unwrap().value;
                let rel = (b - a).abs() / b;
                if rel > worst {
                    worst = rel;
                    at = (t, g_db, model);
                }
            }
        }
    }
    let pass = worst < 0.05;
    let detail = format!(
        "max relative change from noise = {:.2}% at t={} g={}dB {} (need < 5%)",
        100.0 * worst,
        at.0,
        at.1,
        at.2
    );
    report(8, "interference limited", pass, &detail, started);
    assert!(pass);
}

#[test]
fn random_mobility_rate_bound() {
    let started = Instant::now();
    let params = reference();
    let times = [25.0, 50.0, 100.0];
    let window = SimulationWindow::for_times(&times).unwrap();
    let base = MonteCarlo::new(params, ServiceModel::UeDependent, window, SEED);
    let straight = base.sinr_samples(&times, 100_000).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for mobility in [
        MobilitySpec::random_walk(params.speed(), MobilitySpec::DEFAULT_RW_EPOCH),
        MobilitySpec::random_waypoint(params.speed(), MobilitySpec::DEFAULT_RWP_RADIUS),
    ] {
        let samples = base.with_mobility(mobility).sinr_samples(&times, 100_000).unwrap();
        for (k, t) in times.iter().enumerate() {
            let sl = rate_from_sinr(&straight[k]);
            let other = rate_from_sinr(&samples[k]);
            let ci = sl.half_width_95.max(other.half_width_95);
            let ok = other.mean >= sl.mean - 2.0 * ci;
            pass &= ok;
            parts.push(format!(
                "{} t={t}: {:.4} vs {:.4} (ci {:.4})",
                mobility.kind.as_str(),
                other.mean,
                sl.mean,
                ci
            ));
        }
    }
    report(9, "random mobility does not lower the rate", pass, &parts.join("; "), started);
    assert!(pass);
}

#[test]
fn noise_dimensioning() {
    let started = Instant::now();
    let (lambda0, h, alpha, p_edge) = (1e-6, 100.0, 3.0, 0.05);
    let n0 = noise_power(lambda0, h, alpha, p_edge).unwrap();
    // Ground radius whose PPP void probability is p_edge, lifted to the DBS plane.
    let ground = (-p_edge.ln() / (PI * lambda0)).sqrt();
    let r = ground.hypot(h);
    let edge = cell_edge_distance(lambda0, h, p_edge).unwrap();
    let snr = r.powf(-alpha) / n0;
    let pass = (snr - 1.0).abs() <= 1e-9 && (edge - r).abs() <= 1e-9 * r;
    report(10, "noise dimensioning", pass, &format!("N0 = {n0:.6e} W, edge SNR = {snr:.15} (tol 1e-9)"), started);
    assert!(pass);
}

#[test]
fn rate_integration_path() {
    let started = Instant::now();
    let r = rate_from_coverage(|g| Ok((-g).exp())).unwrap();
    let pass = (r.value - 0.596347).abs() <= 1e-5;
    report(11, "rate integration path", pass, &format!("R = {:.9} for P_C = exp(-g), want 0.596347 +- 1e-5", r.value), started);
    assert!(pass);
}
