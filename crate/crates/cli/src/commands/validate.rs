//! Invariant suite: both engines checked against each other and against the
//! properties they must satisfy. Writes a JSON report; any failed check makes
//! the command fail.

use std::f64::consts::PI;

use dronesim_core::analytic::{coverage_model1, coverage_model2, rate};
use dronesim_core::density::{interferer_density, DisplacementKernel};
use dronesim_core::monte_carlo::{
    coverage_from_sinr, displaced_annulus_histogram, displaced_ppp_sector_counts, rate_from_sinr, MonteCarlo,
    SectorLayout, SimulationWindow,
};
use dronesim_core::params::db_to_linear;
use dronesim_core::quadrature::Tolerance;
use dronesim_core::{MobilitySpec, NetworkParams, ServiceModel};
use serde::Serialize;

use super::RunOptions;
use crate::config::ExperimentSpec;
use crate::error::CliResult;
use crate::output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Comparison {
    fn holds(self, statistic: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => statistic <= threshold,
            Comparison::AtLeast => statistic >= threshold,
            Comparison::Above => statistic > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, statistic: f64, comparison: Comparison, threshold: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            statistic,
            comparison,
            threshold,
            passed: comparison.holds(statistic, threshold),
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub n_trials: usize,
    pub histogram_points: u64,
    pub params: NetworkParams,
    pub checks: Vec<Check>,
    pub passed: bool,
}

const HIST_BIN_M: f64 = 10.0;
const HIST_RANGE_M: f64 = 2000.0;
const LEMMA_TRIALS_MAX: usize = 2000;

pub(super) fn run(spec: &ExperimentSpec, opts: &RunOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let report = build_report(spec, opts)?;
    out.save("validation_report.json", serde_json::to_string_pretty(&report)? + "\n")?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("check {} failed: {}", c.name, c.detail))
        .collect())
}

pub fn build_report(spec: &ExperimentSpec, opts: &RunOptions) -> CliResult<ValidationReport> {
    let p = spec.params;
    let seed = spec.mc.seed;
    let mut checks = vec![kernel_normalization()?];
    checks.extend(density_histograms(spec, opts.corrupt_density)?);
    checks.push(density_continuity(spec));
    checks.extend(cross_engine(spec)?);
    checks.push(displaced_ppp(spec)?);
    checks.push(collapse_at_zero(&p)?);
    checks.push(dominance(spec)?);
    checks.extend(orderings(spec)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        seed,
        n_trials: spec.mc.n_trials,
        histogram_points: spec.mc.histogram_points,
        params: p,
        checks,
        passed,
    })
}

fn kernel_normalization() -> CliResult<Check> {
    // Additive-recurrence (golden ratio) pairs cover the square evenly.
    const PHI1: f64 = 0.618_033_988_749_894_9;
    const PHI2: f64 = 0.754_877_666_246_692_8;
    let tol = Tolerance::new(1e-10, 1e-10);
    let mut worst: f64 = 0.0;
    for i in 1..=100 {
        let ux = 1.0 + 4999.0 * (i as f64 * PHI1).fract();
        let d = 1.0 + 4999.0 * (i as f64 * PHI2).fract();
        let mass = DisplacementKernel::new(ux, d)?.normalization(tol)?.value;
        worst = worst.max((mass - 1.0).abs());
    }
    Ok(Check::new(
        "kernel_normalization",
        worst,
        Comparison::AtMost,
        1e-6,
        format!("max |integral - 1| over 100 (u_x, d) pairs = {worst:.3e}"),
    ))
}

fn density_histograms(spec: &ExperimentSpec, corrupt: bool) -> CliResult<Vec<Check>> {
    let p = spec.params;
    let u0 = spec.sweep.u0_m;
    let n = spec.mc.histogram_points.max(1000);
    let mut checks = Vec::new();
    for (k, &t) in spec.sweep.t_s.iter().enumerate() {
        let mut h = displaced_annulus_histogram(u0, p.travel(t), n, HIST_BIN_M, HIST_RANGE_M, spec.mc.seed.wrapping_add(k as u64))?;
        if corrupt {
            h = h.rescore(|u| interferer_density(u, u0, 0.5 * t, p.speed(), 1.0).unwrap_or(f64::NAN))?;
        }
        let within = h.fraction_within(3.0);
        checks.push(Check::new(
            format!("density_histogram_t{t}"),
            within,
            Comparison::AtLeast,
            0.99,
            format!("{n} displaced points, share of 10 m bins within 3 sigma = {within:.4}"),
        ));
    }
    Ok(checks)
}

fn density_continuity(spec: &ExperimentSpec) -> Check {
    let p = spec.params;
    let (u0, lambda0) = (spec.sweep.u0_m, p.lambda0());
    let ring = |ux: f64, d: f64| lambda0 * ((u0 * u0 - ux * ux - d * d) / (2.0 * ux * d)).clamp(-1.0, 1.0).acos() / PI;
    let mut gap: f64 = 0.0;
    for &t in &spec.sweep.t_s {
        let d = p.travel(t);
        if d == 0.0 {
            continue;
        }
        gap = gap.max((ring(u0 + d, d) - lambda0).abs());
        let inner = (u0 - d).abs();
        if inner > 0.0 {
            let inside = if d > u0 { lambda0 } else { 0.0 };
            gap = gap.max((ring(inner, d) - inside).abs());
        }
    }
    Check::new(
        "density_continuity",
        gap / lambda0,
        Comparison::AtMost,
        1e-12,
        format!("largest jump at a region boundary = {:.3e} lambda0", gap / lambda0),
    )
}

fn cross_engine(spec: &ExperimentSpec) -> CliResult<Vec<Check>> {
    let p = spec.params;
    let times = &spec.sweep.t_s;
    let window = SimulationWindow::new(spec.mc.eval_radius_m, times.iter().copied().fold(0.0, f64::max))?;
    let mc = MonteCarlo::new(p, ServiceModel::UeDependent, window, spec.mc.seed);
    let samples = mc.sinr_samples(times, spec.mc.n_trials)?;

    let (mut cov_worst, mut cov_at) = (0.0f64, String::new());
    let (mut rate_worst, mut rate_at) = (0.0f64, String::new());
    for (k, &t) in times.iter().enumerate() {
        for &g in &spec.sweep.gamma_db {
            let exact = coverage_model2(db_to_linear(g), t, &p)?.value;
            let est = coverage_from_sinr(&samples[k], db_to_linear(g));
            let ratio = (exact - est.mean).abs() / (2.0 * est.half_width_95).max(1e-3);
            if ratio >= cov_worst {
                cov_worst = ratio;
                cov_at = format!("t = {t} s, gamma = {g} dB: analytic {exact:.5}, MC {:.5} +- {:.5}", est.mean, est.half_width_95);
            }
        }
        let exact = rate(t, ServiceModel::UeDependent, &p)?.value;
        let est = rate_from_sinr(&samples[k]);
        let ratio = (exact - est.mean).abs() / (2.0 * est.half_width_95).max(5e-3);
        if ratio >= rate_worst {
            rate_worst = ratio;
            rate_at = format!("t = {t} s: analytic {exact:.5}, MC {:.5} +- {:.5}", est.mean, est.half_width_95);
        }
    }
    Ok(vec![
        Check::new(
            "coverage_mc_vs_analytic",
            cov_worst,
            Comparison::AtMost,
            1.0,
            format!("worst |diff| / max(2 CI, 1e-3) at {cov_at}"),
        ),
        Check::new(
            "rate_mc_vs_analytic",
            rate_worst,
            Comparison::AtMost,
            1.0,
            format!("worst |diff| / max(2 CI, 5e-3) at {rate_at}"),
        ),
    ])
}

fn displaced_ppp(spec: &ExperimentSpec) -> CliResult<Check> {
    let p = spec.params;
    let layout = SectorLayout {
        radius: 4000.0,
        rings: 4,
        sectors: 5,
    };
    let trials = spec.mc.n_trials.min(LEMMA_TRIALS_MAX) as u64;
    let test = displaced_ppp_sector_counts(
        p.lambda0(),
        &MobilitySpec::straight_line(p.speed()),
        100.0,
        layout,
        trials,
        spec.mc.seed,
    )?;
    Ok(Check::new(
        "displaced_ppp_counts",
        test.pooled.p_value,
        Comparison::Above,
        0.01,
        format!(
            "20 regions over {trials} deployments at t = 100 s: pooled chi2 = {:.2} on {} dof",
            test.pooled.statistic, test.pooled.dof
        ),
    ))
}

fn gamma_grid_db() -> impl Iterator<Item = f64> {
    (0..20).map(|i| -10.0 + 30.0 * i as f64 / 19.0)
}

fn collapse_at_zero(p: &NetworkParams) -> CliResult<Check> {
    let mut worst: f64 = 0.0;
    for g in gamma_grid_db().map(db_to_linear) {
        worst = worst.max((coverage_model2(g, 0.0, p)?.value - coverage_model1(g, p)?.value).abs());
    }
    Ok(Check::new(
        "time_zero_collapse",
        worst,
        Comparison::AtMost,
        1e-8,
        format!("max |model2(t = 0) - model1| over 20 thresholds = {worst:.3e}"),
    ))
}

fn dominance(spec: &ExperimentSpec) -> CliResult<Check> {
    let p = spec.params;
    let mut worst = f64::INFINITY;
    for &g in &spec.sweep.gamma_db {
        let g = db_to_linear(g);
        let base = coverage_model1(g, &p)?.value;
        for &t in spec.sweep.t_s.iter().filter(|t| **t > 0.0) {
            worst = worst.min(coverage_model2(g, t, &p)?.value - base);
        }
    }
    if worst.is_infinite() {
        worst = 0.0;
    }
    Ok(Check::new(
        "model2_dominates_model1",
        worst,
        Comparison::AtLeast,
        0.0,
        format!("min over grid points with t > 0 of model2 - model1 = {worst:.4e}"),
    ))
}

fn orderings(spec: &ExperimentSpec) -> CliResult<Vec<Check>> {
    let model = ServiceModel::UeDependent;
    let mut alpha_margin = f64::INFINITY;
    let mut height_margin = f64::INFINITY;
    for t in [0.0, 100.0] {
        let a_hi = rate(t, model, &spec.params_for(100.0, 3.5)?)?;
        let a_lo = rate(t, model, &spec.params_for(100.0, 2.5)?)?;
        let h_lo = rate(t, model, &spec.params_for(100.0, 3.0)?)?;
        let h_hi = rate(t, model, &spec.params_for(200.0, 3.0)?)?;
        alpha_margin = alpha_margin.min(a_hi.value - a_lo.value - a_hi.error - a_lo.error);
        height_margin = height_margin.min(h_lo.value - h_hi.value - h_lo.error - h_hi.error);
    }
    Ok(vec![
        Check::new(
            "rate_increases_with_alpha",
            alpha_margin,
            Comparison::Above,
            0.0,
            format!("min over t in {{0, 100}} s of R(3.5) - R(2.5) - quadrature error = {alpha_margin:.4}"),
        ),
        Check::new(
            "rate_decreases_with_height",
            height_margin,
            Comparison::Above,
            0.0,
            format!("min over t in {{0, 100}} s of R(100 m) - R(200 m) - quadrature error = {height_margin:.4}"),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Comparison::AtMost.holds(1.0, 1.0));
        assert!(Comparison::AtLeast.holds(1.0, 1.0));
        assert!(!Comparison::Above.holds(1.0, 1.0));
        assert!(!Comparison::AtMost.holds(f64::NAN, 1.0));
    }

    #[test]
    fn check_serializes_operator() {
        let c = Check::new("x", 0.5, Comparison::AtMost, 1.0, String::new());
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"comparison\":\"<=\""));
        assert!(json.contains("\"passed\":true"));
    }
}
