//! Monte Carlo oracle for the coverage and rate integrals.
//!
//! Every trial draws a fresh PPP deployment, moves the DBSs to the requested
//! instant and draws unit-mean exponential fading on every link. Trials are
//! seeded from `(master seed, trial index)` so results do not depend on how
//! rayon splits the work.
//!
//! DBSs are deployed on a disc of radius `eval_radius + v t_max`. Only DBSs
//! within `eval_radius` of `o'` at the evaluation instant contribute
//! explicitly; the guard band makes that set exact because no DBS travels
//! farther than `v t`. Interference from beyond `eval_radius`, where the
//! field is homogeneous, enters through its mean
//! `2π λ0 P (R² + h²)^(1 - α/2) / (α - 2)`.

mod histogram;
mod mobility;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

pub use histogram::{
    HistogramBin, RegionCountTest,
    displaced_annulus_histogram, displaced_ppp_sector_counts, serving_distances, RadialHistogram,
    SectorLayout,
};
pub use mobility::{homing_position, MobilityKind, MobilitySpec};

use crate::error::{invalid, Error, Result};
use crate::params::{NetworkParams, ServiceModel};
use crate::stats::pairwise_sum;

/// Ground-plane position relative to `o'`, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const DEPLOY_STREAM: u64 = 0x6465_706c_6f79;
const FADING_STREAM: u64 = 0x6661_6469_6e67;

/// Independent ChaCha stream for `(master, purpose, tag)`, positioned at `index`.
pub(crate) fn substream(master: u64, purpose: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let key = mix(master ^ mix(purpose.wrapping_add(mix(tag))));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// One DBS: its start, current position, and the seed of its trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Drone {
    pub start: Point,
    pub position: Point,
    pub seed: u64,
}

/// DBS ground projections at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub drones: Vec<Drone>,
    /// Index into `drones` of the DBS the UE associated with at `t = 0`.
    pub serving: usize,
    pub rng_seed: u64,
    /// Empty deployments redrawn before this one.
    pub retries: u32,
}

impl Snapshot {
    pub fn serving(&self) -> Point {
        self.drones[self.serving].position
    }

    pub fn interferers(&self) -> impl Iterator<Item = Point> + '_ {
        self.drones
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.serving)
            .map(|(_, d)| d.position)
    }

    /// Index of the DBS currently nearest to `o'`.
    pub fn nearest(&self) -> usize {
        nearest_index(self.drones.iter().map(|d| d.position))
    }
}

fn nearest_index(points: impl Iterator<Item = Point>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.enumerate() {
        let r = p.norm_sq();
        if r < best.1 {
            best = (i, r);
        }
    }
    best.0
}

/// Homogeneous PPP of density `lambda0` on the disc of radius `radius`,
/// redrawn while empty. The serving DBS is the point nearest to `o'`.
pub fn sample_deployment(lambda0: f64, radius: f64, seed: u64) -> Result<Snapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_deployment_with(lambda0, radius, &mut rng, seed)
}

fn sample_deployment_with<R: Rng>(
    lambda0: f64,
    radius: f64,
    rng: &mut R,
    rng_seed: u64,
) -> Result<Snapshot> {
    if !(lambda0 > 0.0 && radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "deployment needs lambda0 > 0 and a finite radius > 0, got {lambda0}, {radius}"
        )));
    }
    let mean = lambda0 * PI * radius * radius;
    let count_dist =
        Poisson::new(mean).map_err(|e| Error::Domain(format!("Poisson mean {mean}: {e}")))?;
    let mut retries = 0;
    loop {
        let n = count_dist.sample(rng) as usize;
        if n == 0 {
            retries += 1;
            if retries > 10_000 {
                return Err(Error::Domain(format!(
                    "deployment stayed empty after {retries} draws (mean count {mean})"
                )));
            }
            continue;
        }
        let drones: Vec<Drone> = (0..n)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                let p = Point::new(r * theta.cos(), r * theta.sin());
                Drone {
                    start: p,
                    position: p,
                    seed: rng.random(),
                }
            })
            .collect();
        let serving = nearest_index(drones.iter().map(|d| d.position));
        return Ok(Snapshot {
            time: 0.0,
            drones,
            serving,
            rng_seed,
            retries,
        });
    }
}

/// Moves every DBS forward by `dt`.
///
/// Interferers follow `mobility`. The originally serving DBS flies a straight
/// line at its own random heading under the UE-independent model, and homes
/// in on `o'` under the UE-dependent model.
pub fn advance(
    snapshot: &Snapshot,
    mobility: &MobilitySpec,
    model: ServiceModel,
    serving_speed: f64,
    dt: f64,
) -> Result<Snapshot> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    let time = snapshot.time + dt;
    let mut next = snapshot.clone();
    next.time = time;
    move_drones(&mut next.drones, snapshot.serving, mobility, model, serving_speed, time);
    Ok(next)
}

fn move_drones(
    drones: &mut [Drone],
    serving: usize,
    mobility: &MobilitySpec,
    model: ServiceModel,
    serving_speed: f64,
    time: f64,
) {
    let serving_line = MobilitySpec::straight_line(serving_speed);
    for (i, d) in drones.iter_mut().enumerate() {
        d.position = if i == serving {
            match model {
                ServiceModel::UeIndependent => serving_line.position(d.start, d.seed, time),
                ServiceModel::UeDependent => homing_position(d.start, serving_speed, time),
            }
        } else {
            mobility.position(d.start, d.seed, time)
        };
    }
}

/// Sample mean with a normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalEstimate {
    pub mean: f64,
    /// `1.96 · s / sqrt(n)` with the unbiased sample standard deviation `s`.
    pub half_width_95: f64,
    pub n_trials: usize,
}

impl EmpiricalEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                half_width_95: f64::NAN,
                n_trials: 0,
            };
        }
        let mean = pairwise_sum(samples) / n as f64;
        let half_width_95 = if n > 1 {
            let sq: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = pairwise_sum(&sq) / (n - 1) as f64;
            1.96 * var.sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            half_width_95,
            n_trials: n,
        }
    }
}

/// Fraction of SINR samples at or above `gamma`.
pub fn coverage_from_sinr(sinr: &[f64], gamma: f64) -> EmpiricalEstimate {
    let hits: Vec<f64> = sinr.iter().map(|&s| if s >= gamma { 1.0 } else { 0.0 }).collect();
    EmpiricalEstimate::from_samples(&hits)
}

/// Mean of `ln(1 + SINR)`.
pub fn rate_from_sinr(sinr: &[f64]) -> EmpiricalEstimate {
    let r: Vec<f64> = sinr.iter().map(|&s| s.ln_1p()).collect();
    EmpiricalEstimate::from_samples(&r)
}

/// Evaluation disc and time horizon of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationWindow {
    /// DBSs farther than this from `o'` contribute their mean interference only.
    pub eval_radius: f64,
    /// Largest evaluation time; sizes the guard band.
    pub t_max: f64,
}

impl SimulationWindow {
    pub const DEFAULT_EVAL_RADIUS: f64 = 10_000.0;

    pub fn new(eval_radius: f64, t_max: f64) -> Result<Self> {
        if !(eval_radius > 0.0 && eval_radius.is_finite()) {
            return Err(invalid("eval_radius", format!("must be finite and > 0, got {eval_radius}")));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(invalid("t_max", format!("must be finite and >= 0, got {t_max}")));
        }
        Ok(Self { eval_radius, t_max })
    }

    pub fn for_times(times: &[f64]) -> Result<Self> {
        let t_max = times.iter().copied().fold(0.0, f64::max);
        Self::new(Self::DEFAULT_EVAL_RADIUS, t_max)
    }

    pub fn deployment_radius(&self, v: f64) -> f64 {
        self.eval_radius + v * self.t_max
    }
}

/// Mean interference power from a homogeneous field beyond ground distance `r`.
pub fn far_field_mean_interference(params: &NetworkParams, r: f64) -> f64 {
    let alpha = params.alpha();
    let h = params.height();
    2.0 * PI * params.lambda0() * params.p_tx() * (r * r + h * h).powf(1.0 - alpha / 2.0)
        / (alpha - 2.0)
}

/// Standard deviation of the far-field interference that the mean
/// replacement ignores (Rayleigh fading, homogeneous field beyond `r`).
pub fn far_field_interference_std(params: &NetworkParams, r: f64) -> f64 {
    let alpha = params.alpha();
    let h = params.height();
    // E[h²] = 2 for unit-mean exponential fading.
    let var = 2.0 * PI * params.lambda0() * 2.0 * params.p_tx().powi(2)
        * (r * r + h * h).powf(1.0 - alpha)
        / (2.0 * (alpha - 1.0));
    var.sqrt()
}

/// A configured Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub params: NetworkParams,
    pub model: ServiceModel,
    pub mobility: MobilitySpec,
    pub window: SimulationWindow,
    pub seed: u64,
    /// Off drops every interferer, near and far (noise-only checks).
    pub interference: bool,
}

impl MonteCarlo {
    /// Straight-line interferers at the network speed.
    pub fn new(params: NetworkParams, model: ServiceModel, window: SimulationWindow, seed: u64) -> Self {
        Self {
            params,
            model,
            mobility: MobilitySpec::straight_line(params.speed()),
            window,
            seed,
            interference: true,
        }
    }

    pub fn with_mobility(mut self, mobility: MobilitySpec) -> Self {
        self.mobility = mobility;
        self
    }

    pub fn without_interference(mut self) -> Self {
        self.interference = false;
        self
    }

    fn deployment_radius(&self) -> f64 {
        self.window
            .deployment_radius(self.params.speed().max(self.mobility.v))
    }

    /// Deployment of trial `trial`; identical across models and mobility kinds.
    pub fn deployment(&self, trial: u64) -> Result<Snapshot> {
        let mut rng = substream(self.seed, DEPLOY_STREAM, 0, trial);
        sample_deployment_with(self.params.lambda0(), self.deployment_radius(), &mut rng, trial)
    }

    /// SINR of trial `trial` at every time in `times` (linear).
    pub fn trial_sinr(&self, trial: u64, times: &[f64]) -> Result<Vec<f64>> {
        let snapshot = self.deployment(trial)?;
        let mut drones = snapshot.drones.clone();
        let p = &self.params;
        let half_alpha = p.alpha() / 2.0;
        let h2 = p.height() * p.height();
        let eval_sq = self.window.eval_radius * self.window.eval_radius;
        let far = if self.interference {
            far_field_mean_interference(p, self.window.eval_radius)
        } else {
            0.0
        };
        let path_gain = |q: Point| p.p_tx() * (q.norm_sq() + h2).powf(-half_alpha);

        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t > self.window.t_max * (1.0 + 1e-12) || !(t >= 0.0) {
                return Err(Error::Domain(format!(
                    "t = {t} outside the simulated window [0, {}]",
                    self.window.t_max
                )));
            }
            move_drones(
                &mut drones,
                snapshot.serving,
                &self.mobility,
                self.model,
                p.speed(),
                t,
            );
            let serving = match self.model {
                ServiceModel::UeDependent => snapshot.serving,
                ServiceModel::UeIndependent => nearest_index(drones.iter().map(|d| d.position)),
            };
            let mut fading = substream(self.seed, FADING_STREAM, t.to_bits(), trial);
            let mut signal = 0.0;
            let mut near = 0.0;
            for (i, d) in drones.iter().enumerate() {
                let g: f64 = Exp1.sample(&mut fading);
                if i == serving {
                    signal = g * path_gain(d.position);
                } else if self.interference && d.position.norm_sq() <= eval_sq {
                    near += g * path_gain(d.position);
                }
            }
            out.push(signal / (near + far + p.n0()));
        }
        Ok(out)
    }

    /// SINR samples indexed `[time][trial]`.
    pub fn sinr_samples(&self, times: &[f64], n_trials: usize) -> Result<Vec<Vec<f64>>> {
        if n_trials == 0 {
            return Err(invalid("n_trials", "must be >= 1"));
        }
        self.mobility.validate()?;
        let per_trial: Vec<Vec<f64>> = (0..n_trials as u64)
            .into_par_iter()
            .map(|trial| self.trial_sinr(trial, times))
            .collect::<Result<_>>()?;
        Ok((0..times.len())
            .map(|k| per_trial.iter().map(|row| row[k]).collect())
            .collect())
    }

    pub fn coverage(&self, gamma: f64, t: f64, n_trials: usize) -> Result<EmpiricalEstimate> {
        let s = self.sinr_samples(&[t], n_trials)?;
        Ok(coverage_from_sinr(&s[0], gamma))
    }

    pub fn rate(&self, t: f64, n_trials: usize) -> Result<EmpiricalEstimate> {
        let s = self.sinr_samples(&[t], n_trials)?;
        Ok(rate_from_sinr(&s[0]))
    }
}

/// Empirical `P[SINR(t) >= γ]` with the default evaluation window.
pub fn empirical_coverage(
    gamma: f64,
    t: f64,
    model: ServiceModel,
    mobility: &MobilitySpec,
    params: &NetworkParams,
    n_trials: usize,
    seed: u64,
) -> Result<EmpiricalEstimate> {
    MonteCarlo::new(*params, model, SimulationWindow::for_times(&[t])?, seed)
        .with_mobility(*mobility)
        .coverage(gamma, t, n_trials)
}

/// Empirical `E[ln(1 + SINR(t))]` with the default evaluation window.
pub fn empirical_rate(
    t: f64,
    model: ServiceModel,
    mobility: &MobilitySpec,
    params: &NetworkParams,
    n_trials: usize,
    seed: u64,
) -> Result<EmpiricalEstimate> {
    MonteCarlo::new(*params, model, SimulationWindow::for_times(&[t])?, seed)
        .with_mobility(*mobility)
        .rate(t, n_trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use crate::stats::ks_statistic;

    fn reference() -> NetworkParams {
        NetworkParams::reference()
    }

    #[test]
    fn deployment_mean_count() {
        let n = 2000;
        let counts: Vec<f64> = (0..n)
            .map(|s| sample_deployment(1e-6, 10_000.0, s).unwrap().drones.len() as f64)
            .collect();
        let est = EmpiricalEstimate::from_samples(&counts);
        // Poisson mean λ0 π R² = 314.159..., sd sqrt(314)/sqrt(2000) ≈ 0.4
        assert!((est.mean - 100.0 * PI).abs() < 1.6, "{}", est.mean);
    }

    #[test]
    fn serving_is_nearest() {
        for seed in 0..50 {
            let s = sample_deployment(1e-6, 5_000.0, seed).unwrap();
            let u0 = s.serving().norm();
            assert!(s.interferers().all(|p| p.norm() >= u0));
            assert_eq!(s.nearest(), s.serving);
        }
    }

    #[test]
    fn empty_deployments_are_redrawn() {
        // Mean count 0.05: most first draws are empty.
        let s = sample_deployment(1e-6, (0.05 / (PI * 1e-6)).sqrt(), 4).unwrap();
        assert!(!s.drones.is_empty());
        let retried = (0..50)
            .map(|seed| sample_deployment(1e-6, 126.0, seed).unwrap().retries)
            .sum::<u32>();
        assert!(retried > 0);
    }

    #[test]
    fn serving_distance_follows_contact_law() {
        let cdf = |u: f64| 1.0 - (-PI * 1e-6 * u * u).exp();
        let big = serving_distances(1e-6, 6000.0, 200_000, 7).unwrap();
        let ks = ks_statistic(&big, cdf);
        assert!(ks < 0.005, "{ks}");
        let d = serving_distances(1e-6, 6000.0, 10_000, 0).unwrap();
        let ks = ks_statistic(&d, cdf);
        assert!(ks < 0.01, "{ks}");
    }

    #[test]
    fn model2_serving_arrives() {
        let mut s = sample_deployment(1e-6, 5000.0, 1).unwrap();
        let idx = s.serving;
        s.drones[idx].start = Point::new(500.0, 0.0);
        s.drones[idx].position = Point::new(500.0, 0.0);
        let mobility = MobilitySpec::straight_line(12.5);
        let next = advance(&s, &mobility, ServiceModel::UeDependent, 12.5, 40.0).unwrap();
        assert_eq!(next.serving(), Point::new(0.0, 0.0));
        let mid = advance(&s, &mobility, ServiceModel::UeDependent, 12.5, 20.0).unwrap();
        assert!((mid.serving().norm() - 250.0).abs() < 1e-12);
    }

    #[test]
    fn advance_composes() {
        let s = sample_deployment(1e-6, 5000.0, 2).unwrap();
        for mobility in [
            MobilitySpec::straight_line(12.5),
            MobilitySpec::random_walk(12.5, 7.0),
            MobilitySpec::random_waypoint(12.5, 300.0),
        ] {
            for model in ServiceModel::ALL {
                let once = advance(&s, &mobility, model, 12.5, 60.0).unwrap();
                let twice = advance(
                    &advance(&s, &mobility, model, 12.5, 30.0).unwrap(),
                    &mobility,
                    model,
                    12.5,
                    30.0,
                )
                .unwrap();
                for (a, b) in once.drones.iter().zip(&twice.drones) {
                    assert!((a.position - b.position).norm() < 1e-9);
                }
            }
        }
        assert!(advance(&s, &MobilitySpec::straight_line(1.0), ServiceModel::UeDependent, 1.0, 0.0).is_err());
    }

    #[test]
    fn reproducible_regardless_of_pool_size() {
        let mc = MonteCarlo::new(
            reference(),
            ServiceModel::UeDependent,
            SimulationWindow::new(5000.0, 50.0).unwrap(),
            99,
        );
        let a = mc.sinr_samples(&[0.0, 50.0], 300).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| mc.sinr_samples(&[0.0, 50.0], 300).unwrap());
        assert_eq!(a, b);
        let c = MonteCarlo { seed: 100, ..mc }.sinr_samples(&[0.0], 300).unwrap();
        assert_ne!(a[0], c[0]);
    }

    #[test]
    fn tiny_threshold_always_covered() {
        let mc = MonteCarlo::new(
            reference(),
            ServiceModel::UeIndependent,
            SimulationWindow::new(5000.0, 10.0).unwrap(),
            5,
        );
        assert_eq!(mc.coverage(1e-12, 10.0, 500).unwrap().mean, 1.0);
    }

    #[test]
    fn noise_only_small_signal_rate() {
        // No interference, P tiny: E[ln(1 + SNR)] ≈ E[SNR] = (P/N0) E[r0^-α].
        let p = reference().to_builder().p_tx(1e-4).build().unwrap();
        let mc = MonteCarlo::new(p, ServiceModel::UeDependent, SimulationWindow::new(5000.0, 0.0).unwrap(), 8)
            .without_interference();
        let est = mc.rate(0.0, 20_000).unwrap();
        let lambda0 = p.lambda0();
        let mean_gain = integrate(
            |u| 2.0 * PI * lambda0 * u * (-PI * lambda0 * u * u).exp() * (u * u + 1e4).powf(-1.5),
            0.0,
            6000.0,
            Tolerance::new(1e-16, 1e-10),
        )
        .unwrap()
        .value;
        let snr = p.p_tx() * mean_gain / p.n0();
        assert!(snr < 0.1, "{snr}");
        assert!((est.mean - snr).abs() < 2.0 * est.half_width_95 + 0.5 * snr * snr, "{} vs {snr}", est.mean);
    }

    #[test]
    fn estimate_half_width() {
        let e = EmpiricalEstimate::from_samples(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(e.mean, 0.5);
        let s = (1.0f64 / 3.0).sqrt();
        assert!((e.half_width_95 - 1.96 * s / 2.0).abs() < 1e-15);
        assert_eq!(EmpiricalEstimate::from_samples(&[3.0]).half_width_95, 0.0);
    }

    #[test]
    fn far_field_terms() {
        let p = reference();
        // α = 3: 2π λ0 / sqrt(R² + h²)
        let m = far_field_mean_interference(&p, 10_000.0);
        assert!((m - 2.0 * PI * 1e-6 / (1e8f64 + 1e4).sqrt()).abs() < 1e-20);
        assert!(far_field_interference_std(&p, 10_000.0) < 0.05 * m);
    }

    #[test]
    fn rejects_time_outside_window() {
        let mc = MonteCarlo::new(
            reference(),
            ServiceModel::UeDependent,
            SimulationWindow::new(5000.0, 10.0).unwrap(),
            1,
        );
        assert!(mc.sinr_samples(&[20.0], 10).is_err());
        assert!(mc.sinr_samples(&[5.0], 0).is_err());
    }
}
