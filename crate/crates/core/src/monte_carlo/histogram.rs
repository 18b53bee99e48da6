//! Point-cloud checks of the displaced interferer field.
//!
//! [`displaced_annulus_histogram`] scatters a fixed number of points
//! uniformly outside the exclusion disc, moves each by `d` at a uniform
//! angle and bins the resulting ground distances. Conditioned on the total,
//! the count in each bin is binomial with a probability given by the
//! displaced density, so expected counts and standard deviations are exact.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{sample_deployment, substream, MobilitySpec, Point};
use crate::density::density_fraction;
use crate::error::{invalid, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::stats::{chi_square_p_value, poisson_goodness_of_fit, ChiSquareTest};

const HISTOGRAM_STREAM: u64 = 0x6869_7374;
const LEMMA_STREAM: u64 = 0x6c65_6d6d_61;
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub expected: f64,
    /// Binomial standard deviation of `count`.
    pub sigma: f64,
}

impl HistogramBin {
    pub fn z_score(&self) -> f64 {
        let diff = self.count as f64 - self.expected;
        if self.sigma > 0.0 {
            diff / self.sigma
        } else if diff.abs() < 0.5 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Radial histogram of displaced points against the displaced density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialHistogram {
    pub u0: f64,
    pub d: f64,
    pub n_points: u64,
    /// Outer edge of the binned range.
    pub r_max: f64,
    pub bins: Vec<HistogramBin>,
}

impl RadialHistogram {
    pub const CSV_HEADER: &'static str = "bin_lo_m,bin_hi_m,count,expected";

    /// Share of bins whose count lies within `k` standard deviations.
    pub fn fraction_within(&self, k: f64) -> f64 {
        let ok = self.bins.iter().filter(|b| b.z_score().abs() <= k).count();
        ok as f64 / self.bins.len() as f64
    }

    pub fn max_abs_z(&self) -> f64 {
        self.bins.iter().map(|b| b.z_score().abs()).fold(0.0, f64::max)
    }

    /// Same counts scored against another density, given as a fraction of
    /// `λ0` at each ground distance. Used as a negative control.
    pub fn rescore<F: Fn(f64) -> f64>(&self, fraction: F) -> Result<RadialHistogram> {
        let counts = self.bins.iter().map(|b| (b.lo, b.hi, b.count));
        score(self.u0, self.d, self.n_points, self.r_max, counts, fraction)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for b in &self.bins {
            writeln!(out, "{},{},{},{:.10e}", b.lo, b.hi, b.count, b.expected)?;
        }
        Ok(())
    }
}

/// Histogram of `n_points` displaced exclusion-zone-exterior points,
/// `bin_width` bins over `[0, r_max]`.
///
/// Points start uniformly on the annulus `u0 <= u <= r_max + d`, which
/// contains every start position that can end inside `r_max`.
pub fn displaced_annulus_histogram(
    u0: f64,
    d: f64,
    n_points: u64,
    bin_width: f64,
    r_max: f64,
    seed: u64,
) -> Result<RadialHistogram> {
    for (name, value) in [("u0", u0), ("d", d)] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid(name, format!("must be finite and >= 0, got {value}")));
        }
    }
    if !(bin_width > 0.0 && r_max > 0.0 && r_max.is_finite()) {
        return Err(invalid("bin_width", format!("bins of {bin_width} over [0, {r_max}]")));
    }
    if n_points == 0 {
        return Err(invalid("n_points", "must be >= 1"));
    }
    let n_bins = (r_max / bin_width).round() as usize;
    let outer = r_max + d;
    let (lo_sq, hi_sq) = (u0 * u0, outer * outer);
    let n_chunks = n_points.div_ceil(CHUNK);
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = substream(seed, HISTOGRAM_STREAM, 0, chunk);
            let mut local = vec![0u64; n_bins];
            let len = CHUNK.min(n_points - chunk * CHUNK);
            for _ in 0..len {
                let r = (lo_sq + (hi_sq - lo_sq) * rng.random::<f64>()).sqrt();
                let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
                let (s2, c2) = (TAU * rng.random::<f64>()).sin_cos();
                let end = Point::new(r * c + d * c2, r * s + d * s2).norm();
                let k = (end / bin_width) as usize;
                if end < r_max && k < n_bins {
                    local[k] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; n_bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let counts = counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * bin_width, ((k + 1) as f64 * bin_width).min(r_max), c));
    score(u0, d, n_points, r_max, counts, |u| density_fraction(u, u0, d))
}

fn score<I, F>(
    u0: f64,
    d: f64,
    n_points: u64,
    r_max: f64,
    counts: I,
    fraction: F,
) -> Result<RadialHistogram>
where
    I: Iterator<Item = (f64, f64, u64)>,
    F: Fn(f64) -> f64,
{
    let tol = Tolerance::new(1e-9, 1e-12);
    let n = n_points as f64;
    let area = PI * ((r_max + d).powi(2) - u0 * u0);
    let bins = counts
        .map(|(lo, hi, count)| {
            let mass = integrate(|u| TAU * u * fraction(u), lo, hi, tol)?.value;
            let p = (mass / area).clamp(0.0, 1.0);
            Ok(HistogramBin {
                lo,
                hi,
                count,
                expected: n * p,
                sigma: (n * p * (1.0 - p)).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialHistogram {
        u0,
        d,
        n_points,
        r_max,
        bins,
    })
}

/// Disjoint test regions: `rings` equal-width annuli out to `radius`, each
/// cut into `sectors` equal sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorLayout {
    pub radius: f64,
    pub rings: usize,
    pub sectors: usize,
}

impl SectorLayout {
    pub fn len(&self) -> usize {
        self.rings * self.sectors
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self, region: usize) -> f64 {
        let ring = region / self.sectors;
        let w = self.radius / self.rings as f64;
        let (a, b) = (ring as f64 * w, (ring + 1) as f64 * w);
        PI * (b * b - a * a) / self.sectors as f64
    }

    pub fn locate(&self, p: Point) -> Option<usize> {
        let r = p.norm();
        if r >= self.radius {
            return None;
        }
        let ring = ((r / self.radius * self.rings as f64) as usize).min(self.rings - 1);
        let angle = p.y.atan2(p.x).rem_euclid(TAU);
        let sector = ((angle / TAU * self.sectors as f64) as usize).min(self.sectors - 1);
        Some(ring * self.sectors + sector)
    }
}

/// Per-region Poisson fits plus their pooled statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCountTest {
    pub regions: Vec<ChiSquareTest>,
    pub pooled: ChiSquareTest,
}

impl RegionCountTest {
    pub fn min_p_value(&self) -> f64 {
        self.regions.iter().map(|r| r.p_value).fold(1.0, f64::min)
    }
}

/// Region counts of a homogeneous PPP after every point moves a distance
/// `v t` under `mobility`, over `n_trials` independent deployments.
///
/// Regions are disjoint, so their counts are independent under the null and
/// the per-region statistics and degrees of freedom add up.
pub fn displaced_ppp_sector_counts(
    lambda0: f64,
    mobility: &MobilitySpec,
    t: f64,
    layout: SectorLayout,
    n_trials: u64,
    seed: u64,
) -> Result<RegionCountTest> {
    mobility.validate()?;
    if layout.is_empty() {
        return Err(invalid("layout", "needs at least one region"));
    }
    let radius = layout.radius + mobility.v * t;
    let per_trial: Vec<Vec<u64>> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = substream(seed, LEMMA_STREAM, 0, trial).random::<u64>();
            let snapshot = sample_deployment(lambda0, radius, trial_seed)?;
            let mut counts = vec![0u64; layout.len()];
            for drone in &snapshot.drones {
                let p = mobility.position(drone.start, drone.seed, t);
                if let Some(k) = layout.locate(p) {
                    counts[k] += 1;
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let regions: Vec<ChiSquareTest> = (0..layout.len())
        .map(|k| {
            let samples: Vec<u64> = per_trial.iter().map(|c| c[k]).collect();
            poisson_goodness_of_fit(&samples, lambda0 * layout.area(k))
        })
        .collect();
    let statistic = regions.iter().map(|r| r.statistic).sum();
    let dof = regions.iter().map(|r| r.dof).sum();
    Ok(RegionCountTest {
        pooled: ChiSquareTest {
            statistic,
            dof,
            p_value: chi_square_p_value(statistic, dof),
        },
        regions,
    })
}

/// Ground distance of the serving DBS over `n` independent deployments.
pub fn serving_distances(lambda0: f64, radius: f64, n: u64, seed: u64) -> Result<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let s = sample_deployment(lambda0, radius, substream(seed, LEMMA_STREAM, 1, i).random())?;
            Ok(s.serving().norm())
        })
        .collect()
}
