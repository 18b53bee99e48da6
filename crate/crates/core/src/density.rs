//! Interferer density seen by the typical UE.
//!
//! At `t = 0` the interferers form a homogeneous PPP of density `λ0` outside
//! the exclusion disc `b(o', u0)`. Each interferer then travels a distance
//! `d = v t` in an independent uniform direction, so the displaced field is an
//! inhomogeneous PPP whose density only depends on the ground distance `u_x`:
//!
//! ```text
//! λ0                                     u_x >= u0 + d        (outer)
//! λ0 · acos((u0² - u_x² - d²)/(2 u_x d)) / π
//!                                        |u0 - d| < u_x < u0 + d   (ring)
//! λ0 · 1(d > u0)                         u_x <= |u0 - d|      (inner)
//! ```

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{ensure_nonnegative, Error, Result};
use crate::quadrature::{integrate, QuadResult, Tolerance};

/// Which branch of the displaced density a ground distance falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Outer,
    Ring,
    Inner,
}

impl Region {
    pub fn of(ux: f64, u0: f64, d: f64) -> Region {
        if ux >= u0 + d {
            Region::Outer
        } else if ux <= (u0 - d).abs() {
            Region::Inner
        } else {
            Region::Ring
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Outer => "outer",
            Region::Ring => "ring",
            Region::Inner => "inner",
        }
    }
}

/// Density of the interferers at `t = 0`: `λ0` strictly outside the exclusion
/// disc, zero on and inside it.
pub fn initial_density(ux: f64, u0: f64, lambda0: f64) -> Result<f64> {
    ensure_nonnegative("u_x", ux)?;
    ensure_nonnegative("u0", u0)?;
    ensure_nonnegative("lambda0", lambda0)?;
    Ok(if ux > u0 { lambda0 } else { 0.0 })
}

/// `acos` with its argument clamped to `[-1, 1]`.
pub(crate) fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Displaced density divided by `λ0`, for displacement distance `d`.
/// Unchecked: callers guarantee nonnegative finite inputs.
pub(crate) fn density_fraction(ux: f64, u0: f64, d: f64) -> f64 {
    if d == 0.0 {
        return if ux > u0 { 1.0 } else { 0.0 };
    }
    match Region::of(ux, u0, d) {
        Region::Outer => 1.0,
        Region::Inner => {
            if d > u0 {
                1.0
            } else {
                0.0
            }
        }
        Region::Ring => clamped_acos((u0 * u0 - ux * ux - d * d) / (2.0 * ux * d)) / PI,
    }
}

/// Density of the interferers at time `t` under the UE-dependent service
/// model, per m².
pub fn interferer_density(ux: f64, u0: f64, t: f64, v: f64, lambda0: f64) -> Result<f64> {
    ensure_nonnegative("u_x", ux)?;
    ensure_nonnegative("u0", u0)?;
    ensure_nonnegative("t", t)?;
    ensure_nonnegative("v", v)?;
    ensure_nonnegative("lambda0", lambda0)?;
    Ok(lambda0 * density_fraction(ux, u0, v * t))
}

/// Pdf of the ground distance `u_y` reached by a point at ground distance
/// `u_x` after moving `d` in a uniformly random direction.
///
/// Zero outside the support `[|u_x - d|, u_x + d]`; both endpoints carry an
/// integrable inverse-square-root singularity and evaluate to `+∞`.
pub fn kernel_pdf(uy: f64, ux: f64, d: f64) -> Result<f64> {
    ensure_nonnegative("u_y", uy)?;
    ensure_nonnegative("u_x", ux)?;
    ensure_nonnegative("d", d)?;
    let lo = (ux - d).abs();
    let hi = ux + d;
    if uy < lo || uy > hi {
        return Ok(0.0);
    }
    if uy == lo || uy == hi {
        return Ok(f64::INFINITY);
    }
    let a = ux - d;
    let product = (uy * uy - a * a) * (hi * hi - uy * uy);
    if product <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * uy / (PI * product.sqrt()))
}

/// Support `[|u_x - d|, u_x + d]` of [`kernel_pdf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementKernel {
    pub ux: f64,
    pub d: f64,
}

impl DisplacementKernel {
    pub fn new(ux: f64, d: f64) -> Result<Self> {
        ensure_nonnegative("u_x", ux)?;
        ensure_nonnegative("d", d)?;
        Ok(Self { ux, d })
    }

    pub fn support(&self) -> (f64, f64) {
        ((self.ux - self.d).abs(), self.ux + self.d)
    }

    pub fn pdf(&self, uy: f64) -> f64 {
        kernel_pdf(uy, self.ux, self.d).unwrap_or(0.0)
    }

    /// Probability mass of the kernel over `[lo, hi]`.
    ///
    /// Uses `u_y = m + w sin θ` on the clipped support so that both
    /// endpoint singularities are cancelled by the Jacobian `w cos θ`.
    pub fn mass(&self, lo: f64, hi: f64, tol: Tolerance) -> Result<QuadResult> {
        let (a, b) = self.support();
        if b <= a {
            return Err(Error::Domain(format!(
                "degenerate kernel support at u_x = {}, d = {}",
                self.ux, self.d
            )));
        }
        let lo = lo.max(a);
        let hi = hi.min(b);
        if hi <= lo {
            return Ok(QuadResult::default());
        }
        let m = 0.5 * (a + b);
        let w = 0.5 * (b - a);
        let theta = |u: f64| ((u - m) / w).clamp(-1.0, 1.0).asin();
        integrate(
            |th: f64| {
                let uy = m + w * th.sin();
                let jac = w * th.cos();
                if jac <= 0.0 {
                    return 0.0;
                }
                self.pdf(uy) * jac
            },
            theta(lo),
            theta(hi),
            tol,
        )
    }

    /// Total mass over the support; one up to quadrature error.
    pub fn normalization(&self, tol: Tolerance) -> Result<QuadResult> {
        let (a, b) = self.support();
        self.mass(a, b, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySample {
    pub ux: f64,
    pub lambda: f64,
    pub region: Region,
}

/// Interferer density sampled on a uniform ground-distance grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub u0: f64,
    pub t: f64,
    pub v: f64,
    pub lambda0: f64,
    pub samples: Vec<DensitySample>,
}

impl DensityProfile {
    /// Extra distance past `u0 + v t` covered by [`DensityProfile::with_default_extent`].
    pub const DEFAULT_MARGIN: f64 = 2000.0;

    /// Samples `[0, extent]` every `step` meters (endpoint included when it
    /// lands on the grid).
    pub fn build(u0: f64, t: f64, v: f64, lambda0: f64, step: f64, extent: f64) -> Result<Self> {
        ensure_nonnegative("u0", u0)?;
        ensure_nonnegative("t", t)?;
        ensure_nonnegative("v", v)?;
        ensure_nonnegative("lambda0", lambda0)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("grid step must be > 0, got {step}")));
        }
        ensure_nonnegative("extent", extent)?;
        let d = v * t;
        let n = (extent / step + 1e-9).floor() as usize;
        let samples = (0..=n)
            .map(|i| {
                let ux = i as f64 * step;
                DensitySample {
                    ux,
                    lambda: lambda0 * density_fraction(ux, u0, d),
                    region: Region::of(ux, u0, d),
                }
            })
            .collect();
        Ok(Self {
            u0,
            t,
            v,
            lambda0,
            samples,
        })
    }

    /// Grid over `[0, u0 + v t + 2000 m]`.
    pub fn with_default_extent(u0: f64, t: f64, v: f64, lambda0: f64, step: f64) -> Result<Self> {
        Self::build(u0, t, v, lambda0, step, u0 + v * t + Self::DEFAULT_MARGIN)
    }

    pub fn min_ratio(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.lambda / self.lambda0)
            .fold(f64::INFINITY, f64::min)
    }

    pub const CSV_HEADER: &'static str = "u_x_m,lambda_per_m2,region";

    /// Writes the header line and one row per sample with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            writeln!(out, "{:.16e},{:.16e},{}", s.ux, s.lambda, s.region.as_str())?;
        }
        Ok(())
    }
}
