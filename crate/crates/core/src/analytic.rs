//! Coverage probability and rate by numerical integration.
//!
//! Conditioned on the initial serving distance `u0`, Rayleigh fading turns the
//! coverage event into `exp(-γ r0(t)^α N0 / P) · L_I(γ r0(t)^α / P)`, and the
//! PGFL of the displaced interferer field gives
//!
//! ```text
//! L_I = exp(-2π λ0 ∫ u λ(u)/λ0 / (1 + ((u² + h²)/r0²)^(α/2) / γ) du)
//! ```
//!
//! The outer integral over `u0` carries the contact-distance weight
//! `2π λ0 u0 exp(-π λ0 u0²)`.
//!
//! For the UE-dependent model the `u0` axis splits at `v t`: below it the
//! serving DBS already hovers over the UE (`r0 = h`), above it the serving
//! link is `sqrt((u0 - v t)² + h²)`. In both branches the PGFL exponent is
//! the homogeneous tail plus or minus a finite ring correction weighted by
//! an `acos` fraction.
//!
//! The semi-infinite tail `∫ u du / (1 + ((u² + h²)/r0²)^(α/2)/γ)` is mapped
//! onto `[0, 1]` by `s = s0 τ^(-1/(α/2 - 1))` with `s = (u² + h²)/r0²`, which
//! makes the integrand `s0 β / (τ^(α/(α-2)) + s0^(α/2)/γ)`: bounded, smooth,
//! and exact with no truncation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::density::clamped_acos;
use crate::error::{Error, Result};
use crate::params::{NetworkParams, ServiceModel};
use crate::quadrature::{integrate, QuadResult, Tolerance};

/// Where a coverage value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageResult {
    pub value: f64,
    pub method: Method,
    /// 95% confidence half-width; zero for analytic values.
    pub half_width: f64,
    /// Absolute quadrature error bound; zero for Monte Carlo values.
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageQuery {
    /// Linear SINR threshold.
    pub gamma: f64,
    pub t: f64,
    pub model: ServiceModel,
    pub params: NetworkParams,
}

impl CoverageQuery {
    pub fn evaluate(&self) -> Result<CoverageResult> {
        match self.model {
            ServiceModel::UeIndependent => coverage_model1(self.gamma, &self.params),
            ServiceModel::UeDependent => coverage_model2(self.gamma, self.t, &self.params),
        }
    }
}

/// Tail mass of the contact-distance law beyond the outer truncation point.
pub const OUTER_TAIL_MASS: f64 = 1e-12;
/// Absolute tolerance on the PGFL exponent `2π λ0 ∫ ...`.
pub const INNER_EXPONENT_TOL: f64 = 1e-9;
/// Absolute tolerance on each outer `u0` integral.
pub const OUTER_TOL: f64 = 1e-10;

/// `u0` beyond which the contact-distance weight has mass `OUTER_TAIL_MASS`.
pub fn outer_cutoff(lambda0: f64) -> f64 {
    (-OUTER_TAIL_MASS.ln() / (PI * lambda0)).sqrt()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("gamma must be finite and > 0, got {gamma}")))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be finite and >= 0, got {t}")))
    }
}

/// Shared per-evaluation state for the inner PGFL integrals.
struct Pgfl {
    gamma: f64,
    h2: f64,
    half_alpha: f64,
    /// `1 / (α/2 - 1)`
    beta: f64,
    /// `α / (α - 2)`
    power: f64,
    tol: Tolerance,
}

impl Pgfl {
    fn new(gamma: f64, params: &NetworkParams) -> Self {
        let alpha = params.alpha();
        let scale = 2.0 * PI * params.lambda0();
        Self {
            gamma,
            h2: params.height() * params.height(),
            half_alpha: alpha / 2.0,
            beta: 1.0 / (alpha / 2.0 - 1.0),
            power: alpha / (alpha - 2.0),
            tol: Tolerance::new(INNER_EXPONENT_TOL / scale, 1e-12),
        }
    }

    /// `u / (1 + ((u² + h²)/r0²)^(α/2) / γ)`
    fn g(&self, u: f64, r0_sq: f64) -> f64 {
        u / (1.0 + ((u * u + self.h2) / r0_sq).powf(self.half_alpha) / self.gamma)
    }

    /// `∫_{start}^∞ g(u) du`.
    fn tail(&self, start: f64, r0_sq: f64) -> Result<QuadResult> {
        let s0 = (start * start + self.h2) / r0_sq;
        let c = s0.powf(self.half_alpha) / self.gamma;
        let scale = 0.5 * r0_sq * s0 * self.beta;
        integrate(|tau: f64| scale / (tau.powf(self.power) + c), 0.0, 1.0, self.tol)
    }

    /// `∫_{lo}^{hi} g(u) · acos(sign · (u0² - u² - d²)/(2 u d))/π du`.
    ///
    /// `sign = -1` gives the complementary fraction `1 - acos(x)/π`.
    fn ring(&self, lo: f64, hi: f64, u0: f64, d: f64, sign: f64, r0_sq: f64) -> Result<QuadResult> {
        if hi <= lo {
            return Ok(QuadResult::default());
        }
        integrate(
            |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let x = sign * (u0 * u0 - u * u - d * d) / (2.0 * u * d);
                self.g(u, r0_sq) * clamped_acos(x) / PI
            },
            lo,
            hi,
            self.tol,
        )
    }
}

fn to_result(q: QuadResult) -> CoverageResult {
    CoverageResult {
        value: q.value.clamp(0.0, 1.0),
        method: Method::Analytic,
        half_width: 0.0,
        quadrature_error: q.error,
    }
}

/// Inner-integral failures surface after the outer pass finishes.
fn first_error(slot: &mut Option<Error>, r: Result<QuadResult>) -> QuadResult {
    match r {
        Ok(q) => q,
        Err(e) => {
            slot.get_or_insert(e);
            QuadResult::default()
        }
    }
}

/// Coverage probability for the UE-independent service model. Time invariant.
pub fn coverage_model1(gamma: f64, params: &NetworkParams) -> Result<CoverageResult> {
    check_gamma(gamma)?;
    let pgfl = Pgfl::new(gamma, params);
    let lambda0 = params.lambda0();
    let noise = gamma * params.n0() / params.p_tx();
    let mut failure = None;
    let outer = integrate(
        |u0: f64| {
            let r0_sq = u0 * u0 + pgfl.h2;
            let tail = first_error(&mut failure, pgfl.tail(u0, r0_sq)).value;
            2.0 * PI * lambda0 * u0
                * (-PI * lambda0 * u0 * u0
                    - noise * r0_sq.powf(pgfl.half_alpha)
                    - 2.0 * PI * lambda0 * tail)
                    .exp()
        },
        0.0,
        outer_cutoff(lambda0),
        Tolerance::new(OUTER_TOL, 0.0),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(to_result(outer))
}

/// Coverage probability at time `t` for the UE-dependent service model.
pub fn coverage_model2(gamma: f64, t: f64, params: &NetworkParams) -> Result<CoverageResult> {
    check_gamma(gamma)?;
    check_time(t)?;
    let pgfl = Pgfl::new(gamma, params);
    let lambda0 = params.lambda0();
    let noise = gamma * params.n0() / params.p_tx();
    let d = params.travel(t);
    let cutoff = outer_cutoff(lambda0);
    let weight = |u0: f64, exponent: f64| {
        2.0 * PI * lambda0 * u0 * (-PI * lambda0 * u0 * u0 - exponent).exp()
    };
    let mut failure = None;

    // Serving DBS already hovering at o' (u0 <= v t).
    let mut hovering = QuadResult::default();
    if d > 0.0 {
        let r0_sq = pgfl.h2;
        let full = first_error(&mut failure, pgfl.tail(0.0, r0_sq)).value;
        let noise_term = noise * r0_sq.powf(pgfl.half_alpha);
        hovering = integrate(
            |u0: f64| {
                let missing =
                    first_error(&mut failure, pgfl.ring(d - u0, d + u0, u0, d, -1.0, r0_sq)).value;
                let a = full - missing;
                weight(u0, noise_term + 2.0 * PI * lambda0 * a)
            },
            0.0,
            d.min(cutoff),
            Tolerance::new(OUTER_TOL, 0.0),
        )?;
    }

    // Serving DBS still approaching (u0 > v t).
    let approaching = if d < cutoff {
        integrate(
            |u0: f64| {
                let gap = u0 - d;
                let r0_sq = gap * gap + pgfl.h2;
                let tail = first_error(&mut failure, pgfl.tail(u0 + d, r0_sq)).value;
                let ring = if d > 0.0 {
                    first_error(&mut failure, pgfl.ring(u0 - d, u0 + d, u0, d, 1.0, r0_sq)).value
                } else {
                    0.0
                };
                let b = tail + ring;
                weight(
                    u0,
                    noise * r0_sq.powf(pgfl.half_alpha) + 2.0 * PI * lambda0 * b,
                )
            },
            d,
            cutoff,
            Tolerance::new(OUTER_TOL, 0.0),
        )?
    } else {
        QuadResult::default()
    };

    if let Some(e) = failure {
        return Err(e);
    }
    Ok(to_result(hovering + approaching))
}

/// Coverage at `(γ, t)` for either service model.
pub fn coverage(gamma: f64, t: f64, model: ServiceModel, params: &NetworkParams) -> Result<CoverageResult> {
    CoverageQuery {
        gamma,
        t,
        model,
        params: *params,
    }
    .evaluate()
}

/// `t → ∞` limit of the UE-dependent coverage: serving DBS hovering over a
/// homogeneous interferer field.
pub fn coverage_model2_limit(gamma: f64, params: &NetworkParams) -> Result<CoverageResult> {
    check_gamma(gamma)?;
    let pgfl = Pgfl::new(gamma, params);
    let full = pgfl.tail(0.0, pgfl.h2)?;
    let noise = gamma * params.height().powf(params.alpha()) * params.n0() / params.p_tx();
    Ok(CoverageResult {
        value: (-noise - 2.0 * PI * params.lambda0() * full.value).exp(),
        method: Method::Analytic,
        half_width: 0.0,
        quadrature_error: 2.0 * PI * params.lambda0() * full.error,
    })
}

/// Rate in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub value: f64,
    pub error: f64,
    /// Upper end of the integrated threshold range.
    pub gamma_max: f64,
}

/// Tail bound `P_C(Γ) ln((1 + 2Γ)/(1 + Γ))` below which the threshold axis
/// stops growing.
pub const RATE_TAIL_BOUND: f64 = 1e-8;
const RATE_PANEL_TOL: f64 = 1e-9;
const RATE_MAX_PANELS: usize = 60;

/// `∫_0^∞ P_C(γ) / (1 + γ) dγ` for an arbitrary coverage curve.
///
/// Integrates over `[0, 1], [1, 2], [2, 4], ...` and stops at the first panel
/// end `Γ` where the tail bound drops below [`RATE_TAIL_BOUND`].
pub fn rate_from_coverage<F>(mut coverage_at: F) -> Result<RateResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let mut total = QuadResult::default();
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..RATE_MAX_PANELS {
        let panel = integrate(
            |g: f64| {
                if g <= 0.0 {
                    return 1.0;
                }
                match coverage_at(g) {
                    Ok(p) => p / (1.0 + g),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            lo,
            hi,
            Tolerance::new(RATE_PANEL_TOL, 1e-12),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total = total + panel;
        let at_end = coverage_at(hi)?;
        if at_end * ((1.0 + 2.0 * hi) / (1.0 + hi)).ln() < RATE_TAIL_BOUND {
            return Ok(RateResult {
                value: total.value,
                error: total.error + RATE_TAIL_BOUND,
                gamma_max: hi,
            });
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::Quadrature {
        lo: 0.0,
        hi,
        estimate: total.value,
        error_estimate: f64::INFINITY,
        tolerance: RATE_TAIL_BOUND,
    })
}

/// Rate at time `t` for the given service model, nats per channel use.
pub fn rate(t: f64, model: ServiceModel, params: &NetworkParams) -> Result<RateResult> {
    check_time(t)?;
    rate_from_coverage(|g| coverage(g, t, model, params).map(|c| c.value))
}

/// Spectral efficiency conversion.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
