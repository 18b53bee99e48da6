//! Network parameters and the elementary distance geometry.
//!
//! The typical UE sits at the ground origin `o`; every DBS flies in the plane
//! `z = h`. A DBS at ground distance `u` from `o'` (the projection of the
//! origin onto that plane) is at link distance `r = sqrt(u² + h²)` from the UE.
//!
//! All quantities are SI and linear: meters, seconds, m/s, watts. Decibel
//! values are converted once, at the configuration boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, invalid, Error, Result};

/// Serving-DBS behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceModel {
    /// Model 1: the serving DBS flies in a random direction like every other
    /// DBS; the UE re-associates with the nearest DBS at each instant.
    UeIndependent,
    /// Model 2: the serving DBS flies straight towards `o'` and hovers there.
    UeDependent,
}

impl ServiceModel {
    pub const ALL: [ServiceModel; 2] = [ServiceModel::UeIndependent, ServiceModel::UeDependent];

    /// Short numeric label used in file names and CSV rows.
    pub fn index(self) -> u8 {
        match self {
            ServiceModel::UeIndependent => 1,
            ServiceModel::UeDependent => 2,
        }
    }
}

impl std::fmt::Display for ServiceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "model{}", self.index())
    }
}

/// How the thermal noise power is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseSetting {
    /// Cell-edge SNR of 0 dB for a unit transmit power, see [`noise_power`].
    Dimensioned,
    /// Explicit noise power in watts.
    Fixed(f64),
}

/// Immutable, validated network parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkParams {
    lambda0: f64,
    h: f64,
    v: f64,
    alpha: f64,
    p_tx: f64,
    n0: f64,
    r_d: f64,
    p_edge: f64,
}

impl NetworkParams {
    pub fn builder() -> NetworkParamsBuilder {
        NetworkParamsBuilder::default()
    }

    /// Density 1e-6 /m², h = 100 m, 45 km/h, α = 3, P = 0 dB, p_edge = 0.05,
    /// R_D = 100 km, dimensioned noise.
    pub fn reference() -> Self {
        Self::builder()
            .build()
            .expect("reference parameters are valid")
    }

    /// DBS density per m².
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    /// DBS altitude in meters.
    pub fn height(&self) -> f64 {
        self.h
    }
    /// DBS speed in m/s.
    pub fn speed(&self) -> f64 {
        self.v
    }
    /// Path-loss exponent.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Transmit power, linear watts.
    pub fn p_tx(&self) -> f64 {
        self.p_tx
    }
    /// Noise power, linear watts.
    pub fn n0(&self) -> f64 {
        self.n0
    }
    /// Deployment disc radius in meters.
    pub fn deployment_radius(&self) -> f64 {
        self.r_d
    }
    pub fn p_edge(&self) -> f64 {
        self.p_edge
    }

    /// Same parameters with the noise power forced to zero.
    pub fn without_noise(&self) -> Self {
        Self { n0: 0.0, ..*self }
    }

    /// Distance from `o'` covered after `t` seconds.
    pub fn travel(&self, t: f64) -> f64 {
        self.v * t
    }

    /// Back to a builder seeded with these values (noise kept fixed).
    pub fn to_builder(&self) -> NetworkParamsBuilder {
        NetworkParamsBuilder {
            lambda0: self.lambda0,
            h: self.h,
            v: self.v,
            alpha: self.alpha,
            p_tx: self.p_tx,
            r_d: self.r_d,
            p_edge: self.p_edge,
            noise: NoiseSetting::Fixed(self.n0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NetworkParamsBuilder {
    lambda0: f64,
    h: f64,
    v: f64,
    alpha: f64,
    p_tx: f64,
    r_d: f64,
    p_edge: f64,
    noise: NoiseSetting,
}

impl Default for NetworkParamsBuilder {
    fn default() -> Self {
        Self {
            lambda0: 1e-6,
            h: 100.0,
            v: kmh_to_mps(45.0),
            alpha: 3.0,
            p_tx: 1.0,
            r_d: 100_000.0,
            p_edge: 0.05,
            noise: NoiseSetting::Dimensioned,
        }
    }
}

impl NetworkParamsBuilder {
    pub fn lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }
    pub fn height(mut self, h: f64) -> Self {
        self.h = h;
        self
    }
    pub fn speed(mut self, v: f64) -> Self {
        self.v = v;
        self
    }
    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
    pub fn p_tx(mut self, watts: f64) -> Self {
        self.p_tx = watts;
        self
    }
    pub fn p_tx_db(self, db: f64) -> Self {
        self.p_tx(db_to_linear(db))
    }
    pub fn deployment_radius(mut self, r_d: f64) -> Self {
        self.r_d = r_d;
        self
    }
    pub fn p_edge(mut self, p_edge: f64) -> Self {
        self.p_edge = p_edge;
        self
    }
    pub fn noise(mut self, noise: NoiseSetting) -> Self {
        self.noise = noise;
        self
    }

    pub fn build(self) -> Result<NetworkParams> {
        let positive = |name: &'static str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {x}")))
            }
        };
        positive("lambda0", self.lambda0)?;
        positive("h", self.h)?;
        positive("p_tx", self.p_tx)?;
        positive("r_d", self.r_d)?;
        if !(self.v.is_finite() && self.v >= 0.0) {
            return Err(invalid("v", format!("must be finite and >= 0, got {}", self.v)));
        }
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(invalid("alpha", format!("must be > 2, got {}", self.alpha)));
        }
        if !(self.p_edge > 0.0 && self.p_edge < 1.0) {
            return Err(invalid("p_edge", format!("must lie in (0, 1), got {}", self.p_edge)));
        }
        let n0 = match self.noise {
            NoiseSetting::Dimensioned => {
                noise_power(self.lambda0, self.h, self.alpha, self.p_edge)?
            }
            NoiseSetting::Fixed(n0) => {
                if !(n0.is_finite() && n0 >= 0.0) {
                    return Err(invalid("n0", format!("must be finite and >= 0, got {n0}")));
                }
                n0
            }
        };
        Ok(NetworkParams {
            lambda0: self.lambda0,
            h: self.h,
            v: self.v,
            alpha: self.alpha,
            p_tx: self.p_tx,
            n0,
            r_d: self.r_d,
            p_edge: self.p_edge,
        })
    }
}

/// Ground distance `u` and link distance `r = sqrt(u² + h²)` of one DBS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDistance {
    pub ground: f64,
    pub link: f64,
}

impl LinkDistance {
    pub fn new(ground: f64, h: f64) -> Result<Self> {
        Ok(Self {
            ground,
            link: link_distance(ground, h)?,
        })
    }
}

/// 3D distance between the typical UE and a DBS at ground distance `u`.
pub fn link_distance(u: f64, h: f64) -> Result<f64> {
    ensure_nonnegative("u", u)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Domain(format!("h must be > 0, got {h}")));
    }
    Ok(u.hypot(h))
}

/// `[u0 - v t]^+`: the serving DBS approaches `o'` and then hovers.
pub fn serving_ground_distance_model2(u0: f64, v: f64, t: f64) -> Result<f64> {
    ensure_nonnegative("u0", u0)?;
    ensure_nonnegative("v", v)?;
    ensure_nonnegative("t", t)?;
    Ok((u0 - v * t).max(0.0))
}

/// Link distance `d` with `P[r0 > d] = p_edge` under the PPP contact law.
pub fn cell_edge_distance(lambda0: f64, h: f64, p_edge: f64) -> Result<f64> {
    if !(lambda0 > 0.0) || !(h > 0.0) {
        return Err(Error::Domain(format!(
            "lambda0 and h must be > 0, got {lambda0}, {h}"
        )));
    }
    if !(p_edge > 0.0 && p_edge <= 1.0) {
        return Err(Error::Domain(format!("p_edge must lie in (0, 1], got {p_edge}")));
    }
    Ok((h * h - p_edge.ln() / (PI * lambda0)).sqrt())
}

/// Noise power giving a cell-edge SNR of exactly 0 dB at unit transmit power:
/// `(h² - ln(p_edge)/(π λ0))^(-α/2)`.
pub fn noise_power(lambda0: f64, h: f64, alpha: f64, p_edge: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Domain(format!("alpha must be > 2, got {alpha}")));
    }
    let edge = cell_edge_distance(lambda0, h, p_edge)?;
    Ok((edge * edge).powf(-alpha / 2.0))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}
