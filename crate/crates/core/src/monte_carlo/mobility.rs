//! Trajectories of individual DBSs.
//!
//! A trajectory is a pure function of the start position, a per-drone seed
//! and the elapsed time, so evaluating at `t1` and then `t2` gives the same
//! positions as evaluating at `t2` directly. Every kind consumes its first
//! random draw as the initial heading, so a random walk with an infinite
//! epoch coincides with the straight line.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilityKind {
    StraightLine,
    RandomWalk,
    RandomWaypoint,
}

impl MobilityKind {
    pub const ALL: [MobilityKind; 3] = [
        MobilityKind::StraightLine,
        MobilityKind::RandomWalk,
        MobilityKind::RandomWaypoint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MobilityKind::StraightLine => "straight-line",
            MobilityKind::RandomWalk => "random-walk",
            MobilityKind::RandomWaypoint => "random-waypoint",
        }
    }
}

impl std::str::FromStr for MobilityKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "straight-line" | "straight" | "sl" => Ok(MobilityKind::StraightLine),
            "random-walk" | "rw" => Ok(MobilityKind::RandomWalk),
            "random-waypoint" | "rwp" => Ok(MobilityKind::RandomWaypoint),
            other => Err(format!("unknown mobility kind `{other}`")),
        }
    }
}

/// Interferer mobility. The serving DBS follows the service model instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilitySpec {
    pub kind: MobilityKind,
    /// Speed, m/s.
    pub v: f64,
    /// Heading change period of the random walk, s.
    pub rw_epoch: f64,
    /// Radius of the disc around the current position that waypoints are
    /// drawn from, m.
    pub rwp_waypoint_radius: f64,
    /// Pause at each waypoint, s.
    pub pause: f64,
}

impl MobilitySpec {
    pub const DEFAULT_RW_EPOCH: f64 = 10.0;
    pub const DEFAULT_RWP_RADIUS: f64 = 500.0;

    pub fn new(kind: MobilityKind, v: f64) -> Self {
        Self {
            kind,
            v,
            rw_epoch: Self::DEFAULT_RW_EPOCH,
            rwp_waypoint_radius: Self::DEFAULT_RWP_RADIUS,
            pause: 0.0,
        }
    }

    pub fn straight_line(v: f64) -> Self {
        Self::new(MobilityKind::StraightLine, v)
    }

    pub fn random_walk(v: f64, epoch: f64) -> Self {
        Self {
            rw_epoch: epoch,
            ..Self::new(MobilityKind::RandomWalk, v)
        }
    }

    pub fn random_waypoint(v: f64, radius: f64) -> Self {
        Self {
            rwp_waypoint_radius: radius,
            ..Self::new(MobilityKind::RandomWaypoint, v)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.v >= 0.0) {
            return Err(invalid("v", format!("must be finite and >= 0, got {}", self.v)));
        }
        if !(self.rw_epoch > 0.0) {
            return Err(invalid("rw_epoch", format!("must be > 0, got {}", self.rw_epoch)));
        }
        if !(self.rwp_waypoint_radius > 0.0 && self.rwp_waypoint_radius.is_finite()) {
            return Err(invalid(
                "rwp_waypoint_radius",
                format!("must be finite and > 0, got {}", self.rwp_waypoint_radius),
            ));
        }
        if !(self.pause.is_finite() && self.pause >= 0.0) {
            return Err(invalid("pause", format!("must be finite and >= 0, got {}", self.pause)));
        }
        Ok(())
    }

    /// Position after `t` seconds of a DBS that started at `start`.
    pub fn position(&self, start: Point, seed: u64, t: f64) -> Point {
        if t <= 0.0 || self.v == 0.0 {
            return start;
        }
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        match self.kind {
            MobilityKind::StraightLine => straight(start, heading(&mut rng), self.v * t),
            MobilityKind::RandomWalk => self.random_walk_position(start, &mut rng, t),
            MobilityKind::RandomWaypoint => self.random_waypoint_position(start, &mut rng, t),
        }
    }

    fn random_walk_position(&self, start: Point, rng: &mut Xoshiro256PlusPlus, t: f64) -> Point {
        let mut pos = start;
        let mut elapsed = 0.0;
        while elapsed < t {
            let leg = self.rw_epoch.min(t - elapsed);
            pos = straight(pos, heading(rng), self.v * leg);
            elapsed += leg;
        }
        pos
    }

    fn random_waypoint_position(&self, start: Point, rng: &mut Xoshiro256PlusPlus, t: f64) -> Point {
        let mut pos = start;
        let mut remaining = t;
        loop {
            let theta = heading(rng);
            let length = self.rwp_waypoint_radius * rng.random::<f64>().sqrt();
            let duration = length / self.v;
            if duration >= remaining {
                return straight(pos, theta, self.v * remaining);
            }
            pos = straight(pos, theta, length);
            remaining -= duration + self.pause;
            if remaining <= 0.0 {
                return pos;
            }
        }
    }
}

fn heading<R: Rng>(rng: &mut R) -> f64 {
    TAU * rng.random::<f64>()
}

fn straight(from: Point, theta: f64, distance: f64) -> Point {
    let (s, c) = theta.sin_cos();
    Point::new(from.x + distance * c, from.y + distance * s)
}

/// Straight flight towards `o'` that stops on arrival.
pub fn homing_position(start: Point, v: f64, t: f64) -> Point {
    let u0 = start.norm();
    if u0 == 0.0 {
        return start;
    }
    let scale = (1.0 - v * t / u0).max(0.0);
    Point::new(start.x * scale, start.y * scale)
}
