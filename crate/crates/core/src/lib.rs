//! Time-varying coverage probability and rate of a drone base-station
//! network whose DBSs start as a Poisson point process and fly straight
//! lines in random directions.
//!
//! Two independent engines:
//!
//! - [`analytic`] evaluates the coverage and rate integrals with adaptive
//!   Gauss–Kronrod quadrature ([`quadrature`]) over the displaced
//!   interferer density ([`density`]).
//! - [`monte_carlo`] samples deployments, moves every DBS and counts SINR
//!   outcomes directly.

pub mod analytic;
pub mod density;
pub mod error;
pub mod monte_carlo;
pub mod params;
pub mod quadrature;
pub mod stats;

pub use analytic::{CoverageQuery, CoverageResult, Method, RateResult};
pub use density::{DensityProfile, DisplacementKernel, Region};
pub use error::{Error, Result};
pub use monte_carlo::{EmpiricalEstimate, MobilityKind, MobilitySpec, Snapshot};
pub use params::{NetworkParams, NoiseSetting, ServiceModel};
