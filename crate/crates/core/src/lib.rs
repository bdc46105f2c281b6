//! Inter-satellite free-space optical power transfer.
//!
//! A large solar-powered satellite beams a laser at a CubeSat whose solar
//! cells convert it back to electricity. The transmitter adapts its beam
//! divergence so the spot on the receiver keeps a fixed diameter, which
//! makes the aligned link budget independent of range. What limits range
//! is the transmitter aperture cap and random pointing error, whose loss
//! grows with the square of the transmitter gain.
//!
//! Modules:
//!
//! * [`geometry`]: divergence, adaptive aperture and maximum range.
//! * [`linkbudget`]: gains, pointing losses and harvested power.
//! * [`pointing`]: Gaussian/Rayleigh jitter, seeded samplers and oracles.
//! * [`efficiency`]: solar cell efficiency curves.
//! * [`experiment`]: averaging modes, sweeps, crossings and calibration.
//! * [`io`]: scenario files, CSV output and run manifests.
//!
//! ```
//! use fso_harvest::experiment::{average_harvested_power, Scenario};
//! use fso_harvest::pointing::PointingJitter;
//!
//! let one_u = Scenario::reference("1u", 0.1, PointingJitter::perfect());
//! let p = average_harvested_power(&one_u, 750e3, 27.0).unwrap();
//! assert!((p - 2.2424).abs() < 1e-4);
//! ```

pub mod efficiency;
mod error;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod linkbudget;
pub mod pointing;

pub use error::{Error, Result};

// Compiles the guide's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    pub mod geometry {}
    #[doc = include_str!("../../../book/src/link-budget.md")]
    pub mod link_budget {}
    #[doc = include_str!("../../../book/src/pointing.md")]
    pub mod pointing {}
    #[doc = include_str!("../../../book/src/efficiency.md")]
    pub mod efficiency {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
    #[doc = include_str!("../../../book/src/files.md")]
    pub mod files {}
}
