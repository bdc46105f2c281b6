//! Adaptive beam divergence geometry.
//!
//! The transmitter keeps a fixed spot diameter on the receiver as the range
//! changes. Under the small-angle cone model the full divergence angle is
//! `spot / range`, and the laser aperture that produces that divergence is
//! `wavelength / divergence`. Since the aperture grows linearly with range,
//! an aperture cap bounds the usable range at `cap * spot / wavelength`.
//!
//! All lengths are meters and all angles radians.

use serde::Serialize;

use crate::error::{positive, Error, Result};

/// Range at which sweeps start unless configured otherwise.
pub const DEFAULT_RANGE_FLOOR_M: f64 = 10_000.0;

/// Relative slack allowed when comparing a derived aperture against its cap.
///
/// Large enough to absorb rounding in `wavelength * range / spot`, small
/// enough that a range one part in 1e9 beyond [`max_range`] is rejected.
pub const CAP_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Full divergence angle that keeps `spot_diameter_m` at `range_m`.
pub fn divergence_for(spot_diameter_m: f64, range_m: f64) -> Result<f64> {
    let spot = positive("spot_diameter_m", spot_diameter_m)?;
    let range = positive("range_m", range_m)?;
    Ok(spot / range)
}

/// Transmitter aperture diameter producing `divergence_rad` at `wavelength_m`.
pub fn tx_aperture_for(wavelength_m: f64, divergence_rad: f64) -> Result<f64> {
    let wavelength = positive("wavelength_m", wavelength_m)?;
    let divergence = positive("divergence_rad", divergence_rad)?;
    Ok(wavelength / divergence)
}

/// Longest range reachable before the adaptive aperture hits `aperture_cap_m`.
pub fn max_range(wavelength_m: f64, spot_diameter_m: f64, aperture_cap_m: f64) -> Result<f64> {
    let wavelength = positive("wavelength_m", wavelength_m)?;
    let spot = positive("spot_diameter_m", spot_diameter_m)?;
    let cap = positive("aperture_cap_m", aperture_cap_m)?;
    Ok(cap * spot / wavelength)
}

/// A resolved transmitter/receiver geometry at one range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkGeometry {
    pub range_m: f64,
    pub spot_diameter_m: f64,
    pub divergence_rad: f64,
    pub tx_aperture_m: f64,
    pub wavelength_m: f64,
}

impl LinkGeometry {
    pub fn is_below_floor(&self, floor_m: f64) -> bool {
        self.range_m < floor_m
    }

    /// Whether the derived aperture respects `cap_m` under
    /// [`CAP_RELATIVE_TOLERANCE`].
    pub fn fits_cap(&self, cap_m: f64) -> bool {
        within_cap(self.tx_aperture_m, cap_m)
    }
}

fn within_cap(aperture_m: f64, cap_m: f64) -> bool {
    aperture_m <= cap_m * (1.0 + CAP_RELATIVE_TOLERANCE)
}

/// Resolves divergence and aperture for one range and checks the cap.
pub fn plan_geometry(
    wavelength_m: f64,
    spot_diameter_m: f64,
    range_m: f64,
    aperture_cap_m: f64,
) -> Result<LinkGeometry> {
    let cap = positive("aperture_cap_m", aperture_cap_m)?;
    let divergence_rad = divergence_for(spot_diameter_m, range_m)?;
    let tx_aperture_m = tx_aperture_for(wavelength_m, divergence_rad)?;
    if !within_cap(tx_aperture_m, cap) {
        return Err(Error::ApertureCapExceeded {
            aperture_m: tx_aperture_m,
            cap_m: cap,
        });
    }
    Ok(LinkGeometry {
        range_m,
        spot_diameter_m,
        divergence_rad,
        tx_aperture_m,
        wavelength_m,
    })
}
