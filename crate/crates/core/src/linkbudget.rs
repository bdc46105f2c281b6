//! Harvested electrical power over a line-of-sight optical link.
//!
//! ```text
//! P_h = P_t (λ / 4πR)² η_eo η_h L_t G_t L_r G_r L_e L_s L_c
//! G   = (π d / λ)²
//! L   = exp(-G ψ²)
//! ```
//!
//! With the adaptive geometry (`d_t = λR / s`) the product `(λ/4πR)² G_t`
//! collapses to `(λ / 4s)²`, so at perfect alignment the harvested power does
//! not depend on range at all. Range only enters through the transmitter
//! misalignment loss, whose gain grows as `R²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{non_negative, positive, unit_fraction, Error, Result};
use crate::geometry::LinkGeometry;

/// Wavelength band suited to photovoltaic harvesting of laser light.
pub const HARVESTING_WINDOW_M: (f64, f64) = (780e-9, 1100e-9);

/// Laser source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalTransmitter {
    pub wavelength_m: f64,
    /// Electrical-to-optical power conversion efficiency.
    pub pce: f64,
    pub aperture_cap_m: f64,
}

impl OpticalTransmitter {
    pub fn new(wavelength_m: f64, pce: f64, aperture_cap_m: f64) -> Result<Self> {
        let wavelength_m = positive("wavelength_m", wavelength_m)?;
        let pce = unit_fraction("pce", pce)?;
        let aperture_cap_m = positive("aperture_cap_m", aperture_cap_m)?;
        if !in_harvesting_window(wavelength_m) {
            log::warn!(
                "laser wavelength {} nm is outside the {}-{} nm harvesting window",
                wavelength_m * 1e9,
                HARVESTING_WINDOW_M.0 * 1e9,
                HARVESTING_WINDOW_M.1 * 1e9
            );
        }
        Ok(Self {
            wavelength_m,
            pce,
            aperture_cap_m,
        })
    }

    /// 1064 nm Nd:YVO4 source, 51 % PCE, 8 m aperture cap.
    pub fn reference() -> Self {
        Self {
            wavelength_m: 1064e-9,
            pce: 0.51,
            aperture_cap_m: 8.0,
        }
    }
}

pub fn in_harvesting_window(wavelength_m: f64) -> bool {
    wavelength_m > HARVESTING_WINDOW_M.0 && wavelength_m < HARVESTING_WINDOW_M.1
}

/// Photovoltaic collector on the small satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalReceiver {
    pub aperture_m: f64,
    /// Energy-harvesting conversion efficiency at the laser wavelength.
    pub ehce: f64,
}

impl OpticalReceiver {
    pub fn new(aperture_m: f64, ehce: f64) -> Result<Self> {
        Ok(Self {
            aperture_m: positive("aperture_m", aperture_m)?,
            ehce: unit_fraction("ehce", ehce)?,
        })
    }

    /// InGaAsP cell (26.4 % at 1064 nm) behind a `aperture_m` collector.
    pub fn ingaasp(aperture_m: f64) -> Self {
        Self {
            aperture_m,
            ehce: 0.264,
        }
    }
}

/// What to do when the spot is small enough that the far-field product
/// claims more than the whole beam.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum FarFieldPolicy {
    #[default]
    Warn,
    /// Warn and cap the capture fraction `(λ/4πR)² G_t G_r` at 1.
    Clamp,
}

/// Extinction, scintillation and coupling losses. All 1 in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkLossOverrides {
    pub l_e: f64,
    pub l_s: f64,
    pub l_c: f64,
    pub far_field: FarFieldPolicy,
}

impl Default for LinkLossOverrides {
    fn default() -> Self {
        Self {
            l_e: 1.0,
            l_s: 1.0,
            l_c: 1.0,
            far_field: FarFieldPolicy::Warn,
        }
    }
}

impl LinkLossOverrides {
    pub fn validate(&self) -> Result<()> {
        unit_fraction("l_e", self.l_e)?;
        unit_fraction("l_s", self.l_s)?;
        unit_fraction("l_c", self.l_c)?;
        Ok(())
    }

    fn product(&self) -> f64 {
        self.l_e * self.l_s * self.l_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ModelWarning {
    /// Spot diameter below `(π/4) d_r`; the far-field product overstates
    /// the capturable power.
    ModelValidity { spot_m: f64, threshold_m: f64 },
}

/// Every factor of the link budget at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetBreakdown {
    pub p_t_w: f64,
    /// `(λ / 4πR)²`
    pub free_space_term: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub l_t: f64,
    pub l_r: f64,
    pub pce: f64,
    pub ehce: f64,
    pub l_e: f64,
    pub l_s: f64,
    pub l_c: f64,
    /// `free_space_term * g_t * g_r`, after any clamping.
    pub capture_fraction: f64,
    pub clamped: bool,
    pub harvested_w: f64,
    pub warnings: Vec<ModelWarning>,
}

impl BudgetBreakdown {
    /// Harvested watts per transmitted watt.
    pub fn transfer_fraction(&self) -> f64 {
        self.harvested_w / self.p_t_w
    }
}

/// Far-field aperture gain `(π d / λ)²`.
pub fn gain(aperture_m: f64, wavelength_m: f64) -> Result<f64> {
    let d = positive("aperture_m", aperture_m)?;
    let wavelength = positive("wavelength_m", wavelength_m)?;
    Ok((PI * d / wavelength).powi(2))
}

/// Pointing loss `exp(-G ψ²)` for radial error `psi_rad`.
pub fn misalignment_loss(gain: f64, psi_rad: f64) -> Result<f64> {
    let g = non_negative("gain", gain)?;
    let psi = non_negative("psi_rad", psi_rad)?;
    Ok((-g * psi * psi).exp())
}

/// Evaluates the link budget. Exponent underflow gives 0 W, not an error.
pub fn harvested_power(
    tx: &OpticalTransmitter,
    rx: &OpticalReceiver,
    geom: &LinkGeometry,
    p_t_w: f64,
    psi_t: f64,
    psi_r: f64,
    overrides: &LinkLossOverrides,
) -> Result<BudgetBreakdown> {
    let p_t_w = positive("p_t_w", p_t_w)?;
    check_geometry(tx, geom)?;
    overrides.validate()?;

    let lambda = tx.wavelength_m;
    let free_space_term = (lambda / (4.0 * PI * geom.range_m)).powi(2);
    let g_t = gain(geom.tx_aperture_m, lambda)?;
    let g_r = gain(rx.aperture_m, lambda)?;
    let l_t = misalignment_loss(g_t, psi_t)?;
    let l_r = misalignment_loss(g_r, psi_r)?;

    let mut warnings = Vec::new();
    let threshold_m = PI / 4.0 * rx.aperture_m;
    if geom.spot_diameter_m < threshold_m {
        log::warn!(
            "spot diameter {} m is below (pi/4) d_r = {} m; far-field budget overstates capture",
            geom.spot_diameter_m,
            threshold_m
        );
        warnings.push(ModelWarning::ModelValidity {
            spot_m: geom.spot_diameter_m,
            threshold_m,
        });
    }

    let mut capture_fraction = free_space_term * g_t * g_r;
    let clamped = overrides.far_field == FarFieldPolicy::Clamp && capture_fraction > 1.0;
    if clamped {
        capture_fraction = 1.0;
    }

    let fraction =
        capture_fraction * tx.pce * rx.ehce * l_t * l_r * overrides.product();
    Ok(BudgetBreakdown {
        p_t_w,
        free_space_term,
        g_t,
        g_r,
        l_t,
        l_r,
        pce: tx.pce,
        ehce: rx.ehce,
        l_e: overrides.l_e,
        l_s: overrides.l_s,
        l_c: overrides.l_c,
        capture_fraction,
        clamped,
        harvested_w: p_t_w * fraction,
        warnings,
    })
}

/// Transmit power needed to harvest `p_required_w` at this operating point.
#[allow(clippy::too_many_arguments)]
pub fn min_transmit_power(
    tx: &OpticalTransmitter,
    rx: &OpticalReceiver,
    geom: &LinkGeometry,
    psi_t: f64,
    psi_r: f64,
    p_required_w: f64,
    overrides: &LinkLossOverrides,
) -> Result<f64> {
    let required = positive("p_required_w", p_required_w)?;
    let unit = harvested_power(tx, rx, geom, 1.0, psi_t, psi_r, overrides)?;
    let fraction = unit.harvested_w;
    let p_t = required / fraction;
    if fraction <= 0.0 || !p_t.is_finite() {
        return Err(Error::InfeasiblePower {
            required_w: required,
        });
    }
    Ok(p_t)
}

fn check_geometry(tx: &OpticalTransmitter, geom: &LinkGeometry) -> Result<()> {
    if (geom.wavelength_m - tx.wavelength_m).abs() > 1e-12 * tx.wavelength_m {
        return Err(Error::Domain {
            name: "geometry.wavelength_m",
            reason: "geometry was planned for a different wavelength",
            value: geom.wavelength_m,
        });
    }
    if !geom.fits_cap(tx.aperture_cap_m) {
        return Err(Error::ApertureCapExceeded {
            aperture_m: geom.tx_aperture_m,
            cap_m: tx.aperture_cap_m,
        });
    }
    Ok(())
}
