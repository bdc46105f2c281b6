use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the model layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} is out of its domain: {reason} (got {value})")]
    Domain {
        name: &'static str,
        reason: &'static str,
        value: f64,
    },

    #[error("transmitter aperture {aperture_m} m exceeds the {cap_m} m cap")]
    ApertureCapExceeded { aperture_m: f64, cap_m: f64 },

    #[error("end-to-end transfer fraction underflows to zero; {required_w} W cannot be delivered")]
    InfeasiblePower { required_w: f64 },

    #[error("{wavelength_nm} nm is outside the {material} curve span [{min_nm}, {max_nm}] nm")]
    OutOfCurveRange {
        material: String,
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("no cell in the catalog covers {wavelength_nm} nm")]
    NoCellCovers { wavelength_nm: f64 },

    #[error("unknown cell material {0:?}")]
    UnknownMaterial(String),

    #[error("cell catalog line {line}: {message}")]
    Catalog { line: usize, message: String },

    #[error(
        "zero-misalignment power {available_w} W does not exceed the {required_w} W requirement"
    )]
    InfeasibleCalibration { available_w: f64, required_w: f64 },

    #[error(
        "harvested power {power_w} W at the {floor_m} m range floor is already below {required_w} W"
    )]
    BelowRequirementEverywhere {
        floor_m: f64,
        power_w: f64,
        required_w: f64,
    },
}

impl Error {
    /// Variant name, stable for scripting against CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::ApertureCapExceeded { .. } => "ApertureCapExceeded",
            Error::InfeasiblePower { .. } => "InfeasiblePower",
            Error::OutOfCurveRange { .. } => "OutOfCurveRange",
            Error::NoCellCovers { .. } => "NoCellCovers",
            Error::UnknownMaterial(_) => "UnknownMaterial",
            Error::Catalog { .. } => "CatalogError",
            Error::InfeasibleCalibration { .. } => "InfeasibleCalibration",
            Error::BelowRequirementEverywhere { .. } => "BelowRequirementEverywhere",
        }
    }

    /// True for outcomes where the inputs were valid but the model cannot
    /// meet the request.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasiblePower { .. }
                | Error::InfeasibleCalibration { .. }
                | Error::BelowRequirementEverywhere { .. }
        )
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            reason: "must be strictly positive and finite",
            value,
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            reason: "must be non-negative and finite",
            value,
        })
    }
}

pub(crate) fn unit_fraction(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            reason: "must lie in (0, 1]",
            value,
        })
    }
}
