//! Quantity strings such as `"680 km"`, `"0.5 urad"` or `"51 %"`.
//!
//! Values are returned in SI base units (m, rad, W) or as plain fractions.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Angle,
    Power,
    /// Dimensionless; accepts `%` or a bare number.
    Fraction,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[
                ("m", 1.0),
                ("km", 1e3),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("nm", 1e-9),
            ],
            Dimension::Angle => &[
                ("rad", 1.0),
                ("mrad", 1e-3),
                ("urad", 1e-6),
                ("µrad", 1e-6),
                ("nrad", 1e-9),
            ],
            Dimension::Power => &[("W", 1.0), ("kW", 1e3), ("mW", 1e-3)],
            Dimension::Fraction => &[("%", 1e-2)],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Angle => "angle",
            Dimension::Power => "power",
            Dimension::Fraction => "fraction",
        }
    }
}

/// Parses `"<number> <unit>"`; whitespace between number and unit is optional.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(text.len());
    // "1e3" style exponents must not swallow a unit starting with 'e'; none do.
    let (number, unit) = text.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from {text:?}"))?;
    if !value.is_finite() {
        return Err(format!("{text:?} is not finite"));
    }
    let unit = unit.trim();
    if unit.is_empty() {
        return if dim == Dimension::Fraction {
            Ok(value)
        } else {
            Err(format!(
                "{text:?} has no unit; a {} needs one of {}",
                dim.name(),
                unit_list(dim)
            ))
        };
    }
    dim.units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, scale)| value * scale)
        .ok_or_else(|| format!("unit {unit:?} is not a {} unit ({})", dim.name(), unit_list(dim)))
}

fn unit_list(dim: Dimension) -> String {
    dim.units().iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
}
