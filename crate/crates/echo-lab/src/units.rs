//! Unit tags and conversion to the internal base units.
//!
//! All model math runs in base units: seconds, hertz, V/cm, and cm⁻¹ for
//! level energies. I/O layers may declare any tag from the fixed set below;
//! conversion is a single multiplication, so round trips are exact to within
//! binary-float rounding.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Physical dimension of a unit tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Frequency,
    ElectricField,
    Wavenumber,
}

/// One of the accepted unit tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Second,
    Millisecond,
    Microsecond,
    Nanosecond,
    Hertz,
    Kilohertz,
    Megahertz,
    VoltPerCm,
    VoltPerMm,
    VoltPerM,
    InverseCm,
}

impl Unit {
    /// Multiplicative factor taking a value in this unit to base units.
    pub fn factor_to_base(self) -> f64 {
        match self {
            Unit::Second => 1.0,
            Unit::Millisecond => 1e-3,
            Unit::Microsecond => 1e-6,
            Unit::Nanosecond => 1e-9,
            Unit::Hertz => 1.0,
            Unit::Kilohertz => 1e3,
            Unit::Megahertz => 1e6,
            Unit::VoltPerCm => 1.0,
            Unit::VoltPerMm => 10.0,
            Unit::VoltPerM => 1e-2,
            Unit::InverseCm => 1.0,
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Second | Unit::Millisecond | Unit::Microsecond | Unit::Nanosecond => {
                Dimension::Time
            }
            Unit::Hertz | Unit::Kilohertz | Unit::Megahertz => Dimension::Frequency,
            Unit::VoltPerCm | Unit::VoltPerMm | Unit::VoltPerM => Dimension::ElectricField,
            Unit::InverseCm => Dimension::Wavenumber,
        }
    }

    /// Convert a value in this unit to base units.
    pub fn to_base(self, value: f64) -> f64 {
        value * self.factor_to_base()
    }

    /// Convert a value in base units back to this unit.
    pub fn from_base(self, value: f64) -> f64 {
        value / self.factor_to_base()
    }

    pub fn tag(self) -> &'static str {
        match self {
            Unit::Second => "s",
            Unit::Millisecond => "ms",
            Unit::Microsecond => "us",
            Unit::Nanosecond => "ns",
            Unit::Hertz => "Hz",
            Unit::Kilohertz => "kHz",
            Unit::Megahertz => "MHz",
            Unit::VoltPerCm => "V/cm",
            Unit::VoltPerMm => "V/mm",
            Unit::VoltPerM => "V/m",
            Unit::InverseCm => "cm-1",
        }
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(Unit::Second),
            "ms" => Ok(Unit::Millisecond),
            "us" | "µs" => Ok(Unit::Microsecond),
            "ns" => Ok(Unit::Nanosecond),
            "Hz" => Ok(Unit::Hertz),
            "kHz" => Ok(Unit::Kilohertz),
            "MHz" => Ok(Unit::Megahertz),
            "V/cm" => Ok(Unit::VoltPerCm),
            "V/mm" => Ok(Unit::VoltPerMm),
            "V/m" => Ok(Unit::VoltPerM),
            "cm-1" | "cm⁻¹" => Ok(Unit::InverseCm),
            other => Err(Error::UnknownUnit(other.to_string())),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Convert `value` tagged with `unit` into base units (s, Hz, V/cm, cm⁻¹).
pub fn canonicalize_units(value: f64, unit: &str) -> Result<f64> {
    let u: Unit = unit.parse()?;
    Ok(u.to_base(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn metric_prefixes() {
        assert_relative_eq!(canonicalize_units(82.0, "us").unwrap(), 8.2e-5);
        assert_relative_eq!(canonicalize_units(100.0, "V/mm").unwrap(), 1000.0);
        assert_relative_eq!(canonicalize_units(3.0, "MHz").unwrap(), 3.0e6);
    }

    #[test]
    fn unknown_tag_rejected() {
        let err = canonicalize_units(1.0, "furlong").unwrap_err();
        assert!(matches!(err, Error::UnknownUnit(t) if t == "furlong"));
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!("µs".parse::<Unit>().unwrap(), Unit::Microsecond);
        assert_eq!("cm⁻¹".parse::<Unit>().unwrap(), Unit::InverseCm);
    }

    #[test]
    fn round_trip_identity() {
        let units = [
            Unit::Second,
            Unit::Millisecond,
            Unit::Microsecond,
            Unit::Nanosecond,
            Unit::Hertz,
            Unit::Kilohertz,
            Unit::Megahertz,
            Unit::VoltPerCm,
            Unit::VoltPerMm,
            Unit::VoltPerM,
            Unit::InverseCm,
        ];
        for u in units {
            for v in [1.0, 82.0, 2.364, 1.35e20, 6.674e-11] {
                let back = u.from_base(u.to_base(v));
                assert!(
                    (back - v).abs() <= 1e-12 * v.abs(),
                    "{u}: {v} -> {back}"
                );
            }
        }
    }
}
