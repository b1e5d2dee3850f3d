//! Physical constants in the units the toolkit works in.

/// Constants used by the thermal-occupation and linewidth math.
///
/// Immutable value object; `standard()` is the only constructor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Boltzmann constant expressed as a wavenumber, cm⁻¹ per kelvin.
    /// Level energies are kept in cm⁻¹ so occupation math never touches joules.
    pub boltzmann_wavenumber: f64,
    pub two_pi: f64,
}

impl PhysicalConstants {
    pub const fn standard() -> Self {
        PhysicalConstants {
            boltzmann_wavenumber: 0.695035,
            two_pi: 2.0 * std::f64::consts::PI,
        }
    }
}

/// The standard constant set.
pub const CONSTANTS: PhysicalConstants = PhysicalConstants::standard();
