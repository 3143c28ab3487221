//! Physical constants (CGS) and the Compton wavelength.
//!
//! The four base values are pinned to 4–5 significant figures. Planck time and
//! Planck mass are derived from them so that `T_P = Λ/c` and `ħ/(m_P c) = Λ`
//! hold to rounding.

use serde::Serialize;

use crate::error::{require_positive, Result};

pub const PLANCK_LENGTH_CM: f64 = 1.616e-33;
pub const HBAR_ERG_S: f64 = 1.0546e-27;
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.9979e10;
pub const GRAVITATIONAL_CONSTANT_CGS: f64 = 6.674e-8;

/// Electron rest mass [g].
pub const ELECTRON_MASS_G: f64 = 9.109e-28;

/// Seconds in a Julian year.
pub const YEAR_S: f64 = 3.15576e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Λ [cm]
    pub planck_length: f64,
    /// T_P [s]
    pub planck_time: f64,
    /// ħ [erg·s]
    pub hbar: f64,
    /// c [cm/s]
    pub c: f64,
    /// G [cm³ g⁻¹ s⁻²]
    pub g: f64,
    /// m_P [g]
    pub planck_mass: f64,
    /// ϱ_P = m_P/Λ³ [g/cm³]
    pub planck_density: f64,
}

impl PhysicalConstants {
    /// Builds a constant table from the base values, deriving T_P, m_P and ϱ_P.
    pub fn from_base(planck_length: f64, hbar: f64, c: f64, g: f64) -> Self {
        let planck_time = planck_length / c;
        let planck_mass = hbar / (planck_length * c);
        Self {
            planck_length,
            planck_time,
            hbar,
            c,
            g,
            planck_mass,
            planck_density: planck_mass / planck_length.powi(3),
        }
    }

    /// Planck length recomputed as `sqrt(G ħ / c³)`; agrees with the pinned
    /// value only to the rounding of the pins.
    pub fn planck_length_from_g(&self) -> f64 {
        (self.g * self.hbar / self.c.powi(3)).sqrt()
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        default_constants()
    }
}

pub fn default_constants() -> PhysicalConstants {
    PhysicalConstants::from_base(
        PLANCK_LENGTH_CM,
        HBAR_ERG_S,
        SPEED_OF_LIGHT_CM_S,
        GRAVITATIONAL_CONSTANT_CGS,
    )
}

/// Reduced Compton wavelength `ħ/(M c)` [cm].
pub fn compton_wavelength(mass: f64, constants: &PhysicalConstants) -> Result<f64> {
    let mass = require_positive("mass", mass)?;
    Ok(constants.hbar / (mass * constants.c))
}
