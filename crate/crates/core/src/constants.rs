//! Physical constants (CODATA) shared by every module.

/// Newtonian gravitational constant, m³ kg⁻¹ s⁻².
pub const G: f64 = 6.674e-11;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.0546e-34;

/// Mass of a helium-4 atom, kg.
pub const M_HE4: f64 = 6.6465e-27;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854e-12;

/// Sidereal rotation rate of the Earth, rad/s.
pub const OMEGA_EARTH: f64 = 7.292e-5;

/// Physical constants bundled for code that wants to pass them around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub g: f64,
    pub hbar: f64,
    pub m_he4: f64,
    pub epsilon_0: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            g: G,
            hbar: HBAR,
            m_he4: M_HE4,
            epsilon_0: EPSILON_0,
        }
    }
}
