//! Superfluid He⁴ material properties and Josephson timing.
//!
//! The superfluid density follows the power law
//! `ρ_s(T) = 2.4 ρ_λ (1 − T/T_λ)^{2/3}` just below the lambda point. The
//! arm mass is the superfluid contained in one channel of the loop, and the
//! junction time is half a Josephson period.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the ideal (non-dissipative) Josephson window below `T_λ`, K.
pub const JOSEPHSON_WINDOW: f64 = 1e-3;

/// Prefactor of the superfluid density law.
pub const DENSITY_PREFACTOR: f64 = 2.4;

/// Exponent of the superfluid density law.
pub const DENSITY_EXPONENT: f64 = 2.0 / 3.0;

/// Default relative permittivity of liquid He⁴ near the lambda point.
pub const DEFAULT_EPSILON_R: f64 = 1.057;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuperfluidParams {
    /// Lambda-point temperature, K.
    #[serde(rename = "T_lambda")]
    pub t_lambda: f64,
    /// Density scale of the power law, kg/m³.
    pub rho_lambda: f64,
    /// Operating temperature, K.
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Relative dielectric constant of the liquid.
    pub epsilon_r: f64,
    /// Permit temperatures more than 1 mK below `T_λ` (exploratory sweeps).
    pub allow_outside_regime: bool,
}

impl Default for SuperfluidParams {
    fn default() -> Self {
        Self {
            t_lambda: 2.17,
            rho_lambda: 1.5e2,
            temperature: 2.17 - 20e-6,
            epsilon_r: DEFAULT_EPSILON_R,
            allow_outside_regime: false,
        }
    }
}

impl SuperfluidParams {
    /// Reduced temperature `1 − T/T_λ`, evaluated as `(T_λ − T)/T_λ` so the
    /// subtraction is exact near the transition.
    pub fn reduced_temperature(&self) -> f64 {
        (self.t_lambda - self.temperature) / self.t_lambda
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let key = |k: &str| format!("{prefix}.{k}");
        if !(self.t_lambda > 0.0) || !self.t_lambda.is_finite() {
            return Err(Error::invalid(&key("T_lambda"), "must be > 0"));
        }
        if !(self.rho_lambda > 0.0) || !self.rho_lambda.is_finite() {
            return Err(Error::invalid(&key("rho_lambda"), "must be > 0"));
        }
        if !(self.epsilon_r > 1.0) || !self.epsilon_r.is_finite() {
            return Err(Error::invalid(&key("epsilon_r"), "must be > 1"));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::invalid(&key("T"), "must be > 0"));
        }
        check_regime(self).map_err(|e| Error::invalid(&key("T"), e.to_string()))
    }
}

fn check_regime(params: &SuperfluidParams) -> Result<()> {
    if params.temperature >= params.t_lambda {
        return Err(Error::AboveLambda {
            t: params.temperature,
            t_lambda: params.t_lambda,
        });
    }
    let below = params.t_lambda - params.temperature;
    if below > JOSEPHSON_WINDOW && !params.allow_outside_regime {
        return Err(Error::OutsideJosephsonRegime { below });
    }
    Ok(())
}

/// Density law evaluated at a reduced temperature `x = 1 − T/T_λ`.
///
/// Returns zero for `x <= 0` (at or above the transition).
pub fn density_at_reduced(x: f64, rho_lambda: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        DENSITY_PREFACTOR * rho_lambda * x.powf(DENSITY_EXPONENT)
    }
}

/// Superfluid mass density at the operating temperature, kg/m³.
///
/// `T = T_λ` is accepted and yields exactly zero; anything above is an error,
/// as is a temperature outside the 1 mK Josephson window unless the override
/// flag is set.
pub fn rho_s(params: &SuperfluidParams) -> Result<f64> {
    if params.temperature == params.t_lambda {
        return Ok(0.0);
    }
    check_regime(params)?;
    Ok(density_at_reduced(
        params.reduced_temperature(),
        params.rho_lambda,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    /// Arm length, m.
    #[serde(rename = "L")]
    pub length: f64,
    /// Channel cross section, m².
    #[serde(rename = "sigma")]
    pub cross_section: f64,
    /// Separation of the side-by-side arms, m.
    #[serde(rename = "d")]
    pub separation: f64,
    /// Rotation-sensing area of one loop, m². Defaults to `L²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loop_area: Option<f64>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            length: 3e-2,
            cross_section: 4e-6,
            separation: 1e-2,
            loop_area: None,
        }
    }
}

impl Geometry {
    pub fn loop_area(&self) -> f64 {
        self.loop_area.unwrap_or(self.length * self.length)
    }

    /// Center-to-center distance between an arm and the far arm of the other
    /// loop.
    pub fn far_separation(&self) -> f64 {
        2.0 * self.length
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let key = |k: &str| format!("{prefix}.{k}");
        for (name, v) in [
            ("L", self.length),
            ("sigma", self.cross_section),
            ("d", self.separation),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(&key(name), "must be > 0"));
            }
        }
        if let Some(a) = self.loop_area {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::invalid(&key("loop_area"), "must be > 0"));
            }
        }
        if self.separation >= 2.0 * self.length {
            return Err(Error::invalid(
                &key("d"),
                format!("must be < 2L = {}", 2.0 * self.length),
            ));
        }
        Ok(())
    }
}

/// Waveform of the piezo distance modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    #[default]
    Sine,
    Square,
}

impl Waveform {
    /// Unit-amplitude waveform at phase `2π·cycles`.
    pub fn value(self, cycles: f64) -> f64 {
        let s = (std::f64::consts::TAU * cycles.fract()).sin();
        match self {
            Waveform::Sine => s,
            Waveform::Square => {
                if cycles.rem_euclid(1.0) < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Direction of the applied static electric field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldOrientation {
    /// Along the axis joining the two side-by-side arms.
    Parallel,
    /// Normal to both the separation axis and the arms.
    #[default]
    Perpendicular,
    /// Along the arms, normal to the separation axis.
    Axial,
}

impl std::str::FromStr for FieldOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(Self::Parallel),
            "perpendicular" => Ok(Self::Perpendicular),
            "axial" => Ok(Self::Axial),
            other => Err(Error::invalid(
                "drive.E_orientation",
                format!("unsupported orientation `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveParams {
    /// Josephson probe frequency, Hz.
    #[serde(rename = "f_J")]
    pub josephson_frequency: f64,
    /// Piezo modulation amplitude, m.
    #[serde(rename = "delta_d")]
    pub modulation_amplitude: f64,
    /// Piezo modulation frequency, Hz.
    #[serde(rename = "f_m")]
    pub modulation_frequency: f64,
    /// Static electric field, V/m.
    #[serde(rename = "E_field")]
    pub e_field: f64,
    #[serde(rename = "E_orientation")]
    pub e_orientation: FieldOrientation,
    pub waveform: Waveform,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self {
            josephson_frequency: 5e3,
            modulation_amplitude: 1e-6,
            modulation_frequency: 1.0,
            e_field: 0.0,
            e_orientation: FieldOrientation::default(),
            waveform: Waveform::default(),
        }
    }
}

impl DriveParams {
    pub fn validate(&self, prefix: &str, geometry: &Geometry) -> Result<()> {
        let key = |k: &str| format!("{prefix}.{k}");
        if !(self.josephson_frequency > 0.0) || !self.josephson_frequency.is_finite() {
            return Err(Error::invalid(&key("f_J"), "must be > 0"));
        }
        if !(self.modulation_amplitude >= 0.0) || self.modulation_amplitude >= geometry.separation {
            return Err(Error::invalid(
                &key("delta_d"),
                "must satisfy 0 <= delta_d < d",
            ));
        }
        if !(self.modulation_frequency > 0.0) || !self.modulation_frequency.is_finite() {
            return Err(Error::invalid(&key("f_m"), "must be > 0"));
        }
        if !(self.e_field >= 0.0) || !self.e_field.is_finite() {
            return Err(Error::invalid(&key("E_field"), "must be >= 0"));
        }
        Ok(())
    }
}

/// Superfluid mass in one arm, `m = L·σ·ρ_s`.
pub fn arm_mass(geometry: &Geometry, rho_s: f64) -> Result<f64> {
    if !(rho_s >= 0.0) {
        return Err(Error::Precondition(format!("rho_s = {rho_s} must be >= 0")));
    }
    Ok(geometry.length * geometry.cross_section * rho_s)
}

/// Characteristic junction time `Δt_J = 1/(2 f_J)`.
pub fn junction_time(f_j: f64) -> Result<f64> {
    if !(f_j > 0.0) {
        return Err(Error::invalid(
            "drive.f_J",
            "Josephson frequency must be > 0",
        ));
    }
    Ok(1.0 / (2.0 * f_j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(below: f64) -> SuperfluidParams {
        SuperfluidParams {
            temperature: 2.17 - below,
            ..Default::default()
        }
    }

    #[test]
    fn density_vanishes_at_lambda() {
        let p = SuperfluidParams {
            temperature: 2.17,
            ..Default::default()
        };
        assert_eq!(rho_s(&p).unwrap(), 0.0);
    }

    #[test]
    fn density_at_20_microkelvin() {
        let rho = rho_s(&at(20e-6)).unwrap();
        assert!((rho - 0.158).abs() / 0.158 < 5e-3, "{rho}");
    }

    #[test]
    fn density_at_reduced_1e6_is_exact() {
        let rho = density_at_reduced(1e-6, 150.0);
        assert!((rho - 0.036).abs() < 1e-14, "{rho}");
    }

    #[test]
    fn density_errors() {
        assert!(matches!(rho_s(&at(-1e-6)), Err(Error::AboveLambda { .. })));
        assert!(matches!(
            rho_s(&at(2e-3)),
            Err(Error::OutsideJosephsonRegime { .. })
        ));
        let mut p = at(2e-3);
        p.allow_outside_regime = true;
        assert!(rho_s(&p).unwrap() > 0.0);
    }

    #[test]
    fn density_increases_as_temperature_drops() {
        let mut last = 0.0;
        for k in 1..100 {
            let rho = rho_s(&at(k as f64 * 1e-5)).unwrap();
            assert!(rho > last);
            last = rho;
        }
    }

    #[test]
    fn two_thirds_scaling() {
        for x in [1e-9, 3.7e-7, 1e-5, 1e-4] {
            let ratio = density_at_reduced(8.0 * x, 150.0) / density_at_reduced(x, 150.0);
            assert!((ratio - 4.0).abs() < 1e-12, "{ratio}");
        }
    }

    #[test]
    fn arm_mass_defaults() {
        let m = arm_mass(&Geometry::default(), 0.158).unwrap();
        assert!((m - 1.896e-8).abs() < 1e-20);
        assert_eq!(arm_mass(&Geometry::default(), 0.0).unwrap(), 0.0);
        let doubled = Geometry {
            cross_section: 8e-6,
            ..Default::default()
        };
        assert_eq!(arm_mass(&doubled, 0.158).unwrap(), 2.0 * m);
        assert!(arm_mass(&Geometry::default(), -1.0).is_err());
    }

    #[test]
    fn junction_times() {
        assert_eq!(junction_time(5e3).unwrap(), 1e-4);
        assert_eq!(junction_time(1e3).unwrap(), 5e-4);
        assert_eq!(junction_time(1e4).unwrap(), 5e-5);
        assert!(junction_time(0.0).is_err());
        assert!(junction_time(-3.0).is_err());
        for f in [0.3, 1.0, 17.0, 5e3, 1.234e4] {
            // one ulp: the product is rounded twice
            assert!((junction_time(f).unwrap() * f - 0.5).abs() <= f64::EPSILON / 2.0);
        }
    }

    #[test]
    fn geometry_invariants() {
        assert!(Geometry::default().validate("geometry").is_ok());
        let bad = Geometry {
            separation: 0.07,
            ..Default::default()
        };
        let err = bad.validate("geometry").unwrap_err().to_string();
        assert!(err.contains("geometry.d"), "{err}");
    }

    #[test]
    fn orientation_parse() {
        assert_eq!(
            "axial".parse::<FieldOrientation>().unwrap(),
            FieldOrientation::Axial
        );
        assert!("diagonal".parse::<FieldOrientation>().is_err());
    }
}
