//! Interaction between the side-by-side arms.
//!
//! Gravitational branch phase `φ = A·m²·(G/ħ)·Δt/d`, the line-mass form
//! factor `A`, the electrostatic analog force between the two polarized
//! superfluid columns, and the field that cancels the gravitational phase.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::ExperimentConfig;
use crate::constants::{EPSILON_0, G, HBAR};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_2d, QuadResult, QuadSettings};
use crate::roots::{bracket_upward, illinois};
use crate::superfluid::{arm_mass, junction_time, rho_s, FieldOrientation};

/// Literature estimate of the cylinder form factor at the default geometry.
pub const PUBLISHED_FORM_FACTOR: f64 = 0.5;

/// How the form factor `A` entering the phase is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormFactorModel {
    /// A fixed number, independent of geometry.
    Fixed(f64),
    /// Two parallel finite uniform line masses, evaluated per separation.
    LineMass,
}

impl Default for FormFactorModel {
    fn default() -> Self {
        FormFactorModel::Fixed(PUBLISHED_FORM_FACTOR)
    }
}

impl FormFactorModel {
    pub fn value(self, length: f64, separation: f64) -> f64 {
        match self {
            FormFactorModel::Fixed(a) => a,
            FormFactorModel::LineMass => form_factor_line(length, separation),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FormFactorRepr {
    Fixed(f64),
    Named(String),
}

impl Serialize for FormFactorModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            FormFactorModel::Fixed(a) => FormFactorRepr::Fixed(a),
            FormFactorModel::LineMass => FormFactorRepr::Named("line".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormFactorModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match FormFactorRepr::deserialize(d)? {
            FormFactorRepr::Fixed(a) => Ok(FormFactorModel::Fixed(a)),
            FormFactorRepr::Named(n) if n == "line" => Ok(FormFactorModel::LineMass),
            FormFactorRepr::Named(n) => Err(serde::de::Error::custom(format!(
                "expected a number or \"line\", got \"{n}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    pub phi_grav: f64,
    pub phi_em: f64,
    pub form_factor: f64,
    pub mass: f64,
    pub delta_t: f64,
    pub d_effective: f64,
}

/// Branch phase from the Newtonian interaction of two arm masses.
pub fn grav_phase(mass: f64, separation: f64, delta_t: f64, form_factor: f64) -> Result<f64> {
    if !(separation > 0.0) {
        return Err(Error::DegenerateSeparation(separation));
    }
    if !(delta_t > 0.0) || !(mass >= 0.0) || !(form_factor > 0.0) {
        return Err(Error::Precondition(format!(
            "grav_phase needs m >= 0, delta_t > 0, A > 0 (got m = {mass}, delta_t = {delta_t}, A = {form_factor})"
        )));
    }
    Ok(form_factor * mass * mass * (G / HBAR) * delta_t / separation)
}

/// Line-mass form factor in closed form.
///
/// `A = (d/L²)·I` with `I = 2[L·asinh(L/d) − √(L² + d²) + d]`, written in
/// terms of `δ = d/L` with the difference `√(1+δ²) − δ` rationalized.
pub fn form_factor_line(length: f64, separation: f64) -> f64 {
    let delta = separation / length;
    let tail = 1.0 / ((1.0 + delta * delta).sqrt() + delta);
    2.0 * delta * ((1.0 / delta).asinh() - tail)
}

/// Line-mass form factor by adaptive 2-D quadrature of the mutual energy.
pub fn form_factor_line_quadrature(length: f64, separation: f64) -> QuadResult {
    let delta = separation / length;
    // δ/√((u−v)² + δ²) on the unit square; bounded by 1.
    integrate_2d(
        |u, v| {
            let s = u - v;
            delta / (s * s + delta * delta).sqrt()
        },
        (0.0, 1.0),
        (0.0, 1.0),
        |u| vec![u],
        QuadSettings {
            abs_tol: 1e-12,
            rel_tol: 1e-13,
            max_intervals: 4000,
        },
    )
}

/// Clausius–Mossotti effective susceptibility `3(ε_r − 1)/(ε_r + 2)`.
pub fn effective_susceptibility(epsilon_r: f64) -> f64 {
    3.0 * (epsilon_r - 1.0) / (epsilon_r + 2.0)
}

/// Induced dipole moment per unit length of a dielectric column, C.
pub fn dipole_line_density(e_field: f64, cross_section: f64, epsilon_r: f64) -> f64 {
    EPSILON_0 * effective_susceptibility(epsilon_r) * e_field * cross_section
}

/// Separation-axis force between two equal point dipoles `p`, in units of
/// `p²/(4πε₀)`, for axial offset `dx` and transverse offset `d`. Positive
/// values push the dipoles apart.
pub fn dipole_pair_force(dx: f64, d: f64, orientation: FieldOrientation) -> f64 {
    let r2 = dx * dx + d * d;
    let r5 = r2 * r2 * r2.sqrt();
    match orientation {
        FieldOrientation::Perpendicular => 3.0 * d / r5,
        FieldOrientation::Parallel => d * (9.0 - 15.0 * d * d / r2) / r5,
        FieldOrientation::Axial => d * (3.0 - 15.0 * dx * dx / r2) / r5,
    }
}

/// Signed electrostatic force between two parallel polarized lines of length
/// `length` at separation `separation`. Positive means repulsive.
pub fn em_line_force_at(
    e_field: f64,
    length: f64,
    cross_section: f64,
    separation: f64,
    epsilon_r: f64,
    orientation: FieldOrientation,
) -> Result<f64> {
    if !(e_field >= 0.0) {
        return Err(Error::Precondition(format!(
            "E_field = {e_field} must be >= 0"
        )));
    }
    if !(separation > 0.0) {
        return Err(Error::DegenerateSeparation(separation));
    }
    if e_field == 0.0 {
        return Ok(0.0);
    }
    let p_l = dipole_line_density(e_field, cross_section, epsilon_r);
    let delta = separation / length;
    let d4 = delta.powi(4);
    // δ⁴ × dimensionless pair force keeps the integrand O(1) at the diagonal.
    let integral = integrate_2d(
        |u, v| d4 * dipole_pair_force(u - v, delta, orientation),
        (0.0, 1.0),
        (0.0, 1.0),
        |u| vec![u],
        QuadSettings {
            abs_tol: 1e-12,
            rel_tol: 1e-13,
            max_intervals: 4000,
        },
    );
    let k = 1.0 / (4.0 * PI * EPSILON_0);
    Ok(k * p_l * p_l / (length * length * d4) * integral.value)
}

pub fn em_line_force(e_field: f64, config: &ExperimentConfig) -> Result<f64> {
    em_line_force_at(
        e_field,
        config.geometry.length,
        config.geometry.cross_section,
        config.geometry.separation,
        config.superfluid.epsilon_r,
        config.drive.e_orientation,
    )
}

/// Phase from substituting the electrostatic force for `G m²/d²`.
///
/// Repulsion (positive force) gives a negative phase, opposite in sign to
/// the gravitational one.
pub fn em_phase(force: f64, separation: f64, delta_t: f64) -> f64 {
    0.0 - force * separation * delta_t / HBAR
}

/// Arm mass, junction time and the form factor at the configured separation.
pub fn evaluate(config: &ExperimentConfig) -> Result<CouplingResult> {
    let rho = rho_s(&config.superfluid)?;
    let mass = arm_mass(&config.geometry, rho)?;
    let delta_t = junction_time(config.drive.josephson_frequency)?;
    let d = config.geometry.separation;
    let form_factor = config.coupling.form_factor.value(config.geometry.length, d);
    let phi_grav = grav_phase(mass, d, delta_t, form_factor)?;
    let phi_em = em_phase(em_line_force(config.drive.e_field, config)?, d, delta_t);
    Ok(CouplingResult {
        phi_grav,
        phi_em,
        form_factor,
        mass,
        delta_t,
        d_effective: d,
    })
}

/// Static field whose electrostatic phase cancels the gravitational one.
pub fn compensating_field(config: &ExperimentConfig) -> Result<f64> {
    let base = evaluate(config)?;
    let target = base.phi_grav;
    if target == 0.0 {
        return Ok(0.0);
    }
    let d = config.geometry.separation;
    let residual = |e: f64| -> f64 {
        let force = em_line_force(e, config).unwrap_or(f64::NAN);
        (-em_phase(force, d, base.delta_t) - target) / target
    };
    if em_line_force(1.0, config)? <= 0.0 {
        return Err(Error::Precondition(format!(
            "field orientation {:?} gives an attractive force; it cannot cancel gravity",
            config.drive.e_orientation
        )));
    }
    let e_max = config.coupling.e_max;
    let (a, fa, b, fb) = bracket_upward(residual, 1e-3_f64.min(e_max), e_max)
        .ok_or(Error::CompensationOutOfRange { e_max })?;
    illinois(residual, (a, fa), (b, fb), 1e-14, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mass_zero_phase() {
        assert_eq!(grav_phase(0.0, 0.01, 1e-4, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn unit_scaling_identity() {
        let phi = grav_phase(1.0, 1.0, HBAR / G, 1.0).unwrap();
        assert!((phi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_separation() {
        assert!(matches!(
            grav_phase(1.0, 0.0, 1.0, 1.0),
            Err(Error::DegenerateSeparation(_))
        ));
        assert!(grav_phase(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn defaults_phase() {
        let phi = grav_phase(1.90e-8, 1e-2, 1e-4, 0.5).unwrap();
        assert!((phi - 1.14e6).abs() / 1.14e6 < 5e-3, "{phi}");
    }

    #[test]
    fn exact_scalings() {
        let base = grav_phase(1.3e-8, 0.01, 1e-4, 0.5).unwrap();
        assert_eq!(grav_phase(2.6e-8, 0.01, 1e-4, 0.5).unwrap(), 4.0 * base);
        assert_eq!(grav_phase(1.3e-8, 0.02, 1e-4, 0.5).unwrap(), 0.5 * base);
    }

    #[test]
    fn point_mass_limit() {
        let a = form_factor_line(1e-6, 1.0);
        assert!((a - 1.0).abs() < 1e-12, "{a}");
    }

    #[test]
    fn default_geometry_form_factor() {
        let a = form_factor_line(3e-2, 1e-2);
        assert!((a - 0.732).abs() < 1e-3, "{a}");
        let q = form_factor_line_quadrature(3e-2, 1e-2).value;
        assert!((a - q).abs() / a < 1e-8);
    }

    #[test]
    fn form_factor_in_unit_interval_and_decreasing() {
        let mut last = 1.0;
        for k in 0..=60 {
            let ratio = 10f64.powf(-3.0 + 0.1 * k as f64);
            let a = form_factor_line(ratio, 1.0);
            assert!(a > 0.0 && a <= 1.0);
            assert!(a < last || k == 0);
            last = a;
        }
    }

    #[test]
    fn zero_field_zero_force() {
        let f = em_line_force_at(
            0.0,
            0.03,
            4e-6,
            0.01,
            1.057,
            FieldOrientation::Perpendicular,
        )
        .unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn negative_field_rejected() {
        assert!(em_line_force_at(
            -1.0,
            0.03,
            4e-6,
            0.01,
            1.057,
            FieldOrientation::Perpendicular
        )
        .is_err());
    }

    #[test]
    fn orientation_signs() {
        let f = |o| em_line_force_at(10.0, 0.03, 4e-6, 0.01, 1.057, o).unwrap();
        assert!(f(FieldOrientation::Perpendicular) > 0.0);
        assert!(f(FieldOrientation::Parallel) < 0.0);
    }

    #[test]
    fn em_phase_identities() {
        assert_eq!(em_phase(0.0, 0.01, 1e-4), 0.0);
        let unit = em_phase(HBAR / (0.01 * 1e-4), 0.01, 1e-4);
        assert!((unit + 1.0).abs() < 1e-15);
        let (a, m, d, dt) = (0.5, 1.9e-8, 0.01, 1e-4);
        let f = a * G * m * m / (d * d);
        let pg = grav_phase(m, d, dt, a).unwrap();
        assert!((em_phase(f, d, dt).abs() - pg).abs() / pg < 1e-14);
    }

    #[test]
    fn form_factor_model_serde() {
        #[derive(Serialize, Deserialize)]
        struct W {
            a: FormFactorModel,
        }
        let w: W = toml::from_str("a = \"line\"").unwrap();
        assert_eq!(w.a, FormFactorModel::LineMass);
        let w: W = toml::from_str("a = 0.25").unwrap();
        assert_eq!(w.a, FormFactorModel::Fixed(0.25));
        assert!(toml::from_str::<W>("a = \"cylinder\"").is_err());
    }
}
