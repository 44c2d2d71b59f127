//! Two side-by-side interferometers treated as a pair of path qubits.
//!
//! Each loop carries its superfluid in an equal superposition of the near
//! arm `u` (the one facing the other loop) and the far arm `l`. The four arm
//! pairs pick up interaction phases; their pattern decides whether the two
//! loops end up entangled and how much single-loop fringe contrast remains.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::constants::{HBAR, M_HE4};
use crate::coupling::{em_line_force_at, em_phase, grav_phase};
use crate::error::{Error, Result};
use crate::superfluid::{arm_mass, junction_time, rho_s};

/// Hypothesis about the nature of the gravitational interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Gravity can mediate entanglement.
    #[default]
    Qg,
    /// Gravity is classical: only a branch-independent phase.
    Cg,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Qg => "qg",
            Model::Cg => "cg",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qg" => Ok(Model::Qg),
            "cg" => Ok(Model::Cg),
            other => Err(Error::invalid(
                "run.model",
                format!("unknown model `{other}`"),
            )),
        }
    }
}

/// Which arm pairs contribute an interaction phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Only the side-by-side pair (`d ≪ 2L`).
    #[default]
    NearestOnly,
    /// Every arm pair at its center-to-center distance.
    FullPairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchPhases {
    pub uu: f64,
    pub ul: f64,
    pub lu: f64,
    pub ll: f64,
}

impl BranchPhases {
    pub fn as_array(&self) -> [f64; 4] {
        [self.uu, self.ul, self.lu, self.ll]
    }

    pub fn from_array([uu, ul, lu, ll]: [f64; 4]) -> Self {
        Self { uu, ul, lu, ll }
    }
}

/// Center-to-center distances of the four arm pairs `(uu, ul, lu, ll)` for a
/// side-by-side separation `d`.
pub fn pair_distances(length: f64, d: f64) -> [f64; 4] {
    [d, 2.0 * length, 2.0 * length, 2.0 * length + d]
}

/// Interaction phases of the four branches.
///
/// Under CG every branch phase is zero: a classical field only shifts the
/// global phase, which is absorbed into the interferometer bias.
pub fn branch_phases(
    config: &ExperimentConfig,
    model: Model,
    mode: PairMode,
) -> Result<BranchPhases> {
    if model == Model::Cg {
        return Ok(BranchPhases::default());
    }
    let rho = rho_s(&config.superfluid)?;
    let mass = arm_mass(&config.geometry, rho)?;
    let delta_t = junction_time(config.drive.josephson_frequency)?;
    let geometry = &config.geometry;
    let distances = pair_distances(geometry.length, geometry.separation);
    let active = match mode {
        PairMode::NearestOnly => 1,
        PairMode::FullPairwise => 4,
    };
    let mut phases = [0.0; 4];
    for (phase, &d) in phases.iter_mut().zip(&distances).take(active) {
        let a = config.coupling.form_factor.value(geometry.length, d);
        *phase += grav_phase(mass, d, delta_t, a)?;
        if config.drive.e_field > 0.0 {
            let force = em_line_force_at(
                config.drive.e_field,
                geometry.length,
                geometry.cross_section,
                d,
                config.superfluid.epsilon_r,
                config.drive.e_orientation,
            )?;
            *phase += em_phase(force, d, delta_t);
        }
    }
    Ok(BranchPhases::from_array(phases))
}

/// Pure state of the two path qubits, ordered `uu, ul, lu, ll` (first index
/// is the first loop).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub amplitudes: [Complex64; 4],
}

impl JointState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let g = Complex64::cis(alpha);
        Self {
            amplitudes: self.amplitudes.map(|a| a * g),
        }
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Off-diagonal element `⟨u|ρ₁|l⟩` of the first loop's reduced state.
    pub fn coherence(&self) -> Complex64 {
        let [uu, ul, lu, ll] = self.amplitudes;
        uu * lu.conj() + ul * ll.conj()
    }
}

/// Equal-weight superposition with the given branch phases.
pub fn joint_state(phases: &BranchPhases) -> JointState {
    JointState {
        amplitudes: phases.as_array().map(|p| {
            if p == 0.0 {
                Complex64::new(0.5, 0.0)
            } else {
                Complex64::cis(p) * 0.5
            }
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementMeasures {
    pub visibility: f64,
    pub concurrence: f64,
    pub negativity: f64,
}

/// Density matrix `|ψ⟩⟨ψ|` partially transposed on the second qubit.
pub fn partial_transpose(state: &JointState) -> Matrix4<Complex64> {
    let a = &state.amplitudes;
    Matrix4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (c / 2, c % 2);
        // ρ^{T_B}_{(ij),(kl)} = ρ_{(il),(kj)}
        a[2 * i + l] * a[2 * k + j].conj()
    })
}

pub fn negativity(state: &JointState) -> f64 {
    let eig = SymmetricEigen::new(partial_transpose(state));
    eig.eigenvalues
        .iter()
        .filter(|&&l| l < 0.0)
        .map(|l| -l)
        .sum()
}

pub fn entanglement_measures(state: &JointState) -> Result<EntanglementMeasures> {
    state.check_normalized()?;
    let [uu, ul, lu, ll] = state.amplitudes;
    Ok(EntanglementMeasures {
        visibility: (2.0 * state.coherence().norm()).min(1.0),
        concurrence: (2.0 * (uu * ll - ul * lu).norm()).min(1.0),
        negativity: negativity(state),
    })
}

/// Matter-wave Sagnac phase `2·m₄·Ω⊥·A/ħ` threading one loop.
pub fn sagnac_phase(omega_perp: f64, loop_area: f64, atom_mass: f64) -> Result<f64> {
    if !(loop_area > 0.0) {
        return Err(Error::Precondition(format!(
            "loop_area = {loop_area} must be > 0"
        )));
    }
    Ok(2.0 * atom_mass * omega_perp * loop_area / HBAR)
}

/// Sagnac phase for a He⁴ loop.
pub fn sagnac_phase_he4(omega_perp: f64, loop_area: f64) -> Result<f64> {
    sagnac_phase(omega_perp, loop_area, M_HE4)
}

/// Probability of the `+` output port of the first loop at local phase
/// offset `theta`.
pub fn detector_probability(state: &JointState, theta: f64) -> f64 {
    let c = Complex64::cis(theta) * state.coherence() * 2.0;
    (0.5 * (1.0 + c.re)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn nearest(phi: f64) -> JointState {
        joint_state(&BranchPhases {
            uu: phi,
            ..Default::default()
        })
    }

    #[test]
    fn product_state_at_zero() {
        let s = nearest(0.0);
        for a in s.amplitudes {
            assert_eq!(a, Complex64::new(0.5, 0.0));
        }
        let m = entanglement_measures(&s).unwrap();
        assert_eq!((m.visibility, m.concurrence), (1.0, 0.0));
        assert!(m.negativity.abs() < 1e-15);
    }

    #[test]
    fn maximal_entanglement_at_pi() {
        let m = entanglement_measures(&nearest(PI)).unwrap();
        assert!(m.visibility < 1e-15);
        assert!((m.concurrence - 1.0).abs() < 1e-15);
        assert!((m.negativity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn() {
        let m = entanglement_measures(&nearest(PI / 2.0)).unwrap();
        assert!((m.visibility - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((m.concurrence - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((m.negativity - FRAC_1_SQRT_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_only_closed_forms() {
        for k in 0..50 {
            let phi = 0.37 * k as f64;
            let m = entanglement_measures(&nearest(phi)).unwrap();
            assert!((m.visibility - (phi / 2.0).cos().abs()).abs() < 1e-14);
            assert!((m.concurrence - (phi / 2.0).sin().abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn unnormalized_rejected() {
        let mut s = nearest(0.3);
        s.amplitudes[0] *= 2.0;
        assert!(matches!(
            entanglement_measures(&s),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn detector_extremes() {
        assert!((detector_probability(&nearest(0.0), 0.0) - 1.0).abs() < 1e-15);
        for theta in [0.0, 0.4, 2.0, -1.0] {
            assert!((detector_probability(&nearest(PI), theta) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn detector_mean_over_theta() {
        let s = nearest(0.8);
        let n = 1000;
        let mean: f64 = (0..n)
            .map(|k| detector_probability(&s, TAU * k as f64 / n as f64))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 1e-14);
    }

    #[test]
    fn sagnac_earth() {
        let phi = sagnac_phase_he4(7.292e-5, 9e-4).unwrap();
        assert!((phi - 8.27).abs() / 8.27 < 1e-2, "{phi}");
        assert_eq!(sagnac_phase_he4(0.0, 9e-4).unwrap(), 0.0);
        assert!(sagnac_phase_he4(1.0, 0.0).is_err());
    }

    #[test]
    fn partial_transpose_is_hermitian() {
        let s = joint_state(&BranchPhases::from_array([0.3, 1.1, -2.0, 0.7]));
        let pt = partial_transpose(&s);
        assert!((pt - pt.adjoint()).norm() < 1e-15);
        assert!((pt.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_parse() {
        assert_eq!("QG".parse::<Model>().unwrap(), Model::Qg);
        assert!("semi".parse::<Model>().is_err());
    }
}
