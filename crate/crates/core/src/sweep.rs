//! Design-point summaries and deterministic parameter sweeps.

use rayon::prelude::*;

use crate::analysis::lockin;
use crate::config::{with_parameter, ExperimentConfig};
use crate::coupling::{self, form_factor_line, form_factor_line_quadrature};
use crate::error::{Error, Result};
use crate::interferometer::{branch_phases, entanglement_measures, joint_state, sagnac_phase_he4};
use crate::noise::simulate_config;
use crate::seed::derive_seed;
use crate::superfluid::{junction_time, rho_s};

/// Every derived quantity of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub rho_s: f64,
    pub mass: f64,
    pub delta_t: f64,
    /// Form factor used in the phase.
    pub form_factor: f64,
    /// Line-mass form factor at the configured geometry, closed form.
    pub form_factor_line: f64,
    pub form_factor_line_quadrature: f64,
    pub phi_grav: f64,
    pub phi_em: f64,
    /// Phase excursion `φ(d − δd) − φ(d)` for the configured piezo amplitude.
    pub delta_phi: f64,
    pub sagnac_phase: f64,
    pub visibility: f64,
    pub concurrence: f64,
    pub negativity: f64,
}

pub fn design_point(config: &ExperimentConfig) -> Result<DesignPoint> {
    let c = coupling::evaluate(config)?;
    let g = &config.geometry;
    let closer = g.separation - config.drive.modulation_amplitude;
    let a_closer = config.coupling.form_factor.value(g.length, closer);
    let phi_closer = coupling::grav_phase(c.mass, closer, c.delta_t, a_closer)?;
    let phases = branch_phases(config, config.run.model, config.coupling.mode)?;
    let measures = entanglement_measures(&joint_state(&phases))?;
    Ok(DesignPoint {
        rho_s: rho_s(&config.superfluid)?,
        mass: c.mass,
        delta_t: junction_time(config.drive.josephson_frequency)?,
        form_factor: c.form_factor,
        form_factor_line: form_factor_line(g.length, g.separation),
        form_factor_line_quadrature: form_factor_line_quadrature(g.length, g.separation).value,
        phi_grav: c.phi_grav,
        phi_em: c.phi_em,
        delta_phi: phi_closer - c.phi_grav,
        sagnac_phase: sagnac_phase_he4(config.rotation.omega_perp(), g.loop_area())?,
        visibility: measures.visibility,
        concurrence: measures.concurrence,
        negativity: measures.negativity,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        count: usize,
        log: bool,
    },
}

impl SweepValues {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            SweepValues::List(v) if v.is_empty() => {
                Err(Error::Precondition("sweep value list is empty".into()))
            }
            SweepValues::List(v) => Ok(v.clone()),
            &SweepValues::Range {
                min,
                max,
                count,
                log,
            } => {
                if count == 0 {
                    return Err(Error::Precondition("sweep count must be >= 1".into()));
                }
                if log && !(min > 0.0 && max > 0.0) {
                    return Err(Error::Precondition(
                        "log sweep needs positive bounds".into(),
                    ));
                }
                if count == 1 {
                    return Ok(vec![min]);
                }
                let step = |k: usize| k as f64 / (count - 1) as f64;
                Ok((0..count)
                    .map(|k| {
                        if log {
                            (min.ln() + (max.ln() - min.ln()) * step(k)).exp()
                        } else {
                            min + (max - min) * step(k)
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Dotted parameter path, e.g. `geometry.d`.
    pub parameter: String,
    pub values: SweepValues,
    pub base: ExperimentConfig,
    /// Also simulate each point and record its first-harmonic amplitude.
    pub simulate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub seed: u64,
    pub point: DesignPoint,
    pub harmonic1: Option<f64>,
}

fn sweep_point(spec: &SweepSpec, index: usize, value: f64) -> Result<SweepRow> {
    let mut config = with_parameter(&spec.base, &spec.parameter, value)?;
    let seed = derive_seed(spec.base.run.seed, index as u64);
    config.run.seed = seed;
    let point = design_point(&config)?;
    let harmonic1 = if spec.simulate {
        let series = simulate_config(&config)?;
        Some(lockin(&series, config.drive.modulation_frequency, 1)?.first_amplitude())
    } else {
        None
    };
    Ok(SweepRow {
        index,
        value,
        seed,
        point,
        harmonic1,
    })
}

/// Evaluate every sweep point in parallel. Each point gets the seed derived
/// from the base seed and its index, so rows do not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let values = spec.values.points()?;
    // Validate the path once up front for a clean error.
    with_parameter(&spec.base, &spec.parameter, values[0])?;
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| sweep_point(spec, i, v))
        .collect()
}

/// Evaluate the listed indices only, in the given order.
pub fn run_sweep_points(spec: &SweepSpec, indices: &[usize]) -> Result<Vec<SweepRow>> {
    let values = spec.values.points()?;
    indices
        .iter()
        .map(|&i| {
            let v = *values
                .get(i)
                .ok_or_else(|| Error::Precondition(format!("sweep index {i} out of range")))?;
            sweep_point(spec, i, v)
        })
        .collect()
}
