//! Time-domain simulation of the piezo-modulated measurement.
//!
//! A run samples the first loop's output port while the side-by-side
//! separation is modulated. The interaction phase follows `d(t)` and the
//! superfluid density follows the temperature noise; the local phase offset
//! collects the Sagnac term, platform rotation noise and vortex jumps.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::coupling::{em_line_force_at, em_phase, grav_phase};
use crate::error::{Error, Result};
use crate::interferometer::{
    detector_probability, joint_state, pair_distances, sagnac_phase_he4, BranchPhases, Model,
    PairMode,
};
use crate::seed::{stream_rng, Stream};
use crate::superfluid::{density_at_reduced, junction_time};

const SIX_HOURS: f64 = 6.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutMode {
    /// Additive Gaussian noise on the port probability.
    #[default]
    Gaussian,
    /// Binomial counting with `shots_per_sample` trials per sample.
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    /// Mean rate of vortex phase jumps, 1/s.
    pub vortex_rate: f64,
    /// RMS size of one vortex jump, rad.
    pub vortex_jump_rms: f64,
    /// Bound on the slow phase drift accumulated over six hours, rad.
    pub baseline_drift_bound: f64,
    /// RMS temperature fluctuation, K.
    pub temp_rms: f64,
    /// Correlation time of the temperature fluctuation, s.
    pub temp_corr_time: f64,
    /// Amplitude spectral density of platform angular velocity, rad/s/√Hz.
    pub rotation_noise_asd: f64,
    /// RMS readout noise, probability units.
    pub readout_noise_rms: f64,
    pub readout_mode: ReadoutMode,
    pub shots_per_sample: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            vortex_rate: 1.0 / (4.0 * 3600.0),
            vortex_jump_rms: 1e-2,
            baseline_drift_bound: 2e-3,
            temp_rms: 50e-9,
            temp_corr_time: 100.0,
            rotation_noise_asd: 0.0,
            readout_noise_rms: 1e-3,
            readout_mode: ReadoutMode::Gaussian,
            shots_per_sample: 1_000_000,
        }
    }
}

impl NoiseParams {
    /// Every noise source switched off.
    pub fn zero() -> Self {
        Self {
            vortex_rate: 0.0,
            vortex_jump_rms: 0.0,
            baseline_drift_bound: 0.0,
            temp_rms: 0.0,
            temp_corr_time: 100.0,
            rotation_noise_asd: 0.0,
            readout_noise_rms: 0.0,
            readout_mode: ReadoutMode::Gaussian,
            shots_per_sample: 1_000_000,
        }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        for (name, v) in [
            ("vortex_rate", self.vortex_rate),
            ("vortex_jump_rms", self.vortex_jump_rms),
            ("baseline_drift_bound", self.baseline_drift_bound),
            ("temp_rms", self.temp_rms),
            ("temp_corr_time", self.temp_corr_time),
            ("rotation_noise_asd", self.rotation_noise_asd),
            ("readout_noise_rms", self.readout_noise_rms),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(&format!("{prefix}.{name}"), "must be >= 0"));
            }
        }
        if self.temp_rms > 0.0 && self.temp_corr_time <= 0.0 {
            return Err(Error::invalid(
                &format!("{prefix}.temp_corr_time"),
                "must be > 0 when temp_rms > 0",
            ));
        }
        if self.readout_mode == ReadoutMode::Shots && self.shots_per_sample == 0 {
            return Err(Error::invalid(
                &format!("{prefix}.shots_per_sample"),
                "must be > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexEvent {
    pub time: f64,
    pub jump: f64,
}

/// Vortex jumps plus the piecewise-linear drift between them.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexTrack {
    pub events: Vec<VortexEvent>,
    /// Drift rate (rad/s) on each of the `events.len() + 1` segments.
    pub drift_rates: Vec<f64>,
    // offset at the start of each segment
    base: Vec<f64>,
}

impl VortexTrack {
    /// Accumulated common phase offset at time `t`.
    pub fn offset(&self, t: f64) -> f64 {
        let k = self.events.partition_point(|e| e.time <= t);
        let start = if k == 0 { 0.0 } else { self.events[k - 1].time };
        self.base[k] + self.drift_rates[k] * (t - start)
    }
}

/// Poisson vortex events over `[0, duration)` with Gaussian jumps.
///
/// Each inter-event segment drifts at a rate drawn uniformly below
/// `baseline_drift_bound / 6 h`, so no six-hour window accumulates more drift
/// than the bound.
pub fn vortex_events(params: &NoiseParams, duration: f64, seed: u64) -> Result<VortexTrack> {
    if !(duration > 0.0) {
        return Err(Error::Precondition(format!(
            "duration = {duration} must be > 0"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Vortex);
    let mut events = Vec::new();
    if params.vortex_rate > 0.0 {
        let wait = Exp::new(params.vortex_rate)
            .map_err(|e| Error::invalid("noise.vortex_rate", e.to_string()))?;
        let jump = Normal::new(0.0, params.vortex_jump_rms)
            .map_err(|e| Error::invalid("noise.vortex_jump_rms", e.to_string()))?;
        let mut t = wait.sample(&mut rng);
        while t < duration {
            events.push(VortexEvent {
                time: t,
                jump: jump.sample(&mut rng),
            });
            t += wait.sample(&mut rng);
        }
    }
    let max_rate = params.baseline_drift_bound / SIX_HOURS;
    let drift_rates: Vec<f64> = (0..=events.len())
        .map(|_| {
            if max_rate > 0.0 {
                max_rate * rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    let mut base = Vec::with_capacity(drift_rates.len());
    let (mut acc, mut start) = (0.0, 0.0);
    base.push(acc);
    for (e, rate) in events.iter().zip(&drift_rates) {
        acc += rate * (e.time - start) + e.jump;
        start = e.time;
        base.push(acc);
    }
    Ok(VortexTrack {
        events,
        drift_rates,
        base,
    })
}

fn sample_count(duration: f64, sample_rate: f64) -> usize {
    (duration * sample_rate).round() as usize
}

/// Stationary AR(1) temperature offsets with RMS `temp_rms` and correlation
/// time `temp_corr_time`.
pub fn temperature_series(
    params: &NoiseParams,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(duration > 0.0) || !(sample_rate > 0.0) {
        return Err(Error::Precondition(
            "temperature_series needs duration > 0 and sample_rate > 0".into(),
        ));
    }
    let n = sample_count(duration, sample_rate);
    if params.temp_rms == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let a = (-1.0 / (sample_rate * params.temp_corr_time)).exp();
    let innovation = params.temp_rms * (1.0 - a * a).sqrt();
    let mut rng = stream_rng(seed, Stream::Temperature);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = params.temp_rms * unit.sample(&mut rng);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x);
        x = a * x + innovation * unit.sample(&mut rng);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub d_t: Vec<f64>,
    pub model: Model,
    pub heater_on: bool,
    pub seed: u64,
    pub sample_rate: f64,
    /// Resolved configuration that produced the series.
    pub config: ExperimentConfig,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }
}

/// Chebyshev interpolant of a smooth function on `[a, b]`.
#[derive(Debug, Clone)]
struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    fn fit<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, n: usize) -> Result<Self> {
        if b <= a {
            return Ok(Self {
                a,
                b,
                coeffs: vec![f(a)?],
            });
        }
        let nodes: Vec<f64> = (0..n)
            .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
            .collect();
        let values = nodes
            .iter()
            .map(|&x| f(0.5 * (a + b) + 0.5 * (b - a) * x))
            .collect::<Result<Vec<_>>>()?;
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = (0..n)
                    .map(|k| {
                        values[k]
                            * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos()
                    })
                    .sum();
                2.0 * s / n as f64
            })
            .collect();
        Ok(Self { a, b, coeffs })
    }

    fn eval(&self, x: f64) -> f64 {
        if self.coeffs.len() == 1 {
            return self.coeffs[0];
        }
        let u = (2.0 * x - self.a - self.b) / (self.b - self.a);
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + 0.5 * self.coeffs[0]
    }
}

/// Per-sample interaction phases for a configuration.
struct PhaseModel {
    length: f64,
    cross_section: f64,
    rho_lambda: f64,
    form_factor: crate::coupling::FormFactorModel,
    delta_t: f64,
    active: usize,
    // EM phase interpolants per active pair, in pair order
    em: Vec<Chebyshev>,
}

impl PhaseModel {
    fn new(config: &ExperimentConfig, model: Model, heater_on: bool) -> Result<Self> {
        let g = &config.geometry;
        let delta_t = junction_time(config.drive.josephson_frequency)?;
        let active = if heater_on && model == Model::Qg {
            match config.coupling.mode {
                PairMode::NearestOnly => 1,
                PairMode::FullPairwise => 4,
            }
        } else {
            0
        };
        let mut em = Vec::new();
        if config.drive.e_field > 0.0 {
            let dd = config.drive.modulation_amplitude;
            let lo = pair_distances(g.length, g.separation - dd);
            let hi = pair_distances(g.length, g.separation + dd);
            for j in 0..active {
                em.push(Chebyshev::fit(
                    |d| {
                        let f = em_line_force_at(
                            config.drive.e_field,
                            g.length,
                            g.cross_section,
                            d,
                            config.superfluid.epsilon_r,
                            config.drive.e_orientation,
                        )?;
                        Ok(em_phase(f, d, delta_t))
                    },
                    lo[j],
                    hi[j],
                    12,
                )?);
            }
        }
        Ok(Self {
            length: g.length,
            cross_section: g.cross_section,
            rho_lambda: config.superfluid.rho_lambda,
            form_factor: config.coupling.form_factor,
            delta_t,
            active,
            em,
        })
    }

    fn phases(&self, separation: f64, reduced_temperature: f64) -> Result<BranchPhases> {
        let mut phases = [0.0; 4];
        if self.active == 0 {
            return Ok(BranchPhases::from_array(phases));
        }
        let rho = density_at_reduced(reduced_temperature, self.rho_lambda);
        let mass = self.length * self.cross_section * rho;
        let distances = pair_distances(self.length, separation);
        for j in 0..self.active {
            let a = self.form_factor.value(self.length, distances[j]);
            phases[j] += grav_phase(mass, distances[j], self.delta_t, a)?;
            if let Some(table) = self.em.get(j) {
                phases[j] += table.eval(distances[j]);
            }
        }
        Ok(BranchPhases::from_array(phases))
    }
}

/// Simulate one measurement run.
///
/// With the heater off the two baths are phase-locked through the film and
/// every branch phase is forced to zero, whatever the model.
pub fn simulate_run(
    config: &ExperimentConfig,
    model: Model,
    noise: &NoiseParams,
    heater_on: bool,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<TimeSeries> {
    let f_m = config.drive.modulation_frequency;
    if !(sample_rate >= 10.0 * f_m) {
        return Err(Error::Precondition(format!(
            "sample_rate >= 10·f_m violated: {sample_rate} < {}",
            10.0 * f_m
        )));
    }
    if !(duration >= 10.0 / f_m) {
        return Err(Error::Precondition(format!(
            "duration >= 10/f_m violated: {duration} < {}",
            10.0 / f_m
        )));
    }
    config.validate()?;
    noise.validate("noise")?;

    let n = sample_count(duration, sample_rate);
    let phase_model = PhaseModel::new(config, model, heater_on)?;
    let temperature = temperature_series(noise, duration, sample_rate, seed)?;
    let vortex = vortex_events(noise, duration, seed)?;
    let sagnac_scale = sagnac_phase_he4(1.0, config.geometry.loop_area())?;
    let theta0 = sagnac_scale * config.rotation.omega_perp();

    let mut rotation_rng = stream_rng(seed, Stream::Rotation);
    let rotation = (noise.rotation_noise_asd > 0.0).then(|| {
        Normal::new(0.0, noise.rotation_noise_asd * (0.5 * sample_rate).sqrt())
            .expect("finite rotation noise")
    });
    let mut readout_rng = stream_rng(seed, Stream::Readout);
    let readout = (noise.readout_mode == ReadoutMode::Gaussian && noise.readout_noise_rms > 0.0)
        .then(|| Normal::new(0.0, noise.readout_noise_rms).expect("finite readout noise"));

    let sf = &config.superfluid;
    let d0 = config.geometry.separation;
    let dd = config.drive.modulation_amplitude;
    let waveform = config.drive.waveform;

    let mut t = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut d_t = Vec::with_capacity(n);
    for (i, dtemp) in temperature.iter().enumerate() {
        let ti = i as f64 / sample_rate;
        let d = d0 - dd * waveform.value(f_m * ti);
        let reduced = (sf.t_lambda - sf.temperature - dtemp) / sf.t_lambda;
        let phases = phase_model.phases(d, reduced)?;
        let mut theta = theta0 + vortex.offset(ti);
        if let Some(dist) = &rotation {
            theta += sagnac_scale * dist.sample(&mut rotation_rng);
        }
        let p = detector_probability(&joint_state(&phases), theta);
        let sample = match noise.readout_mode {
            ReadoutMode::Gaussian => match &readout {
                Some(dist) => p + dist.sample(&mut readout_rng),
                None => p,
            },
            ReadoutMode::Shots => {
                let counts = Binomial::new(noise.shots_per_sample, p)
                    .map_err(|e| Error::Precondition(e.to_string()))?
                    .sample(&mut readout_rng);
                counts as f64 / noise.shots_per_sample as f64
            }
        };
        t.push(ti);
        y.push(sample);
        d_t.push(d);
    }

    let mut echo = config.clone();
    echo.noise = *noise;
    echo.run.model = model;
    echo.run.heater_on = heater_on;
    echo.run.duration = duration;
    echo.run.sample_rate = sample_rate;
    echo.run.seed = seed;
    Ok(TimeSeries {
        t,
        y,
        d_t,
        model,
        heater_on,
        seed,
        sample_rate,
        config: echo,
    })
}

/// `simulate_run` with every setting taken from the configuration.
pub fn simulate_config(config: &ExperimentConfig) -> Result<TimeSeries> {
    simulate_run(
        config,
        config.run.model,
        &config.noise,
        config.run.heater_on,
        config.run.duration,
        config.run.sample_rate,
        config.run.seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_vortices_at_zero_rate() {
        let p = NoiseParams {
            vortex_rate: 0.0,
            ..Default::default()
        };
        assert!(vortex_events(&p, 1e5, 1).unwrap().events.is_empty());
    }

    #[test]
    fn vortex_determinism() {
        let p = NoiseParams {
            vortex_rate: 1e-3,
            ..Default::default()
        };
        assert_eq!(
            vortex_events(&p, 1e5, 9).unwrap(),
            vortex_events(&p, 1e5, 9).unwrap()
        );
        assert_ne!(
            vortex_events(&p, 1e5, 9).unwrap(),
            vortex_events(&p, 1e5, 10).unwrap()
        );
    }

    #[test]
    fn drift_stays_within_bound() {
        let p = NoiseParams {
            vortex_rate: 0.0,
            ..Default::default()
        };
        for seed in 0..50 {
            let track = vortex_events(&p, SIX_HOURS, seed).unwrap();
            assert!(track.offset(SIX_HOURS).abs() < p.baseline_drift_bound);
        }
    }

    #[test]
    fn vortex_offset_accumulates_jumps() {
        let p = NoiseParams {
            vortex_rate: 1e-2,
            baseline_drift_bound: 0.0,
            ..Default::default()
        };
        let track = vortex_events(&p, 1e4, 3).unwrap();
        let total: f64 = track.events.iter().map(|e| e.jump).sum();
        assert!((track.offset(1e4) - total).abs() < 1e-15);
        assert_eq!(track.offset(0.0), 0.0);
    }

    #[test]
    fn zero_temperature_noise() {
        let p = NoiseParams::zero();
        assert!(temperature_series(&p, 100.0, 10.0, 1)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn chebyshev_reproduces_smooth_function() {
        let c = Chebyshev::fit(|x| Ok(1.0 / x.powi(3)), 0.0099, 0.0101, 12).unwrap();
        for k in 0..=20 {
            let x = 0.0099 + 0.0002 * k as f64 / 20.0;
            let exact = 1.0 / x.powi(3);
            assert!((c.eval(x) - exact).abs() / exact < 1e-13);
        }
    }

    #[test]
    fn preconditions_named() {
        let cfg = ExperimentConfig::default();
        let err = simulate_run(&cfg, Model::Cg, &NoiseParams::zero(), true, 100.0, 5.0, 1)
            .unwrap_err()
            .to_string();
        assert!(err.contains("sample_rate"), "{err}");
        let err = simulate_run(&cfg, Model::Cg, &NoiseParams::zero(), true, 5.0, 100.0, 1)
            .unwrap_err()
            .to_string();
        assert!(err.contains("duration"), "{err}");
    }

    #[test]
    fn shot_noise_mode_stays_in_unit_interval() {
        let cfg = ExperimentConfig::default();
        let noise = NoiseParams {
            readout_mode: ReadoutMode::Shots,
            shots_per_sample: 100,
            ..NoiseParams::zero()
        };
        let ts = simulate_run(&cfg, Model::Cg, &noise, true, 20.0, 20.0, 4).unwrap();
        assert!(ts.y.iter().all(|&y| (0.0..=1.0).contains(&y)));
        assert!(ts.y.iter().any(|&y| y != ts.y[0]));
    }
}
