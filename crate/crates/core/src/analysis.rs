//! Lock-in demodulation and the QG-vs-CG decision.
//!
//! The decision statistic is the first-harmonic lock-in amplitude. Its null
//! distribution is calibrated empirically from CG simulations, and the
//! p-value is the fraction of null samples at or above the measured value.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::interferometer::Model;
use crate::noise::{simulate_run, NoiseParams, TimeSeries};
use crate::seed::derive_seed;

/// Off-harmonic DFT bins on each side of the fundamental used for the noise floor.
const FLOOR_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub order: usize,
    pub amplitude: f64,
    pub phase: f64,
    /// Complex amplitude `X + iY` with `y ≈ X cos + Y sin`.
    pub vector: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockinResult {
    pub harmonics: Vec<Harmonic>,
    pub noise_floor: f64,
    pub integration_time: f64,
    pub samples_used: usize,
    /// Samples dropped to keep an integer number of modulation periods.
    pub truncated_samples: usize,
}

impl LockinResult {
    pub fn first_amplitude(&self) -> f64 {
        self.harmonics[0].amplitude
    }
}

/// Samples between exact re-evaluations of the reference phasor.
const RESYNC: usize = 512;

/// Projection of `y` onto `cos`/`sin` at `cycles_per_sample` cycles per sample.
///
/// The reference is advanced by complex rotation and re-anchored to an exact
/// `sin_cos` every `RESYNC` samples, which keeps the phase error near 1e-13.
fn project(y: &[f64], cycles_per_sample: f64) -> Complex64 {
    let anchor = |i: usize| {
        let arg = std::f64::consts::TAU * (cycles_per_sample * i as f64).fract();
        let (s, c) = arg.sin_cos();
        Complex64::new(c, s)
    };
    let step = anchor(1);
    let (mut x, mut q) = (0.0, 0.0);
    for (block, chunk) in y.chunks(RESYNC).enumerate() {
        let mut r = anchor(block * RESYNC);
        for &v in chunk {
            x += v * r.re;
            q += v * r.im;
            r *= step;
        }
    }
    let n = y.len() as f64;
    Complex64::new(2.0 * x / n, 2.0 * q / n)
}

/// Largest prefix of `n` samples holding a whole number of modulation periods.
fn whole_periods(n: usize, sample_rate: f64, f_m: f64) -> (usize, f64) {
    let samples_per_period = sample_rate / f_m;
    let periods = (n as f64 / samples_per_period + 1e-9).floor();
    let used = ((periods * samples_per_period) + 1e-9).floor() as usize;
    (used.min(n), periods)
}

/// First-harmonic amplitude only; the statistic used by the decision.
pub fn first_harmonic_amplitude(y: &[f64], sample_rate: f64, f_m: f64) -> f64 {
    let (used, _) = whole_periods(y.len(), sample_rate, f_m);
    project(&y[..used], f_m / sample_rate).norm()
}

/// Demodulate `y` (uniformly sampled at `sample_rate`) at `f_m` and its
/// first `n_harmonics` multiples.
pub fn lockin_samples(
    y: &[f64],
    sample_rate: f64,
    f_m: f64,
    n_harmonics: usize,
) -> Result<LockinResult> {
    let nyquist = 0.5 * sample_rate;
    if !(f_m > 0.0) || f_m >= nyquist {
        return Err(Error::AboveNyquist { f_m, nyquist });
    }
    if n_harmonics == 0 {
        return Err(Error::Precondition("n_harmonics must be >= 1".into()));
    }
    let duration = y.len() as f64 / sample_rate;
    if duration < 10.0 / f_m * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "lock-in needs duration >= 10/f_m: {duration} < {}",
            10.0 / f_m
        )));
    }
    let (used, periods) = whole_periods(y.len(), sample_rate, f_m);
    let data = &y[..used];
    let cps = f_m / sample_rate;

    let harmonics = (1..=n_harmonics)
        .map(|order| {
            let vector = project(data, order as f64 * cps);
            Harmonic {
                order,
                amplitude: vector.norm(),
                phase: vector.arg(),
                vector,
            }
        })
        .collect();

    // DFT bins k/used next to the fundamental (bin `periods`), skipping
    // harmonic bins.
    let fundamental = periods as usize;
    let span = FLOOR_BINS.min(fundamental.saturating_sub(1)).max(1);
    let mut sq = 0.0;
    let mut count = 0usize;
    for k in fundamental.saturating_sub(span)..=fundamental + span {
        if k == 0 || k % fundamental == 0 || 2 * k >= used {
            continue;
        }
        sq += project(data, k as f64 / used as f64).norm_sqr();
        count += 1;
    }
    let noise_floor = if count > 0 {
        (sq / count as f64).sqrt()
    } else {
        0.0
    };

    Ok(LockinResult {
        harmonics,
        noise_floor,
        integration_time: used as f64 / sample_rate,
        samples_used: used,
        truncated_samples: y.len() - used,
    })
}

pub fn lockin(series: &TimeSeries, f_m: f64, n_harmonics: usize) -> Result<LockinResult> {
    lockin_samples(&series.y, series.sample_rate, f_m, n_harmonics)
}

/// Empirical null distribution of the first-harmonic amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    /// Sorted ascending.
    pub samples: Vec<f64>,
    pub master_seed: u64,
}

impl NullDistribution {
    pub fn from_samples(mut samples: Vec<f64>, master_seed: u64) -> Self {
        samples.sort_by(f64::total_cmp);
        Self {
            samples,
            master_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Fraction of null samples at or above `x`.
    pub fn tail_probability(&self, x: f64) -> f64 {
        let below = self.samples.partition_point(|&s| s < x);
        (self.samples.len() - below) as f64 / self.samples.len() as f64
    }
}

/// Run `n_runs` CG simulations (heater on) with seeds derived from `seed` and
/// collect their first-harmonic amplitudes.
pub fn null_calibration(
    config: &ExperimentConfig,
    noise: &NoiseParams,
    n_runs: usize,
    seed: u64,
) -> Result<NullDistribution> {
    if n_runs < 100 {
        return Err(Error::Precondition(format!(
            "null calibration needs n_runs >= 100, got {n_runs}"
        )));
    }
    let f_m = config.drive.modulation_frequency;
    let samples = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let run = simulate_run(
                config,
                Model::Cg,
                noise,
                true,
                config.run.duration,
                config.run.sample_rate,
                derive_seed(seed, i),
            )?;
            Ok(first_harmonic_amplitude(&run.y, run.sample_rate, f_m))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullDistribution::from_samples(samples, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    QgConsistent,
    CgConsistent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::QgConsistent => "QG-consistent",
            Verdict::CgConsistent => "CG-consistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub verdict: Verdict,
    pub detection_statistic: f64,
    pub p_value: f64,
    pub null_runs: usize,
    /// Heater-on minus heater-off first-harmonic amplitude.
    pub heater_ab_delta: Option<f64>,
    pub config_echo: Option<ExperimentConfig>,
}

/// Decide QG vs CG from a measured lock-in result and a calibrated null.
///
/// QG-consistent when `p < alpha`, CG-consistent when `p > cg_threshold`,
/// inconclusive in between.
pub fn witness_decision(
    measured: &LockinResult,
    null: Option<&NullDistribution>,
    alpha: f64,
    cg_threshold: f64,
    heater_off: Option<&LockinResult>,
) -> Result<WitnessReport> {
    let null = null.filter(|n| !n.is_empty()).ok_or(Error::MissingNull)?;
    let statistic = measured.first_amplitude();
    let p_value = null.tail_probability(statistic);
    let verdict = if p_value < alpha {
        Verdict::QgConsistent
    } else if p_value > cg_threshold {
        Verdict::CgConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(WitnessReport {
        verdict,
        detection_statistic: statistic,
        p_value,
        null_runs: null.len(),
        heater_ab_delta: heater_off.map(|off| statistic - off.first_amplitude()),
        config_echo: None,
    })
}
