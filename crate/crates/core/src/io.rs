//! File formats: time-series CSV, witness reports and sweep tables.
//!
//! Every file starts with `#`-prefixed metadata lines that embed the fully
//! resolved configuration between `# --- config ---` and
//! `# --- end config ---`, so any output can be reproduced from itself.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::analysis::{LockinResult, NullDistribution, WitnessReport};
use crate::config::{parse_config, ExperimentConfig};
use crate::coupling::PUBLISHED_FORM_FACTOR;
use crate::error::{Error, Result};
use crate::interferometer::Model;
use crate::noise::TimeSeries;
use crate::sweep::{DesignPoint, SweepRow};

pub const TIMESERIES_HEADER: &str = "t,y,d_t,model,heater_on,seed";
pub const REPORT_HEADER: &str =
    "verdict,detection_statistic,p_value,null_runs,null_mean,noise_floor,heater_ab_delta,seed";
pub const SWEEP_HEADER: &str = "index,parameter,value,seed,rho_s,mass,form_factor,phi_grav,delta_phi,phi_em,visibility,concurrence,negativity,harmonic1";

const CONFIG_BEGIN: &str = "# --- config ---";
const CONFIG_END: &str = "# --- end config ---";

/// Published order-of-magnitude estimate of the phase excursion for a 1 µm
/// piezo stroke, rad.
pub const PUBLISHED_DELTA_PHI: f64 = 1.0;

fn config_block(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str(CONFIG_BEGIN);
    out.push('\n');
    for line in config.emit().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str(CONFIG_END);
    out.push('\n');
    out
}

fn read_config_block<'a>(
    comments: impl Iterator<Item = &'a str>,
) -> Result<Option<ExperimentConfig>> {
    let mut inside = false;
    let mut text = String::new();
    let mut found = false;
    for line in comments {
        if line == CONFIG_BEGIN {
            inside = true;
            found = true;
        } else if line == CONFIG_END {
            inside = false;
        } else if inside {
            let body = line.strip_prefix('#').unwrap_or(line);
            text.push_str(body.strip_prefix(' ').unwrap_or(body));
            text.push('\n');
        }
    }
    if !found {
        return Ok(None);
    }
    parse_config(&text).map(Some)
}

pub fn write_timeseries<W: Write>(mut w: W, series: &TimeSeries) -> Result<()> {
    writeln!(w, "# shequid time series")?;
    writeln!(w, "# sample_rate = {}", series.sample_rate)?;
    writeln!(w, "# seed = {}", series.seed)?;
    writeln!(w, "# model = {}", series.model.as_str())?;
    writeln!(w, "# heater_on = {}", series.heater_on)?;
    w.write_all(config_block(&series.config).as_bytes())?;
    writeln!(w, "{TIMESERIES_HEADER}")?;
    let model = series.model.as_str();
    for i in 0..series.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            series.t[i], series.y[i], series.d_t[i], model, series.heater_on, series.seed
        )?;
    }
    Ok(())
}

fn field<'a>(parts: &[&'a str], i: usize, line: usize) -> Result<&'a str> {
    parts
        .get(i)
        .copied()
        .ok_or_else(|| Error::Format(format!("line {line}: expected 6 columns")))
}

fn number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: bad number `{s}`")))
}

pub fn read_timeseries<R: BufRead>(r: R) -> Result<TimeSeries> {
    let mut comments = Vec::new();
    let mut header_seen = false;
    let (mut t, mut y, mut d_t) = (Vec::new(), Vec::new(), Vec::new());
    let mut meta: Option<(Model, bool, u64)> = None;
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        if line.starts_with('#') {
            comments.push(line);
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line.trim() != TIMESERIES_HEADER {
                return Err(Error::Format(format!(
                    "line {lineno}: expected header `{TIMESERIES_HEADER}`"
                )));
            }
            header_seen = true;
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(Error::Format(format!("line {lineno}: expected 6 columns")));
        }
        t.push(number(field(&parts, 0, lineno)?, lineno)?);
        y.push(number(parts[1], lineno)?);
        d_t.push(number(parts[2], lineno)?);
        let model: Model = parts[3].parse()?;
        let heater = match parts[4] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Format(format!(
                    "line {lineno}: bad heater_on `{other}`"
                )))
            }
        };
        let seed: u64 = parts[5]
            .parse()
            .map_err(|_| Error::Format(format!("line {lineno}: bad seed `{}`", parts[5])))?;
        match meta {
            None => meta = Some((model, heater, seed)),
            Some(m) if m != (model, heater, seed) => {
                return Err(Error::Format(format!(
                    "line {lineno}: run metadata changes mid-file"
                )))
            }
            _ => {}
        }
    }
    if !header_seen {
        return Err(Error::Format("missing header row".into()));
    }
    let config = read_config_block(comments.iter().map(String::as_str))?
        .ok_or_else(|| Error::Format("missing embedded config".into()))?;
    let (model, heater_on, seed) =
        meta.unwrap_or((config.run.model, config.run.heater_on, config.run.seed));
    let sample_rate = comments
        .iter()
        .find_map(|c| c.strip_prefix("# sample_rate = "))
        .map(|s| number(s, 0))
        .transpose()?
        .unwrap_or(config.run.sample_rate);
    if t.len() >= 2 {
        let dt = 1.0 / sample_rate;
        let step = t[1] - t[0];
        if (step - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::Format(format!(
                "sample spacing {step} does not match sample_rate {sample_rate}"
            )));
        }
    }
    Ok(TimeSeries {
        t,
        y,
        d_t,
        model,
        heater_on,
        seed,
        sample_rate,
        config,
    })
}

/// Human-readable witness report.
pub fn format_report(
    report: &WitnessReport,
    measured: &LockinResult,
    null: &NullDistribution,
    config: &ExperimentConfig,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "QG vs CG witness report");
    let _ = writeln!(s, "=======================");
    let _ = writeln!(s, "verdict               {}", report.verdict.as_str());
    let _ = writeln!(
        s,
        "detection statistic   {:.6e} (first-harmonic amplitude)",
        report.detection_statistic
    );
    if report.p_value == 0.0 {
        let _ = writeln!(
            s,
            "p-value               < {:.3e} (no null sample reached the statistic)",
            1.0 / report.null_runs as f64
        );
    } else {
        let _ = writeln!(s, "p-value               {:.4}", report.p_value);
    }
    let _ = writeln!(
        s,
        "null runs             {} (master seed {})",
        report.null_runs, null.master_seed
    );
    let _ = writeln!(s, "null mean             {:.6e}", null.mean());
    let _ = writeln!(s, "noise floor           {:.6e}", measured.noise_floor);
    let _ = writeln!(
        s,
        "integration time      {} s ({} samples, {} truncated)",
        measured.integration_time, measured.samples_used, measured.truncated_samples
    );
    for h in &measured.harmonics {
        let _ = writeln!(
            s,
            "harmonic {}            amplitude {:.6e}  phase {:+.4} rad",
            h.order, h.amplitude, h.phase
        );
    }
    match report.heater_ab_delta {
        Some(d) => {
            let _ = writeln!(s, "heater A/B delta      {d:.6e}");
        }
        None => {
            let _ = writeln!(s, "heater A/B delta      n/a (no heater-off series)");
        }
    }
    let _ = writeln!(
        s,
        "thresholds            QG if p < {}, CG if p > {}",
        config.analysis.alpha, config.analysis.cg_threshold
    );
    let _ = writeln!(s, "statistics            empirical Monte Carlo null from CG simulations; decision rule defined by this tool");
    s.push('\n');
    s.push_str(&config_block(config));
    s
}

pub fn write_report_csv<W: Write>(
    mut w: W,
    report: &WitnessReport,
    measured: &LockinResult,
    null: &NullDistribution,
    config: &ExperimentConfig,
) -> Result<()> {
    writeln!(w, "# shequid witness report")?;
    w.write_all(config_block(config).as_bytes())?;
    writeln!(w, "{REPORT_HEADER}")?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        report.verdict.as_str(),
        report.detection_statistic,
        report.p_value,
        report.null_runs,
        null.mean(),
        measured.noise_floor,
        report
            .heater_ab_delta
            .map(|d| d.to_string())
            .unwrap_or_default(),
        config.run.seed
    )?;
    Ok(())
}

pub fn write_sweep<W: Write>(
    mut w: W,
    parameter: &str,
    rows: &[SweepRow],
    base: &ExperimentConfig,
) -> Result<()> {
    writeln!(w, "# shequid sweep over {parameter}")?;
    writeln!(w, "# point seeds derived from base seed {}", base.run.seed)?;
    w.write_all(config_block(base).as_bytes())?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let p = &r.point;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            parameter,
            r.value,
            r.seed,
            p.rho_s,
            p.mass,
            p.form_factor,
            p.phi_grav,
            p.delta_phi,
            p.phi_em,
            p.visibility,
            p.concurrence,
            p.negativity,
            r.harmonic1.map(|h| h.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Table printed by the `phase` command, including the comparison against
/// the published estimates.
pub fn format_phase_table(p: &DesignPoint, config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let dd = config.drive.modulation_amplitude;
    let _ = writeln!(s, "quantity                      value");
    let _ = writeln!(s, "rho_s (kg/m^3)                {:.6e}", p.rho_s);
    let _ = writeln!(s, "m = L*sigma*rho_s (kg)        {:.6e}", p.mass);
    let _ = writeln!(s, "Delta t_J (s)                 {:.6e}", p.delta_t);
    let _ = writeln!(s, "A (used in phase)             {:.6}", p.form_factor);
    let _ = writeln!(s, "A line-mass, closed form      {:.6}", p.form_factor_line);
    let _ = writeln!(s, "phi_G (rad)                   {:.6e}", p.phi_grav);
    let _ = writeln!(s, "phi_E (rad)                   {:.6e}", p.phi_em);
    let _ = writeln!(s, "delta phi for delta d = {dd:.3e} m  {:.6e}", p.delta_phi);
    let _ = writeln!(s, "Sagnac phase (rad)            {:.6}", p.sagnac_phase);
    let _ = writeln!(
        s,
        "visibility / concurrence      {:.6} / {:.6}",
        p.visibility, p.concurrence
    );
    s.push('\n');
    s.push_str(&discrepancy_notice(p, config));
    s
}

pub fn discrepancy_notice(p: &DesignPoint, config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let dd = config.drive.modulation_amplitude;
    let _ = writeln!(s, "NOTICE: phase excursion discrepancy");
    let _ = writeln!(
        s,
        "  computed delta phi = {:.3e} rad for delta d = {:.3e} m; published estimate is of order {} rad per 1e-6 m",
        p.delta_phi, dd, PUBLISHED_DELTA_PHI
    );
    let per_micron = p.delta_phi * 1e-6 / dd.max(f64::MIN_POSITIVE);
    let _ = writeln!(
        s,
        "  ratio computed/published = {:.1}x (per 1e-6 m of stroke)",
        per_micron / PUBLISHED_DELTA_PHI
    );
    let _ = writeln!(s, "{}", form_factor_notice(p.form_factor_line));
    s
}

pub fn form_factor_notice(line_value: f64) -> String {
    format!(
        "NOTICE: form factor discrepancy\n  line-mass model A = {line_value:.4}; published cylinder estimate A ~ {PUBLISHED_FORM_FACTOR}"
    )
}
