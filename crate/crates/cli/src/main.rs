//! Command-line entry point for the two-loop witness simulator.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use shequid_core::analysis::{lockin, null_calibration, witness_decision};
use shequid_core::coupling::{
    compensating_field, em_line_force, em_phase, form_factor_line, form_factor_line_quadrature,
    grav_phase,
};
use shequid_core::io::{
    form_factor_notice, format_phase_table, format_report, read_timeseries, write_report_csv,
    write_sweep, write_timeseries,
};
use shequid_core::noise::simulate_config;
use shequid_core::sweep::{design_point, run_sweep, SweepSpec, SweepValues};
use shequid_core::{parse_config, ExperimentConfig, Model};

#[derive(Parser)]
#[command(
    name = "shequid",
    version,
    about = "Two-SHeQUID gravitational entanglement witness simulator"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file (defaults apply to every missing key).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, global = true, value_enum)]
    heater: Option<Heater>,
    /// Simulated duration, s.
    #[arg(long, global = true)]
    duration: Option<f64>,
    /// Sample rate, Hz.
    #[arg(long, global = true)]
    rate: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Qg,
    Cg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Heater {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Mass, density, junction time, form factor and interaction phase.
    Phase,
    /// Line-mass form factor, closed form against quadrature.
    Formfactor,
    /// Electric field whose electrostatic phase cancels gravity.
    Compensate,
    /// Simulate one run and write the time-series CSV.
    Simulate,
    /// Lock-in, null calibration and verdict for a time-series CSV.
    Analyze {
        input: PathBuf,
        /// Heater-off series for the A/B comparison.
        #[arg(long)]
        heater_off: Option<PathBuf>,
        /// Number of CG runs in the null ensemble.
        #[arg(long)]
        null_runs: Option<usize>,
        /// Machine-readable summary path (defaults to the report path with a .csv extension).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Evaluate a parameter over a list or range of values.
    Sweep {
        /// Dotted parameter path, e.g. geometry.d
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', conflicts_with = "range")]
        values: Option<Vec<f64>>,
        /// min:max:count
        #[arg(long)]
        range: Option<String>,
        /// Logarithmic spacing for --range.
        #[arg(long)]
        log: bool,
        /// Also simulate each point and record the first-harmonic amplitude.
        #[arg(long)]
        simulate: bool,
    },
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let text = match &g.config {
        Some(p) => {
            std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?
        }
        None => String::new(),
    };
    let mut config = parse_config(&text)?;
    apply_overrides(&mut config, g);
    config.validate()?;
    Ok(config)
}

fn apply_overrides(config: &mut ExperimentConfig, g: &Global) {
    if let Some(s) = g.seed {
        config.run.seed = s;
    }
    if let Some(m) = g.model {
        config.run.model = match m {
            ModelArg::Qg => Model::Qg,
            ModelArg::Cg => Model::Cg,
        };
    }
    if let Some(h) = g.heater {
        config.run.heater_on = matches!(h, Heater::On);
    }
    if let Some(d) = g.duration {
        config.run.duration = d;
    }
    if let Some(r) = g.rate {
        config.run.sample_rate = r;
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_series(path: &Path) -> Result<shequid_core::TimeSeries> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_timeseries(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn parse_range(s: &str, log: bool) -> Result<SweepValues> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("--range expects min:max:count, got `{s}`");
    }
    Ok(SweepValues::Range {
        min: parts[0].parse().context("range min")?,
        max: parts[1].parse().context("range max")?,
        count: parts[2].parse().context("range count")?,
        log,
    })
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Phase => {
            let config = load_config(g)?;
            let point = design_point(&config)?;
            let mut w = output(g.out.as_deref())?;
            write!(w, "{}", format_phase_table(&point, &config))?;
            w.flush()?;
        }
        Command::Formfactor => {
            let config = load_config(g)?;
            let (l, d) = (config.geometry.length, config.geometry.separation);
            let closed = form_factor_line(l, d);
            let quad = form_factor_line_quadrature(l, d);
            let mut w = output(g.out.as_deref())?;
            writeln!(w, "L = {l} m, d = {d} m, L/d = {}", l / d)?;
            writeln!(w, "A closed form   {closed:.15}")?;
            writeln!(
                w,
                "A quadrature    {:.15} (error estimate {:.2e}, {} intervals)",
                quad.value, quad.error, quad.intervals
            )?;
            writeln!(
                w,
                "relative diff   {:.3e}",
                ((quad.value - closed) / closed).abs()
            )?;
            writeln!(w, "{}", form_factor_notice(closed))?;
            w.flush()?;
        }
        Command::Compensate => {
            let config = load_config(g)?;
            let e_star = compensating_field(&config)?;
            let point = shequid_core::coupling::evaluate(&config)?;
            let force = em_line_force(e_star, &config)?;
            let phi_e = em_phase(force, config.geometry.separation, point.delta_t);
            let phi_g = grav_phase(
                point.mass,
                config.geometry.separation,
                point.delta_t,
                point.form_factor,
            )?;
            let mut w = output(g.out.as_deref())?;
            writeln!(w, "E* (V/m)         {e_star:.12e}")?;
            writeln!(w, "orientation      {:?}", config.drive.e_orientation)?;
            writeln!(w, "F_E (N)          {force:.6e}")?;
            writeln!(w, "phi_G (rad)      {phi_g:.9e}")?;
            writeln!(w, "phi_E (rad)      {phi_e:.9e}")?;
            writeln!(
                w,
                "relative residual {:.3e}",
                ((phi_e.abs() - phi_g) / phi_g).abs()
            )?;
            w.flush()?;
        }
        Command::Simulate => {
            let config = load_config(g)?;
            let series = simulate_config(&config)?;
            let w = output(g.out.as_deref())?;
            write_timeseries(w, &series)?;
        }
        Command::Analyze {
            input,
            heater_off,
            null_runs,
            summary,
        } => {
            let series = read_series(&input)?;
            let mut config = series.config.clone();
            if let Some(n) = null_runs {
                config.analysis.null_runs = n;
            }
            let f_m = config.drive.modulation_frequency;
            let measured = lockin(&series, f_m, config.analysis.n_harmonics)?;
            let off = heater_off
                .map(|p| -> Result<_> { Ok(lockin(&read_series(&p)?, f_m, 1)?) })
                .transpose()?;
            let master = g.seed.unwrap_or(config.run.seed);
            let null = null_calibration(&config, &config.noise, config.analysis.null_runs, master)?;
            let mut report = witness_decision(
                &measured,
                Some(&null),
                config.analysis.alpha,
                config.analysis.cg_threshold,
                off.as_ref(),
            )?;
            report.config_echo = Some(config.clone());
            let mut w = output(g.out.as_deref())?;
            write!(w, "{}", format_report(&report, &measured, &null, &config))?;
            w.flush()?;
            let summary = summary.or_else(|| g.out.as_ref().map(|p| p.with_extension("csv")));
            if let Some(path) = summary {
                if Some(&path) == g.out.as_ref() {
                    bail!(
                        "summary path would overwrite the report: {}",
                        path.display()
                    );
                }
                let f =
                    File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                write_report_csv(BufWriter::new(f), &report, &measured, &null, &config)?;
            }
        }
        Command::Sweep {
            param,
            values,
            range,
            log,
            simulate,
        } => {
            let base = load_config(g)?;
            let values = match (values, range) {
                (Some(v), _) => SweepValues::List(v),
                (None, Some(r)) => parse_range(&r, log)?,
                (None, None) => bail!("sweep needs --values or --range"),
            };
            let spec = SweepSpec {
                parameter: param,
                values,
                base,
                simulate,
            };
            let rows = run_sweep(&spec)?;
            let w = output(g.out.as_deref())?;
            write_sweep(w, &spec.parameter, &rows, &spec.base)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
