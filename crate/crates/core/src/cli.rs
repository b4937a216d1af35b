//! Command-line front end.

use crate::config::RunConfig;
use crate::design::{find_intersection, tolerance_csv, Designer};
use crate::error::Error;
use crate::format::sig17;
use crate::material::{calibrate_contrast_with, CalibrationOptions, Polarization};
use crate::modesolver::{modes_csv, PUMP_MODES, SIGNAL_IDLER_MODES};
use crate::spdc::{assemble_state, entanglement_metrics, port_mapping, state_csv};
use clap::{Parser, Subcommand};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_DESIGN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tricoupler", version, about = "Mode-entangled photon pair design for a three-guide PPLN coupler")]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective indices of pump, signal and idler modes.
    Modes,
    /// Grating design, wavelength sweep, crossing and tolerance report.
    Design,
    /// Output state and entanglement metrics at the filter centre.
    State {
        #[arg(long)]
        filter_center_nm: Option<f64>,
        #[arg(long)]
        filter_width_nm: Option<f64>,
    },
    /// Relative efficiencies against signal wavelength.
    SweepWavelength,
    /// Relative efficiencies against grating frequency at degeneracy.
    SweepGrating,
    /// Crossing shift under grating period errors.
    Tolerance,
    /// Fit the core contrast to the target grating frequency.
    Calibrate,
}

/// A failure tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Error::Config(_) | Error::UnknownKey(_) | Error::InvalidInput(_) => EXIT_CONFIG,
            Error::Io(_) => EXIT_IO,
            e if e.is_solver() => EXIT_SOLVER,
            _ => EXIT_DESIGN,
        }
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for crate::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|error| CliError { stage, error })
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p).stage("config")?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        cfg.apply_override(kv).stage("config")?;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

/// Runs one command and returns the text it prints on success.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = load_config(cli)?;
    if cli.dry_run {
        return Ok(format!("# dry run: {}\n{}", command_name(&cli.command), cfg.to_kv()));
    }
    match &cli.command {
        Command::Modes => cmd_modes(&cfg),
        Command::Design => cmd_design(&cfg),
        Command::State { filter_center_nm, filter_width_nm } => {
            let mut cfg = cfg;
            if let Some(c) = filter_center_nm {
                cfg.state.filter_center_nm = Some(*c);
            }
            if let Some(w) = filter_width_nm {
                cfg.state.filter_width_nm = *w;
            }
            cfg.validate().stage("config")?;
            cmd_state(&cfg)
        }
        Command::SweepWavelength => cmd_sweep_wavelength(&cfg),
        Command::SweepGrating => cmd_sweep_grating(&cfg),
        Command::Tolerance => cmd_tolerance(&cfg),
        Command::Calibrate => cmd_calibrate(&cfg),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Modes => "modes",
        Command::Design => "design",
        Command::State { .. } => "state",
        Command::SweepWavelength => "sweep-wavelength",
        Command::SweepGrating => "sweep-grating",
        Command::Tolerance => "tolerance",
        Command::Calibrate => "calibrate",
    }
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(Error::from).stage("output")?;
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(Error::from).stage("output")?;
    Ok(p)
}

fn designer(cfg: &RunConfig) -> Result<Designer, CliError> {
    let mut d = Designer::new(cfg.material.clone(), cfg.geometry.clone(), cfg.pump_um()).stage("config")?;
    d.scale = cfg.scale;
    Ok(d)
}

/// Configured grating, or the designed one when no period is given.
fn grating_k(cfg: &RunConfig, d: &Designer) -> Result<f64, CliError> {
    match cfg.geometry.grating_period {
        Some(p) => Ok(2.0 * PI / p),
        None => Ok(d.design_grating(cfg.pump.pump_mode, cfg.sweep.spread_limit).stage("grating design")?.grating_k),
    }
}

pub fn cmd_modes(cfg: &RunConfig) -> Result<String, CliError> {
    let d = designer(cfg)?;
    let pump = d.modes(cfg.pump_um(), Polarization::H, PUMP_MODES).stage("pump modes")?;
    let ls = cfg.degenerate_signal_nm() * 1e-3;
    let signal = d.modes(ls, Polarization::H, SIGNAL_IDLER_MODES).stage("signal modes")?;
    let idler = d.modes(ls, Polarization::V, SIGNAL_IDLER_MODES).stage("idler modes")?;
    let pm = cfg.pump.pump_mode;
    let pump_row = pump.get(pm).cloned().ok_or(CliError {
        stage: "pump modes",
        error: Error::ModeCount { pol: Polarization::H, wavelength_um: cfg.pump_um(), found: pump.len(), expected: pm + 1 },
    })?;
    let mut rows = vec![pump_row];
    rows.extend(signal.iter().cloned());
    rows.extend(idler.iter().cloned());
    let path = write_out(&cfg.output_dir, "modes.csv", &modes_csv(&rows))?;

    let mut s = String::new();
    let _ = writeln!(s, "pump_wavelength_nm = {}", sig17(cfg.pump.wavelength_nm));
    let _ = writeln!(s, "pump_guided_modes = {}", pump.len());
    let _ = writeln!(s, "pump_depth_modes = {}", pump[0].z_mode.bound_modes);
    let _ = writeln!(s, "signal_wavelength_nm = {}", sig17(cfg.degenerate_signal_nm()));
    for (name, m) in [("signal", &signal), ("idler", &idler)] {
        let split = m[0].n_eff - m[2].n_eff;
        let _ = writeln!(s, "{name}_splitting_n_eff = {}", sig17(split));
        if split.abs() < 1e-6 {
            let _ = writeln!(s, "{name}_note = guides effectively decoupled (splitting below 1e-6)");
        }
    }
    let _ = writeln!(s, "modes_csv = {}", path.display());
    Ok(s)
}

pub fn cmd_design(cfg: &RunConfig) -> Result<String, CliError> {
    let d = designer(cfg)?;
    let report = d
        .report(
            cfg.pump.pump_mode,
            cfg.sweep.signal_range_nm,
            cfg.sweep.signal_points,
            &cfg.sweep.tolerance_nm,
            cfg.sweep.spread_limit,
        )
        .stage("design")?;
    let kv = report.to_kv();
    write_out(&cfg.output_dir, "design_report.txt", &kv)?;
    write_out(&cfg.output_dir, "spectrum_wavelength.csv", &report.spectrum.to_csv())?;
    write_out(&cfg.output_dir, "tolerance.csv", &tolerance_csv(&report.tolerance))?;
    Ok(kv)
}

pub fn cmd_state(cfg: &RunConfig) -> Result<String, CliError> {
    let d = designer(cfg)?;
    let k = grating_k(cfg, &d)?;
    let center = cfg.state.filter_center_nm.unwrap_or_else(|| cfg.degenerate_signal_nm());
    let (lo, hi) = cfg.sweep.signal_range_nm;
    let half = 0.5 * cfg.state.filter_width_nm;
    if center - half < lo || center + half > hi {
        return Err(CliError {
            stage: "config",
            error: Error::Config(format!("filter [{}, {}] nm lies outside the sweep range [{lo}, {hi}] nm", center - half, center + half)),
        });
    }
    let table = d.table(center * 1e-3).stage("modes")?;
    let state = assemble_state(cfg.pump.pump_mode, &table, k, cfg.geometry.length_mm).stage("state")?;
    let metrics = entanglement_metrics(&state, cfg.state.dimension_threshold).stage("state")?;
    write_out(&cfg.output_dir, "state.csv", &state_csv(&state))?;
    write_out(&cfg.output_dir, "state_ports.csv", &state_csv(&port_mapping(&state)))?;
    let mut s = String::new();
    let _ = writeln!(s, "case = {}", state.case);
    let _ = writeln!(s, "filter_center_nm = {}", sig17(center));
    let _ = writeln!(s, "filter_width_nm = {}", sig17(cfg.state.filter_width_nm));
    let _ = writeln!(s, "grating_frequency_um_inv = {}", sig17(k));
    s.push_str(&metrics.to_kv());
    write_out(&cfg.output_dir, "metrics.txt", &s)?;
    Ok(s)
}

pub fn cmd_sweep_wavelength(cfg: &RunConfig) -> Result<String, CliError> {
    let d = designer(cfg)?;
    let k = grating_k(cfg, &d)?;
    let spec = d
        .sweep_signal_wavelength(cfg.pump.pump_mode, k, cfg.sweep.signal_range_nm, cfg.sweep.signal_points)
        .stage("wavelength sweep")?;
    let p = write_out(&cfg.output_dir, "spectrum_wavelength.csv", &spec.to_csv())?;
    let mut s = String::new();
    let _ = writeln!(s, "grating_frequency_um_inv = {}", sig17(k));
    match find_intersection(&spec) {
        Ok(c) => {
            let _ = writeln!(s, "crossing_wavelength_nm = {}", sig17(c.location));
            let _ = writeln!(s, "crossing_spread = {}", sig17(c.spread));
        }
        Err(e) => {
            let _ = writeln!(s, "crossing_wavelength_nm = none ({e})");
        }
    }
    for (p, w) in spec.processes.iter().zip(spec.widths()) {
        let _ = writeln!(s, "fwhm_nm.{} = {}", p.label(), w.map(sig17).unwrap_or_else(|| "undefined".into()));
    }
    let _ = writeln!(s, "spectrum_csv = {}", p.display());
    Ok(s)
}

pub fn cmd_sweep_grating(cfg: &RunConfig) -> Result<String, CliError> {
    let d = designer(cfg)?;
    let ls = cfg.state.filter_center_nm.unwrap_or_else(|| cfg.degenerate_signal_nm()) * 1e-3;
    let spec = d
        .sweep_grating(cfg.pump.pump_mode, ls, cfg.sweep.grating_range, cfg.sweep.grating_points)
        .stage("grating sweep")?;
    let p = write_out(&cfg.output_dir, "spectrum_grating.csv", &spec.to_csv())?;
    let mut s = String::new();
    if let Ok(c) = find_intersection(&spec) {
        let _ = writeln!(s, "crossing_grating_um_inv = {}", sig17(c.location));
        let _ = writeln!(s, "crossing_spread = {}", sig17(c.spread));
    }
    let _ = writeln!(s, "spectrum_csv = {}", p.display());
    Ok(s)
}

pub fn cmd_tolerance(cfg: &RunConfig) -> Result<String, CliError> {
    let d = designer(cfg)?;
    let k = grating_k(cfg, &d)?;
    let rows = d
        .grating_tolerance(cfg.pump.pump_mode, k, &cfg.sweep.tolerance_nm, cfg.sweep.signal_range_nm, cfg.sweep.signal_points)
        .stage("tolerance")?;
    let csv = tolerance_csv(&rows);
    write_out(&cfg.output_dir, "tolerance.csv", &csv)?;
    Ok(csv)
}

pub fn cmd_calibrate(cfg: &RunConfig) -> Result<String, CliError> {
    let opts = CalibrationOptions {
        spread_weight: cfg.calibration.spread_weight,
        signal_window_um: (cfg.sweep.signal_range_nm.0 * 1e-3, cfg.sweep.signal_range_nm.1 * 1e-3),
        ..CalibrationOptions::default()
    };
    let c = calibrate_contrast_with(&cfg.material, &cfg.geometry, cfg.calibration.target_k, cfg.pump_um(), &opts)
        .stage("calibration")?;
    let mut s = String::new();
    let _ = writeln!(s, "material.delta_n_h = {}", sig17(c.delta_n_h));
    let _ = writeln!(s, "material.delta_n_v = {}", sig17(c.delta_n_v));
    let _ = writeln!(s, "mean_k_um_inv = {}", sig17(c.mean_k));
    for (j, k) in c.k_values.iter().enumerate() {
        let _ = writeln!(s, "k_required.A{} = {}", j + 1, sig17(*k));
    }
    let _ = writeln!(s, "residual_um_inv = {}", sig17(c.residual));
    let _ = writeln!(s, "grating_period_um = {}", sig17(2.0 * PI / c.mean_k));
    write_out(&cfg.output_dir, "calibration.txt", &s)?;
    Ok(s)
}
