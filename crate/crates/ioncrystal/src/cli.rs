//! Command-line front end: configuration, subcommands and output files.
//!
//! Settings are resolved as built-in defaults, then a `key = value` config
//! file, then command-line flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::decoherence::{temperature_scan, CouplingScales, DiagramMode, ErrorBreakdown, ScanSummary};
use crate::gate;
use crate::lattice::{derived_betas, lattice_sums, PhysicalParams};
use crate::phonons::{full_grid, x_direction_path, CrystalModel};
use crate::spinchain::{
    carrier_correction_bound, chain_normal_modes, dipolar_reference, effective_couplings, simulation_error,
    stiff_limit_deviation, ChainSpec,
};
use crate::constants::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(crate::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::CheckFailed(_) => 1,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::InvalidParameter(_) | E::LatticeTooSmall { .. } | E::OffGrid { .. } | E::InvalidBasisLabel(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    /// Wavevectors along the Cartesian x axis.
    #[default]
    X,
    /// Every grid wavevector.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingForm {
    /// Scales fixed by the pulse rate alone.
    #[default]
    SignGate,
    /// Scales from beta_z, eta0 and omega_z.
    Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ModeArg {
    HighT,
    Exact,
}

impl From<ModeArg> for DiagramMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::HighT => DiagramMode::HighTemperature,
            ModeArg::Exact => DiagramMode::Exact,
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub mass_u: f64,
    pub charge_e: f64,
    pub f_xy: f64,
    pub f_z: f64,
    pub fz_over_fxy: Option<f64>,
    pub temperature: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub gamma: f64,
    pub eta0: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub mode: DiagramMode,
    pub couplings: CouplingForm,
    pub path: PathKind,
    pub n: usize,
    pub beta_x: f64,
    pub detuning: f64,
    pub force: f64,
    pub omega_x: f64,
    pub rabi: f64,
    pub out: PathBuf,
    pub threads: usize,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: String::new(),
            mass_u: crate::constants::BERYLLIUM9_MASS_U,
            charge_e: 1.0,
            f_xy: 20e3,
            f_z: 1e6,
            fz_over_fxy: None,
            temperature: 1e-3,
            l: 100,
            gamma: 0.05,
            eta0: 0.234,
            t_min: 1e-5,
            t_max: 1e-3,
            points: 12,
            mode: DiagramMode::HighTemperature,
            couplings: CouplingForm::SignGate,
            path: PathKind::X,
            n: 20,
            beta_x: 1e-3,
            detuning: 0.05,
            force: 0.01,
            omega_x: 1.0,
            rabi: 0.0,
            out: PathBuf::from("out"),
            threads: 0,
            format: Format::Csv,
            seed: 0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Sets one field from its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "mass_u" => self.mass_u = parse(key, value)?,
            "charge_e" => self.charge_e = parse(key, value)?,
            "f_xy" => self.f_xy = parse(key, value)?,
            "f_z" => self.f_z = parse(key, value)?,
            "fz_over_fxy" => self.fz_over_fxy = Some(parse(key, value)?),
            "temperature" => self.temperature = parse(key, value)?,
            "L" | "l" => self.l = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "eta0" => self.eta0 = parse(key, value)?,
            "t_min" => self.t_min = parse(key, value)?,
            "t_max" => self.t_max = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            "mode" => {
                self.mode = match value {
                    "high-t" | "high-temperature" => DiagramMode::HighTemperature,
                    "exact" => DiagramMode::Exact,
                    _ => return Err(CliError::Config(format!("invalid value {value:?} for mode"))),
                }
            }
            "couplings" => {
                self.couplings = CouplingForm::from_str(value, true)
                    .map_err(|_| CliError::Config(format!("invalid value {value:?} for couplings")))?
            }
            "path" => {
                self.path = PathKind::from_str(value, true)
                    .map_err(|_| CliError::Config(format!("invalid value {value:?} for path")))?
            }
            "n" => self.n = parse(key, value)?,
            "beta_x" => self.beta_x = parse(key, value)?,
            "detuning" => self.detuning = parse(key, value)?,
            "force" => self.force = parse(key, value)?,
            "omega_x" => self.omega_x = parse(key, value)?,
            "rabi" => self.rabi = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = parse(key, value)?,
            "format" => {
                self.format = Format::from_str(value, true)
                    .map_err(|_| CliError::Config(format!("invalid value {value:?} for format")))?
            }
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, CliError> {
        let f_z = self.fz_over_fxy.map_or(self.f_z, |r| r * self.f_xy);
        Ok(PhysicalParams::new(
            self.mass_u * ATOMIC_MASS_UNIT,
            self.charge_e * ELEMENTARY_CHARGE,
            self.f_xy,
            f_z,
            self.temperature,
        )?)
    }

    pub fn chain_spec(&self) -> ChainSpec {
        ChainSpec {
            n_ions: self.n,
            beta_x: self.beta_x,
            omega_x: self.omega_x,
            detuning: self.detuning,
            force: self.force,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ioncrystal", version, about = "Phonons, gate parameters and decoherence of 2D ion crystals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Plain-text `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phonon band structure and axial gap check.
    Spectrum(SpectrumArgs),
    /// Pushing-gate diagnostics.
    Gate(GateArgs),
    /// Gate error against temperature.
    Decoherence(DecoherenceArgs),
    /// Walking-wave couplings of an ion chain.
    Spin(SpinArgs),
}

#[derive(Debug, Args, Default)]
pub struct CrystalArgs {
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// In-plane trap frequency in Hz.
    #[arg(long)]
    pub f_xy: Option<f64>,
    /// Axial trap frequency in Hz.
    #[arg(long)]
    pub f_z: Option<f64>,
    /// Axial frequency as a multiple of the in-plane one.
    #[arg(long)]
    pub fz_over_fxy: Option<f64>,
    /// Temperature in K.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Ion mass in atomic mass units.
    #[arg(long)]
    pub mass_u: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub crystal: CrystalArgs,
    #[arg(long, value_enum)]
    pub path: Option<PathKind>,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    #[command(flatten)]
    pub crystal: CrystalArgs,
    /// Peak displacement parameter F Z0 / (hbar omega_z).
    #[arg(long)]
    pub eta0: Option<f64>,
    /// Pulse rate over omega_xy.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecoherenceArgs {
    #[command(flatten)]
    pub crystal: CrystalArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta0: Option<f64>,
    /// Lowest temperature in K.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Highest temperature in K.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub couplings: Option<CouplingForm>,
}

#[derive(Debug, Args)]
pub struct SpinArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub beta_x: Option<f64>,
    /// omega_x - omega_L in units of omega_x.
    #[arg(long, allow_hyphen_values = true)]
    pub detuning: Option<f64>,
    /// |F x0| / hbar in units of omega_x.
    #[arg(long)]
    pub force: Option<f64>,
    #[arg(long)]
    pub omega_x: Option<f64>,
    /// Carrier Rabi frequency for the correction bound.
    #[arg(long)]
    pub rabi: Option<f64>,
}

fn apply_crystal(cfg: &mut RunConfig, a: &CrystalArgs) {
    if let Some(v) = a.l {
        cfg.l = v;
    }
    if let Some(v) = a.f_xy {
        cfg.f_xy = v;
    }
    if let Some(v) = a.f_z {
        cfg.f_z = v;
        cfg.fz_over_fxy = None;
    }
    if let Some(v) = a.fz_over_fxy {
        cfg.fz_over_fxy = Some(v);
    }
    if let Some(v) = a.temperature {
        cfg.temperature = v;
    }
    if let Some(v) = a.mass_u {
        cfg.mass_u = v;
    }
}

/// Defaults, then the config file, then flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_file_contents(&text)?;
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.threads {
        cfg.threads = v;
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    match &cli.command {
        Command::Spectrum(a) => {
            cfg.subcommand = "spectrum".into();
            apply_crystal(&mut cfg, &a.crystal);
            if let Some(v) = a.path {
                cfg.path = v;
            }
        }
        Command::Gate(a) => {
            cfg.subcommand = "gate".into();
            apply_crystal(&mut cfg, &a.crystal);
            if let Some(v) = a.eta0 {
                cfg.eta0 = v;
            }
            if let Some(v) = a.gamma {
                cfg.gamma = v;
            }
        }
        Command::Decoherence(a) => {
            cfg.subcommand = "decoherence".into();
            apply_crystal(&mut cfg, &a.crystal);
            if let Some(v) = a.gamma {
                cfg.gamma = v;
            }
            if let Some(v) = a.eta0 {
                cfg.eta0 = v;
            }
            if let Some(v) = a.t_min {
                cfg.t_min = v;
            }
            if let Some(v) = a.t_max {
                cfg.t_max = v;
            }
            if let Some(v) = a.points {
                cfg.points = v;
            }
            if let Some(v) = a.mode {
                cfg.mode = v.into();
            }
            if let Some(v) = a.couplings {
                cfg.couplings = v;
            }
        }
        Command::Spin(a) => {
            cfg.subcommand = "spin".into();
            if let Some(v) = a.n {
                cfg.n = v;
            }
            if let Some(v) = a.beta_x {
                cfg.beta_x = v;
            }
            if let Some(v) = a.detuning {
                cfg.detuning = v;
            }
            if let Some(v) = a.force {
                cfg.force = v;
            }
            if let Some(v) = a.omega_x {
                cfg.omega_x = v;
            }
            if let Some(v) = a.rabi {
                cfg.rabi = v;
            }
        }
    }
    Ok(cfg)
}

/// Result of a subcommand: files written, a JSON summary and an optional
/// failed physics check.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
    pub failed_check: Option<String>,
}

/// Runs the resolved configuration in a pool of `cfg.threads` workers and
/// writes the manifest.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let mut outcome = pool.install(|| match cfg.subcommand.as_str() {
        "spectrum" => cmd_spectrum(cfg),
        "gate" => cmd_gate(cfg),
        "decoherence" => cmd_decoherence(cfg),
        "spin" => cmd_spin(cfg),
        other => Err(CliError::Config(format!("unknown subcommand {other:?}"))),
    })?;
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "outputs": outcome.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "summary": outcome.summary,
        "failed_check": outcome.failed_check,
    });
    let path = cfg.out.join("manifest.json");
    write_file(&path, &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    outcome.files.push(path);
    Ok(outcome)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Scientific notation with `digits` significant digits.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits - 1, x)
}

pub const SPECTRUM_HEADER: &str = "n1,n2,q1,q2,omega_axial,omega_long,omega_trans";
pub const SCAN_HEADER: &str = "T_K,E1_re,E1_im,E2_re,E2_im,E3_re,E3_im,E4_re,E4_im,Fbar_re,Fbar_im,E,Eprime";

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.physical_params()?;
    let model = CrystalModel::from_params(cfg.l, &params)?;
    let spectrum = model.spectrum()?;
    let gap = spectrum.gap_report();
    let path = match cfg.path {
        PathKind::X => x_direction_path(cfg.l),
        PathKind::Full => full_grid(cfg.l),
    };
    let bands = model.band_structure(&path)?;
    let mut files = Vec::new();
    match cfg.format {
        Format::Csv => {
            let mut s = String::from(SPECTRUM_HEADER);
            s.push('\n');
            for (i, q) in bands.path.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    q.n1,
                    q.n2,
                    fmt_sig(q.q1(), 12),
                    fmt_sig(q.q2(), 12),
                    fmt_sig(bands.axial[i], 12),
                    fmt_sig(bands.longitudinal[i], 12),
                    fmt_sig(bands.transverse[i], 12)
                );
            }
            let p = cfg.out.join("spectrum.csv");
            write_file(&p, &s)?;
            files.push(p);
        }
        Format::Json => {
            let p = cfg.out.join("spectrum.json");
            write_file(&p, &serde_json::to_string_pretty(&bands).expect("bands serialize"))?;
            files.push(p);
        }
    }
    let verdict = if gap.gap_ok { "passes" } else { "fails" };
    println!(
        "axial gap check {verdict}: min axial {:.6} vs 2 x max in-plane {:.6}",
        gap.min_axial,
        2.0 * gap.max_in_plane
    );
    Ok(Outcome {
        files,
        summary: json!({ "gap": gap, "beta_xy": spectrum.beta_xy }),
        failed_check: (!gap.gap_ok).then(|| "axial gap condition violated".to_string()),
    })
}

pub fn cmd_gate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.physical_params()?;
    let sums = lattice_sums(cfg.l)?;
    let scales = derived_betas(&params, &sums);
    let diag = gate::diagnose(cfg.eta0, scales.beta_z, params.z_ratio(), cfg.gamma, scales.n_z)?;
    let report = json!({
        "diagnostics": diag,
        "scales": scales,
        "d0_um": scales.d0 * 1e6,
        "consistency": {
            "gamma_xy_requested": cfg.gamma,
            "gamma_xy_sign_gate": diag.gamma_from_sign_gate_xy,
            "ratio": diag.gamma_mismatch,
            "consistent": (diag.gamma_mismatch - 1.0).abs() < 1e-6,
        },
    });
    let p = cfg.out.join("gate.json");
    write_file(&p, &serde_json::to_string_pretty(&report).expect("gate report serializes"))?;
    println!(
        "d0 = {:.4} um, J(0)/w_z = {:.6e}, sign-gate Gamma/w_xy = {:.6e}, requested Gamma/w_xy = {:.6e}, E_z = {:.6e}",
        scales.d0 * 1e6,
        diag.j0, diag.gamma_from_sign_gate_xy, cfg.gamma, diag.e_z
    );
    if diag.j0 > 0.0 && (diag.gamma_mismatch - 1.0).abs() > 1e-6 {
        println!(
            "note: requested rate differs from the sign-gate rate by a factor {:.4}",
            diag.gamma_mismatch
        );
    }
    Ok(Outcome {
        files: vec![p],
        summary: report,
        failed_check: None,
    })
}

/// Coupling scales for a decoherence run.
pub fn coupling_scales(cfg: &RunConfig, params: &PhysicalParams) -> Result<CouplingScales, CliError> {
    let sums = lattice_sums(cfg.l)?;
    let d = derived_betas(params, &sums);
    Ok(match cfg.couplings {
        CouplingForm::SignGate => CouplingScales::from_sign_gate(d.x_ratio, cfg.gamma)?,
        CouplingForm::Pulse => CouplingScales::from_pulse(d.x_ratio, d.beta_z, cfg.eta0, params.z_ratio(), cfg.gamma)?,
    })
}

pub fn scan_csv(rows: &[ErrorBreakdown]) -> String {
    let mut s = String::from(SCAN_HEADER);
    s.push('\n');
    for r in rows {
        let vals = [
            r.temperature,
            r.e1.re,
            r.e1.im,
            r.e2.re,
            r.e2.im,
            r.e3.re,
            r.e3.im,
            r.e4.re,
            r.e4.im,
            r.f_bar_xy.re,
            r.f_bar_xy.im,
            r.error_e,
            r.error_eprime,
        ];
        let line: Vec<String> = vals.iter().map(|v| fmt_sig(*v, 15)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn cmd_decoherence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.physical_params()?;
    let scales = coupling_scales(cfg, &params)?;
    let temps = crate::decoherence::log_spaced(cfg.t_min, cfg.t_max, cfg.points)?;
    let model = CrystalModel::from_params(cfg.l, &params)?;
    let spectrum = model.spectrum()?;
    let rows = temperature_scan(&spectrum, &params, &scales, &temps, cfg.mode)?;
    let summary = ScanSummary::from_scan(&rows);
    let p = match cfg.format {
        Format::Csv => {
            let p = cfg.out.join("decoherence.csv");
            write_file(&p, &scan_csv(&rows))?;
            p
        }
        Format::Json => {
            let p = cfg.out.join("decoherence.json");
            let doc = json!({ "params": params, "scales": scales, "L": cfg.l, "mode": cfg.mode, "rows": rows });
            write_file(&p, &serde_json::to_string_pretty(&doc).expect("scan serializes"))?;
            p
        }
    };
    println!(
        "log-log slope (upper decade) {:.4}, max E'/E {:.4}, max E {:.4e}",
        summary.slope_upper_decade, summary.max_eprime_over_e, summary.max_e
    );
    Ok(Outcome {
        files: vec![p],
        summary: json!({ "scan": summary, "scales": scales }),
        failed_check: None,
    })
}

fn matrix_csv(header: &str, m: &nalgebra::DMatrix<f64>) -> String {
    let mut s = format!("# {header}\n");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_sig(m[(i, j)], 15)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn cmd_spin(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.chain_spec();
    let modes = chain_normal_modes(&spec)?;
    let couplings = effective_couplings(&spec, &modes)?;
    let reference = dipolar_reference(&spec)?;
    let deviation = stiff_limit_deviation(&spec, &couplings, 5)?;
    let error = simulation_error(&spec, &modes)?;
    let carrier = carrier_correction_bound(cfg.rabi, spec.omega_l())?;
    let header = format!("n={},beta_x={},detuning={}", spec.n_ions, spec.beta_x, spec.detuning);
    let mut files = Vec::new();
    match cfg.format {
        Format::Csv => {
            let mut modes_csv = String::from("n,V,omega\n");
            for k in 0..spec.n_ions {
                let _ = writeln!(modes_csv, "{},{},{}", k, fmt_sig(modes.v[k], 15), fmt_sig(modes.omegas[k], 15));
            }
            let mut dev_csv = String::from("j,k,J,J_ref,ratio\n");
            for (a, b) in crate::spinchain::interior_pairs(spec.n_ions, 5) {
                let _ = writeln!(
                    dev_csv,
                    "{a},{b},{},{},{}",
                    fmt_sig(couplings.j[(a, b)], 15),
                    fmt_sig(reference[(a, b)], 15),
                    fmt_sig(couplings.j[(a, b)] / reference[(a, b)], 15)
                );
            }
            for (name, text) in [
                ("spin_modes.csv", modes_csv),
                ("spin_j.csv", matrix_csv(&header, &couplings.j)),
                ("spin_reference.csv", matrix_csv(&header, &reference)),
                ("spin_deviation.csv", dev_csv),
            ] {
                let p = cfg.out.join(name);
                write_file(&p, &text)?;
                files.push(p);
            }
        }
        Format::Json => {
            let rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
                (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
            };
            let doc = json!({
                "spec": spec,
                "V": modes.v,
                "omegas": modes.omegas,
                "J": rows(&couplings.j),
                "reference": rows(&reference),
            });
            let p = cfg.out.join("spin.json");
            write_file(&p, &serde_json::to_string_pretty(&doc).expect("spin output serializes"))?;
            files.push(p);
        }
    }
    println!(
        "power-law deviation {:.4}, deviation from reference {:.4}, pairs {}",
        deviation.vs_power_law, deviation.vs_reference, deviation.pairs
    );
    Ok(Outcome {
        files,
        summary: json!({ "deviation": deviation, "simulation_error": error, "carrier": carrier }),
        failed_check: None,
    })
}

/// Entry point shared by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let result = resolve(&cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(outcome) => match outcome.failed_check {
            Some(msg) => {
                eprintln!("warning: {msg}");
                CliError::CheckFailed(msg).exit_code()
            }
            None => 0,
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let mut c = RunConfig::default();
        c.apply_file_contents("# comment\nL = 30 # trailing\n\nf_xy=2e5\nmode = exact\n").unwrap();
        assert_eq!(c.l, 30);
        assert_eq!(c.f_xy, 2e5);
        assert_eq!(c.mode, DiagramMode::Exact);
        assert!(c.apply_file_contents("bogus = 1").is_err());
        assert!(c.apply_file_contents("L 30").is_err());
        assert!(c.apply_file_contents("L = x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.cfg");
        fs::write(&cfg_path, "L = 12\ngamma = 0.1\n").unwrap();
        let cli = Cli::try_parse_from([
            "ioncrystal",
            "gate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--gamma",
            "0.2",
        ])
        .unwrap();
        let cfg = resolve(&cli).unwrap();
        assert_eq!(cfg.l, 12);
        assert_eq!(cfg.gamma, 0.2);
        assert_eq!(cfg.subcommand, "gate");
    }

    #[test]
    fn sig_formatting_round_trips() {
        let x = 0.123_456_789_012_345_67_f64;
        let s = fmt_sig(x, 15);
        let back: f64 = s.parse().unwrap();
        assert_eq!(fmt_sig(back, 15), s);
        assert!((back - x).abs() < 1e-15);
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(crate::Error::InvalidParameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(crate::Error::UnstableChain(-1.0)).exit_code(), 3);
    }
}
