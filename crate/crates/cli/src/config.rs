//! TOML job files.
//!
//! A job file carries shared `[geometry]`, `[materials]`, `[grid]` and
//! `[search]` sections plus one section named after the subcommand. Unknown
//! keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wgmsim::analysis::Polarization;
use wgmsim::cqed::EmitterModel;
use wgmsim::device::{DeviceGeometry, DispersionTable, GridSpec, Interpolation, MaterialKind, MaterialModel, MaterialSet};
use wgmsim::pipeline::ModeSearch;
use wgmsim::spectra::{FamilyOptions, FitOptions, InstrumentResponse, PeakSearch, SynthesisSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Simulate,
    Sweep,
    Fit,
    Cqed,
    Report,
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::Simulate => "simulate",
            JobKind::Sweep => "sweep",
            JobKind::Fit => "fit",
            JobKind::Cqed => "cqed",
            JobKind::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialsConfig {
    pub guiding_index: f64,
    pub diamond_index: f64,
    /// Two-column `λ_μm, n` CSV for the guiding layer, relative to the job file.
    pub guiding_table: Option<PathBuf>,
    pub diamond_table: Option<PathBuf>,
    pub interpolation: Interpolation,
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        Self { guiding_index: 3.25, diamond_index: 2.42, guiding_table: None, diamond_table: None, interpolation: Interpolation::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Cell size in r and z (μm).
    pub spacing: f64,
    pub r_min: Option<f64>,
    pub air_side: f64,
    pub air_top: f64,
    pub pml_cells: usize,
    pub subpixel: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::uniform(0.01);
        Self { spacing: 0.01, r_min: g.r_min, air_side: g.air_side, air_top: g.air_top, pml_cells: g.pml_cells, subpixel: g.subpixel }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dr: self.spacing,
            dz: self.spacing,
            r_min: self.r_min,
            air_side: self.air_side,
            air_top: self.air_top,
            pml_cells: self.pml_cells,
            subpixel: self.subpixel,
        }
    }
}

/// Engine settings shared by every mode search of the job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub ringdown_steps: usize,
    pub profile_steps: usize,
    pub profile_bandwidth: f64,
    pub courant: f64,
    /// Width of the search window around the oracle estimate (μm); sweeps
    /// default to 0.02 and single simulations to 0.04.
    pub window_width: Option<f64>,
    pub q_i: Option<f64>,
    pub standing_wave: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = ModeSearch::new(0, Polarization::TE);
        Self {
            ringdown_steps: s.ringdown_steps,
            profile_steps: s.profile_steps,
            profile_bandwidth: s.profile_bandwidth,
            courant: s.courant,
            window_width: None,
            q_i: None,
            standing_wave: false,
        }
    }
}

impl SearchConfig {
    pub fn search(&self, m: u32, family: Family, profile: bool, default_width: f64) -> ModeSearch {
        let mut s = ModeSearch::new(m, family.polarization);
        s.radial_order = family.radial_order;
        s.window_width = self.window_width.unwrap_or(default_width);
        s.ringdown_steps = self.ringdown_steps;
        s.profile_steps = if profile { self.profile_steps } else { 0 };
        s.profile_bandwidth = self.profile_bandwidth;
        s.courant = self.courant;
        s.q_i = self.q_i;
        s.standing_wave = self.standing_wave;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub polarization: Polarization,
    #[serde(default)]
    pub radial_order: usize,
}

impl Family {
    pub fn label(&self) -> String {
        format!("{}{}", self.polarization, self.radial_order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub m: u32,
    #[serde(default = "te")]
    pub polarization: Polarization,
    #[serde(default)]
    pub radial_order: usize,
    /// Explicit search window (μm) instead of the oracle-centred one.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default = "yes")]
    pub profile: bool,
}

fn te() -> Polarization {
    Polarization::TE
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Inclusive azimuthal-number range.
    #[serde(default)]
    pub m: Option<(u32, u32)>,
    #[serde(default = "one")]
    pub m_step: u32,
    /// Explicit azimuthal numbers; overrides `m`.
    #[serde(default)]
    pub m_values: Option<Vec<u32>>,
    /// Keeps only modes whose oracle wavelength lies in this window (μm); on
    /// its own it also selects the azimuthal numbers.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    /// Etch depths (μm) replacing `geometry.etch_depth`.
    #[serde(default)]
    pub etch_depths: Vec<f64>,
    #[serde(default = "te0")]
    pub families: Vec<Family>,
    #[serde(default)]
    pub profile: bool,
}

fn one() -> u32 {
    1
}
fn te0() -> Vec<Family> {
    vec![Family { polarization: Polarization::TE, radial_order: 0 }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticLine {
    /// Centre (nm).
    pub center: f64,
    pub q: f64,
    #[serde(default = "unit")]
    pub height: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpectrum {
    /// Pixel range (nm) at the default resolution unless `[fit.response]` is given.
    pub range: (f64, f64),
    pub lines: Vec<SyntheticLine>,
    #[serde(default)]
    pub synthesis: SynthesisSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Two-column `λ_nm, intensity` CSV.
    #[serde(default)]
    pub spectrum: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpectrum>,
    #[serde(default)]
    pub response: Option<InstrumentResponse>,
    #[serde(default)]
    pub peaks: PeakSearch,
    #[serde(default)]
    pub options: FitOptions,
    /// Half width of the fit window around each detected peak (nm).
    #[serde(default = "half_window")]
    pub half_window: f64,
    /// Fit windows (nm); skips peak detection when non-empty.
    #[serde(default)]
    pub windows: Vec<(f64, f64)>,
    /// FSR table (`fsr.csv` of a sweep) used to label the fitted peaks.
    #[serde(default)]
    pub families: Option<PathBuf>,
    #[serde(default)]
    pub family_options: FamilyOptions,
}

fn half_window() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqedMode {
    pub name: String,
    /// Wavelength (μm).
    pub lambda: f64,
    pub q: f64,
    /// Combined with `q` as 1/Q = 1/q + 1/q_i when given.
    #[serde(default)]
    pub q_i: Option<f64>,
    pub v_bar: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqedSection {
    pub modes: Vec<CqedMode>,
    #[serde(default)]
    pub emitter: EmitterModel,
    #[serde(default = "n_diamond")]
    pub n_emit: f64,
    #[serde(default = "n_gap")]
    pub n_max_loc: f64,
}

fn n_diamond() -> f64 {
    2.42
}
fn n_gap() -> f64 {
    3.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    /// Output directories of earlier simulate or sweep jobs.
    pub inputs: Vec<PathBuf>,
    #[serde(default = "q_i")]
    pub q_i: f64,
    #[serde(default)]
    pub emitter: EmitterModel,
    #[serde(default = "n_diamond")]
    pub n_emit: f64,
    #[serde(default = "n_gap")]
    pub n_max_loc: f64,
}

fn q_i() -> f64 {
    9000.0
}

/// The job file exactly as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub geometry: Option<DeviceGeometry>,
    #[serde(default)]
    pub materials: MaterialsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub search: SearchConfig,
    pub simulate: Option<SimulateSection>,
    pub sweep: Option<SweepSection>,
    pub fit: Option<FitSection>,
    pub cqed: Option<CqedSection>,
    pub report: Option<ReportSection>,
}

/// A validated job with relative paths resolved against the job file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Job {
    pub kind: JobKind,
    pub seed: u64,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub out: PathBuf,
    pub spec: JobFile,
}

pub const DEFAULT_OUT: &str = "wgmsim-out";

fn config_error(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", path.display()))
}

pub fn parse_config(path: &Path, kind: JobKind) -> Result<Job, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_config_str(&text, kind, base).map_err(|e| match e {
        CliError::Config(msg) => config_error(path, msg),
        other => other,
    })
}

/// Parses and validates a job; relative paths are taken from `base`.
pub fn parse_config_str(text: &str, kind: JobKind, base: &Path) -> Result<Job, CliError> {
    let mut spec: JobFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    spec.materials.guiding_table.as_mut().map(resolve);
    spec.materials.diamond_table.as_mut().map(resolve);
    if let Some(f) = spec.fit.as_mut() {
        f.spectrum.as_mut().map(resolve);
        f.families.as_mut().map(resolve);
    }
    if let Some(r) = spec.report.as_mut() {
        r.inputs.iter_mut().for_each(resolve);
    }
    let mut out = spec.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    resolve(&mut out);
    let job = Job { kind, seed: spec.seed.unwrap_or(0), workers: spec.workers, out, spec };
    job.validate()?;
    Ok(job)
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Job {
    fn validate(&self) -> Result<(), CliError> {
        let s = &self.spec;
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        let needs_device = matches!(self.kind, JobKind::Simulate | JobKind::Sweep);
        if needs_device {
            let g = s.geometry.ok_or_else(|| invalid("missing [geometry] section"))?;
            g.validated().map_err(|e| invalid(format!("geometry: {e}")))?;
            if !(s.grid.spacing > 0.0) {
                return Err(invalid("grid.spacing must be positive"));
            }
            self.materials()?;
        }
        match self.kind {
            JobKind::Simulate => {
                s.simulate.as_ref().ok_or_else(|| invalid("missing [simulate] section"))?;
            }
            JobKind::Sweep => {
                let w = s.sweep.as_ref().ok_or_else(|| invalid("missing [sweep] section"))?;
                if w.m.is_none() && w.m_values.is_none() && w.window.is_none() {
                    return Err(invalid("sweep needs `m`, `m_values` or `window`"));
                }
                if w.m_values.as_ref().is_some_and(|v| v.is_empty()) || w.families.is_empty() || w.m_step == 0 {
                    return Err(invalid("sweep axes must not be empty"));
                }
                if let Some((lo, hi)) = w.m {
                    if lo > hi {
                        return Err(invalid(format!("sweep.m range [{lo}, {hi}] is empty")));
                    }
                }
                if let Some((lo, hi)) = w.window {
                    if !(lo > 0.0 && hi > lo) {
                        return Err(invalid("sweep.window must satisfy 0 < lo < hi"));
                    }
                }
                for &h in &w.etch_depths {
                    g_with_etch(s.geometry.unwrap(), h)?;
                }
            }
            JobKind::Fit => {
                let f = s.fit.as_ref().ok_or_else(|| invalid("missing [fit] section"))?;
                if f.spectrum.is_some() == f.synthetic.is_some() {
                    return Err(invalid("fit needs exactly one of `spectrum` and `[fit.synthetic]`"));
                }
                if !(f.half_window > 0.0) {
                    return Err(invalid("fit.half_window must be positive"));
                }
            }
            JobKind::Cqed => {
                let c = s.cqed.as_ref().ok_or_else(|| invalid("missing [cqed] section"))?;
                if c.modes.is_empty() {
                    return Err(invalid("cqed.modes must not be empty"));
                }
                c.emitter.validate().map_err(|e| invalid(format!("cqed.emitter: {e}")))?;
            }
            JobKind::Report => {
                let r = s.report.as_ref().ok_or_else(|| invalid("missing [report] section"))?;
                if r.inputs.is_empty() {
                    return Err(invalid("report.inputs must not be empty"));
                }
                if !(r.q_i > 0.0) {
                    return Err(invalid("report.q_i must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> DeviceGeometry {
        self.spec.geometry.expect("validated")
    }

    pub fn materials(&self) -> Result<MaterialSet, CliError> {
        let m = &self.spec.materials;
        let load = |kind: MaterialKind, index: f64, table: &Option<PathBuf>| -> Result<MaterialModel, CliError> {
            if !(index >= 1.0) {
                return Err(invalid(format!("{kind:?} index must be ≥ 1")));
            }
            let model = MaterialModel::constant(kind, index);
            match table {
                Some(p) => {
                    let t = DispersionTable::from_csv(p).map_err(|e| invalid(format!("materials: {e}")))?;
                    Ok(model.with_table(t, m.interpolation))
                }
                None => Ok(model),
            }
        };
        Ok(MaterialSet {
            guiding: load(MaterialKind::GuidingLayer, m.guiding_index, &m.guiding_table)?,
            diamond: load(MaterialKind::Diamond, m.diamond_index, &m.diamond_table)?,
            vacuum: MaterialModel::vacuum(),
        })
    }

    /// Input files whose contents enter the input hash.
    pub fn input_files(&self) -> Vec<PathBuf> {
        let s = &self.spec;
        let mut v: Vec<PathBuf> = [&s.materials.guiding_table, &s.materials.diamond_table].into_iter().flatten().cloned().collect();
        if let Some(f) = &s.fit {
            v.extend(f.spectrum.iter().chain(&f.families).cloned());
        }
        if let Some(r) = &s.report {
            v.extend(r.inputs.iter().map(|d| d.join(crate::report::MODES)));
        }
        v
    }
}

pub fn g_with_etch(g: DeviceGeometry, h: f64) -> Result<DeviceGeometry, CliError> {
    DeviceGeometry { etch_depth: h, ..g }.validated().map_err(|e| invalid(format!("etch depth {h}: {e}")))
}

/// Worker count: command line, then environment, then job file, then the machine.
pub fn resolve_workers(flag: Option<usize>, env: Option<&str>, job: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return if n > 0 { Ok(n) } else { Err(invalid("--workers must be at least 1")) };
    }
    if let Some(v) = env {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(invalid(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        };
    }
    Ok(job.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

pub const WORKERS_ENV: &str = "WGMSIM_WORKERS";

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
        [geometry]
        disk_diameter = 4.5
        thickness = 0.13
        etch_depth = 0.6

        [simulate]
        m = 56
    ";

    #[test]
    fn minimal_simulate_gets_defaults() {
        let job = parse_config_str(MINIMAL, JobKind::Simulate, Path::new("/tmp/jobs")).unwrap();
        assert_eq!(job.seed, 0);
        assert_eq!(job.out, Path::new("/tmp/jobs").join(DEFAULT_OUT));
        assert_eq!(job.spec.grid.spacing, 0.01);
        assert_eq!(job.spec.materials.guiding_index, 3.25);
        let sim = job.spec.simulate.as_ref().unwrap();
        assert_eq!((sim.polarization, sim.radial_order, sim.profile), (Polarization::TE, 0, true));
        let search = job.spec.search.search(56, Family { polarization: Polarization::TE, radial_order: 0 }, true, 0.04);
        assert_eq!(search, ModeSearch::new(56, Polarization::TE));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}\nbogus_key = 1\n");
        let e = parse_config_str(&text, JobKind::Simulate, Path::new("")).unwrap_err().to_string();
        assert!(e.contains("bogus_key"), "{e}");
        let e = parse_config_str(&MINIMAL.replace("m = 56", "m = 56\nmode = 3"), JobKind::Simulate, Path::new("")).unwrap_err().to_string();
        assert!(e.contains("mode") && e.contains("line"), "{e}");
    }

    #[test]
    fn missing_section_for_subcommand() {
        let e = parse_config_str(MINIMAL, JobKind::Sweep, Path::new("")).unwrap_err();
        assert!(e.to_string().contains("[sweep]"));
    }

    #[test]
    fn empty_sweep_axes_rejected() {
        let text = MINIMAL.replace("[simulate]\n        m = 56", "[sweep]\nm_values = []");
        assert!(parse_config_str(&text, JobKind::Sweep, Path::new("")).is_err());
        let text = MINIMAL.replace("[simulate]\n        m = 56", "[sweep]\nfamilies = []\nm = [50, 52]");
        assert!(parse_config_str(&text, JobKind::Sweep, Path::new("")).is_err());
    }

    #[test]
    fn worker_precedence() {
        assert_eq!(resolve_workers(Some(3), Some("5"), Some(7)).unwrap(), 3);
        assert_eq!(resolve_workers(None, Some("5"), Some(7)).unwrap(), 5);
        assert_eq!(resolve_workers(None, None, Some(7)).unwrap(), 7);
        assert!(resolve_workers(None, Some("zero"), None).is_err());
        assert!(resolve_workers(Some(0), None, None).is_err());
    }
}
