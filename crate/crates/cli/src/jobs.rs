//! Execution of simulate, sweep, fit and cqed jobs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wgmsim::analysis::{fsr_dispersion, q_budget, FsrPoint, HarmonicComponent};
use wgmsim::cqed::{beta, coupling_g, kappa, purcell_factor};
use wgmsim::device::{DeviceGeometry, MaterialSet};
use wgmsim::fdtd::{write_profile_binary, write_profile_csv};
use wgmsim::oracle::family_resonances;
use wgmsim::pipeline::{find_mode, ModeResult};
use wgmsim::spectra::{
    assign_families, detect_peaks, fit_resonance, read_spectrum_csv, synthesize_lines, write_spectrum_csv, FamilyDispersion,
    InstrumentResponse, LineFit, SpectralLine, Spectrum,
};

use crate::config::{g_with_etch, Family, FitSection, Job, JobKind};
use crate::manifest::{csv_bytes, jsonl_bytes, Manifest, OutDir, TaskEntry, TaskStatus};
use crate::pool::run_pool;
use crate::records::{mode_key, FsrRow, ModeRecord};
use crate::{report, CliError};

/// Runs `job` and writes its outputs and manifest; task failures are recorded,
/// not returned.
pub fn run_job(job: &Job, workers: usize) -> Result<Manifest, CliError> {
    let manifest = Manifest::new(job)?;
    let mut out = OutDir::create(&job.out)?;
    let manifest = match job.kind {
        JobKind::Simulate => simulate(job, workers, &mut out, manifest)?,
        JobKind::Sweep => sweep(job, workers, &mut out, manifest)?,
        JobKind::Fit => fit(job, workers, &mut out, manifest)?,
        JobKind::Cqed => cqed(job, &mut out, manifest)?,
        JobKind::Report => report::report(job, &mut out, manifest)?,
    };
    out.finish(manifest)
}

/// Pushes a manifest entry and the per-task file for one finished task.
fn record_task<R: Serialize>(out: &OutDir, manifest: &mut Manifest, key: &str, result: &Result<R, String>) {
    let entry = match result {
        Ok(value) => match out.write_task(key, value) {
            Ok(rel) => TaskEntry { key: key.into(), status: TaskStatus::Ok, error: None, artifact: Some(rel) },
            Err(e) => TaskEntry { key: key.into(), status: TaskStatus::Failed, error: Some(format!("writing result: {e}")), artifact: None },
        },
        Err(e) => {
            log::warn!("task {key} failed: {e}");
            TaskEntry { key: key.into(), status: TaskStatus::Failed, error: Some(e.clone()), artifact: None }
        }
    };
    manifest.tasks.push(entry);
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTask {
    pub key: String,
    pub etch_depth: f64,
    pub family: Family,
    pub m: u32,
}

/// Mode searches of a sweep in key order.
pub fn plan_sweep(job: &Job) -> Result<Vec<ModeTask>, CliError> {
    let sweep = job.spec.sweep.as_ref().expect("validated");
    let base = job.geometry();
    let materials = job.materials()?;
    let depths = if sweep.etch_depths.is_empty() { vec![base.etch_depth] } else { sweep.etch_depths.clone() };
    let mut tasks = Vec::new();
    for &h in &depths {
        let geometry = g_with_etch(base, h)?;
        for &family in &sweep.families {
            let candidates: Vec<u32> = match (&sweep.m_values, sweep.m) {
                (Some(v), _) => v.clone(),
                (None, Some((lo, hi))) => (lo..=hi).step_by(sweep.m_step as usize).collect(),
                (None, None) => {
                    let (lo, _) = sweep.window.expect("validated");
                    let m_max = (2.0 * std::f64::consts::PI * geometry.radius() * materials.guiding.reference_index / lo).ceil() as u32 + 1;
                    (1..=m_max).collect()
                }
            };
            let ms = match sweep.window {
                Some(window) => candidates
                    .into_iter()
                    .filter(|&m| in_window(&geometry, &materials, family, m, window))
                    .collect(),
                None => candidates,
            };
            tasks.extend(ms.into_iter().map(|m| ModeTask { key: mode_key(h, &family.label(), m), etch_depth: h, family, m }));
        }
    }
    tasks.sort_by(|a, b| a.key.cmp(&b.key));
    tasks.dedup_by(|a, b| a.key == b.key);
    if tasks.is_empty() {
        return Err(CliError::Config("sweep selects no modes".into()));
    }
    Ok(tasks)
}

fn in_window(geometry: &DeviceGeometry, materials: &MaterialSet, family: Family, m: u32, window: (f64, f64)) -> bool {
    family_resonances(geometry, materials, family.polarization, family.radial_order, m..=m, window).is_ok_and(|v| !v.is_empty())
}

fn run_mode(job: &Job, task: &ModeTask, profile: bool, default_width: f64) -> Result<ModeResult, String> {
    let geometry = g_with_etch(job.geometry(), task.etch_depth).map_err(|e| e.to_string())?;
    let materials = job.materials().map_err(|e| e.to_string())?;
    let mut search = job.spec.search.search(task.m, task.family, profile, default_width);
    if let Some(sim) = &job.spec.simulate {
        if job.kind == JobKind::Simulate {
            search.window = sim.window;
        }
    }
    log::info!("{}: searching", task.key);
    find_mode(&geometry, &materials, &job.spec.grid.spec(), &search).map_err(|e| e.to_string())
}

/// Runs mode searches on the pool and returns the successful ones in task order.
fn mode_tasks(
    job: &Job,
    tasks: &[ModeTask],
    workers: usize,
    profile: bool,
    default_width: f64,
    out: &OutDir,
    manifest: &mut Manifest,
) -> Vec<(ModeRecord, ModeResult)> {
    let results = run_pool(
        tasks,
        workers,
        |t| run_mode(job, t, profile, default_width).map(|r| (ModeRecord::new(t.key.clone(), t.etch_depth, &r), r)),
        |i, r| {
            let row = r.as_ref().map(|(rec, _)| rec).map_err(Clone::clone);
            record_task(out, manifest, &tasks[i].key, &row);
        },
    );
    results.into_iter().filter_map(Result::ok).collect()
}

fn write_modes(out: &mut OutDir, records: &[ModeRecord]) -> Result<(), CliError> {
    out.write("modes.jsonl", &jsonl_bytes(records)?)?;
    out.write("modes.csv", &csv_bytes(records)?)
}

/// FSR rows from every run of consecutive azimuthal numbers of each (h, family).
pub fn fsr_rows(records: &[ModeRecord]) -> Vec<FsrRow> {
    let mut groups: BTreeMap<(u64, String), Vec<&ModeRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.etch_depth_um.to_bits(), r.family.clone())).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((h, _), mut list) in groups {
        list.sort_by_key(|r| r.m);
        let mut start = 0;
        for i in 1..=list.len() {
            if i == list.len() || list[i].m != list[i - 1].m + 1 {
                let run: Vec<_> = list[start..i].iter().map(|r| r.mode()).collect();
                if run.len() >= 2 {
                    let table = fsr_dispersion(&run).expect("consecutive run of one family");
                    rows.extend(table.into_iter().map(|p| FsrRow {
                        etch_depth_um: f64::from_bits(h),
                        family: p.family,
                        m: p.m,
                        lambda_mid_nm: p.lambda_mid * 1e3,
                        fsr_nm: p.fsr_nm,
                    }));
                }
                start = i;
            }
        }
    }
    rows
}

fn simulate(job: &Job, workers: usize, out: &mut OutDir, mut manifest: Manifest) -> Result<Manifest, CliError> {
    let sim = job.spec.simulate.as_ref().expect("validated");
    let family = Family { polarization: sim.polarization, radial_order: sim.radial_order };
    let h = job.geometry().etch_depth;
    let task = ModeTask { key: mode_key(h, &family.label(), sim.m), etch_depth: h, family, m: sim.m };
    let done = mode_tasks(job, std::slice::from_ref(&task), workers, sim.profile, 0.04, out, &mut manifest);
    let records: Vec<ModeRecord> = done.iter().map(|d| d.0.clone()).collect();
    write_modes(out, &records)?;
    if let Some((_, result)) = done.first() {
        let rows: Vec<ComponentRow> = result.components.iter().map(ComponentRow::from).collect();
        out.write("components.csv", &csv_bytes(&rows)?)?;
        if let Some(p) = &result.profile {
            write_profile_binary(&out.root.join("profile.bin"), p)?;
            out.record("profile.bin")?;
            write_profile_csv(&out.root.join("profile.csv"), p)?;
            out.record("profile.csv")?;
        }
    }
    Ok(manifest)
}

/// Harmonic component of the broadband run, flattened for CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct ComponentRow {
    frequency_thz: f64,
    lambda_nm: f64,
    q: f64,
    amplitude: f64,
    phase: f64,
    residual: f64,
}

impl From<&HarmonicComponent> for ComponentRow {
    fn from(c: &HarmonicComponent) -> Self {
        Self {
            frequency_thz: c.frequency,
            lambda_nm: c.wavelength() * 1e3,
            q: c.q,
            amplitude: c.amplitude.norm(),
            phase: c.amplitude.arg(),
            residual: c.residual,
        }
    }
}

fn sweep(job: &Job, workers: usize, out: &mut OutDir, mut manifest: Manifest) -> Result<Manifest, CliError> {
    let tasks = plan_sweep(job)?;
    log::info!("sweep: {} mode searches on {workers} workers", tasks.len());
    let profile = job.spec.sweep.as_ref().is_some_and(|s| s.profile);
    let done = mode_tasks(job, &tasks, workers, profile, 0.02, out, &mut manifest);
    let records: Vec<ModeRecord> = done.into_iter().map(|d| d.0).collect();
    write_modes(out, &records)?;
    out.write("fsr.csv", &csv_bytes(&fsr_rows(&records))?)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub key: String,
    pub window_lo_nm: f64,
    pub window_hi_nm: f64,
    pub center_nm: f64,
    pub center_sd_nm: f64,
    pub lorentz_fwhm_nm: f64,
    pub lorentz_fwhm_sd_nm: f64,
    pub lorentz_fwhm_ci_lo_nm: f64,
    pub lorentz_fwhm_ci_hi_nm: f64,
    pub q: f64,
    pub q_lower_bound: f64,
    pub resolution_limited: bool,
    pub area: f64,
    pub rss: f64,
}

impl FitRow {
    fn new(key: String, window: (f64, f64), f: &LineFit) -> Self {
        Self {
            key,
            window_lo_nm: window.0,
            window_hi_nm: window.1,
            center_nm: f.center,
            center_sd_nm: f.center_sd,
            lorentz_fwhm_nm: f.lorentz_fwhm,
            lorentz_fwhm_sd_nm: f.lorentz_fwhm_sd,
            lorentz_fwhm_ci_lo_nm: f.lorentz_fwhm_ci.0,
            lorentz_fwhm_ci_hi_nm: f.lorentz_fwhm_ci.1,
            q: f.q,
            q_lower_bound: f.q_lower_bound,
            resolution_limited: f.resolution_limited,
            area: f.area,
            rss: f.rss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FamilyRow {
    key: String,
    lambda_nm: f64,
    family: Option<String>,
    chain: Option<usize>,
}

fn load_spectrum(fit: &FitSection, seed: u64, out: &mut OutDir) -> Result<(Spectrum, InstrumentResponse), CliError> {
    if let Some(syn) = &fit.synthetic {
        let response = fit.response.unwrap_or_else(|| InstrumentResponse::covering(syn.range.0, syn.range.1));
        let lines: Vec<SpectralLine> = syn.lines.iter().map(|l| SpectralLine::with_height(l.center, l.center / l.q, l.height, &response)).collect();
        let s = synthesize_lines(&lines, &syn.synthesis, &response, seed).map_err(|e| CliError::Config(format!("fit.synthetic: {e}")))?;
        write_spectrum_csv(&s, &out.root.join("spectrum.csv")).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        out.record("spectrum.csv")?;
        return Ok((s, response));
    }
    let path = fit.spectrum.as_ref().expect("validated");
    let s = read_spectrum_csv(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let response = fit.response.unwrap_or(InstrumentResponse {
        gaussian_fwhm: InstrumentResponse::DEFAULT_FWHM,
        pitch: s.pitch(),
        pixels: s.len(),
        start: s.wavelength[0],
    });
    Ok((s, response))
}

fn fit(job: &Job, workers: usize, out: &mut OutDir, mut manifest: Manifest) -> Result<Manifest, CliError> {
    let cfg = job.spec.fit.as_ref().expect("validated");
    let (spectrum, response) = load_spectrum(cfg, job.seed, out)?;
    let windows: Vec<(f64, f64)> = if cfg.windows.is_empty() {
        let peaks = detect_peaks(&spectrum, &cfg.peaks);
        out.write("peaks.csv", &csv_bytes(&peaks)?)?;
        peaks.iter().map(|p| (p.center - cfg.half_window, p.center + cfg.half_window)).collect()
    } else {
        cfg.windows.clone()
    };
    let tasks: Vec<(String, (f64, f64))> = windows.iter().enumerate().map(|(i, &w)| (format!("w{i:04}"), w)).collect();
    let results = run_pool(
        &tasks,
        workers,
        |(key, w)| fit_resonance(&spectrum, *w, &response, &cfg.options).map(|f| FitRow::new(key.clone(), *w, &f)).map_err(|e| e.to_string()),
        |i, r| record_task(out, &mut manifest, &tasks[i].0, r),
    );
    let rows: Vec<FitRow> = results.into_iter().filter_map(Result::ok).collect();
    out.write("fits.jsonl", &jsonl_bytes(&rows)?)?;
    out.write("fits.csv", &csv_bytes(&rows)?)?;

    if let Some(path) = &cfg.families {
        let table = read_fsr_csv(path)?;
        let families = FamilyDispersion::from_table(&table);
        let centers: Vec<f64> = rows.iter().map(|r| r.center_nm).collect();
        let labels = assign_families(&centers, &families, &cfg.family_options);
        let out_rows: Vec<FamilyRow> = rows
            .iter()
            .zip(labels)
            .map(|(r, a)| FamilyRow { key: r.key.clone(), lambda_nm: a.lambda, family: a.family, chain: a.chain })
            .collect();
        out.write("families.csv", &csv_bytes(&out_rows)?)?;
    }
    Ok(manifest)
}

fn read_fsr_csv(path: &std::path::Path) -> Result<Vec<FsrPoint>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    r.deserialize::<FsrRow>()
        .map(|row| {
            let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok(FsrPoint { family: row.family, m: row.m, lambda_mid: row.lambda_mid_nm * 1e-3, fsr_nm: row.fsr_nm })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqedRow {
    pub name: String,
    pub lambda_um: f64,
    pub q_total: f64,
    pub v_bar: f64,
    pub eta: f64,
    pub f_zpl: f64,
    pub kappa_ghz: f64,
    pub g_ghz: f64,
    pub beta: f64,
}

fn cqed(job: &Job, out: &mut OutDir, mut manifest: Manifest) -> Result<Manifest, CliError> {
    let c = job.spec.cqed.as_ref().expect("validated");
    let mut rows = Vec::new();
    let mut modes = c.modes.clone();
    modes.sort_by(|a, b| a.name.cmp(&b.name));
    for mode in &modes {
        let row = (|| -> Result<CqedRow, String> {
            let q = match mode.q_i {
                Some(qi) => q_budget(mode.q, qi).map_err(|e| e.to_string())?,
                None => mode.q,
            };
            let f = purcell_factor(q, mode.v_bar, mode.eta, c.n_emit, c.n_max_loc).map_err(|e| e.to_string())?;
            let k = kappa(mode.lambda, q).map_err(|e| e.to_string())?;
            Ok(CqedRow {
                name: mode.name.clone(),
                lambda_um: mode.lambda,
                q_total: q,
                v_bar: mode.v_bar,
                eta: mode.eta,
                f_zpl: f,
                kappa_ghz: k,
                g_ghz: coupling_g(f, k, c.emitter.gamma_zpl).map_err(|e| e.to_string())?,
                beta: beta(f, &c.emitter).map_err(|e| e.to_string())?,
            })
        })();
        record_task(out, &mut manifest, &mode.name, &row);
        rows.extend(row.ok());
    }
    out.write("cqed.csv", &csv_bytes(&rows)?)?;
    out.write("cqed.jsonl", &jsonl_bytes(&rows)?)?;
    Ok(manifest)
}
