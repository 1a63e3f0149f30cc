use num_complex::Complex64;

use super::{Component, FdtdError, FieldValue, ModeProfile, Normalization, SimConfig, Simulation, TimeSeries};
use crate::units;

/// Zero fields, precomputed PML coefficients, verified time step.
pub fn init_simulation<T: FieldValue>(config: &SimConfig) -> Result<Simulation<T>, FdtdError> {
    Simulation::new(config)
}

pub fn step<T: FieldValue>(sim: &mut Simulation<T>) -> Result<(), FdtdError> {
    sim.step()
}

/// Stored E_φ, H_r and H_z carry a factor 1/i; undo it for output.
fn physical(component: Component, v: Complex64) -> Complex64 {
    match component {
        Component::Ephi | Component::Hr | Component::Hz => v * Complex64::i(),
        _ => v,
    }
}

fn real_source(config: &SimConfig) -> bool {
    config.source.amplitude.im == 0.0
}

fn check_duration(config: &SimConfig) -> Result<usize, FdtdError> {
    let dt = config.dt();
    let off = (config.source.turn_off_time() / dt).ceil() as usize;
    if off >= config.total_steps {
        return Err(FdtdError::Config(format!("source active for {off} steps but the run has only {}", config.total_steps)));
    }
    Ok(off)
}

/// Runs the full simulation and returns one series per probe, sampled every
/// step once the source has been switched off.
pub fn run_ringdown(config: &SimConfig) -> Result<Vec<TimeSeries>, FdtdError> {
    if config.probes.is_empty() {
        return Err(FdtdError::Config("no probes defined".into()));
    }
    if real_source(config) {
        ringdown::<f64>(config)
    } else {
        ringdown::<Complex64>(config)
    }
}

fn ringdown<T: FieldValue>(config: &SimConfig) -> Result<Vec<TimeSeries>, FdtdError> {
    let off = check_duration(config)?;
    let mut sim: Simulation<T> = init_simulation(config)?;
    let taps: Vec<(Component, usize)> = config
        .probes
        .iter()
        .map(|p| {
            let (i, j) = sim.locate(p.component, p.r, p.z).expect("probe validated at init");
            (p.component, sim.flat(p.component, i, j))
        })
        .collect();
    for _ in 0..off {
        sim.step()?;
    }
    let n = config.total_steps - off;
    let mut out: Vec<TimeSeries> = config
        .probes
        .iter()
        .enumerate()
        .map(|(k, p)| TimeSeries {
            probe: k,
            component: p.component,
            r: p.r,
            z: p.z,
            t_start: (off + 1) as f64 * sim.dt(),
            dt: sim.dt(),
            samples: Vec::with_capacity(n),
        })
        .collect();
    for _ in 0..n {
        sim.step()?;
        for (series, &(c, k)) in out.iter_mut().zip(&taps) {
            series.samples.push(physical(c, sim.field(c)[k].to_complex()));
        }
    }
    if !sim.all_finite() {
        return Err(FdtdError::Instability { step: sim.step_index() });
    }
    Ok(out)
}

/// Steps between DFT samples: about eight samples per period of `nu_target`.
pub fn dft_stride(dt: f64, nu_target_thz: f64) -> usize {
    let period = 1.0 / units::thz_to_engine(nu_target_thz);
    ((period / (8.0 * dt)).floor() as usize).max(1)
}

/// Frequency resolution (THz) of the post-source DFT window.
pub fn dft_bandwidth(config: &SimConfig) -> f64 {
    let dt = config.dt();
    let off = (config.source.turn_off_time() / dt).ceil() as usize;
    let window = config.total_steps.saturating_sub(off).max(1) as f64 * dt;
    units::engine_to_thz(1.0 / window)
}

/// Runs the simulation and accumulates the discrete Fourier amplitude of the
/// electric field at `nu_target_thz` over the post-source window.
///
/// The result is interpolated to cell centres and scaled so that the largest
/// |E| is one and the dominant component is real positive there.
pub fn accumulate_profile(config: &SimConfig, nu_target_thz: f64) -> Result<ModeProfile, FdtdError> {
    if !(nu_target_thz > 0.0) {
        return Err(FdtdError::Config("target frequency must be positive".into()));
    }
    if real_source(config) {
        accumulate::<f64>(config, nu_target_thz)
    } else {
        accumulate::<Complex64>(config, nu_target_thz)
    }
}

fn accumulate<T: FieldValue>(config: &SimConfig, nu_target_thz: f64) -> Result<ModeProfile, FdtdError> {
    let off = check_duration(config)?;
    let mut sim: Simulation<T> = init_simulation(config)?;
    let dt = sim.dt();
    let stride = dft_stride(dt, nu_target_thz);
    let omega = 2.0 * std::f64::consts::PI * units::thz_to_engine(nu_target_thz);
    let mut acc_r = vec![Complex64::default(); sim.er.len()];
    let mut acc_p = vec![Complex64::default(); sim.ep.len()];
    let mut acc_z = vec![Complex64::default(); sim.ez.len()];
    for _ in 0..off {
        sim.step()?;
    }
    for n in off..config.total_steps {
        sim.step()?;
        if (n - off) % stride != 0 {
            continue;
        }
        let phase = Complex64::from_polar(1.0, -omega * sim.time());
        for (acc, field) in [(&mut acc_r, &sim.er), (&mut acc_p, &sim.ep), (&mut acc_z, &sim.ez)] {
            for (a, v) in acc.iter_mut().zip(field.iter()) {
                *a += v.to_complex() * phase;
            }
        }
    }
    if !sim.all_finite() {
        return Err(FdtdError::Instability { step: sim.step_index() });
    }

    let map = &config.index_map;
    let (nr, nz) = (map.nr, map.nz);
    let nz1 = nz + 1;
    let mut er = vec![Complex64::default(); nr * nz];
    let mut ephi = vec![Complex64::default(); nr * nz];
    let mut ez = vec![Complex64::default(); nr * nz];
    for i in 0..nr {
        for j in 0..nz {
            let k = i * nz + j;
            er[k] = 0.5 * (acc_r[i * nz1 + j] + acc_r[i * nz1 + j + 1]);
            let p = 0.25 * (acc_p[i * nz1 + j] + acc_p[(i + 1) * nz1 + j] + acc_p[i * nz1 + j + 1] + acc_p[(i + 1) * nz1 + j + 1]);
            ephi[k] = p * Complex64::i();
            ez[k] = 0.5 * (acc_z[i * nz + j] + acc_z[(i + 1) * nz + j]);
        }
    }
    let mut profile = ModeProfile {
        lambda: units::thz_to_wavelength(nu_target_thz),
        m: config.m,
        nr,
        nz,
        dr: map.dr,
        dz: map.dz,
        r0: map.r0,
        z0: map.z0,
        er,
        ephi,
        ez,
        material: map.material.clone(),
        pml_cells: config.pml.cells,
        normalization: Normalization::TravelingWave,
        dft_peak: 0.0,
    };
    profile.dft_peak = (0..nr * nz).map(|k| profile.intensity(k)).fold(0.0, f64::max).sqrt() * stride as f64 * dt;
    normalize(&mut profile);
    Ok(profile)
}

/// Scales to unit peak |E| with the dominant component real and positive at the peak.
pub fn normalize(profile: &mut ModeProfile) {
    let Some(peak) = (0..profile.nr * profile.nz).max_by(|&a, &b| profile.intensity(a).total_cmp(&profile.intensity(b))) else {
        return;
    };
    let amp = profile.intensity(peak).sqrt();
    if amp == 0.0 {
        return;
    }
    let dominant = [profile.er[peak], profile.ephi[peak], profile.ez[peak]].into_iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let scale = dominant.conj() / (dominant.norm() * amp);
    for v in profile.er.iter_mut().chain(profile.ephi.iter_mut()).chain(profile.ez.iter_mut()) {
        *v *= scale;
    }
}
