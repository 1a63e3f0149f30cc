//! Harmonic inversion by band-limited matrix pencil.
//!
//! The series is shifted to the band centre, low-pass filtered and decimated,
//! then decomposed into damped exponentials with the total-least-squares
//! matrix pencil. Amplitudes come from a Vandermonde least-squares fit and are
//! corrected for the filter response.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{AnalysisError, HarmonicComponent};
use crate::fdtd::TimeSeries;
use crate::units;

/// Fits with a larger relative residual are unreliable.
pub const RESIDUAL_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Upper bound on the pencil rank.
    pub max_components: usize,
    /// Singular values below this fraction of the largest are discarded.
    pub svd_tolerance: f64,
    /// Decimated sample rate in units of the band half-width.
    pub oversample: f64,
    /// Decimation is reduced so at least this many samples remain.
    pub min_decimated: usize,
    /// Filter half-length in decimated samples.
    pub filter_half_span: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { max_components: 16, svd_tolerance: 1e-7, oversample: 4.0, min_decimated: 300, filter_half_span: 16 }
    }
}

const MIN_SAMPLES: usize = 12;

pub fn harmonic_inversion(series: &TimeSeries, band: (f64, f64)) -> Result<Vec<HarmonicComponent>, AnalysisError> {
    harmonic_inversion_with(series, band, &InversionOptions::default())
}

fn lowpass(cutoff: f64, taps: usize) -> Vec<f64> {
    // cutoff in cycles per input sample
    let c = (taps - 1) as f64 / 2.0;
    let mut h: Vec<f64> = (0..taps)
        .map(|k| {
            let x = k as f64 - c;
            let sinc = if x == 0.0 { 2.0 * cutoff } else { (2.0 * PI * cutoff * x).sin() / (PI * x) };
            let w = if taps == 1 {
                1.0
            } else {
                let u = k as f64 / (taps - 1) as f64;
                0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos()
            };
            sinc * w
        })
        .collect();
    let s: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= s);
    h
}

pub fn harmonic_inversion_with(
    series: &TimeSeries,
    band: (f64, f64),
    opts: &InversionOptions,
) -> Result<Vec<HarmonicComponent>, AnalysisError> {
    let (lo, hi) = band;
    let dt = series.dt;
    let nyquist = units::engine_to_thz(0.5 / dt);
    if !(lo < hi) || hi > nyquist || lo < -nyquist {
        return Err(AnalysisError::InvalidBand { lo, hi });
    }
    let n = series.samples.len();
    if n < MIN_SAMPLES {
        return Err(AnalysisError::TooShort { samples: n });
    }
    let nu_c = units::thz_to_engine(0.5 * (lo + hi));
    let half = units::thz_to_engine(0.5 * (hi - lo));

    let d_nyq = ((1.0 / (dt * opts.oversample * half)).floor() as usize).max(1);
    let d = d_nyq.min(n / opts.min_decimated).max(1);
    let taps = if d == 1 { 1 } else { 2 * opts.filter_half_span * d + 1 };
    let c = (taps - 1) / 2;
    let h = lowpass(1.25 * half * dt, taps);

    let mixed: Vec<Complex64> = series
        .samples
        .iter()
        .enumerate()
        .map(|(k, &x)| x * Complex64::from_polar(1.0, -2.0 * PI * nu_c * series.time(k)))
        .collect();
    let mut y = Vec::new();
    let mut centre = c;
    while centre + c < n {
        let acc: Complex64 = h.iter().zip(&mixed[centre - c..=centre + c]).map(|(&w, &v)| v * w).sum();
        y.push(acc);
        centre += d;
    }
    let nd = y.len();
    if nd < MIN_SAMPLES {
        return Err(AnalysisError::TooShort { samples: nd });
    }
    let t0 = series.time(c);
    let step = d as f64 * dt;

    let l = nd / 3;
    let rows = nd - l;
    let hankel = DMatrix::from_fn(rows, l + 1, |i, j| y[i + j]);
    let svd = hankel.svd(false, true);
    let sigma0 = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma0 == 0.0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let rank = order
        .iter()
        .take_while(|&&k| svd.singular_values[k] > opts.svd_tolerance * sigma0)
        .count()
        .min(opts.max_components)
        .min(l);
    if rank == 0 {
        return Err(AnalysisError::TooShort { samples: nd });
    }
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    // rows of conj(V) restricted to the dominant subspace
    let w = DMatrix::from_fn(l + 1, rank, |r, k| v_t[(order[k], r)]);
    let w1 = w.rows(0, l).into_owned();
    let w2 = w.rows(1, l).into_owned();
    let pencil = w1.svd(true, true).solve(&w2, 1e-14).map_err(|_| AnalysisError::TooShort { samples: nd })?;
    let (_, t) = pencil.schur().unpack();
    let poles: Vec<Complex64> = (0..rank).map(|k| t[(k, k)]).filter(|z| z.norm() > 1e-12 && z.is_finite()).collect();
    if poles.is_empty() {
        return Err(AnalysisError::TooShort { samples: nd });
    }

    let vander = DMatrix::from_fn(nd, poles.len(), |k, i| poles[i].powu(k as u32));
    let rhs = DMatrix::from_fn(nd, 1, |k, _| y[k]);
    let amps = vander.clone().svd(true, true).solve(&rhs, 1e-14).map_err(|_| AnalysisError::TooShort { samples: nd })?;
    let fit = &vander * &amps;
    let err: f64 = (0..nd).map(|k| (fit[(k, 0)] - y[k]).norm_sqr()).sum::<f64>().sqrt();
    let norm: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let residual = err / norm;

    let mut out = Vec::new();
    for (i, &z) in poles.iter().enumerate() {
        let s = z.ln() / step;
        let nu = nu_c + s.im / (2.0 * PI);
        let alpha = -s.re;
        let frequency = units::engine_to_thz(nu);
        if frequency < lo || frequency > hi {
            continue;
        }
        let response: Complex64 = h.iter().enumerate().map(|(j, &w)| w * (s * ((j as f64 - c as f64) * dt)).exp()).sum();
        let amplitude = amps[(i, 0)] / response * (-s * (t0 - series.t_start)).exp() * Complex64::from_polar(1.0, 2.0 * PI * nu_c * series.t_start);
        let q = if alpha > 0.0 { PI * nu / alpha } else { f64::INFINITY };
        out.push(HarmonicComponent { frequency, q, amplitude, residual });
    }
    out.sort_by(|a, b| b.amplitude.norm().total_cmp(&a.amplitude.norm()));
    Ok(out)
}
