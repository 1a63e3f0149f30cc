use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use statrs::function::erf::erf;

use super::faddeeva::faddeeva;
use super::{fwhm_to_sigma, InstrumentResponse, SpectraError, SpectralLine};

/// Unit-area Voigt profile; `sigma` is the Gaussian standard deviation and
/// `gamma` the Lorentzian half width.
pub fn voigt(x: f64, sigma: f64, gamma: f64) -> f64 {
    if sigma <= 0.0 {
        return gamma / (PI * (x * x + gamma * gamma));
    }
    let s2 = sigma * std::f64::consts::SQRT_2;
    faddeeva(Complex64::new(x / s2, gamma / s2)).re / (sigma * (2.0 * PI).sqrt())
}

/// 8-point Gauss–Legendre nodes and weights on [−1, 1].
fn gauss_legendre() -> &'static [(f64, f64); 8] {
    static CELL: OnceLock<[(f64, f64); 8]> = OnceLock::new();
    CELL.get_or_init(|| {
        let n = 8;
        let mut out = [(0.0, 0.0); 8];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

/// Mean of a unit-area line over [lo, hi].
///
/// Pure Lorentzian and pure Gaussian limits use their closed-form integrals;
/// otherwise composite Gauss–Legendre on sub-intervals no wider than a quarter
/// of the local length scale.
pub fn pixel_line(center: f64, lorentz_fwhm: f64, gaussian_fwhm: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let gamma = 0.5 * lorentz_fwhm;
    let sigma = fwhm_to_sigma(gaussian_fwhm);
    let (a, b) = (lo - center, hi - center);
    if sigma <= 0.0 && gamma <= 0.0 {
        return if (lo..hi).contains(&center) { 1.0 / width } else { 0.0 };
    }
    if sigma <= 0.0 {
        return ((b / gamma).atan() - (a / gamma).atan()) / (PI * width);
    }
    if gamma <= 0.0 {
        let s2 = sigma * std::f64::consts::SQRT_2;
        return 0.5 * (erf(b / s2) - erf(a / s2)) / width;
    }
    let dist = if a > 0.0 {
        a
    } else if b < 0.0 {
        -b
    } else {
        0.0
    };
    let scale = sigma.max(gamma).max(dist);
    let n_sub = ((width / (0.25 * scale)).ceil() as usize).clamp(1, 512);
    let h = width / n_sub as f64;
    let nodes = gauss_legendre();
    let mut sum = 0.0;
    for s in 0..n_sub {
        let mid = a + (s as f64 + 0.5) * h;
        for &(x, w) in nodes {
            sum += w * voigt(mid + 0.5 * h * x, sigma, gamma);
        }
    }
    sum * 0.5 * h / width
}

/// Pixel values (intensity per nm) of one line seen through the response.
pub fn apply_instrument_response(line: &SpectralLine, response: &InstrumentResponse) -> Result<Vec<f64>, SpectraError> {
    response.validate()?;
    let (lo, hi) = response.range();
    if !(line.center >= lo && line.center <= hi) {
        return Err(SpectraError::OutsideRange { center: line.center, lo, hi });
    }
    let g = line.effective_gaussian_fwhm(response);
    let half = 0.5 * response.pitch;
    Ok((0..response.pixels)
        .map(|i| {
            let c = response.center(i);
            line.area * pixel_line(line.center, line.lorentz_fwhm, g, c - half, c + half)
        })
        .collect())
}
