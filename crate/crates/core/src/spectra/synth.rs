use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::response::{pixel_line, voigt};
use super::{fwhm_to_sigma, InstrumentResponse, SpectraError, Spectrum};
use crate::analysis::ResonantMode;

/// One spectral line before the instrument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub center: f64,
    pub lorentz_fwhm: f64,
    /// Intrinsic Gaussian broadening, added in quadrature to the response.
    #[serde(default)]
    pub gaussian_fwhm: f64,
    /// Integrated intensity (intensity × nm).
    pub area: f64,
}

impl SpectralLine {
    pub fn effective_gaussian_fwhm(&self, response: &InstrumentResponse) -> f64 {
        self.gaussian_fwhm.hypot(response.gaussian_fwhm)
    }

    /// Line whose instrument-broadened peak (before pixel averaging) is `height`.
    pub fn with_height(center: f64, lorentz_fwhm: f64, height: f64, response: &InstrumentResponse) -> Self {
        let mut line = Self { center, lorentz_fwhm, gaussian_fwhm: 0.0, area: 1.0 };
        let peak = voigt(0.0, fwhm_to_sigma(line.effective_gaussian_fwhm(response)), 0.5 * lorentz_fwhm);
        line.area = height / peak;
        line
    }

    /// Lorentzian of width λ/Q_total at the mode wavelength.
    pub fn from_mode(mode: &ResonantMode, height: f64, response: &InstrumentResponse) -> Self {
        let center = mode.lambda * 1e3;
        Self::with_height(center, center / mode.q_total(), height, response)
    }
}

/// Vacuum wavelength (nm) of the first-order Raman line.
pub fn raman_line_nm(excitation_nm: f64, shift_per_cm: f64) -> f64 {
    1e7 / (1e7 / excitation_nm - shift_per_cm)
}

/// Phenomenological NV⁻ photoluminescence background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackgroundSpec {
    pub zpl_center: f64,
    pub zpl_fwhm: f64,
    pub zpl_height: f64,
    /// Wavelength of the phonon-sideband maximum.
    pub sideband_peak: f64,
    /// Log-normal width of the sideband.
    pub sideband_width: f64,
    pub sideband_height: f64,
    pub excitation: f64,
    /// Diamond first-order Raman shift (cm⁻¹).
    pub raman_shift: f64,
    pub raman_fwhm: f64,
    pub raman_height: f64,
}

impl Default for BackgroundSpec {
    fn default() -> Self {
        Self {
            zpl_center: 637.0,
            zpl_fwhm: 1.5,
            zpl_height: 0.6,
            sideband_peak: 680.0,
            sideband_width: 0.07,
            sideband_height: 1.0,
            excitation: 532.0,
            raman_shift: 1332.5,
            raman_fwhm: 0.3,
            raman_height: 0.8,
        }
    }
}

impl BackgroundSpec {
    pub fn raman_center(&self) -> f64 {
        raman_line_nm(self.excitation, self.raman_shift)
    }

    /// Sideband value at λ; the shape is a log-normal density whose maximum sits at `sideband_peak`.
    pub fn sideband(&self, lambda: f64) -> f64 {
        let s2 = self.sideband_width * self.sideband_width;
        let mu = self.sideband_peak * s2.exp();
        let shape = |l: f64| (-(l / mu).ln().powi(2) / (2.0 * s2)).exp() / l;
        self.sideband_height * shape(lambda) / shape(self.sideband_peak)
    }

    fn lines(&self) -> [SpectralLine; 2] {
        let gauss = |center: f64, fwhm: f64, height: f64| SpectralLine {
            center,
            lorentz_fwhm: 0.0,
            gaussian_fwhm: fwhm,
            area: height * fwhm_to_sigma(fwhm) * (2.0 * std::f64::consts::PI).sqrt(),
        };
        [gauss(self.zpl_center, self.zpl_fwhm, self.zpl_height), gauss(self.raman_center(), self.raman_fwhm, self.raman_height)]
    }
}

/// Multiplicative fringes from a weak transverse Fabry–Pérot cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeSpec {
    pub visibility: f64,
    /// Round-trip optical path (nm); the fringe period near λ is λ²/path.
    pub optical_path: f64,
    #[serde(default)]
    pub phase: f64,
}

impl FringeSpec {
    pub fn factor(&self, lambda: f64) -> f64 {
        1.0 + self.visibility * (2.0 * std::f64::consts::PI * self.optical_path / lambda + self.phase).cos()
    }
}

/// Shot noise with `gain` counts per intensity unit plus Gaussian read noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub gain: f64,
    #[serde(default)]
    pub read_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSpec {
    pub background: Option<BackgroundSpec>,
    pub fringes: Option<FringeSpec>,
    pub noise: Option<NoiseSpec>,
    /// Instrument-broadened peak height given to every mode.
    pub mode_height: f64,
    /// Constant offset added before noise.
    pub offset: f64,
}

/// Spectrum of arbitrary lines on top of the configured background.
pub fn synthesize_lines(lines: &[SpectralLine], spec: &SynthesisSpec, response: &InstrumentResponse, seed: u64) -> Result<Spectrum, SpectraError> {
    response.validate()?;
    let lambda = response.wavelengths();
    let half = 0.5 * response.pitch;
    let mut y = vec![spec.offset; lambda.len()];

    if let Some(bg) = &spec.background {
        let bg_lines = bg.lines();
        for (yi, &l) in y.iter_mut().zip(&lambda) {
            let mut b = bg.sideband(l);
            for line in &bg_lines {
                let g = line.effective_gaussian_fwhm(response);
                b += line.area * pixel_line(line.center, 0.0, g, l - half, l + half);
            }
            if let Some(f) = &spec.fringes {
                b *= f.factor(l);
            }
            *yi += b;
        }
    }

    let (lo, hi) = response.range();
    for line in lines {
        if !(line.center >= lo && line.center <= hi) {
            return Err(SpectraError::OutsideRange { center: line.center, lo, hi });
        }
        let g = line.effective_gaussian_fwhm(response);
        for (yi, &l) in y.iter_mut().zip(&lambda) {
            *yi += line.area * pixel_line(line.center, line.lorentz_fwhm, g, l - half, l + half);
        }
    }

    if let Some(noise) = &spec.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let read = Normal::new(0.0, noise.read_sigma.max(0.0)).map_err(|_| SpectraError::NonPositive("read noise"))?;
        for yi in y.iter_mut() {
            if noise.gain > 0.0 && *yi > 0.0 {
                let counts = Poisson::new(*yi * noise.gain).map(|p| p.sample(&mut rng)).unwrap_or(0.0);
                *yi = counts / noise.gain;
            }
            if noise.read_sigma > 0.0 {
                *yi += read.sample(&mut rng);
            }
            *yi = yi.max(0.0);
        }
    }

    let mut s = Spectrum::new(lambda, y)?;
    s.metadata = format!("synthetic: {} lines, seed {seed}", lines.len());
    Ok(s)
}

/// Spectrum of simulated modes, each drawn with `spec.mode_height`.
pub fn synthesize_spectrum(modes: &[ResonantMode], spec: &SynthesisSpec, response: &InstrumentResponse, seed: u64) -> Result<Spectrum, SpectraError> {
    let lines: Vec<_> = modes.iter().map(|m| SpectralLine::from_mode(m, spec.mode_height, response)).collect();
    synthesize_lines(&lines, spec, response, seed)
}
