use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::response::pixel_line;
use super::{InstrumentResponse, SpectraError, Spectrum};

/// Olivero–Longbothum approximation of the Voigt FWHM (relative error ≈ 2e−4).
pub fn voigt_fwhm(lorentz: f64, gauss: f64) -> f64 {
    0.5346 * lorentz + (0.2166 * lorentz * lorentz + gauss * gauss).sqrt()
}

/// Lorentzian FWHM that yields Voigt width `f` with Gaussian width `gauss`.
fn lorentz_for(f: f64, gauss: f64) -> f64 {
    if f <= gauss {
        return 0.0;
    }
    let (a, b) = (0.5346, 0.2166);
    let c = a * a - b;
    let disc = (a * a * f * f - c * (f * f - gauss * gauss)).max(0.0);
    ((a * f - disc.sqrt()) / c).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Uncertainty of the response Gaussian FWHM (nm).
    pub fwhm_uncertainty: f64,
    /// Two-sided normal quantile of the confidence interval.
    pub confidence_z: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { fwhm_uncertainty: 0.15 * InstrumentResponse::DEFAULT_FWHM, confidence_z: 1.96, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub center: f64,
    pub center_sd: f64,
    pub lorentz_fwhm: f64,
    pub lorentz_fwhm_sd: f64,
    /// Lorentzian-width interval including the response uncertainty.
    pub lorentz_fwhm_ci: (f64, f64),
    pub gaussian_fwhm: f64,
    pub area: f64,
    /// Linear baseline (value at the window centre, slope per nm).
    pub baseline: (f64, f64),
    /// λ/FWHM_L; infinite for a zero width.
    pub q: f64,
    /// λ divided by the upper end of the width interval.
    pub q_lower_bound: f64,
    pub resolution_limited: bool,
    pub rss: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    half_pitch: f64,
    gauss: f64,
    mid: f64,
}

impl Problem<'_> {
    fn shape(&self, c: f64, l: f64) -> Vec<f64> {
        self.x.iter().map(|&x| pixel_line(c, l, self.gauss, x - self.half_pitch, x + self.half_pitch)).collect()
    }

    /// Linear parameters (area, b0, b1) for fixed (c, L) and the residual.
    fn project(&self, c: f64, l: f64) -> (DVector<f64>, DVector<f64>) {
        let shape = self.shape(c, l);
        let n = self.x.len();
        let a = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => shape[i],
            1 => 1.0,
            _ => self.x[i] - self.mid,
        });
        let y = DVector::from_column_slice(self.y);
        let coef = a.clone().svd(true, true).solve(&y, 1e-14).unwrap_or_else(|_| DVector::zeros(3));
        let r = y - a * &coef;
        (coef, r)
    }

    fn model(&self, p: &[f64; 5]) -> Vec<f64> {
        self.shape(p[0], p[1]).iter().zip(self.x).map(|(s, &x)| p[2] * s + p[3] + p[4] * (x - self.mid)).collect()
    }
}

/// Lorentzian ⊗ pixelised Gaussian fit over the pixels of `window` (nm).
///
/// The linear parameters are eliminated at every step, leaving a projected
/// Levenberg–Marquardt search over (centre, FWHM_L) with FWHM_L ≥ 0.
pub fn fit_resonance(spectrum: &Spectrum, window: (f64, f64), response: &InstrumentResponse, options: &FitOptions) -> Result<LineFit, SpectraError> {
    response.validate()?;
    let range = spectrum.window(window.0, window.1);
    if range.len() < 8 {
        return Err(SpectraError::DegenerateWindow { lo: window.0, hi: window.1, pixels: range.len() });
    }
    let x = &spectrum.wavelength[range.clone()];
    let y = &spectrum.intensity[range];
    let g = response.gaussian_fwhm;
    let pb = Problem { x, y, half_pitch: 0.5 * response.pitch, gauss: g, mid: 0.5 * (x[0] + x[x.len() - 1]) };

    // start: maximum above the chord through the window ends, width from half maximum
    let n = x.len();
    let chord = |i: usize| y[0] + (y[n - 1] - y[0]) * (x[i] - x[0]) / (x[n - 1] - x[0]);
    let k = (0..n).max_by(|&a, &b| (y[a] - chord(a)).total_cmp(&(y[b] - chord(b)))).unwrap();
    let half = 0.5 * (y[k] - chord(k));
    let above = (0..n).filter(|&i| y[i] - chord(i) > half).count();
    let f0 = (above as f64 * response.pitch).max(g);
    let mut theta = Vector2::new(x[k], lorentz_for(f0, g).max(0.1 * g));

    let cost = |t: &Vector2<f64>| pb.project(t[0], t[1]).1.norm_squared();
    let mut c0 = cost(&theta);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        let (_, r) = pb.project(theta[0], theta[1]);
        let mut jac = DMatrix::zeros(n, 2);
        for p in 0..2 {
            let h = 1e-6 * g + 1e-7 * theta[p].abs() * (p as f64);
            let mut tp = theta;
            tp[p] += h;
            let (_, rp) = pb.project(tp[0], tp[1]);
            let mut tm = theta;
            tm[p] -= h;
            let col = if tm[p] >= 0.0 || p == 0 {
                let (_, rm) = pb.project(tm[0], tm[1]);
                (rp - rm) / (2.0 * h)
            } else {
                (rp - &r) / h
            };
            jac.set_column(p, &col);
        }
        let jtj: Matrix2<f64> = (jac.transpose() * &jac).fixed_view::<2, 2>(0, 0).into();
        let jtr: Vector2<f64> = (jac.transpose() * &r).fixed_view::<2, 1>(0, 0).into();
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj;
            a[(0, 0)] *= 1.0 + lambda;
            a[(1, 1)] *= 1.0 + lambda;
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = theta + step;
            trial[1] = trial[1].max(0.0);
            let c1 = cost(&trial);
            if c1 <= c0 {
                let small = (trial - theta).abs();
                theta = trial;
                let drop = c0 - c1;
                c0 = c1;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if (small[0] < 1e-10 * g && small[1] < 1e-10 * g) || drop <= 1e-15 * c1 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || converged {
            // no downhill step at any damping: at a (possibly constrained) minimum
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpectraError::NoConvergence(options.max_iterations));
    }

    let (coef, r) = pb.project(theta[0], theta[1]);
    let p = [theta[0], theta[1], coef[0], coef[1], coef[2]];
    let rss = r.norm_squared();
    let dof = (n as f64 - 5.0).max(1.0);
    let s2 = rss / dof;
    // linearised covariance over all five parameters
    let base = pb.model(&p);
    let mut jac = DMatrix::zeros(n, 5);
    for q in 0..5 {
        let h = match q {
            0 | 1 => 1e-6 * g,
            _ => 1e-6 * p[q].abs().max(1e-6),
        };
        let mut pp = p;
        pp[q] += h;
        let col: Vec<f64> = if q == 1 && p[1] < h {
            pb.model(&pp).iter().zip(&base).map(|(a, b)| (a - b) / h).collect()
        } else {
            let mut pm = p;
            pm[q] -= h;
            pb.model(&pp).iter().zip(&pb.model(&pm)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        };
        jac.set_column(q, &DVector::from_vec(col));
    }
    let cov = (jac.transpose() * &jac).try_inverse().map(|m| m * s2);
    let sd = |q: usize| cov.as_ref().map_or(f64::INFINITY, |c| c[(q, q)].max(0.0).sqrt());
    let (center_sd, l_sd) = (sd(0), sd(1));

    let z = options.confidence_z;
    let u = options.fwhm_uncertainty.max(0.0);
    let l = theta[1];
    let hi_stat = l + z * l_sd;
    let lo_stat = (l - z * l_sd).max(0.0);
    let l_upper = lorentz_for(voigt_fwhm(hi_stat, g), (g - u).max(0.0)).max(hi_stat);
    let l_lower = lorentz_for(voigt_fwhm(lo_stat, g), g + u).min(lo_stat);
    let center = theta[0];
    Ok(LineFit {
        center,
        center_sd,
        lorentz_fwhm: l,
        lorentz_fwhm_sd: l_sd,
        lorentz_fwhm_ci: (l_lower, l_upper),
        gaussian_fwhm: g,
        area: coef[0],
        baseline: (coef[1], coef[2]),
        q: center / l,
        q_lower_bound: center / l_upper,
        resolution_limited: l_lower < u,
        rss,
        iterations,
    })
}
