//! Synthesis, detection and fitting of photoluminescence spectra.

use wgmsim::spectra::{
    apply_instrument_response, detect_peaks, fit_resonance, pixel_line, synthesize_lines, voigt, voigt_fwhm, BackgroundSpec, FitOptions,
    InstrumentResponse, NoiseSpec, PeakSearch, SpectralLine, SynthesisSpec,
};

fn noise(sigma: f64) -> Option<NoiseSpec> {
    Some(NoiseSpec { gain: 0.0, read_sigma: sigma })
}

/// Half-maximum width of a sampled curve by linear interpolation.
fn sampled_fwhm(x: &[f64], y: &[f64]) -> f64 {
    let k = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
    let half = 0.5 * y[k];
    let cross = |range: Box<dyn Iterator<Item = usize>>| {
        let mut prev = k;
        for i in range {
            if y[i] < half {
                let t = (y[prev] - half) / (y[prev] - y[i]);
                return x[prev] + t * (x[i] - x[prev]);
            }
            prev = i;
        }
        f64::NAN
    };
    cross(Box::new(k + 1..y.len())) - cross(Box::new((0..k).rev()))
}

#[test]
fn voigt_width_matches_direct_convolution() {
    // Lorentzian ⊗ Gaussian by brute-force quadrature, independent of the Faddeeva route
    let w: f64 = 1.0;
    let gamma = 0.5 * w;
    let sigma = w / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let h = 0.002;
    let xs: Vec<f64> = (-1500..=1500).map(|i| i as f64 * h).collect();
    let conv: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let n = 20_000;
            let span = 12.0 * sigma;
            let dt = 2.0 * span / n as f64;
            (0..n)
                .map(|i| {
                    let t = -span + (i as f64 + 0.5) * dt;
                    let g = (-t * t / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                    let l = gamma / (std::f64::consts::PI * ((x - t).powi(2) + gamma * gamma));
                    g * l * dt
                })
                .sum()
        })
        .collect();
    let numeric = sampled_fwhm(&xs, &conv);
    let faddeeva: Vec<f64> = xs.iter().map(|&x| voigt(x, sigma, gamma)).collect();
    let via_w = sampled_fwhm(&xs, &faddeeva);
    assert!((numeric / w - 1.6376).abs() < 2e-3, "{numeric}");
    assert!((via_w / numeric - 1.0).abs() < 1e-4, "{via_w} vs {numeric}");
    assert!((voigt_fwhm(w, w) / numeric - 1.0).abs() < 1e-3);
}

#[test]
fn ideal_instrument_recovers_lorentzian() {
    let (c, fl) = (637.0, 0.05);
    for x in [636.9, 636.98, 637.0, 637.01, 637.2] {
        let half = 5e-6;
        let v = pixel_line(c, fl, 1e-6, x - half, x + half);
        let g = 0.5 * fl;
        let lorentz = g / (std::f64::consts::PI * ((x - c).powi(2) + g * g));
        assert!((v / lorentz - 1.0).abs() < 1e-3, "{x}: {v} vs {lorentz}");
    }
}

#[test]
fn pixel_integration_conserves_area() {
    let response = InstrumentResponse::covering(587.0, 687.0);
    let line = SpectralLine { center: 637.0, lorentz_fwhm: 0.0637, gaussian_fwhm: 0.0, area: 3.0 };
    let y = apply_instrument_response(&line, &response).unwrap();
    let sum: f64 = y.iter().sum::<f64>() * response.pitch;
    let (lo, hi) = response.range();
    // analytic Lorentzian mass inside the pixel range; the Gaussian core is far from the edges
    let g = 0.5 * line.lorentz_fwhm;
    let inside = (((hi - 637.0) / g).atan() - ((lo - 637.0) / g).atan()) / std::f64::consts::PI;
    assert!((sum / (3.0 * inside) - 1.0).abs() < 1e-3, "{sum}");

    let gaussian = SpectralLine { lorentz_fwhm: 0.0, ..line };
    let y = apply_instrument_response(&gaussian, &response).unwrap();
    let sum: f64 = y.iter().sum::<f64>() * response.pitch;
    assert!((sum / 3.0 - 1.0).abs() < 1e-10);
}

fn injected_lines(response: &InstrumentResponse) -> Vec<SpectralLine> {
    let centers = [631.3, 633.9, 636.2, 638.8, 641.0, 643.7, 646.1, 648.4];
    centers.iter().enumerate().map(|(i, &c)| SpectralLine::with_height(c, c / (8000.0 + 1500.0 * i as f64), 1.0, response)).collect()
}

#[test]
fn eight_injected_modes_detected() {
    let response = InstrumentResponse::covering(630.0, 650.0);
    let lines = injected_lines(&response);
    for seed in 0..10 {
        let spec = SynthesisSpec { background: Some(BackgroundSpec::default()), noise: noise(0.05), ..Default::default() };
        let s = synthesize_lines(&lines, &spec, &response, seed).unwrap();
        let peaks = detect_peaks(&s, &PeakSearch::default());
        let hits = lines.iter().filter(|l| peaks.iter().any(|p| (p.center - l.center).abs() < 0.03)).count();
        let false_pos = peaks.iter().filter(|p| lines.iter().all(|l| (p.center - l.center).abs() >= 0.03)).count();
        assert!(hits >= 8, "seed {seed}: {hits} hits");
        assert!(false_pos <= 1, "seed {seed}: {false_pos} false positives {peaks:?}");
    }
}

#[test]
fn flat_spectrum_rarely_triggers() {
    let response = InstrumentResponse::covering(630.0, 650.0);
    let spec = SynthesisSpec { offset: 1.0, noise: noise(0.05), ..Default::default() };
    let triggered = (0..100)
        .filter(|&seed| {
            let s = synthesize_lines(&[], &spec, &response, seed).unwrap();
            !detect_peaks(&s, &PeakSearch::default()).is_empty()
        })
        .count();
    assert!(triggered < 5, "{triggered} of 100");
}

#[test]
fn fitted_width_is_unbiased() {
    let response = InstrumentResponse::covering(636.0, 638.0);
    let line = SpectralLine::with_height(637.0, 0.0637, 1.0, &response);
    let spec = SynthesisSpec { offset: 0.1, noise: noise(0.05), ..Default::default() };
    let mut widths = Vec::new();
    let mut sds = Vec::new();
    for seed in 0..100 {
        let s = synthesize_lines(&[line], &spec, &response, 1000 + seed).unwrap();
        let fit = fit_resonance(&s, (636.6, 637.4), &response, &FitOptions::default()).unwrap();
        widths.push(fit.lorentz_fwhm);
        sds.push(fit.lorentz_fwhm_sd);
    }
    let mean = widths.iter().sum::<f64>() / widths.len() as f64;
    let mean_sd = sds.iter().sum::<f64>() / sds.len() as f64;
    let ci = FitOptions::default().confidence_z * mean_sd;
    assert!((mean - 0.0637).abs() < ci, "mean {mean}, ci {ci}");
    // the reported σ agrees with the scatter to within 30 %
    let scatter = (widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    assert!((scatter / mean_sd - 1.0).abs() < 0.3, "scatter {scatter} vs sd {mean_sd}");
}

#[test]
fn synthesis_detection_fit_round_trip() {
    let response = InstrumentResponse::covering(630.0, 650.0);
    let lines = injected_lines(&response);
    let spec = SynthesisSpec { background: Some(BackgroundSpec::default()), noise: noise(0.02), ..Default::default() };
    let s = synthesize_lines(&lines, &spec, &response, 5).unwrap();
    let peaks = detect_peaks(&s, &PeakSearch::default());
    for line in &lines {
        let p = peaks.iter().min_by(|a, b| (a.center - line.center).abs().total_cmp(&(b.center - line.center).abs())).unwrap();
        let fit = fit_resonance(&s, (p.center - 0.4, p.center + 0.4), &response, &FitOptions::default()).unwrap();
        let q_true = line.center / line.lorentz_fwhm;
        assert!((fit.center - line.center).abs() < 2e-3, "{} vs {}", fit.center, line.center);
        assert!((fit.q / q_true - 1.0).abs() < 0.1, "Q {} vs {q_true}", fit.q);
        assert!(!fit.resolution_limited);
    }
}
