use serde::{Deserialize, Serialize};

use super::Spectrum;

/// Background removal and detection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeakSearch {
    /// Width of the rolling-minimum baseline window (nm).
    pub baseline_window: f64,
    /// Moving-average length (pixels) used before locating maxima.
    pub smooth_pixels: usize,
    /// Detection threshold in units of the noise σ.
    pub threshold: f64,
    /// Instrument FWHM (nm); peaks no wider than 1.5× this are flagged unresolved.
    pub resolution: Option<f64>,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self { baseline_window: 1.0, smooth_pixels: 3, threshold: 5.0, resolution: Some(super::InstrumentResponse::DEFAULT_FWHM) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakCandidate {
    pub index: usize,
    /// Parabolic-interpolated centre (nm).
    pub center: f64,
    /// Height above the estimated baseline.
    pub height: f64,
    pub prominence: f64,
    /// Full width at half height (nm).
    pub width: f64,
    /// Width consistent with the instrument alone; sub-resolution structure
    /// such as a close doublet cannot be excluded.
    pub unresolved: bool,
}

fn moving_average(y: &[f64], half: usize) -> Vec<f64> {
    let n = y.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + y[i];
    }
    (0..n)
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half + 1).min(n);
            (prefix[b] - prefix[a]) / (b - a) as f64
        })
        .collect()
}

fn rolling_min(y: &[f64], half: usize) -> Vec<f64> {
    // monotone deque; O(n)
    let n = y.len();
    let mut out = vec![0.0; n];
    let mut dq: std::collections::VecDeque<usize> = Default::default();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&k| y[k] >= y[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&k| k + half < i) {
            dq.pop_front();
        }
        out[i] = y[dq[0]];
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Baseline-subtracted signal and the robust noise σ.
pub(crate) fn residual_and_noise(spectrum: &Spectrum, search: &PeakSearch) -> (Vec<f64>, f64) {
    let y = &spectrum.intensity;
    let pitch = spectrum.pitch();
    let half = ((0.5 * search.baseline_window / pitch).round() as usize).max(1);
    let smooth = moving_average(y, search.smooth_pixels / 2);
    let base = moving_average(&rolling_min(&smooth, half), half);
    let mut r: Vec<f64> = y.iter().zip(&base).map(|(a, b)| a - b).collect();
    let offset = median(r.clone());
    r.iter_mut().for_each(|v| *v -= offset);
    // MAD of first differences is insensitive to narrow peaks and slow baselines
    let diffs: Vec<f64> = r.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let sigma = 1.4826 * median(diffs) / std::f64::consts::SQRT_2;
    (r, sigma)
}

/// Local maxima standing out of the background by `threshold`·σ.
pub fn detect_peaks(spectrum: &Spectrum, search: &PeakSearch) -> Vec<PeakCandidate> {
    let n = spectrum.len();
    if n < 16 {
        return Vec::new();
    }
    let (r, sigma) = residual_and_noise(spectrum, search);
    let s = moving_average(&r, search.smooth_pixels / 2);
    let floor = search.threshold * sigma.max(f64::MIN_POSITIVE);
    let pitch = spectrum.pitch();
    let mut out = Vec::new();
    for i in 1..n - 1 {
        if !(s[i] > s[i - 1] && s[i] >= s[i + 1]) {
            continue;
        }
        // refine on the raw residual
        let k = (i.saturating_sub(1)..=(i + 1).min(n - 1)).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
        if r[k] < floor {
            continue;
        }
        let mut left_min = s[i];
        let mut j = i;
        while j > 0 && s[j - 1] <= s[i] {
            j -= 1;
            left_min = left_min.min(s[j]);
        }
        let mut right_min = s[i];
        let mut j = i;
        while j + 1 < n && s[j + 1] <= s[i] {
            j += 1;
            right_min = right_min.min(s[j]);
        }
        let prominence = s[i] - left_min.max(right_min);
        if prominence < floor {
            continue;
        }
        let center = if k > 0 && k + 1 < n {
            let (a, b, c) = (r[k - 1], r[k], r[k + 1]);
            let den = a - 2.0 * b + c;
            let shift = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
            spectrum.wavelength[k] + shift * pitch
        } else {
            spectrum.wavelength[k]
        };
        // half height on the unsmoothed residual; smoothing would widen narrow lines
        let level = 0.5 * r[k];
        let crossing = |step: isize| {
            let mut j = k as isize;
            while j + step >= 0 && ((j + step) as usize) < n && r[(j + step) as usize] > level {
                j += step;
            }
            let (a, b) = (j as usize, (j + step).clamp(0, n as isize - 1) as usize);
            if a == b || r[a] == r[b] {
                return spectrum.wavelength[a];
            }
            let t = (r[a] - level) / (r[a] - r[b]);
            spectrum.wavelength[a] + t * (spectrum.wavelength[b] - spectrum.wavelength[a])
        };
        let width = crossing(1) - crossing(-1);
        let unresolved = search.resolution.is_some_and(|g| width <= 1.5 * g.hypot(pitch));
        out.push(PeakCandidate { index: k, center, height: r[k], prominence, width, unresolved });
    }
    out.dedup_by_key(|p| p.index);
    out
}
