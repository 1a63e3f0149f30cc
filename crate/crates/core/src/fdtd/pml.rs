//! Convolutional PML coefficients (κ = 1, CFS-shifted).
//!
//! Each derivative crossing the layer is replaced by `D + ψ` with the
//! recursive convolution `ψ ← b ψ + a D`.

use super::PmlSpec;

/// Update coefficients at one lattice position along an axis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PmlPoint {
    pub index: usize,
    pub b: f64,
    pub a: f64,
    /// ∫σ dr from the inner face of the layer to this point.
    pub integrated: f64,
}

/// Coefficient lists for integer and half-integer positions along one axis.
#[derive(Debug, Clone, Default)]
pub(crate) struct AxisPml {
    pub integer: Vec<PmlPoint>,
    pub half: Vec<PmlPoint>,
}

fn coefficients(spec: &PmlSpec, depth: f64, dt: f64, sigma_max: f64, thickness: f64) -> (f64, f64, f64) {
    let u = depth.clamp(0.0, 1.0);
    let sigma = sigma_max * u.powf(spec.grading_order);
    let alpha = spec.cfs_alpha * (1.0 - u);
    let b = (-(sigma + alpha) * dt).exp();
    let a = if sigma + alpha > 0.0 { sigma / (sigma + alpha) * (b - 1.0) } else { 0.0 };
    let integrated = sigma_max * thickness * u.powf(spec.grading_order + 1.0) / (spec.grading_order + 1.0);
    (b, a, integrated)
}

fn sigma_max(spec: &PmlSpec, spacing: f64) -> f64 {
    let thickness = spec.cells as f64 * spacing;
    -(spec.grading_order + 1.0) * spec.reflection.ln() / (2.0 * thickness)
}

/// Layer along an axis of `n` cells; `low`/`high` select which faces absorb.
///
/// Integer positions run 0..=n, half positions 0..n (centre at k + ½).
pub(crate) fn axis(spec: &PmlSpec, n: usize, spacing: f64, dt: f64, low: bool, high: bool) -> AxisPml {
    let mut out = AxisPml::default();
    if spec.cells == 0 {
        return out;
    }
    let p = spec.cells as f64;
    let smax = sigma_max(spec, spacing);
    let depth = |x: f64| -> f64 {
        // x in cell units from the low face
        let lo = if low { (p - x) / p } else { 0.0 };
        let hi = if high { (x - (n as f64 - p)) / p } else { 0.0 };
        lo.max(hi)
    };
    for k in 0..=n {
        let d = depth(k as f64);
        if d > 0.0 {
            let (b, a, integrated) = coefficients(spec, d, dt, smax, p * spacing);
            out.integer.push(PmlPoint { index: k, b, a, integrated });
        }
    }
    for k in 0..n {
        let d = depth(k as f64 + 0.5);
        if d > 0.0 {
            let (b, a, integrated) = coefficients(spec, d, dt, smax, p * spacing);
            out.half.push(PmlPoint { index: k, b, a, integrated });
        }
    }
    out
}
