//! Multilayer slab waveguide, transfer-matrix formulation.
//!
//! The transverse field ψ (E_y for TE, H_y for TM) is propagated as the pair
//! (ψ, ψ'/p) with p = 1 for TE and p = n² for TM, both continuous across
//! interfaces. Guided modes decay in the two semi-infinite claddings.

use super::OracleError;
use crate::analysis::Polarization;
use crate::device::MaterialModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SlabLayer {
    pub material: MaterialModel,
    /// `None` for the two semi-infinite outer layers.
    pub thickness: Option<f64>,
}

/// Layers listed from bottom to top.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabStack {
    pub layers: Vec<SlabLayer>,
    pub polarization: Polarization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabMode {
    pub n_eff: f64,
    pub n_g_eff: f64,
    pub order: usize,
}

const SCAN_POINTS: usize = 4000;

impl SlabStack {
    pub fn new(layers: Vec<SlabLayer>, polarization: Polarization) -> Result<Self, OracleError> {
        let s = Self { layers, polarization };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), OracleError> {
        let n = self.layers.len();
        if n < 3 {
            return Err(OracleError::InvalidStack);
        }
        let ends_ok = self.layers[0].thickness.is_none() && self.layers[n - 1].thickness.is_none();
        let inner_ok = self.layers[1..n - 1].iter().all(|l| matches!(l.thickness, Some(t) if t > 0.0));
        if ends_ok && inner_ok {
            Ok(())
        } else {
            Err(OracleError::InvalidStack)
        }
    }

    fn indices(&self, lambda: f64) -> Result<Vec<(f64, f64)>, OracleError> {
        self.layers.iter().map(|l| Ok((l.material.index(lambda)?, l.thickness.unwrap_or(0.0)))).collect()
    }
}

fn weight(pol: Polarization, n: f64) -> f64 {
    match pol {
        Polarization::TE => 1.0,
        Polarization::TM => n * n,
    }
}

/// Mismatch of the top boundary condition after propagating the decaying
/// bottom solution through the stack, normalised by the field magnitude.
fn residual(layers: &[(f64, f64)], pol: Polarization, k0: f64, n_eff: f64) -> f64 {
    let (nb, _) = layers[0];
    let (nt, _) = layers[layers.len() - 1];
    let gb = k0 * (n_eff * n_eff - nb * nb).sqrt();
    let gt = k0 * (n_eff * n_eff - nt * nt).sqrt();
    let mut psi = 1.0;
    let mut v = gb / weight(pol, nb);
    for &(n, d) in &layers[1..layers.len() - 1] {
        let p = weight(pol, n);
        let k2 = k0 * k0 * (n * n - n_eff * n_eff);
        let (a, b) = if k2 > 0.0 {
            let k = k2.sqrt();
            let (s, c) = (k * d).sin_cos();
            (psi * c + v * p * s / k, -psi * k * s / p + v * c)
        } else {
            let k = (-k2).sqrt();
            let (s, c) = ((k * d).sinh(), (k * d).cosh());
            (psi * c + v * p * s / k, psi * k * s / p + v * c)
        };
        let scale = a.abs() + b.abs();
        psi = a / scale;
        v = b / scale;
    }
    (v + gt / weight(pol, nt) * psi) / (psi.abs() + v.abs())
}

/// Residual of the dispersion relation at a trial effective index.
pub fn slab_dispersion_residual(stack: &SlabStack, lambda: f64, n_eff: f64) -> Result<f64, OracleError> {
    let layers = stack.indices(lambda)?;
    Ok(residual(&layers, stack.polarization, 2.0 * std::f64::consts::PI / lambda, n_eff))
}

fn roots(layers: &[(f64, f64)], pol: Polarization, lambda: f64) -> Vec<f64> {
    let k0 = 2.0 * std::f64::consts::PI / lambda;
    let lo = layers[0].0.max(layers[layers.len() - 1].0);
    let hi = layers.iter().map(|l| l.0).fold(f64::MIN, f64::max);
    if hi <= lo {
        return Vec::new();
    }
    let eps = 1e-12 * hi;
    let f = |x: f64| residual(layers, pol, k0, x);
    let xs: Vec<f64> = (0..=SCAN_POINTS).map(|i| lo + eps + (hi - lo - 2.0 * eps) * i as f64 / SCAN_POINTS as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for k in 0..SCAN_POINTS {
        if fs[k] == 0.0 {
            out.push(xs[k]);
            continue;
        }
        if fs[k] * fs[k + 1] < 0.0 {
            let (mut a, mut b, mut fa) = (xs[k], xs[k + 1], fs[k]);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = f(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Relative wavelength step for the group-index difference.
const NG_STEP: f64 = 1e-4;

/// All guided modes, highest effective index (order 0) first.
pub fn slab_neff(stack: &SlabStack, lambda: f64) -> Result<Vec<SlabMode>, OracleError> {
    if !(lambda > 0.0) {
        return Err(OracleError::NonPositive("wavelength"));
    }
    stack.validate()?;
    let pol = stack.polarization;
    let main = roots(&stack.indices(lambda)?, pol, lambda);
    let h = NG_STEP * lambda;
    // Materials may only be tabulated on one side; fall back to a one-sided difference.
    let plus = stack.indices(lambda + h).ok().map(|l| roots(&l, pol, lambda + h));
    let minus = stack.indices(lambda - h).ok().map(|l| roots(&l, pol, lambda - h));
    let mut modes = Vec::with_capacity(main.len());
    for (order, &n) in main.iter().enumerate() {
        let p = plus.as_ref().and_then(|r| r.get(order).copied());
        let m = minus.as_ref().and_then(|r| r.get(order).copied());
        let dn = match (p, m) {
            (Some(p), Some(m)) => (p - m) / (2.0 * h),
            (Some(p), None) => (p - n) / h,
            (None, Some(m)) => (n - m) / h,
            (None, None) => 0.0,
        };
        modes.push(SlabMode { n_eff: n, n_g_eff: n - lambda * dn, order });
    }
    Ok(modes)
}
