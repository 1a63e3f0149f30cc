use serde::{Deserialize, Serialize};

use crate::analysis::FsrPoint;

/// Simulated FSR(λ) curve of one mode family (nm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDispersion {
    pub name: String,
    pub radial_order: usize,
    /// (λ_mid, FSR) pairs.
    pub points: Vec<(f64, f64)>,
}

impl FamilyDispersion {
    /// Groups an FSR table (λ in μm) by family.
    pub fn from_table(table: &[FsrPoint]) -> Vec<Self> {
        let mut out: Vec<Self> = Vec::new();
        for p in table {
            let radial_order = p.family.trim_start_matches(|c: char| c.is_ascii_alphabetic()).parse().unwrap_or(0);
            let entry = match out.iter_mut().position(|f| f.name == p.family) {
                Some(i) => &mut out[i],
                None => {
                    out.push(Self { name: p.family.clone(), radial_order, points: Vec::new() });
                    out.last_mut().unwrap()
                }
            };
            entry.points.push((p.lambda_mid * 1e3, p.fsr_nm));
        }
        for f in &mut out {
            f.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        out
    }

    /// Piecewise-linear FSR, extrapolated linearly beyond the table.
    pub fn fsr_at(&self, lambda: f64) -> f64 {
        let p = &self.points;
        match p.len() {
            0 => f64::NAN,
            1 => p[0].1,
            n => {
                let i = p.partition_point(|q| q.0 < lambda).clamp(1, n - 1);
                let (a, b) = (p[i - 1], p[i]);
                a.1 + (b.1 - a.1) * (lambda - a.0) / (b.0 - a.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyOptions {
    /// Largest accepted deviation between a predicted and an observed peak (nm).
    pub tolerance: f64,
    pub min_chain: usize,
    /// Consecutive missing members bridged while growing a chain.
    pub max_skip: usize,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self { tolerance: 0.15, min_chain: 3, max_skip: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyAssignment {
    pub lambda: f64,
    /// `None` for peaks left unassigned.
    pub family: Option<String>,
    pub chain: Option<usize>,
}

struct Chain {
    members: Vec<usize>,
    /// Number of FSR steps between consecutive members.
    steps: Vec<usize>,
}

fn rms_mismatch(chain: &Chain, peaks: &[f64], family: &FamilyDispersion) -> f64 {
    let mut s = 0.0;
    for (w, &k) in chain.members.windows(2).zip(&chain.steps) {
        let (a, b) = (peaks[w[0]], peaks[w[1]]);
        let spacing = (b - a) / k as f64;
        let d = spacing - family.fsr_at(0.5 * (a + b));
        s += d * d;
    }
    (s / chain.steps.len() as f64).sqrt()
}

fn grow(seed: usize, peaks: &[f64], free: &[bool], family: &FamilyDispersion, opts: &FamilyOptions) -> Chain {
    let mut chain = Chain { members: vec![seed], steps: Vec::new() };
    let mut current = peaks[seed];
    'outer: loop {
        let mut target = current;
        for k in 1..=opts.max_skip + 1 {
            let fsr = family.fsr_at(target + 0.5 * family.fsr_at(target));
            if !(fsr > 0.0) {
                break 'outer;
            }
            target += fsr;
            let hit = (0..peaks.len())
                .filter(|&j| free[j] && peaks[j] > current && (peaks[j] - target).abs() <= opts.tolerance)
                .min_by(|&a, &b| (peaks[a] - target).abs().total_cmp(&(peaks[b] - target).abs()));
            if let Some(j) = hit {
                chain.members.push(j);
                chain.steps.push(k);
                current = peaks[j];
                continue 'outer;
            }
        }
        break;
    }
    chain
}

/// Chains peaks (nm) into quasi-arithmetic progressions and labels each chain
/// with the family whose simulated FSR curve matches its spacings best.
///
/// Chains are extracted greedily: longest first, then smallest mismatch, then
/// lowest radial order. Peaks outside every accepted chain stay unlabelled.
pub fn assign_families(peaks: &[f64], families: &[FamilyDispersion], opts: &FamilyOptions) -> Vec<FamilyAssignment> {
    let mut out: Vec<FamilyAssignment> = peaks.iter().map(|&lambda| FamilyAssignment { lambda, family: None, chain: None }).collect();
    if peaks.len() < 3 || families.is_empty() {
        return out;
    }
    let mut free = vec![true; peaks.len()];
    let mut chain_id = 0;
    loop {
        let mut best: Option<(Chain, usize, f64)> = None;
        for seed in (0..peaks.len()).filter(|&i| free[i]) {
            for grow_with in families {
                let chain = grow(seed, peaks, &free, grow_with, opts);
                if chain.members.len() < opts.min_chain.max(2) {
                    continue;
                }
                let (label, rms) = families
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (i, rms_mismatch(&chain, peaks, f)))
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(families[a.0].radial_order.cmp(&families[b.0].radial_order)))
                    .unwrap();
                let better = match &best {
                    None => true,
                    Some((c, l, r)) => {
                        let len = (chain.members.len(), c.members.len());
                        len.0 > len.1
                            || (len.0 == len.1 && rms < *r)
                            || (len.0 == len.1 && rms == *r && families[label].radial_order < families[*l].radial_order)
                    }
                };
                if better {
                    best = Some((chain, label, rms));
                }
            }
        }
        let Some((chain, label, _)) = best else { break };
        for &j in &chain.members {
            free[j] = false;
            out[j].family = Some(families[label].name.clone());
            out[j].chain = Some(chain_id);
        }
        chain_id += 1;
    }
    out
}
