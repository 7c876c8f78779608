use alloc::format;
use alloc::vec::Vec;

use super::table::CylinderTable;
use crate::math::CompensatedSum;
use crate::potential::Potential;
use crate::symbolic::{SpecMode, Symbol};
use crate::{Error, Result};

/// Extremes of `mu(I) / reference(I)` over the words with positive mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsRatios {
    pub depth: usize,
    pub min: f64,
    pub max: f64,
}

impl GibbsRatios {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

/// `min` and `max` of `mu(I) / reference(I)`, skipping zero-mass words.
/// A word with positive mass and zero reference makes the ratio unbounded.
pub fn gibbs_ratios(mu: &CylinderTable, reference: &[f64]) -> Result<GibbsRatios> {
    if reference.len() != mu.masses().len() {
        return Err(Error::Depth(format!(
            "reference has {} entries, table has {}",
            reference.len(),
            mu.masses().len()
        )));
    }
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for (&m, &r) in mu.masses().iter().zip(reference) {
        if m <= 0.0 {
            continue;
        }
        let q = if r > 0.0 { m / r } else { f64::INFINITY };
        min = min.min(q);
        max = max.max(q);
    }
    if max == 0.0 {
        return Err(Error::EmptySupport);
    }
    Ok(GibbsRatios { depth: mu.depth(), min, max })
}

/// `phi(I) / sum_J phi(J)` over `L_d`, the reference of the Gibbs bound for
/// a single shift.
pub fn gibbs_reference(phi: &Potential, d: usize) -> Vec<f64> {
    let mut vals = Vec::new();
    phi.host().for_each_word(d, |w| vals.push(phi.phi_eval(w)));
    let mut acc = crate::logval::LogSum::default();
    vals.iter().for_each(|v| acc.add(*v));
    let total = acc.value();
    vals.into_iter().map(|v| (v / total).linear()).collect()
}

/// Ratios across several depths.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsReport {
    pub per_depth: Vec<GibbsRatios>,
    /// Largest spread `max/min` seen.
    pub worst_spread: f64,
    /// Spreads strictly increase at every step.
    pub drifting: bool,
    /// `worst_spread <= limit` and no drift.
    pub passes: bool,
}

/// Collects per-depth ratios; the Gibbs property is accepted when the
/// spread stays under `limit` and does not grow at every step.
pub fn gibbs_diagnostic(per_depth: Vec<GibbsRatios>, limit: f64) -> Result<GibbsReport> {
    if per_depth.is_empty() {
        return Err(Error::EmptySupport);
    }
    let spreads: Vec<f64> = per_depth.iter().map(|g| g.spread()).collect();
    let worst_spread = spreads.iter().copied().fold(0.0, f64::max);
    let drifting = spreads.len() > 2 && spreads.windows(2).all(|w| w[1] > w[0] + 1e-9);
    Ok(GibbsReport {
        per_depth,
        worst_spread,
        drifting,
        passes: worst_spread <= limit && !drifting,
    })
}

/// Mixing ratios for one pair of words over a range of gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    /// `(gap, sum_{i<=p} mu(A ∩ σ^{-gap-i} B) / (mu(A) mu(B)))`
    pub ratios: Vec<(usize, f64)>,
    pub min_ratio: f64,
    /// Ratios strictly decrease at every step.
    pub decaying: bool,
}

/// `sum_{i=0}^{p} mu(A ∩ σ^{-(g+i)} B) / (mu(A) mu(B))` for each gap `g`,
/// read from a cylinder table deep enough to hold `A`, the gap, `p` and
/// `B`. In exact mode only the `i = 0` term is used.
pub fn mixing_diagnostic(
    mu: &CylinderTable,
    a: &[Symbol],
    b: &[Symbol],
    p: usize,
    gaps: core::ops::RangeInclusive<usize>,
    mode: SpecMode,
) -> Result<MixingReport> {
    let depth = mu.depth();
    let max_gap = *gaps.end();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("mixing words must be nonempty".into()));
    }
    if a.len() + max_gap + p + b.len() > depth {
        return Err(Error::Depth(format!(
            "|A| + max gap + p + |B| = {} exceeds the table depth {depth}",
            a.len() + max_gap + p + b.len()
        )));
    }
    if *gaps.start() < a.len() {
        return Err(Error::InvalidArgument(format!("gaps must be at least |A| = {}", a.len())));
    }
    let terms = if mode == SpecMode::Exact { 0 } else { p };
    let masses = mu.masses();
    let mut ma = CompensatedSum::default();
    let mut mb = CompensatedSum::default();
    let mut joint: Vec<CompensatedSum> = Vec::new();
    let offsets: Vec<usize> = (*gaps.start()..=max_gap + terms).collect();
    joint.resize(offsets.len(), CompensatedSum::default());
    let mut rank = 0;
    mu.host().for_each_word(depth, |w| {
        let m = masses[rank];
        rank += 1;
        let has_a = &w[..a.len()] == a;
        if has_a {
            ma.add(m);
        }
        if &w[..b.len()] == b {
            mb.add(m);
        }
        if has_a {
            for (slot, &s) in joint.iter_mut().zip(&offsets) {
                if &w[s..s + b.len()] == b {
                    slot.add(m);
                }
            }
        }
    });
    let denom = ma.value() * mb.value();
    if denom <= 0.0 {
        return Err(Error::EmptySupport);
    }
    let start = *gaps.start();
    let ratios: Vec<(usize, f64)> = gaps
        .map(|g| {
            let s: f64 = (0..=terms).map(|i| joint[g + i - start].value()).sum();
            (g, s / denom)
        })
        .collect();
    let min_ratio = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let decaying = ratios.len() > 1 && ratios.windows(2).all(|w| w[1].1 < w[0].1 - 1e-9);
    Ok(MixingReport { ratios, min_ratio, decaying })
}
