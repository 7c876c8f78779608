use alloc::format;
use alloc::vec::Vec;

use super::table::CylinderTable;
use super::tilde::cesaro_from_values;
use crate::math::CompensatedSum;
use crate::potential::Potential;
use crate::pressure::{fiber_potential, FiberSource};
use crate::symbolic::{Caps, FactorChain, FactorMap};
use crate::{Error, Result};

/// Entropy estimates for one level of the tower.
#[derive(Debug, Clone)]
pub struct LevelEntropy {
    pub level: usize,
    pub table: CylinderTable,
    /// `H_j / j` for `j = 1..=d`.
    pub block: Vec<f64>,
    /// `H_j - H_{j-1}` for `j = 1..=d`, with `H_0 = 0`.
    pub conditional: Vec<f64>,
}

impl LevelEntropy {
    fn from_table(level: usize, table: CylinderTable) -> Result<Self> {
        let h = table.block_entropies()?;
        let block = h.iter().enumerate().map(|(j, v)| v / (j + 1) as f64).collect();
        let conditional = h
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 { *v } else { v - h[j - 1] })
            .collect();
        Ok(LevelEntropy { level, table, block, conditional })
    }

    /// The sharper of the two estimates at full depth.
    pub fn estimate(&self) -> f64 {
        let d = self.block.len() - 1;
        self.conditional[d].min(self.block[d])
    }

    /// Difference between the block and conditional estimates at full depth.
    pub fn slack(&self) -> f64 {
        let d = self.block.len() - 1;
        (self.block[d] - self.conditional[d]).abs()
    }
}

/// `Phi_*(mu) + sum a_i h(mu ∘ tau_{i-1}^{-1})` estimated from a depth-`d`
/// table.
#[derive(Debug, Clone)]
pub struct ObjectiveReport {
    pub depth: usize,
    pub levels: Vec<LevelEntropy>,
    /// `(1/d) sum mu(I) ln phi(I)`.
    pub potential_average: f64,
    /// `sum mu(I) ln phi(I)` at depth `d` minus the same at depth `d - 1`.
    pub potential_increment: f64,
    /// Potential average plus the weighted sharper entropy estimates.
    pub upper: f64,
    /// Potential average plus the weighted block estimates `H_d/d`.
    pub block_upper: f64,
    /// Summed disagreement of the paired estimators, weighted like the
    /// objective.
    pub gap: f64,
}

fn potential_integral(mu: &CylinderTable, phi: &Potential) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut rank = 0;
    let masses = mu.masses();
    mu.host().for_each_word(mu.depth(), |w| {
        let m = masses[rank];
        rank += 1;
        if m > 0.0 {
            acc.add(m * phi.phi_eval(w).ln());
        }
    });
    acc.value()
}

/// Entropy and potential estimates for a measure on `X_1` and its
/// pushforwards down the chain.
///
/// For an invariant measure both `H_j/j` and `H_j - H_{j-1}` decrease to the
/// entropy, so each is an upper estimate; `(1/d) int ln phi_d` is an upper
/// estimate of `Phi_*` when `phi` is sub-multiplicative with constant 1.
pub fn entropy_and_objective(chain: &FactorChain, mu: &CylinderTable, phi: &Potential) -> Result<ObjectiveReport> {
    if mu.host() != chain.level(0) || phi.host() != chain.level(0) {
        return Err(Error::InvalidArgument("measure and potential must live on X_1".into()));
    }
    let d = mu.depth();
    if d == 0 {
        return Err(Error::Depth("objective needs depth at least 1".into()));
    }
    if (mu.total() - 1.0).abs() > 1e-10 {
        return Err(Error::Measure(format!("table mass is {}, not 1", mu.total())));
    }
    let mut levels = Vec::with_capacity(chain.k());
    let mut table = mu.clone();
    levels.push(LevelEntropy::from_table(1, table.clone())?);
    for i in 0..chain.k() - 1 {
        table = table.pushforward(chain.map(i))?;
        levels.push(LevelEntropy::from_table(i + 2, table.clone())?);
    }
    let full = potential_integral(mu, phi);
    let potential_average = full / d as f64;
    let potential_increment = if d == 1 { full } else { full - potential_integral(&mu.prefix_marginal(d - 1)?, phi) };
    let weights = chain.weights();
    let mut upper = CompensatedSum::default();
    let mut block_upper = CompensatedSum::default();
    let mut gap = CompensatedSum::default();
    upper.add(potential_average);
    block_upper.add(potential_average);
    gap.add((potential_average - potential_increment).abs());
    for (lvl, &a) in levels.iter().zip(weights) {
        upper.add(a * lvl.estimate());
        block_upper.add(a * lvl.block[d - 1]);
        gap.add(a * lvl.slack());
    }
    Ok(ObjectiveReport {
        depth: d,
        levels,
        potential_average,
        potential_increment,
        upper: upper.value(),
        block_upper: block_upper.value(),
        gap: gap.value(),
    })
}

/// Conditional equilibrium and the relativized-pressure comparison
/// `Phi_*(mu) + h_mu - h_nu` against `Psi_*(nu)`.
#[derive(Debug, Clone)]
pub struct ConditionalReport {
    pub measure: CylinderTable,
    /// Estimate of `Phi_*(mu) + h_mu - h_nu`.
    pub lhs: f64,
    /// Estimate of `Psi_*(nu)`, `psi` the fiber sum of `phi`.
    pub rhs: f64,
    /// Summed disagreement of the block and conditional estimators entering
    /// both sides.
    pub gap: f64,
}

impl ConditionalReport {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.discrepancy() <= self.gap + tol
    }
}

fn increment_pair(block: f64, conditional: f64) -> (f64, f64) {
    (conditional, (block - conditional).abs())
}

/// `eta_n(I) = nu(pi I) phi(I) / psi(pi I)` with `psi(J) = sum_{pi I = J} phi(I)`
/// (`0/0 = 0`), Cesàro-averaged to depth `d`.
pub fn conditional_equilibrium(
    map: &FactorMap,
    phi: &Potential,
    nu: &CylinderTable,
    d: usize,
    caps: &Caps,
) -> Result<ConditionalReport> {
    let n = nu.depth();
    if nu.host() != map.target() {
        return Err(Error::Measure("nu does not live on the target of the map".into()));
    }
    if d == 0 || 2 * d > n {
        return Err(Error::Depth(format!("Cesàro depth d = {d} needs 1 <= d <= n/2 with n = {n}")));
    }
    let psi = fiber_potential(map, FiberSource::Potential(phi), 1.0, 1.0, n, caps)?;
    for (r, (&m, v)) in nu.masses().iter().zip(&psi.values).enumerate() {
        if m > 0.0 && v.is_zero() {
            return Err(Error::Measure(format!(
                "nu gives mass {m} to {:?}, whose fiber carries no weight",
                nu.word(r)
            )));
        }
    }
    let source = map.source();
    caps.check_table("conditional weights", source.language_size(n))?;
    let target_index = nu.index();
    let mut eta = Vec::with_capacity(source.language_size(n) as usize);
    let mut image = alloc::vec![0; n];
    source.for_each_word(n, |w| {
        for (o, &x) in image.iter_mut().zip(w) {
            *o = map.apply_symbol(x);
        }
        let r = target_index.rank(&image).expect("image of a legal word");
        let m = nu.masses()[r];
        let v = phi.phi_eval(w);
        eta.push(if m == 0.0 || v.is_zero() { 0.0 } else { m * (v / psi.values[r]).linear() });
    });
    let measure = cesaro_from_values(source, n, &eta, d)?;

    let chain = FactorChain::new(
        alloc::vec![source.clone(), map.target().clone()],
        alloc::vec![map.symbol_map().to_vec()],
        alloc::vec![1.0, 0.0],
    )?;
    let obj = entropy_and_objective(&chain, &measure, phi)?;
    let nu_d = nu.prefix_marginal(d)?;
    let nu_ent = LevelEntropy::from_table(2, nu_d.clone())?;
    let (h_mu, s_mu) = increment_pair(obj.levels[0].block[d - 1], obj.levels[0].conditional[d - 1]);
    let (h_nu, s_nu) = increment_pair(nu_ent.block[d - 1], nu_ent.conditional[d - 1]);
    let (phi_star, s_phi) = (obj.potential_increment, (obj.potential_average - obj.potential_increment).abs());
    let lhs = phi_star + h_mu - h_nu;

    let psi_d = fiber_potential(map, FiberSource::Potential(phi), 1.0, 1.0, d, caps)?;
    let integral = |table: &CylinderTable, values: &[crate::logval::LogValue]| {
        let mut acc = CompensatedSum::default();
        for (&m, v) in table.masses().iter().zip(values) {
            if m > 0.0 {
                acc.add(m * v.ln());
            }
        }
        acc.value()
    };
    let full = integral(&nu_d, &psi_d.values);
    let (rhs, s_psi) = if d == 1 {
        (full, 0.0)
    } else {
        let psi_prev = fiber_potential(map, FiberSource::Potential(phi), 1.0, 1.0, d - 1, caps)?;
        let inc = full - integral(&nu.prefix_marginal(d - 1)?, &psi_prev.values);
        (inc, (full / d as f64 - inc).abs())
    };
    Ok(ConditionalReport {
        measure,
        lhs,
        rhs,
        gap: s_mu + s_nu + s_phi + s_psi,
    })
}
