//! Independent reference values: Markov measures with exact entropy,
//! closed-form weighted pressure on product full shifts, and a direct
//! sweep of the variational objective.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::equilibrium::{entropy_and_objective, CylinderTable};
use crate::math::{ln, powf, CompensatedSum};
use crate::potential::Potential;
use crate::pressure::PressureBracket;
use crate::symbolic::{Caps, FactorChain, Sft, Symbol, WordIndex};
use crate::{Error, Result};

const ROW_TOL: f64 = 1e-9;

/// A stationary Markov measure of order `m` on an SFT.
#[derive(Debug, Clone)]
pub struct MarkovMeasure {
    host: Sft,
    order: usize,
    states: WordIndex,
    /// `kernel[s][x]`: probability of symbol `x` after the state word `s`.
    kernel: Vec<Vec<f64>>,
    law: Vec<f64>,
}

impl MarkovMeasure {
    /// Validates the kernel and solves for its stationary law, which must be
    /// unique.
    pub fn new(host: Sft, order: usize, kernel: Vec<Vec<f64>>) -> Result<Self> {
        let states = check_kernel(&host, order, &kernel)?;
        let law = stationary_law(&host, order, &states, &kernel)?;
        Ok(MarkovMeasure { host, order, states, kernel, law })
    }

    /// Uses a given initial law, which must be stationary for the kernel.
    pub fn with_law(host: Sft, order: usize, kernel: Vec<Vec<f64>>, law: Vec<f64>) -> Result<Self> {
        let states = check_kernel(&host, order, &kernel)?;
        if law.len() != states.len() || law.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Measure("initial law has the wrong shape or negative entries".into()));
        }
        let m = MarkovMeasure { host, order, states, kernel, law };
        let pushed = m.step_law(&m.law);
        let err = pushed.iter().zip(&m.law).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > ROW_TOL {
            return Err(Error::Measure(format!("initial law is not stationary (error {err:.3e})")));
        }
        Ok(m)
    }

    /// i.i.d. symbols with the given probabilities on a full shift.
    pub fn bernoulli(host: Sft, probs: Vec<f64>) -> Result<Self> {
        Self::new(host, 0, vec![probs])
    }

    /// The measure of maximal entropy of an irreducible SFT, from the Perron
    /// eigenvectors of the transition matrix.
    pub fn parry(host: Sft) -> Result<Self> {
        let k = host.size();
        let mut v = vec![1.0; k];
        let mut lambda = 1.0;
        // power iteration on A + I, which shares eigenvectors with A and is
        // aperiodic whenever A is irreducible
        for _ in 0..10_000 {
            let mut next = v.clone();
            for a in 0..k {
                for &b in host.successors(a as Symbol) {
                    next[a] += v[b as usize];
                }
            }
            let norm = next.iter().copied().fold(0.0, f64::max);
            next.iter_mut().for_each(|x| *x /= norm);
            let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            lambda = norm - 1.0;
            if diff < 1e-15 {
                break;
            }
        }
        let kernel = (0..k)
            .map(|a| {
                let mut row = vec![0.0; k];
                for &b in host.successors(a as Symbol) {
                    row[b as usize] = v[b as usize] / (lambda * v[a]);
                }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
                row
            })
            .collect();
        Self::new(host, 1, kernel)
    }

    /// Random kernel with positive weights on every legal transition.
    pub fn random<R: RngCore>(host: Sft, order: usize, rng: &mut R) -> Result<Self> {
        let states = host.word_index(order, &Caps::default())?;
        let k = host.size();
        let kernel = (0..states.len())
            .map(|s| {
                let last = if order == 0 { None } else { states.unrank(s).last().copied() };
                let mut row = vec![0.0; k];
                for (x, slot) in row.iter_mut().enumerate() {
                    if last.is_none_or(|l| host.allows(l, x as Symbol)) {
                        let u = unit(rng);
                        *slot = 0.02 + u * u;
                    }
                }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
                row
            })
            .collect();
        Self::new(host, order, kernel)
    }

    pub fn host(&self) -> &Sft {
        &self.host
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    /// Stationary law on `L_order`.
    pub fn law(&self) -> &[f64] {
        &self.law
    }

    /// `-sum_s law(s) sum_x P(s, x) ln P(s, x)`.
    pub fn entropy(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for (p, row) in self.law.iter().zip(&self.kernel) {
            for &q in row {
                if q > 0.0 && *p > 0.0 {
                    acc.add(-p * q * ln(q));
                }
            }
        }
        acc.value()
    }

    /// Cylinder masses at depth `d`.
    pub fn cylinder_table(&self, d: usize) -> Result<CylinderTable> {
        if d == 0 {
            return Err(Error::Depth("cylinder depth must be at least 1".into()));
        }
        let m = self.order;
        let depth = d.max(m);
        let mut masses = Vec::with_capacity(self.host.language_size(depth) as usize);
        self.host.for_each_word(depth, |w| {
            let s0 = self.states.rank(&w[..m]).expect("legal state");
            let mut p = self.law[s0];
            for t in m..depth {
                let s = self.states.rank(&w[t - m..t]).expect("legal state");
                p *= self.kernel[s][w[t] as usize];
            }
            masses.push(p);
        });
        let table = CylinderTable::new(self.host.clone(), depth, masses)?;
        if depth == d {
            Ok(table)
        } else {
            table.prefix_marginal(d)
        }
    }

    fn step_law(&self, law: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; law.len()];
        for (s, &p) in law.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (x, &q) in self.kernel[s].iter().enumerate() {
                if q > 0.0 {
                    out[next_state(&self.states, self.order, s, x as Symbol)] += p * q;
                }
            }
        }
        out
    }
}

fn unit<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn next_state(states: &WordIndex, order: usize, s: usize, x: Symbol) -> usize {
    if order == 0 {
        return 0;
    }
    let mut w = states.unrank(s);
    w.remove(0);
    w.push(x);
    states.rank(&w).expect("legal successor state")
}

fn check_kernel(host: &Sft, order: usize, kernel: &[Vec<f64>]) -> Result<WordIndex> {
    let states = host.word_index(order, &Caps::default())?;
    if kernel.len() != states.len() {
        return Err(Error::Measure(format!("kernel has {} rows for {} states", kernel.len(), states.len())));
    }
    for (s, row) in kernel.iter().enumerate() {
        if row.len() != host.size() {
            return Err(Error::Measure(format!("kernel row {s} has {} entries", row.len())));
        }
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Measure(format!("kernel row {s} has a negative or non-finite entry")));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > ROW_TOL {
            return Err(Error::Measure(format!("kernel row {s} sums to {total}")));
        }
        if order > 0 {
            let last = *states.unrank(s).last().expect("order >= 1");
            if let Some(x) = (0..host.size()).find(|&x| row[x] > 0.0 && !host.allows(last, x as Symbol)) {
                return Err(Error::Measure(format!("kernel row {s} charges the forbidden transition {last}->{x}")));
            }
        }
    }
    Ok(states)
}

/// Solves `law P = law`, `sum law = 1` by Gaussian elimination with partial
/// pivoting.
fn stationary_law(host: &Sft, order: usize, states: &WordIndex, kernel: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = states.len();
    if order == 0 {
        return Ok(vec![1.0]);
    }
    // rows: equations; (P^T - I) law = 0 with the last equation replaced by
    // the normalization
    let mut a = vec![vec![0.0; n + 1]; n];
    for s in 0..n {
        for x in 0..host.size() {
            let q = kernel[s][x];
            if q > 0.0 {
                let t = next_state(states, order, s, x as Symbol);
                a[t][s] += q;
            }
        }
        a[s][s] -= 1.0;
    }
    a[n - 1].fill(1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::Measure("kernel has no unique stationary law".into()));
        }
        a.swap(col, piv);
        let p = a[col][col];
        for j in col..=n {
            a[col][j] /= p;
        }
        for i in 0..n {
            if i != col && a[i][col] != 0.0 {
                let f = a[i][col];
                for j in col..=n {
                    a[i][j] -= f * a[col][j];
                }
            }
        }
    }
    let law: Vec<f64> = a.iter().map(|row| row[n].max(0.0)).collect();
    let total: f64 = law.iter().sum();
    Ok(law.into_iter().map(|p| p / total).collect())
}

/// Exact weighted pressure and equilibrium law on a product of full shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub pressure: f64,
    /// Probability of each top-level symbol, fibers laid out in order.
    pub weights: Vec<f64>,
}

/// `P^a = (a_1 + a_2) ln sum_b N_b^{a_1/(a_1+a_2)}` for the one-block map
/// that collapses consecutive runs of `N_b` symbols of a full shift onto
/// symbol `b`, with `phi = 1`; the equilibrium is Bernoulli with weight
/// `N_b^{a_1/(a_1+a_2) - 1} / Z` on each symbol of fiber `b`.
///
/// Derivation: the pushforward `nu` of the equilibrium maximizes
/// `a_2 h(nu) + a_1 (h(nu) + nu(ln N))`, the second term being the largest
/// entropy over the fibers; that is the pressure of `(a_1/(a_1+a_2)) ln N_b`
/// on the bottom full shift, multiplied by `a_1 + a_2`.
pub fn closed_form_full_shift(fiber_sizes: &[usize], a: (f64, f64)) -> ClosedForm {
    let fibers: Vec<Vec<f64>> = fiber_sizes.iter().map(|&n| vec![0.0; n]).collect();
    closed_form_weighted(&fibers, a)
}

/// The same with a symbol-wise potential: `fibers[b][x]` is `ln phi` of the
/// `x`-th symbol over `b`. `P^a = S ln sum_b (sum_x e^{f_x / a_1})^{a_1/S}`.
pub fn closed_form_weighted(fibers: &[Vec<f64>], a: (f64, f64)) -> ClosedForm {
    let (a1, a2) = a;
    let s = a1 + a2;
    let masses: Vec<f64> = fibers
        .iter()
        .map(|f| f.iter().map(|v| crate::math::exp(v / a1)).sum::<f64>())
        .collect();
    let z: f64 = masses.iter().map(|m| powf(*m, a1 / s)).sum();
    let mut weights = Vec::new();
    for (f, m) in fibers.iter().zip(&masses) {
        let share = powf(*m, a1 / s) / z;
        for v in f {
            weights.push(share * crate::math::exp(v / a1) / m);
        }
    }
    ClosedForm { pressure: s * ln(z), weights }
}

/// Objective of one candidate measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    /// `(1/d) sum mu(I) ln phi(I)`.
    pub potential: f64,
    /// Exact entropy of the candidate on `X_1`.
    pub entropy: f64,
    /// `sum_{i>=2} a_i` times the upper estimates of the pushforward
    /// entropies.
    pub pushforward: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub scores: Vec<CandidateScore>,
    pub max_objective: f64,
    /// No candidate exceeds the pressure upper bound plus tolerance.
    pub dominated: bool,
    /// Upper estimate for the pipeline's equilibrium and its estimator slack.
    pub equilibrium: Option<(f64, f64)>,
    /// The equilibrium reaches the lower bound minus its slack.
    pub attains: Option<bool>,
}

/// Scores every candidate against the pressure bracket.
pub fn variational_sweep(
    chain: &FactorChain,
    phi: &Potential,
    candidates: &[MarkovMeasure],
    d: usize,
    bracket: &PressureBracket,
    equilibrium: Option<&CylinderTable>,
    tol: f64,
) -> Result<SweepReport> {
    let weights = chain.weights();
    let mut scores = Vec::with_capacity(candidates.len());
    for cand in candidates {
        if cand.host() != chain.level(0) {
            return Err(Error::InvalidArgument("candidate does not live on X_1".into()));
        }
        let table = cand.cylinder_table(d)?;
        let report = entropy_and_objective(chain, &table, phi)?;
        let entropy = cand.entropy();
        let pushforward: f64 = report.levels[1..].iter().zip(&weights[1..]).map(|(l, a)| a * l.estimate()).sum();
        let objective = report.potential_average + weights[0] * entropy + pushforward;
        scores.push(CandidateScore { potential: report.potential_average, entropy, pushforward, objective });
    }
    let max_objective = scores.iter().map(|s| s.objective).fold(f64::NEG_INFINITY, f64::max);
    let dominated = scores.iter().all(|s| s.objective <= bracket.upper + tol);
    let (equilibrium, attains) = match equilibrium {
        Some(mu) => {
            let r = entropy_and_objective(chain, mu, phi)?;
            (Some((r.upper, r.gap)), Some(r.upper >= bracket.lower - r.gap - tol))
        }
        None => (None, None),
    };
    Ok(SweepReport { scores, max_objective, dominated, equilibrium, attains })
}

/// `count` random Markov candidates of the given order from a seeded
/// generator.
pub fn random_candidates(host: &Sft, order: usize, count: usize, seed: u64) -> Result<Vec<MarkovMeasure>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| MarkovMeasure::random(host.clone(), order, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::weighted_equilibrium;
    use crate::pressure::PressureOptions;
    use core::f64::consts::LN_2;

    fn golden() -> Sft {
        Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn markov_entropy_examples() {
        let b = MarkovMeasure::bernoulli(Sft::full_shift(2), vec![0.5, 0.5]).unwrap();
        assert!((b.entropy() - LN_2).abs() < 1e-15);
        let g = MarkovMeasure::new(golden(), 1, vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!((g.law()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((g.entropy() - 2.0 / 3.0 * LN_2).abs() < 1e-14);
        let p = MarkovMeasure::new(Sft::full_shift(2), 1, vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(p.entropy(), 0.0);
        assert_eq!(p.cylinder_table(3).unwrap().mass_of(&[0, 0, 0]), 1.0);
    }

    #[test]
    fn bad_kernels_are_rejected() {
        assert!(MarkovMeasure::new(golden(), 1, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MarkovMeasure::new(golden(), 1, vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
        let k = vec![vec![0.5, 0.5], vec![1.0, 0.0]];
        assert!(MarkovMeasure::with_law(golden(), 1, k.clone(), vec![0.5, 0.5]).is_err());
        assert!(MarkovMeasure::with_law(golden(), 1, k, vec![2.0 / 3.0, 1.0 / 3.0]).is_ok());
    }

    #[test]
    fn parry_measure_of_golden_mean() {
        let p = MarkovMeasure::parry(golden()).unwrap();
        let t = p.cylinder_table(2).unwrap();
        assert!((t.mass_of(&[0, 0]) - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((p.entropy() - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn block_entropy_increments_match_markov_entropy() {
        let cands = random_candidates(&golden(), 2, 5, 7).unwrap();
        for c in cands {
            let h = c.cylinder_table(5).unwrap().block_entropies().unwrap();
            for d in 3..5 {
                assert!((h[d] - h[d - 1] - c.entropy()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_forms() {
        let cf = closed_form_full_shift(&[2, 1], (1.0, 1.0));
        assert!((cf.pressure - 2.0 * (2f64.sqrt() + 1.0).ln()).abs() < 1e-14);
        let r2 = 2f64.sqrt();
        for (w, e) in cf.weights.iter().zip([1.0 / (r2 * (1.0 + r2)), 1.0 / (r2 * (1.0 + r2)), 1.0 / (1.0 + r2)]) {
            assert!((w - e).abs() < 1e-14);
        }
        let cf = closed_form_full_shift(&[1, 1], (0.7, 0.4));
        assert!((cf.pressure - 1.1 * LN_2).abs() < 1e-14);
        assert_eq!(cf.weights, vec![0.5, 0.5]);
        assert!((closed_form_full_shift(&[2, 1], (1.0, 0.0)).pressure - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_brute_force_sums() {
        // (S/n) ln sum_J (#fiber(J))^{a_1/S}, enumerated directly
        for (sizes, a) in [(vec![2usize, 1], (1.0, 1.0)), (vec![3, 1, 2], (0.6, 1.3)), (vec![1, 4], (2.0, 0.5))] {
            let s = a.0 + a.1;
            let k = sizes.len();
            for n in 1..=6 {
                let mut acc = 0.0;
                Sft::full_shift(k).for_each_word(n, |j| {
                    let fiber: f64 = j.iter().map(|&b| sizes[b as usize] as f64).product();
                    acc += fiber.powf(a.0 / s);
                });
                let brute = s * acc.ln() / n as f64;
                assert!((brute - closed_form_full_shift(&sizes, a).pressure).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sweeps() {
        let x = Sft::full_shift(2);
        let chain = FactorChain::single(x.clone(), 1.0).unwrap();
        let phi = Potential::constant(x.clone());
        let eq = weighted_equilibrium(&chain, &phi, 12, 3, &PressureOptions::default()).unwrap();
        let cands = random_candidates(&x, 0, 50, 1).unwrap();
        let r = variational_sweep(&chain, &phi, &cands, 3, &eq.pressure.bracket, Some(&eq.measure), 1e-9).unwrap();
        assert!(r.dominated && r.attains == Some(true));
        let uniform = MarkovMeasure::bernoulli(x, vec![0.5, 0.5]).unwrap();
        let r = variational_sweep(&chain, &phi, &[uniform], 3, &eq.pressure.bracket, None, 1e-9).unwrap();
        assert!((r.max_objective - LN_2).abs() < 1e-12);
    }

    #[test]
    fn product_chain_optimum_is_strict() {
        let x = Sft::full_shift(3);
        let chain = FactorChain::new(vec![x.clone(), Sft::full_shift(2)], vec![vec![0, 0, 1]], vec![1.0, 1.0]).unwrap();
        let phi = Potential::constant(x.clone());
        let eq = weighted_equilibrium(&chain, &phi, 12, 2, &PressureOptions::default()).unwrap();
        let best = closed_form_full_shift(&[2, 1], (1.0, 1.0));
        let opt = MarkovMeasure::bernoulli(x.clone(), best.weights.clone()).unwrap();
        let mut cands = vec![opt];
        for (i, j) in [(0, 2), (2, 0), (0, 1), (1, 2)] {
            for eps in [0.05, -0.05] {
                let mut w = best.weights.clone();
                w[i] += eps;
                w[j] -= eps;
                cands.push(MarkovMeasure::bernoulli(x.clone(), w).unwrap());
            }
        }
        let r = variational_sweep(&chain, &phi, &cands, 2, &eq.pressure.bracket, Some(&eq.measure), 1e-9).unwrap();
        assert!(r.dominated);
        assert!((r.scores[0].objective - best.pressure).abs() < 1e-10);
        assert!(r.scores[1..].iter().all(|s| s.objective < r.scores[0].objective - 1e-4));
    }

    #[test]
    fn golden_grid_peaks_near_parry() {
        let g = golden();
        let chain = FactorChain::single(g.clone(), 1.0).unwrap();
        let phi = Potential::constant(g.clone());
        let eq = weighted_equilibrium(&chain, &phi, 24, 2, &PressureOptions::default()).unwrap();
        let cands: Vec<MarkovMeasure> = (1..40)
            .map(|i| {
                let q = i as f64 / 40.0;
                MarkovMeasure::new(g.clone(), 1, vec![vec![1.0 - q, q], vec![1.0, 0.0]]).unwrap()
            })
            .collect();
        let r = variational_sweep(&chain, &phi, &cands, 2, &eq.pressure.bracket, None, 1e-9).unwrap();
        assert!(r.dominated);
        let log_golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((r.max_objective - log_golden).abs() < 1e-3);
        let best = r.scores.iter().enumerate().max_by(|a, b| a.1.objective.total_cmp(&b.1.objective)).unwrap().0;
        let q = (best + 1) as f64 / 40.0;
        let parry_q = 1.0 / ((1.0 + 5f64.sqrt()) / 2.0).powi(2);
        assert!((q - parry_q).abs() <= 0.025);
    }
}
