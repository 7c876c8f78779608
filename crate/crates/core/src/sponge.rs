//! Hausdorff dimension of self-affine Sierpinski sponges as a weighted
//! pressure with Kenyon–Peres weights.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::equilibrium::{cesaro_measure, entropy_and_objective, phi_tilde, phi_tilde_at, CylinderTable, ObjectiveReport};
use crate::math::ln;
use crate::oracle::closed_form_full_shift;
use crate::potential::Potential;
use crate::pressure::{weighted_pressure, PressureBracket, PressureOptions};
use crate::symbolic::{validate_chain, FactorChain, Sft, Symbol};
use crate::{Error, Result};

/// Bases `m_1 <= ... <= m_k`, a digit set `D` (tuples of length `k`) and an
/// optional transition matrix over `D`; digit `i` is symbol `i` of `X_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpongeSpec {
    bases: Vec<u32>,
    digits: Vec<Vec<u32>>,
    shift: Sft,
    restricted: bool,
}

impl SpongeSpec {
    pub fn new(bases: Vec<u32>, digits: Vec<Vec<u32>>, transitions: Option<Vec<Vec<u8>>>) -> Result<Self> {
        let mut issues = Vec::new();
        if bases.is_empty() {
            issues.push("at least one base is required".into());
        }
        if bases.iter().any(|&m| m < 2) {
            issues.push(format!("bases {bases:?} must all be at least 2"));
        }
        if bases.windows(2).any(|w| w[0] > w[1]) {
            issues.push(format!("bases {bases:?} must be nondecreasing"));
        }
        if digits.is_empty() {
            issues.push("digit set is empty".into());
        }
        for (i, d) in digits.iter().enumerate() {
            if d.len() != bases.len() {
                issues.push(format!("digit {i} has {} coordinates, expected {}", d.len(), bases.len()));
            } else if let Some(c) = d.iter().zip(&bases).position(|(x, m)| x >= m) {
                issues.push(format!("digit {i} coordinate {c} is {} but the base is {}", d[c], bases[c]));
            }
            if digits[..i].contains(d) {
                issues.push(format!("digit {i} repeats {d:?}"));
            }
        }
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let (shift, restricted) = match transitions {
            None => (Sft::full_shift(digits.len()), false),
            Some(rows) => {
                if rows.len() != digits.len() {
                    return Err(Error::MalformedMatrix(format!(
                        "transition matrix has {} rows for {} digits",
                        rows.len(),
                        digits.len()
                    )));
                }
                let x = Sft::from_rows(&rows)?;
                if !x.removed_symbols().is_empty() {
                    return Err(Error::Validation(vec![format!(
                        "digits {:?} have no predecessor or no successor",
                        x.removed_symbols()
                    )]));
                }
                (x, true)
            }
        };
        Ok(SpongeSpec { bases, digits, shift, restricted })
    }

    /// Sorts the bases into nondecreasing order (stably), permuting the
    /// digit coordinates alike. Returns the spec and the permutation:
    /// coordinate `j` of the result is coordinate `perm[j]` of the input.
    pub fn from_unsorted(bases: Vec<u32>, digits: Vec<Vec<u32>>, transitions: Option<Vec<Vec<u8>>>) -> Result<(Self, Vec<usize>)> {
        let mut perm: Vec<usize> = (0..bases.len()).collect();
        perm.sort_by_key(|&j| bases[j]);
        let sorted: Vec<u32> = perm.iter().map(|&j| bases[j]).collect();
        let mut moved = Vec::with_capacity(digits.len());
        for (i, d) in digits.iter().enumerate() {
            if d.len() != bases.len() {
                return Err(Error::Validation(vec![format!(
                    "digit {i} has {} coordinates, expected {}",
                    d.len(),
                    bases.len()
                )]));
            }
            moved.push(perm.iter().map(|&j| d[j]).collect());
        }
        Ok((Self::new(sorted, moved, transitions)?, perm))
    }

    pub fn bases(&self) -> &[u32] {
        &self.bases
    }

    pub fn digits(&self) -> &[Vec<u32>] {
        &self.digits
    }

    pub fn k(&self) -> usize {
        self.bases.len()
    }

    /// The digit subshift `X_1`.
    pub fn shift(&self) -> &Sft {
        &self.shift
    }

    /// True when a transition matrix restricts the digit sequences.
    pub fn is_restricted(&self) -> bool {
        self.restricted
    }
}

/// `a_1 = 1/ln m_k`, `a_{i+1} = 1/ln m_{k-i} - 1/ln m_{k-i+1}`.
pub fn kenyon_peres_weights(bases: &[u32]) -> Vec<f64> {
    let k = bases.len();
    let inv = |m: u32| 1.0 / ln(m as f64);
    let mut a = Vec::with_capacity(k);
    a.push(inv(bases[k - 1]));
    for i in 1..k {
        a.push(inv(bases[k - i - 1]) - inv(bases[k - i]));
    }
    a
}

/// `X_1` over `D`; `X_{i+1}` over the projections of the digits to their
/// first `k - i` coordinates, with the projected transition relation.
pub fn build_sponge_chain(spec: &SpongeSpec, validation_depth: usize) -> Result<FactorChain> {
    let k = spec.k();
    let mut levels = vec![spec.shift.clone()];
    let mut maps = Vec::with_capacity(k - 1);
    let mut tuples: Vec<Vec<u32>> = spec.digits.clone();
    for _ in 1..k {
        let prev = levels.last().expect("nonempty");
        let projected: BTreeMap<Vec<u32>, Symbol> = tuples
            .iter()
            .map(|t| t[..t.len() - 1].to_vec())
            .collect::<alloc::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, i as Symbol))
            .collect();
        let map: Vec<Symbol> = tuples.iter().map(|t| projected[&t[..t.len() - 1]]).collect();
        let size = projected.len();
        let mut allowed = vec![false; size * size];
        for a in 0..prev.size() as Symbol {
            for &b in prev.successors(a) {
                allowed[map[a as usize] as usize * size + map[b as usize] as usize] = true;
            }
        }
        let next = Sft::new(size, allowed)?;
        tuples = projected.into_keys().collect();
        levels.push(next);
        maps.push(map);
    }
    let chain = FactorChain::new(levels, maps, kenyon_peres_weights(&spec.bases))?;
    validate_chain(&chain, validation_depth)?;
    Ok(chain)
}

/// Dimension bracket and the approximate dimension-maximizing measure.
#[derive(Debug, Clone)]
pub struct SpongeDimension {
    pub chain: FactorChain,
    pub bracket: PressureBracket,
    /// Depth of the `phi~` table behind the Cesàro average.
    pub equilibrium_depth: usize,
    pub measure: CylinderTable,
    pub objective: ObjectiveReport,
}

/// `dim_H R(X)` bracketed as the weighted pressure of the constant
/// potential along the projection chain.
///
/// The Cesàro table of the maximizing measure uses the deepest `phi~` table
/// that fits the table cap, which can be shallower than `n`.
pub fn sponge_dimension(spec: &SpongeSpec, n: usize, d: usize, opts: &PressureOptions) -> Result<SpongeDimension> {
    let x = spec.shift();
    if x.specification_gaps().weak_p.is_none() {
        return Err(Error::NoSpecification(
            "the digit shift lacks weak specification; the dimension formula does not apply".into(),
        ));
    }
    let chain = build_sponge_chain(spec, n.max(1))?;
    let phi = Potential::constant(x.clone());
    let wp = weighted_pressure(&chain, &phi, n, opts)?;
    let mut n_eq = n;
    while n_eq > 0 && x.language_size(n_eq) > opts.caps.table {
        n_eq -= 1;
    }
    if d == 0 || 2 * d > n_eq {
        return Err(Error::Depth(format!(
            "Cesàro depth d = {d} needs 1 <= d <= {} (half the affordable table depth {n_eq})",
            n_eq / 2
        )));
    }
    let tilde = if n_eq == n {
        phi_tilde(&chain, &phi, &wp.tables, &opts.caps)?
    } else {
        phi_tilde_at(&chain, &phi, n_eq, &opts.caps)?
    };
    let measure = cesaro_measure(&tilde, d)?;
    let objective = entropy_and_objective(&chain, &measure, &phi)?;
    Ok(SpongeDimension { chain, bracket: wp.bracket, equilibrium_depth: n_eq, measure, objective })
}

/// `log_{m_1} sum_b t_b^{ln m_1 / ln m_2}`, `t_b` the number of digits with
/// first coordinate `b`.
///
/// This equals the closed-form weighted pressure of the two-level product
/// chain with Kenyon–Peres weights: with `a_1 = 1/ln m_2` and
/// `a_1 + a_2 = 1/ln m_1` the exponent `a_1/(a_1+a_2)` is `ln m_1 / ln m_2`.
pub fn mcmullen_oracle(spec: &SpongeSpec) -> Result<f64> {
    if spec.k() != 2 || spec.is_restricted() {
        return Err(Error::InvalidArgument("the closed form needs two bases and an unrestricted digit set".into()));
    }
    let m1 = spec.bases[0] as f64;
    let m2 = spec.bases[1] as f64;
    let mut counts = vec![0usize; spec.bases[0] as usize];
    for d in &spec.digits {
        counts[d[0] as usize] += 1;
    }
    let e = ln(m1) / ln(m2);
    let total: f64 = counts.iter().filter(|&&t| t > 0).map(|&t| crate::math::powf(t as f64, e)).sum();
    Ok(ln(total) / ln(m1))
}

/// Fiber sizes of the first coordinate, in the order of the projected
/// alphabet.
pub fn first_coordinate_fibers(spec: &SpongeSpec) -> Vec<usize> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for d in &spec.digits {
        *counts.entry(d[0]).or_default() += 1;
    }
    counts.into_values().collect()
}

/// Same value through [`closed_form_full_shift`].
pub fn mcmullen_by_closed_form(spec: &SpongeSpec) -> Result<f64> {
    if spec.k() != 2 || spec.is_restricted() {
        return Err(Error::InvalidArgument("the closed form needs two bases and an unrestricted digit set".into()));
    }
    let a = kenyon_peres_weights(&spec.bases);
    Ok(closed_form_full_shift(&first_coordinate_fibers(spec), (a[0], a[1])).pressure)
}
