use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Sft, Symbol};
use crate::{Error, Result};

/// A one-block factor map `source -> target` induced by a symbol map.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMap {
    source: Sft,
    target: Sft,
    symbol_map: Vec<Symbol>,
}

impl FactorMap {
    /// Checks only the shape of the symbol map; transition and surjectivity
    /// requirements are checked by [`validate_chain`].
    pub fn new(source: Sft, target: Sft, symbol_map: Vec<Symbol>) -> Result<Self> {
        if symbol_map.len() != source.size() {
            return Err(Error::Validation(vec![format!(
                "symbol map has {} entries for a source alphabet of {}",
                symbol_map.len(),
                source.size()
            )]));
        }
        if let Some((a, &b)) = symbol_map
            .iter()
            .enumerate()
            .find(|(_, &b)| b as usize >= target.size())
        {
            return Err(Error::Validation(vec![format!(
                "symbol {a} maps to {b}, outside the target alphabet of {}",
                target.size()
            )]));
        }
        Ok(FactorMap {
            source,
            target,
            symbol_map,
        })
    }

    pub fn source(&self) -> &Sft {
        &self.source
    }

    pub fn target(&self) -> &Sft {
        &self.target
    }

    pub fn symbol_map(&self) -> &[Symbol] {
        &self.symbol_map
    }

    #[inline]
    pub fn apply_symbol(&self, s: Symbol) -> Symbol {
        self.symbol_map[s as usize]
    }

    pub fn apply(&self, word: &[Symbol]) -> Vec<Symbol> {
        word.iter().map(|&s| self.apply_symbol(s)).collect()
    }

    /// Source symbols grouped by image.
    pub fn preimages(&self) -> Vec<Vec<Symbol>> {
        let mut out = vec![Vec::new(); self.target.size()];
        for (a, &b) in self.symbol_map.iter().enumerate() {
            out[b as usize].push(a as Symbol);
        }
        out
    }
}

/// A tower `X_1 -> X_2 -> ... -> X_k` of one-block factor maps with a
/// weight vector `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorChain {
    levels: Vec<Sft>,
    maps: Vec<FactorMap>,
    weights: Vec<f64>,
}

impl FactorChain {
    pub fn new(levels: Vec<Sft>, symbol_maps: Vec<Vec<Symbol>>, weights: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("a chain needs at least one level".into()));
        }
        if symbol_maps.len() + 1 != levels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} levels need {} factor maps, got {}",
                levels.len(),
                levels.len() - 1,
                symbol_maps.len()
            )));
        }
        if weights.len() != levels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} levels need {} weights, got {}",
                levels.len(),
                levels.len(),
                weights.len()
            )));
        }
        if !(weights[0] > 0.0 && weights[0].is_finite()) {
            return Err(Error::InvalidArgument(format!("a_1 must be positive, got {}", weights[0])));
        }
        if let Some(w) = weights[1..].iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("weights after a_1 must be nonnegative, got {w}")));
        }
        let maps = symbol_maps
            .into_iter()
            .enumerate()
            .map(|(i, m)| FactorMap::new(levels[i].clone(), levels[i + 1].clone(), m))
            .collect::<Result<Vec<_>>>()?;
        Ok(FactorChain {
            levels,
            maps,
            weights,
        })
    }

    /// The one-level chain `(X, a_1)`.
    pub fn single(x: Sft, a1: f64) -> Result<Self> {
        FactorChain::new(vec![x], Vec::new(), vec![a1])
    }

    /// Number of levels `k`.
    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Level `i` (0-based: `level(0)` is `X_1`).
    pub fn level(&self, i: usize) -> &Sft {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[Sft] {
        &self.levels
    }

    /// Map `i` (0-based: `map(0)` is `pi_1: X_1 -> X_2`).
    pub fn map(&self, i: usize) -> &FactorMap {
        &self.maps[i]
    }

    pub fn maps(&self) -> &[FactorMap] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `a_1 + ... + a_i` for `i` in `1..=k`.
    pub fn partial_weight(&self, i: usize) -> f64 {
        self.weights[..i].iter().sum()
    }

    /// The composed symbol map `tau_i: X_1 -> X_{i+1}`; `tau(0)` is the
    /// identity.
    pub fn tau(&self, i: usize) -> Vec<Symbol> {
        let mut m: Vec<Symbol> = (0..self.levels[0].size() as Symbol).collect();
        for map in &self.maps[..i] {
            for s in m.iter_mut() {
                *s = map.apply_symbol(*s);
            }
        }
        m
    }
}

/// Outcome of a successful [`validate_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub depth: usize,
    /// Number of distinct fiber states explored per map.
    pub fiber_states: Vec<usize>,
    /// Informational lines, e.g. symbols removed by essential normalization.
    pub log: Vec<String>,
}

/// Checks every map of the chain: allowed transitions go to allowed
/// transitions, every target symbol is hit, and every word of `L_n(X_{i+1})`
/// with `n <= depth` has a nonempty fiber.
///
/// Fibers are tracked as sets of reachable source symbols, so the check
/// costs one pass per distinct set rather than an enumeration of `L_n`.
pub fn validate_chain(chain: &FactorChain, depth: usize) -> Result<ValidationReport> {
    if depth == 0 {
        return Err(Error::Depth("validation depth must be at least 1".into()));
    }
    let mut issues = Vec::new();
    let mut log = Vec::new();
    for (i, x) in chain.levels.iter().enumerate() {
        if !x.removed_symbols().is_empty() {
            log.push(format!(
                "level {}: removed inessential symbols {:?}",
                i + 1,
                x.removed_symbols()
            ));
        }
    }
    let mut fiber_states = Vec::new();
    for (i, map) in chain.maps.iter().enumerate() {
        let (src, tgt) = (&map.source, &map.target);
        if *src != chain.levels[i] || *tgt != chain.levels[i + 1] {
            issues.push(format!("map {} does not connect levels {} and {}", i + 1, i + 1, i + 2));
            continue;
        }
        for a in 0..src.size() as Symbol {
            for &b in src.successors(a) {
                let (x, y) = (map.apply_symbol(a), map.apply_symbol(b));
                if !tgt.allows(x, y) {
                    issues.push(format!(
                        "map {}: transition {a}->{b} of level {} maps to forbidden transition {x}->{y}",
                        i + 1,
                        i + 1
                    ));
                }
            }
        }
        let pre = map.preimages();
        for (y, p) in pre.iter().enumerate() {
            if p.is_empty() {
                issues.push(format!("map {}: target symbol {y} has no preimage", i + 1));
            }
        }
        if !issues.is_empty() {
            continue;
        }
        let (states, missing) = fiber_check(map, &pre, depth);
        fiber_states.push(states);
        if let Some(word) = missing {
            issues.push(format!("map {}: word {:?} of level {} has an empty fiber", i + 1, word, i + 2));
        }
    }
    if issues.is_empty() {
        Ok(ValidationReport {
            depth,
            fiber_states,
            log,
        })
    } else {
        Err(Error::Validation(issues))
    }
}

fn fiber_check(map: &FactorMap, pre: &[Vec<Symbol>], depth: usize) -> (usize, Option<Vec<Symbol>>) {
    let src = &map.source;
    let tgt = &map.target;
    let k = src.size();
    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut frontier: Vec<(Vec<bool>, Vec<Symbol>)> = Vec::new();
    for (y, p) in pre.iter().enumerate() {
        let mut set = vec![false; k];
        for &a in p {
            set[a as usize] = true;
        }
        if seen.insert(set.clone()) {
            frontier.push((set, vec![y as Symbol]));
        }
    }
    for _ in 1..depth {
        let mut next = Vec::new();
        for (set, witness) in &frontier {
            let last = *witness.last().expect("nonempty witness");
            for &z in tgt.successors(last) {
                let mut reach = vec![false; k];
                let mut any = false;
                for a in (0..k).filter(|&a| set[a]) {
                    for &b in src.successors(a as Symbol) {
                        if map.apply_symbol(b) == z {
                            reach[b as usize] = true;
                            any = true;
                        }
                    }
                }
                if !any {
                    let mut w = witness.clone();
                    w.push(z);
                    return (seen.len(), Some(w));
                }
                if seen.insert(reach.clone()) {
                    let mut w = witness.clone();
                    w.push(z);
                    next.push((reach, w));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    (seen.len(), None)
}
