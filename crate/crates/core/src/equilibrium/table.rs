use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{ln, CompensatedSum};
use crate::symbolic::{Caps, FactorMap, Sft, Symbol, WordIndex};
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-10;

/// Masses of the cylinders of one depth, keyed by word rank.
#[derive(Debug, Clone)]
pub struct CylinderTable {
    host: Sft,
    depth: usize,
    masses: Vec<f64>,
    normalization_error: f64,
    index: WordIndex,
}

impl PartialEq for CylinderTable {
    fn eq(&self, other: &Self) -> bool {
        self.host == other.host && self.depth == other.depth && self.masses == other.masses
    }
}

impl CylinderTable {
    /// Checks that `masses` is a probability vector over `L_depth(host)`.
    pub fn new(host: Sft, depth: usize, masses: Vec<f64>) -> Result<Self> {
        let index = host.word_index(depth, &Caps::default())?;
        if masses.len() != index.len() {
            return Err(Error::Measure(format!(
                "{} masses given for {} words of length {depth}",
                masses.len(),
                index.len()
            )));
        }
        if let Some(bad) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Measure(format!("mass {} at rank {bad} is not a nonnegative number", masses[bad])));
        }
        let total = sum(&masses);
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Measure(format!("masses sum to {total}, not 1")));
        }
        Ok(CylinderTable { host, depth, masses, normalization_error: 0.0, index })
    }

    /// Rescales nonnegative weights to total mass one and records `dropped`
    /// as the normalization error.
    pub(crate) fn normalized(host: Sft, depth: usize, mut masses: Vec<f64>, dropped: f64) -> Result<Self> {
        let total = sum(&masses);
        if !(total > 0.0) {
            return Err(Error::EmptySupport);
        }
        masses.iter_mut().for_each(|m| *m /= total);
        let index = host.word_index(depth, &Caps::default())?;
        Ok(CylinderTable { host, depth, masses, normalization_error: dropped, index })
    }

    /// Uniform weights on `L_depth(host)`.
    pub fn uniform(host: Sft, depth: usize) -> Result<Self> {
        let n = host.word_index(depth, &Caps::default())?.len();
        Self::normalized(host, depth, vec![1.0; n], 0.0)
    }

    /// All mass on one word.
    pub fn point_mass(host: Sft, word: &[Symbol]) -> Result<Self> {
        let index = host.word_index(word.len(), &Caps::default())?;
        let r = index
            .rank(word)
            .ok_or_else(|| Error::Measure(format!("word {word:?} is not legal")))?;
        let mut masses = vec![0.0; index.len()];
        masses[r] = 1.0;
        Ok(CylinderTable { host, depth: word.len(), masses, normalization_error: 0.0, index })
    }

    pub fn host(&self) -> &Sft {
        &self.host
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Mass removed before renormalizing (boundary terms of a Cesàro sum).
    pub fn normalization_error(&self) -> f64 {
        self.normalization_error
    }

    pub fn index(&self) -> &WordIndex {
        &self.index
    }

    /// Mass of a word of length `depth`; zero for illegal words.
    pub fn mass_of(&self, word: &[Symbol]) -> f64 {
        self.index.rank(word).map_or(0.0, |r| self.masses[r])
    }

    pub fn total(&self) -> f64 {
        sum(&self.masses)
    }

    pub fn word(&self, rank: usize) -> Vec<Symbol> {
        self.index.unrank(rank)
    }

    /// Masses of the length-`j` prefixes.
    pub fn prefix_marginal(&self, j: usize) -> Result<CylinderTable> {
        if j > self.depth {
            return Err(Error::Depth(format!("marginal depth {j} exceeds table depth {}", self.depth)));
        }
        let index = self.host.word_index(j, &Caps::default())?;
        let mut acc = vec![CompensatedSum::default(); index.len()];
        let mut rank = 0;
        self.host.for_each_word(self.depth, |w| {
            let r = index.rank(&w[..j]).expect("prefix of a legal word");
            acc[r].add(self.masses[rank]);
            rank += 1;
        });
        let masses = acc.iter().map(|a| a.value()).collect();
        Ok(CylinderTable {
            host: self.host.clone(),
            depth: j,
            masses,
            normalization_error: self.normalization_error,
            index,
        })
    }

    /// Image measure under a one-block map, at the same depth.
    pub fn pushforward(&self, map: &FactorMap) -> Result<CylinderTable> {
        if map.source() != &self.host {
            return Err(Error::InvalidArgument("map source differs from the table's shift".into()));
        }
        let target = map.target().clone();
        let index = target.word_index(self.depth, &Caps::default())?;
        let mut acc = vec![CompensatedSum::default(); index.len()];
        let mut rank = 0;
        let mut image = vec![0 as Symbol; self.depth];
        self.host.for_each_word(self.depth, |w| {
            for (o, &x) in image.iter_mut().zip(w) {
                *o = map.apply_symbol(x);
            }
            let r = index.rank(&image).expect("image of a legal word is legal");
            acc[r].add(self.masses[rank]);
            rank += 1;
        });
        let masses = acc.iter().map(|a| a.value()).collect();
        Ok(CylinderTable {
            host: target,
            depth: self.depth,
            masses,
            normalization_error: self.normalization_error,
            index,
        })
    }

    /// Shannon entropy of the cylinder masses, `H_depth`.
    pub fn block_entropy(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for &m in &self.masses {
            if m > 0.0 {
                acc.add(-m * ln(m));
            }
        }
        acc.value()
    }

    /// `H_1, ..., H_depth` from the prefix marginals.
    pub fn block_entropies(&self) -> Result<Vec<f64>> {
        (1..=self.depth)
            .map(|j| {
                if j == self.depth {
                    Ok(self.block_entropy())
                } else {
                    self.prefix_marginal(j).map(|t| t.block_entropy())
                }
            })
            .collect()
    }

    /// Largest gap between `mass(I)` and the summed masses of its one-symbol
    /// extensions in `deeper`.
    pub fn consistency_error(&self, deeper: &CylinderTable) -> Result<f64> {
        if deeper.depth != self.depth + 1 || deeper.host != self.host {
            return Err(Error::Depth("consistency needs a table one level deeper on the same shift".into()));
        }
        let marginal = deeper.prefix_marginal(self.depth)?;
        Ok(self
            .masses
            .iter()
            .zip(&marginal.masses)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn sum(values: &[f64]) -> f64 {
    crate::math::compensated_sum(values.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Sft {
        Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(CylinderTable::new(golden(), 2, vec![0.5, 0.25, 0.25]).is_ok());
        assert!(matches!(CylinderTable::new(golden(), 2, vec![0.5, 0.25]), Err(Error::Measure(_))));
        assert!(matches!(CylinderTable::new(golden(), 2, vec![0.5, 0.25, 0.3]), Err(Error::Measure(_))));
        assert!(matches!(CylinderTable::new(golden(), 2, vec![1.5, -0.25, -0.25]), Err(Error::Measure(_))));
    }

    #[test]
    fn marginals_and_pushforward() {
        let t = CylinderTable::new(golden(), 2, vec![0.5, 0.25, 0.25]).unwrap();
        let m = t.prefix_marginal(1).unwrap();
        assert_eq!(m.masses(), &[0.75, 0.25]);
        let map = FactorMap::new(golden(), Sft::full_shift(1), vec![0, 0]).unwrap();
        let p = t.pushforward(&map).unwrap();
        assert_eq!(p.masses(), &[1.0]);
        assert_eq!(t.mass_of(&[1, 1]), 0.0);
        assert_eq!(t.mass_of(&[1, 0]), 0.25);
        assert_eq!(t.word(1), vec![0, 1]);
    }

    #[test]
    fn entropies() {
        let t = CylinderTable::uniform(Sft::full_shift(2), 3).unwrap();
        let h = t.block_entropies().unwrap();
        for (j, v) in h.iter().enumerate() {
            assert!((v - (j + 1) as f64 * core::f64::consts::LN_2).abs() < 1e-12);
        }
        let p = CylinderTable::point_mass(Sft::full_shift(2), &[0, 0]).unwrap();
        assert_eq!(p.block_entropy(), 0.0);
    }
}
