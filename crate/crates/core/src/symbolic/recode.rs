use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::words::{WordIndex, WordList};
use super::{Caps, Sft, Symbol};
use crate::{Error, Result};

/// The `m`-block presentation of an SFT together with the word recodings.
#[derive(Debug, Clone)]
pub struct HigherBlock {
    pub sft: Sft,
    m: usize,
    blocks: WordList,
    block_index: WordIndex,
}

impl HigherBlock {
    pub fn block_len(&self) -> usize {
        self.m
    }

    /// The original `m`-block coded by symbol `s`.
    pub fn block(&self, s: Symbol) -> &[Symbol] {
        self.blocks.get(s as usize)
    }

    /// Maps a word of `L_{n+m-1}(X)` to its `m`-block code in `L_n(X^[m])`.
    /// Returns `None` for illegal words or words shorter than `m`.
    pub fn encode(&self, word: &[Symbol]) -> Option<Vec<Symbol>> {
        if word.len() < self.m {
            return None;
        }
        word.windows(self.m)
            .map(|w| self.block_index.rank(w).map(|r| r as Symbol))
            .collect::<Option<Vec<_>>>()
            .filter(|code| self.sft.is_legal(code))
    }

    /// Inverse of [`HigherBlock::encode`] on legal nonempty words.
    pub fn decode(&self, code: &[Symbol]) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(code.len() + self.m - 1);
        if let Some((&first, rest)) = code.split_first() {
            out.extend_from_slice(self.block(first));
            for &s in rest {
                out.push(*self.block(s).last().expect("m >= 1"));
            }
        }
        out
    }
}

/// Recodes `x` by its `m`-blocks: the new alphabet is `L_m(x)` in rank
/// order, and `u -> v` is allowed when the blocks overlap in `m - 1`
/// symbols and their union is legal.
pub fn higher_block_recode(x: &Sft, m: usize, caps: &Caps) -> Result<HigherBlock> {
    if m == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    let count = x.language_size(m);
    if count > caps.alphabet as u128 {
        return Err(Error::ResourceCap {
            what: "higher-block alphabet",
            needed: count,
            cap: caps.alphabet as u128,
        });
    }
    let blocks = x.language(m, caps)?;
    let block_index = x.word_index(m, caps)?;
    let k = blocks.len();
    let mut allowed = vec![false; k * k];
    for u in 0..k {
        let bu = blocks.get(u);
        let mut shifted: Vec<Symbol> = bu[1..].to_vec();
        shifted.push(0);
        for &c in x.successors(bu[m - 1]) {
            shifted[m - 1] = c;
            let v = block_index
                .rank(&shifted)
                .ok_or_else(|| Error::InvalidArgument(format!("overlap of block {u} is illegal")))?;
            allowed[u * k + v] = true;
        }
    }
    let sft = Sft::new(k, allowed)?;
    debug_assert_eq!(sft.size(), k);
    Ok(HigherBlock {
        sft,
        m,
        blocks,
        block_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_block_recoding_is_identity() {
        let x = Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        let hb = higher_block_recode(&x, 1, &Caps::default()).unwrap();
        assert_eq!(hb.sft, x);
        assert_eq!(hb.encode(&[0, 1, 0]), Some(vec![0, 1, 0]));
    }

    #[test]
    fn golden_mean_two_blocks() {
        let x = Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        let hb = higher_block_recode(&x, 2, &Caps::default()).unwrap();
        assert_eq!(hb.sft.size(), 3);
        assert_eq!(hb.block(0), &[0, 0]);
        assert_eq!(hb.block(1), &[0, 1]);
        assert_eq!(hb.block(2), &[1, 0]);
        // one transition per word of L_3 = {000, 001, 010, 100, 101}
        let edges: usize = (0..3).map(|s| hb.sft.successors(s).len()).sum();
        assert_eq!(edges, 5);
    }

    #[test]
    fn full_shift_two_blocks() {
        let x = Sft::full_shift(2);
        let hb = higher_block_recode(&x, 2, &Caps::default()).unwrap();
        assert_eq!(hb.sft.size(), 4);
        for s in 0..4 {
            assert_eq!(hb.sft.successors(s).len(), 2);
        }
    }

    #[test]
    fn alphabet_cap_is_enforced() {
        let caps = Caps { alphabet: 7, ..Caps::default() };
        assert!(matches!(
            higher_block_recode(&Sft::full_shift(3), 2, &caps),
            Err(Error::ResourceCap { .. })
        ));
    }

    proptest! {
        #[test]
        fn recoding_round_trips(
            k in 1usize..4,
            bits in proptest::collection::vec(any::<bool>(), 9),
            m in 1usize..4,
            n in 1usize..=8,
        ) {
            let allowed: Vec<bool> = (0..k * k).map(|i| bits[i] || i % (k + 1) == 0).collect();
            let x = Sft::new(k, allowed).unwrap();
            let hb = higher_block_recode(&x, m, &Caps::default()).unwrap();
            let long = x.language(n + m - 1, &Caps::default()).unwrap();
            let short = hb.sft.language(n, &Caps::default()).unwrap();
            prop_assert_eq!(long.len(), short.len());
            for w in long.iter() {
                let code = hb.encode(w).unwrap();
                prop_assert_eq!(hb.decode(&code), w.to_vec());
            }
            for c in short.iter() {
                prop_assert_eq!(hb.encode(&hb.decode(c)), Some(c.to_vec()));
            }
        }
    }
}
