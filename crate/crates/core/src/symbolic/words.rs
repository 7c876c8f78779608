use alloc::vec;
use alloc::vec::Vec;

use super::{Caps, Sft, Symbol};
use crate::Result;

/// A list of equal-length words stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordList {
    word_len: usize,
    count: usize,
    data: Vec<Symbol>,
}

impl WordList {
    pub fn with_capacity(word_len: usize, count: usize) -> Self {
        WordList {
            word_len,
            count: 0,
            data: Vec::with_capacity(word_len * count),
        }
    }

    pub fn push(&mut self, word: &[Symbol]) {
        debug_assert_eq!(word.len(), self.word_len);
        self.data.extend_from_slice(word);
        self.count += 1;
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn get(&self, i: usize) -> &[Symbol] {
        &self.data[i * self.word_len..(i + 1) * self.word_len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        (0..self.count).map(move |i| self.get(i))
    }
}

/// Lexicographic ranking of `L_n(X)`.
///
/// The rank of a word is its position in the output of
/// [`Sft::language`]; every per-word table in the crate is keyed by it.
#[derive(Debug, Clone)]
pub struct WordIndex {
    n: usize,
    total: usize,
    // counts[r][b]: legal words of length r starting with b
    counts: Vec<Vec<u64>>,
    successors: Vec<Vec<Symbol>>,
    size: usize,
}

impl WordIndex {
    pub(crate) fn new(x: &Sft, n: usize, caps: &Caps) -> Result<Self> {
        let raw = x.path_counts(n);
        let total = x.language_size(n);
        caps.check_words("word index", total)?;
        let counts = raw
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as u64).collect())
            .collect();
        Ok(WordIndex {
            n,
            total: total as usize,
            counts,
            successors: (0..x.size() as Symbol).map(|a| x.successors(a).to_vec()).collect(),
            size: x.size(),
        })
    }

    pub fn word_len(&self) -> usize {
        self.n
    }

    /// `|L_n(X)|`.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Rank of `word`, or `None` when it is not a legal length-`n` word.
    pub fn rank(&self, word: &[Symbol]) -> Option<usize> {
        if word.len() != self.n {
            return None;
        }
        if self.n == 0 {
            return Some(0);
        }
        let first = word[0] as usize;
        if first >= self.size {
            return None;
        }
        let mut r: u64 = self.counts[self.n][..first].iter().sum();
        for t in 1..self.n {
            let prev = word[t - 1] as usize;
            let rem = self.n - t;
            let mut found = false;
            for &b in &self.successors[prev] {
                if b == word[t] {
                    found = true;
                    break;
                }
                r += self.counts[rem][b as usize];
            }
            if !found {
                return None;
            }
        }
        Some(r as usize)
    }

    /// Inverse of [`WordIndex::rank`].
    pub fn unrank(&self, mut rank: usize) -> Vec<Symbol> {
        assert!(rank < self.total, "rank {rank} out of range");
        let mut word = vec![0 as Symbol; self.n];
        if self.n == 0 {
            return word;
        }
        let mut r = rank as u64;
        for b in 0..self.size {
            let c = self.counts[self.n][b];
            if r < c {
                word[0] = b as Symbol;
                break;
            }
            r -= c;
        }
        for t in 1..self.n {
            let rem = self.n - t;
            for &b in &self.successors[word[t - 1] as usize] {
                let c = self.counts[rem][b as usize];
                if r < c {
                    word[t] = b;
                    break;
                }
                r -= c;
            }
        }
        rank = r as usize;
        debug_assert_eq!(rank, 0);
        word
    }
}
