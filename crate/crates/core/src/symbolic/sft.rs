use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::words::{WordIndex, WordList};
use super::{Caps, Symbol};
use crate::{Error, Result};

/// A one-sided subshift of finite type given by a 0/1 transition matrix.
///
/// Construction removes inessential symbols (no successor or no
/// predecessor) until none are left; the surviving symbols are renumbered
/// contiguously and their original indices are kept in [`Sft::labels`].
#[derive(Clone, Debug)]
pub struct Sft {
    size: usize,
    allowed: Vec<bool>,
    successors: Vec<Vec<Symbol>>,
    labels: Vec<u32>,
    removed: Vec<u32>,
}

impl PartialEq for Sft {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size && self.allowed == other.allowed
    }
}

impl Eq for Sft {}

/// Minimal connector lengths for weak and exact specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecificationGaps {
    pub weak_p: Option<usize>,
    pub exact_p: Option<usize>,
}

impl Sft {
    /// Builds an SFT from a row-major `size × size` boolean matrix.
    pub fn new(size: usize, allowed: Vec<bool>) -> Result<Self> {
        if size == 0 {
            return Err(Error::MalformedMatrix("alphabet must be nonempty".into()));
        }
        if allowed.len() != size * size {
            return Err(Error::MalformedMatrix(format!(
                "expected {} entries, got {}",
                size * size,
                allowed.len()
            )));
        }
        let mut alive = vec![true; size];
        loop {
            let mut changed = false;
            for a in 0..size {
                if !alive[a] {
                    continue;
                }
                let has_succ = (0..size).any(|b| alive[b] && allowed[a * size + b]);
                let has_pred = (0..size).any(|b| alive[b] && allowed[b * size + a]);
                if !has_succ || !has_pred {
                    alive[a] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let labels: Vec<u32> = (0..size).filter(|&a| alive[a]).map(|a| a as u32).collect();
        let removed: Vec<u32> = (0..size).filter(|&a| !alive[a]).map(|a| a as u32).collect();
        if labels.is_empty() {
            return Err(Error::EmptyShift);
        }
        let k = labels.len();
        let mut dense = vec![false; k * k];
        for (i, &a) in labels.iter().enumerate() {
            for (j, &b) in labels.iter().enumerate() {
                dense[i * k + j] = allowed[a as usize * size + b as usize];
            }
        }
        let successors = (0..k)
            .map(|i| (0..k).filter(|&j| dense[i * k + j]).map(|j| j as Symbol).collect())
            .collect();
        Ok(Sft {
            size: k,
            allowed: dense,
            successors,
            labels,
            removed,
        })
    }

    /// Builds an SFT from matrix rows with entries in `{0, 1}`; errors name
    /// the offending row.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let size = rows.len();
        let mut allowed = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::MalformedMatrix(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => allowed.push(false),
                    1 => allowed.push(true),
                    _ => {
                        return Err(Error::MalformedMatrix(format!(
                            "row {i} column {j} holds {v}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        Sft::new(size, allowed)
    }

    /// The full shift on `k` symbols.
    pub fn full_shift(k: usize) -> Self {
        Sft::new(k, vec![true; k * k]).expect("full shift on a nonempty alphabet")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        self.allowed[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn successors(&self, a: Symbol) -> &[Symbol] {
        &self.successors[a as usize]
    }

    /// Original indices of the surviving symbols.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Original indices removed by the essential-normalization pass.
    pub fn removed_symbols(&self) -> &[u32] {
        &self.removed
    }

    pub fn is_full_shift(&self) -> bool {
        self.allowed.iter().all(|&x| x)
    }

    /// Row-major transition matrix.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.size)
            .map(|a| {
                (0..self.size)
                    .map(|b| self.allowed[a * self.size + b] as u8)
                    .collect()
            })
            .collect()
    }

    pub fn is_legal(&self, word: &[Symbol]) -> bool {
        word.iter().all(|&s| (s as usize) < self.size)
            && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// `counts[r][b]` = number of legal words of length `r` starting with `b`,
    /// saturating at `u128::MAX`.
    pub fn path_counts(&self, n: usize) -> Vec<Vec<u128>> {
        let mut counts = vec![vec![0u128; self.size]; n + 1];
        if n >= 1 {
            counts[1].iter_mut().for_each(|c| *c = 1);
        }
        for r in 2..=n {
            for b in 0..self.size {
                let mut total = 0u128;
                for &c in &self.successors[b] {
                    total = total.saturating_add(counts[r - 1][c as usize]);
                }
                counts[r][b] = total;
            }
        }
        counts
    }

    /// `|L_n(X)|`, saturating.
    pub fn language_size(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let counts = self.path_counts(n);
        counts[n].iter().fold(0u128, |acc, &c| acc.saturating_add(c))
    }

    /// Lexicographic rank index for `L_n(X)`.
    pub fn word_index(&self, n: usize, caps: &Caps) -> Result<WordIndex> {
        WordIndex::new(self, n, caps)
    }

    /// All words of length `n`, in lexicographic order.
    pub fn language(&self, n: usize, caps: &Caps) -> Result<WordList> {
        let total = self.language_size(n);
        caps.check_words("language enumeration", total)?;
        let mut list = WordList::with_capacity(n, total as usize);
        self.for_each_word(n, |w| list.push(w));
        Ok(list)
    }

    /// Visits `L_n(X)` in lexicographic order without materializing it.
    pub fn for_each_word<F: FnMut(&[Symbol])>(&self, n: usize, mut visit: F) {
        if n == 0 {
            visit(&[]);
            return;
        }
        let mut word: Vec<Symbol> = vec![0; n];
        // positions into successor lists; level 0 iterates over all symbols
        let mut cursor: Vec<usize> = vec![0; n];
        let mut depth = 0usize;
        loop {
            let options: usize = if depth == 0 {
                self.size
            } else {
                self.successors[word[depth - 1] as usize].len()
            };
            if cursor[depth] >= options {
                if depth == 0 {
                    return;
                }
                cursor[depth] = 0;
                depth -= 1;
                cursor[depth] += 1;
                continue;
            }
            word[depth] = if depth == 0 {
                cursor[0] as Symbol
            } else {
                self.successors[word[depth - 1] as usize][cursor[depth]]
            };
            if depth + 1 == n {
                visit(&word);
                cursor[depth] += 1;
            } else {
                depth += 1;
            }
        }
    }

    /// Minimal connector lengths for weak and exact specification, decided
    /// on symbol pairs.
    pub fn specification_gaps(&self) -> SpecificationGaps {
        let k = self.size;
        let mut weak: Option<usize> = Some(0);
        for start in 0..k {
            // dist[a] = least number of edges (>= 1) from start to a
            let mut dist = vec![usize::MAX; k];
            let mut queue = VecDeque::new();
            for &b in &self.successors[start] {
                if dist[b as usize] == usize::MAX {
                    dist[b as usize] = 1;
                    queue.push_back(b);
                }
            }
            while let Some(a) = queue.pop_front() {
                for &b in &self.successors[a as usize] {
                    if dist[b as usize] == usize::MAX {
                        dist[b as usize] = dist[a as usize] + 1;
                        queue.push_back(b);
                    }
                }
            }
            match dist.iter().max() {
                Some(&usize::MAX) => {
                    weak = None;
                    break;
                }
                Some(&d) => weak = weak.map(|w| w.max(d - 1)),
                None => {}
            }
        }
        let exact = if weak.is_some() && self.period() == 1 {
            self.primitivity_exponent().map(|e| e - 1)
        } else {
            None
        };
        SpecificationGaps {
            weak_p: weak,
            exact_p: exact,
        }
    }

    /// Period of an irreducible transition graph (gcd of cycle lengths).
    fn period(&self) -> usize {
        let k = self.size;
        let mut level = vec![usize::MAX; k];
        level[0] = 0;
        let mut queue = VecDeque::from([0 as Symbol]);
        while let Some(a) = queue.pop_front() {
            for &b in &self.successors[a as usize] {
                if level[b as usize] == usize::MAX {
                    level[b as usize] = level[a as usize] + 1;
                    queue.push_back(b);
                }
            }
        }
        let mut g = 0usize;
        for a in 0..k {
            for &b in &self.successors[a] {
                let diff = (level[a] + 1).abs_diff(level[b as usize]);
                g = gcd(g, diff);
            }
        }
        g
    }

    /// Least `r` with `A^r` strictly positive, for a primitive matrix.
    fn primitivity_exponent(&self) -> Option<usize> {
        let k = self.size;
        let words = k.div_ceil(64);
        let full = |set: &[u64]| {
            (0..k).all(|i| set[i / 64] >> (i % 64) & 1 == 1)
        };
        let mut succ_sets = vec![vec![0u64; words]; k];
        for a in 0..k {
            for &b in &self.successors[a] {
                succ_sets[a][b as usize / 64] |= 1 << (b as usize % 64);
            }
        }
        let mut reach = succ_sets.clone();
        let bound = (k - 1) * (k - 1) + 1;
        for r in 1..=bound {
            if reach.iter().all(|s| full(s)) {
                return Some(r);
            }
            let next: Vec<Vec<u64>> = reach
                .iter()
                .map(|set| {
                    let mut out = vec![0u64; words];
                    for a in 0..k {
                        if set[a / 64] >> (a % 64) & 1 == 1 {
                            for (o, s) in out.iter_mut().zip(&succ_sets[a]) {
                                *o |= *s;
                            }
                        }
                    }
                    out
                })
                .collect();
            reach = next;
        }
        None
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
