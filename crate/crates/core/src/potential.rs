//! Sub-multiplicative word potentials and their `D_w(X, p)` constants.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::logval::LogValue;
use crate::symbolic::{Caps, SpecMode, Sft, Symbol, WordIndex, WordList};
use crate::{Error, Result};

/// A square nonnegative matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "matrix of dimension {dim} needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("matrix entries must be finite and nonnegative, got {v}")));
        }
        Ok(Matrix { dim, data })
    }

    fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix rows must have equal length".into()));
        }
        Matrix::new(dim, rows.concat())
    }
}

/// How a potential is presented.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `phi(I) = 1` on every legal word.
    Constant,
    /// `phi(I) = sup exp(S_n f)` over the cylinder of `I`, where `f` reads
    /// `window` coordinates. `table` holds `f` in log units, indexed by rank
    /// in `L_window(host)`.
    LocallyConstant { window: usize, table: Vec<f64> },
    /// `phi(I) = ||M_{i_1} ... M_{i_n}||^power` with the entry-sum norm.
    MatrixProduct { matrices: Vec<Matrix>, power: f64 },
}

/// A sub-multiplicative function on the language of `host`.
#[derive(Debug, Clone)]
pub struct Potential {
    host: Sft,
    kind: PotentialKind,
    local: Option<LocalModel>,
}

/// Transfer structure of a locally constant potential over blocks of length
/// `b = max(1, w - 1)`.
#[derive(Debug, Clone)]
pub(crate) struct LocalModel {
    pub block_len: usize,
    pub blocks: WordList,
    pub block_index: WordIndex,
    /// log weight of the windows lying inside a block (nonzero only for w = 1)
    pub init: Vec<f64>,
    /// per block: (appended symbol, next block rank, log weight of new window)
    pub steps: Vec<Vec<(Symbol, u32, f64)>>,
    /// per block: log of the best completion of the windows starting in it
    pub tail: Vec<f64>,
}

impl LocalModel {
    fn build(host: &Sft, window: usize, table: &[f64], window_index: &WordIndex, caps: &Caps) -> Result<Self> {
        let block_len = window.saturating_sub(1).max(1);
        let blocks = host.language(block_len, caps)?;
        let block_index = host.word_index(block_len, caps)?;
        let nb = blocks.len();
        let mut init = vec![0.0; nb];
        let mut steps = vec![Vec::new(); nb];
        let mut tail = vec![0.0; nb];
        let mut buf: Vec<Symbol> = Vec::with_capacity(window + block_len);
        for r in 0..nb {
            let block = blocks.get(r);
            let last = block[block_len - 1];
            if window == 1 {
                init[r] = table[block[0] as usize];
            }
            for &x in host.successors(last) {
                buf.clear();
                buf.extend_from_slice(block);
                buf.push(x);
                let (next, weight) = if window == 1 {
                    (x, table[x as usize])
                } else {
                    let wr = window_index.rank(&buf).expect("legal window");
                    let next = block_index.rank(&buf[1..]).expect("legal block") as Symbol;
                    (next, table[wr])
                };
                steps[r].push((x, next, weight));
            }
            if window >= 2 {
                tail[r] = best_completion(host, table, window_index, block, window - 1, window - 1);
            }
        }
        Ok(LocalModel {
            block_len,
            blocks,
            block_index,
            init,
            steps,
            tail,
        })
    }

    fn step(&self, block: usize, x: Symbol) -> Option<(u32, f64)> {
        self.steps[block]
            .iter()
            .find(|(s, _, _)| *s == x)
            .map(|&(_, next, w)| (next, w))
    }
}

/// `max` over legal extensions `E` (length `ext`) of `prefix` of the sum of
/// `f` over the first `count` windows of `prefix E`.
fn best_completion(host: &Sft, table: &[f64], index: &WordIndex, prefix: &[Symbol], ext: usize, count: usize) -> f64 {
    let w = index.word_len();
    let mut best = f64::NEG_INFINITY;
    let mut buf: Vec<Symbol> = prefix.to_vec();
    fn go(
        host: &Sft,
        table: &[f64],
        index: &WordIndex,
        buf: &mut Vec<Symbol>,
        remaining: usize,
        count: usize,
        w: usize,
        best: &mut f64,
    ) {
        if remaining == 0 {
            let mut total = 0.0;
            for t in 0..count {
                let r = index.rank(&buf[t..t + w]).expect("legal window");
                total += table[r];
            }
            if total > *best {
                *best = total;
            }
            return;
        }
        let last = *buf.last().expect("nonempty prefix");
        for &x in host.successors(last) {
            buf.push(x);
            go(host, table, index, buf, remaining - 1, count, w, best);
            buf.pop();
        }
    }
    go(host, table, index, &mut buf, ext, count, w, &mut best);
    best
}

impl Potential {
    pub fn constant(host: Sft) -> Self {
        let caps = Caps::default();
        let index = host.word_index(1, &caps).expect("alphabet fits");
        let zeros = vec![0.0; host.size()];
        let local = LocalModel::build(&host, 1, &zeros, &index, &caps).expect("alphabet fits");
        Potential {
            host,
            kind: PotentialKind::Constant,
            local: Some(local),
        }
    }

    /// `table[rank]` holds `f` (natural log units) on `L_window(host)`.
    pub fn locally_constant(host: Sft, window: usize, table: Vec<f64>) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        let caps = Caps::default();
        let index = host.word_index(window, &caps)?;
        if table.len() != index.len() {
            return Err(Error::InvalidArgument(format!(
                "window {window} needs {} table entries (one per legal word), got {}",
                index.len(),
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| v.is_nan() || **v == f64::INFINITY) {
            return Err(Error::InvalidArgument(format!("table entries must be finite or -inf, got {v}")));
        }
        let local = LocalModel::build(&host, window, &table, &index, &caps)?;
        Ok(Potential {
            host,
            kind: PotentialKind::LocallyConstant { window, table },
            local: Some(local),
        })
    }

    /// Locally constant potential from a closure over legal windows.
    pub fn locally_constant_with<F: FnMut(&[Symbol]) -> f64>(host: Sft, window: usize, mut f: F) -> Result<Self> {
        let words = host.language(window, &Caps::default())?;
        let table = words.iter().map(&mut f).collect();
        Potential::locally_constant(host, window, table)
    }

    /// One nonnegative matrix per symbol of `host`.
    pub fn matrix_product(host: Sft, matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if matrices.len() != host.size() {
            return Err(Error::InvalidArgument(format!(
                "need one matrix per symbol ({}), got {}",
                host.size(),
                matrices.len()
            )));
        }
        let matrices = matrices.iter().map(|m| Matrix::from_rows(m)).collect::<Result<Vec<_>>>()?;
        let dim = matrices[0].dim;
        if matrices.iter().any(|m| m.dim != dim) {
            return Err(Error::InvalidArgument("all matrices must share one dimension".into()));
        }
        Ok(Potential {
            host,
            kind: PotentialKind::MatrixProduct { matrices, power: 1.0 },
            local: None,
        })
    }

    /// `phi^s` for `s > 0`.
    pub fn powered(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent must be positive, got {s}")));
        }
        if s == 1.0 {
            return Ok(self.clone());
        }
        match &self.kind {
            PotentialKind::Constant => Ok(self.clone()),
            PotentialKind::LocallyConstant { window, table } => {
                Potential::locally_constant(self.host.clone(), *window, table.iter().map(|v| v * s).collect())
            }
            PotentialKind::MatrixProduct { matrices, power } => Ok(Potential {
                host: self.host.clone(),
                kind: PotentialKind::MatrixProduct {
                    matrices: matrices.clone(),
                    power: power * s,
                },
                local: None,
            }),
        }
    }

    pub fn host(&self) -> &Sft {
        &self.host
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Number of coordinates `f` reads; 1 for constant and matrix potentials.
    pub fn window(&self) -> usize {
        match &self.kind {
            PotentialKind::LocallyConstant { window, .. } => *window,
            _ => 1,
        }
    }

    pub(crate) fn local_model(&self) -> Option<&LocalModel> {
        self.local.as_ref()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::Constant)
    }

    /// True when `phi` is multiplicative over symbols (constant or window 1).
    pub fn is_symbolwise(&self) -> bool {
        matches!(
            self.kind,
            PotentialKind::Constant | PotentialKind::LocallyConstant { window: 1, .. }
        )
    }

    /// Exact value of `phi(I)`; illegal words get zero and `phi(empty) = 1`.
    pub fn phi_eval(&self, word: &[Symbol]) -> LogValue {
        if word.is_empty() {
            return LogValue::ONE;
        }
        if !self.host.is_legal(word) {
            return LogValue::ZERO;
        }
        match &self.kind {
            PotentialKind::Constant => LogValue::ONE,
            PotentialKind::LocallyConstant { window, table } => {
                let model = self.local.as_ref().expect("local model");
                LogValue::from_ln(eval_local(&self.host, model, *window, table, word))
            }
            PotentialKind::MatrixProduct { matrices, power } => {
                let v = matrix_word_norm(matrices, word);
                if v == f64::NEG_INFINITY {
                    LogValue::ZERO
                } else {
                    LogValue::from_ln(v * power)
                }
            }
        }
    }
}

fn eval_local(host: &Sft, model: &LocalModel, window: usize, table: &[f64], word: &[Symbol]) -> f64 {
    let n = word.len();
    let b = model.block_len;
    if n < b {
        let caps = Caps::default();
        let index = host.word_index(window, &caps).expect("window index");
        return best_completion(host, table, &index, word, window - 1, n);
    }
    let mut block = model.block_index.rank(&word[..b]).expect("legal block");
    let mut total = model.init[block];
    for &x in &word[b..] {
        let (next, w) = model.step(block, x).expect("legal step");
        total += w;
        block = next as usize;
    }
    total + model.tail[block]
}

/// `ln(1^T M_{w_1} ... M_{w_n} 1)`, rescaling at each step.
pub(crate) fn matrix_word_norm(matrices: &[Matrix], word: &[Symbol]) -> f64 {
    let dim = matrices[0].dim;
    let mut row = vec![1.0f64; dim];
    let mut next = vec![0.0f64; dim];
    let mut log_scale = 0.0;
    for &s in word {
        let m = &matrices[s as usize];
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &r) in row.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for (j, out) in next.iter_mut().enumerate() {
                *out += r * m.data[i * dim + j];
            }
        }
        let max = next.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return f64::NEG_INFINITY;
        }
        for (r, v) in row.iter_mut().zip(&next) {
            *r = v / max;
        }
        log_scale += crate::math::ln(max);
    }
    log_scale + crate::math::ln(crate::math::compensated_sum(row.iter().copied()))
}

/// Anything that assigns a nonnegative weight to the words of an SFT.
pub trait WordFunction: Sync {
    fn host(&self) -> &Sft;
    fn log_eval(&self, word: &[Symbol]) -> LogValue;
}

impl WordFunction for Potential {
    fn host(&self) -> &Sft {
        &self.host
    }

    fn log_eval(&self, word: &[Symbol]) -> LogValue {
        self.phi_eval(word)
    }
}

/// Finite-depth estimates of the `D_w(X, p)` constants of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwConstants {
    pub p: usize,
    /// Sub-multiplicativity and connector constant, in `(0, 1]`.
    pub c: LogValue,
    /// One-symbol extension constant, in `(0, 1]`.
    pub gamma: LogValue,
    pub checked_length: usize,
    pub mode: SpecMode,
    /// True when the finite-depth minima are provably the true constants.
    pub certified: bool,
}

/// Estimates `c` and `gamma` over all words of length at most `max_len`.
///
/// `c` is the smaller of `min phi(I) phi(J) / phi(IJ)` over splits with
/// `|IJ| <= max_len` and `min max_K phi(IKJ) / (phi(I) phi(J))` over pairs
/// with `|I|, |J| <= max_len`; `gamma` is the smaller one-symbol extension
/// ratio. Both are capped at 1. Locally constant potentials are certified
/// once `max_len >= 2w + p`, because their defects only depend on blocks of
/// length `w - 1` at the junction.
pub fn estimate_constants(phi: &Potential, p: usize, max_len: usize, mode: SpecMode) -> Result<DwConstants> {
    let gaps = phi.host.specification_gaps();
    let needed = match mode {
        SpecMode::Weak => gaps.weak_p,
        SpecMode::Exact => gaps.exact_p,
    };
    match needed {
        Some(q) if q <= p => {}
        Some(q) => {
            return Err(Error::InvalidArgument(format!(
                "connector length {p} is below the specification gap {q} of the host"
            )))
        }
        None => {
            return Err(Error::NoSpecification(format!(
                "host has no {} specification",
                if mode == SpecMode::Weak { "weak" } else { "exact" }
            )))
        }
    }
    let w = phi.window();
    if max_len < w.max(2) {
        return Err(Error::InvalidArgument(format!(
            "checked length {max_len} must be at least max(2, window = {w})"
        )));
    }
    if let PotentialKind::MatrixProduct { matrices, .. } = &phi.kind {
        check_product_semigroup(&phi.host, matrices, max_len)?;
    }
    let (c, gamma) = estimate_raw(phi, p, max_len, mode, &Caps::default())?;
    let certified = match phi.kind {
        PotentialKind::Constant => true,
        PotentialKind::LocallyConstant { window, .. } => max_len >= 2 * window + p,
        PotentialKind::MatrixProduct { .. } => false,
    };
    Ok(DwConstants {
        p,
        c,
        gamma,
        checked_length: max_len,
        mode,
        certified,
    })
}

fn check_product_semigroup(host: &Sft, matrices: &[Matrix], max_len: usize) -> Result<()> {
    let dim = matrices[0].dim;
    let caps = Caps::default();
    for n in 1..=max_len {
        let words = host.language(n, &caps)?;
        for word in words.iter() {
            let mut prod = matrices[word[0] as usize].data.clone();
            for &s in &word[1..] {
                let m = &matrices[s as usize].data;
                let mut out = vec![0.0; dim * dim];
                for i in 0..dim {
                    for k in 0..dim {
                        let a = prod[i * dim + k];
                        if a != 0.0 {
                            for j in 0..dim {
                                out[i * dim + j] += a * m[k * dim + j];
                            }
                        }
                    }
                }
                let max = out.iter().cloned().fold(0.0, f64::max);
                if max > 0.0 {
                    out.iter_mut().for_each(|v| *v /= max);
                }
                prod = out;
            }
            let zero_row = (0..dim).any(|i| (0..dim).all(|j| prod[i * dim + j] == 0.0));
            let zero_col = (0..dim).any(|j| (0..dim).all(|i| prod[i * dim + j] == 0.0));
            if zero_row || zero_col {
                return Err(Error::DegeneratePotential(format!(
                    "matrix product along {word:?} has a zero {}",
                    if zero_row { "row" } else { "column" }
                )));
            }
        }
    }
    Ok(())
}

/// Raw finite-depth minima for any word function; returns `(c, gamma)`.
pub(crate) fn estimate_raw(
    f: &dyn WordFunction,
    p: usize,
    max_len: usize,
    mode: SpecMode,
    caps: &Caps,
) -> Result<(LogValue, LogValue)> {
    let host = f.host();
    let mut by_len: Vec<(WordList, WordIndex, Vec<f64>)> = Vec::with_capacity(max_len + 1);
    for n in 0..=max_len {
        let words = host.language(n, caps)?;
        let index = host.word_index(n, caps)?;
        let values = words.iter().map(|w| f.log_eval(w).ln()).collect();
        by_len.push((words, index, values));
    }
    if by_len[max_len].2.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::DegeneratePotential(format!(
            "potential vanishes on every word of length {max_len}"
        )));
    }
    let lookup = |w: &[Symbol]| -> f64 {
        let (_, index, values) = &by_len[w.len()];
        index.rank(w).map_or(f64::NEG_INFINITY, |r| values[r])
    };

    let mut c = 0.0f64;
    // condition (1): phi(IJ) <= c^{-1} phi(I) phi(J)
    for n in 2..=max_len {
        let (words, _, values) = &by_len[n];
        for (r, w) in words.iter().enumerate() {
            let v = values[r];
            if v == f64::NEG_INFINITY {
                continue;
            }
            for s in 1..n {
                let ratio = lookup(&w[..s]) + lookup(&w[s..]) - v;
                c = c.min(ratio);
            }
        }
    }

    // connectors between symbol pairs
    let k = host.size();
    let lengths: Vec<usize> = match mode {
        SpecMode::Weak => (0..=p).collect(),
        SpecMode::Exact => vec![p],
    };
    let mut connectors: Vec<Vec<Vec<Symbol>>> = vec![Vec::new(); k * k];
    for &len in &lengths {
        let inner = host.language(len, caps)?;
        for beta in 0..k as Symbol {
            for alpha in 0..k as Symbol {
                for kw in inner.iter() {
                    let ok = if kw.is_empty() {
                        host.allows(beta, alpha)
                    } else {
                        host.allows(beta, kw[0]) && host.allows(kw[len - 1], alpha)
                    };
                    if ok {
                        connectors[beta as usize * k + alpha as usize].push(kw.to_vec());
                    }
                }
            }
        }
    }
    // condition (2): some K with phi(IKJ) >= c phi(I) phi(J)
    let mut buf: Vec<Symbol> = Vec::with_capacity(2 * max_len + p);
    for ni in 1..=max_len {
        let (wi, _, vi) = &by_len[ni];
        for (ri, i_word) in wi.iter().enumerate() {
            if vi[ri] == f64::NEG_INFINITY {
                continue;
            }
            for nj in 1..=max_len {
                let (wj, _, vj) = &by_len[nj];
                for (rj, j_word) in wj.iter().enumerate() {
                    if vj[rj] == f64::NEG_INFINITY {
                        continue;
                    }
                    let beta = i_word[ni - 1] as usize;
                    let alpha = j_word[0] as usize;
                    let mut best = f64::NEG_INFINITY;
                    for kw in &connectors[beta * k + alpha] {
                        buf.clear();
                        buf.extend_from_slice(i_word);
                        buf.extend_from_slice(kw);
                        buf.extend_from_slice(j_word);
                        let v = f.log_eval(&buf).ln();
                        best = best.max(v - vi[ri] - vj[rj]);
                    }
                    c = c.min(best);
                }
            }
        }
    }

    let mut gamma = 0.0f64;
    for n in 0..max_len {
        let (words, _, values) = &by_len[n];
        for (r, w) in words.iter().enumerate() {
            let v = values[r];
            if v == f64::NEG_INFINITY {
                continue;
            }
            let mut left = f64::NEG_INFINITY;
            let mut right = f64::NEG_INFINITY;
            buf.clear();
            buf.push(0);
            buf.extend_from_slice(w);
            for i in 0..k as Symbol {
                if n > 0 && !host.allows(i, w[0]) {
                    continue;
                }
                buf[0] = i;
                left = left.max(lookup(&buf) - v);
            }
            buf.clear();
            buf.extend_from_slice(w);
            buf.push(0);
            for j in 0..k as Symbol {
                if n > 0 && !host.allows(w[n - 1], j) {
                    continue;
                }
                buf[n] = j;
                right = right.max(lookup(&buf) - v);
            }
            gamma = gamma.min(left.min(right));
        }
    }
    Ok((LogValue::from_ln(c), LogValue::from_ln(gamma)))
}
