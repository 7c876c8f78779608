//! Partition sums, certified pressure brackets, and the fiber recursion that
//! folds a potential down a factor tower.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::logval::{ln_add, log_sum_exp, LogSum, LogValue};
use crate::potential::{estimate_constants, estimate_raw, DwConstants, Potential, PotentialKind, WordFunction};
use crate::symbolic::{Caps, FactorChain, FactorMap, SpecMode, Sft, Symbol, WordIndex};
use crate::{Error, Result};

/// An interval that contains a pressure (or dimension) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureBracket {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    /// `ln u_n` of the sequence the bracket was built from.
    pub log_partition: f64,
    /// Multiplier applied to both ends (`a_1 + ... + a_k` for weighted
    /// pressure, 1 otherwise).
    pub scale: f64,
    pub constants: DwConstants,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// A priori bound on the width:
    /// `scale * (2|ln c| + p|ln gamma| + ln(p+1) + p|upper/scale|) / n`.
    pub fn width_bound(&self) -> f64 {
        let k = &self.constants;
        let p = k.p as f64;
        let up = (self.upper / self.scale).abs();
        let raw = 2.0 * k.c.ln().abs() + p * k.gamma.ln().abs() + crate::math::ln(p + 1.0) + p * up;
        self.scale * raw / self.n as f64
    }

    /// The certified flag of the constants the bracket rests on.
    pub fn certified(&self) -> bool {
        self.constants.certified
    }
}

/// `u_1, ..., u_{n_max}` with `u_n = sum over L_n(X) of phi`.
///
/// Locally constant and constant potentials use a transfer recursion over
/// `(w-1)`-blocks; matrix potentials with unit power use the linear
/// transfer on (last symbol, row vector); powered matrix potentials are
/// enumerated.
pub fn u_sequence(phi: &Potential, n_max: usize, caps: &Caps) -> Result<Vec<LogValue>> {
    if n_max == 0 {
        return Err(Error::Depth("n_max must be at least 1".into()));
    }
    if let Some(model) = phi.local_model() {
        let host = phi.host();
        let b = model.block_len;
        let mut out = Vec::with_capacity(n_max);
        for n in 1..b.min(n_max + 1) {
            out.push(enumerated_sum(phi, n, caps)?);
        }
        if n_max < b {
            return Ok(out);
        }
        let nb = model.blocks.len();
        let mut fwd: Vec<f64> = model.init.clone();
        let finish = |fwd: &[f64]| -> LogValue {
            let terms: Vec<LogValue> = fwd
                .iter()
                .zip(&model.tail)
                .map(|(f, t)| if *f == f64::NEG_INFINITY { LogValue::ZERO } else { LogValue::from_ln(f + t) })
                .collect();
            log_sum_exp(&terms)
        };
        out.push(finish(&fwd));
        let _ = host;
        for _ in b + 1..=n_max {
            let mut next = vec![f64::NEG_INFINITY; nb];
            for (r, &f) in fwd.iter().enumerate() {
                if f == f64::NEG_INFINITY {
                    continue;
                }
                for &(_, nr, w) in &model.steps[r] {
                    if w == f64::NEG_INFINITY {
                        continue;
                    }
                    let slot = &mut next[nr as usize];
                    *slot = ln_add(*slot, f + w);
                }
            }
            fwd = next;
            out.push(finish(&fwd));
        }
        return Ok(out);
    }
    match phi.kind() {
        PotentialKind::MatrixProduct { matrices, power } if *power == 1.0 => {
            Ok(matrix_transfer(phi.host(), matrices, n_max))
        }
        _ => {
            let total: u128 = (1..=n_max).map(|n| phi.host().language_size(n)).fold(0, u128::saturating_add);
            caps.check_words("partition-sum enumeration", total)?;
            (1..=n_max).map(|n| enumerated_sum(phi, n, caps)).collect()
        }
    }
}

fn enumerated_sum(phi: &Potential, n: usize, caps: &Caps) -> Result<LogValue> {
    caps.check_words("partition-sum enumeration", phi.host().language_size(n))?;
    let mut acc = LogSum::default();
    phi.host().for_each_word(n, |w| acc.add(phi.phi_eval(w)));
    Ok(acc.value())
}

fn matrix_transfer(host: &Sft, matrices: &[crate::potential::Matrix], n_max: usize) -> Vec<LogValue> {
    let k = host.size();
    let dim = matrices[0].dim;
    // vecs[b]: sum over words ending in b of 1^T M_word, scaled by exp(-log_scale)
    let mut vecs: Vec<Vec<f64>> = (0..k)
        .map(|b| {
            let m = &matrices[b].data;
            (0..dim).map(|j| (0..dim).map(|i| m[i * dim + j]).sum()).collect()
        })
        .collect();
    let mut log_scale = 0.0;
    let mut out = Vec::with_capacity(n_max);
    let total = |vecs: &[Vec<f64>], log_scale: f64| {
        let s = crate::math::compensated_sum(vecs.iter().flat_map(|v| v.iter().copied()));
        if s == 0.0 {
            LogValue::ZERO
        } else {
            LogValue::from_ln(log_scale + crate::math::ln(s))
        }
    };
    out.push(total(&vecs, log_scale));
    for _ in 2..=n_max {
        let mut next = vec![vec![0.0; dim]; k];
        for b in 0..k {
            for &x in host.successors(b as Symbol) {
                let m = &matrices[x as usize].data;
                for (i, &v) in vecs[b].iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    for j in 0..dim {
                        next[x as usize][j] += v * m[i * dim + j];
                    }
                }
            }
        }
        let max = next.iter().flat_map(|v| v.iter().copied()).fold(0.0, f64::max);
        if max > 0.0 {
            next.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x /= max));
            log_scale += crate::math::ln(max);
        }
        vecs = next;
        out.push(total(&vecs, log_scale));
    }
    out
}

/// Certified bracket for `lim (1/n) ln u_n` from one term of the sequence:
///
/// * upper `(ln u_n - ln c) / n`, since `c u` is sub-multiplicative;
/// * lower `(ln u_n + ln c + p ln gamma - ln(p+1)) / (n+p)`, from
///   `u_{n+m+p} >= gamma^p c (p+1)^{-1} u_n u_m` (weak connectors), or
///   `(ln u_n + ln c) / (n+p)` with exact connectors.
pub fn pressure_bracket(u: &[LogValue], consts: &DwConstants, n: usize) -> Result<PressureBracket> {
    if n == 0 || n > u.len() {
        return Err(Error::Depth(format!("depth {n} outside the computed range 1..={}", u.len())));
    }
    bracket_from_log(u[n - 1].ln(), n, consts, 1.0)
}

pub(crate) fn bracket_from_log(log_un: f64, n: usize, consts: &DwConstants, scale: f64) -> Result<PressureBracket> {
    if consts.c.is_zero() || consts.gamma.is_zero() {
        return Err(Error::InvalidConstants(format!(
            "c = {:?}, gamma = {:?}; both must be positive",
            consts.c, consts.gamma
        )));
    }
    if log_un == f64::NEG_INFINITY {
        return Err(Error::DegeneratePotential(format!("partition sum vanishes at depth {n}")));
    }
    let lc = consts.c.ln().min(0.0);
    let lg = consts.gamma.ln().min(0.0);
    let p = consts.p as f64;
    let nf = n as f64;
    let upper = (log_un - lc) / nf;
    let lower = match consts.mode {
        SpecMode::Weak => (log_un + lc + p * lg - crate::math::ln(p + 1.0)) / (nf + p),
        SpecMode::Exact => (log_un + lc) / (nf + p),
    };
    let (mut lower, mut upper) = (lower * scale, upper * scale);
    if lower > upper {
        // only possible through rounding when the bracket collapses
        core::mem::swap(&mut lower, &mut upper);
    }
    Ok(PressureBracket {
        n,
        lower,
        upper,
        log_partition: log_un,
        scale,
        constants: *consts,
    })
}

/// Values of `phi^(i)` on `L_n(X_i)`, indexed by word rank.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberTable {
    /// 1-based level `i` of the tower the table lives on.
    pub level: usize,
    pub depth: usize,
    pub values: Vec<LogValue>,
}

/// What a fiber sum runs over.
#[derive(Debug, Clone, Copy)]
pub enum FiberSource<'a> {
    Potential(&'a Potential),
    Table(&'a FiberTable),
}

/// `phi^(i)(J) = (sum over the fiber of J of source^s)^t` for every
/// `J in L_n(target)`; empty fibers give 0.
pub fn fiber_potential(
    map: &FactorMap,
    source: FiberSource<'_>,
    s: f64,
    t: f64,
    n: usize,
    caps: &Caps,
) -> Result<FiberTable> {
    if !(s > 0.0 && s.is_finite() && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad exponents s = {s}, t = {t}")));
    }
    if n == 0 {
        return Err(Error::Depth("fiber depth must be at least 1".into()));
    }
    let target_len = map.target().language_size(n);
    caps.check_table("fiber table", target_len)?;
    let level = match source {
        FiberSource::Potential(phi) => {
            if phi.host() != map.source() {
                return Err(Error::InvalidArgument("potential is not hosted on the map's source".into()));
            }
            2
        }
        FiberSource::Table(tab) => {
            if tab.depth != n {
                return Err(Error::Depth(format!("source table has depth {}, expected {n}", tab.depth)));
            }
            tab.level + 1
        }
    };
    if let FiberSource::Potential(phi) = source {
        if let Some(model) = phi.local_model() {
            if n >= model.block_len {
                let values = fiber_transfer(map, model, s, t, n, caps)?;
                return Ok(FiberTable { level, depth: n, values });
            }
        }
    }
    let src_len = map.source().language_size(n);
    caps.check_words("fiber enumeration", src_len)?;
    if let FiberSource::Table(tab) = source {
        if tab.values.len() as u128 != src_len {
            return Err(Error::Depth(format!(
                "source table has {} entries, L_{n} of the source has {src_len}",
                tab.values.len()
            )));
        }
    }
    let index = map.target().word_index(n, caps)?;
    let mut buckets = vec![LogSum::default(); index.len()];
    let mut image: Vec<Symbol> = vec![0; n];
    let mut rank = 0usize;
    map.source().for_each_word(n, |w| {
        let v = match source {
            FiberSource::Potential(phi) => phi.phi_eval(w),
            FiberSource::Table(tab) => tab.values[rank],
        };
        rank += 1;
        if v.is_zero() {
            return;
        }
        for (o, &x) in image.iter_mut().zip(w) {
            *o = map.apply_symbol(x);
        }
        let r = index.rank(&image).expect("image of a legal word is legal");
        buckets[r].add(v.powf(s));
    });
    let values = buckets
        .iter()
        .map(|b| {
            let v = b.value();
            if v.is_zero() {
                v
            } else {
                LogValue::from_ln(v.ln() * t)
            }
        })
        .collect();
    Ok(FiberTable { level, depth: n, values })
}

/// Fiber sums of a locally constant potential by a transfer recursion over
/// source blocks, walking the target words in lexicographic order and
/// sharing the forward vector along common prefixes.
fn fiber_transfer(
    map: &FactorMap,
    model: &crate::potential::LocalModel,
    s: f64,
    t: f64,
    n: usize,
    caps: &Caps,
) -> Result<Vec<LogValue>> {
    let b = model.block_len;
    let tgt = map.target();
    let nb = model.blocks.len();
    let prefix_index = tgt.word_index(b, caps)?;
    // image rank of every source block
    let block_image: Vec<usize> = model
        .blocks
        .iter()
        .map(|blk| prefix_index.rank(&map.apply(blk)).expect("image of a legal block"))
        .collect();
    let mut by_prefix: Vec<Vec<usize>> = vec![Vec::new(); prefix_index.len()];
    for (r, &img) in block_image.iter().enumerate() {
        by_prefix[img].push(r);
    }
    // per target symbol: (from block, to block, weight) for source symbols mapping onto it
    let mut moves: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); tgt.size()];
    for (r, steps) in model.steps.iter().enumerate() {
        for &(x, nr, w) in steps {
            if w != f64::NEG_INFINITY {
                moves[map.apply_symbol(x) as usize].push((r as u32, nr, s * w));
            }
        }
    }
    let tail: Vec<f64> = model.tail.iter().map(|v| s * v).collect();
    let init: Vec<f64> = model.init.iter().map(|v| s * v).collect();

    let prefixes = tgt.language(b, caps)?;
    let subtree = |p: usize| -> Vec<LogValue> {
        let prefix = prefixes.get(p);
        let mut fwd = vec![f64::NEG_INFINITY; nb];
        for &r in &by_prefix[p] {
            fwd[r] = init[r];
        }
        let mut out = Vec::new();
        walk(tgt, &moves, &tail, t, nb, n - b, prefix[b - 1], &fwd, &mut out);
        out
    };

    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<LogValue>> = {
        use rayon::prelude::*;
        (0..prefixes.len()).into_par_iter().map(subtree).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<LogValue>> = (0..prefixes.len()).map(subtree).collect();

    Ok(chunks.concat())
}

#[allow(clippy::too_many_arguments)]
fn walk(
    tgt: &Sft,
    moves: &[Vec<(u32, u32, f64)>],
    tail: &[f64],
    t: f64,
    nb: usize,
    remaining: usize,
    last: Symbol,
    fwd: &[f64],
    out: &mut Vec<LogValue>,
) {
    if remaining == 0 {
        let mut acc = f64::NEG_INFINITY;
        for (f, tl) in fwd.iter().zip(tail) {
            if *f != f64::NEG_INFINITY {
                acc = ln_add(acc, f + tl);
            }
        }
        out.push(if acc == f64::NEG_INFINITY { LogValue::ZERO } else { LogValue::from_ln(acc * t) });
        return;
    }
    let mut next = vec![f64::NEG_INFINITY; nb];
    for &y in tgt.successors(last) {
        next.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        for &(from, to, w) in &moves[y as usize] {
            let f = fwd[from as usize];
            if f != f64::NEG_INFINITY {
                let slot = &mut next[to as usize];
                *slot = ln_add(*slot, f + w);
            }
        }
        walk(tgt, moves, tail, t, nb, remaining - 1, y, &next, out);
    }
}

/// All fiber tables `phi^(2), ..., phi^(k)` at one depth, plus the scalar
/// `phi^(k+1)(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedTables {
    pub depth: usize,
    /// `tables[j]` holds `phi^(j+2)` on `L_n(X_{j+2})`.
    pub tables: Vec<FiberTable>,
    /// `phi^(k+1)(n)`.
    pub top: LogValue,
}

impl FoldedTables {
    /// `phi^(i)` for `i >= 2`.
    pub fn level(&self, i: usize) -> &FiberTable {
        &self.tables[i - 2]
    }
}

/// Runs the fiber recursion down the whole chain at depth `n`.
pub fn fold_chain(chain: &FactorChain, phi: &Potential, n: usize, caps: &Caps) -> Result<FoldedTables> {
    if phi.host() != chain.level(0) {
        return Err(Error::InvalidArgument("potential must live on the top level X_1".into()));
    }
    if n == 0 {
        return Err(Error::Depth("depth must be at least 1".into()));
    }
    let k = chain.k();
    if k == 1 {
        let powered = phi.powered(1.0 / chain.weights()[0])?;
        let top = if let Some(model) = powered.local_model() {
            if n >= model.block_len {
                *u_sequence(&powered, n, caps)?.last().expect("n >= 1")
            } else {
                enumerated_sum(&powered, n, caps)?
            }
        } else {
            *u_sequence(&powered, n, caps)?.last().expect("n >= 1")
        };
        return Ok(FoldedTables { depth: n, tables: Vec::new(), top });
    }
    let mut tables: Vec<FiberTable> = Vec::with_capacity(k - 1);
    let a1 = chain.weights()[0];
    tables.push(fiber_potential(chain.map(0), FiberSource::Potential(phi), 1.0 / a1, a1, n, caps)?);
    for i in 2..k {
        let si = chain.partial_weight(i);
        let next = fiber_potential(
            chain.map(i - 1),
            FiberSource::Table(tables.last().expect("nonempty")),
            1.0 / si,
            si,
            n,
            caps,
        )?;
        tables.push(next);
    }
    let sk = chain.partial_weight(k);
    let mut acc = LogSum::default();
    for v in &tables.last().expect("k >= 2").values {
        acc.add(v.powf(1.0 / sk));
    }
    Ok(FoldedTables { depth: n, tables, top: acc.value() })
}

/// The folded top-level function `J -> phi^(k)(J)^{1/(a_1+...+a_k)}` on
/// `X_k`, tabulated for all depths up to some bound.
pub(crate) struct FoldedFunction {
    host: Sft,
    exponent: f64,
    per_depth: Vec<(WordIndex, Vec<LogValue>)>,
}

impl WordFunction for FoldedFunction {
    fn host(&self) -> &Sft {
        &self.host
    }

    fn log_eval(&self, word: &[Symbol]) -> LogValue {
        if word.is_empty() {
            return LogValue::ONE;
        }
        match self.per_depth.get(word.len()) {
            Some((index, values)) => index
                .rank(word)
                .map_or(LogValue::ZERO, |r| values[r].powf(self.exponent)),
            None => panic!("folded function tabulated only up to depth {}", self.per_depth.len() - 1),
        }
    }
}

impl FoldedFunction {
    pub(crate) fn build(chain: &FactorChain, phi: &Potential, max_depth: usize, caps: &Caps) -> Result<Self> {
        let k = chain.k();
        debug_assert!(k >= 2);
        let host = chain.level(k - 1).clone();
        let mut per_depth = Vec::with_capacity(max_depth + 1);
        per_depth.push((host.word_index(0, caps)?, vec![LogValue::ONE]));
        for d in 1..=max_depth {
            let folded = fold_chain(chain, phi, d, caps)?;
            let table = folded.tables.last().expect("k >= 2").values.clone();
            per_depth.push((host.word_index(d, caps)?, table));
        }
        Ok(FoldedFunction {
            host,
            exponent: 1.0 / chain.partial_weight(k),
            per_depth,
        })
    }
}

/// Options for [`weighted_pressure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureOptions {
    pub caps: Caps,
    pub mode: SpecMode,
    /// Word length up to which `c` and `gamma` are checked; chosen from the
    /// cost budget when `None`.
    pub constants_length: Option<usize>,
}

impl Default for PressureOptions {
    fn default() -> Self {
        PressureOptions {
            caps: Caps::default(),
            mode: SpecMode::Weak,
            constants_length: None,
        }
    }
}

/// Weighted pressure of a potential along a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPressure {
    pub bracket: PressureBracket,
    pub tables: FoldedTables,
}

impl WeightedPressure {
    pub fn constants(&self) -> &DwConstants {
        &self.bracket.constants
    }
}

const CONSTANTS_DEPTH_BUDGET: u128 = 200_000;
const CONSTANTS_PAIR_BUDGET: u128 = 4_000_000;

fn pair_cost(x: &Sft, len: usize) -> u128 {
    let words: u128 = (1..=len).map(|j| x.language_size(j)).fold(0, u128::saturating_add);
    words.saturating_mul(words)
}

fn auto_length_direct(x: &Sft, window: usize, p: usize) -> usize {
    let min = window.max(2);
    let mut best = min;
    for len in min..=(2 * window + p).max(8) {
        if pair_cost(x, len) <= CONSTANTS_PAIR_BUDGET {
            best = len;
        }
    }
    best
}

fn auto_length_folded(top: &Sft, bottom: &Sft, p: usize) -> usize {
    let mut best = 1;
    for len in 1..=6 {
        if bottom.language_size(2 * len + p) <= CONSTANTS_DEPTH_BUDGET && pair_cost(top, len) <= CONSTANTS_PAIR_BUDGET {
            best = len;
        }
    }
    best
}

fn connector_length(x: &Sft, mode: SpecMode) -> Result<usize> {
    let gaps = x.specification_gaps();
    match mode {
        SpecMode::Weak => gaps.weak_p,
        SpecMode::Exact => gaps.exact_p,
    }
    .ok_or_else(|| {
        Error::NoSpecification(format!(
            "the shift has no {} specification",
            if mode == SpecMode::Weak { "weak" } else { "exact" }
        ))
    })
}

/// `P^a(Phi)` bracketed at depth `n`: `(a_1 + ... + a_k)` times the pressure
/// of the folded sequence `phi^(k+1)(n)`.
///
/// For `k = 1` this is the plain pressure bracket of `phi^{1/a_1}` scaled
/// by `a_1`. For `k >= 2` the constants are estimated on the folded
/// function itself and are certified only when every level is a full shift
/// and `phi` is symbol-wise multiplicative.
pub fn weighted_pressure(chain: &FactorChain, phi: &Potential, n: usize, opts: &PressureOptions) -> Result<WeightedPressure> {
    let caps = &opts.caps;
    connector_length(chain.level(0), opts.mode)?;
    let k = chain.k();
    if k == 1 {
        let a1 = chain.weights()[0];
        let powered = phi.powered(1.0 / a1)?;
        let p = connector_length(powered.host(), opts.mode)?;
        let len = opts
            .constants_length
            .unwrap_or_else(|| auto_length_direct(powered.host(), powered.window(), p));
        let consts = estimate_constants(&powered, p, len, opts.mode)?;
        let u = u_sequence(&powered, n, caps)?;
        let mut bracket = pressure_bracket(&u, &consts, n)?;
        if a1 != 1.0 {
            bracket = bracket_from_log(u[n - 1].ln(), n, &consts, a1)?;
        }
        let tables = FoldedTables { depth: n, tables: Vec::new(), top: u[n - 1] };
        return Ok(WeightedPressure { bracket, tables });
    }
    let tables = fold_chain(chain, phi, n, caps)?;
    let top_level = chain.level(k - 1);
    let p = connector_length(top_level, opts.mode)?;
    let len = opts
        .constants_length
        .unwrap_or_else(|| auto_length_folded(top_level, chain.level(0), p));
    let folded = FoldedFunction::build(chain, phi, 2 * len + p, caps)?;
    let (c, gamma) = estimate_raw(&folded, p, len, opts.mode, caps)?;
    let certified = chain.levels().iter().all(|x| x.is_full_shift()) && phi.is_symbolwise();
    let consts = DwConstants {
        p,
        c,
        gamma,
        checked_length: len,
        mode: opts.mode,
        certified,
    };
    let bracket = bracket_from_log(tables.top.ln(), n, &consts, chain.partial_weight(k))?;
    Ok(WeightedPressure { bracket, tables })
}
