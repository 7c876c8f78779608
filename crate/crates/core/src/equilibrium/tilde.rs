use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::table::CylinderTable;
use crate::logval::LogValue;
use crate::math::{compensated_sum, CompensatedSum};
use crate::potential::Potential;
use crate::pressure::{weighted_pressure, FoldedTables, PressureOptions, WeightedPressure};
use crate::symbolic::{Caps, FactorChain, Sft, Symbol, WordIndex};
use crate::{Error, Result};

/// The normalized weight `phi~` on `L_n(X_1)`, keyed by word rank.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTildeTable {
    pub host: Sft,
    pub depth: usize,
    pub values: Vec<LogValue>,
}

impl PhiTildeTable {
    pub fn linear(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.linear()).collect()
    }

    /// `sum phi~`, which is 1 up to rounding.
    pub fn total(&self) -> f64 {
        compensated_sum(self.values.iter().map(|v| v.linear()))
    }
}

/// `phi~(I) = prod_{i<k} (phi^(i)(tau_{i-1} I) / phi^(i+1)(tau_i I))^{1/S_i}
///            * phi^(k)(tau_{k-1} I)^{1/S_k} / phi^(k+1)(n)`
/// with `phi^(1) = phi` and `S_i = a_1 + ... + a_i`.
///
/// For `k = 1` this is `phi(I)^{1/a_1} / u_n(phi^{1/a_1})`.
pub fn phi_tilde(chain: &FactorChain, phi: &Potential, tables: &FoldedTables, caps: &Caps) -> Result<PhiTildeTable> {
    let k = chain.k();
    let n = tables.depth;
    if tables.tables.len() != k - 1 {
        return Err(Error::Depth(format!("expected {} fiber tables, got {}", k - 1, tables.tables.len())));
    }
    for (j, t) in tables.tables.iter().enumerate() {
        let expect = chain.level(j + 1).language_size(n);
        if t.depth != n || t.values.len() as u128 != expect {
            return Err(Error::Depth(format!(
                "fiber table for level {} has depth {} and {} entries; expected depth {n} and {expect}",
                j + 2,
                t.depth,
                t.values.len()
            )));
        }
    }
    if phi.host() != chain.level(0) {
        return Err(Error::InvalidArgument("potential must live on the top level X_1".into()));
    }
    let x1 = chain.level(0);
    caps.check_table("phi~ table", x1.language_size(n))?;
    let top = tables.top.ln();
    let weights: Vec<f64> = (1..=k).map(|i| chain.partial_weight(i)).collect();
    let indices: Vec<WordIndex> = (1..k).map(|i| chain.level(i).word_index(n, caps)).collect::<Result<_>>()?;
    // images[i] holds tau_{i+1} I
    let mut images: Vec<Vec<Symbol>> = vec![vec![0; n]; k - 1];
    let mut values = Vec::with_capacity(x1.language_size(n) as usize);
    x1.for_each_word(n, |w| {
        let lphi = phi.phi_eval(w);
        if lphi.is_zero() {
            values.push(LogValue::ZERO);
            return;
        }
        let mut prev: &[Symbol] = w;
        for (i, img) in images.iter_mut().enumerate() {
            let map = chain.map(i);
            for (o, &x) in img.iter_mut().zip(prev) {
                *o = map.apply_symbol(x);
            }
            prev = img;
        }
        let mut acc = CompensatedSum::default();
        let mut upper = lphi.ln();
        for i in 0..k - 1 {
            let r = indices[i].rank(&images[i]).expect("image of a legal word");
            let lower = tables.tables[i].values[r].ln();
            acc.add((upper - lower) / weights[i]);
            upper = lower;
        }
        acc.add(upper / weights[k - 1]);
        acc.add(-top);
        values.push(LogValue::from_ln(acc.value()));
    });
    Ok(PhiTildeTable { host: x1.clone(), depth: n, values })
}

/// `marg[i][r]`: total weight of the length-`n` words whose window at
/// positions `i..i+d` has rank `r` in `L_d`, for `i = 0..=n-d`.
pub fn positional_marginals(host: &Sft, n: usize, values: &[f64], d: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || d > n {
        return Err(Error::Depth(format!("window length {d} outside 1..={n}")));
    }
    if values.len() as u128 != host.language_size(n) {
        return Err(Error::Depth(format!("{} values for L_{n} of size {}", values.len(), host.language_size(n))));
    }
    let index = host.word_index(d, &Caps::default())?;
    let mut acc = vec![vec![CompensatedSum::default(); index.len()]; n - d + 1];
    let mut rank = 0;
    host.for_each_word(n, |w| {
        let v = values[rank];
        rank += 1;
        if v == 0.0 {
            return;
        }
        for (i, row) in acc.iter_mut().enumerate() {
            let r = index.rank(&w[i..i + d]).expect("subword of a legal word");
            row[r].add(v);
        }
    });
    Ok(acc.into_iter().map(|row| row.into_iter().map(|a| a.value()).collect()).collect())
}

/// `mass(I) = (1/n) sum_{i=0}^{n-d} f_{i, n-d-i}(I)` for a weight table on
/// `L_n`; the `d - 1` shifts that would reach past depth `n` are dropped,
/// the result is renormalized, and the dropped share is recorded.
pub(crate) fn cesaro_from_values(host: &Sft, n: usize, values: &[f64], d: usize) -> Result<CylinderTable> {
    if d == 0 || 2 * d > n {
        return Err(Error::Depth(format!("Cesàro depth d = {d} needs 1 <= d <= n/2 with n = {n}")));
    }
    let marg = positional_marginals(host, n, values, d)?;
    let width = marg[0].len();
    let raw: Vec<f64> = (0..width)
        .map(|r| compensated_sum(marg.iter().map(|row| row[r])) / n as f64)
        .collect();
    let kept = compensated_sum(raw.iter().copied());
    let total = compensated_sum(values.iter().copied());
    let dropped = (total - kept).max(0.0);
    CylinderTable::normalized(host.clone(), d, raw, dropped)
}

/// Cesàro average of the shifted copies of `phi~` at depth `d`.
pub fn cesaro_measure(phi_tilde: &PhiTildeTable, d: usize) -> Result<CylinderTable> {
    cesaro_from_values(&phi_tilde.host, phi_tilde.depth, &phi_tilde.linear(), d)
}

/// Lower bounds for `f*(I) = sup_{m,l} f_{m,l}(I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTable {
    pub depth: usize,
    pub values: Vec<f64>,
}

/// `f*(I)` as the maximum of `f_{0,0}(I)` (the depth-`d` table) and
/// `f_{m,l}(I)` over `m + l = n - d` (from the depth-`n` table).
pub fn envelope(deep: &PhiTildeTable, shallow: &PhiTildeTable) -> Result<EnvelopeTable> {
    let (n, d) = (deep.depth, shallow.depth);
    if d == 0 || d + 2 > n {
        return Err(Error::Depth(format!("envelope needs 1 <= d <= n - 2, got d = {d}, n = {n}")));
    }
    if deep.host != shallow.host {
        return Err(Error::InvalidArgument("tables live on different shifts".into()));
    }
    let marg = positional_marginals(&deep.host, n, &deep.linear(), d)?;
    let values = shallow
        .linear()
        .into_iter()
        .enumerate()
        .map(|(r, f)| marg.iter().map(|row| row[r]).fold(f, f64::max))
        .collect();
    Ok(EnvelopeTable { depth: d, values })
}

/// Pressure, `phi~` and the Cesàro table of the weighted equilibrium state.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub pressure: WeightedPressure,
    pub phi_tilde: PhiTildeTable,
    pub measure: CylinderTable,
}

/// Runs pressure, `phi~` and the Cesàro average at depths `n` and `d`.
pub fn weighted_equilibrium(
    chain: &FactorChain,
    phi: &Potential,
    n: usize,
    d: usize,
    opts: &PressureOptions,
) -> Result<Equilibrium> {
    if d == 0 || 2 * d > n {
        return Err(Error::Depth(format!("Cesàro depth d = {d} needs 1 <= d <= n/2 with n = {n}")));
    }
    let pressure = weighted_pressure(chain, phi, n, opts)?;
    let phi_tilde = phi_tilde(chain, phi, &pressure.tables, &opts.caps)?;
    let measure = cesaro_measure(&phi_tilde, d)?;
    Ok(Equilibrium { pressure, phi_tilde, measure })
}

/// `phi~` at a given depth, folding the chain again.
pub fn phi_tilde_at(chain: &FactorChain, phi: &Potential, n: usize, caps: &Caps) -> Result<PhiTildeTable> {
    let tables = crate::pressure::fold_chain(chain, phi, n, caps)?;
    phi_tilde(chain, phi, &tables, caps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> Sft {
        Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    fn product_chain() -> FactorChain {
        FactorChain::new(vec![Sft::full_shift(3), Sft::full_shift(2)], vec![vec![0, 0, 1]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn phi_tilde_examples() {
        let caps = Caps::default();
        let g = FactorChain::single(golden(), 1.0).unwrap();
        let t = phi_tilde_at(&g, &Potential::constant(golden()), 3, &caps).unwrap();
        assert_eq!(t.values.len(), 5);
        for v in &t.values {
            assert!((v.linear() - 0.2).abs() < 1e-14);
        }
        let t = phi_tilde_at(&product_chain(), &Potential::constant(Sft::full_shift(3)), 1, &caps).unwrap();
        let r2 = 2f64.sqrt();
        let want = [(1.0 / r2) / (1.0 + r2), (1.0 / r2) / (1.0 + r2), 1.0 / (1.0 + r2)];
        for (v, w) in t.values.iter().zip(want) {
            assert!((v.linear() - w).abs() < 1e-12);
        }
        let bern = Potential::locally_constant(Sft::full_shift(2), 1, vec![0.3f64.ln(), 0.7f64.ln()]).unwrap();
        let t = phi_tilde_at(&FactorChain::single(Sft::full_shift(2), 1.0).unwrap(), &bern, 2, &caps).unwrap();
        for (v, w) in t.values.iter().zip([0.09, 0.21, 0.21, 0.49]) {
            assert!((v.linear() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_mismatch_is_rejected() {
        let caps = Caps::default();
        let chain = product_chain();
        let phi = Potential::constant(Sft::full_shift(3));
        let mut tables = crate::pressure::fold_chain(&chain, &phi, 3, &caps).unwrap();
        tables.tables[0].values.pop();
        assert!(matches!(phi_tilde(&chain, &phi, &tables, &caps), Err(Error::Depth(_))));
    }

    #[test]
    fn cesaro_examples() {
        let caps = Caps::default();
        let full = FactorChain::single(Sft::full_shift(2), 1.0).unwrap();
        let t = phi_tilde_at(&full, &Potential::constant(Sft::full_shift(2)), 10, &caps).unwrap();
        let m = cesaro_measure(&t, 2).unwrap();
        for v in m.masses() {
            assert!((v - 0.25).abs() < 1e-14);
        }
        assert!((m.normalization_error() - 0.1).abs() < 1e-12);
        assert!(matches!(cesaro_measure(&t, 6), Err(Error::Depth(_))));

        let t = phi_tilde_at(&product_chain(), &Potential::constant(Sft::full_shift(3)), 12, &caps).unwrap();
        let m = cesaro_measure(&t, 1).unwrap();
        let r2 = 2f64.sqrt();
        for (v, w) in m.masses().iter().zip([0.5 / (1.0 + r2) * r2, 0.5 / (1.0 + r2) * r2, 1.0 / (1.0 + r2)]) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn golden_cesaro_approaches_parry() {
        let caps = Caps::default();
        let g = FactorChain::single(golden(), 1.0).unwrap();
        let t = phi_tilde_at(&g, &Potential::constant(golden()), 16, &caps).unwrap();
        let m = cesaro_measure(&t, 2).unwrap();
        let parry00 = 1.0 / 5f64.sqrt();
        assert!((m.mass_of(&[0, 0]) - parry00).abs() < 0.03);
    }

    #[test]
    fn envelope_dominates() {
        let caps = Caps::default();
        let g = FactorChain::single(golden(), 1.0).unwrap();
        let phi = Potential::constant(golden());
        let deep = phi_tilde_at(&g, &phi, 12, &caps).unwrap();
        let shallow = phi_tilde_at(&g, &phi, 2, &caps).unwrap();
        let env = envelope(&deep, &shallow).unwrap();
        for (e, f) in env.values.iter().zip(shallow.linear()) {
            assert!(*e >= f);
        }
        assert!(matches!(envelope(&shallow, &deep), Err(Error::Depth(_))));
        // product weights: every f_{m,l} equals the product weight
        let chain = product_chain();
        let phi = Potential::constant(Sft::full_shift(3));
        let deep = phi_tilde_at(&chain, &phi, 6, &caps).unwrap();
        let shallow = phi_tilde_at(&chain, &phi, 2, &caps).unwrap();
        let env = envelope(&deep, &shallow).unwrap();
        for (e, f) in env.values.iter().zip(shallow.linear()) {
            assert!((e - f).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn phi_tilde_sums_to_one(
            vals in proptest::collection::vec(-2.0f64..2.0, 9),
            a in proptest::collection::vec(0.0f64..2.0, 2),
            n in 1usize..=7,
            w in 1usize..=2,
        ) {
            let x = Sft::from_rows(&[vec![1, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
            let size = if w == 1 { 3 } else { x.language_size(2) as usize };
            let phi = Potential::locally_constant(x.clone(), w, vals[..size].to_vec()).unwrap();
            let chain = FactorChain::new(vec![x, Sft::full_shift(2)], vec![vec![0, 1, 1]], vec![a[0] + 0.1, a[1]]).unwrap();
            let t = phi_tilde_at(&chain, &phi, n, &Caps::default()).unwrap();
            prop_assert!((t.total() - 1.0).abs() < 1e-10);
        }
    }
}
