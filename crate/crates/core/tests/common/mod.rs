//! Random configurations and brute-force oracles shared by the integration
//! tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thermoweight_core::{FactorChain, Potential, Sft};

pub struct Config {
    pub label: String,
    pub chain: FactorChain,
    pub phi: Potential,
    pub n: usize,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// A random SFT on at most `q` symbols with no inessential symbols.
pub fn random_sft(rng: &mut ChaCha8Rng, q: usize) -> Sft {
    loop {
        let rows: Vec<Vec<u8>> = (0..q)
            .map(|_| (0..q).map(|_| u8::from(unit(rng) < 0.65)).collect())
            .collect();
        if let Ok(x) = Sft::from_rows(&rows) {
            return x;
        }
    }
}

/// Image of `x` under a random surjection onto `r` symbols, with the
/// projected transition relation.
pub fn random_factor(rng: &mut ChaCha8Rng, x: &Sft, r: usize) -> (Sft, Vec<u32>) {
    let r = r.min(x.size());
    let mut map: Vec<u32> = (0..x.size()).map(|i| if i < r { i as u32 } else { below(rng, r) as u32 }).collect();
    // shuffle so the first symbols are not always singletons
    for i in (1..map.len()).rev() {
        let j = below(rng, i + 1);
        map.swap(i, j);
    }
    let mut allowed = vec![false; r * r];
    for a in 0..x.size() as u32 {
        for &b in x.successors(a) {
            allowed[map[a as usize] as usize * r + map[b as usize] as usize] = true;
        }
    }
    (Sft::new(r, allowed).expect("image of an essential shift is essential"), map)
}

pub fn random_potential(rng: &mut ChaCha8Rng, x: &Sft) -> Potential {
    match below(rng, 4) {
        0 => Potential::constant(x.clone()),
        1 | 2 => {
            let w = 1 + below(rng, 3);
            Potential::locally_constant_with(x.clone(), w, |_| 4.0 * unit(rng) - 2.0).unwrap()
        }
        _ => {
            let mats = (0..x.size())
                .map(|_| (0..2).map(|_| (0..2).map(|_| if unit(rng) < 0.2 { 0.0 } else { 0.1 + unit(rng) }).collect()).collect())
                .collect();
            match Potential::matrix_product(x.clone(), mats) {
                Ok(p) => p,
                Err(_) => Potential::constant(x.clone()),
            }
        }
    }
}

/// Random chains of one to three levels with random potentials.
pub fn random_configs(seed: u64, count: usize) -> Vec<Config> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let q = 2 + below(&mut rng, 3);
        let top = random_sft(&mut rng, q);
        let k = 1 + below(&mut rng, 3);
        let mut levels = vec![top];
        let mut maps = Vec::new();
        for _ in 1..k {
            let last = levels.last().unwrap();
            let r = 1 + below(&mut rng, last.size().max(2) - 1);
            let (y, map) = random_factor(&mut rng, last, r);
            levels.push(y);
            maps.push(map);
        }
        let mut weights: Vec<f64> = (0..k).map(|_| 2.0 * unit(&mut rng)).collect();
        weights[0] += 0.2;
        let chain = FactorChain::new(levels, maps, weights).unwrap();
        let phi = random_potential(&mut rng, chain.level(0));
        let n = 2 + below(&mut rng, 7);
        out.push(Config { label: format!("random #{i} (k = {k}, n = {n})"), chain, phi, n });
    }
    out
}

/// Neumaier sum, kept separate from the library's.
pub fn careful_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in values {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// All words of `L_n(x)` in lexicographic order, by filtering `A^n`.
pub fn words(x: &Sft, n: usize) -> Vec<Vec<u32>> {
    let q = x.size() as u32;
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w: Vec<u32>| (0..q).map(move |s| [w.clone(), vec![s]].concat()))
            .filter(|w| w.len() < 2 || x.allows(w[w.len() - 2], w[w.len() - 1]))
            .collect();
    }
    out
}

/// Cesàro table by materializing every shifted copy of `eta` on `L_n` and
/// reading its depth-`d` cylinders, then renormalizing.
pub fn brute_cesaro(x: &Sft, n: usize, eta: &[f64], d: usize) -> HashMap<Vec<u32>, f64> {
    let all = words(x, n);
    assert_eq!(all.len(), eta.len());
    let mut parts: HashMap<Vec<u32>, Vec<f64>> = HashMap::new();
    for i in 0..=n - d {
        for (w, &v) in all.iter().zip(eta) {
            parts.entry(w[i..i + d].to_vec()).or_default().push(v / n as f64);
        }
    }
    let sums: HashMap<Vec<u32>, f64> = parts.into_iter().map(|(k, v)| (k, careful_sum(v))).collect();
    let total = careful_sum(sums.values().copied());
    sums.into_iter().map(|(k, v)| (k, v / total)).collect()
}

/// `f_{m,l}(I)` summed directly over the surroundings `A I B`.
pub fn brute_surrounding(x: &Sft, n: usize, table: &[f64], m: usize, word: &[u32]) -> f64 {
    careful_sum(
        words(x, n)
            .iter()
            .zip(table)
            .filter(|(w, _)| &w[m..m + word.len()] == word)
            .map(|(_, v)| *v),
    )
}

pub fn golden() -> Sft {
    Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap()
}

pub fn two_cycle() -> Sft {
    Sft::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap()
}

pub fn product_chain(a: (f64, f64)) -> FactorChain {
    FactorChain::new(vec![Sft::full_shift(3), Sft::full_shift(2)], vec![vec![0, 0, 1]], vec![a.0, a.1]).unwrap()
}

/// Parry masses of the golden mean shift on two-letter words, from the
/// Perron data of `[[1,1],[1,0]]`: `mu(ij) = u_i A_ij v_j / lambda` with
/// `u = v = (lambda, 1)` normalized so that `u . v = 1`.
pub fn golden_parry_pairs() -> [f64; 3] {
    let l = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = l * l + 1.0;
    let (u0, u1) = (l, 1.0);
    [u0 * u0 / (l * norm), u0 * u1 / (l * norm), u1 * u0 / (l * norm)]
}
