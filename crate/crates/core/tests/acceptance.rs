//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use thermoweight_core::equilibrium::{
    cesaro_measure, conditional_equilibrium, mixing_diagnostic, phi_tilde_at, weighted_equilibrium, CylinderTable,
};
use thermoweight_core::oracle::{closed_form_full_shift, closed_form_weighted, random_candidates, variational_sweep};
use thermoweight_core::pressure::{weighted_pressure, PressureOptions};
use thermoweight_core::sponge::{kenyon_peres_weights, sponge_dimension, SpongeSpec};
use thermoweight_core::{Caps, FactorChain, Potential, SpecMode, Sft};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// 3^14 cylinders sit just above the default dense-table cap
fn roomy() -> PressureOptions {
    let mut opts = PressureOptions::default();
    opts.caps.table = 1 << 23;
    opts
}

fn bracket_of(chain: &FactorChain, phi: &Potential, n: usize) -> thermoweight_core::PressureBracket {
    weighted_pressure(chain, phi, n, &PressureOptions::default()).unwrap().bracket
}

fn full_shift_entropy() -> Outcome {
    let x = Sft::full_shift(2);
    let chain = FactorChain::single(x.clone(), 1.0).unwrap();
    let phi = Potential::constant(x);
    let ln2 = std::f64::consts::LN_2;
    let mut worst = 0.0f64;
    for n in 1..=20 {
        let b = bracket_of(&chain, &phi, n);
        worst = worst.max((b.lower - ln2).abs()).max((b.upper - ln2).abs());
    }
    ensure(worst <= 1e-12, || format!("bracket ends stray {worst:.3e} from log 2"))?;
    Ok(format!("both ends within {worst:.1e} of log 2 for n = 1..20"))
}

fn golden_mean_pressure() -> Outcome {
    let g = golden();
    let chain = FactorChain::single(g.clone(), 1.0).unwrap();
    let phi = Potential::constant(g);
    let target = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let b24 = bracket_of(&chain, &phi, 24);
    let b48 = bracket_of(&chain, &phi, 48);
    let b12 = bracket_of(&chain, &phi, 12);
    ensure(b24.contains(target, 0.0), || format!("[{}, {}] misses {target}", b24.lower, b24.upper))?;
    ensure(b24.width() <= 0.15, || format!("width {} at n = 24", b24.width()))?;
    ensure(b48.width() <= 0.6 * b24.width(), || format!("width(48) = {} vs width(24) = {}", b48.width(), b24.width()))?;
    ensure(b24.width() <= 0.6 * b12.width(), || format!("width(24) = {} vs width(12) = {}", b24.width(), b12.width()))?;
    Ok(format!(
        "n = 24: [{:.6}, {:.6}] width {:.4}; width(48)/width(24) = {:.3}",
        b24.lower,
        b24.upper,
        b24.width(),
        b48.width() / b24.width()
    ))
}

fn parry_error(n: usize) -> f64 {
    let g = golden();
    let chain = FactorChain::single(g.clone(), 1.0).unwrap();
    let t = phi_tilde_at(&chain, &Potential::constant(g), n, &Caps::default()).unwrap();
    let mu = cesaro_measure(&t, 2).unwrap();
    let parry = golden_parry_pairs();
    [[0, 0], [0, 1], [1, 0]]
        .iter()
        .zip(parry)
        .map(|(w, p)| (mu.mass_of(w) - p).abs())
        .fold(0.0, f64::max)
}

fn parry_recovery() -> Outcome {
    let (e10, e20) = (parry_error(10), parry_error(20));
    ensure(e20 <= 0.03, || format!("max error {e20} at n = 20"))?;
    ensure(e20 < e10, || format!("error did not drop: n = 10 gives {e10}, n = 20 gives {e20}"))?;
    Ok(format!("max |mass - Parry| = {e20:.4} at n = 20 (was {e10:.4} at n = 10); mass(00) target {:.6}", 1.0 / 5f64.sqrt()))
}

fn weighted_closed_form() -> Outcome {
    let chain = product_chain((1.0, 1.0));
    let phi = Potential::constant(Sft::full_shift(3));
    let closed = closed_form_full_shift(&[2, 1], (1.0, 1.0));
    let n = 14;
    let mut detail = String::new();
    for d in [1usize, 2] {
        let eq = weighted_equilibrium(&chain, &phi, n, d, &roomy()).unwrap();
        let b = eq.pressure.bracket;
        ensure(b.contains(2.0 * (2f64.sqrt() + 1.0).ln(), 1e-9), || format!("[{}, {}] misses 2 log(1+sqrt 2)", b.lower, b.upper))?;
        let symbols = eq.measure.prefix_marginal(1).unwrap();
        let tol = (d as f64 - 1.0) / n as f64 + 1e-6;
        let err = symbols
            .masses()
            .iter()
            .zip(&closed.weights)
            .map(|(m, w)| (m - w).abs())
            .fold(0.0, f64::max);
        ensure(err <= tol, || format!("d = {d}: symbol masses off by {err}"))?;
        if d == 1 {
            detail = format!("bracket [{:.6}, {:.6}], masses {:?}", b.lower, b.upper, symbols.masses());
        }
    }
    Ok(detail)
}

fn nested_closed_form(spec: &SpongeSpec) -> f64 {
    // level-2 symbols are the first two coordinates, level 3 the first one
    let a = kenyon_peres_weights(spec.bases());
    let mut by_pair: std::collections::BTreeMap<(u32, u32), usize> = Default::default();
    for d in spec.digits() {
        *by_pair.entry((d[0], d[1])).or_default() += 1;
    }
    let mut fibers: std::collections::BTreeMap<u32, Vec<f64>> = Default::default();
    for ((x, _), count) in by_pair {
        // the inner fold: a_1 ln N_j
        let inner = closed_form_full_shift(&[count], (a[0], 0.0)).pressure;
        fibers.entry(x).or_default().push(inner);
    }
    let fibers: Vec<Vec<f64>> = fibers.into_values().collect();
    closed_form_weighted(&fibers, (a[0] + a[1], a[2])).pressure
}

fn sponge_dimensions() -> Outcome {
    let spec = SpongeSpec::new(vec![2, 3], vec![vec![0, 0], vec![0, 1], vec![1, 2]], None).unwrap();
    let closed = (2f64.powf(2f64.ln() / 3f64.ln()) + 1.0).log2();
    let r = sponge_dimension(&spec, 18, 2, &PressureOptions::default()).unwrap();
    ensure(r.bracket.contains(closed, 1e-9), || format!("[{}, {}] misses {closed}", r.bracket.lower, r.bracket.upper))?;
    ensure(r.bracket.width() <= 0.1, || format!("width {}", r.bracket.width()))?;
    let digits = vec![
        vec![0, 0, 0],
        vec![0, 0, 1],
        vec![0, 0, 3],
        vec![0, 2, 1],
        vec![1, 0, 0],
        vec![1, 1, 2],
        vec![1, 1, 3],
        vec![1, 2, 0],
    ];
    let spec3 = SpongeSpec::new(vec![2, 3, 4], digits, None).unwrap();
    let oracle3 = nested_closed_form(&spec3);
    let mut opts = PressureOptions::default();
    opts.caps.table = 1 << 20;
    let r3 = sponge_dimension(&spec3, 8, 2, &opts).unwrap();
    ensure(r3.bracket.contains(oracle3, 1e-9), || format!("k = 3: [{}, {}] misses {oracle3}", r3.bracket.lower, r3.bracket.upper))?;
    Ok(format!(
        "(2,3): [{:.6}, {:.6}] vs {closed:.6}; (2,3,4): [{:.6}, {:.6}] vs nested {oracle3:.6}",
        r.bracket.lower, r.bracket.upper, r3.bracket.lower, r3.bracket.upper
    ))
}

fn normalization() -> Outcome {
    let configs = random_configs(2024, 50);
    let mut worst = 0.0f64;
    for c in &configs {
        let t = phi_tilde_at(&c.chain, &c.phi, c.n, &Caps::default()).map_err(|e| format!("{}: {e}", c.label))?;
        let err = (t.total() - 1.0).abs();
        ensure(err <= 1e-10, || format!("{}: sum is off by {err:.3e}", c.label))?;
        worst = worst.max(err);
    }
    Ok(format!("50 random configurations, worst |sum - 1| = {worst:.1e}"))
}

fn brute_force_equivalence() -> Outcome {
    let mut cases: Vec<(String, Sft, usize, Vec<f64>)> = Vec::new();
    for c in random_configs(77, 40) {
        let t = phi_tilde_at(&c.chain, &c.phi, c.n, &Caps::default()).unwrap();
        cases.push((c.label, t.host.clone(), c.n, t.linear()));
    }
    let g = golden();
    let t = phi_tilde_at(&FactorChain::single(g.clone(), 1.0).unwrap(), &Potential::constant(g), 20, &Caps::default()).unwrap();
    cases.push(("golden mean n = 20".into(), t.host.clone(), 20, t.linear()));
    let t = phi_tilde_at(&product_chain((1.0, 1.0)), &Potential::constant(Sft::full_shift(3)), 10, &Caps::default()).unwrap();
    cases.push(("product chain n = 10".into(), t.host.clone(), 10, t.linear()));
    let mut checked = 0;
    let mut worst = 0.0f64;
    for (label, host, n, eta) in &cases {
        if eta.len() > 100_000 {
            continue;
        }
        let tilde = thermoweight_core::equilibrium::PhiTildeTable {
            host: host.clone(),
            depth: *n,
            values: eta.iter().map(|v| thermoweight_core::LogValue::from_linear(*v)).collect(),
        };
        for d in 1..=n / 2 {
            let fast = cesaro_measure(&tilde, d).unwrap();
            let slow = brute_cesaro(host, *n, &tilde.linear(), d);
            for (r, m) in fast.masses().iter().enumerate() {
                let w = fast.word(r);
                let b = slow.get(&w).copied().unwrap_or(0.0);
                let scale = m.abs().max(b.abs());
                if scale > 0.0 {
                    let rel = (m - b).abs() / scale;
                    worst = worst.max(rel);
                    ensure(rel <= 1e-12, || format!("{label}, d = {d}, word {w:?}: {m} vs {b}"))?;
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (configuration, d) pairs agree, worst relative error {worst:.1e}"))
}

fn variational_dominance() -> Outcome {
    let g = golden();
    let x3 = Sft::full_shift(3);
    let sponge = SpongeSpec::new(vec![2, 3], vec![vec![0, 0], vec![0, 1], vec![1, 2]], None).unwrap();
    let sponge_chain = thermoweight_core::sponge::build_sponge_chain(&sponge, 8).unwrap();
    let configs: Vec<(&str, FactorChain, Potential)> = vec![
        ("full 2-shift", FactorChain::single(Sft::full_shift(2), 1.0).unwrap(), Potential::constant(Sft::full_shift(2))),
        ("golden mean", FactorChain::single(g.clone(), 1.0).unwrap(), Potential::constant(g)),
        ("product (1,1)", product_chain((1.0, 1.0)), Potential::constant(x3.clone())),
        ("product (0.6,1.7)", product_chain((0.6, 1.7)), Potential::constant(x3.clone())),
        (
            "3-shift with symbol weights",
            FactorChain::single(x3.clone(), 1.0).unwrap(),
            Potential::locally_constant(x3.clone(), 1, vec![0.4, -0.3, 0.1]).unwrap(),
        ),
        ("sponge (2,3)", sponge_chain, Potential::constant(x3)),
    ];
    let (n, d) = (12, 6);
    let mut lines = Vec::new();
    for (i, (label, chain, phi)) in configs.iter().enumerate() {
        let eq = weighted_equilibrium(chain, phi, n, d, &PressureOptions::default()).unwrap();
        let seed = 1000 + i as u64;
        let cands = random_candidates(chain.level(0), 1, 100, seed).unwrap();
        let r = variational_sweep(chain, phi, &cands, d, &eq.pressure.bracket, Some(&eq.measure), 1e-9).unwrap();
        ensure(r.dominated, || format!("{label}: a candidate reaches {} > upper {}", r.max_objective, eq.pressure.bracket.upper))?;
        ensure(r.attains == Some(true), || format!("{label}: equilibrium objective {:?} below lower {}", r.equilibrium, eq.pressure.bracket.lower))?;
        lines.push(format!("{label} max {:.4} <= {:.4}", r.max_objective, eq.pressure.bracket.upper));
    }
    Ok(lines.join("; "))
}

fn conditional_case() -> Outcome {
    let map = product_chain((1.0, 0.0)).map(0).clone();
    let (n, d) = (14, 3);
    let nu = CylinderTable::uniform(Sft::full_shift(2), n).unwrap();
    let r = conditional_equilibrium(&map, &Potential::constant(Sft::full_shift(3)), &nu, d, &roomy().caps).unwrap();
    let symbols = r.measure.prefix_marginal(1).unwrap();
    let tol = (d as f64 - 1.0) / n as f64;
    let err = symbols
        .masses()
        .iter()
        .zip([0.25, 0.25, 0.5])
        .map(|(m, w)| (m - w).abs())
        .fold(0.0, f64::max);
    ensure(err <= tol, || format!("symbol masses off by {err}"))?;
    ensure(r.gap <= 0.02, || format!("estimator gap {}", r.gap))?;
    ensure(r.holds(1e-9), || format!("|{} - {}| exceeds gap {}", r.lhs, r.rhs, r.gap))?;
    Ok(format!("lhs {:.6}, rhs {:.6}, gap {:.1e}, symbol error {err:.1e}", r.lhs, r.rhs, r.gap))
}

fn mixing() -> Outcome {
    let mut lines = Vec::new();
    for (label, x) in [("2-cycle", two_cycle()), ("golden mean", golden())] {
        let chain = FactorChain::single(x.clone(), 1.0).unwrap();
        let t = phi_tilde_at(&chain, &Potential::constant(x), 24, &Caps::default()).unwrap();
        let mu = cesaro_measure(&t, 11).unwrap();
        let (a, b): (&[u32], &[u32]) = if label == "2-cycle" { (&[0], &[0]) } else { (&[0], &[1]) };
        let r = mixing_diagnostic(&mu, a, b, 1, 2..=8, SpecMode::Weak).unwrap();
        ensure(r.min_ratio >= 0.5 && !r.decaying, || format!("{label}: min ratio {}, decaying {}", r.min_ratio, r.decaying))?;
        lines.push(format!("{label} min {:.4}", r.min_ratio));
    }
    let x = Sft::full_shift(2);
    let bern = Potential::locally_constant(x.clone(), 1, vec![0.3f64.ln(), 0.7f64.ln()]).unwrap();
    let t = phi_tilde_at(&FactorChain::single(x, 1.0).unwrap(), &bern, 20, &Caps::default()).unwrap();
    let mu = cesaro_measure(&t, 10).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in [([0u32], [1u32]), ([1], [1])] {
        let r = mixing_diagnostic(&mu, &a, &b, 0, 2..=8, SpecMode::Weak).unwrap();
        worst = r.ratios.iter().map(|(_, q)| (q - 1.0).abs()).fold(worst, f64::max);
    }
    let t = phi_tilde_at(&product_chain((1.0, 1.0)), &Potential::constant(Sft::full_shift(3)), 12, &Caps::default()).unwrap();
    let mu = cesaro_measure(&t, 6).unwrap();
    let r = mixing_diagnostic(&mu, &[0], &[2], 0, 2..=4, SpecMode::Weak).unwrap();
    worst = r.ratios.iter().map(|(_, q)| (q - 1.0).abs()).fold(worst, f64::max);
    ensure(worst <= 1e-9, || format!("Bernoulli ratios stray {worst:.3e} from 1"))?;
    lines.push(format!("Bernoulli |ratio - 1| <= {worst:.1e}"));
    Ok(lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 full-shift entropy", full_shift_entropy),
        ("2 golden-mean pressure", golden_mean_pressure),
        ("3 Parry-measure recovery", parry_recovery),
        ("4 weighted closed form", weighted_closed_form),
        ("5 Bedford-McMullen dimension", sponge_dimensions),
        ("6 normalization", normalization),
        ("7 brute-force equivalence", brute_force_equivalence),
        ("8 variational dominance", variational_dominance),
        ("9 conditional equilibrium", conditional_case),
        ("10 mixing diagnostic", mixing),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {why}");
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
