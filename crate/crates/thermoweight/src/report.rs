//! JSON renderings of library results.

use serde_json::{json, Value};
use thermoweight_core::equilibrium::{CylinderTable, GibbsReport, MixingReport, ObjectiveReport};
use thermoweight_core::{DwConstants, PressureBracket, SpecMode};

pub fn constants(k: &DwConstants) -> Value {
    json!({
        "p": k.p,
        "ln_c": k.c.ln(),
        "ln_gamma": k.gamma.ln(),
        "checked_length": k.checked_length,
        "mode": if k.mode == SpecMode::Weak { "weak" } else { "exact" },
        "certified": k.certified,
    })
}

pub fn bracket(b: &PressureBracket) -> Value {
    json!({
        "n": b.n,
        "lower": b.lower,
        "upper": b.upper,
        "width": b.width(),
        "width_bound": b.width_bound(),
        "scale": b.scale,
        "ln_partition_sum": b.log_partition,
        "constants": constants(&b.constants),
    })
}

pub fn word(w: &[u32]) -> String {
    w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn table(t: &CylinderTable) -> Value {
    let masses: Vec<Value> = t
        .masses()
        .iter()
        .enumerate()
        .map(|(r, m)| json!({ "word": word(&t.word(r)), "mass": m }))
        .collect();
    json!({
        "depth": t.depth(),
        "dropped_mass": t.normalization_error(),
        "masses": masses,
    })
}

pub fn objective(o: &ObjectiveReport) -> Value {
    let levels: Vec<Value> = o
        .levels
        .iter()
        .map(|l| {
            json!({
                "level": l.level,
                "block_entropy_rates": l.block,
                "conditional_entropies": l.conditional,
                "estimate": l.estimate(),
            })
        })
        .collect();
    json!({
        "depth": o.depth,
        "levels": levels,
        "potential_average": o.potential_average,
        "potential_increment": o.potential_increment,
        "upper": o.upper,
        "block_upper": o.block_upper,
        "estimator_gap": o.gap,
    })
}

pub fn gibbs(g: &GibbsReport) -> Value {
    let per: Vec<Value> = g
        .per_depth
        .iter()
        .map(|r| json!({ "depth": r.depth, "min_ratio": r.min, "max_ratio": r.max, "spread": r.spread() }))
        .collect();
    json!({ "per_depth": per, "worst_spread": g.worst_spread, "drifting": g.drifting })
}

pub fn mixing(m: &MixingReport) -> Value {
    let ratios: Vec<Value> = m.ratios.iter().map(|(g, r)| json!({ "gap": g, "ratio": r })).collect();
    json!({ "ratios": ratios, "min_ratio": m.min_ratio, "decaying": m.decaying })
}
