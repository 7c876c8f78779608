use std::io::Write;

use serde_json::{json, Value};
use thermoweight_core::equilibrium::{
    cesaro_measure, conditional_equilibrium, entropy_and_objective, gibbs_diagnostic, gibbs_ratios, mixing_diagnostic,
    phi_tilde_at, weighted_equilibrium, CylinderTable,
};
use thermoweight_core::oracle::{closed_form_full_shift, random_candidates, variational_sweep};
use thermoweight_core::pressure::{weighted_pressure, PressureOptions};
use thermoweight_core::sponge::{build_sponge_chain, kenyon_peres_weights, mcmullen_oracle, sponge_dimension};
use thermoweight_core::symbolic::validate_chain;
use thermoweight_core::{FactorChain, Potential};

use crate::job::{Command, JobSpec};
use crate::report;
use crate::Failure;

/// A finished job: the JSON report and the cylinder table worth exporting.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub table: Option<CylinderTable>,
}

fn check_depths(cmd: Command, n: usize, d: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::Invalid("depth n must be at least 1".into()));
    }
    let needs_d = matches!(cmd, Command::Equilibrium | Command::Conditional | Command::Dimension | Command::Oracle);
    if needs_d && (d == 0 || 2 * d > n) {
        return Err(Failure::Invalid(format!("depth d = {d} must satisfy 1 <= d <= n/2 with n = {n}")));
    }
    Ok(())
}

fn options(job: &JobSpec) -> PressureOptions {
    PressureOptions { caps: job.caps(), mode: job.mode(), constants_length: None }
}

/// Runs one job; the report echoes the job with the command filled in.
pub fn run(job: &JobSpec, cmd: Command) -> Result<Outcome, Failure> {
    let (n, d) = (job.depths.n, job.depths.d);
    check_depths(cmd, n, d)?;
    let (result, table) = match cmd {
        Command::Check => (check(job, n)?, None),
        Command::Pressure => (pressure(job, n)?, None),
        Command::Equilibrium => equilibrium(job, n, d)?,
        Command::Conditional => conditional(job, n, d)?,
        Command::Dimension => dimension(job, n, d)?,
        Command::Oracle => oracle(job, n, d)?,
    };
    let mut echoed = job.clone();
    echoed.command = Some(cmd);
    let report = json!({
        "tool": "thermoweight",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "input": serde_json::to_value(&echoed).map_err(|e| Failure::Other(e.to_string()))?,
        "result": result,
    });
    Ok(Outcome { report, table })
}

fn chain_of(job: &JobSpec, depth: usize) -> Result<FactorChain, Failure> {
    if job.sponge.is_some() {
        let (spec, _) = job.sponge()?;
        return Ok(build_sponge_chain(&spec, depth)?);
    }
    let chain = job.chain()?;
    validate_chain(&chain, depth)?;
    Ok(chain)
}

fn check(job: &JobSpec, n: usize) -> Result<Value, Failure> {
    let chain = if job.sponge.is_some() {
        let (spec, _) = job.sponge()?;
        build_sponge_chain(&spec, n)?
    } else {
        job.chain()?
    };
    let validation = validate_chain(&chain, n)?;
    let levels: Vec<Value> = chain
        .levels()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let g = x.specification_gaps();
            json!({
                "level": i + 1,
                "symbols": x.size(),
                "full_shift": x.is_full_shift(),
                "weak_p": g.weak_p,
                "exact_p": g.exact_p,
            })
        })
        .collect();
    Ok(json!({
        "levels": levels,
        "weights": chain.weights(),
        "validation": { "depth": validation.depth, "fiber_states": validation.fiber_states, "log": validation.log },
    }))
}

fn pressure(job: &JobSpec, n: usize) -> Result<Value, Failure> {
    let chain = chain_of(job, n)?;
    let phi = job.potential(chain.level(0))?;
    let wp = weighted_pressure(&chain, &phi, n, &options(job))?;
    Ok(json!({
        "weights": chain.weights(),
        "bracket": report::bracket(&wp.bracket),
        "ln_top_sum": wp.tables.top.ln(),
    }))
}

fn gibbs_section(chain: &FactorChain, phi: &Potential, mu: &CylinderTable, job: &JobSpec) -> Result<Value, Failure> {
    let caps = job.caps();
    let mut per = Vec::new();
    for j in 1..=mu.depth() {
        let marginal = mu.prefix_marginal(j)?;
        let reference = phi_tilde_at(chain, phi, j, &caps)?.linear();
        per.push(gibbs_ratios(&marginal, &reference)?);
    }
    Ok(report::gibbs(&gibbs_diagnostic(per, f64::INFINITY)?))
}

fn equilibrium(job: &JobSpec, n: usize, d: usize) -> Result<(Value, Option<CylinderTable>), Failure> {
    let chain = chain_of(job, n)?;
    let phi = job.potential(chain.level(0))?;
    let eq = weighted_equilibrium(&chain, &phi, n, d, &options(job))?;
    let objective = entropy_and_objective(&chain, &eq.measure, &phi)?;
    let mut result = json!({
        "weights": chain.weights(),
        "bracket": report::bracket(&eq.pressure.bracket),
        "phi_tilde_total": eq.phi_tilde.total(),
        "measure": report::table(&eq.measure),
        "objective": report::objective(&objective),
        "gibbs": gibbs_section(&chain, &phi, &eq.measure, job)?,
    });
    if let Some(m) = &job.mixing {
        let depth = m.a.len() + m.gaps[1] + m.p + m.b.len();
        if 2 * depth > n {
            return Err(Failure::Invalid(format!("mixing needs a Cesàro table of depth {depth}, so n >= {}", 2 * depth)));
        }
        let table = cesaro_measure(&eq.phi_tilde, depth)?;
        let mix = mixing_diagnostic(&table, &m.a, &m.b, m.p, m.gaps[0]..=m.gaps[1], job.mode())?;
        result["mixing"] = report::mixing(&mix);
    }
    Ok((result, Some(eq.measure)))
}

fn conditional(job: &JobSpec, n: usize, d: usize) -> Result<(Value, Option<CylinderTable>), Failure> {
    let chain = chain_of(job, n)?;
    if chain.k() < 2 {
        return Err(Failure::Invalid("conditional equilibrium needs a factor map".into()));
    }
    let phi = job.potential(chain.level(0))?;
    let target = chain.level(1).clone();
    let nu = match &job.nu {
        Some(m) => CylinderTable::new(target, n, m.clone())?,
        None => CylinderTable::uniform(target, n)?,
    };
    let r = conditional_equilibrium(chain.map(0), &phi, &nu, d, &job.caps())?;
    let result = json!({
        "measure": report::table(&r.measure),
        "lhs": r.lhs,
        "rhs": r.rhs,
        "discrepancy": r.discrepancy(),
        "estimator_gap": r.gap,
        "holds": r.holds(1e-9),
    });
    Ok((result, Some(r.measure)))
}

fn dimension(job: &JobSpec, n: usize, d: usize) -> Result<(Value, Option<CylinderTable>), Failure> {
    let (spec, perm) = job.sponge()?;
    let r = sponge_dimension(&spec, n, d, &options(job))?;
    let mcmullen = mcmullen_oracle(&spec).ok();
    let result = json!({
        "bases": spec.bases(),
        "coordinate_order": perm,
        "weights": kenyon_peres_weights(spec.bases()),
        "bracket": report::bracket(&r.bracket),
        "closed_form": mcmullen,
        "equilibrium_depth": r.equilibrium_depth,
        "measure": report::table(&r.measure),
        "objective": report::objective(&r.objective),
    });
    Ok((result, Some(r.measure)))
}

fn oracle(job: &JobSpec, n: usize, d: usize) -> Result<(Value, Option<CylinderTable>), Failure> {
    let chain = chain_of(job, n)?;
    let phi = job.potential(chain.level(0))?;
    let eq = weighted_equilibrium(&chain, &phi, n, d, &options(job))?;
    let settings = job.oracle.unwrap_or_default();
    let seed = job.seed.unwrap_or(0);
    let candidates = random_candidates(chain.level(0), settings.order, settings.candidates, seed)?;
    let sweep = variational_sweep(&chain, &phi, &candidates, d, &eq.pressure.bracket, Some(&eq.measure), 1e-9)?;
    let closed = product_fibers(&chain, &phi).map(|f| {
        let w = chain.weights();
        closed_form_full_shift(&f, (w[0], w[1])).pressure
    });
    let result = json!({
        "seed": seed,
        "candidates": settings.candidates,
        "order": settings.order,
        "bracket": report::bracket(&eq.pressure.bracket),
        "closed_form": closed,
        "max_objective": sweep.max_objective,
        "dominated": sweep.dominated,
        "equilibrium_objective": sweep.equilibrium.map(|e| e.0),
        "equilibrium_gap": sweep.equilibrium.map(|e| e.1),
        "attains": sweep.attains,
    });
    Ok((result, Some(eq.measure)))
}

/// Fiber sizes when the job is a two-level product of full shifts with the
/// constant potential.
fn product_fibers(chain: &FactorChain, phi: &Potential) -> Option<Vec<usize>> {
    if chain.k() != 2 || !phi.is_constant() || !chain.levels().iter().all(|x| x.is_full_shift()) {
        return None;
    }
    Some(chain.map(0).preimages().iter().map(|p| p.len()).collect())
}

/// Writes `depth,word,mass` rows.
pub fn write_csv<W: Write>(table: &CylinderTable, out: W) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Failure::Other(format!("cannot write CSV: {e}"));
    w.write_record(["depth", "word", "mass"]).map_err(io)?;
    for (r, m) in table.masses().iter().enumerate() {
        w.write_record([table.depth().to_string(), report::word(&table.word(r)), m.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Other(format!("cannot write CSV: {e}")))
}
