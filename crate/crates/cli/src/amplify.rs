use std::sync::Arc;

use condexp::owf::{
    amplified_tails, blockwise, image_tail, input_blowup, measure_inversion, reduce_direct, reduce_walk, repeat_amplify,
    walk_chain, Adversary, Construction, ExperimentConfig, ExperimentMode, InversionReport, MeasureMode, PlantedOracle,
    ToyFunction,
};
use condexp::spectral::mgg_rotation;
use condexp::walks::HybridGraph;
use condexp::Permutation;
use serde_json::{json, Value};

use crate::report::{Check, RunReport, Table};
use crate::spectral::{check_m, gap};
use crate::{read_json, require_seed, AmplifyArgs, CliError, ConstructionArg, Mode, Result};

pub const EXACT_TOL: f64 = 1e-12;

/// Standard errors allowed between a Monte Carlo estimate and its bound.
pub const MC_SIGMAS: f64 = 4.0;

/// Resolution of the planted success fraction.
const FRACTION_DEN: u64 = 1 << 16;

const LABEL_BITS: u32 = 3;

fn config_from(args: &AmplifyArgs) -> Result<ExperimentConfig> {
    let cfg = match &args.config {
        Some(path) => read_json(path)?,
        None => ExperimentConfig {
            construction: match args.construction {
                ConstructionArg::Direct => Construction::Direct,
                ConstructionArg::Walk => Construction::Walk,
            },
            n: args.n,
            t: args.t,
            k: args.k,
            delta: args.delta,
            eps: args.eps,
            seed: require_seed(args.seed, "amplify")?,
            mode: match args.mode {
                Mode::Exact => ExperimentMode::Exact,
                Mode::Mc => ExperimentMode::Montecarlo { trials: args.trials },
            },
            m: args.m,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn measure(f: &ToyFunction, g: &mut dyn Adversary, cfg: &ExperimentConfig, stream: u64) -> Result<InversionReport> {
    let mode = match cfg.mode {
        ExperimentMode::Exact => MeasureMode::Exact,
        ExperimentMode::Montecarlo { trials } => MeasureMode::MonteCarlo { trials, seed: cfg.seed.wrapping_add(stream) },
    };
    Ok(measure_inversion(f, g, mode)?)
}

/// Tolerance for comparing a measured success against a closed form.
fn tolerance(cfg: &ExperimentConfig, measured: f64) -> f64 {
    match cfg.mode {
        ExperimentMode::Exact => EXACT_TOL,
        ExperimentMode::Montecarlo { trials } => MC_SIGMAS * (measured * (1.0 - measured) / trials as f64).sqrt() + EXACT_TOL,
    }
}

fn planted(f: Arc<ToyFunction>, cfg: &ExperimentConfig) -> Result<PlantedOracle> {
    let num = ((1.0 - cfg.delta) * FRACTION_DEN as f64).round() as u64;
    Ok(PlantedOracle::planted_fraction(f, num, FRACTION_DEN, cfg.seed.wrapping_add(1))?)
}

struct Outcome {
    results: Value,
    checks: Vec<Check>,
}

fn base_checks(base: &PlantedOracle, cfg: &ExperimentConfig, checks: &mut Vec<Check>) -> (f64, Value) {
    let profile: Vec<f64> = (0..base.profile().len() as u64).map(|y| base.success_at(y)).collect();
    let (before, after) = amplified_tails(&profile, &cfg.eps, cfg.k);
    checks.push(Check::equal("amplified tail identity", after, before, EXACT_TOL));
    let f = base.target();
    let base_success = (0..f.domain_size()).map(|x| profile[f.eval(x) as usize]).sum::<f64>() / f.domain_size() as f64;
    (base_success, json!({ "before": before, "after": after }))
}

fn violations(name: &str, r: &InversionReport, checks: &mut Vec<Check>) {
    if r.trials > 0 {
        checks.push(Check::upper(format!("{name} violations"), r.violations as f64, 0.0, 0.0));
    }
}

fn direct(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = Arc::new(ToyFunction::random_permutation(cfg.n, cfg.seed)?);
    let base = planted(Arc::clone(&f), cfg)?;
    let mut checks = Vec::new();
    let (base_success, tails) = base_checks(&base, cfg, &mut checks);

    let canonical = blockwise(repeat_amplify(base, cfg.k)?, cfg.t)?;
    let fp = Arc::clone(canonical.target());
    let amplified = measure(&fp, &mut canonical.clone(), cfg, 2)?;
    violations("amplified adversary", &amplified, &mut checks);

    let mut red = reduce_direct(canonical, Arc::clone(&f), cfg.t, cfg.seed.wrapping_add(3))?;
    let profile: Vec<f64> = (0..1u64 << f.n_out()).map(|y| red.success_at(y)).collect();
    let p = image_tail(&f, |y| profile[y as usize], cfg.eps);
    let bound = p.powi(cfg.t as i32) + cfg.t as f64 * cfg.eps;
    checks.push(Check::upper("amplified success", amplified.success, bound, tolerance(cfg, amplified.success)));
    let reduction = measure(&f, &mut red, cfg, 4)?;
    violations("reduction", &reduction, &mut checks);

    Ok(Outcome {
        results: json!({
            "base_success": base_success,
            "amplified_tails": tails,
            "amplified": amplified,
            "reduction": reduction,
            "reduction_profile": profile,
            "tail": p,
            "bound": bound,
            "input_bits": cfg.n * cfg.t,
            "blowup": input_blowup(cfg.n, cfg.t, LABEL_BITS),
        }),
        checks,
    })
}

fn walk(cfg: &ExperimentConfig) -> Result<Outcome> {
    check_m(cfg.m)?;
    let rot = mgg_rotation(cfg.m)?;
    let spectral = gap(&rot, 1e-12)?;
    let (alpha, beta) = (spectral.alpha, spectral.beta);
    let n = rot.vertex_count();
    let g = Arc::new(HybridGraph::new(rot, Permutation::from_seed(n, cfg.seed))?);
    let gf = Arc::new(ToyFunction::from_permutation(g.permutation())?);
    let base = planted(Arc::clone(&gf), cfg)?;
    let mut checks = Vec::new();
    let (base_success, tails) = base_checks(&base, cfg, &mut checks);

    let chain = walk_chain(repeat_amplify(base, cfg.k)?, Arc::clone(&g), cfg.t)?;
    let fp = Arc::clone(chain.target());
    let amplified = measure(&fp, &mut chain.clone(), cfg, 2)?;
    violations("amplified adversary", &amplified, &mut checks);

    let mut red = reduce_walk(chain, Arc::clone(&g), cfg.t, cfg.seed.wrapping_add(3))?;
    let profile: Vec<f64> = (0..n as u64).map(|y| red.success_at(y)).collect();
    let p = image_tail(&gf, |y| profile[y as usize], cfg.eps);
    let positions = cfg.t - 1;
    let bound = (alpha + beta * p).powi(positions as i32) + positions as f64 * cfg.eps;
    let stated = (alpha + beta * p).powi(cfg.t as i32) + cfg.t as f64 * cfg.eps;
    let tol = tolerance(cfg, amplified.success);
    checks.push(Check::upper("amplified success (t-1 positions)", amplified.success, bound, tol));
    checks.push(Check::upper("amplified success (t positions)", amplified.success, stated, tol));
    let reduction = measure(&gf, &mut red, cfg, 4)?;
    violations("reduction", &reduction, &mut checks);

    let vertex_bits = 2 * cfg.m;
    Ok(Outcome {
        results: json!({
            "alpha": alpha,
            "beta": beta,
            "base_success": base_success,
            "amplified_tails": tails,
            "amplified": amplified,
            "reduction": reduction,
            "reduction_profile": profile,
            "tail": p,
            "bound": bound,
            "bound_t_positions": stated,
            "input_bits": vertex_bits + cfg.t * LABEL_BITS,
            "blowup": input_blowup(vertex_bits, cfg.t, LABEL_BITS),
        }),
        checks,
    })
}

pub fn run(args: &AmplifyArgs) -> Result<(RunReport, Table)> {
    let cfg = config_from(args)?;
    let outcome = match cfg.construction {
        Construction::Direct => direct(&cfg),
        Construction::Walk => walk(&cfg),
    }
    .map_err(|e| match e {
        CliError::Core(condexp::Error::Resource { what, budget }) => {
            CliError::Core(condexp::Error::Resource { what: format!("{what} in the {:?} construction", cfg.construction), budget })
        }
        other => other,
    })?;
    let mut table = Table::new(vec!["check", "measured", "bound", "slack", "tolerance", "holds"]);
    for c in &outcome.checks {
        table.push(vec![
            c.name.clone(),
            c.measured.to_string(),
            c.bound.to_string(),
            c.slack.to_string(),
            c.tolerance.to_string(),
            c.holds.to_string(),
        ]);
    }
    let config = serde_json::to_value(cfg)?;
    Ok((RunReport::new("amplify", config, Some(cfg.seed), outcome.results, outcome.checks), table))
}
