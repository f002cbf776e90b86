use condexp::prob::IndependenceConfig;
use condexp::spectral::{mgg_rotation, Projection};
use condexp::walks::{terminal_vector, verify_theorem4, HybridGraph};
use condexp::Permutation;
use serde_json::json;

use crate::report::{Check, RunReport, Table};
use crate::spectral::{check_m, gap};
use crate::{require_seed, Mode, Result, VerifyBetaArgs};

pub const RATIO_TOL: f64 = 1e-9;
pub const TRIVIAL_TOL: f64 = 1e-12;

pub fn run(args: &VerifyBetaArgs) -> Result<(RunReport, Table)> {
    let seed = require_seed(args.seed, "verify-beta")?;
    check_m(args.m)?;
    let rot = mgg_rotation(args.m)?;
    let n = rot.vertex_count();
    let spectral = gap(&rot, 1e-12)?;
    let g = HybridGraph::new(rot, Permutation::from_seed(n, seed))?;
    let config = match args.mode {
        Mode::Exact => IndependenceConfig::exhaustive(args.trials, seed),
        Mode::Mc => IndependenceConfig::sampled(args.trials, seed),
    };
    let report = verify_theorem4(&g, args.t, spectral.beta, &config)?;

    let full = terminal_vector::<f64>(&g, args.t, &vec![Projection::full(n); args.t + 1])?.total;
    let mut with_empty = vec![Projection::full(n); args.t + 1];
    with_empty[0] = Projection::empty(n);
    let empty = terminal_vector::<f64>(&g, args.t, &with_empty)?.total;

    let checks = vec![
        Check::upper("worst ratio", report.worst_ratio, 1.0, RATIO_TOL),
        Check::equal("all-vertex family probability", full, 1.0, TRIVIAL_TOL),
        Check::equal("empty-set family probability", empty, 0.0, TRIVIAL_TOL),
    ];
    let mut table = Table::new(vec!["m", "t", "seed", "alpha", "beta", "worst_ratio", "families_checked", "witnesses"]);
    table.push(vec![
        args.m.to_string(),
        args.t.to_string(),
        seed.to_string(),
        spectral.alpha.to_string(),
        spectral.beta.to_string(),
        report.worst_ratio.to_string(),
        report.families_checked.to_string(),
        report.witnesses.len().to_string(),
    ]);
    let results = json!({
        "alpha": spectral.alpha,
        "beta": spectral.beta,
        "worst_ratio": report.worst_ratio,
        "families_checked": report.families_checked,
        "witnesses": report.witnesses,
        "all_vertex_probability": full,
        "empty_set_probability": empty,
    });
    Ok((RunReport::new("verify-beta", serde_json::to_value(args)?, Some(seed), results, checks), table))
}
