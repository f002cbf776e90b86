use condexp::spectral::{mgg_rotation, second_eigenvalue_magnitude, transition_matrix, ColoredRotation};
use condexp::{Error, SpectralReport64};
use serde_json::json;

use crate::report::{Check, RunReport, Table};
use crate::{CliError, Result, SpectralArgs};

/// `5 sqrt(2) / 8`.
pub const ALPHA_LIMIT: f64 = 0.883_883_476_483_184_4;
pub const ALPHA_TOL: f64 = 1e-6;
pub const SELF_TEST_TOL: f64 = 1e-12;

/// Largest family index the eigensolver is run on.
pub const SPECTRAL_M_LIMIT: u32 = 9;

pub(crate) fn check_m(m: u32) -> Result<()> {
    if m > SPECTRAL_M_LIMIT {
        let what = format!("eigensolve at m={m} (2^{} vertices)", 2 * u64::from(m));
        return Err(Error::Resource { what, budget: 1 << (2 * SPECTRAL_M_LIMIT) }.into());
    }
    Ok(())
}

pub(crate) fn gap(rot: &ColoredRotation, tol: f64) -> Result<SpectralReport64> {
    Ok(second_eigenvalue_magnitude(&transition_matrix(rot), tol)?)
}

fn row(table: &mut Table, graph: String, vertices: usize, r: &SpectralReport64) {
    table.push(vec![
        graph,
        vertices.to_string(),
        r.alpha.to_string(),
        r.beta.to_string(),
        r.lambda_1.to_string(),
        r.lambda_min.to_string(),
        serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        r.iterations.to_string(),
        (r.alpha > ALPHA_LIMIT + ALPHA_TOL).to_string(),
    ]);
}

pub fn run(args: &SpectralArgs) -> Result<(RunReport, Table)> {
    if args.m_min == 0 || args.m_min > args.m_max {
        return Err(CliError::Usage(format!("empty or invalid m range {}..={}", args.m_min, args.m_max)));
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let mut table =
        Table::new(vec!["graph", "vertices", "alpha", "beta", "lambda_1", "lambda_min", "method", "iterations", "above_limit"]);
    let mut checks = Vec::new();
    let mut graphs = Vec::new();
    check_m(args.m_max)?;
    for m in args.m_min..=args.m_max {
        let rot = mgg_rotation(m)?;
        let r = gap(&rot, args.tol)?;
        row(&mut table, format!("gg-{m}"), rot.vertex_count(), &r);
        checks.push(Check::upper(format!("alpha m={m}"), r.alpha, ALPHA_LIMIT, ALPHA_TOL));
        graphs.push(json!({
            "m": m,
            "vertices": rot.vertex_count(),
            "report": r,
            "above_limit": r.alpha > ALPHA_LIMIT + ALPHA_TOL,
        }));
    }
    let k4 = gap(&ColoredRotation::complete(4)?, args.tol)?;
    row(&mut table, "K4".into(), 4, &k4);
    checks.push(Check::equal("K4 self-test alpha", k4.alpha, 1.0 / 3.0, SELF_TEST_TOL));
    let results = json!({ "limit": ALPHA_LIMIT, "graphs": graphs, "self_test": { "graph": "K4", "report": k4 } });
    Ok((RunReport::new("spectral", serde_json::to_value(args)?, None, results, checks), table))
}
