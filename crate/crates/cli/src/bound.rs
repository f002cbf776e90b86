use std::sync::Arc;

use condexp::prob::{eval_bound_thm1, HOLD_TOLERANCE, eval_bound_thm2, BoundReport, FiniteSpace, RandomObject, RandomVariable};
use condexp::{Exact, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::num::{Num, Render};
use crate::report::{Check, RunReport, Table};
use crate::{read_json, require_seed, BoundArgs, BoundForm, CliError, InstanceKind, Result};

pub const TIGHTNESS_TOL: f64 = 1e-12;

/// Largest product space built for a random instance.
pub const INSTANCE_SPACE_LIMIT: usize = 1 << 16;

/// On-disk instance: a weighted sample space, `Z`, and random objects on it.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub weights: Vec<Num>,
    pub z: Vec<Num>,
    pub objects: Vec<ObjectFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub codomain: usize,
    pub map: Vec<usize>,
}

struct Instance<T> {
    label: String,
    z: RandomVariable<T>,
    us: Vec<RandomObject<T>>,
}

fn cube<T: Scalar>(q: T, t: usize) -> Result<Instance<T>> {
    if t > INSTANCE_SPACE_LIMIT.ilog2() as usize {
        return Err(condexp::Error::Resource { what: format!("cube with {t} coordinates"), budget: INSTANCE_SPACE_LIMIT as u64 }.into());
    }
    let coord = FiniteSpace::new(vec![q.clone(), T::one() - q])?;
    let factors: Vec<&FiniteSpace<T>> = (0..t).map(|_| &coord).collect();
    let (space, us) = FiniteSpace::product(&factors)?;
    let z = RandomVariable::indicator(Arc::clone(&space), |o| us.iter().all(|u| u.value(o) == 0));
    Ok(Instance { label: "cube".into(), z, us })
}

/// Law with integer weights in `1..=16`, normalized exactly.
fn random_law<T: Scalar>(rng: &mut ChaCha8Rng, k: usize) -> Result<FiniteSpace<T>> {
    let raw: Vec<u64> = (0..k).map(|_| rng.random_range(1..=16)).collect();
    let total = raw.iter().sum();
    Ok(FiniteSpace::new(raw.into_iter().map(|w| T::from_ratio(w, total)).collect())?)
}

fn random_instance<T: Scalar>(kind: InstanceKind, t: usize, k: usize, seed: u64) -> Result<Instance<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let laws = match kind {
        InstanceKind::Iid => vec![random_law::<T>(&mut rng, k)?; t],
        _ => (0..t)
            .map(|_| {
                let size = rng.random_range(2..=k);
                random_law::<T>(&mut rng, size)
            })
            .collect::<Result<_>>()?,
    };
    let size = laws.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()).filter(|&s| s <= INSTANCE_SPACE_LIMIT));
    if size.is_none() {
        return Err(condexp::Error::Resource { what: format!("product space of {t} coordinates"), budget: INSTANCE_SPACE_LIMIT as u64 }.into());
    }
    let factors: Vec<&FiniteSpace<T>> = laws.iter().collect();
    let (space, us) = FiniteSpace::product(&factors)?;
    let values = (0..space.len())
        .map(|_| if rng.random_bool(0.3) { T::zero() } else { T::from_ratio(rng.random_range(0..=1000), 1000) })
        .collect();
    Ok(Instance { label: format!("seed={seed}"), z: RandomVariable::new(space, values)?, us })
}

fn file_instance<T: Scalar>(file: InstanceFile) -> Result<Instance<T>> {
    let space = Arc::new(FiniteSpace::new(file.weights.into_iter().map(Num::to).collect())?);
    let z = RandomVariable::new(Arc::clone(&space), file.z.into_iter().map(Num::to).collect())?;
    let us = file
        .objects
        .into_iter()
        .map(|o| RandomObject::new(Arc::clone(&space), o.codomain, o.map))
        .collect::<condexp::Result<_>>()?;
    Ok(Instance { label: "file".into(), z, us })
}

fn evaluate<T: Scalar>(inst: &Instance<T>, form: BoundForm, eps: &T, beta: &T) -> Result<BoundReport<T>> {
    Ok(match form {
        BoundForm::Averaged => eval_bound_thm1(&inst.z, &inst.us, eps.clone(), beta.clone())?,
        BoundForm::PerCoordinate => eval_bound_thm2(&inst.z, &inst.us, &vec![eps.clone(); inst.us.len()], beta.clone())?,
    })
}

fn report_json<T: Render>(label: &str, r: &BoundReport<T>) -> Value {
    let mut v = json!({
        "instance": label,
        "variant": r.variant,
        "expectation": r.expectation.to_f64(),
        "tail_terms": r.tail_terms.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
        "bound": r.bound_value.to_f64(),
        "slack": r.slack.to_f64(),
        "holds": r.holds,
    });
    if let Some(text) = r.expectation.exact_text() {
        v["exact"] = json!({
            "expectation": text,
            "tail_terms": r.tail_terms.iter().filter_map(Render::exact_text).collect::<Vec<_>>(),
            "bound": r.bound_value.exact_text(),
            "slack": r.slack.exact_text(),
        });
    }
    v
}

fn run_typed<T: Render>(args: &BoundArgs, seed: Option<u64>) -> Result<(Value, Vec<Check>, Table)> {
    let eps: T = args.eps.to();
    let beta: T = args.beta.to();
    let instances: Vec<Instance<T>> = match args.instance {
        InstanceKind::Cube => {
            let q = match args.p.root(args.t as u32) {
                Some(q) => q.to::<T>(),
                None if args.exact => {
                    return Err(CliError::Usage(format!("p = {} has no exact {}-th root; pick a perfect power", args.p, args.t)))
                }
                None => T::from_f64(args.p.as_f64().powf(1.0 / args.t as f64)),
            };
            vec![cube(q, args.t)?]
        }
        InstanceKind::Iid | InstanceKind::Mixed => {
            let seed = seed.expect("checked by caller");
            (0..args.sweep).map(|i| random_instance(args.instance, args.t, args.outcomes, seed + i)).collect::<Result<_>>()?
        }
        InstanceKind::File => {
            let path = args.file.as_ref().ok_or_else(|| CliError::Usage("--instance file needs --file".into()))?;
            vec![file_instance(read_json(path)?)?]
        }
    };

    let mut table = Table::new(vec!["instance", "expectation", "bound", "slack", "holds"]);
    let mut checks = Vec::new();
    let mut out = Vec::new();
    for inst in &instances {
        let r = evaluate(inst, args.form, &eps, &beta)?;
        let mut check = Check::upper(format!("bound {}", inst.label), r.expectation.to_f64(), r.bound_value.to_f64(), HOLD_TOLERANCE);
        check.holds = r.holds;
        checks.push(check);
        table.push(vec![
            inst.label.clone(),
            r.expectation.to_f64().to_string(),
            r.bound_value.to_f64().to_string(),
            r.slack.to_f64().to_string(),
            r.holds.to_string(),
        ]);
        out.push(report_json(&inst.label, &r));
    }

    if args.instance == InstanceKind::Cube && args.beta.num == args.beta.den {
        // Below p^{1 - 1/t} the bound is p + t eps on the nose.
        let p = args.p.as_f64();
        if args.eps.as_f64() < p.powf(1.0 - 1.0 / args.t as f64) {
            let r = evaluate(&instances[0], args.form, &eps, &beta)?;
            let tight = p + args.t as f64 * args.eps.as_f64();
            checks.push(Check::equal("cube tightness", r.bound_value.to_f64(), tight, TIGHTNESS_TOL));
        }
    }
    Ok((Value::Array(out), checks, table))
}

pub fn run(args: &BoundArgs) -> Result<(RunReport, Table)> {
    let seed = match args.instance {
        InstanceKind::Iid | InstanceKind::Mixed => Some(require_seed(args.seed, "random instances")?),
        _ => args.seed,
    };
    if args.t == 0 {
        return Err(CliError::Usage("--t must be at least 1".into()));
    }
    if args.outcomes < 2 {
        return Err(CliError::Usage("--outcomes must be at least 2".into()));
    }
    let (results, checks, table) = if args.exact { run_typed::<Exact>(args, seed)? } else { run_typed::<f64>(args, seed)? };
    Ok((RunReport::new("bound", serde_json::to_value(args)?, seed, json!({ "instances": results }), checks), table))
}
