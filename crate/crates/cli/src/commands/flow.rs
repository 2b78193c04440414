use critmetric::flow::{descend, tangent_pairings, AnsatzFamily, DescentOptions};
use critmetric::tensor::seeded_rng;
use critmetric::Params;
use rand::Rng;
use serde_json::json;

use super::{begin, positive};
use crate::config::RunConfig;
use crate::{Failure, Verdict};

const EL_TOL: f64 = 1e-4;

pub fn flow(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let d = DescentOptions::default();
    let id = cfg.family.get_or_insert_with(|| "warped_circle_sphere".into()).clone();
    let n = *cfg.n.get_or_insert(3);
    let modes = *cfg.modes.get_or_insert(4);
    let family = AnsatzFamily::from_id(&id, n, modes)?;
    let t = *cfg.t.get_or_insert(0.0);
    let s = *cfg.s.get_or_insert(0.0);
    let p = Params::new(n, t, s)?;
    let opts = DescentOptions {
        steps: *cfg.steps.get_or_insert(d.steps),
        learning_rate: positive("lr", *cfg.lr.get_or_insert(d.learning_rate))?,
        tol: positive("tol", *cfg.tol.get_or_insert(d.tol))?,
        max_halvings: d.max_halvings,
        grid: cfg.resolve_grid(),
    };
    let el_tol = positive("el-tol", *cfg.el_tol.get_or_insert(EL_TOL))?;
    let seed = *cfg.seed.get_or_insert(0);
    let theta0 = match &cfg.theta0 {
        Some(th) => th.clone(),
        None => {
            let scale = *cfg.init_scale.get_or_insert(0.0);
            if scale < 0.0 || !scale.is_finite() {
                return Err(Failure::Usage("--init-scale must be nonnegative".into()));
            }
            let mut rng = seeded_rng(seed);
            (0..family.param_len())
                .map(|_| if scale > 0.0 { rng.gen_range(-scale..scale) } else { 0.0 })
                .collect()
        }
    };
    if theta0.len() != family.param_len() {
        return Err(Failure::Usage(format!(
            "theta0 has {} entries, family needs {}",
            theta0.len(),
            family.param_len()
        )));
    }
    let trace = descend(&family, &theta0, &p, &opts)?;
    let pairings = if trace.converged() {
        Some(tangent_pairings(&family, trace.last(), &p, opts.grid)?)
    } else {
        None
    };

    let (_, mut sink) = begin(cfg, "jsonl")?;
    for (k, theta) in trace.iterates.iter().enumerate() {
        sink.record(
            "iterate",
            json!({
                "k": k,
                "theta": theta,
                "objective": trace.objective[k],
                "grad_norm": trace.grad_norm.get(k),
                "step_size": if k == 0 { None } else { trace.step_size.get(k - 1) },
            }),
        )?;
    }
    let res = trace.final_residuals.as_ref();
    let el_pass = res.is_some_and(|r| r.critical(el_tol));
    let pair_bound = 10.0 * opts.tol;
    let pairings_pass = pairings.as_ref().map(|v| v.iter().all(|x| x.abs() < pair_bound));
    let pass = trace.converged() && el_pass;
    sink.record(
        "summary",
        json!({
            "family": family,
            "t": t,
            "s": s,
            "stop": trace.stop,
            "converged": trace.converged(),
            "incomplete": trace.incomplete(),
            "accepted": trace.accepted,
            "objective": trace.objective.last(),
            "grad_norm": trace.grad_norm.last(),
            "tolerance": opts.tol,
            "el_residual_traceless": res.map(|r| r.residual_traceless),
            "el_residual_scalar": res.map(|r| r.residual_scalar),
            "el_residual": res.map(|r| r.residual_traceless.max(r.residual_scalar)),
            "el_normalized": res.map(|r| r.normalized_traceless.max(r.normalized_scalar)),
            "el_tolerance": el_tol,
            "tangent_pairings": pairings,
            "pairing_tolerance": pair_bound,
            "pairings_pass": pairings_pass,
            "pass": pass,
        }),
    )?;
    sink.finish()?;
    Ok(Verdict::from_bool(pass))
}
