//! Subcommands that act on a single catalog metric.

use critmetric::catalog::{build, rescale_to_unit_volume, CATALOG_IDS};
use critmetric::curvature::{
    check_commutation, check_contracted_bianchi, check_cotton_forms, check_divweyl_cotton, check_weyl_reconstruction,
    map_frames, EngineOptions,
};
use critmetric::functional::{el_residuals, evaluate_functional, scaling_check, theorem_integrands, Integrand};
use critmetric::identities::{
    check_kato_codazzi, equality_suite, frame_residuals, kato_terms, synthetic_identity_suite,
    synthetic_inequality_suite, IdentityVerdict, DECOMPOSITION_IDS, FRAME_TOL, SLACK_TOL, SYNTHETIC_TOL,
};
use critmetric::regions::pinch_check as pinch;
use critmetric::{Chart, Params};
use serde_json::{json, Value};

use super::{begin, positive};
use crate::config::RunConfig;
use crate::{Failure, Verdict};

const VOLUME_TOL: f64 = 1e-6;
const CURVATURE_TOL: f64 = 1e-4;
const SCALING_TOL: f64 = 1e-8;
const CRITICAL_TOL: f64 = 1e-5;
/// Bound for the Bochner-type consequences once the system passes.
const CONSEQUENCE_TOL: f64 = 1e-4;

fn chart(cfg: &mut RunConfig) -> Result<Chart, Failure> {
    let spec = cfg.metric_spec()?;
    let grid = cfg.resolve_grid();
    Ok(build(&spec, grid)?)
}

fn params(cfg: &mut RunConfig, n: usize) -> Result<Params, Failure> {
    let t = *cfg.t.get_or_insert(0.0);
    let s = *cfg.s.get_or_insert(0.0);
    Ok(Params::new(n, t, s)?)
}

fn num(x: f64) -> Value {
    // NaN and infinities become null in JSON
    json!(x)
}

pub fn catalog(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    if cfg.metric.is_none() {
        let (_, mut sink) = begin(cfg, "jsonl")?;
        for id in CATALOG_IDS {
            sink.record("entry", json!({ "id": id }))?;
        }
        sink.finish()?;
        return Ok(Verdict::Pass);
    }
    let tol = positive("tol", *cfg.tol.get_or_insert(VOLUME_TOL))?;
    let spec = cfg.metric_spec()?;
    let m = chart(&mut cfg)?;
    let (_, c) = rescale_to_unit_volume(&m)?;
    let volume = m.volume()?;
    let exact = spec.closed_form_volume();
    let rel = exact.map(|v| (volume - v).abs() / v);
    let pass = rel.map_or(true, |r| r < tol);
    let (_, mut sink) = begin(cfg, "jsonl")?;
    sink.record(
        "metric",
        json!({
            "id": spec.id(),
            "label": spec.label(),
            "dim": m.dim(),
            "nodes": m.node_count(),
            "grid": m.grid(),
            "volume": num(volume),
            "closed_form_volume": exact,
            "volume_rel_error": rel,
            "unit_volume_scale": num(c),
            "tolerance": tol,
            "pass": pass,
        }),
    )?;
    sink.finish()?;
    Ok(Verdict::from_bool(pass))
}

pub fn curvature(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let tol = positive("tol", *cfg.tol.get_or_insert(CURVATURE_TOL))?;
    let m = chart(&mut cfg)?;
    let rows = map_frames(&m, &EngineOptions::default(), |node, f| {
        let divw = if f.dim() >= 4 { Some(check_divweyl_cotton(f)?.residual) } else { None };
        let residuals = [
            check_weyl_reconstruction(f)?,
            check_contracted_bianchi(f)?,
            check_cotton_forms(f)?,
            check_commutation(f)?,
        ];
        Ok((node.index, f.point.clone(), [f.r, f.norm_e2, f.norm_w2, f.norm_c2()?, f.norm_rm2], residuals, divw))
    })?;
    let (_, mut sink) = begin(cfg, "jsonl")?;
    let mut worst = [0.0f64; 5];
    let mut finite = true;
    for (index, point, q, res, divw) in &rows {
        let all = [res[0], res[1], res[2], res[3], divw.unwrap_or(0.0)];
        for (w, v) in worst.iter_mut().zip(all) {
            finite &= v.is_finite();
            *w = w.max(v);
        }
        sink.record(
            "node",
            json!({
                "index": index,
                "point": point,
                "R": num(q[0]),
                "norm_e2": num(q[1]),
                "norm_w2": num(q[2]),
                "norm_c2": num(q[3]),
                "norm_rm2": num(q[4]),
                "residuals": {
                    "weyl_reconstruction": num(res[0]),
                    "contracted_bianchi": num(res[1]),
                    "cotton_forms": num(res[2]),
                    "commutation": num(res[3]),
                    "divweyl_cotton": divw,
                },
                "tolerance": tol,
            }),
        )?;
    }
    let pass = finite && worst.iter().all(|&w| w < tol);
    sink.record(
        "summary",
        json!({
            "nodes": rows.len(),
            "max_weyl_reconstruction": worst[0],
            "max_contracted_bianchi": worst[1],
            "max_cotton_forms": worst[2],
            "max_commutation": worst[3],
            "max_divweyl_cotton": (m.dim() >= 4).then_some(worst[4]),
            "tolerance": tol,
            "pass": pass,
        }),
    )?;
    sink.finish()?;
    Ok(Verdict::from_bool(pass))
}

pub fn identities(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let synthetic = cfg.synthetic.unwrap_or(false);
    match (synthetic, cfg.metric.is_some()) {
        (true, true) => return Err(Failure::Usage("--synthetic and --metric are exclusive".into())),
        (false, false) => return Err(Failure::Usage("give --synthetic or --metric".into())),
        _ => {}
    }
    let verdicts: Vec<IdentityVerdict<f64>>;
    let mut kato = None;
    if synthetic {
        let n = cfg.n.ok_or_else(|| Failure::Usage("--synthetic needs --n".into()))?;
        let samples = *cfg.samples.get_or_insert(200);
        if samples == 0 {
            return Err(Failure::Usage("--samples must be at least 1".into()));
        }
        let seed = *cfg.seed.get_or_insert(0);
        let tol = positive("tol", *cfg.tol.get_or_insert(SYNTHETIC_TOL))?;
        let mut v = synthetic_identity_suite(n, samples, seed, tol)?;
        v.extend(synthetic_inequality_suite(n, samples, seed, SLACK_TOL)?);
        v.extend(equality_suite(n, samples, seed, SLACK_TOL)?);
        verdicts = v;
    } else {
        let tol = positive("tol", *cfg.tol.get_or_insert(FRAME_TOL))?;
        let m = chart(&mut cfg)?;
        let rows = map_frames(
            &m,
            &EngineOptions::with_order(critmetric::curvature::DerivOrder::First),
            |node, f| Ok((frame_residuals(f)?, kato_terms(f)?, node.point.clone())),
        )?;
        let ids = [DECOMPOSITION_IDS[0], DECOMPOSITION_IDS[1], DECOMPOSITION_IDS[2], "okumura", "huisken"];
        verdicts = ids
            .iter()
            .enumerate()
            .map(|(k, id)| {
                let mut v = IdentityVerdict::new(*id, tol);
                for (res, _, point) in &rows {
                    v.record(res[k], None, Some(point));
                }
                v
            })
            .collect();
        let terms: Vec<_> = rows.iter().map(|r| r.1).collect();
        kato = Some(check_kato_codazzi(&terms));
    }
    let (_, mut sink) = begin(cfg, "jsonl")?;
    let mut pass = true;
    for v in &verdicts {
        pass &= v.pass;
        sink.record("identity", serde_json::to_value(v).expect("serialisable"))?;
    }
    if let Some(k) = kato {
        pass &= k.pass;
        sink.record("kato", serde_json::to_value(&k).expect("serialisable"))?;
    }
    sink.finish()?;
    Ok(Verdict::from_bool(pass))
}

pub fn functional(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let tol = positive("tol", *cfg.tol.get_or_insert(SCALING_TOL))?;
    let normalize = *cfg.normalize.get_or_insert(false);
    let mut m = chart(&mut cfg)?;
    let p = params(&mut cfg, m.dim())?;
    let mut scale = None;
    if normalize {
        let (unit, c) = rescale_to_unit_volume(&m)?;
        m = unit;
        scale = Some(c);
    }
    let which = cfg
        .integrand
        .clone()
        .unwrap_or_default()
        .iter()
        .map(|id| Integrand::from_id(id))
        .collect::<critmetric::Result<Vec<_>>>()?;
    let v = evaluate_functional(&m, &p)?;
    let mut scaling = Vec::new();
    let mut pass = true;
    for c in [0.5, 2.0] {
        let r = scaling_check(&m, &p, c)?;
        pass &= r < tol;
        scaling.push(json!({ "c": c, "residual": num(r) }));
    }
    let mut integrands = Vec::new();
    for w in which {
        let rep = theorem_integrands(&m, &p, w)?;
        integrands.push(json!({ "id": w.id(), "integral": num(rep.integral), "rhs_integral": rep.rhs_integral }));
    }
    let (_, mut sink) = begin(cfg, "jsonl")?;
    sink.record(
        "functional",
        json!({
            "t": p.t,
            "s": p.s,
            "ric2": num(v.ric2),
            "r2": num(v.r2),
            "rm2": num(v.rm2),
            "value": num(v.value),
            "volume": num(v.volume),
            "unit_volume_scale": scale,
            "scaling": scaling,
            "integrands": integrands,
            "tolerance": tol,
            "pass": pass,
        }),
    )?;
    sink.finish()?;
    Ok(Verdict::from_bool(pass))
}

pub fn critical_check(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let tol = positive("tol", *cfg.tol.get_or_insert(CRITICAL_TOL))?;
    let normalize = *cfg.normalize.get_or_insert(false);
    let m = chart(&mut cfg)?;
    let p = params(&mut cfg, m.dim())?;
    let (unit, c) = rescale_to_unit_volume(&m)?;
    let r = el_residuals(&unit, &p)?;
    let (a, b) = if normalize {
        (r.normalized_traceless, r.normalized_scalar)
    } else {
        (r.residual_traceless, r.residual_scalar)
    };
    let critical = a < tol && b < tol;
    let consequences = r.bochner1 < CONSEQUENCE_TOL && r.bochner2 < CONSEQUENCE_TOL;
    let (_, mut sink) = begin(cfg, "jsonl")?;
    let mut body = serde_json::to_value(&r).expect("serialisable");
    let obj = body.as_object_mut().expect("struct");
    obj.insert("t".into(), json!(p.t));
    obj.insert("s".into(), json!(p.s));
    obj.insert("unit_volume_scale".into(), num(c));
    obj.insert("normalized".into(), json!(normalize));
    obj.insert("tolerance".into(), json!(tol));
    obj.insert("critical".into(), json!(critical));
    obj.insert("consequence_tolerance".into(), json!(CONSEQUENCE_TOL));
    obj.insert("consequences_pass".into(), json!(consequences));
    sink.record("critical_check", body)?;
    sink.finish()?;
    Ok(Verdict::from_bool(critical))
}

pub fn pinch_check(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let m = chart(&mut cfg)?;
    let p = params(&mut cfg, m.dim())?;
    let rep = pinch(&m, &p)?;
    let pass = rep.margin > 0.0;
    let (_, mut sink) = begin(cfg, "jsonl")?;
    let mut body = serde_json::to_value(&rep).expect("serialisable");
    let obj = body.as_object_mut().expect("struct");
    obj.insert("t".into(), json!(p.t));
    obj.insert("s".into(), json!(p.s));
    // the margin is judged strictly against zero
    obj.insert("tolerance".into(), json!(0.0));
    obj.insert("pass".into(), json!(pass));
    sink.record("pinch_check", body)?;
    sink.finish()?;
    Ok(Verdict::from_bool(pass))
}
