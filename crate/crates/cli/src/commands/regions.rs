use critmetric::regions::{scan, AxisRange, RegionReport, RegionSystem};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{tag, Sink};
use crate::{Failure, Verdict};

const DEFAULT_RES: usize = 201;

pub fn region_scan(mut cfg: RunConfig) -> Result<Verdict, Failure> {
    let id = cfg
        .system
        .clone()
        .ok_or_else(|| Failure::Usage("--system is required".into()))?;
    let system = RegionSystem::from_id(&id, cfg.n)?;
    let t = cfg.t_range.ok_or_else(|| Failure::Usage("--t LO HI is required".into()))?;
    let s = cfg.s_range.ok_or_else(|| Failure::Usage("--s LO HI is required".into()))?;
    if t.iter().chain(&s).any(|v| !v.is_finite()) {
        return Err(Failure::Usage("range ends must be finite".into()));
    }
    let res = *cfg.res.get_or_insert(DEFAULT_RES);
    let t_res = *cfg.t_res.get_or_insert(res);
    let s_res = *cfg.s_res.get_or_insert(res);
    cfg.resolve_output("csv");
    let hash = cfg.hash();

    let report = scan(system, AxisRange::new(t[0], t[1]), AxisRange::new(s[0], s[1]), t_res, s_res);
    let mut csv = Sink::open(cfg.output.as_deref(), &hash)?;
    csv.raw(&report.to_csv())?;
    let on_stdout = csv.is_stdout();
    csv.finish()?;

    // The CSV keeps the bare header, so the hash travels in the summary.
    let summary = tag("region_scan", &hash, summary(&cfg, &report));
    if on_stdout {
        eprintln!("{summary}");
    } else {
        println!("{summary}");
    }
    Ok(Verdict::from_bool(report.feasible > 0))
}

fn summary(cfg: &RunConfig, r: &RegionReport) -> serde_json::Value {
    json!({
        "config": cfg,
        "system": r.system.to_string(),
        "rows": r.rows.len(),
        "feasible": r.feasible,
        "flagged_one_plus_4s": r.flagged_one_plus_4s,
        // inequalities are evaluated exactly as strict or weak signs
        "tolerance": 0.0,
    })
}
