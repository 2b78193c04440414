mod flow;
mod geometry;
mod regions;

use serde_json::json;

use crate::config::RunConfig;
use crate::output::Sink;
use crate::{Failure, Verdict};

pub fn dispatch(cfg: RunConfig) -> Result<Verdict, Failure> {
    match cfg.command.as_deref() {
        Some("catalog") => geometry::catalog(cfg),
        Some("curvature") => geometry::curvature(cfg),
        Some("identities") => geometry::identities(cfg),
        Some("functional") => geometry::functional(cfg),
        Some("critical-check") => geometry::critical_check(cfg),
        Some("pinch-check") => geometry::pinch_check(cfg),
        Some("region-scan") => regions::region_scan(cfg),
        Some("flow") => flow::flow(cfg),
        other => Err(Failure::Usage(format!("unknown subcommand {other:?}"))),
    }
}

/// Resolves the output path, hashes the final configuration and writes it
/// as the first record.
fn begin(mut cfg: RunConfig, ext: &str) -> Result<(RunConfig, Sink), Failure> {
    cfg.resolve_output(ext);
    let hash = cfg.hash();
    let mut sink = Sink::open(cfg.output.as_deref(), &hash)?;
    sink.record("config", json!({ "config": &cfg }))?;
    Ok((cfg, sink))
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {v}")))
    }
}
