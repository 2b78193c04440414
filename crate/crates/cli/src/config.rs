//! Run configuration: everything a run depends on, serialisable so that the
//! same configuration reproduces the same bytes.

use std::path::Path;

use critmetric::catalog::{CatalogParams, FourierSeries, GridSpec, MetricSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Environment variable naming the directory outputs go to when no
/// `--output` is given.
pub const OUT_DIR_ENV: &str = "CRITMETRIC_OUT_DIR";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    // metric
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub circle_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coord: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warp: Option<FourierSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<FourierSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<MetricSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polar: Option<usize>,

    // functional
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand: Option<Vec<String>>,

    // identities
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    // regions
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub res: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_res: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_res: Option<usize>,

    // flow
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub el_tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    /// Values present in `file` replace those given on the command line.
    pub fn overlay(&mut self, file: RunConfig) -> Result<(), Failure> {
        if let (Some(ours), Some(theirs)) = (&self.command, &file.command) {
            if ours != theirs {
                return Err(Failure::Usage(format!(
                    "configuration file is for `{theirs}`, not `{ours}`"
                )));
            }
        }
        overlay_fields!(self, file;
            metric, n, side, r, circle_radius, p, q, a, b, coord, warp, u, base, periodic, polar,
            t, s, tol, normalize, integrand, synthetic, samples, seed,
            system, t_range, s_range, res, t_res, s_res,
            family, modes, steps, lr, init_scale, theta0, el_tol, output);
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad configuration {}: {e}", path.display())))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn grid(&self) -> GridSpec {
        let d = GridSpec::default();
        GridSpec {
            periodic: self.periodic.unwrap_or(d.periodic),
            polar: self.polar.unwrap_or(d.polar),
        }
    }

    /// Fills the grid into the config so it is part of the hash.
    pub fn resolve_grid(&mut self) -> GridSpec {
        let g = self.grid();
        self.periodic = Some(g.periodic);
        self.polar = Some(g.polar);
        g
    }

    pub fn catalog_params(&self) -> CatalogParams {
        CatalogParams {
            n: self.n,
            side: self.side,
            r: self.r,
            circle_radius: self.circle_radius,
            p: self.p,
            q: self.q,
            a: self.a,
            b: self.b,
            warp: self.warp.clone(),
            base: self.base.clone().map(Box::new),
            coord: self.coord,
            u: self.u.clone(),
        }
    }

    pub fn metric_spec(&self) -> Result<MetricSpec, Failure> {
        let id = self
            .metric
            .as_deref()
            .ok_or_else(|| Failure::Usage("--metric is required".into()))?;
        MetricSpec::from_id(id, &self.catalog_params()).map_err(Failure::usage)
    }

    /// Falls back to `$CRITMETRIC_OUT_DIR/<command>.<ext>` when unset.
    pub fn resolve_output(&mut self, ext: &str) {
        if self.output.is_none() {
            if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
                if !dir.is_empty() {
                    let name = format!("{}.{ext}", self.command.as_deref().unwrap_or("run"));
                    self.output = Some(Path::new(&dir).join(name).to_string_lossy().into_owned());
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_win() {
        let mut cli = RunConfig {
            command: Some("flow".into()),
            t: Some(0.0),
            steps: Some(10),
            ..Default::default()
        };
        let file: RunConfig = toml::from_str("t = -0.5\nmodes = 2\n[warp]\ncos = [0.1]\n").unwrap();
        cli.overlay(file).unwrap();
        assert_eq!(cli.t, Some(-0.5));
        assert_eq!(cli.steps, Some(10));
        assert_eq!(cli.modes, Some(2));
        assert_eq!(cli.warp.unwrap().cos, vec![0.1]);
    }

    #[test]
    fn unknown_keys_and_foreign_commands_are_rejected() {
        assert!(toml::from_str::<RunConfig>("tolerance = 1").is_err());
        let mut cli = RunConfig {
            command: Some("flow".into()),
            ..Default::default()
        };
        let file = RunConfig {
            command: Some("region-scan".into()),
            ..Default::default()
        };
        assert!(cli.overlay(file).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig {
            t: Some(0.5),
            ..Default::default()
        };
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.t = Some(0.25);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn nested_base_metric() {
        let file: RunConfig =
            toml::from_str("metric = \"conformal\"\n[base]\nid = \"product_spheres\"\np = 2\nq = 3\n[u]\ncos = [0.05]\n")
                .unwrap();
        let spec = file.metric_spec().unwrap();
        assert_eq!(spec.dim(), 5);
    }
}
