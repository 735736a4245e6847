//! Flat TOML configuration with sections [manifold], [analysis],
//! [tolerances] and [output]. Every default is filled in during
//! validation and echoed into the report, so a report is self-describing.

use crate::{HarnessError, Result};
use poslab_core::geometry::{
    make_model, DomainSpec, LeftKind, RadialGrid, RightKind, WarpingProfile,
};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub manifold: RawManifold,
    #[serde(default)]
    pub analysis: RawAnalysis,
    #[serde(default)]
    pub tolerances: RawTolerances,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawManifold {
    pub profile: String,
    /// Growth coefficient for the superexp profile.
    pub a: Option<f64>,
    pub n: usize,
    #[serde(default)]
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: Option<usize>,
    /// Alternative to `nodes`: target spacing.
    pub h: Option<f64>,
    pub left: Option<String>,
    pub right: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAnalysis {
    pub p: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub k_list: Option<Vec<f64>>,
    pub sequence_len: Option<usize>,
    pub count: Option<usize>,
    pub name: Option<String>,
    pub region: Option<[f64; 2]>,
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTolerances {
    pub slope_min: Option<f64>,
    pub ratio_target: Option<f64>,
    pub ratio_band: Option<f64>,
    pub exponent_agree: Option<f64>,
    pub adjoint_rel: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<String>,
}

/// Fully validated configuration with every default made explicit.
#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub profile: String,
    pub a: f64,
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub left: String,
    pub right: String,
    pub p: f64,
    pub p_list: Vec<f64>,
    pub eps: Option<f64>,
    pub k_list: Vec<f64>,
    pub sequence_len: usize,
    pub count: usize,
    pub name: String,
    pub region: Option<[f64; 2]>,
    pub window: Option<[f64; 2]>,
    pub slope_min: f64,
    pub ratio_target: f64,
    pub ratio_band: f64,
    pub exponent_agree: f64,
    pub adjoint_rel: f64,
    pub out_dir: String,
}

impl Config {
    pub fn warping_profile(&self) -> Result<WarpingProfile> {
        match self.profile.as_str() {
            "euclidean" => Ok(WarpingProfile::Euclidean),
            "hyperbolic" => Ok(WarpingProfile::Hyperbolic),
            "superexp" => Ok(WarpingProfile::superexp(self.a)),
            "linear-cap" => Ok(WarpingProfile::LinearCap),
            "finite-volume" => Ok(WarpingProfile::finite_volume()),
            other => Err(HarnessError::InvalidConfig(format!(
                "unknown profile '{other}' (expected euclidean, hyperbolic, superexp, linear-cap or finite-volume)"
            ))),
        }
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let left = match self.left.as_str() {
            "pole" => LeftKind::Pole,
            "open" => LeftKind::Open,
            other => {
                return Err(HarnessError::InvalidConfig(format!(
                    "unknown left end '{other}' (expected pole or open)"
                )))
            }
        };
        let right = match self.right.as_str() {
            "truncation" => RightKind::Truncation,
            "boundary" => RightKind::Boundary,
            other => {
                return Err(HarnessError::InvalidConfig(format!(
                    "unknown right end '{other}' (expected truncation or boundary)"
                )))
            }
        };
        Ok(DomainSpec {
            r_min: self.r_min,
            r_max: self.r_max,
            left,
            right,
        })
    }

    /// Builds the configured grid, optionally with the node count scaled
    /// for a refinement sweep level.
    pub fn build_grid(&self, nodes: usize) -> Result<Arc<RadialGrid>> {
        let (_, grid) = make_model(self.warping_profile()?, self.n, self.domain()?, nodes)
            .map_err(HarnessError::Run)?;
        Ok(grid)
    }

    /// Node count at sweep level l: the cell count doubles per level.
    pub fn nodes_at_level(&self, level: usize) -> usize {
        (self.nodes - 1) * (1usize << level) + 1
    }
}

pub fn load(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| HarnessError::InvalidConfig(format!("{e}")))?;
    validate(raw)
}

pub fn validate(raw: RawConfig) -> Result<Config> {
    let m = &raw.manifold;
    if m.r_max <= m.r_min {
        return Err(HarnessError::InvalidConfig(format!(
            "need r_min < r_max, got [{}, {}]",
            m.r_min, m.r_max
        )));
    }
    let nodes = match (m.nodes, m.h) {
        (Some(n), None) => n,
        (None, Some(h)) if h > 0.0 => ((m.r_max - m.r_min) / h).round() as usize + 1,
        (None, None) => {
            return Err(HarnessError::InvalidConfig(
                "manifold needs either nodes or h".to_string(),
            ))
        }
        _ => {
            return Err(HarnessError::InvalidConfig(
                "give nodes or h, not both".to_string(),
            ))
        }
    };
    if nodes < 8 {
        return Err(HarnessError::InvalidConfig(format!(
            "grid needs at least 8 nodes, got {nodes}"
        )));
    }
    let left = m
        .left
        .clone()
        .unwrap_or_else(|| if m.r_min == 0.0 { "pole" } else { "open" }.to_string());
    let right = m.right.clone().unwrap_or_else(|| "truncation".to_string());
    let a = raw.analysis;
    let t = raw.tolerances;
    let r_span = m.r_max;
    let cfg = Config {
        profile: m.profile.clone(),
        a: m.a.unwrap_or(1.0),
        n: m.n,
        r_min: m.r_min,
        r_max: m.r_max,
        nodes,
        left,
        right,
        p: a.p.unwrap_or(2.0),
        p_list: a.p_list.unwrap_or_else(|| vec![1.1, 1.5, 2.0, 3.0]),
        eps: a.eps,
        k_list: a
            .k_list
            .unwrap_or_else(|| vec![r_span / 16.0, r_span / 8.0, r_span / 4.0, r_span / 2.0]),
        sequence_len: a.sequence_len.unwrap_or(3),
        count: a.count.unwrap_or(10),
        name: a.name.unwrap_or_else(|| "punctured-ball".to_string()),
        region: a.region,
        window: a.window,
        slope_min: t.slope_min.unwrap_or(1.9),
        ratio_target: t.ratio_target.unwrap_or(0.25),
        ratio_band: t.ratio_band.unwrap_or(0.075),
        exponent_agree: t.exponent_agree.unwrap_or(0.05),
        adjoint_rel: t.adjoint_rel.unwrap_or(1e-12),
        out_dir: raw.output.dir.unwrap_or_else(|| "poslab-out".to_string()),
    };
    // Fail fast on an unknown profile or malformed domain flags.
    cfg.warping_profile()?;
    cfg.domain()?;
    if !(cfg.p >= 1.0) {
        return Err(HarnessError::InvalidConfig(format!(
            "need p >= 1, got {}",
            cfg.p
        )));
    }
    if cfg.count == 0 {
        return Err(HarnessError::InvalidConfig(
            "count must be positive".to_string(),
        ));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| HarnessError::InvalidConfig(format!("{e}")))?;
        validate(raw)
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = parse("[manifold]\nprofile = \"euclidean\"\nn = 3\nr_max = 8.0\nnodes = 401\n")
            .unwrap();
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.left, "pole");
        assert_eq!(cfg.k_list.len(), 4);
        assert_eq!(cfg.out_dir, "poslab-out");
    }

    #[test]
    fn misspelled_profile_is_rejected() {
        let err = parse("[manifold]\nprofile = \"euclidian\"\nn = 3\nr_max = 8.0\nnodes = 401\n")
            .unwrap_err();
        assert!(format!("{err}").contains("euclidian"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse(
            "[manifold]\nprofile = \"euclidean\"\nn = 3\nr_max = 8.0\nnodes = 401\ntypo = 1\n",
        )
        .is_err());
    }

    #[test]
    fn h_and_nodes_are_exclusive() {
        assert!(parse(
            "[manifold]\nprofile = \"euclidean\"\nn = 3\nr_max = 8.0\nnodes = 401\nh = 0.01\n",
        )
        .is_err());
        let cfg =
            parse("[manifold]\nprofile = \"euclidean\"\nn = 3\nr_max = 8.0\nh = 0.01\n").unwrap();
        assert_eq!(cfg.nodes, 801);
    }
}
