//! JSON scenario files.
//!
//! ```json
//! {
//!   "params":   { "alpha": 10, "beta": 15, "gamma": 0.1, "a": -1.31, "b": -0.75 },
//!   "topology": { "nodes": 2, "edges": [[0, 1]] },
//!   "coupling": { "name": "linear", "params": { "gain": 21.3 } },
//!   "pivot": 0,
//!   "sim":      { "dt": 0.001, "t_end": 20, "seed": 1 },
//!   "scan":     { "parameter": "k", "from": 15, "to": 25, "step": 0.5 }
//! }
//! ```
//!
//! The topology is either `edges` (symmetrized unless `directed` is true),
//! a row-major 0/1 `matrix`, or a named `kind` (`complete`, `ring`, `path`,
//! `star`, `empty`).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chua_sync_core::coupling::{self, DEFAULT_SAMPLING_RANGE};
use chua_sync_core::{
    certificate, simulate, ChuaParams, NetworkState, NodeState, SectorCoupling, Topology,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub params: ParamsConfig,
    pub topology: TopologyConfig,
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub pivot: Option<usize>,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub threshold: Option<ThresholdConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Free-form note; ignored.
    #[serde(default)]
    #[allow(dead_code)]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub nodes: Option<usize>,
    pub edges: Option<Vec<[usize; 2]>>,
    pub matrix: Option<Vec<u8>>,
    pub kind: Option<String>,
    /// Hub of a `star` topology.
    pub center: Option<usize>,
    #[serde(default)]
    pub directed: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
    /// Keep every n-th integration step in the output files.
    pub sample_every: Option<usize>,
    /// Explicit per-node initial states; overrides the seeded draw.
    pub initial: Option<Vec<[f64; 3]>>,
    /// Window `[t0, t1]` for the decay-rate fit; defaults to the second half.
    pub fit_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanParameter {
    K,
    Pivot,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub parameter: ScanParameter,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    /// Also run the gain search when the closed form applies.
    #[serde(default)]
    pub scan: bool,
}

fn default_k_max() -> f64 {
    1000.0
}

fn default_resolution() -> f64 {
    1e-3
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            k_max: default_k_max(),
            resolution: default_resolution(),
            scan: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub margin: f64,
    pub sector_samples: usize,
    pub sector_range: f64,
    pub sector_tolerance: f64,
    pub lemma_pairs: usize,
    pub lemma_tolerance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            margin: certificate::DEFAULT_MARGIN,
            sector_samples: 100_000,
            sector_range: DEFAULT_SAMPLING_RANGE,
            sector_tolerance: 1e-12,
            lemma_pairs: 100_000,
            lemma_tolerance: 1e-9,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

/// Validated simulation settings.
#[derive(Debug, Clone)]
pub struct SimSettings {
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub sample_every: usize,
    pub initial: NetworkState,
    pub fit_window: (f64, f64),
}

/// A validated config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ChuaParams,
    pub topology: Topology,
    pub coupling: SectorCoupling,
    pub pivot: Option<usize>,
    pub sim: Option<SimConfig>,
    pub scan: Option<ScanConfig>,
    pub threshold: ThresholdConfig,
    pub tolerances: Tolerances,
    pub overrides: Overrides,
    /// Set when the topology input was not symmetric.
    pub warnings: Vec<String>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Config> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn into_scenario(self, overrides: Overrides) -> CliResult<Scenario> {
        let p = &self.params;
        let params = ChuaParams::new(p.alpha, p.beta, p.gamma, p.a, p.b)?;
        let topology = self.topology.build()?;
        let mut warnings = Vec::new();
        if !topology.is_symmetric() {
            warnings.push("topology is not symmetric; treating it as directed".to_string());
        }
        let coupling = self.coupling.build()?;
        if let Some(pivot) = self.pivot {
            if pivot >= topology.len() {
                return Err(CliError::validation(format!(
                    "pivot {pivot} out of range for {} nodes",
                    topology.len()
                )));
            }
        }
        let t = &self.tolerances;
        if !(t.margin.is_finite() && t.margin >= 0.0) {
            return Err(CliError::validation(
                "tolerances.margin must be nonnegative",
            ));
        }
        if t.sector_samples < 2 || t.lemma_pairs < 1 {
            return Err(CliError::validation("sampling counts too small"));
        }
        let threshold = self.threshold.unwrap_or_default();
        if !(threshold.k_max > 0.0 && threshold.resolution > 0.0) {
            return Err(CliError::validation(
                "threshold k_max and resolution must be positive",
            ));
        }
        Ok(Scenario {
            params,
            topology,
            coupling,
            pivot: self.pivot,
            sim: self.sim,
            scan: self.scan,
            threshold,
            tolerances: self.tolerances,
            overrides,
            warnings,
        })
    }
}

impl TopologyConfig {
    pub fn build(&self) -> CliResult<Topology> {
        let given = [
            self.edges.is_some(),
            self.matrix.is_some(),
            self.kind.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(CliError::validation(
                "topology needs exactly one of edges, matrix or kind",
            ));
        }
        if let Some(m) = &self.matrix {
            let n = (m.len() as f64).sqrt().round() as usize;
            if n * n != m.len() {
                return Err(CliError::validation(
                    "topology matrix length is not a perfect square",
                ));
            }
            if self.nodes.is_some_and(|k| k != n) {
                return Err(CliError::validation(
                    "topology nodes disagrees with matrix size",
                ));
            }
            return Ok(Topology::from_matrix(n, m.clone())?);
        }
        let n = self
            .nodes
            .ok_or_else(|| CliError::validation("topology.nodes is required"))?;
        if let Some(edges) = &self.edges {
            let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
            return Ok(Topology::from_edges(n, &pairs, self.directed)?);
        }
        match self.kind.as_deref().unwrap_or_default() {
            "complete" => Ok(Topology::complete(n)),
            "ring" => Ok(Topology::ring(n)),
            "path" => Ok(Topology::path(n)),
            "empty" => Ok(Topology::empty(n)),
            "star" => Ok(Topology::star(n, self.center.unwrap_or(0))?),
            other => Err(CliError::validation(format!(
                "unknown topology kind {other:?}"
            ))),
        }
    }
}

impl CouplingConfig {
    pub fn build(&self) -> CliResult<SectorCoupling> {
        if !coupling::BUILTIN_NAMES.contains(&self.name.as_str()) {
            return Err(CliError::validation(format!(
                "unknown coupling {:?}; expected one of {}",
                self.name,
                coupling::BUILTIN_NAMES.join(", ")
            )));
        }
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let c = coupling::builtin(&self.name, &params)?;
        match (self.k1, self.k2) {
            (None, None) => Ok(c),
            (k1, k2) => {
                let (k1, k2) = (k1.unwrap_or(c.k1()), k2.unwrap_or(c.k2()));
                Ok(c.with_sector(k1, k2)?)
            }
        }
    }
}

impl Scenario {
    pub fn sim_settings(&self) -> CliResult<SimSettings> {
        let cfg = self.sim.clone().unwrap_or(SimConfig {
            dt: None,
            t_end: None,
            seed: None,
            sample_every: None,
            initial: None,
            fit_window: None,
        });
        let dt = self.overrides.dt.or(cfg.dt).unwrap_or(simulate::DEFAULT_DT);
        let t_end = self
            .overrides
            .t_end
            .or(cfg.t_end)
            .ok_or_else(|| CliError::validation("simulation needs sim.t_end or --t-end"))?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::validation("dt must be positive"));
        }
        if !(t_end.is_finite() && t_end >= dt) {
            return Err(CliError::validation("t_end must be at least one step"));
        }
        let seed = self.overrides.seed.or(cfg.seed).unwrap_or(0);
        let sample_every = cfg.sample_every.unwrap_or(1);
        if sample_every == 0 {
            return Err(CliError::validation("sim.sample_every must be positive"));
        }
        let n = self.topology.len();
        let initial = match cfg.initial {
            Some(states) if states.len() != n => {
                return Err(CliError::validation(format!(
                    "sim.initial lists {} states for {n} nodes",
                    states.len()
                )))
            }
            Some(states) => NetworkState {
                nodes: states.into_iter().map(NodeState::from).collect(),
            },
            None => NetworkState::random(n, seed),
        };
        let fit_window = match cfg.fit_window {
            Some([t0, t1]) if t0 < t1 => (t0, t1),
            Some(_) => return Err(CliError::validation("sim.fit_window must be increasing")),
            None => (0.5 * t_end, t_end),
        };
        Ok(SimSettings {
            dt,
            t_end,
            seed,
            sample_every,
            initial,
            fit_window,
        })
    }
}
