//! Run configuration: TOML file values overridden by command-line flags.

use anyhow::Context;
use evsp::master::CgConfig;
use evsp::sparsify::SparsifyConfig;
use serde::Deserialize;
use std::path::Path;
use std::time::Duration;

/// Diving parameters as written in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiveParams {
    pub strong_depth: usize,
    pub strong_candidates: usize,
    pub max_routes: usize,
    pub singletons: bool,
}

impl Default for DiveParams {
    fn default() -> Self {
        let d = evsp::search::DiveConfig::default();
        DiveParams {
            strong_depth: d.strong_depth,
            strong_candidates: d.strong_candidates,
            max_routes: d.max_routes,
            singletons: d.singletons,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub max_stations: Option<usize>,
    /// Price on the sparsified graphs.
    pub sparsify: Option<bool>,
    pub sparsify_params: SparsifyConfig,
    pub cg: CgConfig,
    pub dive: DiveParams,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Effective settings after merging file and flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub max_stations: usize,
    pub sparsify: bool,
    pub sparsify_params: SparsifyConfig,
    pub cg: CgConfig,
    pub dive: DiveParams,
}

/// Command-line overrides; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub max_stations: Option<usize>,
    pub sparsify: bool,
    pub keep: Option<[usize; 4]>,
    pub dive: Option<(usize, usize, usize, bool)>,
}

impl RunConfig {
    pub fn merge(file: FileConfig, o: Overrides) -> anyhow::Result<Self> {
        let seed = o.seed.or(file.seed).unwrap_or(0);
        let threads = o.threads.or(file.threads).unwrap_or(1);
        anyhow::ensure!(threads >= 1, "threads must be positive");
        let time_limit = match o.time_limit.or(file.time_limit) {
            Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
            Some(t) => anyhow::bail!("time limit must be positive, got {t}"),
            None => None,
        };
        let node_limit = o.node_limit.or(file.node_limit);
        anyhow::ensure!(node_limit != Some(0), "node limit must be positive");
        let mut sparsify_params = file.sparsify_params;
        if let Some(keep) = o.keep {
            sparsify_params.keep = keep;
        }
        sparsify_params.seed = seed;
        let mut dive = file.dive;
        if let Some((depth, candidates, routes, singletons)) = o.dive {
            dive = DiveParams {
                strong_depth: depth,
                strong_candidates: candidates,
                max_routes: routes,
                singletons,
            };
        }
        let mut cg = file.cg;
        cg.parallel = threads > 1;
        Ok(RunConfig {
            seed,
            threads,
            time_limit,
            node_limit,
            max_stations: o.max_stations.or(file.max_stations).unwrap_or(3),
            sparsify: o.sparsify || file.sparsify.unwrap_or(false),
            sparsify_params,
            cg,
            dive,
        })
    }
}
