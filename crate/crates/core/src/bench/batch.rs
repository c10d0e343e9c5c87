use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::record::RunRecord;
use crate::error::BenchError;
use crate::network::Network;
use crate::pq::build_pq;
use crate::solve::{branch_and_cut, BranchAndCutOptions, GapSpec, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Config {
    Default,
    Cuts,
    Heuristic,
    CutsHeuristic,
}

impl Config {
    pub const ALL: [Config; 4] = [Config::Default, Config::Cuts, Config::Heuristic, Config::CutsHeuristic];

    pub fn as_str(self) -> &'static str {
        match self {
            Config::Default => "default",
            Config::Cuts => "cuts",
            Config::Heuristic => "heuristic",
            Config::CutsHeuristic => "cuts+heuristic",
        }
    }

    pub fn options(self) -> BranchAndCutOptions {
        let (cuts, heuristic) = match self {
            Config::Default => (false, false),
            Config::Cuts => (true, false),
            Config::Heuristic => (false, true),
            Config::CutsHeuristic => (true, true),
        };
        BranchAndCutOptions::default().with_cuts(cuts).with_heuristic(heuristic)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Config {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Config::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| BenchError::UnknownConfig(s.to_string()))
    }
}

/// Batch termination criteria at desk scale: 120 s per run and a relative gap of 1e-4.
pub fn desk_gap_spec() -> GapSpec {
    GapSpec::default().with_rel_tol(1e-4).with_time_limit(Duration::from_secs(120))
}

/// Wall time of a run, minus heuristic and cut-generation time in oracle mode.
pub fn recorded_time(report: &SolveReport, oracle: bool) -> f64 {
    if oracle {
        (report.wall_seconds - report.heuristic_seconds - report.cut_seconds).max(0.0)
    } else {
        report.wall_seconds
    }
}

pub fn record_from_report(instance: &str, config: Config, report: &SolveReport, oracle: bool) -> RunRecord {
    RunRecord::new(instance, config.as_str(), report.status.as_str(), recorded_time(report, oracle), report.lower, report.upper)
}

/// Solves one cell. Failures become a record with status `error`.
pub fn run_cell(name: &str, net: &Network, config: Config, spec: &GapSpec, oracle: bool) -> (RunRecord, Option<String>) {
    let start = Instant::now();
    let outcome = build_pq(Arc::new(net.clone()))
        .map_err(|e| e.to_string())
        .and_then(|pq| branch_and_cut(&pq, spec, &config.options()).map_err(|e| e.to_string()));
    match outcome {
        Ok(report) => (record_from_report(name, config, &report, oracle), None),
        Err(message) => {
            let record = RunRecord::new(
                name,
                config.as_str(),
                "error",
                start.elapsed().as_secs_f64(),
                f64::NEG_INFINITY,
                f64::INFINITY,
            );
            (record, Some(message))
        }
    }
}

/// Runs every configuration on every instance, in (instance, config) order.
pub fn run_batch(instances: &[(String, Network)], configs: &[Config], spec: &GapSpec, oracle: bool) -> Vec<RunRecord> {
    let mut out = Vec::with_capacity(instances.len() * configs.len());
    for (name, net) in instances {
        for &config in configs {
            out.push(run_cell(name, net, config, spec, oracle).0);
        }
    }
    out
}

/// Loads every `*.json` network of a directory, sorted by file name.
pub fn load_instances_dir(dir: &Path) -> Result<Vec<(String, Network)>, BenchError> {
    let entries = std::fs::read_dir(dir).map_err(|e| BenchError::Table(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).map_err(|e| BenchError::Table(format!("{}: {e}", p.display())))?;
            let net = Network::from_json(&bytes).map_err(|e| BenchError::Table(format!("{}: {e}", p.display())))?;
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((stem, net))
        })
        .collect()
}
