use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::record::RunRecord;
use crate::error::BenchError;

/// `(prod (v_i + shift))^(1/n) - shift`, evaluated in log space.
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let mut log_sum = 0.0;
    for &v in values {
        let shifted = v + shift;
        if !(shifted > 0.0) {
            return Err(BenchError::NonPositiveShifted(v));
        }
        log_sum += shifted.ln();
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(values[0]);
    }
    Ok((log_sum / values.len() as f64).exp() - shift)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub tau: f64,
    /// Fraction of instances per configuration, in [`PerformanceProfile::configs`] order.
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub configs: Vec<String>,
    pub instances: Vec<String>,
    /// `ratios[c][p]`: performance ratio of config `c` on instance `p`, `+inf` when unsolved.
    pub ratios: Vec<Vec<f64>>,
    /// One point per distinct finite ratio, ascending.
    pub points: Vec<ProfilePoint>,
}

impl PerformanceProfile {
    /// Fraction of instances on which `config` is within factor `tau` of the best.
    pub fn rho(&self, config: &str, tau: f64) -> Option<f64> {
        let c = self.configs.iter().position(|n| n == config)?;
        let hits = self.ratios[c].iter().filter(|&&r| r.is_finite() && r <= tau).count();
        Some(hits as f64 / self.instances.len() as f64)
    }

    pub fn solved_fraction(&self, config: &str) -> Option<f64> {
        let c = self.configs.iter().position(|n| n == config)?;
        let hits = self.ratios[c].iter().filter(|r| r.is_finite()).count();
        Some(hits as f64 / self.instances.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau");
        for c in &self.configs {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{}", p.tau).expect("string write");
            for r in &p.rho {
                write!(out, ",{r}").expect("string write");
            }
            out.push('\n');
        }
        out
    }

    /// Whitespace-separated step data, one column block per configuration, for `plot ... with steps`.
    pub fn to_dat(&self) -> String {
        let mut out = String::from("# tau");
        for c in &self.configs {
            write!(out, " {c}").expect("string write");
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{}", p.tau).expect("string write");
            for r in &p.rho {
                write!(out, " {r}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

/// Whether a record counts as solved for the profile.
pub fn solved(record: &RunRecord) -> bool {
    record.status == "optimal" && record.time.is_finite()
}

/// Performance ratios and the profile step series over solve times.
pub fn performance_profile(records: &[RunRecord]) -> Result<PerformanceProfile, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let mut configs: Vec<String> = Vec::new();
    let mut instances: Vec<String> = Vec::new();
    let mut times: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in records {
        if !configs.contains(&r.config) {
            configs.push(r.config.clone());
        }
        if !instances.contains(&r.instance) {
            instances.push(r.instance.clone());
        }
        let t = if solved(r) { r.time } else { f64::INFINITY };
        times.insert((r.instance.as_str(), r.config.as_str()), t);
    }
    let mut ratios = vec![vec![f64::INFINITY; instances.len()]; configs.len()];
    for (p, inst) in instances.iter().enumerate() {
        let mut row = Vec::with_capacity(configs.len());
        for c in &configs {
            let t = times
                .get(&(inst.as_str(), c.as_str()))
                .copied()
                .ok_or_else(|| BenchError::MissingRecord { instance: inst.clone(), config: c.clone() })?;
            row.push(t);
        }
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        for (c, &t) in row.iter().enumerate() {
            ratios[c][p] = if !t.is_finite() {
                f64::INFINITY
            } else if t == best {
                1.0
            } else {
                t / best
            };
        }
    }
    let mut taus: Vec<f64> = ratios.iter().flatten().copied().filter(|r| r.is_finite()).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let n = instances.len() as f64;
    let points = taus
        .into_iter()
        .map(|tau| ProfilePoint {
            tau,
            rho: ratios.iter().map(|rs| rs.iter().filter(|&&r| r <= tau).count() as f64 / n).collect(),
        })
        .collect();
    Ok(PerformanceProfile { configs, instances, ratios, points })
}
