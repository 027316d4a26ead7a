//! Parameter sweeps over generated instances, written as CSV.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{generate_random, Cost, GeneratorParams};
use crate::solver::{solve, Algorithm, RunResult, SolverConfig, ThresholdSpec};

pub const CSV_HEADER: &str = "instance,seed,algo,k,rho,cost,messages,network_load,nclo";

/// Parses `a`, `a,b,c` or an inclusive range `a..b` / `a..b:step`.
pub fn parse_values(text: &str, default_step: f64) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::BadConfig(format!("bad value list `{text}`: {why}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (number(hi)?, number(step)?),
            None => (number(rest)?, default_step),
        };
        let lo = number(lo)?;
        if step.is_nan() || step <= 0.0 || hi < lo {
            return Err(bad("need lo <= hi and a positive step"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| round(lo + i as f64 * step)).collect());
    }
    text.split(',').map(number).collect()
}

fn round(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub agents: usize,
    pub densities: Vec<f64>,
    pub domain_size: usize,
    pub max_cost: Cost,
    pub algorithms: Vec<Algorithm>,
    pub k: usize,
    /// One run of each context-evaluating algorithm per entry.
    pub thresholds: Vec<ThresholdSpec>,
    pub instances: usize,
    /// Instance `i` of every cell uses seed `seed + i`.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub k: usize,
    pub rho: String,
    pub cost: Cost,
    pub messages: u64,
    pub network_load: u64,
    pub nclo: u64,
}

impl SweepRow {
    pub fn from_run(instance: String, seed: u64, config: &SolverConfig, run: &RunResult) -> Self {
        let rho = match (config.algorithm, config.threshold) {
            (Algorithm::HsCai, ThresholdSpec::T(t)) => format!("t={t}"),
            (Algorithm::HsCai, _) => config.rho().map(|r| r.to_string()).unwrap_or_default(),
            _ => String::new(),
        };
        SweepRow {
            instance,
            seed,
            algorithm: config.algorithm,
            k: config.k,
            rho,
            cost: run.cost,
            messages: run.metrics.messages,
            network_load: run.metrics.network_load,
            nclo: run.metrics.nclo,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.seed,
            self.algorithm,
            self.k,
            self.rho,
            self.cost,
            self.messages,
            self.network_load,
            self.nclo
        )
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.thresholds.is_empty() {
        return Err(Error::BadConfig("at least one threshold setting is needed".into()));
    }
    let mut rows = Vec::new();
    for &density in &spec.densities {
        for i in 0..spec.instances {
            let seed = spec.seed.wrapping_add(i as u64);
            let problem = generate_random(GeneratorParams {
                agents: spec.agents,
                density,
                domain_size: spec.domain_size,
                max_cost: spec.max_cost,
                seed,
            })?;
            let label = format!("n{}-p{}-{}", spec.agents, density, i);
            for &algorithm in &spec.algorithms {
                let thresholds: &[ThresholdSpec] =
                    if algorithm == Algorithm::HsCai { &spec.thresholds } else { &spec.thresholds[..1] };
                for &threshold in thresholds {
                    let mut config = SolverConfig::new(algorithm, spec.k);
                    config.threshold = threshold;
                    let run = solve(&problem, &config)?;
                    rows.push(SweepRow::from_run(label.clone(), seed, &config, &run));
                }
            }
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.to_csv());
    }
    out
}
