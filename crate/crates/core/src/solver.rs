//! One entry point over all algorithms.

use std::fmt;
use std::str::FromStr;

use crate::context::threshold_t;
use crate::dpop::{check_table_cap, DpopAgent, DEFAULT_TABLE_CAP};
use crate::error::{Error, Result};
use crate::model::{brute_force_optimum, total_cost, AgentId, Assignment, Cost, Problem};
use crate::runtime::{run, Metrics, RunOutcome, RuntimeConfig, DEFAULT_TICK_CAP};
use crate::search::{AgentParams, HybridAgent, Probe, Variant};
use crate::tree::{build_pseudo_tree, default_root, PseudoTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    HsCai,
    HsAi,
    HsCaiNoEval,
    Dpop,
    Brute,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::HsCai, Algorithm::HsAi, Algorithm::HsCaiNoEval, Algorithm::Dpop, Algorithm::Brute];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::HsCai => "hs-cai",
            Algorithm::HsAi => "hs-ai",
            Algorithm::HsCaiNoEval => "hs-cai-nm",
            Algorithm::Dpop => "dpop",
            Algorithm::Brute => "brute",
        }
    }

    fn variant(self) -> Option<Variant> {
        match self {
            Algorithm::HsCai => Some(Variant::Full),
            Algorithm::HsAi => Some(Variant::NoInference),
            Algorithm::HsCaiNoEval => Some(Variant::NoEvaluation),
            Algorithm::Dpop | Algorithm::Brute => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::BadConfig(format!("unknown algorithm `{s}`")))
    }
}

/// How the context-evaluation threshold is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdSpec {
    /// t = d_max^(ρ·h)
    Rho(f64),
    /// t given directly.
    T(f64),
    /// ρ picked from k.
    Default,
}

/// 0.25 up to k = 6, 0.45 from k = 10, linear in between.
pub fn default_rho(k: usize) -> f64 {
    match k {
        0..=6 => 0.25,
        10.. => 0.45,
        _ => 0.25 + 0.05 * (k - 6) as f64,
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub threshold: ThresholdSpec,
    /// Pseudo-tree root; the highest-degree agent when unset.
    pub root: Option<AgentId>,
    pub tick_cap: u64,
    pub trace: bool,
    /// Collect per-agent bound and context-utility records.
    pub instrument: bool,
    /// DPOP table-size limit in entries.
    pub table_cap: u128,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, k: usize) -> Self {
        SolverConfig {
            algorithm,
            k,
            threshold: ThresholdSpec::Default,
            root: None,
            tick_cap: DEFAULT_TICK_CAP,
            trace: false,
            instrument: false,
            table_cap: DEFAULT_TABLE_CAP,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.threshold = ThresholdSpec::Rho(rho);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.threshold = ThresholdSpec::T(t);
        self
    }

    pub fn with_root(mut self, root: AgentId) -> Self {
        self.root = Some(root);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn instrumented(mut self) -> Self {
        self.instrument = true;
        self
    }

    /// The ρ the run uses, if the threshold is given through ρ.
    pub fn rho(&self) -> Option<f64> {
        match self.threshold {
            ThresholdSpec::Rho(r) => Some(r),
            ThresholdSpec::Default => Some(default_rho(self.k)),
            ThresholdSpec::T(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::BadConfig("k must be at least 1".into()));
        }
        match self.threshold {
            ThresholdSpec::Rho(r) if !(r.is_finite() && r >= 0.0) => {
                Err(Error::BadConfig(format!("rho must be a non-negative number, got {r}")))
            }
            ThresholdSpec::T(t) if !(t.is_finite() && t >= 0.0) => {
                Err(Error::BadConfig(format!("t must be a non-negative number, got {t}")))
            }
            _ => Ok(()),
        }
    }

    fn t(&self, problem: &Problem, tree: &PseudoTree) -> f64 {
        match self.threshold {
            ThresholdSpec::T(t) => t,
            _ => threshold_t(problem.max_domain_size(), tree.height(), self.rho().expect("rho-based")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub assignment: Assignment,
    pub cost: Cost,
    pub metrics: Metrics,
    /// TSV trace with header, when requested.
    pub trace: Option<String>,
    /// One probe per agent for instrumented hybrid runs, else empty.
    pub probes: Vec<Probe>,
    /// Context-evaluation threshold used; `None` for runs without inference.
    pub t: Option<f64>,
}

pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<RunResult> {
    config.validate()?;
    let root = match config.root {
        Some(r) if r.0 >= problem.agent_count() => {
            return Err(Error::BadConfig(format!("root {r} is not an agent")));
        }
        Some(r) => r,
        None => default_root(problem),
    };
    let tree = build_pseudo_tree(problem, root)?;
    solve_with_tree(problem, &tree, config)
}

pub fn solve_with_tree(problem: &Problem, tree: &PseudoTree, config: &SolverConfig) -> Result<RunResult> {
    config.validate()?;
    let runtime = RuntimeConfig { tick_cap: config.tick_cap, trace: config.trace };
    let result = match config.algorithm {
        Algorithm::Brute => {
            let best = brute_force_optimum(problem)?;
            RunResult {
                assignment: best.assignment,
                cost: best.cost,
                metrics: Metrics::default(),
                trace: config.trace.then(|| crate::runtime::TRACE_HEADER.to_string()),
                probes: Vec::new(),
                t: None,
            }
        }
        Algorithm::Dpop => {
            check_table_cap(problem, tree, config.table_cap)?;
            let mut agents: Vec<DpopAgent> = problem.agents().map(|a| DpopAgent::new(a, problem, tree)).collect();
            let outcome = run(&mut agents, runtime)?;
            let assignment = collect(agents.iter().map(|a| a.value()))?;
            finish(problem, assignment, outcome, Vec::new(), None)?
        }
        hybrid => {
            let variant = hybrid.variant().expect("hybrid algorithm");
            let t = config.t(problem, tree);
            let params = AgentParams { variant, k: config.k, t, instrument: config.instrument };
            let mut agents: Vec<HybridAgent> =
                problem.agents().map(|a| HybridAgent::new(a, problem, tree, params.clone())).collect();
            let outcome = run(&mut agents, runtime)?;
            let assignment = collect(agents.iter().map(|a| a.final_value()))?;
            let probes = if config.instrument { agents.into_iter().map(HybridAgent::into_probe).collect() } else { Vec::new() };
            let t = (variant == Variant::Full).then_some(t);
            finish(problem, assignment, outcome, probes, t)?
        }
    };
    Ok(result)
}

fn collect(values: impl Iterator<Item = Option<usize>>) -> Result<Assignment> {
    values
        .enumerate()
        .map(|(i, v)| {
            v.map(|v| (AgentId(i), v)).ok_or_else(|| Error::Protocol {
                agent: AgentId(i),
                reason: "terminated without a value".into(),
            })
        })
        .collect()
}

fn finish(
    problem: &Problem,
    assignment: Assignment,
    outcome: RunOutcome,
    probes: Vec<Probe>,
    t: Option<f64>,
) -> Result<RunResult> {
    let cost = total_cost(problem, &assignment)?;
    Ok(RunResult { assignment, cost, metrics: outcome.metrics, trace: outcome.trace, probes, t })
}
