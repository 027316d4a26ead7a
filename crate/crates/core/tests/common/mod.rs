//! Oracles shared by the integration tests.

#![allow(dead_code)]

use hscai::dpop::{exact_joined_utils, exact_subtree_cost};
use hscai::model::{generate_random, GeneratorParams};
use hscai::preprocess::run_preprocessing;
use hscai::solver::solve_with_tree;
use hscai::tree::{build_pseudo_tree, default_root};
use hscai::{Problem, PseudoTree, RunResult, SolverConfig, UtilityTable};

/// Twenty connected instances with 6 to 8 agents.
pub fn small_instances() -> Vec<Problem> {
    (0..20)
        .map(|i| {
            generate_random(GeneratorParams {
                agents: 6 + i % 3,
                density: [0.4, 0.6][i / 3 % 2],
                domain_size: 3,
                max_cost: 20,
                seed: 100 + i as u64,
            })
            .unwrap()
        })
        .collect()
}

pub fn instrumented_run(problem: &Problem, config: &SolverConfig) -> (PseudoTree, RunResult) {
    let tree = build_pseudo_tree(problem, config.root.unwrap_or_else(|| default_root(problem))).unwrap();
    let run = solve_with_tree(problem, &tree, &config.clone().instrumented()).unwrap();
    (tree, run)
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub checked: u64,
    pub strict: u64,
    pub violations: u64,
}

impl Tally {
    pub fn add(&mut self, other: Tally) {
        self.checked += other.checked;
        self.strict += other.strict;
        self.violations += other.violations;
    }
}

/// Every accepted context-based utility against the preprocessing utility
/// of the same child, over every assignment compatible with its pattern.
pub fn context_vs_preprocessing(problem: &Problem, tree: &PseudoTree, run: &RunResult, k: usize) -> Tally {
    let pre = run_preprocessing(problem, tree, k).unwrap();
    let mut tally = Tally::default();
    for probe in &run.probes {
        for rec in &probe.context_utils {
            let pre_util = pre.agent(rec.child).outgoing.as_ref().unwrap();
            let mut free: Vec<_> = rec.util.dims().to_vec();
            for d in pre_util.dims() {
                if !free.contains(d) && !rec.pattern.contains(*d) {
                    free.push(*d);
                }
            }
            let cards: Vec<usize> = free.iter().map(|d| problem.domain_size(*d)).collect();
            UtilityTable::from_fn(free, cards, |a| {
                let mut full = a.clone();
                for (v, d) in rec.pattern.iter() {
                    full.insert(*v, *d);
                }
                let ctxt = rec.util.lookup(&full).unwrap();
                let base = pre_util.lookup(&full).unwrap();
                tally.checked += 1;
                if ctxt > base {
                    tally.strict += 1;
                } else if ctxt < base {
                    tally.violations += 1;
                }
                0
            });
        }
    }
    tally
}

/// Every lower bound the agents used against the exact optimum of the
/// child's subtree under the same context. `on_path` counts bounds taken
/// along the returned solution.
pub fn bounds_vs_exact(problem: &Problem, tree: &PseudoTree, run: &RunResult) -> (Tally, u64) {
    let joined = exact_joined_utils(problem, tree).unwrap();
    let mut tally = Tally::default();
    let mut on_path = 0;
    for probe in &run.probes {
        for rec in &probe.bounds {
            let exact = exact_subtree_cost(&joined, rec.child, &rec.context).unwrap();
            tally.checked += 1;
            if rec.lb > exact {
                tally.violations += 1;
            } else if rec.lb < exact {
                tally.strict += 1;
            }
            if rec.context.agrees_with(&run.assignment) {
                on_path += 1;
            }
        }
    }
    (tally, on_path)
}
