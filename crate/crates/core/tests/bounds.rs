mod common;

use common::{instrumented_run, context_vs_preprocessing, bounds_vs_exact, small_instances, Tally};
use hscai::model::brute_force_optimum;
use hscai::{Algorithm, SolverConfig};

fn configs() -> Vec<SolverConfig> {
    let mut out = Vec::new();
    for k in 1..=3 {
        out.push(SolverConfig::new(Algorithm::HsCai, k).with_rho(0.0));
        out.push(SolverConfig::new(Algorithm::HsCai, k));
        out.push(SolverConfig::new(Algorithm::HsCaiNoEval, k));
    }
    out
}

#[test]
fn context_utilities_never_loosen_bounds() {
    let mut total = Tally::default();
    for p in small_instances() {
        for config in configs() {
            let (tree, run) = instrumented_run(&p, &config);
            let tally = context_vs_preprocessing(&p, &tree, &run, config.k);
            assert_eq!(tally.violations, 0, "{config:?}");
            total.add(tally);
        }
    }
    assert!(total.checked > 0);
    assert!(total.strict > 0, "{total:?}");
}

#[test]
fn lower_bounds_are_admissible() {
    for p in small_instances() {
        for config in configs() {
            let (tree, run) = instrumented_run(&p, &config);
            let (tally, on_path) = bounds_vs_exact(&p, &tree, &run);
            assert_eq!(tally.violations, 0, "{config:?}");
            assert!(on_path > 0 || tree.agent_count() == 1);
        }
    }
}

#[test]
fn search_never_repeats_a_cpa_and_respects_evaluation() {
    for p in small_instances() {
        for config in configs() {
            let (_, run) = instrumented_run(&p, &config);
            assert!(run.probes.iter().all(|pr| pr.duplicate_cpas == 0));
            assert!(run.probes.iter().all(|pr| pr.eval_violations == 0));
            assert_eq!(run.cost, brute_force_optimum(&p).unwrap().cost);
        }
    }
}

#[test]
fn inference_actually_runs() {
    let started: usize = small_instances()
        .iter()
        .map(|p| {
            let (_, run) = instrumented_run(p, &SolverConfig::new(Algorithm::HsCai, 1).with_rho(0.0));
            run.probes.iter().map(|pr| pr.patterns_started).sum::<usize>()
        })
        .sum();
    assert!(started > 0);
}
