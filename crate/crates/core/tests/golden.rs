//! Frozen outputs. Set `UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::fs;
use std::path::PathBuf;

use hscai::fixtures::{five_agent_example, t3};
use hscai::message::MessageKind;
use hscai::model::brute_force_optimum;
use hscai::{solve, AgentId, Algorithm, Problem, SolverConfig};

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{} differs", path.display());
}

#[test]
fn t3_trace_and_nclo() {
    let r = solve(&t3(), &SolverConfig::new(Algorithm::HsCai, 1).with_trace()).unwrap();
    assert_eq!(r.cost, 3);
    golden("t3_hs_cai_k1.tsv", r.trace.as_deref().unwrap());
    assert_eq!(r.metrics.nclo, 28);
    assert_eq!(r.metrics.messages, 8);
    assert_eq!(r.metrics.network_load, 18);
    assert_eq!(r.metrics.count(MessageKind::PreUtil), 2);
}

#[test]
fn t3_file_matches_fixture() {
    let text = fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/t3.json")).unwrap();
    assert_eq!(Problem::from_json(&text).unwrap(), t3());
}

#[test]
fn five_agent_example_every_solver() {
    let p = five_agent_example();
    let opt = brute_force_optimum(&p).unwrap().cost;
    for algo in Algorithm::ALL {
        for k in 1..=3 {
            let r = solve(&p, &SolverConfig::new(algo, k).with_root(AgentId(0)).with_rho(0.0)).unwrap();
            assert_eq!(r.cost, opt, "{algo} k={k}");
        }
    }
}
