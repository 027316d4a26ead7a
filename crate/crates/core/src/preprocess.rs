//! Memory-bounded bottom-up utility propagation.
//!
//! Every agent joins the constraints with its (pseudo) parents and the
//! utilities of its children, drops the dimensions of its highest ancestors
//! until the outgoing table fits the budget `k`, and sends the min-projection
//! together with the accumulated list of dropped dimensions to its parent.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{AgentId, Problem};
use crate::table::UtilityTable;
use crate::tree::PseudoTree;

/// Join of the constraints between `agent` and all of its (pseudo) parents.
/// The root has none and gets the zero-dimensional table {0}.
pub fn local_util(agent: AgentId, problem: &Problem, tree: &PseudoTree) -> UtilityTable {
    let mut acc = UtilityTable::scalar(0);
    for parent in tree.all_parents(agent) {
        let c = problem.constraint(agent, parent).expect("tree edges are constraints");
        acc = acc.join(&UtilityTable::from_constraint(c, agent, problem)).expect("domains agree");
    }
    acc
}

/// Picks the shortest shallowest-first prefix of `candidates` whose removal
/// leaves at most `k` dimensions. Ties in depth go to the lower id.
pub fn select_drop_dims(candidates: &[AgentId], k: usize, tree: &PseudoTree) -> Result<Vec<AgentId>> {
    if k < 1 {
        return Err(Error::BadConfig("the dimension limit k must be at least 1".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by_key(|a| (tree.depth(*a), *a));
    sorted.dedup();
    let excess = sorted.len().saturating_sub(k);
    sorted.truncate(excess);
    Ok(sorted)
}

/// One agent's share of the pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentPreprocess {
    pub local_util: UtilityTable,
    /// S_i, shallowest first.
    pub dropped: Vec<AgentId>,
    /// S_i ∪ ⋃_c SList_i^c.
    pub slist: BTreeSet<AgentId>,
    pub child_utils: BTreeMap<AgentId, UtilityTable>,
    pub child_slists: BTreeMap<AgentId, BTreeSet<AgentId>>,
    /// The utility sent to the parent; `None` at the root.
    pub outgoing: Option<UtilityTable>,
}

/// What an agent computes once all children have reported.
pub struct StepOutput {
    pub dropped: Vec<AgentId>,
    pub slist: BTreeSet<AgentId>,
    pub outgoing: Option<UtilityTable>,
    /// Utility entries touched, for NCLO accounting.
    pub ops: u64,
}

pub fn preprocess_step(
    agent: AgentId,
    local: &UtilityTable,
    child_utils: &BTreeMap<AgentId, UtilityTable>,
    child_slists: &BTreeMap<AgentId, BTreeSet<AgentId>>,
    k: usize,
    tree: &PseudoTree,
) -> Result<StepOutput> {
    let mut ops = 0u64;
    let mut combined = local.clone();
    for util in child_utils.values() {
        combined = combined.join(util)?;
        ops += combined.len() as u64;
    }
    let mut slist: BTreeSet<AgentId> = child_slists.values().flatten().copied().collect();
    if tree.parent(agent).is_none() {
        return Ok(StepOutput { dropped: Vec::new(), slist, outgoing: None, ops });
    }
    let candidates: Vec<AgentId> = combined.dims().iter().copied().filter(|d| *d != agent).collect();
    let dropped = select_drop_dims(&candidates, k, tree)?;
    slist.extend(dropped.iter().copied());
    let mut out_dims = dropped.clone();
    out_dims.push(agent);
    ops += combined.len() as u64;
    let outgoing = combined.min_project(&out_dims)?;
    Ok(StepOutput { dropped, slist, outgoing: Some(outgoing), ops })
}

#[derive(Clone, Debug)]
pub struct PreprocessState {
    agents: Vec<AgentPreprocess>,
    messages: usize,
}

impl PreprocessState {
    pub fn agent(&self, agent: AgentId) -> &AgentPreprocess {
        &self.agents[agent.0]
    }

    /// Number of utility messages sent (one per non-root agent).
    pub fn messages(&self) -> usize {
        self.messages
    }
}

/// Centralised leaves-to-root run of the pass, using the same per-agent step
/// as the simulated agents.
pub fn run_preprocessing(problem: &Problem, tree: &PseudoTree, k: usize) -> Result<PreprocessState> {
    if k < 1 {
        return Err(Error::BadConfig("the dimension limit k must be at least 1".into()));
    }
    let n = problem.agent_count();
    let mut slots: Vec<Option<AgentPreprocess>> = vec![None; n];
    let mut messages = 0;
    for agent in tree.postorder() {
        let local = local_util(agent, problem, tree);
        let mut child_utils = BTreeMap::new();
        let mut child_slists = BTreeMap::new();
        for &c in tree.children(agent) {
            let done = slots[c.0].as_ref().expect("postorder visits children first");
            child_utils.insert(c, done.outgoing.clone().expect("children have a parent"));
            child_slists.insert(c, done.slist.clone());
        }
        let step = preprocess_step(agent, &local, &child_utils, &child_slists, k, tree)?;
        if step.outgoing.is_some() {
            messages += 1;
        }
        slots[agent.0] = Some(AgentPreprocess {
            local_util: local,
            dropped: step.dropped,
            slist: step.slist,
            child_utils,
            child_slists,
            outgoing: step.outgoing,
        });
    }
    Ok(PreprocessState { agents: slots.into_iter().map(|s| s.expect("every agent visited")).collect(), messages })
}
