//! Exact DPOP: one UTIL sweep from the leaves up and one VALUE sweep down.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::message::Message;
use crate::model::{AgentId, Assignment, Problem};
use crate::preprocess::local_util;
use crate::runtime::{Agent, Context, OpKind};
use crate::table::UtilityTable;
use crate::tree::PseudoTree;

pub const DEFAULT_TABLE_CAP: u128 = 10_000_000;

/// Largest table any agent builds: the product of the domain sizes of its
/// separator and itself.
pub fn largest_table(problem: &Problem, tree: &PseudoTree) -> u128 {
    problem
        .agents()
        .map(|a| {
            let sep: u128 = tree.separator(a).iter().map(|v| problem.domain_size(*v) as u128).product();
            sep * problem.domain_size(a) as u128
        })
        .max()
        .unwrap_or(1)
}

pub fn check_table_cap(problem: &Problem, tree: &PseudoTree, cap: u128) -> Result<()> {
    let entries = largest_table(problem, tree);
    if entries > cap {
        return Err(Error::InstanceTooLarge { entries, cap });
    }
    Ok(())
}

/// Joined utility of every agent (dims = own variable + separator), computed
/// centrally. Projecting out the agent gives its exact UTIL message.
pub fn exact_joined_utils(problem: &Problem, tree: &PseudoTree) -> Result<Vec<UtilityTable>> {
    let n = problem.agent_count();
    let mut joined: Vec<Option<UtilityTable>> = vec![None; n];
    for agent in tree.postorder() {
        let mut acc = local_util(agent, problem, tree);
        for c in tree.children(agent) {
            let child = joined[c.0].as_ref().expect("postorder visits children first");
            acc = acc.join(&child.min_project([c])?)?;
        }
        joined[agent.0] = Some(acc);
    }
    Ok(joined.into_iter().map(|t| t.expect("every agent visited")).collect())
}

/// Exact optimum of `agent`'s subtree (including its constraints with its
/// ancestors) given values for all of its separator.
pub fn exact_subtree_cost(joined: &[UtilityTable], agent: AgentId, context: &Assignment) -> Result<u64> {
    joined[agent.0].min_project([&agent])?.lookup(context)
}

pub struct DpopAgent<'p> {
    me: AgentId,
    tree: &'p PseudoTree,
    joined: UtilityTable,
    received: BTreeMap<AgentId, UtilityTable>,
    value: Option<usize>,
}

impl<'p> DpopAgent<'p> {
    pub fn new(me: AgentId, problem: &'p Problem, tree: &'p PseudoTree) -> Self {
        DpopAgent { me, tree, joined: local_util(me, problem, tree), received: BTreeMap::new(), value: None }
    }

    pub fn value(&self) -> Option<usize> {
        self.value
    }

    fn util_phase(&mut self, ctx: &mut Context<'_>) -> Result<()> {
        for util in std::mem::take(&mut self.received).into_values() {
            self.joined = self.joined.join(&util)?;
            ctx.charge(OpKind::UtilityAccess, self.joined.len() as u64);
        }
        match self.tree.parent(self.me) {
            Some(parent) => {
                ctx.charge(OpKind::UtilityAccess, self.joined.len() as u64);
                let util = self.joined.min_project([&self.me])?;
                ctx.send(parent, Message::Util { util });
                Ok(())
            }
            None => self.value_phase(&Assignment::new(), ctx),
        }
    }

    fn value_phase(&mut self, ancestors: &Assignment, ctx: &mut Context<'_>) -> Result<()> {
        let own = self.joined.slice(ancestors)?;
        ctx.charge(OpKind::UtilityAccess, own.len() as u64);
        if own.dims() != [self.me] && !own.dims().is_empty() {
            return Err(Error::Protocol { agent: self.me, reason: "VALUE lacks separator values".into() });
        }
        // first minimum wins
        let value = own.values().iter().enumerate().min_by_key(|&(d, c)| (*c, d)).map(|(d, _)| d).unwrap_or(0);
        self.value = Some(value);
        let assignment = ancestors.with(self.me, value);
        for &c in self.tree.children(self.me) {
            ctx.send(c, Message::Value { assignment: assignment.clone() });
        }
        Ok(())
    }
}

impl Agent for DpopAgent<'_> {
    fn start(&mut self, ctx: &mut Context<'_>) -> Result<()> {
        if self.tree.children(self.me).is_empty() {
            self.util_phase(ctx)?;
        }
        Ok(())
    }

    fn handle(&mut self, from: AgentId, msg: Message, ctx: &mut Context<'_>) -> Result<()> {
        match msg {
            Message::Util { util } => {
                self.received.insert(from, util);
                if self.received.len() == self.tree.children(self.me).len() {
                    self.util_phase(ctx)?;
                }
                Ok(())
            }
            Message::Value { assignment } => self.value_phase(&assignment, ctx),
            other => Err(Error::Protocol { agent: self.me, reason: format!("unexpected {} message", other.kind()) }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t3;
    use crate::model::{brute_force_optimum, total_cost};
    use crate::runtime::{run, RuntimeConfig};
    use crate::tree::build_pseudo_tree;

    #[test]
    fn t3_run() {
        let p = t3();
        let tree = build_pseudo_tree(&p, AgentId(0)).unwrap();
        let mut agents: Vec<DpopAgent> = p.agents().map(|a| DpopAgent::new(a, &p, &tree)).collect();
        let out = run(&mut agents, RuntimeConfig::default()).unwrap();
        let assignment: Assignment = agents.iter().enumerate().map(|(i, a)| (AgentId(i), a.value().unwrap())).collect();
        assert_eq!(total_cost(&p, &assignment).unwrap(), brute_force_optimum(&p).unwrap().cost);
        assert_eq!(out.metrics.messages, 4);
    }

    #[test]
    fn root_table_is_the_optimum() {
        let p = t3();
        let tree = build_pseudo_tree(&p, AgentId(0)).unwrap();
        let joined = exact_joined_utils(&p, &tree).unwrap();
        let opt = exact_subtree_cost(&joined, AgentId(0), &Assignment::new()).unwrap();
        assert_eq!(opt, brute_force_optimum(&p).unwrap().cost);
        assert_eq!(largest_table(&p, &tree), 8);
        assert!(matches!(check_table_cap(&p, &tree, 4), Err(Error::InstanceTooLarge { entries: 8, cap: 4 })));
    }
}
