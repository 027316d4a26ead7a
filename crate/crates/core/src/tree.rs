//! DFS pseudo trees over the constraint graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{AgentId, Problem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoTree {
    root: AgentId,
    parent: Vec<Option<AgentId>>,
    children: Vec<Vec<AgentId>>,
    pseudo_parents: Vec<Vec<AgentId>>,
    pseudo_children: Vec<Vec<AgentId>>,
    depth: Vec<usize>,
    separators: Vec<BTreeSet<AgentId>>,
    preorder: Vec<AgentId>,
}

/// Highest-degree agent, lowest id on ties.
pub fn default_root(problem: &Problem) -> AgentId {
    problem
        .agents()
        .max_by(|a, b| problem.degree(*a).cmp(&problem.degree(*b)).then(b.cmp(a)))
        .expect("problems have at least one agent")
}

/// Depth-first arrangement from `root`, visiting neighbours in ascending id
/// order. Back edges become pseudo edges.
pub fn build_pseudo_tree(problem: &Problem, root: AgentId) -> Result<PseudoTree> {
    let n = problem.agent_count();
    if root.0 >= n {
        return Err(Error::BadConfig(format!("root {root} is not an agent")));
    }
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut pseudo_parents = vec![Vec::new(); n];
    let mut pseudo_children = vec![Vec::new(); n];
    let mut depth = vec![0; n];
    let mut visited = vec![false; n];
    let mut on_stack = vec![false; n];
    let mut preorder = Vec::with_capacity(n);

    // (agent, index of the next neighbour to look at)
    let mut stack = vec![(root, 0usize)];
    visited[root.0] = true;
    on_stack[root.0] = true;
    preorder.push(root);
    while let Some(top) = stack.last_mut() {
        let (v, next) = *top;
        let neighbors = problem.neighbors(v);
        if next == neighbors.len() {
            on_stack[v.0] = false;
            stack.pop();
            continue;
        }
        top.1 += 1;
        let u = neighbors[next];
        if !visited[u.0] {
            visited[u.0] = true;
            on_stack[u.0] = true;
            parent[u.0] = Some(v);
            depth[u.0] = depth[v.0] + 1;
            children[v.0].push(u);
            preorder.push(u);
            stack.push((u, 0));
        } else if on_stack[u.0] && parent[v.0] != Some(u) {
            pseudo_parents[v.0].push(u);
            pseudo_children[u.0].push(v);
        }
    }
    if preorder.len() != n {
        return Err(Error::NotConnected);
    }
    for list in pseudo_parents.iter_mut().chain(pseudo_children.iter_mut()) {
        list.sort();
    }

    let mut tree = PseudoTree {
        root,
        parent,
        children,
        pseudo_parents,
        pseudo_children,
        depth,
        separators: vec![BTreeSet::new(); n],
        preorder,
    };
    tree.separators = compute_separators(&tree);
    Ok(tree)
}

fn compute_separators(tree: &PseudoTree) -> Vec<BTreeSet<AgentId>> {
    let mut sep = vec![BTreeSet::new(); tree.parent.len()];
    for agent in tree.postorder() {
        let mut s: BTreeSet<AgentId> = tree.all_parents(agent).into_iter().collect();
        for &c in tree.children(agent) {
            s.extend(sep[c.0].iter().copied());
        }
        s.remove(&agent);
        sep[agent.0] = s;
    }
    sep
}

impl PseudoTree {
    pub fn root(&self) -> AgentId {
        self.root
    }

    pub fn agent_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, agent: AgentId) -> Option<AgentId> {
        self.parent[agent.0]
    }

    pub fn children(&self, agent: AgentId) -> &[AgentId] {
        &self.children[agent.0]
    }

    pub fn pseudo_parents(&self, agent: AgentId) -> &[AgentId] {
        &self.pseudo_parents[agent.0]
    }

    pub fn pseudo_children(&self, agent: AgentId) -> &[AgentId] {
        &self.pseudo_children[agent.0]
    }

    /// AP(a) = PP(a) ∪ {P(a)}, ascending id.
    pub fn all_parents(&self, agent: AgentId) -> Vec<AgentId> {
        let mut ap = self.pseudo_parents[agent.0].clone();
        if let Some(p) = self.parent[agent.0] {
            ap.push(p);
        }
        ap.sort();
        ap
    }

    pub fn separator(&self, agent: AgentId) -> &BTreeSet<AgentId> {
        &self.separators[agent.0]
    }

    pub fn depth(&self, agent: AgentId) -> usize {
        self.depth[agent.0]
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn is_leaf(&self, agent: AgentId) -> bool {
        self.children[agent.0].is_empty()
    }

    /// Ancestors from the parent up to the root.
    pub fn ancestors(&self, agent: AgentId) -> Vec<AgentId> {
        let mut out = Vec::new();
        let mut cur = self.parent[agent.0];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p.0];
        }
        out
    }

    pub fn is_ancestor(&self, ancestor: AgentId, agent: AgentId) -> bool {
        let mut cur = self.parent[agent.0];
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.parent[p.0];
        }
        false
    }

    /// Agents in the subtree rooted at `agent`, `agent` first.
    pub fn subtree(&self, agent: AgentId) -> Vec<AgentId> {
        let mut out = vec![agent];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i].0]);
            i += 1;
        }
        out
    }

    pub fn preorder(&self) -> &[AgentId] {
        &self.preorder
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<AgentId> {
        let mut order = self.preorder.clone();
        order.reverse();
        order
    }

    pub fn separators(&self) -> Vec<(AgentId, BTreeSet<AgentId>)> {
        self.parent.iter().enumerate().map(|(i, _)| (AgentId(i), self.separators[i].clone())).collect()
    }

    pub fn induced_width(&self) -> usize {
        self.separators.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Structural checks: every constraint joins an agent to an ancestor, AP
    /// and Sep hold only ancestors, and the separator recurrence holds.
    pub fn check(&self, problem: &Problem) -> std::result::Result<(), String> {
        for c in problem.constraints() {
            let (a, b) = c.scope();
            if !self.is_ancestor(a, b) && !self.is_ancestor(b, a) {
                return Err(format!("cross-branch constraint {a}-{b}"));
            }
        }
        for agent in problem.agents() {
            for p in self.all_parents(agent) {
                if !self.is_ancestor(p, agent) {
                    return Err(format!("{p} in AP({agent}) is not an ancestor"));
                }
            }
            let mut expected: BTreeSet<AgentId> = self.all_parents(agent).into_iter().collect();
            for &c in self.children(agent) {
                expected.extend(self.separator(c).iter().copied());
            }
            expected.remove(&agent);
            if &expected != self.separator(agent) {
                return Err(format!("separator recurrence fails at {agent}"));
            }
            if self.separator(agent).iter().any(|s| !self.is_ancestor(*s, agent)) {
                return Err(format!("Sep({agent}) holds a non-ancestor"));
            }
        }
        if !self.separator(self.root).is_empty() {
            return Err("root separator is not empty".into());
        }
        Ok(())
    }

    /// Indented text rendering, one agent per line.
    pub fn dump(&self) -> String {
        fn list(items: impl IntoIterator<Item = AgentId>) -> String {
            items.into_iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut out = String::new();
        let mut stack = vec![self.root];
        while let Some(agent) = stack.pop() {
            let indent = "  ".repeat(self.depth(agent));
            let _ = writeln!(
                out,
                "{indent}{agent} pp=[{}] pc=[{}] sep=[{}]",
                list(self.pseudo_parents(agent).iter().copied()),
                list(self.pseudo_children(agent).iter().copied()),
                list(self.separator(agent).iter().copied()),
            );
            stack.extend(self.children(agent).iter().rev());
        }
        out
    }
}
