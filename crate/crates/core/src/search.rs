//! The hybrid agent: depth-first branch-and-bound over the pseudo tree,
//! interleaved with context-based inference that tightens the per-child
//! lower bounds.
//!
//! # Search part
//!
//! An agent receives a CPA (the values of all its ancestors) together with a
//! budget. It answers with the exact optimum of its subtree under that CPA
//! if the optimum is below the budget, and with [`CostReport::Pruned`]
//! otherwise. Own values are tried in ascending order of local cost plus the
//! children's lower bounds; a value whose bound reaches the current budget
//! (the smaller of the received budget and the best cost found so far) ends
//! the loop. For a surviving value, all children are sent the extended CPA at
//! once, child `c` getting the budget minus the local cost and the other
//! children's lower bounds. A pruned answer from any child discards the
//! value.
//!
//! # Inference part
//!
//! Every CPA refreshes the frequency counters of the approximated dimensions
//! that the agent's children dropped. When the evaluation flag allows it, a
//! context pattern is selected, split among the children and sent down as
//! CTXT messages. Children recompute their bounded utilities with the
//! pattern values fixed and send them back as CTXTUTIL. The agent caches the
//! latest table per child and uses it instead of the preprocessing utility
//! whenever its pattern agrees with the CPA.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::context::{self, Counters, Pattern, PatternTag};
use crate::error::{Error, Result};
use crate::message::{Bound, CostReport, Message};
use crate::model::{AgentId, Assignment, Cost, Problem};
use crate::preprocess::{local_util, preprocess_step};
use crate::runtime::{Agent, Context, OpKind};
use crate::table::UtilityTable;
use crate::tree::PseudoTree;

/// Which parts of the hybrid algorithm run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Search with context-based inference and context evaluation.
    Full,
    /// Search with preprocessing bounds only.
    NoInference,
    /// Context-based inference for every context: the pattern is the full
    /// assignment of the approximated dimensions whenever it changes.
    NoEvaluation,
}

#[derive(Clone, Debug)]
pub struct AgentParams {
    pub variant: Variant,
    pub k: usize,
    pub t: f64,
    pub instrument: bool,
}

/// A lower bound the agent computed for one child under one context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRecord {
    pub child: AgentId,
    /// CPA plus the agent's own value.
    pub context: Assignment,
    pub lb: Cost,
    pub from_context_util: bool,
}

/// A context-based utility accepted from a child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextUtilRecord {
    pub child: AgentId,
    pub pattern: Pattern,
    pub util: UtilityTable,
}

/// Per-agent instrumentation, filled only when requested.
#[derive(Clone, Debug, Default)]
pub struct Probe {
    pub bounds: Vec<BoundRecord>,
    pub context_utils: Vec<ContextUtilRecord>,
    pub duplicate_cpas: usize,
    pub patterns_started: usize,
    /// Patterns started while the received CPA disallowed evaluation.
    pub eval_violations: usize,
    seen: HashSet<(Assignment, Bound)>,
}

struct CachedUtil {
    tag: PatternTag,
    pattern: Pattern,
    util: UtilityTable,
}

struct OwnPattern {
    tag: PatternTag,
    pattern: Pattern,
    awaiting: BTreeSet<AgentId>,
}

struct Relay {
    tag: PatternTag,
    pattern: Pattern,
    awaiting: BTreeSet<AgentId>,
    received: BTreeMap<AgentId, UtilityTable>,
}

struct Dispatch {
    value: usize,
    awaiting: BTreeSet<AgentId>,
    exact_sum: Cost,
    pruned: bool,
}

struct Frame {
    cpa: Assignment,
    threshold: Bound,
    eval_out: bool,
    local: Vec<Cost>,
    /// `lbs[child position][value]`
    lbs: Vec<Vec<Cost>>,
    order: Vec<usize>,
    next: usize,
    best: Option<(Cost, usize)>,
    current: Option<Dispatch>,
}

impl Frame {
    fn budget(&self) -> Bound {
        self.threshold.min_cost(self.best.map(|b| b.0))
    }

    fn lb_sum(&self, value: usize) -> Cost {
        self.lbs.iter().map(|per_value| per_value[value]).sum()
    }
}

pub struct HybridAgent<'p> {
    me: AgentId,
    problem: &'p Problem,
    tree: &'p PseudoTree,
    params: AgentParams,
    children: Vec<AgentId>,
    ancestors: Vec<AgentId>,

    local_util: UtilityTable,
    child_pre: BTreeMap<AgentId, UtilityTable>,
    child_slists: BTreeMap<AgentId, BTreeSet<AgentId>>,
    dropped: Vec<AgentId>,
    slist: BTreeSet<AgentId>,
    /// Approximated dimensions worth fixing here: dropped below and assigned in CPAs.
    tracked: BTreeSet<AgentId>,

    frame: Option<Frame>,
    solutions: HashMap<Assignment, usize>,
    final_value: Option<usize>,

    counters: Counters,
    prev_cpa: Option<Assignment>,
    eval: bool,
    own: Option<OwnPattern>,
    next_epoch: u64,
    relays: BTreeMap<AgentId, Relay>,
    cache: BTreeMap<AgentId, CachedUtil>,

    probe: Probe,
}

impl<'p> HybridAgent<'p> {
    pub fn new(me: AgentId, problem: &'p Problem, tree: &'p PseudoTree, params: AgentParams) -> Self {
        let mut ancestors = tree.ancestors(me);
        ancestors.sort();
        HybridAgent {
            me,
            problem,
            tree,
            children: tree.children(me).to_vec(),
            ancestors,
            local_util: local_util(me, problem, tree),
            params,
            child_pre: BTreeMap::new(),
            child_slists: BTreeMap::new(),
            dropped: Vec::new(),
            slist: BTreeSet::new(),
            tracked: BTreeSet::new(),
            frame: None,
            solutions: HashMap::new(),
            final_value: None,
            counters: Counters::new(),
            prev_cpa: None,
            eval: false,
            own: None,
            next_epoch: 0,
            relays: BTreeMap::new(),
            cache: BTreeMap::new(),
            probe: Probe::default(),
        }
    }

    /// Own value in the solution, once TERMINATE has arrived.
    pub fn final_value(&self) -> Option<usize> {
        self.final_value
    }

    pub fn probe(&self) -> &Probe {
        &self.probe
    }

    pub fn into_probe(self) -> Probe {
        self.probe
    }

    pub fn approximated_dims(&self) -> &BTreeSet<AgentId> {
        &self.slist
    }

    pub fn dropped_dims(&self) -> &[AgentId] {
        &self.dropped
    }

    pub fn child_pre_util(&self, child: AgentId) -> Option<&UtilityTable> {
        self.child_pre.get(&child)
    }

    fn protocol(&self, reason: impl Into<String>) -> Error {
        Error::Protocol { agent: self.me, reason: reason.into() }
    }

    fn inference_enabled(&self) -> bool {
        self.params.variant != Variant::NoInference
    }

    // ---- preprocessing -------------------------------------------------

    fn finish_preprocessing(&mut self, ctx: &mut Context<'_>) -> Result<()> {
        let step =
            preprocess_step(self.me, &self.local_util, &self.child_pre, &self.child_slists, self.params.k, self.tree)?;
        ctx.charge(OpKind::UtilityAccess, step.ops);
        self.dropped = step.dropped;
        self.slist = step.slist;
        let ancestors: BTreeSet<AgentId> = self.ancestors.iter().copied().collect();
        self.tracked =
            self.child_slists.values().flatten().copied().filter(|v| ancestors.contains(v)).collect();
        match (self.tree.parent(self.me), step.outgoing) {
            (Some(parent), Some(util)) => {
                ctx.send(parent, Message::PreUtil { util, slist: self.slist.clone() });
                Ok(())
            }
            _ => {
                // root: start the search
                self.eval = true;
                self.on_cpa(Assignment::new(), Bound::Infinite, true, ctx)
            }
        }
    }

    // ---- search part ---------------------------------------------------

    fn on_cpa(&mut self, cpa: Assignment, threshold: Bound, eval_in: bool, ctx: &mut Context<'_>) -> Result<()> {
        if self.frame.is_some() {
            return Err(self.protocol("CPA received while a search is in progress"));
        }
        if let Some(missing) = self.ancestors.iter().find(|a| !cpa.contains(**a)) {
            return Err(self.protocol(format!("CPA lacks ancestor {missing}")));
        }
        if self.params.instrument && !self.probe.seen.insert((cpa.clone(), threshold)) {
            self.probe.duplicate_cpas += 1;
        }

        let eval_out = if self.inference_enabled() { self.evaluate_context(&cpa, eval_in, ctx) } else { eval_in };

        let domain = self.problem.domain_size(self.me);
        let parents = self.tree.all_parents(self.me);
        let mut local = vec![0; domain];
        for p in &parents {
            let c = self.problem.constraint(self.me, *p).expect("tree edges are constraints");
            let pv = cpa.get(*p).expect("ancestors checked");
            for (d, slot) in local.iter_mut().enumerate() {
                *slot += c.cost_for(self.me, d, pv);
            }
        }
        ctx.charge(OpKind::ConstraintCheck, (domain * parents.len()) as u64);

        let lbs = self.init_bounds(&cpa, ctx)?;
        let mut order: Vec<usize> = (0..domain).collect();
        order.sort_by_key(|&d| (local[d] + lbs.iter().map(|l| l[d]).sum::<Cost>(), d));
        self.frame =
            Some(Frame { cpa, threshold, eval_out, local, lbs, order, next: 0, best: None, current: None });
        self.advance(ctx)
    }

    /// Per-child lower bounds for every own value, from the cached
    /// context-based utility when its pattern agrees with `cpa`, else from
    /// the preprocessing utility.
    fn init_bounds(&mut self, cpa: &Assignment, ctx: &mut Context<'_>) -> Result<Vec<Vec<Cost>>> {
        let domain = self.problem.domain_size(self.me);
        let mut all = Vec::with_capacity(self.children.len());
        for &child in &self.children {
            let cached = self.cache.get(&child).filter(|c| context::compatibility(&c.pattern, cpa));
            let table = match cached {
                Some(c) => &c.util,
                None => self.child_pre.get(&child).ok_or_else(|| self.protocol("missing child utility"))?,
            };
            let mut per_value = Vec::with_capacity(domain);
            for d in 0..domain {
                let pa = cpa.with(self.me, d);
                let lb = table.lookup(&pa)?;
                if self.params.instrument {
                    self.probe.bounds.push(BoundRecord {
                        child,
                        context: pa,
                        lb,
                        from_context_util: cached.is_some(),
                    });
                }
                per_value.push(lb);
            }
            all.push(per_value);
        }
        ctx.charge(OpKind::UtilityAccess, (domain * self.children.len()) as u64);
        Ok(all)
    }

    fn advance(&mut self, ctx: &mut Context<'_>) -> Result<()> {
        let frame = self.frame.as_mut().expect("advance runs inside a search");
        loop {
            let budget = frame.budget();
            let Some(&value) = frame.order.get(frame.next) else { break };
            let bound = frame.local[value] + frame.lb_sum(value);
            if budget.reached_by(bound) {
                // values are sorted by bound and bounds do not change during a frame
                break;
            }
            frame.next += 1;
            if self.children.is_empty() {
                frame.best = Some((frame.local[value], value));
                continue;
            }
            let extended = frame.cpa.with(self.me, value);
            for (pos, &child) in self.children.iter().enumerate() {
                let others: Cost =
                    frame.lbs.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, l)| l[value]).sum();
                let threshold = budget.minus(frame.local[value] + others);
                ctx.send(child, Message::Cpa { cpa: extended.clone(), threshold, eval: frame.eval_out });
            }
            frame.current = Some(Dispatch {
                value,
                awaiting: self.children.iter().copied().collect(),
                exact_sum: 0,
                pruned: false,
            });
            return Ok(());
        }
        self.finish_frame(ctx)
    }

    fn on_cost(&mut self, from: AgentId, report: CostReport, ctx: &mut Context<'_>) -> Result<()> {
        let me = self.me;
        let frame = self.frame.as_mut().ok_or_else(|| Error::Protocol { agent: me, reason: "unexpected COST".into() })?;
        let dispatch = frame
            .current
            .as_mut()
            .filter(|d| d.awaiting.contains(&from))
            .ok_or_else(|| Error::Protocol { agent: me, reason: format!("unexpected COST from {from}") })?;
        dispatch.awaiting.remove(&from);
        match report {
            CostReport::Exact(c) => dispatch.exact_sum += c,
            CostReport::Pruned => dispatch.pruned = true,
        }
        if !dispatch.awaiting.is_empty() {
            return Ok(());
        }
        let done = frame.current.take().expect("checked above");
        if !done.pruned {
            let total = frame.local[done.value] + done.exact_sum;
            if !frame.budget().reached_by(total) {
                frame.best = Some((total, done.value));
            }
        }
        self.advance(ctx)
    }

    fn finish_frame(&mut self, ctx: &mut Context<'_>) -> Result<()> {
        let frame = self.frame.take().expect("finish runs inside a search");
        let report = match frame.best {
            Some((cost, value)) => {
                self.solutions.insert(frame.cpa.clone(), value);
                CostReport::Exact(cost)
            }
            None => CostReport::Pruned,
        };
        match self.tree.parent(self.me) {
            Some(parent) => ctx.send(parent, Message::Cost(report)),
            None => {
                let value = frame.best.map(|b| b.1).ok_or_else(|| self.protocol("root search found nothing"))?;
                self.terminate(&Assignment::new(), value, ctx);
            }
        }
        Ok(())
    }

    fn terminate(&mut self, ancestors: &Assignment, value: usize, ctx: &mut Context<'_>) {
        self.final_value = Some(value);
        self.solutions.clear();
        let assignment = ancestors.with(self.me, value);
        for &child in &self.children {
            ctx.send(child, Message::Terminate { assignment: assignment.clone() });
        }
    }

    fn on_terminate(&mut self, assignment: Assignment, ctx: &mut Context<'_>) -> Result<()> {
        let value = *self
            .solutions
            .get(&assignment)
            .ok_or_else(|| self.protocol(format!("no solution recorded for {assignment}")))?;
        self.terminate(&assignment, value, ctx);
        Ok(())
    }

    // ---- inference part ------------------------------------------------

    /// Counter update and pattern selection on CPA receipt. Returns the
    /// evaluation flag to forward to the children.
    fn evaluate_context(&mut self, cpa: &Assignment, eval_in: bool, ctx: &mut Context<'_>) -> bool {
        if self.own.as_ref().is_some_and(|own| !context::compatibility(&own.pattern, cpa)) {
            self.drop_own_pattern();
        }
        self.counters.update(&self.tracked, self.prev_cpa.as_ref(), cpa);
        self.prev_cpa = Some(cpa.clone());

        match self.params.variant {
            Variant::Full => {
                if !eval_in && self.own.is_some() {
                    // an ancestor's pattern now covers this subtree
                    self.drop_own_pattern();
                }
                self.eval = eval_in && self.own.is_none();
                if self.eval && !self.tracked.is_empty() {
                    if let Some(pattern) =
                        context::find_context_pattern(&self.counters, &self.tracked, cpa, self.params.t)
                    {
                        if !eval_in {
                            self.probe.eval_violations += 1;
                        }
                        self.start_pattern(pattern, ctx);
                        self.eval = false;
                    }
                }
                self.eval
            }
            Variant::NoEvaluation => {
                if self.own.is_none() && !self.tracked.is_empty() {
                    let pattern = cpa.restrict(self.tracked.iter());
                    self.start_pattern(pattern, ctx);
                }
                true
            }
            Variant::NoInference => eval_in,
        }
    }

    fn drop_own_pattern(&mut self) {
        if let Some(own) = self.own.take() {
            self.cache.retain(|_, c| c.tag != own.tag);
        }
    }

    fn start_pattern(&mut self, pattern: Pattern, ctx: &mut Context<'_>) {
        self.next_epoch += 1;
        let tag = PatternTag { origin: self.me, epoch: self.next_epoch };
        let shares = context::allocate_pattern(&pattern, &self.child_slists);
        for (child, share) in &shares {
            ctx.send(*child, Message::Ctxt { tag, pattern: share.clone() });
        }
        self.probe.patterns_started += 1;
        self.own = Some(OwnPattern { tag, pattern, awaiting: shares.into_keys().collect() });
    }

    fn on_ctxt(&mut self, tag: PatternTag, pattern: Pattern, ctx: &mut Context<'_>) -> Result<()> {
        let shares = context::allocate_pattern(&pattern, &self.child_slists);
        for (child, share) in &shares {
            ctx.send(*child, Message::Ctxt { tag, pattern: share.clone() });
        }
        let relay = Relay { tag, pattern, awaiting: shares.into_keys().collect(), received: BTreeMap::new() };
        if relay.awaiting.is_empty() {
            self.reply_context_util(relay, ctx)
        } else {
            // a newer pattern from the same origin supersedes the old one
            self.relays.insert(tag.origin, relay);
            Ok(())
        }
    }

    fn reply_context_util(&mut self, relay: Relay, ctx: &mut Context<'_>) -> Result<()> {
        let tables = self.children.iter().map(|c| relay.received.get(c).unwrap_or(&self.child_pre[c]));
        let (util, ops) = context::compute_ctxt_util(self.me, &relay.pattern, &self.local_util, tables, &self.dropped)?;
        ctx.charge(OpKind::UtilityAccess, ops);
        let parent = self.tree.parent(self.me).ok_or_else(|| self.protocol("root cannot relay a pattern"))?;
        ctx.send(parent, Message::CtxtUtil { tag: relay.tag, pattern: relay.pattern, util });
        Ok(())
    }

    fn on_ctxt_util(
        &mut self,
        from: AgentId,
        tag: PatternTag,
        pattern: Pattern,
        util: UtilityTable,
        ctx: &mut Context<'_>,
    ) -> Result<()> {
        let accepted = if tag.origin == self.me {
            self.own.as_mut().is_some_and(|own| own.tag == tag && own.awaiting.remove(&from))
        } else {
            match self.relays.get_mut(&tag.origin) {
                Some(relay) if relay.tag == tag && relay.awaiting.contains(&from) => {
                    relay.awaiting.remove(&from);
                    relay.received.insert(from, util.clone());
                    true
                }
                _ => false,
            }
        };
        if !accepted {
            ctx.stale_utility();
            return Ok(());
        }
        if self.params.instrument {
            self.probe.context_utils.push(ContextUtilRecord { child: from, pattern: pattern.clone(), util: util.clone() });
        }
        self.cache.insert(from, CachedUtil { tag, pattern, util });
        if tag.origin != self.me && self.relays[&tag.origin].awaiting.is_empty() {
            let relay = self.relays.remove(&tag.origin).expect("present");
            self.reply_context_util(relay, ctx)?;
        }
        Ok(())
    }
}

impl Agent for HybridAgent<'_> {
    fn start(&mut self, ctx: &mut Context<'_>) -> Result<()> {
        if self.children.is_empty() {
            self.finish_preprocessing(ctx)?;
        }
        Ok(())
    }

    fn handle(&mut self, from: AgentId, msg: Message, ctx: &mut Context<'_>) -> Result<()> {
        match msg {
            Message::PreUtil { util, slist } => {
                self.child_pre.insert(from, util);
                self.child_slists.insert(from, slist);
                if self.child_pre.len() == self.children.len() {
                    self.finish_preprocessing(ctx)?;
                }
                Ok(())
            }
            Message::Cpa { cpa, threshold, eval } => self.on_cpa(cpa, threshold, eval, ctx),
            Message::Cost(report) => self.on_cost(from, report, ctx),
            Message::Ctxt { tag, pattern } => self.on_ctxt(tag, pattern, ctx),
            Message::CtxtUtil { tag, pattern, util } => self.on_ctxt_util(from, tag, pattern, util, ctx),
            Message::Terminate { assignment } => self.on_terminate(assignment, ctx),
            other => Err(self.protocol(format!("unexpected {} message", other.kind()))),
        }
    }
}
