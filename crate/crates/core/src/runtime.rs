//! Deterministic discrete-tick message-passing simulator.
//!
//! Messages sent during tick `t` are delivered during tick `t + 1`. Within a
//! tick, agents run in ascending id order and each consumes its inbox ordered
//! by sender id and then send order, so every sender→receiver channel is FIFO
//! and a run is a pure function of its inputs.
//!
//! Each agent keeps a logical clock of operations. A message carries the
//! sender's clock, the receiver advances its own clock to at least that
//! value before handling it, and the run's NCLO count is the largest clock
//! at termination.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::message::{Message, MessageKind};
use crate::model::AgentId;

pub const DEFAULT_TICK_CAP: u64 = 10_000_000;

pub trait Agent {
    /// Called once at tick 0.
    fn start(&mut self, ctx: &mut Context<'_>) -> Result<()>;

    fn handle(&mut self, from: AgentId, msg: Message, ctx: &mut Context<'_>) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// Inference.
    UtilityAccess,
    /// Search.
    ConstraintCheck,
}

#[derive(Debug)]
struct Envelope {
    from: AgentId,
    to: AgentId,
    stamp: u64,
    msg: Message,
}

/// An agent's handle on the runtime while it handles one event.
pub struct Context<'a> {
    me: AgentId,
    tick: u64,
    clock: &'a mut u64,
    outbox: &'a mut Vec<Envelope>,
    metrics: &'a mut Metrics,
    trace: Option<&'a mut String>,
}

impl Context<'_> {
    pub fn me(&self) -> AgentId {
        self.me
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn clock(&self) -> u64 {
        *self.clock
    }

    pub fn send(&mut self, to: AgentId, msg: Message) {
        let size = msg.size();
        let kind = msg.kind();
        *self.metrics.per_kind.entry(kind).or_default() += 1;
        self.metrics.messages += 1;
        self.metrics.network_load += size;
        if let Some(trace) = self.trace.as_deref_mut() {
            let _ = writeln!(trace, "{}\t{}\t{}\t{}\t{}\t{}\t{}", self.tick, self.me, to, kind, size, self.clock, msg.detail());
        }
        self.outbox.push(Envelope { from: self.me, to, stamp: *self.clock, msg });
    }

    /// Adds `count` logical operations to this agent's clock.
    pub fn charge(&mut self, kind: OpKind, count: u64) {
        *self.clock += count;
        match kind {
            OpKind::UtilityAccess => self.metrics.utility_accesses += count,
            OpKind::ConstraintCheck => self.metrics.constraint_checks += count,
        }
    }

    pub fn stale_utility(&mut self) {
        self.metrics.stale_utilities += 1;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub per_kind: BTreeMap<MessageKind, u64>,
    pub messages: u64,
    pub network_load: u64,
    pub nclo: u64,
    /// Totals over all agents (not concurrent).
    pub constraint_checks: u64,
    pub utility_accesses: u64,
    pub stale_utilities: u64,
    pub ticks: u64,
}

impl Metrics {
    pub fn count(&self, kind: MessageKind) -> u64 {
        self.per_kind.get(&kind).copied().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RuntimeConfig {
    pub tick_cap: u64,
    pub trace: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig { tick_cap: DEFAULT_TICK_CAP, trace: false }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub metrics: Metrics,
    /// TSV, one line per message: tick, sender, receiver, kind, size, nclo stamp, detail.
    pub trace: Option<String>,
    pub clocks: Vec<u64>,
}

pub const TRACE_HEADER: &str = "tick\tsender\treceiver\tkind\tsize\tnclo\tdetail\n";

/// Runs `agents` (indexed by agent id) until no message is in flight.
pub fn run<A: Agent>(agents: &mut [A], config: RuntimeConfig) -> Result<RunOutcome> {
    let n = agents.len();
    let mut clocks = vec![0u64; n];
    let mut metrics = Metrics::default();
    let mut trace = config.trace.then(|| String::from(TRACE_HEADER));
    let mut in_flight: Vec<Envelope> = Vec::new();

    for (i, agent) in agents.iter_mut().enumerate() {
        let mut ctx = Context {
            me: AgentId(i),
            tick: 0,
            clock: &mut clocks[i],
            outbox: &mut in_flight,
            metrics: &mut metrics,
            trace: trace.as_mut(),
        };
        agent.start(&mut ctx)?;
    }

    let mut tick = 0;
    while !in_flight.is_empty() {
        tick += 1;
        if tick > config.tick_cap {
            let dump = trace.as_deref().map(tail).unwrap_or_else(|| pending_summary(&in_flight));
            return Err(Error::Livelock { ticks: config.tick_cap, trace: dump });
        }
        // stable sort keeps send order within a channel
        let mut batch = std::mem::take(&mut in_flight);
        batch.sort_by_key(|e| (e.to, e.from));
        for env in batch {
            let to = env.to.0;
            clocks[to] = clocks[to].max(env.stamp);
            let mut ctx = Context {
                me: env.to,
                tick,
                clock: &mut clocks[to],
                outbox: &mut in_flight,
                metrics: &mut metrics,
                trace: trace.as_mut(),
            };
            agents[to].handle(env.from, env.msg, &mut ctx)?;
        }
    }
    metrics.ticks = tick;
    metrics.nclo = clocks.iter().copied().max().unwrap_or(0);
    Ok(RunOutcome { metrics, trace, clocks })
}

fn tail(trace: &str) -> String {
    let lines: Vec<&str> = trace.lines().collect();
    lines[lines.len().saturating_sub(50)..].join("\n")
}

fn pending_summary(in_flight: &[Envelope]) -> String {
    in_flight
        .iter()
        .take(50)
        .map(|e| format!("{} -> {}: {}", e.from, e.to, e.msg.kind()))
        .collect::<Vec<_>>()
        .join("\n")
}
