//! Protocol messages and their size accounting.
//!
//! Sizes are in abstract atoms: one table entry, one assignment pair or one
//! scalar/flag/tag is one atom.

use std::collections::BTreeSet;
use std::fmt;

use crate::context::{Pattern, PatternTag};
use crate::model::{AgentId, Assignment, Cost};
use crate::table::UtilityTable;

/// Search budget. `Infinite` is never represented by a sentinel number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(Cost),
    Infinite,
}

impl Bound {
    pub fn min_cost(self, cost: Option<Cost>) -> Bound {
        match (self, cost) {
            (b, None) => b,
            (Bound::Infinite, Some(c)) => Bound::Finite(c),
            (Bound::Finite(b), Some(c)) => Bound::Finite(b.min(c)),
        }
    }

    /// `cost >= self`
    pub fn reached_by(self, cost: Cost) -> bool {
        matches!(self, Bound::Finite(b) if cost >= b)
    }

    /// `self - cost`, saturating at zero.
    pub fn minus(self, cost: Cost) -> Bound {
        match self {
            Bound::Finite(b) => Bound::Finite(b.saturating_sub(cost)),
            Bound::Infinite => Bound::Infinite,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(c) => write!(f, "{c}"),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

/// A child's answer to a CPA: the exact optimum of its subtree under the
/// CPA, or the marker saying the optimum reaches the budget it was given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostReport {
    Exact(Cost),
    Pruned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    PreUtil,
    Cpa,
    Cost,
    Ctxt,
    CtxtUtil,
    Terminate,
    Util,
    Value,
}

impl MessageKind {
    pub const ALL: [MessageKind; 8] = [
        MessageKind::PreUtil,
        MessageKind::Cpa,
        MessageKind::Cost,
        MessageKind::Ctxt,
        MessageKind::CtxtUtil,
        MessageKind::Terminate,
        MessageKind::Util,
        MessageKind::Value,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::PreUtil => "PRE_UTIL",
            MessageKind::Cpa => "CPA",
            MessageKind::Cost => "COST",
            MessageKind::Ctxt => "CTXT",
            MessageKind::CtxtUtil => "CTXTUTIL",
            MessageKind::Terminate => "TERMINATE",
            MessageKind::Util => "UTIL",
            MessageKind::Value => "VALUE",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    /// Preprocessing utility together with the sender's approximated dimensions.
    PreUtil { util: UtilityTable, slist: BTreeSet<AgentId> },
    Cpa { cpa: Assignment, threshold: Bound, eval: bool },
    Cost(CostReport),
    Ctxt { tag: PatternTag, pattern: Pattern },
    CtxtUtil { tag: PatternTag, pattern: Pattern, util: UtilityTable },
    /// Final values of all the receiver's ancestors.
    Terminate { assignment: Assignment },
    /// DPOP utility.
    Util { util: UtilityTable },
    /// DPOP value propagation.
    Value { assignment: Assignment },
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::PreUtil { .. } => MessageKind::PreUtil,
            Message::Cpa { .. } => MessageKind::Cpa,
            Message::Cost(_) => MessageKind::Cost,
            Message::Ctxt { .. } => MessageKind::Ctxt,
            Message::CtxtUtil { .. } => MessageKind::CtxtUtil,
            Message::Terminate { .. } => MessageKind::Terminate,
            Message::Util { .. } => MessageKind::Util,
            Message::Value { .. } => MessageKind::Value,
        }
    }

    pub fn size(&self) -> u64 {
        let n = match self {
            Message::PreUtil { util, slist } => util.len() + slist.len(),
            // threshold + eval flag
            Message::Cpa { cpa, .. } => cpa.len() + 2,
            Message::Cost(_) => 1,
            // + epoch tag
            Message::Ctxt { pattern, .. } => pattern.len() + 1,
            Message::CtxtUtil { util, .. } => util.len() + 1,
            Message::Terminate { assignment } => assignment.len().max(1),
            Message::Util { util } => util.len(),
            Message::Value { assignment } => assignment.len(),
        };
        n as u64
    }

    /// Extra trace column for inference traffic.
    pub fn detail(&self) -> String {
        match self {
            Message::Ctxt { tag, pattern } => {
                format!("origin={} epoch={} pattern={}", tag.origin, tag.epoch, pattern)
            }
            Message::CtxtUtil { tag, pattern, util } => format!(
                "origin={} epoch={} pattern={} dims={}",
                tag.origin,
                tag.epoch,
                pattern,
                util.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            ),
            _ => String::new(),
        }
    }
}
