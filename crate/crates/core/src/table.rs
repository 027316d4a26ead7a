//! Dense cost hypercubes.
//!
//! A [`UtilityTable`] stores one non-negative cost per combination of values
//! of its dimensions, row-major with the last dimension varying fastest. All
//! operations return new tables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{AgentId, Assignment, Constraint, Cost, Problem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityTable {
    dims: Vec<AgentId>,
    cards: Vec<usize>,
    values: Vec<Cost>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cards[k + 1];
    }
    s
}

/// Advances a mixed-radix counter; returns false after the last combination.
fn advance(digits: &mut [usize], cards: &[usize]) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < cards[k] {
            return true;
        }
        digits[k] = 0;
    }
    false
}

impl UtilityTable {
    pub fn new(dims: Vec<AgentId>, cards: Vec<usize>, values: Vec<Cost>) -> Result<Self> {
        if dims.len() != cards.len() {
            return Err(Error::InvalidProblem("one cardinality per dimension is required".into()));
        }
        let unique: BTreeSet<_> = dims.iter().collect();
        if unique.len() != dims.len() {
            return Err(Error::InvalidProblem("duplicate table dimension".into()));
        }
        if cards.iter().product::<usize>() != values.len() {
            return Err(Error::InvalidProblem("entry count does not match the dimensions".into()));
        }
        Ok(UtilityTable { dims, cards, values })
    }

    pub fn scalar(value: Cost) -> Self {
        UtilityTable { dims: Vec::new(), cards: Vec::new(), values: vec![value] }
    }

    /// The constraint between `first` and `second` as a table over `(first, second)`.
    pub fn from_constraint(constraint: &Constraint, first: AgentId, problem: &Problem) -> Self {
        let (low, high) = constraint.scope();
        let second = if first == low { high } else { low };
        let (r, c) = (problem.domain_size(first), problem.domain_size(second));
        let mut values = Vec::with_capacity(r * c);
        for a in 0..r {
            for b in 0..c {
                values.push(constraint.cost_for(first, a, b));
            }
        }
        UtilityTable { dims: vec![first, second], cards: vec![r, c], values }
    }

    pub fn from_fn(dims: Vec<AgentId>, cards: Vec<usize>, mut f: impl FnMut(&Assignment) -> Cost) -> Self {
        let mut values = Vec::with_capacity(cards.iter().product());
        let mut digits = vec![0; dims.len()];
        loop {
            values.push(f(&dims.iter().copied().zip(digits.iter().copied()).collect()));
            if !advance(&mut digits, &cards) {
                break;
            }
        }
        UtilityTable { dims, cards, values }
    }

    pub fn dims(&self) -> &[AgentId] {
        &self.dims
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[Cost] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_dim(&self, var: AgentId) -> bool {
        self.dims.contains(&var)
    }

    pub fn cardinality(&self, var: AgentId) -> Option<usize> {
        self.dims.iter().position(|d| *d == var).map(|k| self.cards[k])
    }

    pub fn min_value(&self) -> Cost {
        self.values.iter().copied().min().unwrap_or(0)
    }

    /// Every (assignment, entry) pair in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (Assignment, Cost)> + '_ {
        let mut digits = vec![0; self.dims.len()];
        let mut done = false;
        self.values.iter().map_while(move |&v| {
            if done {
                return None;
            }
            let a: Assignment = self.dims.iter().copied().zip(digits.iter().copied()).collect();
            done = !advance(&mut digits, &self.cards);
            Some((a, v))
        })
    }

    /// `u ⊗ v`: dims of `self` followed by dims only in `other`; entries add.
    pub fn join(&self, other: &UtilityTable) -> Result<UtilityTable> {
        let mut dims = self.dims.clone();
        let mut cards = self.cards.clone();
        for (k, d) in other.dims.iter().enumerate() {
            match self.cardinality(*d) {
                Some(c) if c != other.cards[k] => return Err(Error::DimensionConflict(*d)),
                Some(_) => {}
                None => {
                    dims.push(*d);
                    cards.push(other.cards[k]);
                }
            }
        }
        let (self_strides, other_strides) = (strides(&self.cards), strides(&other.cards));
        let in_self: Vec<usize> = dims
            .iter()
            .map(|d| self.dims.iter().position(|x| x == d).map_or(0, |k| self_strides[k]))
            .collect();
        let in_other: Vec<usize> = dims
            .iter()
            .map(|d| other.dims.iter().position(|x| x == d).map_or(0, |k| other_strides[k]))
            .collect();
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut digits = vec![0; dims.len()];
        let (mut a, mut b) = (0, 0);
        'outer: loop {
            values.push(self.values[a] + other.values[b]);
            // odometer step, keeping both offsets in sync
            let mut k = dims.len();
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < cards[k] {
                    a += in_self[k];
                    b += in_other[k];
                    break;
                }
                a -= in_self[k] * (cards[k] - 1);
                b -= in_other[k] * (cards[k] - 1);
                digits[k] = 0;
            }
        }
        Ok(UtilityTable { dims, cards, values })
    }

    /// Minimises `out` away; remaining dims keep their order.
    pub fn min_project<'a>(&self, out: impl IntoIterator<Item = &'a AgentId>) -> Result<UtilityTable> {
        let out: BTreeSet<AgentId> = out.into_iter().copied().collect();
        if let Some(bad) = out.iter().find(|v| !self.has_dim(**v)) {
            return Err(Error::BadProjection(*bad));
        }
        if out.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..self.dims.len()).filter(|&k| !out.contains(&self.dims[k])).collect();
        let dims: Vec<AgentId> = keep.iter().map(|&k| self.dims[k]).collect();
        let cards: Vec<usize> = keep.iter().map(|&k| self.cards[k]).collect();
        let out_strides = strides(&cards);
        let mut map = vec![0; self.dims.len()];
        for (pos, &k) in keep.iter().enumerate() {
            map[k] = out_strides[pos];
        }
        let mut values = vec![Cost::MAX; cards.iter().product()];
        let mut digits = vec![0; self.dims.len()];
        let mut idx = 0;
        for &v in &self.values {
            if v < values[idx] {
                values[idx] = v;
            }
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < self.cards[k] {
                    idx += map[k];
                    break;
                }
                idx -= map[k] * (self.cards[k] - 1);
                digits[k] = 0;
            }
        }
        Ok(UtilityTable { dims, cards, values })
    }

    /// Fixes the dims assigned by `ctxt`; assigned variables that are not dims are ignored.
    pub fn slice(&self, ctxt: &Assignment) -> Result<UtilityTable> {
        let st = strides(&self.cards);
        let mut base = 0;
        let mut keep = Vec::new();
        for (k, d) in self.dims.iter().enumerate() {
            match ctxt.get(*d) {
                Some(v) if v >= self.cards[k] => return Err(Error::BadContext { var: *d, value: v }),
                Some(v) => base += v * st[k],
                None => keep.push(k),
            }
        }
        if keep.len() == self.dims.len() {
            return Ok(self.clone());
        }
        let dims: Vec<AgentId> = keep.iter().map(|&k| self.dims[k]).collect();
        let cards: Vec<usize> = keep.iter().map(|&k| self.cards[k]).collect();
        let kept_strides: Vec<usize> = keep.iter().map(|&k| st[k]).collect();
        let mut values = Vec::with_capacity(cards.iter().product());
        let mut digits = vec![0; dims.len()];
        loop {
            let idx: usize = base + digits.iter().zip(&kept_strides).map(|(d, s)| d * s).sum::<usize>();
            values.push(self.values[idx]);
            if !advance(&mut digits, &cards) {
                break;
            }
        }
        Ok(UtilityTable { dims, cards, values })
    }

    pub fn lookup(&self, assignment: &Assignment) -> Result<Cost> {
        let st = strides(&self.cards);
        let mut idx = 0;
        for (k, d) in self.dims.iter().enumerate() {
            let v = assignment.get(*d).ok_or(Error::IncompleteAssignment(*d))?;
            if v >= self.cards[k] {
                return Err(Error::BadContext { var: *d, value: v });
            }
            idx += v * st[k];
        }
        Ok(self.values[idx])
    }

    /// Same table with dims sorted by ascending id.
    pub fn canonical(&self) -> UtilityTable {
        let mut order: Vec<usize> = (0..self.dims.len()).collect();
        order.sort_by_key(|&k| self.dims[k]);
        let dims: Vec<AgentId> = order.iter().map(|&k| self.dims[k]).collect();
        let cards: Vec<usize> = order.iter().map(|&k| self.cards[k]).collect();
        UtilityTable::from_fn(dims, cards, |a| self.lookup(a).expect("same dims"))
    }

    /// Entry-wise equality regardless of dim order.
    pub fn equivalent(&self, other: &UtilityTable) -> bool {
        self.canonical() == other.canonical()
    }
}
