//! Context evaluation and context-based inference.
//!
//! An agent counts, for every approximated dimension, how many consecutive
//! partial assignments kept the same value. Dimensions whose counter exceeds
//! the threshold `t` form the decimated dimensions, and their current values
//! form the context pattern. The pattern is split among the children whose
//! subtrees dropped those dimensions; each of them recomputes its
//! memory-bounded utility with the pattern values fixed instead of minimised.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::model::{AgentId, Assignment, Problem};
use crate::table::UtilityTable;

/// A context pattern: values for a subset of approximated dimensions.
pub type Pattern = Assignment;

/// Identifies one pattern: the agent that selected it and a per-agent epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternTag {
    pub origin: AgentId,
    pub epoch: u64,
}

/// Frequency counters, one `(value, run length)` per tracked dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    runs: BTreeMap<AgentId, (usize, u64)>,
}

impl Counters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((AgentId, usize), u64)>) -> Self {
        Counters { runs: entries.into_iter().map(|((var, value), n)| (var, (value, n))).collect() }
    }

    /// Frequency of `value` for `var`; zero for any value other than the current one.
    pub fn count(&self, var: AgentId, value: usize) -> u64 {
        match self.runs.get(&var) {
            Some(&(v, n)) if v == value => n,
            _ => 0,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = ((AgentId, usize), u64)> + '_ {
        self.runs.iter().map(|(var, &(v, n))| ((*var, v), n))
    }

    /// For each tracked dimension assigned by `new`: restart the counter at 1
    /// when the value differs from `previous`, otherwise increment it.
    pub fn update<'a>(
        &mut self,
        dims: impl IntoIterator<Item = &'a AgentId>,
        previous: Option<&Assignment>,
        new: &Assignment,
    ) {
        for &var in dims {
            let Some(value) = new.get(var) else { continue };
            let unchanged = previous.and_then(|p| p.get(var)) == Some(value);
            match self.runs.get_mut(&var) {
                Some((v, n)) if unchanged && *v == value => *n += 1,
                _ => {
                    self.runs.insert(var, (value, 1));
                }
            }
        }
    }
}

/// t = d_max^(ρ·h).
pub fn threshold_t(d_max: usize, height: usize, rho: f64) -> f64 {
    (d_max as f64).powf(rho * height as f64)
}

/// The assignments in `cpa` of the dimensions in `dims` whose frequency
/// is strictly greater than `t`, or `None` when there are none.
pub fn find_context_pattern<'a>(
    counters: &Counters,
    dims: impl IntoIterator<Item = &'a AgentId>,
    cpa: &Assignment,
    t: f64,
) -> Option<Pattern> {
    let pattern: Pattern = dims
        .into_iter()
        .filter_map(|&var| cpa.get(var).map(|v| (var, v)))
        .filter(|&(var, v)| counters.count(var, v) as f64 > t)
        .collect();
    (!pattern.is_empty()).then_some(pattern)
}

/// How many assignments of `slist` a pattern stands for.
pub fn pattern_coverage(ctxt: &Pattern, slist: &BTreeSet<AgentId>, problem: &Problem) -> u128 {
    coverage_with_domains(ctxt, slist, problem.domains())
}

pub fn coverage_with_domains(ctxt: &Pattern, slist: &BTreeSet<AgentId>, domains: &[usize]) -> u128 {
    slist.iter().filter(|v| !ctxt.contains(**v)).map(|v| domains[v.0] as u128).product()
}

/// True iff every pattern entry agrees with `cpa` (unassigned dimensions agree).
pub fn compatibility(ctxt: &Pattern, cpa: &Assignment) -> bool {
    ctxt.agrees_with(cpa)
}

/// Splits a pattern over the children by their approximated dimensions.
/// Children with an empty share are left out.
pub fn allocate_pattern(ctxt: &Pattern, child_slists: &BTreeMap<AgentId, BTreeSet<AgentId>>) -> BTreeMap<AgentId, Pattern> {
    child_slists
        .iter()
        .filter_map(|(child, slist)| {
            let share = ctxt.restrict(slist.iter());
            (!share.is_empty()).then_some((*child, share))
        })
        .collect()
}

/// Context-based utility of `agent` for `ctxt`: join the local utility with
/// the children's tables, fix the pattern values, and minimise over the
/// agent's own variable and its preprocessing drops not fixed by the pattern.
///
/// Returns the table and the number of utility entries touched.
pub fn compute_ctxt_util<'a>(
    agent: AgentId,
    ctxt: &Pattern,
    local: &UtilityTable,
    child_tables: impl IntoIterator<Item = &'a UtilityTable>,
    dropped: &[AgentId],
) -> Result<(UtilityTable, u64)> {
    // slicing commutes with joining, so fix the pattern before building the join
    let mut ops = local.len() as u64;
    let mut fixed = local.slice(ctxt)?;
    for t in child_tables {
        ops += t.len() as u64;
        fixed = fixed.join(&t.slice(ctxt)?)?;
        ops += fixed.len() as u64;
    }
    let mut out: Vec<AgentId> = dropped.iter().copied().filter(|d| !ctxt.contains(*d) && fixed.has_dim(*d)).collect();
    if fixed.has_dim(agent) {
        out.push(agent);
    }
    ops += fixed.len() as u64;
    Ok((fixed.min_project(&out)?, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t3;
    use crate::preprocess::run_preprocessing;
    use crate::tree::build_pseudo_tree;

    fn x(i: usize) -> AgentId {
        AgentId(i)
    }

    fn asg(pairs: &[(usize, usize)]) -> Assignment {
        pairs.iter().map(|&(v, d)| (x(v), d)).collect()
    }

    #[test]
    fn counters_follow_worked_example() {
        // Cnt_3 = {(<x1,0>,1), (<x2,0>,1)}, new CPA {(x1,0),(x2,1)}
        let mut cnt = Counters::from_entries([((x(0), 0), 1), ((x(1), 0), 1)]);
        let dims = [x(0), x(1)];
        cnt.update(&dims, Some(&asg(&[(0, 0), (1, 0)])), &asg(&[(0, 0), (1, 1)]));
        assert_eq!(cnt.entries().collect::<Vec<_>>(), vec![((x(0), 0), 2), ((x(1), 1), 1)]);
        assert_eq!(cnt.count(x(1), 0), 0);
        let pattern = find_context_pattern(&cnt, &dims, &asg(&[(0, 0), (1, 1)]), 1.0);
        assert_eq!(pattern, Some(asg(&[(0, 0)])));
    }

    #[test]
    fn first_and_repeated_updates() {
        let dims = [x(0), x(1), x(2)];
        let mut cnt = Counters::new();
        let cpa = asg(&[(0, 1), (1, 0), (2, 2)]);
        cnt.update(&dims, None, &cpa);
        assert!(cnt.entries().all(|(_, n)| n == 1));
        cnt.update(&dims, Some(&cpa), &cpa);
        assert!(cnt.entries().all(|(_, n)| n == 2));
    }

    #[test]
    fn threshold_values() {
        assert_eq!(threshold_t(3, 4, 0.5), 9.0);
        assert_eq!(threshold_t(3, 7, 0.0), 1.0);
        assert!((threshold_t(3, 8, 0.25) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn pattern_selection() {
        let cnt = Counters::from_entries([((x(0), 1), 3)]);
        assert_eq!(find_context_pattern(&cnt, &[x(0)], &asg(&[(0, 1), (1, 0)]), 2.0), Some(asg(&[(0, 1)])));
        assert_eq!(find_context_pattern(&cnt, &[x(0)], &asg(&[(0, 1)]), 3.0), None);
        // counter is for a different value than the CPA's
        assert_eq!(find_context_pattern(&cnt, &[x(0)], &asg(&[(0, 0)]), 0.0), None);
    }

    #[test]
    fn coverage() {
        let slist: BTreeSet<_> = [x(0), x(1)].into_iter().collect();
        assert_eq!(coverage_with_domains(&asg(&[(0, 0)]), &slist, &[4; 5]), 4);
        assert_eq!(coverage_with_domains(&asg(&[(0, 0), (1, 3)]), &slist, &[4; 5]), 1);
        assert_eq!(coverage_with_domains(&Assignment::new(), &slist, &[3; 5]), 9);
    }

    #[test]
    fn compatibility_cases() {
        assert!(compatibility(&asg(&[(0, 0)]), &asg(&[(0, 0), (1, 2)])));
        assert!(compatibility(&Assignment::new(), &asg(&[(0, 1)])));
        assert!(!compatibility(&asg(&[(0, 0)]), &asg(&[(0, 1)])));
    }

    #[test]
    fn allocation_skips_uninvolved_children() {
        let slists: BTreeMap<_, BTreeSet<_>> =
            [(x(3), [x(0), x(1)].into_iter().collect()), (x(4), [x(2)].into_iter().collect())].into_iter().collect();
        let alloc = allocate_pattern(&asg(&[(0, 0)]), &slists);
        assert_eq!(alloc.len(), 1);
        assert_eq!(alloc[&x(3)], asg(&[(0, 0)]));
    }

    #[test]
    fn t3_context_util() {
        let p = t3();
        let tree = build_pseudo_tree(&p, x(0)).unwrap();
        let pre = run_preprocessing(&p, &tree, 1).unwrap();
        let a3 = pre.agent(x(2));
        let (util, _) = compute_ctxt_util(x(2), &asg(&[(0, 1)]), &a3.local_util, [], &a3.dropped).unwrap();
        assert_eq!(util.dims(), &[x(1)]);
        // min over x3 of f13(1, x3) + f23(x2, x3)
        let f13 = [[0, 2], [3, 1]];
        let f23 = [[2, 1], [0, 4]];
        let expect: Vec<u64> = (0..2).map(|x2| (0..2).map(|x3| f13[1][x3] + f23[x2][x3]).min().unwrap()).collect();
        assert_eq!(expect, vec![2, 3]);
        assert_eq!(util.values(), expect.as_slice());

        let (same, _) = compute_ctxt_util(x(2), &Assignment::new(), &a3.local_util, [], &a3.dropped).unwrap();
        assert_eq!(&same, a3.outgoing.as_ref().unwrap());
    }
}
