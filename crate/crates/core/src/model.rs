//! DCOP instances: one variable per agent, binary non-negative integer costs.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Cost = u64;

/// Default cap on the number of tuples the brute-force oracle may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Zero-based agent (and variable) identifier. Displayed one-based, as `x1`, `x2`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

/// A binary constraint between `low` and `high` (`low < high`). `costs` is
/// row-major with rows indexed by the value of `low`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    low: AgentId,
    high: AgentId,
    cols: usize,
    costs: Vec<Cost>,
}

impl Constraint {
    pub fn scope(&self) -> (AgentId, AgentId) {
        (self.low, self.high)
    }

    pub fn cost(&self, low_value: usize, high_value: usize) -> Cost {
        self.costs[low_value * self.cols + high_value]
    }

    pub fn costs(&self) -> &[Cost] {
        &self.costs
    }

    /// Cost with the arguments given from the point of view of `var`.
    pub fn cost_for(&self, var: AgentId, value: usize, other_value: usize) -> Cost {
        if var == self.low {
            self.cost(value, other_value)
        } else {
            self.cost(other_value, value)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    domains: Vec<usize>,
    constraints: Vec<Constraint>,
    by_scope: BTreeMap<(AgentId, AgentId), usize>,
    neighbors: Vec<Vec<AgentId>>,
}

impl Problem {
    /// Builds a problem from per-agent domain sizes and `(i, j, table)`
    /// triples where `table[a][b]` is the cost of `x_i = a, x_j = b`.
    pub fn new(domains: Vec<usize>, constraints: Vec<(usize, usize, Vec<Vec<Cost>>)>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::InvalidProblem("at least one agent is required".into()));
        }
        if let Some(i) = domains.iter().position(|&d| d == 0) {
            return Err(Error::InvalidProblem(format!("{} has an empty domain", AgentId(i))));
        }
        let n = domains.len();
        let mut built = Vec::with_capacity(constraints.len());
        let mut by_scope = BTreeMap::new();
        for (i, j, table) in constraints {
            if i >= n || j >= n {
                return Err(Error::InvalidProblem(format!("constraint ({i}, {j}) references an unknown agent")));
            }
            if i == j {
                return Err(Error::InvalidProblem(format!("self-constraint on {}", AgentId(i))));
            }
            if table.len() != domains[i] || table.iter().any(|row| row.len() != domains[j]) {
                return Err(Error::InvalidProblem(format!(
                    "cost table of ({}, {}) must be {}x{}",
                    AgentId(i),
                    AgentId(j),
                    domains[i],
                    domains[j]
                )));
            }
            let (low, high) = if i < j { (i, j) } else { (j, i) };
            let mut costs = Vec::with_capacity(domains[low] * domains[high]);
            #[allow(clippy::needless_range_loop)]
            for a in 0..domains[low] {
                for b in 0..domains[high] {
                    costs.push(if i < j { table[a][b] } else { table[b][a] });
                }
            }
            let key = (AgentId(low), AgentId(high));
            if by_scope.contains_key(&key) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate constraint between {} and {}",
                    key.0, key.1
                )));
            }
            by_scope.insert(key, 0);
            built.push(Constraint { low: key.0, high: key.1, cols: domains[high], costs });
        }
        built.sort_by_key(|c| (c.low, c.high));
        for (idx, c) in built.iter().enumerate() {
            by_scope.insert((c.low, c.high), idx);
        }
        let mut neighbors = vec![Vec::new(); n];
        for c in &built {
            neighbors[c.low.0].push(c.high);
            neighbors[c.high.0].push(c.low);
        }
        for list in &mut neighbors {
            list.sort();
        }
        Ok(Problem { domains, constraints: built, by_scope, neighbors })
    }

    pub fn agent_count(&self) -> usize {
        self.domains.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.domains.len()).map(AgentId)
    }

    pub fn domain_size(&self, agent: AgentId) -> usize {
        self.domains[agent.0]
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn max_domain_size(&self) -> usize {
        self.domains.iter().copied().max().unwrap_or(1)
    }

    /// Constraints sorted by scope.
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, a: AgentId, b: AgentId) -> Option<&Constraint> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.by_scope.get(&key).map(|&idx| &self.constraints[idx])
    }

    /// Neighbours of `agent` in ascending id order.
    pub fn neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.neighbors[agent.0]
    }

    pub fn degree(&self, agent: AgentId) -> usize {
        self.neighbors[agent.0].len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.agent_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &self.neighbors[v] {
                if !seen[u.0] {
                    seen[u.0] = true;
                    stack.push(u.0);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn validate_assignment(&self, assignment: &Assignment) -> Result<()> {
        for (&var, &value) in assignment.iter() {
            if var.0 >= self.agent_count() || value >= self.domain_size(var) {
                return Err(Error::BadContext { var, value });
            }
        }
        Ok(())
    }

    /// Number of complete assignments, saturating at `u128::MAX`.
    pub fn search_space(&self) -> u128 {
        self.domains.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }
}

/// A partial assignment: variable → value index, ordered by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<AgentId, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values(values: &[usize]) -> Self {
        Assignment(values.iter().enumerate().map(|(i, &v)| (AgentId(i), v)).collect())
    }

    pub fn get(&self, var: AgentId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn insert(&mut self, var: AgentId, value: usize) -> Option<usize> {
        self.0.insert(var, value)
    }

    pub fn with(&self, var: AgentId, value: usize) -> Self {
        let mut next = self.clone();
        next.insert(var, value);
        next
    }

    pub fn remove(&mut self, var: AgentId) -> Option<usize> {
        self.0.remove(&var)
    }

    pub fn contains(&self, var: AgentId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AgentId, &usize)> {
        self.0.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.0.keys().copied()
    }

    /// The sub-assignment over `vars` (variables missing from `self` are skipped).
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a AgentId>) -> Self {
        Assignment(vars.into_iter().filter_map(|v| self.get(*v).map(|x| (*v, x))).collect())
    }

    /// True iff every entry of `self` agrees with `other` where `other` assigns it.
    pub fn agrees_with(&self, other: &Assignment) -> bool {
        self.0.iter().all(|(v, x)| other.get(*v).is_none_or(|y| y == *x))
    }

    /// Values of a complete assignment over `n` variables in variable order.
    pub fn to_values(&self, n: usize) -> Result<Vec<usize>> {
        (0..n).map(|i| self.get(AgentId(i)).ok_or(Error::IncompleteAssignment(AgentId(i)))).collect()
    }
}

impl FromIterator<(AgentId, usize)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (AgentId, usize)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, x)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}={x}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub assignment: Assignment,
    pub cost: Cost,
}

pub fn total_cost(problem: &Problem, assignment: &Assignment) -> Result<Cost> {
    let mut total = 0;
    for c in problem.constraints() {
        let (a, b) = c.scope();
        let va = assignment.get(a).ok_or(Error::IncompleteAssignment(a))?;
        let vb = assignment.get(b).ok_or(Error::IncompleteAssignment(b))?;
        total += c.cost(va, vb);
    }
    Ok(total)
}

fn cost_of_values(problem: &Problem, values: &[usize]) -> Cost {
    problem
        .constraints()
        .iter()
        .map(|c| {
            let (a, b) = c.scope();
            c.cost(values[a.0], values[b.0])
        })
        .sum()
}

pub fn brute_force_optimum(problem: &Problem) -> Result<SolveResult> {
    brute_force_optimum_with_cap(problem, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive minimisation; ties go to the lexicographically smallest value vector.
pub fn brute_force_optimum_with_cap(problem: &Problem, cap: u128) -> Result<SolveResult> {
    let space = problem.search_space();
    if space > cap {
        return Err(Error::InstanceTooLarge { entries: space, cap });
    }
    let n = problem.agent_count();
    let mut values = vec![0usize; n];
    let mut best = (cost_of_values(problem, &values), values.clone());
    loop {
        // odometer with the last variable varying fastest keeps lexicographic order
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(SolveResult { assignment: Assignment::from_values(&best.1), cost: best.0 });
            }
            pos -= 1;
            values[pos] += 1;
            if values[pos] < problem.domains[pos] {
                break;
            }
            values[pos] = 0;
        }
        let cost = cost_of_values(problem, &values);
        if cost < best.0 {
            best = (cost, values.clone());
        }
    }
}

/// Parameters of the random instance generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorParams {
    pub agents: usize,
    pub density: f64,
    pub domain_size: usize,
    pub max_cost: Cost,
    pub seed: u64,
}

/// Number of edges a generated instance with `n` agents and density `p` has.
pub fn edge_count(n: usize, density: f64) -> usize {
    (density * (n * (n - 1) / 2) as f64).round() as usize
}

/// Random connected instance: a random spanning tree first, then uniformly
/// sampled extra edges until the requested density is met.
pub fn generate_random(params: GeneratorParams) -> Result<Problem> {
    let GeneratorParams { agents: n, density, domain_size: d, max_cost, seed } = params;
    if n < 2 {
        return Err(Error::BadConfig("generator needs at least 2 agents".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::BadConfig(format!("density {density} outside (0, 1]")));
    }
    if d < 2 {
        return Err(Error::BadConfig("domain size must be at least 2".into()));
    }
    let wanted = edge_count(n, density);
    if wanted < n - 1 {
        return Err(Error::DensityTooLow { requested: wanted, minimum: n - 1 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut adjacent = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(wanted);
    for idx in 1..n {
        let u = order[idx];
        let v = order[rng.gen_range(0..idx)];
        adjacent[u][v] = true;
        adjacent[v][u] = true;
        edges.push((u.min(v), u.max(v)));
    }
    let mut spare: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| !adjacent[i][j]).collect();
    spare.shuffle(&mut rng);
    edges.extend(spare.into_iter().take(wanted - (n - 1)));
    edges.sort_unstable();

    let constraints = edges
        .into_iter()
        .map(|(i, j)| {
            let table = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..=max_cost)).collect()).collect();
            (i, j, table)
        })
        .collect();
    Problem::new(vec![d; n], constraints)
}

/// On-disk problem format. Agents are one-based in files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub agents: usize,
    pub domains: Vec<usize>,
    pub constraints: Vec<ConstraintFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFile {
    pub scope: [usize; 2],
    pub costs: Vec<Vec<Cost>>,
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        Problem::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from(self)).expect("problem serialization cannot fail")
    }

    /// Parses and additionally requires a connected constraint graph.
    pub fn from_json_connected(text: &str) -> Result<Self> {
        let problem = Self::from_json(text)?;
        if !problem.is_connected() {
            return Err(Error::NotConnected);
        }
        Ok(problem)
    }
}

impl TryFrom<ProblemFile> for Problem {
    type Error = Error;

    fn try_from(file: ProblemFile) -> Result<Self> {
        if file.agents != file.domains.len() {
            return Err(Error::InvalidProblem(format!(
                "{} agents declared but {} domains given",
                file.agents,
                file.domains.len()
            )));
        }
        let mut constraints = Vec::with_capacity(file.constraints.len());
        for c in file.constraints {
            let [i, j] = c.scope;
            if i == 0 || j == 0 {
                return Err(Error::InvalidProblem("agents are numbered from 1".into()));
            }
            constraints.push((i - 1, j - 1, c.costs));
        }
        Problem::new(file.domains, constraints)
    }
}

impl From<&Problem> for ProblemFile {
    fn from(problem: &Problem) -> Self {
        ProblemFile {
            agents: problem.agent_count(),
            domains: problem.domains.clone(),
            constraints: problem
                .constraints()
                .iter()
                .map(|c| {
                    let (a, b) = c.scope();
                    let rows = c.costs.chunks(c.cols).map(|r| r.to_vec()).collect();
                    ConstraintFile { scope: [a.0 + 1, b.0 + 1], costs: rows }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t3;

    /// Plain enumeration over all 8 assignments of T3, independent of the
    /// solver code paths.
    fn t3_enumerated() -> Vec<((usize, usize, usize), Cost)> {
        let f12 = [[1, 3], [2, 0]];
        let f23 = [[2, 1], [0, 4]];
        let f13 = [[0, 2], [3, 1]];
        let mut out = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    out.push(((a, b, c), f12[a][b] + f23[b][c] + f13[a][c]));
                }
            }
        }
        out
    }

    #[test]
    fn t3_costs_match_enumeration() {
        let p = t3();
        for ((a, b, c), expected) in t3_enumerated() {
            let got = total_cost(&p, &Assignment::from_values(&[a, b, c])).unwrap();
            assert_eq!(got, expected, "({a},{b},{c})");
        }
        assert_eq!(total_cost(&p, &Assignment::from_values(&[0, 0, 0])).unwrap(), 3);
        assert_eq!(total_cost(&p, &Assignment::from_values(&[0, 1, 1])).unwrap(), 9);
    }

    #[test]
    fn t3_optimum_ties_break_lexicographically() {
        let table = t3_enumerated();
        let min = table.iter().map(|e| e.1).min().unwrap();
        let tied: Vec<_> = table.iter().filter(|e| e.1 == min).map(|e| e.0).collect();
        assert_eq!(min, 3);
        assert_eq!(tied, vec![(0, 0, 0), (0, 1, 0), (1, 1, 0)]);
        let best = brute_force_optimum(&t3()).unwrap();
        assert_eq!(best.cost, 3);
        assert_eq!(best.assignment, Assignment::from_values(&[0, 0, 0]));
    }

    #[test]
    fn incomplete_assignment_is_rejected() {
        let err = total_cost(&t3(), &Assignment::from_values(&[0, 0])).unwrap_err();
        assert!(matches!(err, Error::IncompleteAssignment(AgentId(2))));
    }

    #[test]
    fn unconstrained_problems() {
        let p = Problem::new(vec![3, 2], vec![]).unwrap();
        assert_eq!(total_cost(&p, &Assignment::from_values(&[2, 1])).unwrap(), 0);
        let single = Problem::new(vec![4], vec![]).unwrap();
        let best = brute_force_optimum(&single).unwrap();
        assert_eq!((best.cost, best.assignment), (0, Assignment::from_values(&[0])));
    }

    #[test]
    fn identity_penalty_pair() {
        let p = Problem::new(vec![2, 2], vec![(0, 1, vec![vec![0, 1], vec![1, 0]])]).unwrap();
        let best = brute_force_optimum(&p).unwrap();
        assert_eq!((best.cost, best.assignment), (0, Assignment::from_values(&[0, 0])));
    }

    #[test]
    fn enumeration_cap() {
        let p = Problem::new(vec![3; 5], vec![]).unwrap();
        assert!(matches!(
            brute_force_optimum_with_cap(&p, 100),
            Err(Error::InstanceTooLarge { entries: 243, cap: 100 })
        ));
    }

    #[test]
    fn reversed_scope_is_transposed() {
        let p = Problem::new(vec![2, 3], vec![(1, 0, vec![vec![1, 2], vec![3, 4], vec![5, 6]])]).unwrap();
        let c = p.constraint(AgentId(0), AgentId(1)).unwrap();
        assert_eq!(c.cost(0, 2), 5);
        assert_eq!(c.cost_for(AgentId(1), 2, 0), 5);
    }

    #[test]
    fn invalid_problems() {
        assert!(Problem::new(vec![2, 2], vec![(0, 0, vec![vec![0, 0], vec![0, 0]])]).is_err());
        assert!(Problem::new(vec![2, 2], vec![(0, 1, vec![vec![0, 0]])]).is_err());
        let dup = vec![(0, 1, vec![vec![0; 2]; 2]), (1, 0, vec![vec![0; 2]; 2])];
        assert!(Problem::new(vec![2, 2], dup).is_err());
    }

    #[test]
    fn generator_edge_counts() {
        let p = generate_random(GeneratorParams { agents: 22, density: 0.25, domain_size: 3, max_cost: 100, seed: 9 })
            .unwrap();
        assert_eq!(p.constraints().len(), 58);
        assert!(p.is_connected());
        let full = generate_random(GeneratorParams { agents: 5, density: 1.0, domain_size: 4, max_cost: 10, seed: 1 })
            .unwrap();
        assert_eq!(full.constraints().len(), 10);
        assert!(full.constraints().iter().all(|c| c.costs().iter().all(|&x| x <= 10)));
    }

    #[test]
    fn generator_is_deterministic() {
        let params = GeneratorParams { agents: 12, density: 0.4, domain_size: 3, max_cost: 50, seed: 77 };
        let a = generate_random(params).unwrap().to_json();
        let b = generate_random(params).unwrap().to_json();
        assert_eq!(a, b);
        let c = generate_random(GeneratorParams { seed: 78, ..params }).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_rejects_sparse_requests() {
        let err = generate_random(GeneratorParams { agents: 10, density: 0.1, domain_size: 3, max_cost: 5, seed: 0 })
            .unwrap_err();
        assert!(matches!(err, Error::DensityTooLow { requested: 5, minimum: 9 }));
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let p = t3();
        let text = p.to_json();
        let file: ProblemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file.constraints[0].scope, [1, 2]);
        assert_eq!(file.constraints[0].costs, vec![vec![1, 3], vec![2, 0]]);
        assert_eq!(Problem::from_json(&text).unwrap(), p);
        let zero = r#"{"agents":2,"domains":[2,2],"constraints":[{"scope":[0,1],"costs":[[0,0],[0,0]]}]}"#;
        assert!(Problem::from_json(zero).is_err());
        let disconnected = r#"{"agents":3,"domains":[2,2,2],"constraints":[{"scope":[1,2],"costs":[[0,0],[0,0]]}]}"#;
        assert!(matches!(Problem::from_json_connected(disconnected), Err(Error::NotConnected)));
    }
}
