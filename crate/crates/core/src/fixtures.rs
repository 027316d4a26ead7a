//! Small hand-built instances shared by tests, the CLI and the C ABI.

use crate::model::Problem;

/// Three binary variables on a triangle:
/// f12 = [[1,3],[2,0]], f23 = [[2,1],[0,4]], f13 = [[0,2],[3,1]]
/// (rows indexed by the lower-numbered variable). Optimum 3 at (0,0,0).
pub fn t3() -> Problem {
    Problem::new(
        vec![2, 2, 2],
        vec![
            (0, 1, vec![vec![1, 3], vec![2, 0]]),
            (1, 2, vec![vec![2, 1], vec![0, 4]]),
            (0, 2, vec![vec![0, 2], vec![3, 1]]),
        ],
    )
    .expect("T3 is well formed")
}

/// Five agents with domain size four and seven identical constraints.
/// Rooted at x1 the DFS tree is x1 → x2 → {x3 → x4, x5}, with x4 also
/// constrained to x1 and x2, and x5 to x1.
pub fn five_agent_example() -> Problem {
    let table = vec![vec![2, 5, 1, 4], vec![3, 0, 6, 2], vec![1, 4, 3, 0], vec![5, 2, 0, 3]];
    let edges = [(0, 1), (1, 2), (2, 3), (0, 3), (1, 3), (1, 4), (0, 4)];
    Problem::new(vec![4; 5], edges.iter().map(|&(i, j)| (i, j, table.clone())).collect())
        .expect("example is well formed")
}
