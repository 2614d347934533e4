//! Murty's ranked assignment enumeration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{best_assignment, Assignment, CostMatrix};
use crate::error::Result;
use crate::scalar::Scalar;

struct Node<T: Scalar> {
    solution: Assignment<T>,
    constrained: CostMatrix<T>,
}

impl<T: Scalar> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Node<T> {}

impl<T: Scalar> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Node<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.solution.rank_cmp(&self.solution)
    }
}

/// The `k` cheapest feasible assignments in nondecreasing cost order.
///
/// Equal-cost assignments are ordered lexicographically by column vector,
/// including those straddling the `k`-th position.
pub fn murty_k_best<T: Scalar>(c: &CostMatrix<T>, k: usize) -> Result<Vec<Assignment<T>>> {
    let first = best_assignment(c)?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let inf = T::infinity();
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        solution: first,
        constrained: c.clone(),
    });
    let mut out: Vec<Assignment<T>> = Vec::with_capacity(k.min(1024));

    while let Some(node) = heap.pop() {
        if out.len() >= k {
            // only keep draining exact ties with the k-th cost
            if node.solution.cost > out[k - 1].cost {
                break;
            }
        }
        let Node { solution, constrained } = node;

        let mut work = constrained;
        for row in 0..solution.cols.len() {
            let col = solution.cols[row];
            let mut child = work.clone();
            child.set(row, col, inf);
            if let Ok(mut sol) = best_assignment(&child) {
                sol.cost = c.cost_of(&sol.cols);
                heap.push(Node {
                    solution: sol,
                    constrained: child,
                });
            }
            // force (row, col) for the remaining children
            for j in 0..work.cols() {
                if j != col {
                    work.set(row, j, inf);
                }
            }
            for i in 0..work.rows() {
                if i != row {
                    work.set(i, col, inf);
                }
            }
        }
        out.push(solution);
    }
    out.sort_by(|a, b| a.rank_cmp(b));
    out.truncate(k);
    Ok(out)
}
