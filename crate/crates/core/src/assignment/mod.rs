//! Combinatorial solvers: optimal assignment, Murty's ranked assignments,
//! k-shortest paths over layered DAGs, and an exhaustive enumerator used as
//! a test oracle.

mod enumerate;
mod ksp;
mod lap;
mod murty;

pub use enumerate::{enumerate_all_assignments, MAX_ENUM_COLS, MAX_ENUM_ROWS};
pub use ksp::{k_shortest_paths, LayeredDag, Path};
pub use lap::best_assignment;
pub use murty::murty_k_best;

use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Dense row-major cost matrix; `+inf` marks a forbidden pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix shape mismatch");
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged cost matrix");
                r.iter().copied()
            })
            .collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.cols + col] = value;
    }

    pub fn is_allowed(&self, row: usize, col: usize) -> bool {
        self.get(row, col).is_finite_value()
    }

    /// Sum of the selected entries.
    pub fn cost_of(&self, cols: &[usize]) -> T {
        cols.iter()
            .enumerate()
            .fold(T::zero(), |acc, (r, &c)| acc + self.get(r, c))
    }
}

/// Row-to-column map, injective over columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    /// `cols[row]` is the column assigned to `row`.
    pub cols: Vec<usize>,
    pub cost: T,
}

impl<T: Scalar> Assignment<T> {
    /// Cost first, then lexicographic on the column vector.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.cost
            .partial_cmp(&other.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.cols.cmp(&other.cols))
    }
}
