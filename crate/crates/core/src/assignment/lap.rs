//! Shortest-augmenting-path Hungarian method for rectangular matrices
//! (rows <= cols) with forbidden (`+inf`) entries.

use super::{Assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum-cost assignment of every row to a distinct column.
pub fn best_assignment<T: Scalar>(c: &CostMatrix<T>) -> Result<Assignment<T>> {
    let n = c.rows();
    let m = c.cols();
    if n == 0 {
        return Ok(Assignment {
            cols: Vec::new(),
            cost: T::zero(),
        });
    }
    if n > m {
        return Err(Error::Infeasible);
    }
    let inf = T::infinity();
    // 1-based potentials; column 0 is the virtual root of each search tree.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![inf; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let a = c.get(i0 - 1, j - 1);
                if a.is_finite_value() {
                    let cur = a - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                return Err(Error::Infeasible);
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else if minv[j].is_finite_value() {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut cols = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            cols[p[j] - 1] = j - 1;
        }
    }
    let cost = c.cost_of(&cols);
    Ok(Assignment { cols, cost })
}
