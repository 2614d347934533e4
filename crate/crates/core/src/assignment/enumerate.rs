use super::{Assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ENUM_ROWS: usize = 6;
pub const MAX_ENUM_COLS: usize = 8;

/// Every feasible assignment, sorted by cost then column vector.
///
/// Intended as a brute-force oracle; refuses matrices beyond
/// [`MAX_ENUM_ROWS`] x [`MAX_ENUM_COLS`].
pub fn enumerate_all_assignments<T: Scalar>(c: &CostMatrix<T>) -> Result<Vec<Assignment<T>>> {
    if c.rows() > MAX_ENUM_ROWS || c.cols() > MAX_ENUM_COLS {
        return Err(Error::EnumerationTooLarge {
            rows: c.rows(),
            cols: c.cols(),
            max_rows: MAX_ENUM_ROWS,
            max_cols: MAX_ENUM_COLS,
        });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(c.rows());
    let mut used = vec![false; c.cols()];
    recurse(c, &mut current, &mut used, &mut out);
    out.sort_by(|a, b| a.rank_cmp(b));
    Ok(out)
}

fn recurse<T: Scalar>(c: &CostMatrix<T>, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Assignment<T>>) {
    let row = current.len();
    if row == c.rows() {
        out.push(Assignment {
            cols: current.clone(),
            cost: c.cost_of(current),
        });
        return;
    }
    for col in 0..c.cols() {
        if used[col] || !c.is_allowed(row, col) {
            continue;
        }
        used[col] = true;
        current.push(col);
        recurse(c, current, used, out);
        current.pop();
        used[col] = false;
    }
}
