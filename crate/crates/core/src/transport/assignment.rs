//! Dense linear assignment by successive shortest augmenting paths
//! (Jonker–Volgenant style, with dual potentials and Dijkstra over columns).

use crate::error::{KacError, Result};

/// Minimum-cost perfect matching for a square `n × n` row-major cost matrix.
///
/// Returns `col_for_row`. Costs must be finite. Runs in `O(n³)` worst case.
pub fn solve(cost: &[f64], n: usize) -> Result<Vec<usize>> {
    if cost.len() != n * n {
        return Err(KacError::SizeMismatch {
            left: cost.len(),
            right: n * n,
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(KacError::Degenerate("non-finite assignment cost".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    const NONE: usize = usize::MAX;
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut col_for_row = vec![NONE; n];
    let mut row_for_col = vec![NONE; n];

    // Column reduction: v_j = min_i c_ij, then greedily assign each column's
    // minimizing row if it is still free. Any feasible dual is a valid start.
    for j in 0..n {
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for i in 0..n {
            let c = cost[i * n + j];
            if c < best {
                best = c;
                arg = i;
            }
        }
        v[j] = best;
        if col_for_row[arg] == NONE {
            col_for_row[arg] = j;
            row_for_col[j] = arg;
        }
    }
    // Row potentials so that reduced costs of matched edges are zero and all
    // reduced costs are nonnegative.
    for i in 0..n {
        let row = &cost[i * n..(i + 1) * n];
        u[i] = row
            .iter()
            .zip(&v)
            .map(|(c, vj)| c - vj)
            .fold(f64::INFINITY, f64::min);
    }
    for i in 0..n {
        let j = col_for_row[i];
        if j != NONE && cost[i * n + j] - u[i] - v[j] > 0.0 {
            // tight only up to rounding; release it and let augmentation decide
            col_for_row[i] = NONE;
            row_for_col[j] = NONE;
        }
    }

    let mut shortest = vec![f64::INFINITY; n];
    let mut path = vec![NONE; n];
    let mut seen_row = vec![false; n];
    let mut seen_col = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);
    let mut visited_rows: Vec<usize> = Vec::with_capacity(n);
    let mut visited_cols: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        if col_for_row[cur_row] != NONE {
            continue;
        }
        shortest.iter_mut().for_each(|s| *s = f64::INFINITY);
        remaining.clear();
        remaining.extend((0..n).rev());
        visited_rows.clear();
        visited_cols.clear();

        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let sink = loop {
            seen_row[i] = true;
            visited_rows.push(i);
            let row = &cost[i * n..(i + 1) * n];
            let base = min_val - u[i];
            let mut lowest = f64::INFINITY;
            let mut index = NONE;
            for (it, &j) in remaining.iter().enumerate() {
                let r = base + row[j] - v[j];
                if r < shortest[j] {
                    path[j] = i;
                    shortest[j] = r;
                }
                let s = shortest[j];
                if s < lowest || (s == lowest && row_for_col[j] == NONE) {
                    lowest = s;
                    index = it;
                }
            }
            if index == NONE || !lowest.is_finite() {
                return Err(KacError::Degenerate("assignment infeasible".into()));
            }
            min_val = lowest;
            let j = remaining.swap_remove(index);
            seen_col[j] = true;
            visited_cols.push(j);
            if row_for_col[j] == NONE {
                break j;
            }
            i = row_for_col[j];
        };

        // dual update
        u[cur_row] += min_val;
        for &r in &visited_rows {
            if r != cur_row {
                u[r] += min_val - shortest[col_for_row[r]];
            }
            seen_row[r] = false;
        }
        for &c in &visited_cols {
            v[c] -= min_val - shortest[c];
            seen_col[c] = false;
        }

        // augment along the alternating path
        let mut j = sink;
        loop {
            let r = path[j];
            row_for_col[j] = r;
            let prev = col_for_row[r];
            col_for_row[r] = j;
            if r == cur_row {
                break;
            }
            j = prev;
        }
    }
    Ok(col_for_row)
}
