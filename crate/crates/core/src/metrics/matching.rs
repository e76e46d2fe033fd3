//! Cluster index matching by maximum overlap (Hungarian algorithm).

use crate::error::{FontError, Result};

/// Minimum-cost perfect assignment on a square cost matrix; `result[row] = col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // potentials and matching over 1-based columns, column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
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
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Relabels `b` (labels in `0..k`) so that its clusters line up with those of
/// `a` by maximal co-membership. Returns `map` with `map[b_label] = a_label`.
pub fn match_by_overlap(a: &[usize], b: &[usize], k: usize) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(FontError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if let Some(&l) = a.iter().chain(b).find(|&&l| l >= k) {
        return Err(FontError::LabelOutOfRange { label: l + 1, k });
    }
    let mut overlap = vec![vec![0.0; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        overlap[y][x] += 1.0;
    }
    let cost: Vec<Vec<f64>> = overlap.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
    Ok(hungarian(&cost))
}

/// Total overlap achieved by a `b -> a` label map; used to validate matchings.
pub fn matched_overlap(a: &[usize], b: &[usize], map: &[usize]) -> usize {
    a.iter().zip(b).filter(|(&x, &y)| map[y] == x).count()
}
