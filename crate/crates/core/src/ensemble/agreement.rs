use rayon::prelude::*;

use super::rep::DistanceRep;
use crate::error::{FontError, Result};

/// Inner product of two expanded distance matrices, computed from the
/// label contingency table `c` as `sum c[k][k'] (A c B^T)[k][k']`.
pub fn rep_inner(a: &DistanceRep, b: &DistanceRep) -> Result<f64> {
    if a.n() != b.n() {
        return Err(FontError::SubjectCountMismatch { a: a.n(), b: b.n() });
    }
    let (ka, kb) = (a.k(), b.k());
    let mut c = vec![vec![0.0f64; kb]; ka];
    for (&x, &y) in a.labels.iter().zip(&b.labels) {
        c[x][y] += 1.0;
    }
    // ac[k][l'] = sum_l A[k][l] c[l][l']
    let mut ac = vec![vec![0.0; kb]; ka];
    for k in 0..ka {
        for l in 0..ka {
            let akl = a.table[k][l];
            if akl == 0.0 {
                continue;
            }
            for lp in 0..kb {
                ac[k][lp] += akl * c[l][lp];
            }
        }
    }
    let mut total = 0.0;
    for k in 0..ka {
        for kp in 0..kb {
            if c[k][kp] == 0.0 {
                continue;
            }
            let inner: f64 = ac[k].iter().zip(&b.table[kp]).map(|(x, y)| x * y).sum();
            total += c[k][kp] * inner;
        }
    }
    Ok(total)
}

/// Cosine agreement between every pair of distance representations.
pub fn agreement_matrix(reps: &[DistanceRep]) -> Result<Vec<Vec<f64>>> {
    let m = reps.len();
    if let Some(first) = reps.first() {
        for r in reps {
            if r.n() != first.n() {
                return Err(FontError::SubjectCountMismatch { a: first.n(), b: r.n() });
            }
        }
    }
    if let Some(r) = reps.iter().find(|r| r.degenerate) {
        return Err(FontError::DegenerateRep(r.model_id));
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|t| (t..m).map(move |s| (t, s))).collect();
    let values = pairs
        .par_iter()
        .map(|&(t, s)| Ok(rep_inner(&reps[t], &reps[s])? / (reps[t].frob_norm * reps[s].frob_norm)))
        .collect::<Result<Vec<f64>>>()?;
    let mut g = vec![vec![0.0; m]; m];
    for (&(t, s), v) in pairs.iter().zip(values) {
        g[t][s] = v;
        g[s][t] = v;
    }
    Ok(g)
}

/// Cosine between each rep and a reference rep, such as one built from the
/// true cluster parameters and labels.
pub fn cosine_to_reference(reps: &[DistanceRep], reference: &DistanceRep) -> Result<Vec<f64>> {
    if reference.degenerate {
        return Err(FontError::DegenerateRep(reference.model_id));
    }
    reps.par_iter()
        .map(|r| {
            if r.degenerate {
                return Ok(0.0);
            }
            Ok(rep_inner(r, reference)? / (r.frob_norm * reference.frob_norm))
        })
        .collect()
}
