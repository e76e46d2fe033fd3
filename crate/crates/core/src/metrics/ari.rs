//! Adjusted Rand index under the permutation model.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{FontError, Result};

/// Cross-tabulation of two labelings over the same subjects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(FontError::LengthMismatch { a: a.len(), b: b.len() });
        }
        let index = |v: &[usize]| {
            let ids: BTreeMap<usize, usize> = v.iter().map(|&x| (x, 0)).collect();
            ids.keys().enumerate().map(|(i, &k)| (k, i)).collect::<BTreeMap<_, _>>()
        };
        let (ia, ib) = (index(a), index(b));
        let mut counts = vec![vec![0u64; ib.len()]; ia.len()];
        for (x, y) in a.iter().zip(b) {
            counts[ia[x]][ib[y]] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..ib.len()).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Self { counts, row_sums, col_sums, n: a.len() as u64 })
    }

    /// `(sum C(n_ij,2), sum C(a_i,2), sum C(b_j,2), C(n,2))`.
    fn pair_counts(&self) -> (u128, u128, u128, u128) {
        let c2 = |x: u64| {
            let x = u128::from(x);
            x * x.saturating_sub(1) / 2
        };
        (
            self.counts.iter().flatten().map(|&x| c2(x)).sum(),
            self.row_sums.iter().map(|&x| c2(x)).sum(),
            self.col_sums.iter().map(|&x| c2(x)).sum(),
            c2(self.n),
        )
    }
}

fn check(a: &[usize], b: &[usize]) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(FontError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(FontError::TooFewModels { min: 2, got: a.len() });
    }
    ContingencyTable::new(a, b)
}

/// ARI between two labelings. When the chance-corrected formula is 0/0 (both
/// partitions single-cluster, or both all-singleton) the partitions agree and
/// the result is 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let table = check(a, b)?;
    let (index, sa, sb, total) = table.pair_counts();
    let (index, sa, sb, total) = (index as f64, sa as f64, sb as f64, total as f64);
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Same quantity in exact rational arithmetic.
pub fn adjusted_rand_index_exact(a: &[usize], b: &[usize]) -> Result<Ratio<i128>> {
    let table = check(a, b)?;
    let (index, sa, sb, total) = table.pair_counts();
    let (index, sa, sb, total) = (index as i128, sa as i128, sb as i128, total as i128);
    // multiply numerator and denominator by 2 * C(n,2)
    let num = 2 * index * total - 2 * sa * sb;
    let den = (sa + sb) * total - 2 * sa * sb;
    if den == 0 {
        return Ok(Ratio::from_integer(1));
    }
    Ok(Ratio::new(num, den))
}

/// ARI restricted to subjects that carry a truth label (outliers excluded).
pub fn ari_against_truth(pred: &[usize], truth: &[Option<usize>]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(FontError::LengthMismatch { a: pred.len(), b: truth.len() });
    }
    let (p, t): (Vec<usize>, Vec<usize>) = pred.iter().zip(truth).filter_map(|(&p, t)| t.map(|t| (p, t))).unzip();
    adjusted_rand_index(&p, &t)
}
