//! Minimum-cost one-to-one assignment (Hungarian algorithm, O(n³)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape_context::CostMatrix;

/// One-to-one matching between two point sets with its total cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    /// `(i, j)` pairs, row index into the first set, column index into the
    /// second; sorted by `i`, no index repeated on either side.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the original cost-matrix entries over `pairs`.
    pub total_cost: f64,
}

/// Cost assigned to dummy rows/columns when padding a rectangular matrix to
/// square; mid-range of the χ² cost so dummies absorb outliers without
/// dominating real matches.
pub const DEFAULT_DUMMY_COST: f64 = 0.25;

/// Minimum-cost assignment. Rectangular matrices are padded to square with
/// `dummy_cost` entries and pairs touching a dummy row/column are dropped
/// from the result.
pub fn assign(cost: &CostMatrix, dummy_cost: f64) -> Result<Correspondence> {
    let n = cost.rows();
    let m = cost.cols();
    let dim = n.max(m);
    let padded: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i < n && j < m {
                        cost.get(i, j)
                    } else {
                        dummy_cost
                    }
                })
                .collect()
        })
        .collect();
    let row_to_col = solve_square(&padded)?;
    let mut pairs: Vec<(usize, usize)> = row_to_col
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| i < n && j < m)
        .collect();
    pairs.sort_unstable();
    let total_cost = pairs.iter().map(|&(i, j)| cost.get(i, j)).sum();
    Ok(Correspondence { pairs, total_cost })
}

/// Exact minimum-cost perfect matching on a square matrix via shortest
/// augmenting paths with potentials. Returns `row_to_col`.
pub fn solve_square(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = cost.len();
    if n == 0 {
        return Err(Error::InvalidConfig("empty assignment matrix".into()));
    }
    for row in cost {
        if row.len() != n {
            return Err(Error::InvalidConfig("assignment matrix not square".into()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "assignment matrix has non-finite entries".into(),
            ));
        }
    }

    // 1-based potentials over rows (u) and columns (v); p[j] is the row
    // matched to column j, column 0 is a virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
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

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    Ok(row_to_col)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: usize, cols: usize, entries: &[f64]) -> CostMatrix {
        CostMatrix::from_entries(rows, cols, entries.to_vec()).unwrap()
    }

    /// Brute-force minimum over all permutations; the independent oracle.
    pub(crate) fn brute_force_min(cost: &CostMatrix) -> f64 {
        assert_eq!(cost.rows(), cost.cols());
        let n = cost.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let total: f64 = p.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
            if total < best {
                best = total;
            }
        });
        best
    }

    fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, visit);
            perm.swap(k, i);
        }
    }

    #[test]
    fn single_entry() {
        let c = assign(&matrix(1, 1, &[0.3]), DEFAULT_DUMMY_COST).unwrap();
        assert_eq!(c.pairs, vec![(0, 0)]);
        assert_eq!(c.total_cost, 0.3);
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let c = assign(&matrix(2, 2, &[1.0, 2.0, 2.0, 1.0]), DEFAULT_DUMMY_COST).unwrap();
        assert_eq!(c.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(c.total_cost, 2.0);
    }

    #[test]
    fn rectangular_drops_dummy_pairs() {
        // 2x3: the cheapest two real cells in distinct rows/cols win.
        let c = assign(
            &matrix(2, 3, &[0.9, 0.1, 0.5, 0.2, 0.9, 0.8]),
            DEFAULT_DUMMY_COST,
        )
        .unwrap();
        assert_eq!(c.pairs.len(), 2);
        assert_eq!(c.pairs, vec![(0, 1), (1, 0)]);
        assert!((c.total_cost - 0.3).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        let mut seed = 0xdead_beef_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / f64::from(u32::MAX)
        };
        for trial in 0..40 {
            let n = 2 + trial % 6; // up to 7x7
            let entries: Vec<f64> = (0..n * n).map(|_| next()).collect();
            let cost = matrix(n, n, &entries);
            let got = assign(&cost, DEFAULT_DUMMY_COST).unwrap();
            let best = brute_force_min(&cost);
            assert!(
                (got.total_cost - best).abs() < 1e-9,
                "n={n}: {} vs {best}",
                got.total_cost
            );
        }
    }

    #[test]
    fn never_beats_but_never_exceeds_identity_pairing() {
        let entries = [0.4, 0.0, 0.9, 0.1, 0.3, 0.2, 0.5, 0.6, 0.7];
        let cost = matrix(3, 3, &entries);
        let identity: f64 = (0..3).map(|i| cost.get(i, i)).sum();
        let got = assign(&cost, DEFAULT_DUMMY_COST).unwrap();
        assert!(got.total_cost <= identity);
    }
}
