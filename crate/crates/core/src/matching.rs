//! Optimal bipartite assignment and cross-layer matching instability.

use serde::{Deserialize, Serialize};

use crate::cost::CostMatrix;
use crate::error::MatchError;

/// An optimal assignment between ground truths and predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `(gt index, pred index)` pairs sorted by gt index.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// Solves the rectangular assignment problem on a `K x M` (pred x gt) matrix.
///
/// All `min(K, M)` units of the smaller side are assigned. Among optimal
/// assignments the lexicographically smallest pair list is returned: when
/// `K >= M` pairs are compared as `(gt, pred)`; when `M > K` the smaller side
/// is the predictions and the comparison runs over `(pred, gt)` instead.
pub fn hungarian_assign(c: &CostMatrix) -> Result<Assignment, MatchError> {
    for r in 0..c.rows() {
        for (col, v) in c.row(r).iter().enumerate() {
            if !v.is_finite() {
                return Err(MatchError::NonFinite { row: r, col });
            }
        }
    }
    let (k, m) = (c.rows(), c.cols());
    if k == 0 || m == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
        });
    }

    // Solve with the smaller side as rows.
    let gts_are_rows = m <= k;
    let mat = if gts_are_rows { c.transpose() } else { c.clone() };
    let row_to_col = lexicographic_optimum(&mat);

    let mut pairs: Vec<(usize, usize)> = row_to_col
        .iter()
        .enumerate()
        .map(|(r, &col)| if gts_are_rows { (r, col) } else { (col, r) })
        .collect();
    pairs.sort_unstable();
    let total_cost = pairs.iter().map(|&(g, p)| c.get(p, g)).sum();
    Ok(Assignment { pairs, total_cost })
}

struct Solution {
    row_to_col: Vec<usize>,
    /// Row potentials `u` and column potentials `v` with `u_i + v_j <= c_ij`.
    u: Vec<f64>,
    v: Vec<f64>,
    value: f64,
}

/// Shortest-augmenting-path Hungarian method for `n <= m`.
fn solve(mat: &CostMatrix) -> Solution {
    let n = mat.rows();
    let m = mat.cols();
    debug_assert!(n <= m);
    // 1-based with a sentinel column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = mat.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    let value = row_to_col
        .iter()
        .enumerate()
        .map(|(r, &col)| mat.get(r, col))
        .sum();
    Solution {
        row_to_col,
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
        value,
    }
}

/// Optimal assignment with the lexicographically smallest row-to-column map.
///
/// Any optimal assignment only uses edges that are tight under the optimal
/// potentials, so only those are tried as replacements. Each candidate is
/// confirmed by re-solving the remaining rows with the prefix fixed.
fn lexicographic_optimum(mat: &CostMatrix) -> Vec<usize> {
    let n = mat.rows();
    let m = mat.cols();
    let sol = solve(mat);
    let scale = mat.values().iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale * n as f64;

    let mut assignment = sol.row_to_col.clone();
    let mut fixed_cost = 0.0;
    let mut taken = vec![false; m];

    for r in 0..n {
        let current = assignment[r];
        let mut chosen = current;
        for col in 0..current {
            if taken[col] || mat.get(r, col) - sol.u[r] - sol.v[col] > tol {
                continue;
            }
            // Fix rows 0..=r, solve the rest on the free columns.
            let mut taken_here = taken.clone();
            taken_here[col] = true;
            let free_cols: Vec<usize> = (0..m).filter(|&j| !taken_here[j]).collect();
            let rest_rows = n - r - 1;
            let prefix = fixed_cost + mat.get(r, col);
            let (rest_value, rest_assign) = if rest_rows == 0 {
                (0.0, Vec::new())
            } else {
                let sub = CostMatrix::from_fn(rest_rows, free_cols.len(), |i, j| {
                    mat.get(r + 1 + i, free_cols[j])
                });
                let s = solve(&sub);
                let mapped: Vec<usize> = s.row_to_col.iter().map(|&j| free_cols[j]).collect();
                (s.value, mapped)
            };
            if prefix + rest_value <= sol.value + tol {
                chosen = col;
                assignment.truncate(r + 1);
                assignment[r] = col;
                assignment.extend(rest_assign);
                break;
            }
        }
        taken[chosen] = true;
        fixed_cost += mat.get(r, chosen);
    }
    assignment
}

/// Per-layer matched query indices for one image: `layers[l][m]` is the
/// prediction matched to ground truth `m` at decoder layer `l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LayerMatchRecord {
    pub layers: Vec<Vec<usize>>,
}

impl LayerMatchRecord {
    pub fn new(layers: Vec<Vec<usize>>) -> Result<Self, MatchError> {
        let rec = Self { layers };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        if self.layers.len() < 2 {
            return Err(MatchError::TooFewLayers(self.layers.len()));
        }
        let expected = self.layers[0].len();
        if expected == 0 {
            return Err(MatchError::NoGroundTruths);
        }
        for (layer, g) in self.layers.iter().enumerate() {
            if g.len() != expected {
                return Err(MatchError::Ragged {
                    layer,
                    got: g.len(),
                    expected,
                });
            }
        }
        Ok(())
    }

    pub fn num_gts(&self) -> usize {
        self.layers.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstabilityMode {
    /// Fraction of ground truths whose matched index is not constant over layers.
    #[default]
    Indicator,
    /// Literal bitwise XOR of the indices across layers, summed and divided by
    /// `M`. Not bounded to `[0, 1]`; kept for comparison only.
    BitwiseXor,
}

pub fn instability(rec: &LayerMatchRecord) -> Result<f64, MatchError> {
    instability_with(rec, InstabilityMode::Indicator)
}

pub fn instability_with(rec: &LayerMatchRecord, mode: InstabilityMode) -> Result<f64, MatchError> {
    rec.validate()?;
    let m = rec.num_gts();
    let first = &rec.layers[0];
    let total: f64 = match mode {
        InstabilityMode::Indicator => (0..m)
            .filter(|&g| rec.layers.iter().any(|layer| layer[g] != first[g]))
            .count() as f64,
        InstabilityMode::BitwiseXor => (0..m)
            .map(|g| rec.layers.iter().fold(0usize, |acc, layer| acc ^ layer[g]) as f64)
            .sum(),
    };
    Ok(total / m as f64)
}
