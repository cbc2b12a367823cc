//! Pairing cost and minimum-cost injective assignment.
//!
//! The cost of pairing ground-truth point `i` with proposal `j` is
//! `gamma * |p_i - q_j|_2 - t_j`. Entries may be negative.
//!
//! [`hungarian_match`] solves the rectangular `N x M` problem directly with
//! the shortest-augmenting-path form of the Hungarian method (row and column
//! potentials, one augmentation per row), `O(N^2 M)`.
//! [`hungarian_match_padded`] pads to `M x M` with constant rows and runs the
//! same solver; it exists to cross-check the rectangular path.

use crate::error::{Error, Result};
use crate::model::{LossConfig, Matching, PointSet, ProposalSet};

/// Row bound for [`brute_force_match`].
pub const BRUTE_FORCE_MAX_ROWS: usize = 8;
/// Column bound for [`brute_force_match`].
pub const BRUTE_FORCE_MAX_COLS: usize = 10;

/// Dense row-major `rows x cols` cost matrix with `rows <= cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if rows > cols {
            return Err(Error::CountMismatch {
                gt: rows,
                pred: cols,
            });
        }
        if data.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "cost matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: bad.len(),
            });
        }
        Self::new(n, m, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Sum of `C[i, assignment[i]]`, accumulated in row order.
    pub fn assignment_cost(&self, assignment: &[usize]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, &j)| acc + self.get(i, j))
    }

    /// Adds `delta` to every entry of row `i`.
    pub fn shift_row(&mut self, i: usize, delta: f64) {
        let cols = self.cols;
        for c in &mut self.data[i * cols..(i + 1) * cols] {
            *c += delta;
        }
    }
}

pub fn build_cost_matrix(gt: &PointSet, pred: &ProposalSet, gamma: f64) -> Result<CostMatrix> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    if gt.len() > pred.len() {
        return Err(Error::CountMismatch {
            gt: gt.len(),
            pred: pred.len(),
        });
    }
    let mut data = Vec::with_capacity(gt.len() * pred.len());
    for p in gt.iter() {
        for q in pred.iter() {
            data.push(gamma * p.distance(&q.point) - q.confidence);
        }
    }
    CostMatrix::new(gt.len(), pred.len(), data)
}

pub fn hungarian_match(cost: &CostMatrix) -> Result<Matching> {
    let assignment = solve_rectangular(cost.rows, cost.cols, |i, j| cost.get(i, j));
    Matching::new(assignment, cost.cols)
}

/// Same optimum as [`hungarian_match`], computed on the square problem
/// obtained by appending `M - N` rows filled with one constant.
pub fn hungarian_match_padded(cost: &CostMatrix) -> Result<Matching> {
    let fill = cost.data.iter().fold(0.0_f64, |acc, c| acc.max(c.abs())) + 1.0;
    let n = cost.rows;
    let m = cost.cols;
    let full = solve_rectangular(m, m, |i, j| if i < n { cost.get(i, j) } else { fill });
    Matching::new(full[..n].to_vec(), m)
}

/// Exhaustive minimum over all injective maps; a verification oracle.
pub fn brute_force_match(cost: &CostMatrix) -> Result<Matching> {
    if cost.rows > BRUTE_FORCE_MAX_ROWS || cost.cols > BRUTE_FORCE_MAX_COLS {
        return Err(Error::TooLarge {
            rows: cost.rows,
            cols: cost.cols,
            max_rows: BRUTE_FORCE_MAX_ROWS,
            max_cols: BRUTE_FORCE_MAX_COLS,
        });
    }

    struct Search<'a> {
        cost: &'a CostMatrix,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_cost: f64,
    }

    impl Search<'_> {
        fn descend(&mut self, row: usize, acc: f64) {
            if row == self.cost.rows {
                if acc < self.best_cost {
                    self.best_cost = acc;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for j in 0..self.cost.cols {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                self.current.push(j);
                self.descend(row + 1, acc + self.cost.get(row, j));
                self.current.pop();
                self.used[j] = false;
            }
        }
    }

    let mut search = Search {
        cost,
        used: vec![false; cost.cols],
        current: Vec::with_capacity(cost.rows),
        best: Vec::new(),
        best_cost: f64::INFINITY,
    };
    search.descend(0, 0.0);
    Matching::new(search.best, cost.cols)
}

/// Builds the pairing cost from `cfg.gamma` and solves it.
pub fn match_points(gt: &PointSet, pred: &ProposalSet, cfg: &LossConfig) -> Result<Matching> {
    let cost = build_cost_matrix(gt, pred, cfg.gamma)?;
    hungarian_match(&cost)
}

/// Shortest augmenting path Hungarian method for `n <= m`.
///
/// Potentials `u` (rows) and `v` (columns) keep every reduced cost
/// `c - u - v` nonnegative; column 0 is a sentinel. Returns the column
/// assigned to each row.
fn solve_rectangular(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(n <= m);
    if n == 0 {
        return Vec::new();
    }
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; m + 1];
    // row_of[j]: row (1-based) currently owning column j, 0 if free.
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);

        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }

        // Flip the augmenting path back to the root.
        loop {
            let prev = way[j0];
            row_of[j0] = row_of[prev];
            j0 = prev;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=m {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, Proposal};

    fn gt(points: &[(f64, f64)]) -> PointSet {
        PointSet::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn pred(items: &[(f64, f64, f64)]) -> ProposalSet {
        ProposalSet::new(
            items
                .iter()
                .map(|&(x, y, t)| Proposal::new(Point::new(x, y), t).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cost_at_zero_distance_is_negative_confidence() {
        let c = build_cost_matrix(&gt(&[(0.0, 0.0)]), &pred(&[(0.0, 0.0, 1.0)]), 1.0).unwrap();
        assert_eq!(c.get(0, 0), -1.0);
    }

    #[test]
    fn cost_matches_hand_values() {
        let g = gt(&[(0.0, 0.0)]);
        let p = pred(&[(3.0, 4.0, 0.5)]);
        // 1 * 5 - 0.5 and 0.1 * 5 - 0.5.
        assert_eq!(build_cost_matrix(&g, &p, 1.0).unwrap().get(0, 0), 4.5);
        let c = build_cost_matrix(&g, &p, 0.1).unwrap().get(0, 0);
        assert!(c.abs() < 1e-15);
    }

    #[test]
    fn cost_rejects_more_gt_than_proposals() {
        let g = gt(&[(0.0, 0.0), (1.0, 1.0)]);
        let p = pred(&[(0.0, 0.0, 0.5)]);
        assert!(matches!(
            build_cost_matrix(&g, &p, 1.0),
            Err(Error::CountMismatch { gt: 2, pred: 1 })
        ));
        assert!(CostMatrix::new(2, 1, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn cost_rejects_non_finite_entries() {
        assert!(matches!(
            CostMatrix::new(1, 1, vec![f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn single_entry() {
        let c = CostMatrix::from_rows(&[vec![0.0]]).unwrap();
        let m = hungarian_match(&c).unwrap();
        assert_eq!(m.assignment(), &[0]);
        assert_eq!(c.assignment_cost(m.assignment()), 0.0);
        assert_eq!(brute_force_match(&c).unwrap().assignment(), &[0]);
    }

    #[test]
    fn diagonal_is_optimal() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let m = hungarian_match(&c).unwrap();
        assert_eq!(m.assignment(), &[0, 1]);
        assert_eq!(c.assignment_cost(m.assignment()), 2.0);
    }

    #[test]
    fn negative_costs() {
        let c = CostMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let b = brute_force_match(&c).unwrap();
        assert_eq!(b.assignment(), &[0, 1]);
        assert_eq!(c.assignment_cost(b.assignment()), -2.0);
        assert_eq!(hungarian_match(&c).unwrap().assignment(), &[0, 1]);
    }

    #[test]
    fn rectangular_against_padded() {
        let c =
            CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0, 0.5], vec![2.0, 0.0, 5.0, 0.25]]).unwrap();
        let direct = hungarian_match(&c).unwrap();
        let padded = hungarian_match_padded(&c).unwrap();
        assert_eq!(direct, padded);
        assert_eq!(direct.assignment(), &[3, 1]);
        assert_eq!(direct.unmatched(), &[0, 2]);
    }

    #[test]
    fn empty_ground_truth_leaves_everything_unmatched() {
        let c = CostMatrix::new(0, 3, vec![]).unwrap();
        let m = hungarian_match(&c).unwrap();
        assert!(m.assignment().is_empty());
        assert_eq!(m.unmatched(), &[0, 1, 2]);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let c = CostMatrix::new(9, 9, vec![0.0; 81]).unwrap();
        assert!(matches!(brute_force_match(&c), Err(Error::TooLarge { .. })));
        let c = CostMatrix::new(2, 11, vec![0.0; 22]).unwrap();
        assert!(matches!(brute_force_match(&c), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn singleton_sets_match() {
        let m = match_points(
            &gt(&[(5.0, 5.0)]),
            &pred(&[(5.0, 5.0, 0.9)]),
            &LossConfig::default(),
        )
        .unwrap();
        assert_eq!(m.assignment(), &[0]);
    }

    #[test]
    fn far_decoy_is_left_unmatched() {
        let g = gt(&[(10.0, 10.0), (50.0, 50.0)]);
        let p = pred(&[(49.0, 51.0, 0.6), (400.0, 400.0, 0.9), (11.0, 9.0, 0.6)]);
        let cfg = LossConfig::default();
        let m = match_points(&g, &p, &cfg).unwrap();
        let cost = build_cost_matrix(&g, &p, cfg.gamma).unwrap();
        let oracle = brute_force_match(&cost).unwrap();
        assert_eq!(m, oracle);
        assert_eq!(m.assignment(), &[2, 0]);
        assert_eq!(m.unmatched(), &[1]);
    }
}
