//! Optimal task allocation: minimum-cost bijection between robots and generated
//! positions (the ST-SR-IA assignment problem), solved exactly.
//!
//! `solve_assignment` minimizes the total cost and, among equally cheap bijections,
//! returns the lexicographically smallest mapping. The exhaustive
//! `brute_force_assignment` is the test oracle and uses the same tie rule.

use crate::geometry::Point2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AssignmentError {
    #[error("cost matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("cost at ({row}, {col}) must be finite and >= 0, got {value}")]
    BadCost { row: usize, col: usize, value: f64 },
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("robot and goal counts differ: {robots} vs {goals}")]
    CountMismatch { robots: usize, goals: usize },
    #[error("brute force is limited to n <= 9, got {n}")]
    TooLarge { n: usize },
}

/// Row-major nonnegative cost grid; row = robot, column = goal.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, AssignmentError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(AssignmentError::Ragged { row: i, len: row.len(), expected: n_cols });
            }
            for (j, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    return Err(AssignmentError::BadCost { row: i, col: j, value: c });
                }
                entries.push(c);
            }
        }
        Ok(Self { rows: n_rows, cols: n_cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    fn require_square(&self) -> Result<usize, AssignmentError> {
        if self.rows != self.cols {
            return Err(AssignmentError::NonSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.rows)
    }
}

/// A bijection robot -> goal with its total cost (summed in row order).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub mapping: Vec<usize>,
    pub total_cost: f64,
}

impl Assignment {
    pub fn is_bijection(&self) -> bool {
        let n = self.mapping.len();
        let mut seen = vec![false; n];
        self.mapping.iter().all(|&j| {
            if j >= n || seen[j] {
                false
            } else {
                seen[j] = true;
                true
            }
        })
    }
}

/// Straight-line travel costs from each robot to each goal.
pub fn build_cost_matrix(
    robot_positions: &[Point2],
    goal_positions: &[Point2],
) -> Result<CostMatrix, AssignmentError> {
    if robot_positions.len() != goal_positions.len() {
        return Err(AssignmentError::CountMismatch {
            robots: robot_positions.len(),
            goals: goal_positions.len(),
        });
    }
    let rows = robot_positions
        .iter()
        .map(|&r| goal_positions.iter().map(|&g| r.distance(g)).collect())
        .collect();
    CostMatrix::from_rows(rows)
}

fn total_in_row_order(costs: &CostMatrix, mapping: &[usize]) -> f64 {
    mapping.iter().enumerate().map(|(i, &j)| costs.get(i, j)).sum()
}

/// Exact minimum-cost assignment.
///
/// Built as a lexicographic greedy over rows: for each row in order, commit to the
/// smallest column whose best completion over the remaining rows (computed by the
/// O(n^3) Hungarian routine) attains the minimum. This yields the lexicographically
/// smallest optimal mapping.
pub fn solve_assignment(costs: &CostMatrix) -> Result<Assignment, AssignmentError> {
    let n = costs.require_square()?;
    if n == 0 {
        return Ok(Assignment { mapping: Vec::new(), total_cost: 0.0 });
    }
    let mut free_cols: Vec<usize> = (0..n).collect();
    let mut mapping = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for (slot, &j) in free_cols.iter().enumerate() {
            let remaining: Vec<usize> =
                free_cols.iter().copied().filter(|&c| c != j).collect();
            let tail = hungarian_min_cost(costs, i + 1, &remaining);
            let total = costs.get(i, j) + tail;
            // Strict improvement keeps the smallest column among ties because
            // free_cols stays sorted ascending.
            if best.map_or(true, |(b, _)| total < b) {
                best = Some((total, slot));
            }
        }
        let (_, slot) = best.expect("at least one free column");
        mapping.push(free_cols.remove(slot));
    }
    let total_cost = total_in_row_order(costs, &mapping);
    Ok(Assignment { mapping, total_cost })
}

/// Minimum completion cost for rows `first_row..n` over the given columns, via the
/// Hungarian algorithm with potentials. Returns the cost summed in row order.
fn hungarian_min_cost(costs: &CostMatrix, first_row: usize, cols: &[usize]) -> f64 {
    let n = cols.len();
    debug_assert_eq!(costs.rows() - first_row, n);
    if n == 0 {
        return 0.0;
    }
    let cost = |r: usize, c: usize| costs.get(first_row + r, cols[c]);

    // 1-indexed arrays; p[j] is the row matched to column j, p[0] the working row.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
    let mut mapping = vec![0usize; n];
    for j in 1..=n {
        mapping[p[j] - 1] = j - 1;
    }
    mapping.iter().enumerate().map(|(r, &c)| cost(r, c)).sum()
}

/// Exhaustive assignment oracle for n <= 9: first lexicographic permutation
/// attaining the minimum row-order cost sum.
pub fn brute_force_assignment(costs: &CostMatrix) -> Result<Assignment, AssignmentError> {
    let n = costs.require_square()?;
    if n > 9 {
        return Err(AssignmentError::TooLarge { n });
    }
    if n == 0 {
        return Ok(Assignment { mapping: Vec::new(), total_cost: 0.0 });
    }
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n);
    let mut best: Option<Assignment> = None;
    fn recurse(
        costs: &CostMatrix,
        used: &mut [bool],
        current: &mut Vec<usize>,
        best: &mut Option<Assignment>,
    ) {
        let n = costs.rows();
        let i = current.len();
        if i == n {
            let total = total_in_row_order(costs, current);
            if best.as_ref().map_or(true, |b| total < b.total_cost) {
                *best = Some(Assignment { mapping: current.clone(), total_cost: total });
            }
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                current.push(j);
                recurse(costs, used, current, best);
                current.pop();
                used[j] = false;
            }
        }
    }
    recurse(costs, &mut used, &mut current, &mut best);
    Ok(best.expect("nonempty permutation set"))
}

/// Allocation round with unavailable robots: handling robots are excluded from the
/// matrix and the same number of surplus goals (the highest-indexed, lowest-priority
/// columns) are dropped to keep it square. Returns one goal index per robot, `None`
/// for excluded robots.
pub fn assign_with_exclusions(
    robot_positions: &[Point2],
    available: &[bool],
    goal_positions: &[Point2],
) -> Result<Vec<Option<usize>>, AssignmentError> {
    assert_eq!(robot_positions.len(), available.len());
    let avail_idx: Vec<usize> =
        (0..robot_positions.len()).filter(|&i| available[i]).collect();
    let k = avail_idx.len();
    if goal_positions.len() < k {
        return Err(AssignmentError::CountMismatch { robots: k, goals: goal_positions.len() });
    }
    let sub_robots: Vec<Point2> = avail_idx.iter().map(|&i| robot_positions[i]).collect();
    let kept_goals: Vec<Point2> = goal_positions[..k].to_vec();
    let costs = build_cost_matrix(&sub_robots, &kept_goals)?;
    let solution = solve_assignment(&costs)?;
    let mut out = vec![None; robot_positions.len()];
    for (r, &goal) in solution.mapping.iter().enumerate() {
        out[avail_idx[r]] = Some(goal);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{substream, Stream};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn square(rows: Vec<Vec<f64>>) -> CostMatrix {
        CostMatrix::from_rows(rows).unwrap()
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CostMatrix {
        square((0..n).map(|_| (0..n).map(|_| rng.random::<f64>() * 100.0).collect()).collect())
    }

    #[test]
    fn cost_matrix_345() {
        let m = build_cost_matrix(&[Point2::new(0.0, 0.0)], &[Point2::new(3.0, 4.0)]).unwrap();
        assert_eq!(m.get(0, 0), 5.0);
    }

    #[test]
    fn cost_matrix_coincident_diagonal() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), Point2::new(20.0, 0.0)];
        let m = build_cost_matrix(&pts, &pts).unwrap();
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
        }
        assert_eq!(m.get(0, 2), 20.0);
    }

    #[test]
    fn diagonal_dominant_2x2() {
        let a = solve_assignment(&square(vec![vec![1.0, 2.0], vec![2.0, 1.0]])).unwrap();
        assert_eq!(a.mapping, vec![0, 1]);
        assert_eq!(a.total_cost, 2.0);
    }

    #[test]
    fn permutation_structured_zeros() {
        // One zero per row/column placed as a permutation: optimal cost is 0.
        let a = solve_assignment(&square(vec![
            vec![5.0, 0.0, 7.0],
            vec![6.0, 9.0, 0.0],
            vec![0.0, 8.0, 4.0],
        ]))
        .unwrap();
        assert_eq!(a.total_cost, 0.0);
        assert_eq!(a.mapping, vec![1, 2, 0]);
    }

    #[test]
    fn matches_brute_force_on_random_7x7() {
        let mut rng = substream(21, Stream::Search);
        for _ in 0..200 {
            let m = random_matrix(7, &mut rng);
            let fast = solve_assignment(&m).unwrap();
            let slow = brute_force_assignment(&m).unwrap();
            assert_eq!(fast.total_cost, slow.total_cost);
            assert_eq!(fast.mapping, slow.mapping);
            assert!(fast.is_bijection());
        }
    }

    #[test]
    fn matches_brute_force_on_random_5x5() {
        let mut rng = substream(22, Stream::Search);
        for _ in 0..500 {
            let m = random_matrix(5, &mut rng);
            let fast = solve_assignment(&m).unwrap();
            let slow = brute_force_assignment(&m).unwrap();
            assert_eq!(fast.total_cost, slow.total_cost);
            assert_eq!(fast.mapping, slow.mapping);
        }
    }

    #[test]
    fn tie_break_is_lexicographic() {
        // All-equal costs: every bijection is optimal; the identity is lex-smallest.
        let a = solve_assignment(&square(vec![vec![1.0; 4]; 4])).unwrap();
        assert_eq!(a.mapping, vec![0, 1, 2, 3]);
        let b = brute_force_assignment(&square(vec![vec![1.0; 4]; 4])).unwrap();
        assert_eq!(b.mapping, vec![0, 1, 2, 3]);
    }

    #[test]
    fn row_constant_shift_preserves_mapping() {
        // Integer-valued costs keep every sum exact in f64.
        let mut rng = substream(23, Stream::Search);
        for _ in 0..100 {
            let n = rng.random_range(2..7);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(0..1000) as f64).collect())
                .collect();
            let m = square(rows.clone());
            let base = solve_assignment(&m).unwrap();
            let shift_row = rng.random_range(0..n);
            let constant = rng.random_range(1..500) as f64;
            let mut shifted_rows = rows;
            for c in shifted_rows[shift_row].iter_mut() {
                *c += constant;
            }
            let shifted = solve_assignment(&square(shifted_rows)).unwrap();
            assert_eq!(shifted.mapping, base.mapping);
            assert_eq!(shifted.total_cost, base.total_cost + constant);
        }
    }

    #[test]
    fn scaling_costs_preserves_mapping() {
        let mut rng = substream(24, Stream::Search);
        for _ in 0..50 {
            let n = rng.random_range(2..7);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..n).map(|_| rng.random::<f64>() * 50.0).collect()).collect();
            let base = solve_assignment(&square(rows.clone())).unwrap();
            let factor = rng.random_range(1..20) as f64 * 0.5;
            let scaled_rows: Vec<Vec<f64>> =
                rows.iter().map(|r| r.iter().map(|&c| c * factor).collect()).collect();
            let scaled = solve_assignment(&square(scaled_rows)).unwrap();
            assert_eq!(scaled.mapping, base.mapping);
        }
    }

    #[test]
    fn bijection_on_random_instances() {
        let mut rng = substream(25, Stream::Search);
        for _ in 0..50 {
            let n = rng.random_range(1..12);
            let a = solve_assignment(&random_matrix(n, &mut rng)).unwrap();
            assert!(a.is_bijection());
        }
    }

    #[test]
    fn brute_force_1x1_and_size_guard() {
        let one = brute_force_assignment(&square(vec![vec![3.0]])).unwrap();
        assert_eq!(one.mapping, vec![0]);
        assert_eq!(one.total_cost, 3.0);
        let two = brute_force_assignment(&square(vec![vec![1.0, 2.0], vec![2.0, 1.0]])).unwrap();
        assert_eq!(two.total_cost, 2.0);
        let mut rng = substream(26, Stream::Search);
        let big = random_matrix(10, &mut rng);
        assert_eq!(brute_force_assignment(&big), Err(AssignmentError::TooLarge { n: 10 }));
    }

    #[test]
    fn rejects_bad_input() {
        let ragged = CostMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0]]);
        assert!(matches!(ragged, Err(AssignmentError::Ragged { row: 1, .. })));
        let non_finite = CostMatrix::from_rows(vec![vec![1.0, f64::NAN]]);
        assert!(matches!(non_finite, Err(AssignmentError::BadCost { .. })));
        let negative = CostMatrix::from_rows(vec![vec![1.0, -2.0]]);
        assert!(matches!(negative, Err(AssignmentError::BadCost { .. })));
        let rect = square(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert!(matches!(
            solve_assignment(&rect),
            Err(AssignmentError::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn exclusion_round_drops_surplus_goals() {
        let robots = [Point2::new(0.0, 0.0), Point2::new(50.0, 0.0), Point2::new(100.0, 0.0)];
        let available = [true, false, true];
        let goals = [Point2::new(1.0, 0.0), Point2::new(99.0, 0.0), Point2::new(500.0, 500.0)];
        let out = assign_with_exclusions(&robots, &available, &goals).unwrap();
        // Robot 1 is handling; goal 2 (lowest priority) is dropped.
        assert_eq!(out, vec![Some(0), None, Some(1)]);
    }
}
