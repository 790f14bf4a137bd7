//! Phase-1 dense tableau simplex with Bland's rule, used to find a feasible
//! point of `{x ≥ 0, A_ub x ≤ b_ub, A_eq x = b_eq}` with nonnegative right-hand
//! sides.

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-10;
const RESIDUAL_EPS: f64 = 1e-11;

pub(crate) struct FeasibilityProblem<'a> {
    pub n_vars: usize,
    pub ub_rows: &'a [Vec<f64>],
    pub ub_rhs: &'a [f64],
    pub eq_rows: &'a [Vec<f64>],
    pub eq_rhs: &'a [f64],
}

/// Returns a basic feasible point, or `None` when the system is infeasible.
pub(crate) fn find_feasible(problem: &FeasibilityProblem<'_>) -> Option<Vec<f64>> {
    let n = problem.n_vars;
    let m_ub = problem.ub_rows.len();
    let m_eq = problem.eq_rows.len();
    let m = m_ub + m_eq;
    let cols = n + m_ub + m_eq;
    debug_assert!(problem
        .ub_rhs
        .iter()
        .chain(problem.eq_rhs)
        .all(|b| *b >= 0.0));

    // Row-major tableau; the last column holds the right-hand side.
    let width = cols + 1;
    let mut t = vec![0.0; m * width];
    let mut basis = Vec::with_capacity(m);
    for (r, (row, &b)) in problem.ub_rows.iter().zip(problem.ub_rhs).enumerate() {
        t[r * width..r * width + n].copy_from_slice(row);
        t[r * width + n + r] = 1.0;
        t[r * width + cols] = b;
        basis.push(n + r);
    }
    for (k, (row, &b)) in problem.eq_rows.iter().zip(problem.eq_rhs).enumerate() {
        let r = m_ub + k;
        t[r * width..r * width + n].copy_from_slice(row);
        t[r * width + n + m_ub + k] = 1.0;
        t[r * width + cols] = b;
        basis.push(n + m_ub + k);
    }

    // Reduced costs of the phase-1 objective (sum of artificials).
    let mut cost = vec![0.0; width];
    for r in m_ub..m {
        for c in 0..n + m_ub {
            cost[c] -= t[r * width + c];
        }
        cost[cols] -= t[r * width + cols];
    }

    while let Some(enter) = (0..cols).find(|&c| cost[c] < -PIVOT_EPS) {
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t[r * width + enter];
            if coef <= PIVOT_EPS {
                continue;
            }
            let ratio = t[r * width + cols].max(0.0) / coef;
            leave = match leave {
                None => Some((r, ratio)),
                Some((best, best_ratio)) => {
                    if ratio < best_ratio - PIVOT_EPS
                        || (ratio <= best_ratio + PIVOT_EPS && basis[r] < basis[best])
                    {
                        Some((r, ratio))
                    } else {
                        Some((best, best_ratio))
                    }
                }
            };
        }
        // Phase 1 is bounded below by zero, so some row always qualifies.
        let (row, _) = leave?;
        pivot(&mut t, width, m, row, enter);
        let factor = cost[enter];
        if factor != 0.0 {
            for c in 0..width {
                cost[c] -= factor * t[row * width + c];
            }
        }
        basis[row] = enter;
    }

    // -cost[cols] is the phase-1 objective value.
    if -cost[cols] > FEASIBILITY_EPS {
        return None;
    }
    // Recompute the basic solution from the original rows; the tableau
    // accumulates drift in near-degenerate problems.
    let values = solve_basis(problem, &basis)?;
    let mut x = vec![0.0; n];
    for (r, &var) in basis.iter().enumerate() {
        if var >= n + m_ub && values[r] > FEASIBILITY_EPS {
            return None;
        }
        if var < n {
            x[var] = values[r].max(0.0);
        }
    }
    satisfies(problem, &x).then_some(x)
}

/// Column `var` of `[A_ub I 0; A_eq 0 I]`; slack and artificial columns
/// both sit on row `var − n`.
fn original_column(problem: &FeasibilityProblem<'_>, var: usize) -> Vec<f64> {
    let n = problem.n_vars;
    let rows = problem.ub_rows.iter().chain(problem.eq_rows);
    rows.enumerate()
        .map(|(r, row)| match var.checked_sub(n) {
            None => row[var],
            Some(k) if k == r => 1.0,
            Some(_) => 0.0,
        })
        .collect()
}

/// Solves `B x_B = b` by Gaussian elimination with partial pivoting.
fn solve_basis(problem: &FeasibilityProblem<'_>, basis: &[usize]) -> Option<Vec<f64>> {
    let m = basis.len();
    let columns: Vec<Vec<f64>> = basis.iter().map(|&v| original_column(problem, v)).collect();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| columns[c][r]).collect())
        .collect();
    let mut b: Vec<f64> = problem
        .ub_rhs
        .iter()
        .chain(problem.eq_rhs)
        .copied()
        .collect();
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < PIVOT_EPS {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let bk = b[k];
        for (row, bi) in bottom.iter_mut().zip(&mut b[k + 1..]) {
            let f = row[k] / pivot_row[k];
            if f != 0.0 {
                for (x, p) in row[k..].iter_mut().zip(&pivot_row[k..]) {
                    *x -= f * p;
                }
                *bi -= f * bk;
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let tail: f64 = (k + 1..m).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - tail) / a[k][k];
    }
    Some(x)
}

fn satisfies(problem: &FeasibilityProblem<'_>, x: &[f64]) -> bool {
    let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let ub = problem
        .ub_rows
        .iter()
        .zip(problem.ub_rhs)
        .all(|(row, b)| dot(row) <= b + RESIDUAL_EPS);
    let eq = problem
        .eq_rows
        .iter()
        .zip(problem.eq_rhs)
        .all(|(row, b)| (dot(row) - b).abs() <= RESIDUAL_EPS);
    ub && eq
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for c in 0..width {
        t[row * width + c] /= p;
    }
    for r in 0..m {
        if r == row {
            continue;
        }
        let factor = t[r * width + col];
        if factor == 0.0 {
            continue;
        }
        for c in 0..width {
            t[r * width + c] -= factor * t[row * width + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_simplex_point() {
        // x + y = 1, x ≤ 0.25
        let ub = vec![vec![1.0, 0.0]];
        let eq = vec![vec![1.0, 1.0]];
        let x = find_feasible(&FeasibilityProblem {
            n_vars: 2,
            ub_rows: &ub,
            ub_rhs: &[0.25],
            eq_rows: &eq,
            eq_rhs: &[1.0],
        })
        .unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!(x[0] <= 0.25 + 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        // x + y = 1, x ≤ 0, y ≤ 0
        let ub = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let eq = vec![vec![1.0, 1.0]];
        assert!(find_feasible(&FeasibilityProblem {
            n_vars: 2,
            ub_rows: &ub,
            ub_rhs: &[0.0, 0.0],
            eq_rows: &eq,
            eq_rhs: &[1.0],
        })
        .is_none());
    }

    #[test]
    fn degenerate_rows_terminate() {
        // Many redundant homogeneous rows: x_i − x_j ≤ 0 for all i, j.
        let n = 5;
        let mut ub = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut row = vec![0.0; n];
                    row[i] = 1.0;
                    row[j] = -1.0;
                    ub.push(row);
                }
            }
        }
        let rhs = vec![0.0; ub.len()];
        let eq = vec![vec![1.0; n]];
        let x = find_feasible(&FeasibilityProblem {
            n_vars: n,
            ub_rows: &ub,
            ub_rhs: &rhs,
            eq_rows: &eq,
            eq_rhs: &[1.0],
        })
        .unwrap();
        for v in x {
            assert!((v - 0.2).abs() < 1e-12);
        }
    }
}
