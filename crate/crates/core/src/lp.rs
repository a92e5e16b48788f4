//! Small dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problem sizes here are tiny (at most 2^K - 1 <= 31 equality rows and a few
//! thousand columns of corner-point weights), so a dense tableau is the right
//! tool; no external solver is pulled in.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("infeasible linear program (phase-1 objective {0:.3e})")]
    Infeasible(f64),
    #[error("unbounded linear program")]
    Unbounded,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

/// Minimize c'x subject to A x = b, x >= 0.
pub fn solve_min_eq(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(LpError::Dimension(format!("A is {}x{}, b has {}", m, n, b.len())));
    }

    // Tableau: m rows of [A | I_artificial | rhs], rhs made nonnegative.
    let width = n + m + 1;
    let mut t = vec![vec![0.0f64; width]; m];
    for (i, row) in a.iter().enumerate() {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * row[j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = vec![0.0f64; width];
    for j in n..n + m {
        cost1[j] = 1.0;
    }
    run_simplex(&mut t, &mut basis, &cost1, n + m)?;
    let phase1_obj: f64 = basis
        .iter()
        .enumerate()
        .map(|(i, &j)| if j >= n { t[i][width - 1] } else { 0.0 })
        .sum();
    if phase1_obj > FEAS_TOL {
        return Err(LpError::Infeasible(phase1_obj));
    }
    // Drive remaining (zero-valued) artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }

    // Phase 2: original objective; artificial columns are barred from entering.
    let mut cost2 = vec![0.0f64; width];
    cost2[..n].copy_from_slice(c);
    run_simplex(&mut t, &mut basis, &cost2, n)?;

    let mut x = vec![0.0f64; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width - 1].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { objective, x })
}

/// Maximize w'd subject to A d <= c, d >= 0 (slack formulation).
pub fn solve_max_ineq(w: &[f64], a: &[Vec<f64>], c: &[f64]) -> Result<LpSolution, LpError> {
    let m = a.len();
    let n = w.len();
    let mut rows = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![0.0; n + m];
        r[..n].copy_from_slice(row);
        r[n + i] = 1.0;
        rows.push(r);
    }
    let mut cost = vec![0.0; n + m];
    for j in 0..n {
        cost[j] = -w[j];
    }
    let sol = solve_min_eq(&cost, &rows, c)?;
    Ok(LpSolution { objective: -sol.objective, x: sol.x[..n].to_vec() })
}

/// Dantzig pricing (most negative reduced cost) for speed, falling back to
/// Bland's rule while the objective is stalled on degenerate pivots so the
/// method cannot cycle. Leaving row: min ratio, lowest basis index on ties.
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    enterable: usize,
) -> Result<(), LpError> {
    let m = t.len();
    let width = t[0].len();
    let mut in_basis = vec![false; width];
    for &j in basis.iter() {
        in_basis[j] = true;
    }
    let mut last_obj = f64::INFINITY;
    let mut stalled = 0usize;
    loop {
        let cb: Vec<f64> = basis.iter().map(|&j| cost[j]).collect();
        let obj: f64 = (0..m).map(|i| cb[i] * t[i][width - 1]).sum();
        if obj < last_obj - 1e-12 {
            last_obj = obj;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let bland = stalled > 2 * m + 10;

        // Reduced costs via the basic-cost multipliers.
        let mut entering = None;
        let mut best = -PIVOT_TOL;
        for j in 0..enterable {
            if in_basis[j] {
                continue;
            }
            let mut reduced = cost[j];
            for i in 0..m {
                if cb[i] != 0.0 {
                    reduced -= cb[i] * t[i][j];
                }
            }
            if reduced < -PIVOT_TOL {
                if bland {
                    entering = Some(j);
                    break;
                }
                if reduced < best {
                    best = reduced;
                    entering = Some(j);
                }
            }
        }
        let Some(j) = entering else { return Ok(()) };

        let mut leaving: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][j] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][j];
                let better = ratio < best_ratio - PIVOT_TOL
                    || (ratio < best_ratio + PIVOT_TOL
                        && leaving.map_or(true, |l| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leaving = Some(i);
                }
            }
        }
        let Some(i) = leaving else { return Err(LpError::Unbounded) };
        pivot(t, i, j);
        in_basis[basis[i]] = false;
        in_basis[j] = true;
        basis[i] = j;
    }
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let width = t[0].len();
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i != row {
            let factor = t[i][col];
            if factor != 0.0 {
                for j in 0..width {
                    t[i][j] -= factor * t[row][j];
                }
                t[i][col] = 0.0;
            }
        }
    }
}

/// Solve the square system M x = rhs by Gaussian elimination with partial
/// pivoting. Returns None when the system is (numerically) singular.
pub fn solve_square(mat: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    debug_assert!(mat.len() == n && mat.iter().all(|r| r.len() == n));
    let mut a: Vec<Vec<f64>> = mat.iter().map(|r| r.clone()).collect();
    let mut b = rhs.to_vec();
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|i| (i, a[i][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pval < 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for j in col..n {
                    a[i][j] -= f * a[col][j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simple_equality_lp() {
        // min x1 + x2 s.t. x1 + 2 x2 = 4, x1, x2 >= 0 -> x = (0, 2)
        let sol = solve_min_eq(&[1.0, 1.0], &[vec![1.0, 2.0]], &[4.0]).unwrap();
        assert_abs_diff_eq!(sol.objective, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[1], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x1 = 1 and x1 = 2 simultaneously
        let r = solve_min_eq(&[1.0], &[vec![1.0], vec![1.0]], &[1.0, 2.0]);
        assert!(matches!(r, Err(LpError::Infeasible(_))));
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Redundant constraints force degenerate pivots.
        let a = vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let sol = solve_min_eq(&[1.0, 2.0, 1.0], &a, &[1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(sol.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn max_over_polytope() {
        // max d1 + d2 over {d1 + d12 <= 2, d2 + d12 <= 2, sum <= 3} = 3
        let a = vec![
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ];
        let sol = solve_max_ineq(&[1.0, 1.0, 0.0], &a, &[2.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(sol.objective, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn square_solver() {
        let x = solve_square(&[vec![2.0, 1.0], vec![1.0, 3.0]], &[5.0, 10.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-12);
        assert!(solve_square(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 2.0]).is_none());
    }
}
