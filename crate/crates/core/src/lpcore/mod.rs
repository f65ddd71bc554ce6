//! Small dense linear programs: the Chebyshev (minimax residual) problem
//! behind the certificate test and the Basis Pursuit program.

mod simplex;

pub use simplex::{solve_standard, PivotRule, SimplexOptions, StandardFormLp};

use simplex::solve_with_basis;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::matrixkit::{norm_inf, solve_square, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// `min_y ||c + M y||_inf`.
///
/// The returned primal is the minimizing `y` and the objective is the
/// residual norm evaluated at it. The problem is always feasible, so the
/// status is `Optimal` unless the iteration limit is hit.
pub fn solve_chebyshev(m_mat: &DenseMatrix, c: &[f64], cfg: &NumericConfig) -> Result<LpSolution> {
    solve_chebyshev_with(m_mat, c, &SimplexOptions::from_config(cfg))
}

pub fn solve_chebyshev_with(
    m_mat: &DenseMatrix,
    c: &[f64],
    opts: &SimplexOptions,
) -> Result<LpSolution> {
    let (r, p) = (m_mat.rows(), m_mat.cols());
    if c.len() != r {
        return Err(Error::invalid(format!(
            "offset has length {}, matrix has {r} rows",
            c.len()
        )));
    }
    if r == 0 {
        return Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: 0.0,
            primal: vec![0.0; p],
            iterations: 0,
        });
    }
    if let Some(sol) = chebyshev_via_dual(m_mat, c, opts) {
        return Ok(sol);
    }
    Ok(chebyshev_primal(m_mat, c, opts))
}

fn chebyshev_primal(m_mat: &DenseMatrix, c: &[f64], opts: &SimplexOptions) -> LpSolution {
    let (r, p) = (m_mat.rows(), m_mat.cols());
    let lp = chebyshev_standard_form(m_mat, c);
    let basis: Vec<usize> = (2 * p + 1..2 * p + 1 + 2 * r).collect();
    let sol = solve_standard(&lp, Some(&basis), opts);
    let y: Vec<f64> = (0..p).map(|j| sol.primal[j] - sol.primal[p + j]).collect();
    let objective = chebyshev_residual(m_mat, c, &y);
    LpSolution {
        status: sol.status,
        objective,
        primal: y,
        iterations: sol.iterations,
    }
}

/// Solves the dual `max c^T (u - v)  s.t.  M^T (u - v) = 0, 1^T (u + v) = 1`
/// with `p + 1` rows instead of `2r`, and reads `y` off its multipliers.
/// `None` when the multipliers are unavailable or leave a duality gap, in
/// which case the caller solves the primal.
fn chebyshev_via_dual(m_mat: &DenseMatrix, c: &[f64], opts: &SimplexOptions) -> Option<LpSolution> {
    let (r, p) = (m_mat.rows(), m_mat.cols());
    let mut a = DenseMatrix::zeros(p + 1, 2 * r);
    for i in 0..r {
        for j in 0..p {
            a[(j, i)] = m_mat[(i, j)];
            a[(j, r + i)] = -m_mat[(i, j)];
        }
        a[(p, i)] = 1.0;
        a[(p, r + i)] = 1.0;
    }
    let mut b = vec![0.0; p + 1];
    b[p] = 1.0;
    let cost: Vec<f64> = c.iter().map(|v| -v).chain(c.iter().copied()).collect();
    let lp = StandardFormLp { a, b, c: cost };
    let (sol, basis) = solve_with_basis(&lp, None, opts);
    let basis = basis?;

    // Multipliers from B^T pi = c_B on the original data; rows dropped as
    // redundant get multiplier zero.
    let b_t = lp.a.select_rows(&basis.rows).select_columns(&basis.columns).transpose();
    let c_b: Vec<f64> = basis.columns.iter().map(|&j| lp.c[j]).collect();
    let pi_b = solve_square(&b_t, &c_b)?;
    let mut pi = vec![0.0; p + 1];
    for (&row, v) in basis.rows.iter().zip(pi_b) {
        pi[row] = v;
    }
    let y = pi[..p].to_vec();
    let objective = chebyshev_residual(m_mat, c, &y);
    let lower = -sol.objective;
    if objective.is_nan() || objective > lower + opts.feas_tol * (1.0 + lower.abs()) {
        return None;
    }
    Some(LpSolution {
        status: LpStatus::Optimal,
        objective,
        primal: y,
        iterations: sol.iterations,
    })
}

/// `||c + M y||_inf`
pub fn chebyshev_residual(m_mat: &DenseMatrix, c: &[f64], y: &[f64]) -> f64 {
    let my = m_mat.mul_vec(y);
    c.iter()
        .zip(&my)
        .fold(0.0, |acc, (a, b)| acc.max((a + b).abs()))
}

/// With `T = ||c||_inf` and `t = T - tau`, both inequalities
/// `+-(c + M y) <= t` get nonnegative right-hand sides, so the slacks are
/// an initial feasible basis. Column layout: `y+`, `y-`, `tau`, slacks.
fn chebyshev_standard_form(m_mat: &DenseMatrix, c: &[f64]) -> StandardFormLp {
    let (r, p) = (m_mat.rows(), m_mat.cols());
    let big_t = norm_inf(c);
    let width = 2 * p + 1 + 2 * r;
    let mut a = DenseMatrix::zeros(2 * r, width);
    let mut b = vec![0.0; 2 * r];
    for i in 0..r {
        let (up, lo) = (i, r + i);
        for j in 0..p {
            let v = m_mat[(i, j)];
            a[(up, j)] = v;
            a[(up, p + j)] = -v;
            a[(lo, j)] = -v;
            a[(lo, p + j)] = v;
        }
        a[(up, 2 * p)] = 1.0;
        a[(lo, 2 * p)] = 1.0;
        a[(up, 2 * p + 1 + i)] = 1.0;
        a[(lo, 2 * p + 1 + r + i)] = 1.0;
        b[up] = big_t - c[i];
        b[lo] = big_t + c[i];
    }
    let mut cost = vec![0.0; width];
    cost[2 * p] = -1.0;
    StandardFormLp { a, b, c: cost }
}

/// Basis Pursuit, `min ||x||_1  s.t.  A x = b`, via the split `x = u - v`.
///
/// The objective reported is `||x||_1` of the returned primal `x`.
pub fn solve_bp(a: &DenseMatrix, b: &[f64], cfg: &NumericConfig) -> Result<LpSolution> {
    let lp = bp_standard_form(a, b)?;
    Ok(solve_bp_assembled(&lp, cfg))
}

/// Builds the split-variable standard form of Basis Pursuit.
pub fn bp_standard_form(a: &DenseMatrix, b: &[f64]) -> Result<StandardFormLp> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, matrix has {m} rows",
            b.len()
        )));
    }
    let mut split = DenseMatrix::zeros(m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            split[(i, j)] = a[(i, j)];
            split[(i, n + j)] = -a[(i, j)];
        }
    }
    Ok(StandardFormLp {
        a: split,
        b: b.to_vec(),
        c: vec![1.0; 2 * n],
    })
}

/// Solves an already assembled Basis Pursuit program (see
/// [`bp_standard_form`]). Split out so callers can time the solve alone.
pub fn solve_bp_assembled(lp: &StandardFormLp, cfg: &NumericConfig) -> LpSolution {
    let n = lp.a.cols() / 2;
    let sol = solve_standard(lp, None, &SimplexOptions::from_config(cfg));
    let x: Vec<f64> = (0..n).map(|j| sol.primal[j] - sol.primal[n + j]).collect();
    let objective = x.iter().map(|v| v.abs()).sum();
    LpSolution {
        status: sol.status,
        objective,
        primal: x,
        iterations: sol.iterations,
    }
}
