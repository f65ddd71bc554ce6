//! Reference computations written independently of the library's
//! reduction, QR and rank code.

#![allow(dead_code)]

use recsup::lpcore::{solve_standard, LpStatus, PivotRule, SimplexOptions, StandardFormLp};
use recsup::{DenseMatrix, NumericConfig, SupportPair};

/// Exact rank of an integer matrix by fraction-free elimination.
pub fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..m {
            for c in col + 1..n {
                a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn gauss_rank(a: &DenseMatrix, rel_tol: f64) -> usize {
    let (m, n) = (a.rows(), a.cols());
    let mut t: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let p = (rank..m).max_by(|&x, &y| t[x][col].abs().total_cmp(&t[y][col].abs())).unwrap();
        if t[p][col].abs() <= rel_tol * scale {
            continue;
        }
        t.swap(rank, p);
        for r in rank + 1..m {
            let f = t[r][col] / t[rank][col];
            for c in col..n {
                t[r][c] -= f * t[rank][c];
            }
        }
        rank += 1;
    }
    rank
}

/// Solves a square system; `None` when (nearly) singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[p][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn cheb_value(m: &DenseMatrix, c: &[f64], y: &[f64]) -> f64 {
    (0..m.rows())
        .map(|i| (c[i] + m.row(i).iter().zip(y).map(|(a, b)| a * b).sum::<f64>()).abs())
        .fold(0.0, f64::max)
}

fn subsets(n: usize, k: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, out, cur, i + 1);
        cur.pop();
    }
}

/// `min_y ||c + M y||_inf` by enumerating every choice of `p + 1` active
/// signed rows `s_i (c_i + M_i y) = t`. Assumes `M` has full column rank.
pub fn chebyshev_vertex_oracle(m: &DenseMatrix, c: &[f64]) -> f64 {
    let (r, p) = (m.rows(), m.cols());
    if p == 0 {
        return c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    let mut sets = Vec::new();
    subsets(2 * r, p + 1, &mut sets, &mut Vec::new(), 0);
    let mut best = f64::INFINITY;
    for set in sets {
        // Unknowns (y, t): s_i M_i y - t = -s_i c_i
        let mut rows = Vec::with_capacity(p + 1);
        let mut rhs = Vec::with_capacity(p + 1);
        for &code in &set {
            let (i, s) = (code / 2, if code % 2 == 0 { 1.0 } else { -1.0 });
            let mut row: Vec<f64> = m.row(i).iter().map(|v| s * v).collect();
            row.push(-1.0);
            rows.push(row);
            rhs.push(-s * c[i]);
        }
        if let Some(sol) = gauss_solve(rows, rhs) {
            let v = cheb_value(m, c, &sol[..p]);
            best = best.min(v);
        }
    }
    best
}

/// Certificate program solved without eliminating the equalities:
/// `min t` over `w = u - v` with `A_I^T w = s` and `-t <= a_j^T w <= t`
/// off the support. `None` when `A_I` is rank deficient.
pub fn full_lp_value(a: &DenseMatrix, p: &SupportPair) -> Option<f64> {
    full_lp_value_with(a, p, PivotRule::Bland, false)
}

pub fn full_lp_value_with(a: &DenseMatrix, p: &SupportPair, rule: PivotRule, perturb: bool) -> Option<f64> {
    let (m, n) = (a.rows(), a.cols());
    let k = p.len();
    if gauss_rank(&a.select_columns(p.indices()), 1e-10) < k {
        return None;
    }
    let comp = p.complement(n);
    let r = comp.len();
    // columns: u (m), v (m), t, slacks (2r)
    let width = 2 * m + 1 + 2 * r;
    let rows = k + 2 * r;
    let mut lp = DenseMatrix::zeros(rows, width);
    let mut b = vec![0.0; rows];
    for (row, (&j, s)) in p.indices().iter().zip(p.sign_values()).enumerate() {
        for i in 0..m {
            lp[(row, i)] = a[(i, j)];
            lp[(row, m + i)] = -a[(i, j)];
        }
        b[row] = s;
    }
    for (q, &j) in comp.iter().enumerate() {
        for (row, sign) in [(k + 2 * q, 1.0), (k + 2 * q + 1, -1.0)] {
            for i in 0..m {
                lp[(row, i)] = sign * a[(i, j)];
                lp[(row, m + i)] = -sign * a[(i, j)];
            }
            lp[(row, 2 * m)] = -1.0;
            lp[(row, 2 * m + 1 + (row - k))] = 1.0;
        }
    }
    let mut cost = vec![0.0; width];
    cost[2 * m] = 1.0;
    let opts = SimplexOptions {
        rule,
        perturb,
        ..SimplexOptions::from_config(&NumericConfig::default())
    };
    let sol = solve_standard(&StandardFormLp { a: lp, b, c: cost }, None, &opts);
    assert_eq!(sol.status, LpStatus::Optimal, "full LP for {p} ended {:?}", sol.status);
    let w: Vec<f64> = (0..m).map(|i| sol.primal[i] - sol.primal[m + i]).collect();
    // Evaluate at the point rather than trusting the objective.
    Some(comp.iter().map(|&j| a.column_dot(j, &w).abs()).fold(0.0, f64::max))
}

pub fn oracle_recoverable(a: &DenseMatrix, p: &SupportPair, decision_tol: f64) -> bool {
    match full_lp_value(a, p) {
        None => false,
        Some(v) => v < 1.0 - decision_tol,
    }
}

/// Every pair with `1 <= |I| <= k_max`, supports in lexicographic order.
pub fn all_pairs(n: usize, k_max: usize) -> Vec<SupportPair> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        let mut sets = Vec::new();
        subsets(n, k, &mut sets, &mut Vec::new(), 0);
        for idx in sets {
            for bits in 0u32..(1 << k) {
                let signs = (0..k)
                    .map(|i| if bits >> i & 1 == 1 { recsup::Sign::Minus } else { recsup::Sign::Plus })
                    .collect();
                out.push(SupportPair::new(idx.clone(), signs).unwrap());
            }
        }
    }
    out
}
