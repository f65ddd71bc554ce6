//! Householder QR with column pivoting, plus column appends by Givens
//! rotations.
//!
//! The orthogonal factor is kept square (`m x m`) so that its trailing
//! columns always span the orthogonal complement of the factored columns.
//! That complement is the kernel of `A_I^T`, which is what the certificate
//! and growth code consume.

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::matrixkit::dense::{dot, DenseMatrix};

#[derive(Clone, Debug)]
pub struct QrFactorization {
    q: DenseMatrix,
    r: DenseMatrix,
    col_perm: Vec<usize>,
    source_dims: (usize, usize),
}

impl QrFactorization {
    /// Full `m x m` orthogonal factor.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// `m x n` upper-triangular factor.
    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// `col_perm[j]` is the source column stored at position `j`.
    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let (m, n) = self.source_dims;
        (0..m.min(n)).map(|i| self.r[(i, i)]).collect()
    }

    /// Number of diagonal entries of `R` above the relative threshold
    /// from `cfg`, measured against the largest diagonal magnitude.
    pub fn numerical_rank_with(&self, cfg: &NumericConfig) -> usize {
        let (m, n) = self.source_dims;
        let diag = self.diagonal();
        let top = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        if top == 0.0 {
            return 0;
        }
        let thresh = cfg.rank_tolerance(m, n) * top;
        diag.iter().filter(|d| d.abs() > thresh).count()
    }

    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank_with(&NumericConfig::default())
    }

    /// Columns `from..m` of `Q`.
    pub fn trailing_q(&self, from: usize) -> DenseMatrix {
        let m = self.source_dims.0;
        let idx: Vec<usize> = (from.min(m)..m).collect();
        self.q.select_columns(&idx)
    }

    /// Columns `0..to` of `Q`.
    pub fn leading_q(&self, to: usize) -> DenseMatrix {
        let idx: Vec<usize> = (0..to.min(self.source_dims.0)).collect();
        self.q.select_columns(&idx)
    }
}

/// Pivoted Householder QR: `A P = Q R` with `|r_ii|` nonincreasing and
/// `r_ii >= 0`.
pub fn qr_factor(a: &DenseMatrix) -> Result<QrFactorization> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("cannot factor a {m}x{n} matrix")));
    }
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();

    for j in 0..m.min(n) {
        // Pivot: largest remaining column norm, smallest index on ties.
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..n {
            let nrm: f64 = (j..m).map(|i| r[(i, c)] * r[(i, c)]).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        if best != j {
            for i in 0..m {
                let t = r[(i, j)];
                r[(i, j)] = r[(i, best)];
                r[(i, best)] = t;
            }
            perm.swap(j, best);
        }

        let x: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;
        for c in j..n {
            let s: f64 = (j..m).map(|i| v[i - j] * r[(i, c)]).sum::<f64>() * beta;
            if s != 0.0 {
                for i in j..m {
                    r[(i, c)] -= s * v[i - j];
                }
            }
        }
        for i in j + 1..m {
            r[(i, j)] = 0.0;
        }
        // Q <- Q H, touching columns j..m.
        for row in 0..m {
            let s: f64 = (j..m).map(|i| q[(row, i)] * v[i - j]).sum::<f64>() * beta;
            if s != 0.0 {
                for i in j..m {
                    q[(row, i)] -= s * v[i - j];
                }
            }
        }
    }

    let mut f = QrFactorization {
        q,
        r,
        col_perm: perm,
        source_dims: (m, n),
    };
    for j in 0..m.min(n) {
        f.make_diagonal_nonnegative(j);
    }
    Ok(f)
}

impl QrFactorization {
    fn make_diagonal_nonnegative(&mut self, j: usize) {
        let (m, n) = self.source_dims;
        if self.r[(j, j)] < 0.0 {
            for c in 0..n {
                self.r[(j, c)] = -self.r[(j, c)];
            }
            for row in 0..m {
                self.q[(row, j)] = -self.q[(row, j)];
            }
        }
    }
}

/// Appends `v` as a new last column without re-pivoting. The new column's
/// source index is `n` (the previous column count). Costs `O(m^2 + m n)`.
pub fn qr_append_column(f: &QrFactorization, v: &[f64]) -> Result<QrFactorization> {
    let (m, n) = f.source_dims;
    if v.len() != m {
        return Err(Error::invalid(format!(
            "appended column has length {}, expected {m}",
            v.len()
        )));
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite entry {bad} in appended column")));
    }
    let mut q = f.q.clone();
    let mut u = q.tr_mul_vec(v);

    // Zero u[k+1..m] bottom-up. Rows k.. of R are zero in the old columns,
    // so the rotations only touch Q and the new column.
    let k = n;
    if k + 1 < m {
        for i in (k + 1..m).rev() {
            let (a, b) = (u[i - 1], u[i]);
            if b == 0.0 {
                continue;
            }
            let rad = a.hypot(b);
            let (c, s) = (a / rad, b / rad);
            u[i - 1] = rad;
            u[i] = 0.0;
            for row in 0..m {
                let qa = q[(row, i - 1)];
                let qb = q[(row, i)];
                q[(row, i - 1)] = c * qa + s * qb;
                q[(row, i)] = -s * qa + c * qb;
            }
        }
    }

    let mut r = DenseMatrix::zeros(m, n + 1);
    for i in 0..m {
        for j in 0..n {
            r[(i, j)] = f.r[(i, j)];
        }
        r[(i, n)] = u[i];
    }
    let mut perm = f.col_perm.clone();
    perm.push(n);
    let mut out = QrFactorization {
        q,
        r,
        col_perm: perm,
        source_dims: (m, n + 1),
    };
    if k < m {
        out.make_diagonal_nonnegative(k);
    }
    Ok(out)
}

/// Free-function form using default tolerances.
pub fn numerical_rank(f: &QrFactorization) -> usize {
    f.numerical_rank()
}
