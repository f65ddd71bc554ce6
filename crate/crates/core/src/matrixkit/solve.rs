use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::matrixkit::dense::{norm_inf, DenseMatrix};
use crate::matrixkit::qr::{qr_factor, QrFactorization};

/// Column subspace of `A_I` together with its orthogonal complement, built
/// from one pivoted QR factorization of `A_I`.
#[derive(Clone, Debug)]
pub struct ColumnSubspace {
    rows: usize,
    qr: Option<QrFactorization>,
    rank: usize,
    width: usize,
}

impl ColumnSubspace {
    /// `idx` holds 0-based column indices of `a`.
    pub fn new(a: &DenseMatrix, idx: &[usize], cfg: &NumericConfig) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&j| j >= a.cols()) {
            return Err(Error::invalid(format!(
                "column index {bad} out of range for {} columns",
                a.cols()
            )));
        }
        if idx.is_empty() || a.rows() == 0 {
            return Ok(Self {
                rows: a.rows(),
                qr: None,
                rank: 0,
                width: idx.len(),
            });
        }
        let qr = qr_factor(&a.select_columns(idx))?;
        let rank = qr.numerical_rank_with(cfg);
        Ok(Self {
            rows: a.rows(),
            qr: Some(qr),
            rank,
            width: idx.len(),
        })
    }

    /// Wraps an existing factorization of `A_I`.
    pub fn from_factorization(qr: QrFactorization, cfg: &NumericConfig) -> Self {
        let (rows, width) = qr.source_dims();
        let rank = qr.numerical_rank_with(cfg);
        Self {
            rows,
            qr: Some(qr),
            rank,
            width,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.width
    }

    pub fn factorization(&self) -> Option<&QrFactorization> {
        self.qr.as_ref()
    }

    /// Orthonormal basis of `ker(A_I^T)`, one column per dimension, each
    /// column oriented so its largest-magnitude entry is positive.
    pub fn kernel_basis(&self) -> DenseMatrix {
        let mut k = match &self.qr {
            None => DenseMatrix::identity(self.rows),
            Some(qr) => qr.trailing_q(self.rank),
        };
        orient_columns(&mut k);
        k
    }

    /// Minimum-norm solution of `A_I^T w = s`, or `None` when `A_I` is
    /// rank deficient and `s` is outside its row space.
    pub fn min_norm_solution(
        &self,
        a_i: &DenseMatrix,
        s: &[f64],
        cfg: &NumericConfig,
    ) -> Result<Option<Vec<f64>>> {
        if s.len() != self.width {
            return Err(Error::invalid(format!(
                "sign vector has length {}, support has {}",
                s.len(),
                self.width
            )));
        }
        let qr = match &self.qr {
            None => return Ok(Some(vec![0.0; self.rows])),
            Some(qr) => qr,
        };
        let r = qr.r();
        let perm = qr.col_perm();
        let rank = self.rank;
        // R11^T u = (P^T s)[..rank], forward substitution.
        let mut u = vec![0.0; self.rows];
        for j in 0..rank {
            let mut acc = s[perm[j]];
            for i in 0..j {
                acc -= r[(i, j)] * u[i];
            }
            u[j] = acc / r[(j, j)];
        }
        let w = qr.q().mul_vec(&u);
        if rank < self.width {
            let resid = residual_inf(a_i, &w, s);
            if resid > cfg.residual_tol {
                return Ok(None);
            }
        }
        Ok(Some(w))
    }
}

/// `||A_I^T w - s||_inf`
pub fn residual_inf(a_i: &DenseMatrix, w: &[f64], s: &[f64]) -> f64 {
    let atw = a_i.tr_mul_vec(w);
    atw.iter()
        .zip(s)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn orient_columns(k: &mut DenseMatrix) {
    for j in 0..k.cols() {
        let col = k.column(j);
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for v in &col {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..k.rows() {
                k[(i, j)] = -k[(i, j)];
            }
        }
    }
}

/// Orthonormal basis of the null space of `(A_I)^T`, where `i_set` holds
/// 0-based column indices.
pub fn kernel_basis(a: &DenseMatrix, i_set: &[usize]) -> Result<DenseMatrix> {
    Ok(ColumnSubspace::new(a, i_set, &NumericConfig::default())?.kernel_basis())
}

/// `(A_I^T)^+ s`, or `None` when the system is inconsistent.
pub fn min_norm_solution(
    a: &DenseMatrix,
    i_set: &[usize],
    s: &[f64],
) -> Result<Option<Vec<f64>>> {
    let cfg = NumericConfig::default();
    let sub = ColumnSubspace::new(a, i_set, &cfg)?;
    sub.min_norm_solution(&a.select_columns(i_set), s, &cfg)
}

/// Solves the square system `M x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot vanishes.
pub fn solve_square(m: &DenseMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = m.rows();
    assert_eq!(m.cols(), n, "solve_square needs a square matrix");
    assert_eq!(b.len(), n);
    let mut a = m.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap();
        if a[(piv, col)].abs() <= scale * 1e-14 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                let t = a[(col, c)];
                a[(col, c)] = a[(piv, c)];
                a[(piv, c)] = t;
            }
            x.swap(col, piv);
        }
        let p = a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[(r, c)] -= f * a[(col, c)];
            }
            x[r] -= f * x[col];
        }
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc -= a[(r, c)] * x[c];
        }
        x[r] = acc / a[(r, r)];
    }
    if x.iter().all(|v| v.is_finite()) && norm_inf(&x).is_finite() {
        Some(x)
    } else {
        None
    }
}
