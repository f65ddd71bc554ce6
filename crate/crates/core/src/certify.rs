//! Deciding whether a pair `(I, s)` is a recoverable support.
//!
//! The main route solves `min ||A_{I^c}^T w||_inf s.t. A_I^T w = s` after
//! eliminating the equality constraints: every feasible `w` is
//! `(A_I^T)^+ s + K y` with `K` an orthonormal basis of `ker(A_I^T)`, which
//! leaves a Chebyshev problem in `y` with `m - |I|` unknowns.

use std::time::{Duration, Instant};

use log::warn;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::lpcore::{solve_chebyshev, LpStatus};
use crate::matrixkit::{dot, norm_inf, residual_inf, solve_square, ColumnSubspace, DenseMatrix};
use crate::support::{Sign, SupportPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Recoverable,
    NotRecoverable,
    /// The LP stopped at its iteration limit or the certificate failed its
    /// residual check; callers treat this as "no answer".
    Undecided,
}

impl Decision {
    pub fn is_recoverable(self) -> bool {
        self == Decision::Recoverable
    }
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub full_rank: bool,
    /// `||A_{I^c}^T w||_inf` at the certificate returned by the LP.
    /// Absent when `A_I` is rank deficient.
    pub lp_value: Option<f64>,
    pub certificate_w: Option<Vec<f64>>,
    /// `1 - lp_value`, or negative infinity without an LP value.
    pub margin: f64,
    pub decision: Decision,
    pub lp_status: Option<LpStatus>,
}

impl CertificateReport {
    fn rank_deficient() -> Self {
        Self {
            full_rank: false,
            lp_value: None,
            certificate_w: None,
            margin: f64::NEG_INFINITY,
            decision: Decision::NotRecoverable,
            lp_status: None,
        }
    }
}

/// Solves the certificate program for `(I, s)` and reports the verdict.
pub fn certificate_value(
    a: &DenseMatrix,
    p: &SupportPair,
    cfg: &NumericConfig,
) -> Result<CertificateReport> {
    p.check_bounds(a.cols())?;
    let a_i = a.select_columns(p.indices());
    let a_c = a.select_columns(&p.complement(a.cols()));
    certify_blocks(&a_i, &a_c, &p.sign_values(), cfg)
}

/// Like [`certificate_value`], also returning the time spent on the rank
/// test, the reduction and the LP (the column extraction is not timed).
pub fn certificate_value_timed(
    a: &DenseMatrix,
    p: &SupportPair,
    cfg: &NumericConfig,
) -> Result<(CertificateReport, Duration)> {
    p.check_bounds(a.cols())?;
    let a_i = a.select_columns(p.indices());
    let a_c = a.select_columns(&p.complement(a.cols()));
    let s = p.sign_values();
    let start = Instant::now();
    let report = certify_blocks(&a_i, &a_c, &s, cfg)?;
    Ok((report, start.elapsed()))
}

fn certify_blocks(
    a_i: &DenseMatrix,
    a_c: &DenseMatrix,
    s: &[f64],
    cfg: &NumericConfig,
) -> Result<CertificateReport> {
    PreparedSupport::from_blocks(a_i.clone(), a_c.clone(), cfg)?.certify(s, cfg)
}

/// The sign-independent part of the certificate program for one index set:
/// rank test, kernel basis and the reduced constraint matrix. Reused across
/// the `2^|I|` sign patterns of the set.
#[derive(Clone, Debug)]
pub struct PreparedSupport {
    a_i: DenseMatrix,
    a_c: DenseMatrix,
    sub: ColumnSubspace,
    kernel: DenseMatrix,
    reduced: DenseMatrix,
}

impl PreparedSupport {
    /// `indices` must be strictly ascending and in range.
    pub fn new(a: &DenseMatrix, indices: &[usize], cfg: &NumericConfig) -> Result<Self> {
        let probe = SupportPair::new(indices.to_vec(), vec![Sign::Plus; indices.len()])?;
        probe.check_bounds(a.cols())?;
        let a_i = a.select_columns(indices);
        let a_c = a.select_columns(&probe.complement(a.cols()));
        Self::from_blocks(a_i, a_c, cfg)
    }

    fn from_blocks(a_i: DenseMatrix, a_c: DenseMatrix, cfg: &NumericConfig) -> Result<Self> {
        let all: Vec<usize> = (0..a_i.cols()).collect();
        let sub = ColumnSubspace::new(&a_i, &all, cfg)?;
        let (kernel, reduced) = if sub.is_full_rank() {
            let kernel = sub.kernel_basis();
            let reduced = a_c.transpose().matmul(&kernel)?;
            (kernel, reduced)
        } else {
            (DenseMatrix::zeros(a_i.rows(), 0), DenseMatrix::zeros(a_c.cols(), 0))
        };
        Ok(Self {
            a_i,
            a_c,
            sub,
            kernel,
            reduced,
        })
    }

    pub fn is_full_rank(&self) -> bool {
        self.sub.is_full_rank()
    }

    /// Runs the certificate program for the sign vector `s`.
    pub fn certify(&self, s: &[f64], cfg: &NumericConfig) -> Result<CertificateReport> {
        if s.len() != self.a_i.cols() {
            return Err(Error::invalid("sign vector length differs from the support size"));
        }
        if !self.is_full_rank() {
            return Ok(CertificateReport::rank_deficient());
        }
        let w0 = self
            .sub
            .min_norm_solution(&self.a_i, s, cfg)?
            .ok_or_else(|| Error::Internal("full-rank system reported inconsistent".into()))?;
        let offset = self.a_c.tr_mul_vec(&w0);
        let sol = solve_chebyshev(&self.reduced, &offset, cfg)?;

        let ky = self.kernel.mul_vec(&sol.primal);
        let w: Vec<f64> = w0.iter().zip(&ky).map(|(a, b)| a + b).collect();
        // The verdict rests on the certificate itself, not on the LP's own
        // bookkeeping of its objective.
        let value = norm_inf(&self.a_c.tr_mul_vec(&w));
        let residual = residual_inf(&self.a_i, &w, s);

        let decision = if sol.status == LpStatus::IterationLimit {
            warn!("certificate LP hit its iteration limit ({} pivots)", sol.iterations);
            Decision::Undecided
        } else if residual > cfg.residual_tol {
            warn!("certificate residual {residual:e} exceeds tolerance");
            Decision::Undecided
        } else if value < 1.0 - cfg.decision_tol {
            Decision::Recoverable
        } else {
            Decision::NotRecoverable
        };
        Ok(CertificateReport {
            full_rank: true,
            lp_value: Some(value),
            certificate_w: Some(w),
            margin: 1.0 - value,
            decision,
            lp_status: Some(sol.status),
        })
    }
}

/// `true` exactly when [`certificate_value`] decides `Recoverable`.
pub fn is_recoverable(a: &DenseMatrix, p: &SupportPair, cfg: &NumericConfig) -> Result<bool> {
    let report = certificate_value(a, p, cfg)?;
    if report.decision == Decision::Undecided {
        warn!("undecided certificate for {p}; treating as not recoverable");
    }
    Ok(report.decision.is_recoverable())
}

/// The sufficient test with `y = 0`: `A_I` full rank and
/// `||A_{I^c}^T (A_I^T)^+ s||_inf < 1`.
pub fn fuchs_sufficient(a: &DenseMatrix, p: &SupportPair, cfg: &NumericConfig) -> Result<bool> {
    p.check_bounds(a.cols())?;
    let a_i = a.select_columns(p.indices());
    let all: Vec<usize> = (0..p.len()).collect();
    let sub = ColumnSubspace::new(&a_i, &all, cfg)?;
    if !sub.is_full_rank() {
        return Ok(false);
    }
    let Some(w0) = sub.min_norm_solution(&a_i, &p.sign_values(), cfg)? else {
        return Ok(false);
    };
    let a_c = a.select_columns(&p.complement(a.cols()));
    Ok(norm_inf(&a_c.tr_mul_vec(&w0)) < 1.0 - cfg.decision_tol)
}

/// For `|I| = m`: `A_I` is square, the certificate is unique, and the pair
/// is a maximal recoverable support iff `||A_{I^c}^T A_I^{-T} s||_inf < 1`.
/// No LP is involved.
pub fn maximal_full_rank_check(
    a: &DenseMatrix,
    p: &SupportPair,
    cfg: &NumericConfig,
) -> Result<bool> {
    p.check_bounds(a.cols())?;
    if p.len() != a.rows() {
        return Err(Error::invalid(format!(
            "maximal check needs |I| = m = {}, got {}",
            a.rows(),
            p.len()
        )));
    }
    let a_i_t = a.select_columns(p.indices()).transpose();
    let Some(w) = solve_square(&a_i_t, &p.sign_values()) else {
        return Ok(false);
    };
    let a_c = a.select_columns(&p.complement(a.cols()));
    Ok(norm_inf(&a_c.tr_mul_vec(&w)) < 1.0 - cfg.decision_tol)
}

/// A recoverable support of size one with its certificate
/// `w = a_k / ||a_k||^2`, where `a_k` is a column of largest norm (smallest
/// index among ties). Returns `None` when no maximal column works, which
/// happens when the maximal column is repeated.
pub fn size_one_support(a: &DenseMatrix, cfg: &NumericConfig) -> Option<(SupportPair, Vec<f64>)> {
    let norms: Vec<f64> = (0..a.cols()).map(|j| a.column_norm(j)).collect();
    let top = norms.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return None;
    }
    // Normalized columns often differ from each other in the last bit.
    let tie = top * (1.0 - 64.0 * f64::EPSILON);
    for k in (0..a.cols()).filter(|&j| norms[j] >= tie) {
        let ak = a.column(k);
        let nk2 = dot(&ak, &ak);
        let w: Vec<f64> = ak.iter().map(|v| v / nk2).collect();
        let ok = (0..a.cols())
            .filter(|&j| j != k)
            .all(|j| a.column_dot(j, &w).abs() < 1.0 - cfg.decision_tol);
        if ok {
            let pair = SupportPair::new(vec![k], vec![Sign::Plus]).expect("single index");
            return Some((pair, w));
        }
    }
    None
}

/// Removes `j0` from a certified pair and moves the certificate so the
/// smaller pair stays certified. The surviving signs are unchanged.
///
/// The step is `w + lambda z` with `z` the projection of `a_{j0}` onto
/// `ker(A_{I\{j0}}^T)`; `lambda` is the midpoint of the admissible
/// interval.
pub fn shrink_support(
    a: &DenseMatrix,
    p: &SupportPair,
    w: &[f64],
    j0: usize,
    cfg: &NumericConfig,
) -> Result<(SupportPair, Vec<f64>)> {
    p.check_bounds(a.cols())?;
    if w.len() != a.rows() {
        return Err(Error::invalid("certificate length differs from the row count"));
    }
    if p.len() < 2 {
        return Err(Error::invalid("cannot shrink a support of size below 2"));
    }
    let s_j0 = p
        .sign_of(j0)
        .ok_or_else(|| Error::invalid(format!("index {} is not in the support", j0 + 1)))?;
    let a_i = a.select_columns(p.indices());
    let all: Vec<usize> = (0..p.len()).collect();
    if !ColumnSubspace::new(&a_i, &all, cfg)?.is_full_rank() {
        return Err(Error::invalid("A_I is rank deficient"));
    }
    if residual_inf(&a_i, w, &p.sign_values()) > cfg.residual_tol {
        return Err(Error::invalid("w does not satisfy A_I^T w = s"));
    }
    let comp = p.complement(a.cols());
    let cw: Vec<f64> = comp.iter().map(|&j| a.column_dot(j, w)).collect();
    if norm_inf(&cw) >= 1.0 {
        return Err(Error::invalid("w violates the strict bound off the support"));
    }

    let smaller = p.without(j0).expect("j0 in support");
    let kernel = ColumnSubspace::new(a, smaller.indices(), cfg)?.kernel_basis();
    let aj0 = a.column(j0);
    let coeff = kernel.tr_mul_vec(&aj0);
    let z = kernel.mul_vec(&coeff);
    let g = dot(&aj0, &z);
    if g.abs() <= 1e-14 * dot(&aj0, &aj0).max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(
            "no kernel direction moves the removed constraint".into(),
        ));
    }

    let mut bound = 2.0 / g.abs();
    for (&j, &c) in comp.iter().zip(&cw) {
        let d = a.column_dot(j, &z).abs();
        if d > 0.0 {
            bound = bound.min((1.0 - c.abs()) / d);
        }
    }
    // lambda * g must lie strictly between 0 and -2 s_j0.
    let direction = -s_j0.value() * g.signum();
    let lambda = direction * bound / 2.0;
    let w_new: Vec<f64> = w.iter().zip(&z).map(|(a, b)| a + lambda * b).collect();
    Ok((smaller, w_new))
}
