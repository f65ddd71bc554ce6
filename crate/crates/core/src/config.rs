/// Tolerances shared by every numerical routine in the crate.
///
/// The defaults are the values the algorithms were validated with; callers
/// normally construct this with `NumericConfig::default()` and override a
/// field or two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericConfig {
    /// Relative threshold for numerical rank. `None` selects
    /// `max(m, n) * u` with `u` the unit roundoff of `f64`.
    pub rank_rel_tol: Option<f64>,
    /// A pair is recoverable when the certificate value is strictly below
    /// `1 - decision_tol`.
    pub decision_tol: f64,
    /// Primal feasibility tolerance of the simplex method.
    pub feas_tol: f64,
    /// Reduced-cost tolerance of the simplex method.
    pub opt_tol: f64,
    /// Residual allowed in `A_I^T w = s` for a certificate.
    pub residual_tol: f64,
    /// Relative slack used to group simultaneously activated constraints.
    pub hit_tol: f64,
    /// Simplex iteration limit is this factor times (rows + cols).
    pub lp_iteration_factor: usize,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: None,
            decision_tol: 1e-12,
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            residual_tol: 1e-9,
            hit_tol: 1e-9,
            lp_iteration_factor: 50,
        }
    }
}

/// Unit roundoff of IEEE binary64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

impl NumericConfig {
    pub fn rank_tolerance(&self, rows: usize, cols: usize) -> f64 {
        self.rank_rel_tol
            .unwrap_or_else(|| rows.max(cols) as f64 * UNIT_ROUNDOFF)
    }
}
