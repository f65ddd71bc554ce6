//! Dense two-phase tableau simplex.
//!
//! Entering variables are chosen by Dantzig's rule until a run of
//! degenerate pivots appears; from then on Bland's rule (smallest eligible
//! index, smallest basic index on ratio ties) is used until a pivot makes
//! progress again, which rules out cycling. `PivotRule::Bland` forces
//! Bland's rule throughout.
//!
//! By default pivoting runs on a right-hand side perturbed by about
//! `1e-10` relative, so degenerate vertices rarely stall the search; the
//! final basic solution is recomputed from the unperturbed data.

use crate::config::NumericConfig;
use crate::matrixkit::{solve_square, DenseMatrix};

use super::{LpSolution, LpStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Bland's rule on every pivot.
    Bland,
    /// Dantzig's rule, switching to Bland's rule during degenerate runs.
    #[default]
    DantzigBlandFallback,
}

/// Consecutive degenerate pivots tolerated before switching to Bland.
const DEGENERATE_RUN: usize = 8;
/// Entries smaller than this never serve as pivots.
const PIVOT_TOL: f64 = 1e-9;
/// Steps below this, relative to the right-hand side, count as degenerate.
const DEGENERATE_STEP: f64 = 1e-12;
/// Relative size of the optional right-hand-side perturbation.
const PERTURBATION: f64 = 1e-10;

/// `min c^T x  s.t.  A x = b, x >= 0`
#[derive(Clone, Debug)]
pub struct StandardFormLp {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub iteration_factor: usize,
    pub rule: PivotRule,
    /// Pivot on a perturbed right-hand side to avoid degenerate stalls.
    pub perturb: bool,
}

impl SimplexOptions {
    pub fn from_config(cfg: &NumericConfig) -> Self {
        Self {
            feas_tol: cfg.feas_tol,
            opt_tol: cfg.opt_tol,
            iteration_factor: cfg.lp_iteration_factor,
            rule: PivotRule::default(),
            perturb: true,
        }
    }
}

struct Tableau {
    /// `rows x (width + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    rows: usize,
    width: usize,
    /// Reduced costs (length `width`) followed by minus the objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter.
    enterable: Vec<bool>,
    /// `1 + max |b_i|`
    rhs_scale: f64,
    /// Original row of each tableau row.
    row_ids: Vec<usize>,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.width + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.t[r * (self.width + 1) + self.width]
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let w = self.width;
        self.obj = vec![0.0; w + 1];
        self.obj[..costs.len()].copy_from_slice(costs);
        for r in 0..self.rows {
            let cb = self.obj[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * (w + 1)..(r + 1) * (w + 1)];
                for (o, v) in self.obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w1 = self.width + 1;
        let p = self.at(pr, pc);
        {
            let row = &mut self.t[pr * w1..(pr + 1) * w1];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[pc] = 1.0;
        }
        let prow: Vec<f64> = self.t[pr * w1..(pr + 1) * w1].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w1 + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[r * w1..(r + 1) * w1];
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    fn choose_entering(&self, bland: bool, opt_tol: f64) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut best_val = -opt_tol;
        for j in 0..self.width {
            if !self.enterable[j] {
                continue;
            }
            let d = self.obj[j];
            if d < -opt_tol {
                if bland {
                    return Some(j);
                }
                if d < best_val {
                    best_val = d;
                    best = Some(j);
                }
            }
        }
        best
    }

    fn choose_leaving(&self, col: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let a = self.at(r, col);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / a;
            match best {
                None => best = Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    let better = if tie {
                        if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            a > self.at(br, col)
                        }
                    } else {
                        ratio < bratio
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
        }
        best.map(|b| b.0)
    }

    fn run_phase(
        &mut self,
        opts: &SimplexOptions,
        iterations: &mut usize,
        limit: usize,
    ) -> PhaseOutcome {
        let mut degenerate_run = 0usize;
        loop {
            let bland = opts.rule == PivotRule::Bland || degenerate_run >= DEGENERATE_RUN;
            let Some(col) = self.choose_entering(bland, opts.opt_tol) else {
                return PhaseOutcome::Optimal;
            };
            let Some(row) = self.choose_leaving(col, bland) else {
                return PhaseOutcome::Unbounded;
            };
            if *iterations >= limit {
                return PhaseOutcome::IterationLimit;
            }
            let step = self.rhs(row).max(0.0) / self.at(row, col);
            if step <= DEGENERATE_STEP * self.rhs_scale {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
            *iterations += 1;
        }
    }

    fn basic_solution(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = self.rhs(r).max(0.0);
            }
        }
        x
    }
}

/// Solves a standard-form LP.
///
/// `initial_basis`, when given, must name one column per row that together
/// form an identity block with a nonnegative right-hand side; phase one is
/// then skipped.
pub fn solve_standard(
    lp: &StandardFormLp,
    initial_basis: Option<&[usize]>,
    opts: &SimplexOptions,
) -> LpSolution {
    solve_with_basis(lp, initial_basis, opts).0
}

/// Final basis of an optimal solve: basic column and original row of
/// every surviving tableau row. Absent unless the status is optimal and no
/// artificial column is basic.
pub(crate) struct FinalBasis {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
}

pub(crate) fn solve_with_basis(
    lp: &StandardFormLp,
    initial_basis: Option<&[usize]>,
    opts: &SimplexOptions,
) -> (LpSolution, Option<FinalBasis>) {
    let (m, n) = (lp.a.rows(), lp.a.cols());
    assert_eq!(lp.b.len(), m, "rhs length");
    assert_eq!(lp.c.len(), n, "cost length");
    let limit = opts.iteration_factor * (m + n).max(1);
    let mut iterations = 0usize;

    if m == 0 {
        // No constraints: optimal at 0 unless some cost is negative.
        if lp.c.iter().any(|&c| c < -opts.opt_tol) {
            return (finish(LpStatus::Unbounded, lp, vec![0.0; n], 0), None);
        }
        return (finish(LpStatus::Optimal, lp, vec![0.0; n], 0), None);
    }

    // Pivoting runs on a slightly perturbed right-hand side, which breaks
    // the ties of degenerate vertices. The perturbation moves every entry
    // away from zero in the direction of its sign so the starting basis
    // stays feasible; `refine` recomputes the solution from the original
    // data at the end.
    let work = StandardFormLp {
        a: lp.a.clone(),
        b: perturbed_rhs(&lp.b, opts.perturb),
        c: lp.c.clone(),
    };
    let (mut tab, artificial_from) = match initial_basis {
        Some(basis) => (build_tableau(&work, basis.to_vec(), 0), n),
        None => {
            let tab = build_with_artificials(&work);
            (tab, n)
        }
    };

    if initial_basis.is_none() {
        let mut phase1_costs = vec![0.0; tab.width];
        for c in phase1_costs.iter_mut().skip(artificial_from) {
            *c = 1.0;
        }
        tab.set_objective(&phase1_costs);
        match tab.run_phase(opts, &mut iterations, limit) {
            PhaseOutcome::IterationLimit => {
                let x = tab.basic_solution(n);
                return (finish(LpStatus::IterationLimit, lp, x, iterations), None);
            }
            PhaseOutcome::Unbounded => {
                // phase one is bounded below by zero
                let x = tab.basic_solution(n);
                return (finish(LpStatus::IterationLimit, lp, x, iterations), None);
            }
            PhaseOutcome::Optimal => {}
        }
        let infeas = -tab.obj[tab.width];
        let scale = 1.0 + lp.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeas > opts.feas_tol * scale {
            let x = tab.basic_solution(n);
            return (finish(LpStatus::Infeasible, lp, x, iterations), None);
        }
        drive_out_artificials(&mut tab, artificial_from);
        for j in artificial_from..tab.width {
            tab.enterable[j] = false;
        }
    }

    let mut costs = vec![0.0; tab.width];
    costs[..n].copy_from_slice(&lp.c);
    tab.set_objective(&costs);
    let status = match tab.run_phase(opts, &mut iterations, limit) {
        PhaseOutcome::Optimal => LpStatus::Optimal,
        PhaseOutcome::Unbounded => LpStatus::Unbounded,
        PhaseOutcome::IterationLimit => LpStatus::IterationLimit,
    };
    let mut x = tab.basic_solution(n);
    if status == LpStatus::Optimal {
        refine(lp, &tab, &mut x, opts.feas_tol);
    }
    let basis = (status == LpStatus::Optimal && tab.basis.iter().all(|&j| j < n)).then(|| FinalBasis {
        columns: tab.basis.clone(),
        rows: tab.row_ids.clone(),
    });
    (finish(status, lp, x, iterations), basis)
}

fn perturbed_rhs(b: &[f64], on: bool) -> Vec<f64> {
    if !on {
        return b.to_vec();
    }
    let scale = 1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    b.iter()
        .enumerate()
        .map(|(i, &v)| {
            // Deterministic spread in [0.5, 1).
            let u = 0.5 + 0.5 * ((i as f64 * 0.618_033_988_749_895).fract());
            let d = PERTURBATION * scale * u;
            if v < 0.0 {
                v - d
            } else {
                v + d
            }
        })
        .collect()
}

fn finish(status: LpStatus, lp: &StandardFormLp, primal: Vec<f64>, iterations: usize) -> LpSolution {
    let objective = lp.c.iter().zip(&primal).map(|(c, x)| c * x).sum();
    LpSolution {
        status,
        objective,
        primal,
        iterations,
    }
}

fn build_tableau(lp: &StandardFormLp, basis: Vec<usize>, extra: usize) -> Tableau {
    let (m, n) = (lp.a.rows(), lp.a.cols());
    let width = n + extra;
    let w1 = width + 1;
    let mut t = vec![0.0; m * w1];
    for r in 0..m {
        t[r * w1..r * w1 + n].copy_from_slice(lp.a.row(r));
        t[r * w1 + width] = lp.b[r];
    }
    Tableau {
        t,
        rows: m,
        width,
        obj: vec![0.0; w1],
        basis,
        enterable: vec![true; width],
        rhs_scale: 1.0 + lp.b.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        row_ids: (0..m).collect(),
    }
}

fn build_with_artificials(lp: &StandardFormLp) -> Tableau {
    let (m, n) = (lp.a.rows(), lp.a.cols());
    let basis: Vec<usize> = (n..n + m).collect();
    let mut tab = build_tableau(lp, basis, m);
    let w1 = tab.width + 1;
    for r in 0..m {
        if lp.b[r] < 0.0 {
            for v in &mut tab.t[r * w1..(r + 1) * w1] {
                *v = -*v;
            }
        }
        tab.t[r * w1 + n + r] = 1.0;
    }
    tab
}

/// Pivots zero-level artificials out of the basis; rows where that is
/// impossible are redundant and get removed.
fn drive_out_artificials(tab: &mut Tableau, artificial_from: usize) {
    let mut r = 0;
    while r < tab.rows {
        if tab.basis[r] >= artificial_from {
            let col = (0..artificial_from)
                .filter(|&j| tab.at(r, j).abs() > 1e-9)
                .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
            match col {
                Some(j) => tab.pivot(r, j),
                None => {
                    let w1 = tab.width + 1;
                    tab.t.drain(r * w1..(r + 1) * w1);
                    tab.basis.remove(r);
                    tab.row_ids.remove(r);
                    tab.rows -= 1;
                    continue;
                }
            }
        }
        r += 1;
    }
}

/// Recomputes the basic variables from the original data, which removes the
/// drift accumulated over many tableau updates.
fn refine(lp: &StandardFormLp, tab: &Tableau, x: &mut [f64], feas_tol: f64) {
    if tab.basis.iter().any(|&j| j >= lp.a.cols()) {
        return;
    }
    let b_mat = lp.a.select_rows(&tab.row_ids).select_columns(&tab.basis);
    let rhs: Vec<f64> = tab.row_ids.iter().map(|&r| lp.b[r]).collect();
    let Some(xb) = solve_square(&b_mat, &rhs) else {
        return;
    };
    if xb.iter().any(|&v| v < -feas_tol * 10.0) {
        return;
    }
    for v in x.iter_mut() {
        *v = 0.0;
    }
    for (&j, v) in tab.basis.iter().zip(xb) {
        x[j] = v.max(0.0);
    }
}
