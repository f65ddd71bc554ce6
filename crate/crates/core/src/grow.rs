//! Growing a recoverable support one kernel step at a time.
//!
//! Starting from a certified size-one pair `(I, s)` with certificate `w`,
//! each step picks `y` in `ker(A_I^T)` and moves `w + lambda y` until some
//! off-support constraint `|a_j^T w| <= 1` becomes active. Those indices
//! join the support with the sign they were hit at. The factorization of
//! `A_I` is carried along with column appends.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use log::debug;
use rand::seq::SliceRandom;

use crate::certify::{certificate_value, size_one_support, Decision};
use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::matrixkit::{
    norm_inf, qr_append_column, qr_factor, residual_inf, ColumnSubspace, DenseMatrix,
    QrFactorization,
};
use crate::rng::{counter_normal, derive_seed, stream_rng};
use crate::support::{Sign, SupportPair};

/// Smallest positive `lambda` with `||c + lambda d||_inf = 1`, and the
/// positions reaching the bound within the relative tolerance `hit_tol`.
///
/// `None` when `d` is zero, i.e. the direction never activates a constraint.
pub fn ratio_step(c: &[f64], d: &[f64], hit_tol: f64) -> Result<Option<(f64, Vec<usize>)>> {
    if c.len() != d.len() {
        return Err(Error::invalid("ratio step vectors differ in length"));
    }
    let size = norm_inf(c);
    if size.is_nan() || size >= 1.0 {
        return Err(Error::invalid(format!("ratio step needs ||c||_inf < 1, got {size}")));
    }
    let steps: Vec<Option<f64>> = c
        .iter()
        .zip(d)
        .map(|(&ci, &di)| {
            if di > 0.0 {
                Some((1.0 - ci) / di)
            } else if di < 0.0 {
                Some((-1.0 - ci) / di)
            } else {
                None
            }
        })
        .collect();
    let Some(lambda) = steps.iter().flatten().cloned().reduce(f64::min) else {
        return Ok(None);
    };
    let cutoff = lambda * (1.0 + hit_tol);
    let hits = steps
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.filter(|&l| l <= cutoff).map(|_| i))
        .collect();
    Ok(Some((lambda, hits)))
}

/// Loop state of the growth procedure.
#[derive(Clone, Debug)]
pub struct GrowthState {
    pub support: SupportPair,
    pub w: Vec<f64>,
    /// Orthonormal basis of `ker(A_I^T)`, `m - |I|` columns.
    pub kernel: DenseMatrix,
    /// Accepted steps.
    pub iterations: usize,
    /// Direction trials spent, accepted or not.
    pub trials: usize,
    /// Hashes of the index sets visited, in order.
    pub history: Vec<u64>,
}

struct Walker<'a> {
    a: &'a DenseMatrix,
    cfg: &'a NumericConfig,
    /// Support columns in the order they entered the factorization.
    order: Vec<usize>,
    signs: Vec<Sign>,
    qr: QrFactorization,
    w: Vec<f64>,
}

impl Walker<'_> {
    fn pair(&self) -> SupportPair {
        SupportPair::from_entries(self.order.iter().cloned().zip(self.signs.iter().cloned()).collect())
            .expect("support indices are distinct")
    }

    fn kernel(&self) -> DenseMatrix {
        self.qr.trailing_q(self.order.len())
    }

    fn complement(&self) -> Vec<usize> {
        let mut inside = vec![false; self.a.cols()];
        for &j in &self.order {
            inside[j] = true;
        }
        (0..self.a.cols()).filter(|&j| !inside[j]).collect()
    }

    fn sign_values(&self) -> Vec<f64> {
        self.signs.iter().map(|s| s.value()).collect()
    }

    /// Tries to walk along `y`. Returns `true` if the step was taken.
    fn try_direction(&mut self, y: &[f64], k: usize) -> Result<bool> {
        let comp = self.complement();
        let c: Vec<f64> = comp.iter().map(|&j| self.a.column_dot(j, &self.w)).collect();
        let d: Vec<f64> = comp.iter().map(|&j| self.a.column_dot(j, y)).collect();
        let Some((lambda, hits)) = ratio_step(&c, &d, self.cfg.hit_tol)? else {
            return Ok(false);
        };
        if self.order.len() + hits.len() > k {
            return Ok(false);
        }
        let mut qr = self.qr.clone();
        for &h in &hits {
            qr = qr_append_column(&qr, &self.a.column(comp[h]))?;
        }
        if qr.numerical_rank_with(self.cfg) != self.order.len() + hits.len() {
            return Ok(false);
        }
        for &h in &hits {
            self.order.push(comp[h]);
            self.signs.push(Sign::of(c[h] + lambda * d[h]));
        }
        self.qr = qr;
        for (wi, yi) in self.w.iter_mut().zip(y) {
            *wi += lambda * yi;
        }
        self.correct_drift()?;
        Ok(true)
    }

    /// Restores `A_I^T w = s` exactly up to roundoff after a step.
    fn correct_drift(&mut self) -> Result<()> {
        let a_i = self.a.select_columns(&self.order);
        let s = self.sign_values();
        let r: Vec<f64> = a_i.tr_mul_vec(&self.w).iter().zip(&s).map(|(v, s)| s - v).collect();
        let sub = ColumnSubspace::from_factorization(self.qr.clone(), self.cfg);
        let delta = sub
            .min_norm_solution(&a_i, &r, self.cfg)?
            .ok_or_else(|| Error::Internal("full-rank update reported inconsistent".into()))?;
        for (wi, di) in self.w.iter_mut().zip(&delta) {
            *wi += di;
        }
        Ok(())
    }

    /// `A_I^T w = s` and `||A_{I^c}^T w||_inf < 1`.
    fn certificate_holds(&self) -> bool {
        let a_i = self.a.select_columns(&self.order);
        let a_c = self.a.select_columns(&self.complement());
        residual_inf(&a_i, &self.w, &self.sign_values()) <= self.cfg.residual_tol
            && norm_inf(&a_c.tr_mul_vec(&self.w)) < 1.0
    }
}

fn hash_indices(p: &SupportPair) -> u64 {
    let mut h = DefaultHasher::new();
    p.indices().hash(&mut h);
    h.finish()
}

/// Grows a recoverable support of size exactly `k` and returns it with its
/// certificate.
pub fn grow_support(
    a: &DenseMatrix,
    k: usize,
    seed: u64,
    cfg: &NumericConfig,
) -> Result<(SupportPair, Vec<f64>)> {
    let state = grow_support_traced(a, k, seed, cfg)?;
    Ok((state.support, state.w))
}

/// [`grow_support`] with the final loop state, including step counts and
/// the visited index sets.
pub fn grow_support_traced(
    a: &DenseMatrix,
    k: usize,
    seed: u64,
    cfg: &NumericConfig,
) -> Result<GrowthState> {
    if k == 0 {
        return Err(Error::invalid("target size must be at least 1"));
    }
    let rank = qr_factor(a)?.numerical_rank_with(cfg);
    if k > rank {
        return Err(Error::invalid(format!("target size {k} exceeds rank {rank}")));
    }
    let (start, w) = size_one_support(a, cfg).ok_or_else(|| {
        Error::invalid("no size-one recoverable support: the largest column is repeated up to sign")
    })?;
    let j0 = start.indices()[0];
    let mut walker = Walker {
        a,
        cfg,
        order: vec![j0],
        signs: vec![Sign::Plus],
        qr: qr_factor(&a.select_columns(&[j0]))?,
        w,
    };
    let budget = 20 * k;
    let mut trials = 0usize;
    let mut iterations = 0usize;
    let mut history = vec![hash_indices(&start)];

    while walker.order.len() < k {
        let kernel = walker.kernel();
        let dim = kernel.cols();
        let mut rng = stream_rng(seed, &[iterations as u64]);
        let mut basis: Vec<usize> = (0..dim).collect();
        basis.shuffle(&mut rng);

        let mut accepted = false;
        let mut combo = 0u64;
        while !accepted && trials < budget {
            let y: Vec<f64> = if let Some(col) = basis.get(combo as usize) {
                kernel.column(*col)
            } else {
                // Basis exhausted: random combinations of the kernel.
                let stream = derive_seed(seed, &[iterations as u64, combo]);
                let coeff: Vec<f64> = (0..dim as u64).map(|i| counter_normal(stream, i)).collect();
                kernel.mul_vec(&coeff)
            };
            combo += 1;
            trials += 1;
            for orient in [1.0, -1.0] {
                let dir: Vec<f64> = y.iter().map(|v| orient * v).collect();
                if walker.try_direction(&dir, k)? {
                    accepted = true;
                    break;
                }
            }
        }
        if !accepted {
            return Err(Error::Stuck {
                best: walker.pair(),
                best_certificate: walker.w.clone(),
                target: k,
                trials,
            });
        }
        iterations += 1;
        let pair = walker.pair();
        let h = hash_indices(&pair);
        if history.contains(&h) {
            return Err(Error::Internal(format!("growth revisited the index set of {pair}")));
        }
        history.push(h);
        debug_assert!(walker.certificate_holds(), "certificate lost after step {iterations}");
        debug!("grow step {iterations}: {pair}");
    }
    debug_assert!(iterations <= budget);

    let support = walker.pair();
    let report = certificate_value(a, &support, cfg)?;
    if report.decision != Decision::Recoverable || !walker.certificate_holds() {
        return Err(Error::Internal(format!(
            "grown pair {support} failed verification (value {:?})",
            report.lp_value
        )));
    }
    let kernel = walker.kernel();
    Ok(GrowthState {
        support,
        w: walker.w,
        kernel,
        iterations,
        trials,
        history,
    })
}
