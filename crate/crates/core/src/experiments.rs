//! Monte Carlo sampling of recoverability, phase-transition grids and
//! cross-validation against Basis Pursuit.
//!
//! Trial `t` always draws from its own stream keyed by `(seed, ..., t)`,
//! so results do not depend on the number of workers.

use std::fmt::Write as _;
use std::time::Instant;

use log::warn;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::certify::{certificate_value, certificate_value_timed, Decision};
use crate::config::NumericConfig;
use crate::ensembles::gaussian_matrix;
use crate::error::{Error, Result};
use crate::lpcore::{bp_standard_form, solve_bp_assembled, LpStatus};
use crate::matrixkit::{norm2, DenseMatrix};
use crate::rng::{derive_seed, stream_rng};
use crate::support::{Sign, SupportPair};

const PAIR_STREAM: u64 = 1;
const MATRIX_STREAM: u64 = 2;
const MAGNITUDE_STREAM: u64 = 3;
const SIZE_STREAM: u64 = 4;

/// Basis Pursuit agreement threshold on `||x~ - x*||_2`.
pub const BP_AGREEMENT_TOL: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    pub numeric: NumericConfig,
    /// Worker threads for independent trials; 0 or 1 runs sequentially.
    pub workers: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            numeric: NumericConfig::default(),
            workers: 1,
        }
    }
}

/// Runs `f(0..count)` and returns the results in trial order.
fn run_trials<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// A uniformly random `k`-subset of `0..n` with uniform signs.
pub fn random_pair<R: Rng>(n: usize, k: usize, rng: &mut R) -> SupportPair {
    let mut idx = sample(rng, n, k).into_vec();
    idx.sort_unstable();
    let signs = (0..k)
        .map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus })
        .collect();
    SupportPair::new(idx, signs).expect("sampled indices are distinct")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub trial: usize,
    pub pair: SupportPair,
    pub recoverable: bool,
}

/// Fraction of `trials` random pairs of size `k` that are recoverable,
/// with the per-trial records. The fraction is NaN for zero trials.
pub fn sample_recoverability(
    a: &DenseMatrix,
    k: usize,
    trials: usize,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<(f64, Vec<SampleRecord>)> {
    if k > a.rows() || k > a.cols() {
        return Err(Error::invalid(format!("k = {k} exceeds m = {}", a.rows())));
    }
    let records = run_trials(opts.workers, trials, |t| {
        let mut rng = stream_rng(seed, &[PAIR_STREAM, t as u64]);
        let pair = random_pair(a.cols(), k, &mut rng);
        let report = certificate_value(a, &pair, &opts.numeric)?;
        if report.decision == Decision::Undecided {
            warn!("trial {t}: undecided certificate for {pair}");
        }
        Ok(SampleRecord {
            trial: t,
            pair,
            recoverable: report.decision.is_recoverable(),
        })
    })?;
    let hits = records.iter().filter(|r| r.recoverable).count();
    Ok((hits as f64 / trials as f64, records))
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub pair: SupportPair,
    pub cert_decision: bool,
    /// Certificate found by the LP, when `A_I` has full rank.
    pub certificate_w: Option<Vec<f64>>,
    pub x_star: Vec<f64>,
    /// Basis Pursuit minimizer, when the LP reached optimality.
    pub bp_solution: Option<Vec<f64>>,
    pub bp_status: LpStatus,
    /// `||x~ - x*||_2 < 1e-5`; absent when BP did not solve.
    pub bp_agrees: Option<bool>,
    pub cert_time_s: f64,
    pub bp_time_s: f64,
}

/// Checks `(I, s)` with the certificate program, then recovers a vector
/// with that support and sign from `b = A x*` by Basis Pursuit. The
/// magnitudes `|x*_i|` are uniform on `[0.5, 1.5]`.
///
/// Neither timing includes the assembly of the constraints.
pub fn cross_validate(
    a: &DenseMatrix,
    p: &SupportPair,
    seed: u64,
    cfg: &NumericConfig,
) -> Result<TrialOutcome> {
    p.check_bounds(a.cols())?;
    let (report, cert_time) = certificate_value_timed(a, p, cfg)?;

    let mut rng = stream_rng(seed, &[MAGNITUDE_STREAM]);
    let mut x_star = vec![0.0; a.cols()];
    for (&j, s) in p.indices().iter().zip(p.signs()) {
        x_star[j] = s.value() * rng.random_range(0.5..=1.5);
    }
    let b = a.mul_vec(&x_star);
    let lp = bp_standard_form(a, &b)?;
    let start = Instant::now();
    let sol = solve_bp_assembled(&lp, cfg);
    let bp_time = start.elapsed();

    let (bp_solution, bp_agrees) = if sol.is_optimal() {
        let diff: Vec<f64> = sol.primal.iter().zip(&x_star).map(|(u, v)| u - v).collect();
        let agrees = norm2(&diff) < BP_AGREEMENT_TOL;
        (Some(sol.primal), Some(agrees))
    } else {
        (None, None)
    };
    Ok(TrialOutcome {
        pair: p.clone(),
        cert_decision: report.decision.is_recoverable(),
        certificate_w: report.certificate_w,
        x_star,
        bp_solution,
        bp_status: sol.status,
        bp_agrees,
        cert_time_s: cert_time.as_secs_f64(),
        bp_time_s: bp_time.as_secs_f64(),
    })
}

/// `trials` cross-validations, each on a fresh `m x n` Gaussian matrix. The
/// support size is `k` or, if absent, uniform on `1..=m`.
pub fn cross_validation_study(
    m: usize,
    n: usize,
    k: Option<usize>,
    trials: usize,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<Vec<TrialOutcome>> {
    if let Some(k) = k {
        if k == 0 || k > m {
            return Err(Error::invalid(format!("k = {k} outside 1..={m}")));
        }
    }
    run_trials(opts.workers, trials, |t| {
        let t = t as u64;
        let a = gaussian_matrix(m, n, derive_seed(seed, &[MATRIX_STREAM, t]))?;
        let mut rng = stream_rng(seed, &[PAIR_STREAM, t]);
        let size = match k {
            Some(k) => k,
            None => stream_rng(seed, &[SIZE_STREAM, t]).random_range(1..=m),
        };
        let pair = random_pair(n, size, &mut rng);
        cross_validate(&a, &pair, derive_seed(seed, &[MAGNITUDE_STREAM, t]), &opts.numeric)
    })
}

/// One cell of a phase-transition grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGridRecord {
    /// `m / n`
    pub delta: f64,
    /// `k / m`
    pub rho: f64,
    pub m: usize,
    pub k: usize,
    pub trials: usize,
    pub successes_cert: usize,
    pub successes_bp: Option<usize>,
    pub mean_time_cert_s: Option<f64>,
    pub mean_time_bp_s: Option<f64>,
}

impl PhaseGridRecord {
    pub fn fraction_cert(&self) -> f64 {
        self.successes_cert as f64 / self.trials as f64
    }
}

/// The `(m, k)` cells of an `n`-column grid with `delta_steps` values
/// `m = round(i n / delta_steps)` and `rho_steps` values
/// `k = round(j m / rho_steps)`, both clamped to at least 1. Cells that
/// coincide after rounding appear once.
pub fn grid_cells(n: usize, delta_steps: usize, rho_steps: usize) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for i in 1..=delta_steps {
        let m = ((i as f64 / delta_steps as f64) * n as f64).round().clamp(1.0, n as f64) as usize;
        for j in 1..=rho_steps {
            let k = ((j as f64 / rho_steps as f64) * m as f64).round().clamp(1.0, m as f64) as usize;
            if !cells.contains(&(m, k)) {
                cells.push((m, k));
            }
        }
    }
    cells
}

struct CellTrial {
    cert: bool,
    cert_time: f64,
    bp: Option<bool>,
    bp_time: f64,
}

/// Runs the grid. Every trial draws a fresh Gaussian matrix and pair keyed
/// by `(seed, m, k, trial)`.
pub fn phase_grid(
    n: usize,
    delta_steps: usize,
    rho_steps: usize,
    trials: usize,
    seed: u64,
    with_bp: bool,
    opts: &ExperimentOptions,
) -> Result<Vec<PhaseGridRecord>> {
    if n < 10 {
        return Err(Error::invalid("phase grid needs n >= 10"));
    }
    if delta_steps == 0 || rho_steps == 0 {
        return Err(Error::invalid("grid needs at least one step in each direction"));
    }
    let cells = grid_cells(n, delta_steps, rho_steps);
    let mut records = Vec::with_capacity(cells.len());
    for (m, k) in cells {
        let outcomes = run_trials(opts.workers, trials, |t| {
            let key = [m as u64, k as u64, t as u64];
            let a = gaussian_matrix(m, n, derive_seed(seed, &[MATRIX_STREAM, key[0], key[1], key[2]]))?;
            let mut rng = stream_rng(seed, &[PAIR_STREAM, key[0], key[1], key[2]]);
            let pair = random_pair(n, k, &mut rng);
            if with_bp {
                let mseed = derive_seed(seed, &[MAGNITUDE_STREAM, key[0], key[1], key[2]]);
                let o = cross_validate(&a, &pair, mseed, &opts.numeric)?;
                Ok(CellTrial {
                    cert: o.cert_decision,
                    cert_time: o.cert_time_s,
                    bp: Some(o.bp_agrees.unwrap_or(false)),
                    bp_time: o.bp_time_s,
                })
            } else {
                let (report, time) = certificate_value_timed(&a, &pair, &opts.numeric)?;
                Ok(CellTrial {
                    cert: report.decision.is_recoverable(),
                    cert_time: time.as_secs_f64(),
                    bp: None,
                    bp_time: 0.0,
                })
            }
        })?;
        let mean = |f: &dyn Fn(&CellTrial) -> f64| {
            (trials > 0).then(|| outcomes.iter().map(f).sum::<f64>() / trials as f64)
        };
        records.push(PhaseGridRecord {
            delta: m as f64 / n as f64,
            rho: k as f64 / m as f64,
            m,
            k,
            trials,
            successes_cert: outcomes.iter().filter(|o| o.cert).count(),
            successes_bp: with_bp.then(|| outcomes.iter().filter(|o| o.bp == Some(true)).count()),
            mean_time_cert_s: mean(&|o| o.cert_time),
            mean_time_bp_s: if with_bp { mean(&|o| o.bp_time) } else { None },
        });
    }
    Ok(records)
}

/// CSV with header `delta,rho,m,k,trials,succ_cert,succ_bp,t_cert_mean_s,t_bp_mean_s`.
pub fn phase_grid_csv(records: &[PhaseGridRecord]) -> String {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }
    let mut out = String::from("delta,rho,m,k,trials,succ_cert,succ_bp,t_cert_mean_s,t_bp_mean_s\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.delta,
            r.rho,
            r.m,
            r.k,
            r.trials,
            r.successes_cert,
            opt(r.successes_bp),
            opt(r.mean_time_cert_s.map(|t| format!("{t:.6e}"))),
            opt(r.mean_time_bp_s.map(|t| format!("{t:.6e}"))),
        )
        .expect("write to string");
    }
    out
}

/// Trailing moving average: entry `i` averages `values[i+1-window..=i]`,
/// with a shorter window at the start.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..values.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(w);
            values[start..=i].iter().sum::<f64>() / (i + 1 - start) as f64
        })
        .collect()
}

/// Least-squares nonincreasing fit (pool adjacent violators).
pub fn isotonic_nonincreasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb));
        }
    }
    blocks.into_iter().flat_map(|(v, c)| std::iter::repeat_n(v, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::mercedes_benz;

    #[test]
    fn identity_always_recovers() {
        let (f, recs) =
            sample_recoverability(&DenseMatrix::identity(6), 4, 100, 5, &ExperimentOptions::default())
                .unwrap();
        assert_eq!(f, 1.0);
        assert_eq!(recs.len(), 100);
        assert!(recs.iter().all(|r| r.pair.len() == 4));
    }

    #[test]
    fn sampling_rejects_large_k() {
        let a = mercedes_benz(4).unwrap();
        assert!(sample_recoverability(&a, 4, 1, 0, &ExperimentOptions::default()).is_err());
    }

    #[test]
    fn even_mercedes_never_recovers_maximal() {
        let a = mercedes_benz(4).unwrap();
        let (f, _) = sample_recoverability(&a, 3, 200, 1, &ExperimentOptions::default()).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = mercedes_benz(5).unwrap();
        let one = sample_recoverability(&a, 3, 64, 9, &ExperimentOptions::default()).unwrap();
        let four = sample_recoverability(
            &a,
            3,
            64,
            9,
            &ExperimentOptions { workers: 4, ..Default::default() },
        )
        .unwrap();
        assert_eq!(one.1, four.1);
    }

    #[test]
    fn cross_validate_identity() {
        let a = DenseMatrix::identity(5);
        let p = SupportPair::new(vec![0, 2], vec![Sign::Plus, Sign::Minus]).unwrap();
        let o = cross_validate(&a, &p, 3, &NumericConfig::default()).unwrap();
        assert!(o.cert_decision);
        assert_eq!(o.bp_agrees, Some(true));
        assert!(o.x_star[0] >= 0.5 && o.x_star[0] <= 1.5);
        assert!(o.x_star[2] <= -0.5 && o.x_star[2] >= -1.5);
    }

    #[test]
    fn grid_structure() {
        let cells = grid_cells(40, 5, 5);
        assert_eq!(cells.len(), 25);
        assert!(cells.iter().all(|&(m, k)| 1 <= k && k <= m && m <= 40));
        let recs = phase_grid(40, 5, 5, 0, 1, true, &ExperimentOptions::default()).unwrap();
        assert_eq!(recs.len(), 25);
        assert!(recs.iter().all(|r| r.successes_cert == 0 && r.mean_time_cert_s.is_none()));
        let csv = phase_grid_csv(&recs);
        assert!(csv.starts_with("delta,rho,m,k,trials,succ_cert,succ_bp,t_cert_mean_s,t_bp_mean_s\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",0,0,0,,"));
        assert!(phase_grid(9, 2, 2, 1, 0, false, &ExperimentOptions::default()).is_err());
    }

    #[test]
    fn merged_cells() {
        // With n = 10 and 20 steps, neighbouring deltas round to the same m.
        let cells = grid_cells(10, 20, 20);
        let mut sorted = cells.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), cells.len());
    }

    #[test]
    fn smoothing() {
        assert_eq!(moving_average(&[1.0, 0.0, 1.0, 0.0], 2), vec![1.0, 0.5, 0.5, 0.5]);
        assert_eq!(moving_average(&[1.0, 0.5, 0.0], 3), vec![1.0, 0.75, 0.5]);
        assert_eq!(isotonic_nonincreasing(&[1.0, 0.5, 0.7, 0.1]), vec![1.0, 0.6, 0.6, 0.1]);
        assert_eq!(isotonic_nonincreasing(&[0.0, 1.0]), vec![0.5, 0.5]);
        assert!(isotonic_nonincreasing(&[]).is_empty());
    }
}
