use std::fs;
use std::path::PathBuf;

use log::info;
use num_bigint::BigUint;
use rayon::prelude::*;

use super::curve::{total_pairs, CountCurve};
use crate::certify::{Decision, PreparedSupport};
use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::matrixkit::DenseMatrix;
use crate::rng::derive_seed;

pub const DEFAULT_GUARD: usize = 12;

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub numeric: NumericConfig,
    /// Largest `n` enumerated without `allow_large`.
    pub guard: usize,
    pub allow_large: bool,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Pairs between checkpoints.
    pub checkpoint_every: u64,
    /// Progress file. If it exists and matches the run, enumeration resumes
    /// from it; it is removed on completion.
    pub checkpoint: Option<PathBuf>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            numeric: NumericConfig::default(),
            guard: DEFAULT_GUARD,
            allow_large: false,
            workers: 0,
            checkpoint_every: 100_000,
            checkpoint: None,
        }
    }
}

/// Visits the `k`-subsets of `0..n` in colexicographic order.
struct Colex {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Colex {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            cur: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Colex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let c = self.cur.as_mut().expect("checked above");
        let k = c.len();
        let mut j = 0;
        while j < k && ((j + 1 < k && c[j] + 1 == c[j + 1]) || (j + 1 == k && c[j] + 1 == self.n)) {
            j += 1;
        }
        if j == k {
            self.cur = None;
        } else {
            c[j] += 1;
            for (i, v) in c.iter_mut().enumerate().take(j) {
                *v = i;
            }
        }
        Some(out)
    }
}

/// Counts recoverable pairs of one index set over all `2^k` sign patterns.
/// Pattern `b` gives index `i` the sign `-1` when bit `i` of `b` is set.
fn count_support(a: &DenseMatrix, idx: &[usize], cfg: &NumericConfig) -> Result<(u64, u64)> {
    let prep = PreparedSupport::new(a, idx, cfg)?;
    if !prep.is_full_rank() {
        return Ok((0, 0));
    }
    let k = idx.len();
    let (mut yes, mut unknown) = (0u64, 0u64);
    for b in 0u64..(1u64 << k) {
        let s: Vec<f64> = (0..k).map(|i| if b >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        match prep.certify(&s, cfg)?.decision {
            Decision::Recoverable => yes += 1,
            Decision::Undecided => unknown += 1,
            Decision::NotRecoverable => {}
        }
    }
    Ok((yes, unknown))
}

fn fingerprint(a: &DenseMatrix) -> u64 {
    let mut path = vec![a.rows() as u64, a.cols() as u64];
    path.extend(a.as_slice().iter().map(|v| v.to_bits()));
    derive_seed(0x6365_6e73_7573, &path)
}

struct Progress {
    k: usize,
    offset: usize,
    curve: CountCurve,
}

fn write_checkpoint(path: &PathBuf, fp: u64, k_max: usize, p: &Progress) -> Result<()> {
    let counts: Vec<String> = (1..=k_max).map(|k| p.curve.counts[&k].to_string()).collect();
    let text = format!(
        "census-checkpoint 1\n{} {} {} {:016x}\n{} {}\n{}\n{}\n",
        p.curve.m,
        p.curve.n,
        k_max,
        fp,
        p.k,
        p.offset,
        p.curve.undecided,
        counts.join(" ")
    );
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_checkpoint(path: &PathBuf, a: &DenseMatrix, fp: u64, k_max: usize) -> Result<Option<Progress>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let bad = |line: usize, msg: &str| Error::Parse { line, message: msg.to_string() };
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 5 || lines[0] != "census-checkpoint 1" {
        return Err(bad(1, "not a census checkpoint"));
    }
    let head: Vec<&str> = lines[1].split_whitespace().collect();
    let same = head.len() == 4
        && head[0] == a.rows().to_string()
        && head[1] == a.cols().to_string()
        && head[2] == k_max.to_string()
        && head[3] == format!("{fp:016x}");
    if !same {
        return Err(Error::Data(format!(
            "checkpoint {} belongs to a different matrix or size range",
            path.display()
        )));
    }
    let pos: Vec<usize> = lines[2]
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(3, "bad position")))
        .collect::<Result<_>>()?;
    if pos.len() != 2 {
        return Err(bad(3, "expected `k offset`"));
    }
    let mut curve = CountCurve::empty(a.rows(), a.cols(), k_max);
    curve.undecided = lines[3].trim().parse().map_err(|_| bad(4, "bad undecided count"))?;
    let counts: Vec<BigUint> = lines[4]
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(5, "bad count")))
        .collect::<Result<_>>()?;
    if counts.len() != k_max {
        return Err(bad(5, "wrong number of counts"));
    }
    for (k, c) in (1..=k_max).zip(counts) {
        curve.counts.insert(k, c);
    }
    Ok(Some(Progress {
        k: pos[0],
        offset: pos[1],
        curve,
    }))
}

/// Exhaustively counts the recoverable pairs `(I, s)` with `1 <= |I| <= k_max`.
///
/// Index sets are visited in colexicographic order and sign patterns in
/// binary order. Work is split into batches of whole index sets; each batch
/// is evaluated in parallel and merged by summation, so the counts do not
/// depend on the number of workers.
pub fn enumerate_lambda(a: &DenseMatrix, k_max: usize, opts: &CensusOptions) -> Result<CountCurve> {
    let n = a.cols();
    if k_max > n {
        return Err(Error::invalid(format!("k_max = {k_max} exceeds n = {n}")));
    }
    if n > opts.guard && !opts.allow_large {
        let pairs: u128 = (1..=k_max)
            .map(|k| u128::try_from(total_pairs(n, k)).unwrap_or(u128::MAX))
            .fold(0u128, |acc, p| acc.saturating_add(p));
        return Err(Error::GuardExceeded { n, guard: opts.guard, pairs });
    }
    let run = || -> Result<CountCurve> {
        let fp = fingerprint(a);
        let mut progress = match &opts.checkpoint {
            Some(path) => read_checkpoint(path, a, fp, k_max)?,
            None => None,
        }
        .unwrap_or_else(|| Progress {
            k: 1,
            offset: 0,
            curve: CountCurve::empty(a.rows(), n, k_max),
        });
        if progress.offset > 0 || progress.k > 1 {
            info!("resuming census at k = {}, index set {}", progress.k, progress.offset);
        }
        for k in progress.k..=k_max {
            let supports: Vec<Vec<usize>> = Colex::new(n, k).collect();
            let per_batch = ((opts.checkpoint_every.max(1) >> k.min(63)) as usize).max(1);
            let start = if k == progress.k { progress.offset } else { 0 };
            let mut pos = start;
            while pos < supports.len() {
                let end = (pos + per_batch).min(supports.len());
                let (yes, unknown) = supports[pos..end]
                    .par_iter()
                    .map(|idx| count_support(a, idx, &opts.numeric))
                    .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
                *progress.curve.counts.get_mut(&k).expect("size in range") += yes;
                progress.curve.undecided += unknown;
                pos = end;
                progress.k = k;
                progress.offset = pos;
                if let Some(path) = &opts.checkpoint {
                    write_checkpoint(path, fp, k_max, &progress)?;
                }
            }
        }
        if let Some(path) = &opts.checkpoint {
            if path.exists() {
                fs::remove_file(path)?;
            }
        }
        Ok(progress.curve)
    };
    if opts.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::mercedes_benz;

    #[test]
    fn colex_order() {
        let sets: Vec<Vec<usize>> = Colex::new(4, 2).collect();
        assert_eq!(
            sets,
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(Colex::new(5, 3).count(), 10);
        assert_eq!(Colex::new(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(Colex::new(2, 3).count(), 0);
    }

    #[test]
    fn identity_counts_everything() {
        let c = enumerate_lambda(&DenseMatrix::identity(4), 4, &CensusOptions::default()).unwrap();
        for k in 1..=4 {
            assert_eq!(c.counts[&k], total_pairs(4, k));
        }
    }

    #[test]
    fn mercedes_three() {
        let c = enumerate_lambda(&mercedes_benz(3).unwrap(), 2, &CensusOptions::default()).unwrap();
        assert_eq!(c.counts[&1], BigUint::from(6u8));
        assert_eq!(c.counts[&2], BigUint::from(6u8));
    }

    #[test]
    fn guard_refuses_large() {
        let a = DenseMatrix::zeros(2, 13);
        match enumerate_lambda(&a, 2, &CensusOptions::default()) {
            Err(Error::GuardExceeded { n: 13, guard: 12, pairs }) => assert_eq!(pairs, 26 + 312),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn resumes_from_checkpoint() {
        let dir = std::env::temp_dir().join(format!("recsup-ckpt-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mb5.ckpt");
        let a = mercedes_benz(5).unwrap();
        let full = enumerate_lambda(&a, 4, &CensusOptions::default()).unwrap();

        // A checkpoint part way through size 3, with counts taken from a
        // run that stopped there.
        let mut partial = CountCurve::empty(4, 5, 4);
        let supports: Vec<Vec<usize>> = Colex::new(5, 3).take(4).collect();
        let cfg = NumericConfig::default();
        for k in 1..=2 {
            partial.counts.insert(k, full.counts[&k].clone());
        }
        let head: u64 = supports.iter().map(|s| count_support(&a, s, &cfg).unwrap().0).sum();
        partial.counts.insert(3, BigUint::from(head));
        let progress = Progress { k: 3, offset: 4, curve: partial };
        write_checkpoint(&path, fingerprint(&a), 4, &progress).unwrap();

        let opts = CensusOptions {
            checkpoint: Some(path.clone()),
            checkpoint_every: 7,
            workers: 2,
            ..Default::default()
        };
        let resumed = enumerate_lambda(&a, 4, &opts).unwrap();
        assert_eq!(resumed, full);
        assert!(!path.exists());

        write_checkpoint(&path, fingerprint(&a) ^ 1, 4, &progress).unwrap();
        assert!(matches!(enumerate_lambda(&a, 4, &opts), Err(Error::Data(_))));
        fs::remove_dir_all(&dir).unwrap();
    }
}
