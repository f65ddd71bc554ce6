use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `C(n, k)`, zero for `k > n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `2^k C(n, k)`, the number of pairs `(I, s)` with `|I| = k`.
pub fn total_pairs(n: usize, k: usize) -> BigUint {
    binomial(n, k) << k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveSource {
    Exhaustive,
    Formula,
}

/// Counts `Lambda(A, k)` per support size together with `2^k C(n, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountCurve {
    pub m: usize,
    pub n: usize,
    pub counts: BTreeMap<usize, BigUint>,
    pub totals: BTreeMap<usize, BigUint>,
    pub source: CurveSource,
    /// Pairs whose LP ended without a verdict; not included in `counts`.
    pub undecided: u64,
}

impl CountCurve {
    /// An all-zero exhaustive curve for sizes `1..=k_max`.
    pub fn empty(m: usize, n: usize, k_max: usize) -> Self {
        Self {
            m,
            n,
            counts: (1..=k_max).map(|k| (k, BigUint::zero())).collect(),
            totals: (1..=k_max).map(|k| (k, total_pairs(n, k))).collect(),
            source: CurveSource::Exhaustive,
            undecided: 0,
        }
    }

    pub fn count(&self, k: usize) -> Option<&BigUint> {
        self.counts.get(&k)
    }

    /// `counts[k] / totals[k]`, exactly.
    pub fn ratio(&self, k: usize) -> Option<BigRational> {
        let c = self.counts.get(&k)?;
        let t = self.totals.get(&k)?;
        if t.is_zero() {
            return None;
        }
        Some(BigRational::new(BigInt::from(c.clone()), BigInt::from(t.clone())))
    }

    pub fn ratio_f64(&self, k: usize) -> Option<f64> {
        self.ratio(k).map(|r| ratio_to_f64(&r))
    }

    pub fn all_even(&self) -> bool {
        self.counts.values().all(|c| c.is_even())
    }

    pub fn within_totals(&self) -> bool {
        self.counts.iter().all(|(k, c)| self.totals.get(k).is_some_and(|t| c <= t))
    }

    /// Normalized counts never increase with `k`, compared exactly.
    pub fn normalized_nonincreasing(&self) -> bool {
        let ratios: Vec<BigRational> = self.counts.keys().filter_map(|&k| self.ratio(k)).collect();
        ratios.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV with header `k,count,total,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count,total,ratio\n");
        for (k, c) in &self.counts {
            let t = &self.totals[k];
            let ratio = self.ratio(*k).map(|r| format_ratio(&r)).unwrap_or_else(|| "nan".into());
            writeln!(out, "{k},{c},{t},{ratio}").expect("write to string");
        }
        out
    }

    /// Reads the CSV written by [`CountCurve::to_csv`]; `m` is not stored
    /// in the file and is taken from the caller.
    pub fn from_csv(text: &str, m: usize, n: usize) -> Result<Self> {
        let mut curve = CountCurve::empty(m, n, 0);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if lineno == 0 {
                if line != "k,count,total,ratio" {
                    return Err(Error::Parse { line: 1, message: format!("unexpected header {line:?}") });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: lineno + 1, message: msg.to_string() };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let k: usize = fields[0].parse().map_err(|_| bad("bad k"))?;
            let c: BigUint = fields[1].parse().map_err(|_| bad("bad count"))?;
            let t: BigUint = fields[2].parse().map_err(|_| bad("bad total"))?;
            if t != total_pairs(n, k) {
                return Err(bad("total does not match 2^k C(n,k)"));
            }
            curve.counts.insert(k, c);
            curve.totals.insert(k, t);
        }
        Ok(curve)
    }
}

/// Exact decimal when the denominator has no prime factors besides 2 and
/// 5, otherwise rounded to 17 decimal places.
pub(crate) fn format_ratio(r: &BigRational) -> String {
    let mut den = r.denom().abs().to_biguint().expect("nonnegative");
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigUint::from(2u8);
    let five = BigUint::from(5u8);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    let places = if den.is_one() { twos.max(fives) } else { 17 };
    let scale = BigInt::from(10u8).pow(places);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2u8))).floor().to_integer();
    let neg = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let places = places as usize;
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        format!("{int}.{frac}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
