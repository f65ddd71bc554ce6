use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::curve::{binomial, ratio_to_f64, total_pairs, CountCurve};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `Xi(m, n, k) = 2^k C(n, k)` below the coherence threshold.
    CoherenceRegime,
    /// Full recoverability of all size-`k` pairs forces `k <= (m+1)/3`.
    DonohoNecessary,
    /// `Lambda(A, l) >= 2^l` for a regular cross-section.
    RegularSection,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::CoherenceRegime => "coherence-regime",
            BoundKind::DonohoNecessary => "necessary-full-recovery",
            BoundKind::RegularSection => "regular-section",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRecord {
    pub kind: BoundKind,
    pub value: Option<BigInt>,
    pub applicable: bool,
    pub reason: String,
}

/// `Lambda(A, n-1)` for the Mercedes-Benz frame with `n` vectors:
/// `((n+1)/2) C(n, (n-1)/2)` for odd `n`, zero for even `n`.
pub fn mb_lambda_maximal(n: usize) -> Result<BigUint> {
    if n < 3 {
        return Err(Error::invalid("needs n >= 3"));
    }
    if n.is_multiple_of(2) {
        return Ok(BigUint::zero());
    }
    Ok(BigUint::from(n.div_ceil(2)) * binomial(n, (n - 1) / 2))
}

/// `Xi(n-1, n, n-1) = (n - floor(n/2)) C(n, floor(n/2))`.
pub fn xi_maximal(n: usize) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::invalid("needs n >= 2"));
    }
    Ok(BigUint::from(n - n / 2) * binomial(n, n / 2))
}

/// `Xi(m, n, k) = 2^k C(n, k)` whenever `k < (1 + sqrt(m(n-1)/(n-m))) / 2`.
/// The comparison is done in integers.
pub fn xi_coherence_regime(m: usize, n: usize, k: usize) -> BoundRecord {
    let kind = BoundKind::CoherenceRegime;
    if m == 0 || m >= n {
        return BoundRecord { kind, value: None, applicable: false, reason: "needs 0 < m < n".into() };
    }
    let lhs = if k == 0 {
        BigUint::zero()
    } else {
        BigUint::from((2 * k - 1) * (2 * k - 1)) * BigUint::from(n - m)
    };
    let rhs = BigUint::from(m) * BigUint::from(n - 1);
    let threshold = 0.5 * (1.0 + (m as f64 * (n - 1) as f64 / (n - m) as f64).sqrt());
    if k >= 1 && lhs < rhs {
        BoundRecord {
            kind,
            value: Some(BigInt::from(total_pairs(n, k))),
            applicable: true,
            reason: format!("k = {k} < {threshold:.6}"),
        }
    } else {
        BoundRecord { kind, value: None, applicable: false, reason: format!("k = {k} >= {threshold:.6}") }
    }
}

/// `min{2^k C(n,k), ceil(2^{k+1-n} C(n-1,k) (n - floor(n/2)) C(n, floor(n/2)))}`.
pub fn heuristic_xi_bound(n: usize, k: usize) -> Result<BigUint> {
    if k == 0 || k + 1 > n {
        return Err(Error::invalid(format!("needs 1 <= k <= n-1, got k = {k}, n = {n}")));
    }
    let first = total_pairs(n, k);
    let numer = BigInt::from(binomial(n - 1, k) * xi_maximal(n)?) << (k + 1);
    let denom = BigInt::one() << n;
    let second = BigRational::new(numer, denom).ceil().to_integer();
    let second = second.to_biguint().expect("nonnegative");
    Ok(first.min(second))
}

/// `Xi(m, n, m-1) = (m/2) Xi(m, n, m)`.
pub fn xi_size_m_minus_1(m: usize, n: usize, xi_m: &BigUint) -> Result<BigUint> {
    if m < 2 || m > n {
        return Err(Error::invalid(format!("needs 2 <= m <= n, got m = {m}, n = {n}")));
    }
    let twice = BigUint::from(m) * xi_m;
    if twice.is_odd() {
        return Err(Error::Data(format!("(m/2) * {xi_m} is not an integer for m = {m}")));
    }
    Ok(twice >> 1)
}

/// `Lambda(A, l-1) = (l/2) Lambda(A, l)`, valid when `Lambda(A, l) > 0`
/// and `l` is the rank of `A`.
pub fn lambda_size_l_minus_1(l: usize, lambda_l: &BigUint) -> Result<BigUint> {
    if lambda_l.is_zero() {
        return Err(Error::invalid("identity needs Lambda(A, l) > 0"));
    }
    if l < 2 {
        return Err(Error::invalid("needs l >= 2"));
    }
    let twice = BigUint::from(l) * lambda_l;
    if twice.is_odd() {
        return Err(Error::Data(format!("(l/2) * {lambda_l} is not an integer for l = {l}")));
    }
    Ok(twice >> 1)
}

/// `lambda = k Lambda(A,k) / Lambda(A,k-1)` from an exhaustive curve,
/// checked against `0 < lambda <= 2(n-k+1)` when `Lambda(A,k) > 0`.
/// `Lambda(A, 0)` is 1.
pub fn adjacency_ratio(curve: &CountCurve, k: usize) -> Result<f64> {
    let current = curve
        .counts
        .get(&k)
        .ok_or_else(|| Error::invalid(format!("curve has no count for k = {k}")))?;
    let previous = if k == 1 {
        BigUint::one()
    } else {
        curve
            .counts
            .get(&(k - 1))
            .cloned()
            .ok_or_else(|| Error::invalid(format!("curve has no count for k = {}", k - 1)))?
    };
    if previous.is_zero() {
        return Err(Error::invalid(format!("Lambda(A, {}) is zero", k - 1)));
    }
    let lambda = BigRational::new(
        BigInt::from(BigUint::from(k) * current),
        BigInt::from(previous),
    );
    if !current.is_zero() {
        let cap = BigRational::from_integer(BigInt::from(2 * (curve.n + 1 - k)));
        if lambda > cap || lambda <= BigRational::zero() {
            return Err(Error::Data(format!(
                "adjacency ratio {lambda} outside (0, {cap}] at k = {k}"
            )));
        }
    }
    Ok(ratio_to_f64(&lambda))
}

/// `(l-1) Lambda(A,1) - (l+1)(l-2)`; negative values are vacuous.
pub fn lower_bound_simple(l: usize, lambda_1: &BigUint) -> BigInt {
    let l = l as i64;
    BigInt::from(l - 1) * BigInt::from(lambda_1.clone()) - BigInt::from((l + 1) * (l - 2))
}

/// `floor((m+1)/3)`, applicable for `2 < m <= n-2`.
pub fn donoho_necessary_bound(m: usize, n: usize) -> BoundRecord {
    let applicable = m > 2 && m + 2 <= n;
    BoundRecord {
        kind: BoundKind::DonohoNecessary,
        value: Some(BigInt::from((m + 1) / 3)),
        applicable,
        reason: if applicable {
            format!("2 < m = {m} <= n - 2 = {}", n as i64 - 2)
        } else {
            format!("needs 2 < m <= n - 2, got m = {m}, n = {n}")
        },
    }
}

/// `2^l`. Valid only if the cross-section is regular, which is not checked.
pub fn regular_section_lower_bound(l: usize) -> BoundRecord {
    BoundRecord {
        kind: BoundKind::RegularSection,
        value: Some(BigInt::one() << l),
        applicable: true,
        reason: "assumes a regular cross-section (not checked)".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn mercedes_values() {
        assert_eq!(mb_lambda_maximal(5).unwrap(), u(30));
        assert_eq!(mb_lambda_maximal(3).unwrap(), u(6));
        assert_eq!(mb_lambda_maximal(4).unwrap(), u(0));
        assert!(mb_lambda_maximal(2).is_err());
    }

    #[test]
    fn xi_values() {
        assert_eq!(xi_maximal(5).unwrap(), u(30));
        assert_eq!(xi_maximal(4).unwrap(), u(12));
        assert_eq!(xi_maximal(2).unwrap(), u(2));
    }

    #[test]
    fn coherence_regime() {
        let r = xi_coherence_regime(4, 5, 2);
        assert!(r.applicable);
        assert_eq!(r.value, Some(BigInt::from(40)));
        assert!(!xi_coherence_regime(4, 5, 3).applicable);
        // At n = 2 the threshold is exactly 1.
        assert!(!xi_coherence_regime(1, 2, 1).applicable);
        for n in 3..30 {
            let r = xi_coherence_regime(n - 1, n, 1);
            assert!(r.applicable);
            assert_eq!(r.value, Some(BigInt::from(2 * n)));
        }
        assert!(!xi_coherence_regime(5, 5, 1).applicable);
    }

    #[test]
    fn heuristic() {
        assert_eq!(heuristic_xi_bound(5, 3).unwrap(), u(60));
        assert_eq!(heuristic_xi_bound(5, 4).unwrap(), u(30));
        assert_eq!(heuristic_xi_bound(5, 1).unwrap(), u(10));
        for n in 2..12 {
            assert_eq!(heuristic_xi_bound(n, n - 1).unwrap(), xi_maximal(n).unwrap());
        }
        assert!(heuristic_xi_bound(5, 5).is_err());
        assert!(heuristic_xi_bound(5, 0).is_err());
    }

    #[test]
    fn neighbour_identities() {
        assert_eq!(xi_size_m_minus_1(4, 5, &u(30)).unwrap(), u(60));
        assert_eq!(xi_size_m_minus_1(2, 3, &u(6)).unwrap(), u(6));
        assert!(matches!(xi_size_m_minus_1(3, 5, &u(7)), Err(Error::Data(_))));
        assert_eq!(lambda_size_l_minus_1(4, &u(30)).unwrap(), u(60));
        assert_eq!(lambda_size_l_minus_1(2, &u(6)).unwrap(), u(6));
        assert!(lambda_size_l_minus_1(3, &u(0)).is_err());
    }

    #[test]
    fn adjacency() {
        let mut c = CountCurve::empty(2, 3, 2);
        c.counts.insert(1, u(6));
        c.counts.insert(2, u(6));
        assert_eq!(adjacency_ratio(&c, 2).unwrap(), 2.0);
        let mut id = CountCurve::empty(4, 4, 4);
        for k in 1..=4 {
            id.counts.insert(k, total_pairs(4, k));
        }
        assert_eq!(adjacency_ratio(&id, 3).unwrap(), 4.0);
        assert_eq!(adjacency_ratio(&id, 1).unwrap(), 8.0);
        c.counts.insert(2, u(0));
        assert_eq!(adjacency_ratio(&c, 2).unwrap(), 0.0);
        c.counts.insert(2, u(10));
        assert!((adjacency_ratio(&c, 2).unwrap() - 10.0 / 3.0).abs() < 1e-15);
        c.counts.insert(2, u(14));
        assert!(matches!(adjacency_ratio(&c, 2), Err(Error::Data(_))));
    }

    #[test]
    fn simple_bounds() {
        assert_eq!(lower_bound_simple(4, &u(10)), BigInt::from(20));
        assert_eq!(lower_bound_simple(2, &u(6)), BigInt::from(6));
        assert_eq!(lower_bound_simple(2, &u(0)), BigInt::from(0));
        let d = donoho_necessary_bound(4, 8);
        assert!(d.applicable);
        assert_eq!(d.value, Some(BigInt::from(1)));
        assert_eq!(donoho_necessary_bound(8, 16).value, Some(BigInt::from(3)));
        assert!(!donoho_necessary_bound(2, 4).applicable);
        assert_eq!(regular_section_lower_bound(4).value, Some(BigInt::from(16)));
        assert_eq!(regular_section_lower_bound(1).value, Some(BigInt::from(2)));
    }
}
