//! Matrix generators and frame diagnostics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrixkit::{dot, DenseMatrix};
use crate::rng::counter_normal;

/// i.i.d. standard normal entries; entry `(i, j)` depends only on
/// `(seed, i * n + j)`.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("gaussian ensemble needs 1 <= m <= n, got {m}x{n}")));
    }
    let data = (0..(m * n) as u64).map(|idx| counter_normal(seed, idx)).collect();
    DenseMatrix::new(m, n, data)
}

/// The Mercedes-Benz frame: `n` unit vectors in `R^{n-1}` with pairwise
/// inner products `-1/(n-1)`.
///
/// Rows are the normalized Helmert vectors `e_1 + ... + e_j - j e_{j+1}`,
/// an orthonormal basis of the complement of the all-ones vector, so
/// `A 1 = 0`. Columns are then scaled to unit norm, giving
/// `A A^T = n/(n-1) I`.
pub fn mercedes_benz(n: usize) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::invalid("Mercedes-Benz frame needs n >= 2"));
    }
    let m = n - 1;
    let col_scale = (n as f64 / m as f64).sqrt();
    let mut a = DenseMatrix::zeros(m, n);
    for j in 1..n {
        let row = j - 1;
        let jf = j as f64;
        let norm = (jf * (jf + 1.0)).sqrt();
        for c in 0..j {
            a[(row, c)] = col_scale / norm;
        }
        a[(row, j)] = -jf * col_scale / norm;
    }
    Ok(a)
}

/// `[A 0; 0 alpha]`
pub fn block_extend(a: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::invalid("block extension needs a finite nonzero alpha"));
    }
    let (m, n) = (a.rows(), a.cols());
    let mut b = DenseMatrix::zeros(m + 1, n + 1);
    for i in 0..m {
        for j in 0..n {
            b[(i, j)] = a[(i, j)];
        }
    }
    b[(m, n)] = alpha;
    Ok(b)
}

/// Largest `|<a_i, a_j>| / (||a_i|| ||a_j||)` over distinct columns.
pub fn mutual_coherence(a: &DenseMatrix) -> Result<f64> {
    let cols: Vec<Vec<f64>> = (0..a.cols()).map(|j| a.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::invalid(format!("column {} is zero", j + 1)));
    }
    let mut mu = 0.0f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            mu = mu.max(dot(&cols[i], &cols[j]).abs() / (norms[i] * norms[j]));
        }
    }
    Ok(mu.min(1.0))
}

/// A matrix source as written on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleSpec {
    /// `gaussian:m=M,n=N,seed=S`
    Gaussian { m: usize, n: usize, seed: u64 },
    /// `mb:n=N`
    MercedesBenz { n: usize },
    /// `block:alpha=A`, applied to an existing matrix.
    BlockExtended { alpha: f64 },
}

impl EnsembleSpec {
    /// Builds the matrix. `base` is required for `BlockExtended` and
    /// ignored otherwise.
    pub fn build(&self, base: Option<&DenseMatrix>) -> Result<DenseMatrix> {
        match *self {
            EnsembleSpec::Gaussian { m, n, seed } => gaussian_matrix(m, n, seed),
            EnsembleSpec::MercedesBenz { n } => mercedes_benz(n),
            EnsembleSpec::BlockExtended { alpha } => {
                let base = base.ok_or_else(|| {
                    Error::invalid("block extension needs a base matrix")
                })?;
                block_extend(base, alpha)
            }
        }
    }

    pub fn needs_base(&self) -> bool {
        matches!(self, EnsembleSpec::BlockExtended { .. })
    }
}

impl FromStr for EnsembleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value in {kv:?}")))?;
            params.insert(k.trim(), v.trim());
        }
        let take = |key: &str| -> Result<&str> {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::invalid(format!("ensemble {kind:?} needs {key}=...")))
        };
        let int = |key: &str| -> Result<usize> {
            take(key)?
                .parse()
                .map_err(|e| Error::invalid(format!("bad {key}: {e}")))
        };
        let allowed: &[&str] = match kind {
            "gaussian" => &["m", "n", "seed"],
            "mb" => &["n"],
            "block" => &["alpha"],
            other => return Err(Error::invalid(format!("unknown ensemble {other:?}"))),
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(k)) {
            return Err(Error::invalid(format!("unknown parameter {extra:?} for {kind}")));
        }
        match kind {
            "gaussian" => Ok(EnsembleSpec::Gaussian {
                m: int("m")?,
                n: int("n")?,
                seed: params
                    .get("seed")
                    .map(|v| v.parse().map_err(|e| Error::invalid(format!("bad seed: {e}"))))
                    .transpose()?
                    .unwrap_or(0),
            }),
            "mb" => Ok(EnsembleSpec::MercedesBenz { n: int("n")? }),
            _ => Ok(EnsembleSpec::BlockExtended {
                alpha: take("alpha")?
                    .parse()
                    .map_err(|e| Error::invalid(format!("bad alpha: {e}")))?,
            }),
        }
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::Gaussian { m, n, seed } => write!(f, "gaussian:m={m},n={n},seed={seed}"),
            EnsembleSpec::MercedesBenz { n } => write!(f, "mb:n={n}"),
            EnsembleSpec::BlockExtended { alpha } => write!(f, "block:alpha={alpha}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixkit::qr_factor;

    #[test]
    fn gaussian_is_deterministic() {
        assert_eq!(gaussian_matrix(2, 3, 7).unwrap(), gaussian_matrix(2, 3, 7).unwrap());
        assert_ne!(gaussian_matrix(2, 3, 7).unwrap(), gaussian_matrix(2, 3, 8).unwrap());
        assert!(gaussian_matrix(3, 2, 0).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let a = gaussian_matrix(50, 100, 123).unwrap();
        let xs = a.as_slice();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / 5000f64.sqrt());
        assert!((var - 1.0).abs() < 0.15);
    }

    #[test]
    fn gaussian_square_full_rank() {
        for seed in 0..100 {
            let a = gaussian_matrix(4, 4, seed).unwrap();
            assert_eq!(qr_factor(&a).unwrap().numerical_rank(), 4, "seed {seed}");
        }
    }

    #[test]
    fn mercedes_frame_identities() {
        for n in 2..=9 {
            let a = mercedes_benz(n).unwrap();
            let ones = vec![1.0; n];
            assert!(a.mul_vec(&ones).iter().all(|v| v.abs() < 1e-10));
            let gram = a.transpose().matmul(&a).unwrap();
            for i in 0..n {
                assert!((gram[(i, i)] - 1.0).abs() < 1e-10);
                for j in 0..n {
                    if i != j {
                        assert!((gram[(i, j)] + 1.0 / (n - 1) as f64).abs() < 1e-10);
                    }
                }
            }
            let frame = a.matmul(&a.transpose()).unwrap();
            let scaled = DenseMatrix::identity(n - 1);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    let want = scaled[(i, j)] * n as f64 / (n - 1) as f64;
                    assert!((frame[(i, j)] - want).abs() < 1e-10);
                }
            }
        }
        assert!(mercedes_benz(1).is_err());
    }

    #[test]
    fn mercedes_three_is_a_planar_star() {
        let a = mercedes_benz(3).unwrap();
        let gram = a.transpose().matmul(&a).unwrap();
        assert!((gram[(0, 1)] + 0.5).abs() < 1e-12);
        assert!((gram[(1, 2)] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn block_extension_shapes() {
        let b = block_extend(&DenseMatrix::from_rows(&[&[1.0]]), 2.0).unwrap();
        assert_eq!(b, DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]));
        let a = mercedes_benz(3).unwrap();
        let bb = block_extend(&block_extend(&a, 1.0).unwrap(), -3.0).unwrap();
        assert_eq!((bb.rows(), bb.cols()), (4, 5));
        assert!(block_extend(&a, 0.0).is_err());
    }

    #[test]
    fn coherence_values() {
        assert_eq!(mutual_coherence(&DenseMatrix::identity(4)).unwrap(), 0.0);
        for n in 3..8 {
            let mu = mutual_coherence(&mercedes_benz(n).unwrap()).unwrap();
            assert!((mu - 1.0 / (n - 1) as f64).abs() < 1e-12);
        }
        let dup = DenseMatrix::from_rows(&[&[1.0, 2.0], &[1.0, 2.0]]);
        assert!((mutual_coherence(&dup).unwrap() - 1.0).abs() < 1e-15);
        assert!(mutual_coherence(&DenseMatrix::from_rows(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn spec_strings() {
        let g: EnsembleSpec = "gaussian:m=2,n=3,seed=7".parse().unwrap();
        assert_eq!(g, EnsembleSpec::Gaussian { m: 2, n: 3, seed: 7 });
        assert_eq!(g.to_string().parse::<EnsembleSpec>().unwrap(), g);
        assert_eq!("mb:n=5".parse::<EnsembleSpec>().unwrap(), EnsembleSpec::MercedesBenz { n: 5 });
        let b: EnsembleSpec = "block:alpha=-1.5".parse().unwrap();
        assert!(b.needs_base());
        assert!(b.build(None).is_err());
        assert!("mb:m=5".parse::<EnsembleSpec>().is_err());
        assert!("fourier:n=4".parse::<EnsembleSpec>().is_err());
        assert!("mb:n=x".parse::<EnsembleSpec>().is_err());
    }
}
