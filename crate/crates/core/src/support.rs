use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// An index set `I` with a sign pattern `s` on it.
///
/// Indices are 0-based and strictly ascending. The text format, like the
/// rest of the user-facing surface, is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportPair {
    indices: Vec<usize>,
    signs: Vec<Sign>,
}

impl SupportPair {
    pub fn new(indices: Vec<usize>, signs: Vec<Sign>) -> Result<Self> {
        if indices.len() != signs.len() {
            return Err(Error::invalid(format!(
                "{} indices but {} signs",
                indices.len(),
                signs.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("support indices must be strictly ascending"));
        }
        Ok(Self { indices, signs })
    }

    /// Builds a pair from unsorted `(index, sign)` entries.
    pub fn from_entries(mut entries: Vec<(usize, Sign)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let (indices, signs) = entries.into_iter().unzip();
        Self::new(indices, signs)
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            signs: Vec::new(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn sign_values(&self) -> Vec<f64> {
        self.signs.iter().map(|s| s.value()).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn sign_of(&self, j: usize) -> Option<Sign> {
        self.indices.binary_search(&j).ok().map(|p| self.signs[p])
    }

    /// The same support with every sign flipped.
    pub fn negated(&self) -> Self {
        Self {
            indices: self.indices.clone(),
            signs: self.signs.iter().map(|s| s.flip()).collect(),
        }
    }

    /// Indices in `0..n` not in the support, ascending.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.indices.iter().peekable();
        for j in 0..n {
            if it.peek() == Some(&&j) {
                it.next();
            } else {
                out.push(j);
            }
        }
        out
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= n => Err(Error::invalid(format!(
                "support index {} exceeds matrix width {n}",
                last + 1
            ))),
            _ => Ok(()),
        }
    }

    pub fn without(&self, j: usize) -> Option<Self> {
        let pos = self.indices.binary_search(&j).ok()?;
        let mut out = self.clone();
        out.indices.remove(pos);
        out.signs.remove(pos);
        Some(out)
    }

    /// Parses `k`, then 1-based indices, then `+1`/`-1` tokens, one group
    /// per line.
    pub fn parse_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .collect();
        let (kline, ktxt) = lines
            .iter()
            .find(|(_, l)| !l.is_empty())
            .copied()
            .ok_or(Error::Parse {
                line: 1,
                message: "missing support size".into(),
            })?;
        let k: usize = ktxt.parse().map_err(|e| Error::Parse {
            line: kline,
            message: format!("bad support size {ktxt:?}: {e}"),
        })?;
        let get = |offset: usize| -> (usize, &str) {
            lines
                .get(kline - 1 + offset)
                .copied()
                .unwrap_or((kline + offset, ""))
        };
        let (iline, itxt) = get(1);
        let (sline, stxt) = get(2);
        let indices = itxt
            .split_whitespace()
            .map(|t| match t.parse::<usize>() {
                Ok(0) | Err(_) => Err(Error::Parse {
                    line: iline,
                    message: format!("bad 1-based index {t:?}"),
                }),
                Ok(v) => Ok(v - 1),
            })
            .collect::<Result<Vec<_>>>()?;
        let signs = stxt
            .split_whitespace()
            .map(|t| match t {
                "+1" | "1" => Ok(Sign::Plus),
                "-1" | "\u{2212}1" => Ok(Sign::Minus),
                _ => Err(Error::Parse {
                    line: sline,
                    message: format!("bad sign {t:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if indices.len() != k || signs.len() != k {
            return Err(Error::Parse {
                line: kline,
                message: format!(
                    "declared size {k}, found {} indices and {} signs",
                    indices.len(),
                    signs.len()
                ),
            });
        }
        Self::new(indices, signs)
    }

    pub fn to_text(&self) -> String {
        format!("{}\n{}\n{}\n", self.len(), self.index_line(), self.sign_line())
    }

    fn index_line(&self) -> String {
        self.indices
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn sign_line(&self) -> String {
        self.signs
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for SupportPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I = {{{}}}, s = ({})", self.index_line(), self.sign_line())
    }
}
