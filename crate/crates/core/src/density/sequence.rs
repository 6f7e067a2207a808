use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// `s_n = q^n`.
    Geometric { q: u64 },
    /// `s_n = q^(q^n)`.
    DoubleExponential { q: u64 },
    Explicit,
}

/// A strictly increasing sequence `s_first, ..., s_last`. Terms that do not
/// fit in a `u64` are known only through their logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    kind: SequenceKind,
    first: u32,
    last: u32,
    terms: Vec<u64>,
}

impl Sequence {
    /// `q^1, ..., q^kmax`.
    pub fn geometric(q: u64, kmax: u32) -> Result<Self> {
        if q < 2 || kmax == 0 {
            return Err(Error::invalid("geometric sequences need q >= 2 and kmax >= 1"));
        }
        let terms = (1..=kmax).map_while(|n| q.checked_pow(n)).collect();
        Ok(Sequence { kind: SequenceKind::Geometric { q }, first: 1, last: kmax, terms })
    }

    /// `q^(q^1), ..., q^(q^kmax)`.
    pub fn double_exponential(q: u64, kmax: u32) -> Result<Self> {
        if q < 2 || kmax == 0 {
            return Err(Error::invalid("double exponential sequences need q >= 2 and kmax >= 1"));
        }
        let terms = (1..=kmax)
            .map_while(|n| q.checked_pow(n).and_then(|e| u32::try_from(e).ok()).and_then(|e| q.checked_pow(e)))
            .collect();
        Ok(Sequence { kind: SequenceKind::DoubleExponential { q }, first: 1, last: kmax, terms })
    }

    /// `terms[0]` is `s_1`.
    pub fn explicit(terms: Vec<u64>) -> Result<Self> {
        if terms.is_empty() || terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("explicit sequences must be nonempty and strictly increasing"));
        }
        let last = u32::try_from(terms.len()).map_err(|_| Error::invalid("sequence too long"))?;
        Ok(Sequence { kind: SequenceKind::Explicit, first: 1, last, terms })
    }

    /// Drops the terms before index `n`, keeping the numbering.
    pub fn from_index(mut self, n: u32) -> Self {
        let drop = (n.saturating_sub(self.first) as usize).min(self.terms.len());
        self.terms.drain(..drop);
        self.first = self.first.max(n);
        self
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn first_index(&self) -> u32 {
        self.first
    }

    pub fn last_index(&self) -> u32 {
        self.last
    }

    /// The terms that fit in a `u64`, starting at the first index.
    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn term(&self, n: u32) -> Option<u64> {
        let i = n.checked_sub(self.first)? as usize;
        self.terms.get(i).copied()
    }

    pub fn indexed(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        (self.first..).zip(self.terms.iter().copied())
    }

    /// `ln s_n` for any index in range, including terms too large to store.
    pub fn ln_term(&self, n: u32) -> Result<f64> {
        if n < self.first || n > self.last {
            return Err(Error::invalid(format!("index {n} outside {}..={}", self.first, self.last)));
        }
        Ok(match self.kind {
            SequenceKind::Geometric { q } => n as f64 * (q as f64).ln(),
            SequenceKind::DoubleExponential { q } => (q as f64).powi(n as i32) * (q as f64).ln(),
            SequenceKind::Explicit => (self.term(n).expect("explicit terms are stored") as f64).ln(),
        })
    }

    /// Whether the last term is larger than `x`.
    pub fn exceeds(&self, x: u64) -> bool {
        match self.term(self.last) {
            Some(t) => t > x,
            None => true,
        }
    }

    pub fn description(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SequenceKind::Geometric { q } => write!(f, "geometric:{q}:{}", self.last),
            SequenceKind::DoubleExponential { q } => write!(f, "doubleexp:{q}:{}", self.last),
            SequenceKind::Explicit => {
                let list: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
                write!(f, "list:{}", list.join(","))
            }
        }
    }
}

impl FromStr for Sequence {
    type Err = Error;

    /// `geometric:q:kmax`, `doubleexp:q:kmax` or `list:a,b,c`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad sequence `{s}`, expected geometric:q:kmax, doubleexp:q:kmax or list:a,b,..."));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        if kind == "list" {
            let terms = rest
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Sequence::explicit(terms);
        }
        let (q, kmax) = rest.split_once(':').ok_or_else(bad)?;
        let q: u64 = q.parse().map_err(|_| bad())?;
        let kmax: u32 = kmax.parse().map_err(|_| bad())?;
        match kind {
            "geometric" => Sequence::geometric(q, kmax),
            "doubleexp" => Sequence::double_exponential(q, kmax),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn materialized_terms() {
        let g = Sequence::geometric(19, 5).unwrap();
        assert_eq!(g.terms(), &[19, 361, 6859, 130_321, 2_476_099]);
        assert_eq!(g.term(3), Some(6859));
        let d = Sequence::double_exponential(7, 3).unwrap();
        assert_eq!(d.terms(), &[823_543]);
        assert!(d.term(2).is_none());
        assert!((d.ln_term(2).unwrap() - 49.0 * 7f64.ln()).abs() < 1e-9);
        assert!(d.exceeds(u64::MAX));
        let two = Sequence::double_exponential(2, 6).unwrap();
        assert_eq!(two.terms(), &[4, 16, 256, 65_536, 1 << 32]);
    }

    #[test]
    fn parse_and_print() {
        for text in ["geometric:19:4", "doubleexp:7:3", "list:1,5,9"] {
            assert_eq!(text.parse::<Sequence>().unwrap().to_string(), text);
        }
        assert!("geometric:1:4".parse::<Sequence>().is_err());
        assert!("list:3,2".parse::<Sequence>().is_err());
        assert!("fib:1:2".parse::<Sequence>().is_err());
    }

    #[test]
    fn reindexing_keeps_numbers() {
        let g = Sequence::geometric(3, 6).unwrap().from_index(3);
        assert_eq!(g.indexed().next(), Some((3, 27)));
        assert_eq!(g.term(2), None);
        assert_eq!(g.terms().len(), 4);
    }
}
