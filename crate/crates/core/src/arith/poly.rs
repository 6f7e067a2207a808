use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Univariate polynomial over the integers, lowest degree coefficient first.
///
/// The zero polynomial has no coefficients; otherwise the last coefficient
/// is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPolynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `x - a`
    pub fn linear_root(a: i64) -> Self {
        Self::from_i64s(&[-a, 1])
    }

    /// `x^n - 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut p = Self::monomial(BigInt::one(), n);
        p.coeffs[0] -= 1;
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Coefficients reduced into `0..p`.
    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        let m = BigInt::from(p);
        let mut out: Vec<u64> = self
            .coeffs
            .iter()
            .map(|c| c.mod_floor(&m).to_u64().expect("residue fits in u64"))
            .collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }

    /// Composition `self(other)`.
    pub fn compose(&self, other: &IntPolynomial) -> Self {
        self.coeffs.iter().rev().fold(Self::zero(), |acc, c| {
            &(&acc * other) + &Self::constant(c.clone())
        })
    }

    /// Exact quotient `self / divisor`; fails if the division leaves a
    /// remainder or a non-integral coefficient.
    pub fn div_exact(&self, divisor: &IntPolynomial) -> Result<Self> {
        let (q, r) = self.div_rem_integral(divisor)?;
        if !r.is_zero() {
            return Err(Error::invalid("polynomial division is not exact"));
        }
        Ok(q)
    }

    /// Long division that only succeeds while every quotient coefficient is
    /// an integer.
    fn div_rem_integral(&self, divisor: &IntPolynomial) -> Result<(Self, Self)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::invalid("division by the zero polynomial"))?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigInt::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(&lead);
            if !r.is_zero() {
                return Err(Error::invalid("polynomial division is not integral"));
            }
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &q * c;
            }
            quot[k] = q;
        }
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
    pub fn pseudo_rem(&self, b: &IntPolynomial) -> Result<Self> {
        let db = b
            .degree()
            .ok_or_else(|| Error::invalid("pseudo-remainder by zero polynomial"))?;
        let Some(da) = self.degree() else {
            return Ok(Self::zero());
        };
        if da < db {
            return Ok(self.clone());
        }
        let lead = b.leading();
        let mut rem = self.coeffs.clone();
        for k in (0..=da - db).rev() {
            let top = rem[k + db].clone();
            for c in rem.iter_mut() {
                *c *= &lead;
            }
            for (i, c) in b.coeffs.iter().enumerate() {
                rem[k + i] -= &top * c;
            }
        }
        Ok(Self::new(rem))
    }

    /// Largest absolute value of a coefficient.
    pub fn height(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Prints `c0 + c1*x + c2*x^2 + ...`, omitting zero terms.
impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    /// Accepts sums of terms `c`, `c*x`, `c*x^k`, `x^k`, `-x`, ... with
    /// arbitrary whitespace; repeated powers accumulate.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::invalid("empty polynomial text"));
        }
        let bad = |msg: &str| Error::invalid(format!("cannot parse polynomial `{s}`: {msg}"));
        let bytes = text.as_bytes();
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut pos = 0;
        let mut first = true;
        while pos < bytes.len() {
            // Separator and signs. "a + -b" and "a - b" are both allowed.
            let mut negative = false;
            let mut saw_sep = first;
            while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                if bytes[pos] == b'-' {
                    negative = !negative;
                }
                saw_sep = true;
                pos += 1;
            }
            if !saw_sep {
                return Err(bad("expected `+` or `-` between terms"));
            }
            first = false;
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let mut coeff = if pos > start {
                BigInt::from_str(&text[start..pos]).map_err(|_| bad("bad integer"))?
            } else {
                BigInt::one()
            };
            let has_number = pos > start;
            let mut power = 0usize;
            if pos < bytes.len() && bytes[pos] == b'*' {
                if !has_number {
                    return Err(bad("`*` without a coefficient"));
                }
                pos += 1;
                if pos >= bytes.len() || bytes[pos] != b'x' {
                    return Err(bad("expected `x` after `*`"));
                }
            }
            if pos < bytes.len() && bytes[pos] == b'x' {
                pos += 1;
                power = 1;
                if pos < bytes.len() && bytes[pos] == b'^' {
                    pos += 1;
                    let ps = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if ps == pos {
                        return Err(bad("missing exponent"));
                    }
                    power = text[ps..pos].parse().map_err(|_| bad("bad exponent"))?;
                }
            } else if !has_number {
                return Err(bad("empty term"));
            }
            if negative {
                coeff = -coeff;
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigInt::zero());
            }
            coeffs[power] += coeff;
        }
        Ok(IntPolynomial::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64s(c)
    }

    #[test]
    fn trims_leading_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn display_and_parse() {
        let f = p(&[1, 0, -3, 1]);
        assert_eq!(f.to_string(), "1 + -3*x^2 + 1*x^3");
        assert_eq!(f.to_string().parse::<IntPolynomial>().unwrap(), f);
        assert_eq!("x^2+1".parse::<IntPolynomial>().unwrap(), p(&[1, 0, 1]));
        assert_eq!(" -2 +  x ^ 2 ".parse::<IntPolynomial>().unwrap(), p(&[-2, 0, 1]));
        assert_eq!("3*x - x + 4".parse::<IntPolynomial>().unwrap(), p(&[4, 2]));
        assert_eq!("0".parse::<IntPolynomial>().unwrap(), IntPolynomial::zero());
        assert!("x^".parse::<IntPolynomial>().is_err());
        assert!("2 ** x".parse::<IntPolynomial>().is_err());
        assert!("".parse::<IntPolynomial>().is_err());
    }

    #[test]
    fn exact_division() {
        let a = &p(&[-1, 1]) * &p(&[1, 0, 1]);
        assert_eq!(a.div_exact(&p(&[1, 0, 1])).unwrap(), p(&[-1, 1]));
        assert!(a.div_exact(&p(&[1, 1])).is_err());
        assert!(p(&[1, 1]).div_exact(&p(&[1, 2])).is_err());
    }

    #[test]
    fn pseudo_remainder_matches_definition() {
        // prem(3x^3 + x + 1, 2x + 1) = 2^3 * f(-1/2) = -3 - 4 + 8 = 1
        let r = p(&[1, 1, 0, 3]).pseudo_rem(&p(&[1, 2])).unwrap();
        assert_eq!(r, p(&[1]));
    }

    #[test]
    fn compose_and_eval() {
        let f = p(&[1, 0, 1]);
        let g = p(&[-3, 1]);
        let h = f.compose(&g);
        assert_eq!(h, p(&[10, -6, 1]));
        assert_eq!(h.eval(&BigInt::from(5)), BigInt::from(5));
        assert_eq!(h.height(), BigInt::from(10));
    }

    proptest! {
        #[test]
        fn text_round_trip(c in proptest::collection::vec(-50i64..50, 0..7)) {
            let f = p(&c);
            prop_assert_eq!(f.to_string().parse::<IntPolynomial>().unwrap(), f);
        }

        #[test]
        fn product_divides_back(a in proptest::collection::vec(-9i64..9, 1..5),
                                b in proptest::collection::vec(-9i64..9, 1..5)) {
            let (fa, fb) = (p(&a), p(&b));
            prop_assume!(!fb.is_zero());
            prop_assert_eq!((&fa * &fb).div_exact(&fb).unwrap(), fa);
        }
    }
}
