use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::IntPolynomial;

/// Minimal integral-domain interface the subresultant sequence needs.
pub trait RingElement: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Division known to be exact.
    fn div_exact(&self, other: &Self) -> Result<Self>;

    fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }
}

impl RingElement for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, other: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(other);
        if !Zero::is_zero(&r) {
            return Err(Error::invalid("inexact integer division in resultant"));
        }
        Ok(q)
    }
}

impl RingElement for IntPolynomial {
    fn zero() -> Self {
        IntPolynomial::zero()
    }
    fn one() -> Self {
        IntPolynomial::one()
    }
    fn is_zero(&self) -> bool {
        IntPolynomial::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, other: &Self) -> Result<Self> {
        IntPolynomial::div_exact(self, other)
    }
}

fn trim<R: RingElement>(mut v: Vec<R>) -> Vec<R> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn degree<R>(v: &[R]) -> usize {
    v.len() - 1
}

fn pseudo_rem<R: RingElement>(a: &[R], b: &[R]) -> Vec<R> {
    let (da, db) = (degree(a), degree(b));
    let lead = b.last().expect("nonzero divisor").clone();
    let mut rem = a.to_vec();
    for k in (0..=da - db).rev() {
        let top = rem[k + db].clone();
        for c in rem.iter_mut() {
            *c = c.mul(&lead);
        }
        for (i, c) in b.iter().enumerate() {
            rem[k + i] = rem[k + i].sub(&top.mul(c));
        }
    }
    trim(rem)
}

/// Resultant of two polynomials given by coefficient vectors (lowest degree
/// first) over an integral domain, by the subresultant pseudo-remainder
/// sequence. No content is removed, so only exact divisions are needed.
pub fn resultant<R: RingElement>(a: &[R], b: &[R]) -> Result<R> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    if a.is_empty() || b.is_empty() {
        return Ok(R::zero());
    }
    let mut sign_negative = false;
    if degree(&a) < degree(&b) {
        if degree(&a) % 2 == 1 && degree(&b) % 2 == 1 {
            sign_negative = true;
        }
        std::mem::swap(&mut a, &mut b);
    }
    if degree(&b) == 0 {
        let r = b[0].pow(degree(&a));
        return Ok(if sign_negative { r.neg() } else { r });
    }
    let mut g = R::one();
    let mut h = R::one();
    loop {
        let delta = degree(&a) - degree(&b);
        if degree(&a) % 2 == 1 && degree(&b) % 2 == 1 {
            sign_negative = !sign_negative;
        }
        let r = pseudo_rem(&a, &b);
        a = b;
        if r.is_empty() {
            return Ok(R::zero());
        }
        let divisor = g.mul(&h.pow(delta));
        b = r
            .iter()
            .map(|c| c.div_exact(&divisor))
            .collect::<Result<Vec<_>>>()?;
        g = a.last().expect("nonzero").clone();
        h = if delta == 0 {
            h
        } else {
            g.pow(delta).div_exact(&h.pow(delta - 1))?
        };
        if degree(&b) == 0 {
            let da = degree(&a);
            let lb = b[0].clone();
            let out = if da == 0 {
                R::one()
            } else {
                lb.pow(da).div_exact(&h.pow(da - 1))?
            };
            return Ok(if sign_negative { out.neg() } else { out });
        }
    }
}

/// `Res_y(f1(y), f2(x - k*y))`: a polynomial in `x` vanishing at
/// `a1 + k*a2` for every root `a1` of `f1` and `a2` of `f2`.
pub fn composite_poly(f1: &IntPolynomial, f2: &IntPolynomial, k: i64) -> Result<IntPolynomial> {
    if f1.is_constant() || f2.is_constant() {
        return Err(Error::invalid("composite_poly needs nonconstant polynomials"));
    }
    // f1 as a polynomial in y with constant coefficients in Z[x].
    let a: Vec<IntPolynomial> = f1
        .coeffs()
        .iter()
        .map(|c| IntPolynomial::constant(c.clone()))
        .collect();
    // f2(x - k y) expanded in powers of y.
    let shift = vec![
        IntPolynomial::from_i64s(&[0, 1]),
        IntPolynomial::constant(BigInt::from(-k)),
    ];
    let mut b: Vec<IntPolynomial> = Vec::new();
    let mut power = vec![IntPolynomial::one()];
    for c in f2.coeffs() {
        let scaled: Vec<IntPolynomial> = power
            .iter()
            .map(|t| t.scale(c))
            .collect();
        if b.len() < scaled.len() {
            b.resize(scaled.len(), IntPolynomial::zero());
        }
        for (i, t) in scaled.into_iter().enumerate() {
            b[i] = &b[i] + &t;
        }
        power = poly_mul(&power, &shift);
    }
    resultant(&a, &b)
}

fn poly_mul<R: RingElement>(a: &[R], b: &[R]) -> Vec<R> {
    let mut out = vec![R::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn poly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64s(c)
    }

    fn ints(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Sylvester determinant by Gaussian elimination over the rationals.
    fn sylvester_det(a: &[BigInt], b: &[BigInt]) -> BigInt {
        let (m, n) = (a.len() - 1, b.len() - 1);
        let size = m + n;
        if size == 0 {
            return BigInt::from(1);
        }
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for i in 0..n {
            let mut row = vec![BigRational::zero(); size];
            for (j, c) in a.iter().rev().enumerate() {
                row[i + j] = BigRational::from_integer(c.clone());
            }
            rows.push(row);
        }
        for i in 0..m {
            let mut row = vec![BigRational::zero(); size];
            for (j, c) in b.iter().rev().enumerate() {
                row[i + j] = BigRational::from_integer(c.clone());
            }
            rows.push(row);
        }
        let mut det = BigRational::one();
        for col in 0..size {
            let Some(piv) = (col..size).find(|&r| !rows[r][col].is_zero()) else {
                return BigInt::from(0);
            };
            if piv != col {
                rows.swap(piv, col);
                det = -det;
            }
            det *= rows[col][col].clone();
            for r in col + 1..size {
                let factor = &rows[r][col] / &rows[col][col];
                for c in col..size {
                    let sub = &factor * &rows[col][c];
                    rows[r][c] -= sub;
                }
            }
        }
        det.to_integer()
    }

    #[test]
    fn integer_resultants() {
        // Res(x^2 + 1, x - 2) = (2)^2 + 1 up to sign convention: f(2) = 5
        assert_eq!(resultant(&ints(&[1, 0, 1]), &ints(&[-2, 1])).unwrap(), BigInt::from(5));
        // Common root gives zero.
        assert!(RingElement::is_zero(&resultant(&ints(&[-1, 0, 1]), &ints(&[-1, 1])).unwrap()));
        assert_eq!(
            resultant(&ints(&[3, 2, 1]), &ints(&[1, 0, 4])).unwrap(),
            sylvester_det(&ints(&[3, 2, 1]), &ints(&[1, 0, 4]))
        );
    }

    #[test]
    fn composite_of_i_and_sqrt2() {
        let g = composite_poly(&poly(&[1, 0, 1]), &poly(&[-2, 0, 1]), 1).unwrap();
        let expected = poly(&[9, 0, -2, 0, 1]);
        assert!(g == expected || g == -&expected, "got {g}");
    }

    #[test]
    fn composite_linear_case() {
        let g = composite_poly(&poly(&[-3, 1]), &poly(&[-4, 1]), 1).unwrap();
        assert!(g == poly(&[-7, 1]) || g == poly(&[7, -1]), "got {g}");
    }

    #[test]
    fn composite_with_zero_shift_is_power_of_f1() {
        let f1 = poly(&[1, 0, 1]);
        let g = composite_poly(&f1, &f1, 0).unwrap();
        let sq = f1.pow(2);
        assert!(g == sq || g == -&sq, "got {g}");
    }

    #[test]
    fn composite_rejects_constants() {
        assert!(composite_poly(&poly(&[3]), &poly(&[1, 1]), 1).is_err());
    }

    #[test]
    fn composite_agrees_with_sylvester_pointwise() {
        let f1 = poly(&[-2, 0, 0, 1]);
        let f2 = poly(&[1, 1, 1]);
        for k in 1..=3i64 {
            let g = composite_poly(&f1, &f2, k).unwrap();
            for x0 in -5i64..=5 {
                // f2(x0 - k y) as an integer polynomial in y
                let sub = f2.compose(&poly(&[x0, -k]));
                let det = sylvester_det(f1.coeffs(), sub.coeffs());
                assert_eq!(g.eval(&BigInt::from(x0)), det, "k={k} x0={x0}");
            }
        }
    }

    proptest! {
        #[test]
        fn subresultant_matches_sylvester(
            a in proptest::collection::vec(-6i64..6, 1..6),
            b in proptest::collection::vec(-6i64..6, 1..6),
        ) {
            let (a, b) = (ints(&a), ints(&b));
            let (ta, tb) = (trim(a.clone()), trim(b.clone()));
            prop_assume!(!ta.is_empty() && !tb.is_empty());
            prop_assert_eq!(resultant(&ta, &tb).unwrap(), sylvester_det(&ta, &tb));
        }
    }
}
