use crate::error::{Error, Result};

use super::IntPolynomial;

/// The `n`-th cyclotomic polynomial, obtained by dividing `x^n - 1` by the
/// cyclotomic polynomials of every proper divisor of `n`.
pub fn cyclotomic(n: usize) -> Result<IntPolynomial> {
    if n == 0 {
        return Err(Error::invalid("cyclotomic index must be >= 1"));
    }
    let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    // table[i] holds F_{divisors[i]}; every proper divisor of d precedes it.
    let mut table: Vec<IntPolynomial> = Vec::with_capacity(divisors.len());
    for (i, &d) in divisors.iter().enumerate() {
        let mut f = IntPolynomial::x_pow_minus_one(d);
        for (j, &e) in divisors[..i].iter().enumerate() {
            if d % e == 0 {
                f = f.div_exact(&table[j])?;
            }
        }
        table.push(f);
    }
    Ok(table.pop().expect("n has at least one divisor"))
}
