use crate::error::{Error, Result};

use super::IntPolynomial;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The fraction `a/d` in `Z_p`: the residue `r` with `r*d = a (mod p)`,
/// computed as `a * d^(p-2)`.
pub fn frac_mod(a: u64, d: u64, p: u64) -> Result<u64> {
    if a == 0 || d == 0 {
        return Err(Error::invalid("fraction needs a > 0 and d > 0"));
    }
    if !is_prime_u64(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if d % p == 0 {
        return Err(Error::NoInverse { d, p });
    }
    Ok(mul_mod(a % p, pow_mod(d, p - 2, p), p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootMethod {
    /// Full scan for small primes, gcd with `x^p - x` above.
    #[default]
    Auto,
    Scan,
    Gcd,
}

/// Above this size the scan is replaced by the gcd route.
const SCAN_LIMIT: u64 = 100_000;

/// All residues `x` in `0..p` with `f(x) = 0 (mod p)`, sorted.
pub fn poly_roots_mod(f: &IntPolynomial, p: u64, method: RootMethod) -> Result<Vec<u64>> {
    match method {
        RootMethod::Scan => poly_roots_mod_scan(f, p),
        RootMethod::Gcd => poly_roots_mod_gcd(f, p),
        RootMethod::Auto if p <= SCAN_LIMIT => poly_roots_mod_scan(f, p),
        RootMethod::Auto => poly_roots_mod_gcd(f, p),
    }
}

fn reduced(f: &IntPolynomial, p: u64) -> Result<Vec<u64>> {
    if !is_prime_u64(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let r = f.reduce_mod(p);
    if r.is_empty() {
        return Err(Error::DegeneratePolynomial(p));
    }
    Ok(r)
}

/// Horner evaluation at every residue.
pub fn poly_roots_mod_scan(f: &IntPolynomial, p: u64) -> Result<Vec<u64>> {
    let c = reduced(f, p)?;
    Ok((0..p)
        .filter(|&x| c.iter().rev().fold(0u64, |acc, &a| (mul_mod(acc, x, p) + a) % p) == 0)
        .collect())
}

/// Roots via `gcd(x^p - x, f)` followed by equal-degree splitting.
pub fn poly_roots_mod_gcd(f: &IntPolynomial, p: u64) -> Result<Vec<u64>> {
    let c = reduced(f, p)?;
    let fp = FpPoly::new(c, p);
    if fp.degree() == 0 {
        return Ok(Vec::new());
    }
    if p == 2 {
        return Ok((0..2).filter(|&x| fp.eval(x) == 0).collect());
    }
    let f_monic = fp.monic();
    let xp = FpPoly::x(p).pow_mod(p, &f_monic);
    let g = f_monic.gcd(&xp.sub(&FpPoly::x(p)));
    let mut roots = Vec::new();
    split_roots(g, &mut roots);
    roots.sort_unstable();
    Ok(roots)
}

/// `g` is monic, squarefree and splits into distinct linear factors.
fn split_roots(g: FpPoly, out: &mut Vec<u64>) {
    let p = g.p;
    match g.degree() {
        0 => {}
        1 => out.push((p - g.c[0]) % p),
        _ => {
            // x | g handled directly; then split the rest with (x + a)^((p-1)/2) - 1.
            if g.c[0] == 0 {
                out.push(0);
                let rest = FpPoly::new(g.c[1..].to_vec(), p);
                split_roots(rest, out);
                return;
            }
            for a in 0..p {
                let shifted = FpPoly::new(vec![a, 1], p);
                let h = shifted.pow_mod((p - 1) / 2, &g).sub(&FpPoly::new(vec![1], p));
                let d = g.gcd(&h);
                let dd = d.degree();
                if dd > 0 && dd < g.degree() {
                    let (q, _) = g.div_rem(&d);
                    split_roots(d, out);
                    split_roots(q.monic(), out);
                    return;
                }
            }
            unreachable!("equal-degree splitting failed for a squarefree split polynomial");
        }
    }
}

/// Dense polynomial over `F_p`, trimmed, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
struct FpPoly {
    c: Vec<u64>,
    p: u64,
}

impl FpPoly {
    fn new(mut c: Vec<u64>, p: u64) -> Self {
        for a in c.iter_mut() {
            *a %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { c, p }
    }

    fn x(p: u64) -> Self {
        FpPoly::new(vec![0, 1], p)
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Zero polynomial reports degree 0 as well; callers check `is_zero`.
    fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn eval(&self, x: u64) -> u64 {
        self.c
            .iter()
            .rev()
            .fold(0, |acc, &a| (mul_mod(acc, x, self.p) + a) % self.p)
    }

    fn monic(&self) -> Self {
        match self.c.last() {
            None => self.clone(),
            Some(&lead) => {
                let inv = inverse_mod(lead, self.p).expect("nonzero residue mod prime");
                FpPoly::new(self.c.iter().map(|&a| mul_mod(a, inv, self.p)).collect(), self.p)
            }
        }
    }

    fn sub(&self, other: &FpPoly) -> Self {
        let n = self.c.len().max(other.c.len());
        let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
        FpPoly::new(
            (0..n)
                .map(|i| (get(&self.c, i) + self.p - get(&other.c, i)) % self.p)
                .collect(),
            self.p,
        )
    }

    fn mul(&self, other: &FpPoly) -> Self {
        if self.is_zero() || other.is_zero() {
            return FpPoly::new(Vec::new(), self.p);
        }
        let mut out = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        FpPoly::new(out, self.p)
    }

    fn div_rem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let p = self.p;
        if self.c.len() < d.c.len() {
            return (FpPoly::new(Vec::new(), p), self.clone());
        }
        let inv = inverse_mod(*d.c.last().expect("nonzero divisor"), p).expect("unit");
        let mut rem = self.c.clone();
        let dd = d.c.len() - 1;
        let mut q = vec![0u64; rem.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = mul_mod(rem[k + dd], inv, p);
            q[k] = coef;
            if coef == 0 {
                continue;
            }
            for (i, &b) in d.c.iter().enumerate() {
                rem[k + i] = (rem[k + i] + p - mul_mod(coef, b, p)) % p;
            }
        }
        (FpPoly::new(q, p), FpPoly::new(rem, p))
    }

    fn gcd(&self, other: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn pow_mod(&self, mut e: u64, modulus: &FpPoly) -> FpPoly {
        let mut base = self.div_rem(modulus).1;
        let mut acc = FpPoly::new(vec![1], self.p).div_rem(modulus).1;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).div_rem(modulus).1;
            }
            base = base.mul(&base).div_rem(modulus).1;
            e >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64s(c)
    }

    #[test]
    fn fractions_in_z5() {
        assert_eq!(frac_mod(1, 4, 5).unwrap(), 4);
        assert_eq!(frac_mod(2, 4, 5).unwrap(), 3);
        assert_eq!(frac_mod(3, 4, 5).unwrap(), 2);
        assert_eq!(frac_mod(6, 6, 7).unwrap(), 1);
        assert_eq!(frac_mod(1, 5, 5), Err(Error::NoInverse { d: 5, p: 5 }));
        assert!(frac_mod(1, 2, 9).is_err());
    }

    #[test]
    fn fraction_times_denominator() {
        for p in [3u64, 5, 7, 11, 13, 101, 997] {
            for d in 1..p.min(20) {
                for a in 1..30 {
                    let r = frac_mod(a, d, p).unwrap();
                    assert_eq!(mul_mod(r, d, p), a % p);
                }
            }
        }
    }

    #[test]
    fn root_examples() {
        let f = poly(&[1, 0, 1]);
        assert_eq!(poly_roots_mod_scan(&f, 5).unwrap(), vec![2, 3]);
        assert!(poly_roots_mod_scan(&f, 7).unwrap().is_empty());
        assert_eq!(poly_roots_mod_scan(&poly(&[-1, 1]), 11).unwrap(), vec![1]);
        assert_eq!(poly_roots_mod_gcd(&f, 5).unwrap(), vec![2, 3]);
        assert_eq!(
            poly_roots_mod_scan(&poly(&[5, 10]), 5),
            Err(Error::DegeneratePolynomial(5))
        );
        assert!(poly_roots_mod_scan(&f, 9).is_err());
    }

    #[test]
    fn gcd_route_matches_scan() {
        let suite = [poly(&[1, 0, 1]), poly(&[-2, 0, 1]), poly(&[-2, 0, 0, 1]), poly(&[0, -1, 0, 1])];
        for p in (2..1000u64).filter(|&n| is_prime_u64(n)) {
            for f in &suite {
                assert_eq!(
                    poly_roots_mod_gcd(f, p).unwrap(),
                    poly_roots_mod_scan(f, p).unwrap(),
                    "f = {f}, p = {p}"
                );
            }
        }
    }

    #[test]
    fn gcd_route_for_a_large_prime() {
        let p = 1_000_033;
        let f = poly(&[1, 0, 1]);
        let roots = poly_roots_mod(&f, p, RootMethod::Auto).unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert_eq!((mul_mod(r, r, p) + 1) % p, 0);
        }
    }

    #[test]
    fn inverses_and_primality() {
        assert_eq!(inverse_mod(3, 7), Some(5));
        assert_eq!(inverse_mod(2, 6), None);
        let by_trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000 {
            assert_eq!(is_prime_u64(n), by_trial(n), "{n}");
        }
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(3_215_031_751));
    }
}
