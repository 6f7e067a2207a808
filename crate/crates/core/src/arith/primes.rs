use crate::error::{Error, Result};

/// All primes up to a bound, with `pi(x)` queries for `x <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

/// Sieve of Eratosthenes over odd numbers only.
pub fn sieve(bound: u64) -> Result<PrimeTable> {
    if bound < 2 {
        return Err(Error::invalid(format!("sieve bound must be >= 2, got {bound}")));
    }
    // composite[i] describes the odd number 2i + 1.
    let half = ((bound - 1) / 2 + 1) as usize;
    let mut composite = vec![false; half];
    composite[0] = true; // 1
    let mut i = 1usize;
    loop {
        let p = 2 * i + 1;
        if p * p > bound as usize {
            break;
        }
        if !composite[i] {
            let mut j = (p * p) / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_count(bound));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1)
            .filter(|&p| p <= bound),
    );
    Ok(PrimeTable { bound, primes })
}

fn estimate_count(bound: u64) -> usize {
    let x = bound as f64;
    (1.3 * x / x.ln().max(1.0)) as usize + 8
}

impl PrimeTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Number of primes `<= x`. Refuses `x` beyond the sieved range.
    pub fn pi(&self, x: u64) -> Result<usize> {
        if x > self.bound {
            return Err(Error::ResourceLimit(format!(
                "pi({x}) requested beyond sieve bound {}",
                self.bound
            )));
        }
        Ok(self.primes.partition_point(|&p| p <= x))
    }

    /// Position of `p` in the table, if `p` is a listed prime.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n > self.bound {
            return Err(Error::ResourceLimit(format!(
                "primality of {n} requested beyond sieve bound {}",
                self.bound
            )));
        }
        Ok(self.index_of(n).is_some())
    }
}
