//! Prime spectra: which `Z_p` satisfy a sentence, and tools to compare
//! spectra with congruence classes.
//!
//! Everything is relative to a finite prime table. Complements are taken
//! within the table, and "almost equal" means the finite symmetric
//! difference is listed, never that it is claimed to be finite forever.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u64, is_prime_u64, poly_roots_mod, sieve, IntPolynomial, PrimeTable, RootMethod};
use crate::error::{Error, Result};
use crate::eval::{eval_sentence_with, Engine, FastConfig, RingContext};
use crate::logic::Sentence;

/// Membership bit for every prime of a table.
#[derive(Clone, PartialEq, Eq)]
pub struct Spectrum {
    table: Arc<PrimeTable>,
    bits: Vec<bool>,
}

impl fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectrum")
            .field("bound", &self.bound())
            .field("members", &self.count())
            .finish()
    }
}

impl Spectrum {
    pub fn from_fn(table: Arc<PrimeTable>, mut member: impl FnMut(u64) -> bool) -> Self {
        let bits = table.primes().iter().map(|&p| member(p)).collect();
        Spectrum { table, bits }
    }

    /// Spectrum containing exactly the listed numbers that are primes of the table.
    pub fn from_members(table: Arc<PrimeTable>, members: &[u64]) -> Result<Self> {
        let mut bits = vec![false; table.len()];
        for &p in members {
            let i = table
                .index_of(p)
                .ok_or_else(|| Error::invalid(format!("{p} is not a prime at most {}", table.bound())))?;
            bits[i] = true;
        }
        Ok(Spectrum { table, bits })
    }

    pub fn all(table: Arc<PrimeTable>) -> Self {
        Spectrum::from_fn(table, |_| true)
    }

    pub fn empty(table: Arc<PrimeTable>) -> Self {
        Spectrum::from_fn(table, |_| false)
    }

    pub fn bound(&self) -> u64 {
        self.table.bound()
    }

    pub fn table(&self) -> &Arc<PrimeTable> {
        &self.table
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, p: u64) -> bool {
        self.table.index_of(p).is_some_and(|i| self.bits[i])
    }

    pub fn members(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.table.primes().iter().zip(&self.bits).filter(|(_, &b)| b).map(|(&p, _)| p)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of members at most `x`.
    pub fn count_upto(&self, x: u64) -> Result<usize> {
        let k = self.table.pi(x)?;
        Ok(self.bits[..k].iter().filter(|&&b| b).count())
    }

    fn check_bounds(&self, other: &Spectrum) -> Result<()> {
        if self.bound() != other.bound() {
            return Err(Error::BoundMismatch(self.bound(), other.bound()));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Spectrum, f: impl Fn(bool, bool) -> bool) -> Result<Spectrum> {
        self.check_bounds(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect();
        Ok(Spectrum { table: self.table.clone(), bits })
    }

    pub fn union(&self, other: &Spectrum) -> Result<Spectrum> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Spectrum) -> Result<Spectrum> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Spectrum) -> Result<Spectrum> {
        self.zip_with(other, |a, b| a && !b)
    }

    /// Complement within the primes up to the bound.
    pub fn complement(&self) -> Spectrum {
        Spectrum { table: self.table.clone(), bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn is_subset(&self, other: &Spectrum) -> Result<bool> {
        self.check_bounds(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// CSV with header `prime,member` and one row per prime.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prime,member\n");
        for (&p, &b) in self.table.primes().iter().zip(&self.bits) {
            out.push_str(&format!("{p},{}\n", u8::from(b)));
        }
        out
    }

    pub fn to_record(&self) -> SpectrumRecord {
        SpectrumRecord {
            bound: self.bound(),
            primes_total: self.table.len(),
            members_total: self.count(),
            included: self.members(),
        }
    }

    /// Reads the CSV or JSON forms written by [`Spectrum::to_csv`] and
    /// [`Spectrum::to_record`]. A CSV carries no explicit bound, so the
    /// bound is its largest listed prime unless `bound` is given.
    pub fn parse(text: &str, bound: Option<u64>) -> Result<Spectrum> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let rec: SpectrumRecord =
                serde_json::from_str(trimmed).map_err(|e| Error::invalid(format!("spectrum JSON: {e}")))?;
            let table = Arc::new(sieve(bound.unwrap_or(rec.bound))?);
            return Spectrum::from_members(table, &rec.included);
        }
        let mut rows = Vec::new();
        for (lineno, line) in trimmed.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("prime")) {
                continue;
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::invalid(format!("spectrum CSV line {}: `{line}`", lineno + 1)))
            };
            let (p, m) = line
                .split_once(',')
                .ok_or_else(|| Error::invalid(format!("spectrum CSV line {}: expected `prime,member`", lineno + 1)))?;
            rows.push((parse(p)?, parse(m)? != 0));
        }
        let top = rows.iter().map(|r| r.0).max().unwrap_or(2);
        let table = Arc::new(sieve(bound.unwrap_or(top).max(2))?);
        let members: Vec<u64> = rows.iter().filter(|r| r.1).map(|r| r.0).collect();
        Spectrum::from_members(table, &members)
    }
}

/// Serialized form of a spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub bound: u64,
    pub primes_total: usize,
    pub members_total: usize,
    pub included: Vec<u64>,
}

/// How spectra are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumOptions {
    pub workers: usize,
    pub engine: Engine,
    pub fast: FastConfig,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { workers: 1, engine: Engine::Auto, fast: FastConfig::default() }
    }
}

/// Runs `f` on every prime of the table with the requested number of
/// threads. Results come back in prime order whatever the schedule, and
/// the first failing prime (in order) determines the error.
pub(crate) fn per_prime<T: Send>(
    table: &PrimeTable,
    workers: usize,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let run = || table.primes().par_iter().map(|&p| f(p)).collect::<Vec<Result<T>>>();
    let results = if workers <= 1 {
        table.primes().iter().map(|&p| f(p)).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run)
    };
    results.into_iter().collect()
}

/// `Sp(s)` over the primes of `table`.
pub fn spectrum(s: &Sentence, table: Arc<PrimeTable>, opts: &SpectrumOptions) -> Result<Spectrum> {
    let bits = per_prime(&table, opts.workers, |p| {
        let ctx = RingContext::new(p)?;
        eval_sentence_with(&ctx, s, opts.engine, &opts.fast)
            .map_err(|e| Error::AtModulus { modulus: p, source: Box::new(e) })
    })?;
    Ok(Spectrum { table, bits })
}

/// Primes `p` of the table for which `f` has a root modulo `p`. A
/// polynomial vanishing identically modulo `p` has every residue as a root.
pub fn poly_spectrum(f: &IntPolynomial, table: Arc<PrimeTable>) -> Result<Spectrum> {
    if f.is_constant() {
        return Err(Error::invalid("polynomial must be nonconstant"));
    }
    let bits = table
        .primes()
        .iter()
        .map(|&p| match poly_roots_mod(f, p, RootMethod::Auto) {
            Ok(roots) => Ok(!roots.is_empty()),
            Err(Error::DegeneratePolynomial(_)) => Ok(true),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(Spectrum { table, bits })
}

/// Primes `p` with `p mod d` among `residues`.
pub fn congruence_set(table: Arc<PrimeTable>, d: u64, residues: &[u64]) -> Result<Spectrum> {
    if d == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    Ok(Spectrum::from_fn(table, |p| residues.contains(&(p % d))))
}

/// Symmetric difference of two spectra, listed in full.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionReport {
    pub bound: u64,
    /// Primes in exactly one of the two sets, ascending.
    pub exceptions: Vec<u64>,
    pub largest: Option<u64>,
    pub threshold: u64,
    /// Every exception is at most `threshold`.
    pub plausibly_equal: bool,
}

pub fn almost_equal(s: &Spectrum, t: &Spectrum, threshold: u64) -> Result<ExceptionReport> {
    let diff = s.zip_with(t, |a, b| a != b)?;
    let exceptions = diff.members();
    let largest = exceptions.last().copied();
    Ok(ExceptionReport {
        bound: s.bound(),
        plausibly_equal: largest.is_none_or(|l| l <= threshold),
        exceptions,
        largest,
        threshold,
    })
}

/// Whether the primes `= a (mod d)` lie in the Boolean algebra generated by
/// polynomial spectra: `a` has order at most 2 modulo `d`, or shares a
/// factor with `d`.
pub fn lagarias_in_b(a: u64, d: u64) -> Result<bool> {
    if a == 0 || a >= d {
        return Err(Error::invalid(format!("need 0 < a < d, got a = {a}, d = {d}")));
    }
    Ok((a as u128 * a as u128) % d as u128 == 1 || gcd_u64(a, d) > 1)
}

/// Moduli `d <= limit` for which every unit squares to 1.
pub fn exceptional_moduli(limit: u64) -> Vec<u64> {
    (1..=limit)
        .filter(|&d| (1..d).filter(|&a| gcd_u64(a, d) == 1).all(|a| (a * a) % d == 1 % d))
        .collect()
}

/// A modulus with a set of residues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceClass {
    pub modulus: u64,
    pub residues: Vec<u64>,
    /// Whether each residue is a unit modulo `modulus`, in residue order.
    pub coprime: Vec<bool>,
}

impl CongruenceClass {
    pub fn new(modulus: u64, mut residues: Vec<u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::invalid("modulus must be at least 2"));
        }
        residues.sort_unstable();
        residues.dedup();
        if residues.is_empty() || residues.iter().any(|&a| a == 0 || a >= modulus) {
            return Err(Error::invalid(format!("residues must be nonempty and within 1..{modulus}")));
        }
        let coprime = residues.iter().map(|&a| gcd_u64(a, modulus) == 1).collect();
        Ok(CongruenceClass { modulus, residues, coprime })
    }

    pub fn contains(&self, p: u64) -> bool {
        self.residues.contains(&(p % self.modulus))
    }
}

impl fmt::Display for CongruenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.residues.iter().map(|a| a.to_string()).collect();
        write!(f, "p = {{{}}} mod {}", list.join(", "), self.modulus)
    }
}

/// Residue classes of one modulus found inside a spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceFit {
    pub class: CongruenceClass,
    /// Primes at or below this value were ignored when fitting.
    pub threshold: u64,
    /// The union of the detected classes equals the spectrum above the threshold.
    pub exact_above_threshold: bool,
    /// Comparison of the spectrum with the union of the classes, over all primes.
    pub report: ExceptionReport,
}

/// For each modulus `2..=max_modulus`, the residues whose primes above the
/// threshold all lie in `s` (classes with no prime above the threshold are
/// skipped). The default threshold is `max(d, 50)`.
pub fn fit_congruences(s: &Spectrum, max_modulus: u64, threshold: Option<u64>) -> Result<Vec<CongruenceFit>> {
    let mut fits = Vec::new();
    for d in 2..=max_modulus {
        let cut = threshold.unwrap_or(d.max(50));
        if cut >= s.bound() {
            return Err(Error::invalid(format!("threshold {cut} must be below the bound {}", s.bound())));
        }
        let mut seen = vec![false; d as usize];
        let mut outside = vec![false; d as usize];
        for (&p, &b) in s.table.primes().iter().zip(&s.bits) {
            if p <= cut {
                continue;
            }
            let a = (p % d) as usize;
            seen[a] = true;
            if !b {
                outside[a] = true;
            }
        }
        let residues: Vec<u64> = (1..d).filter(|&a| seen[a as usize] && !outside[a as usize]).collect();
        if residues.is_empty() {
            continue;
        }
        let class = CongruenceClass::new(d, residues)?;
        let union = Spectrum::from_fn(s.table.clone(), |p| class.contains(p));
        let report = almost_equal(s, &union, cut)?;
        fits.push(CongruenceFit { exact_above_threshold: report.plausibly_equal, class, threshold: cut, report });
    }
    Ok(fits)
}

/// Number of nonzero `n`-th powers modulo the prime `p`.
pub fn power_residue_count(p: u64, n: u64) -> Result<u64> {
    if !is_prime_u64(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if n == 0 {
        return Err(Error::invalid("exponent must be positive"));
    }
    // The image of x -> x^n on the cyclic group of order p-1 has (p-1)/gcd(n, p-1) elements.
    Ok((p - 1) / gcd_u64(n, p - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;

    fn table(bound: u64) -> Arc<PrimeTable> {
        Arc::new(sieve(bound).unwrap())
    }

    fn sentence(text: &str) -> Sentence {
        Sentence::new(parse(text).unwrap()).unwrap()
    }

    #[test]
    fn sum_of_squares_spectrum_to_100() {
        let s = spectrum(&sentence("E x. x*x+1=0"), table(100), &SpectrumOptions::default()).unwrap();
        assert_eq!(s.members(), vec![2, 5, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97]);
    }

    #[test]
    fn trivial_sentences() {
        let t = table(50);
        let all = spectrum(&sentence("0 = 0"), t.clone(), &SpectrumOptions::default()).unwrap();
        assert_eq!(all.count(), 15);
        let none = spectrum(&sentence("!(0=0)"), t, &SpectrumOptions::default()).unwrap();
        assert_eq!(none.count(), 0);
    }

    #[test]
    fn boolean_operations_and_mismatch() {
        let t = table(200);
        let f: IntPolynomial = "x^2 + 1".parse().unwrap();
        let s = poly_spectrum(&f, t.clone()).unwrap();
        assert_eq!(s.union(&s.complement()).unwrap(), Spectrum::all(t.clone()));
        assert_eq!(s.intersection(&s.complement()).unwrap().count(), 0);
        let other = poly_spectrum(&f, table(100)).unwrap();
        assert_eq!(s.union(&other), Err(Error::BoundMismatch(200, 100)));
    }

    #[test]
    fn brute_force_poly_spectra() {
        let t = table(50);
        let f: IntPolynomial = "x^2 - 2".parse().unwrap();
        assert_eq!(poly_spectrum(&f, t.clone()).unwrap().members(), vec![2, 7, 17, 23, 31, 41, 47]);
        let lin: IntPolynomial = "x - 5".parse().unwrap();
        assert_eq!(poly_spectrum(&lin, t.clone()).unwrap().count(), t.len());
        assert!(poly_spectrum(&IntPolynomial::from_i64s(&[4]), t).is_err());
    }

    #[test]
    fn lagarias_examples() {
        assert!(lagarias_in_b(5, 8).unwrap());
        assert!(!lagarias_in_b(2, 5).unwrap());
        assert!(lagarias_in_b(1, 7).unwrap());
        assert!(lagarias_in_b(0, 7).is_err());
        assert_eq!(exceptional_moduli(30), vec![1, 2, 3, 4, 6, 8, 12, 24]);
        assert_eq!(exceptional_moduli(5), vec![1, 2, 3, 4]);
    }

    #[test]
    fn power_residues_by_enumeration() {
        for p in [3u64, 5, 7, 11, 13, 31, 97] {
            for n in 1..8u64 {
                let mut seen: Vec<u64> = (1..p).map(|x| crate::arith::pow_mod(x, n, p)).collect();
                seen.sort_unstable();
                seen.dedup();
                assert_eq!(power_residue_count(p, n).unwrap(), seen.len() as u64, "p={p} n={n}");
            }
        }
        assert_eq!(power_residue_count(13, 3).unwrap(), 4);
        assert_eq!(power_residue_count(13, 5).unwrap(), 12);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let s = poly_spectrum(&"x^2 + 1".parse().unwrap(), table(97)).unwrap();
        assert_eq!(Spectrum::parse(&s.to_csv(), None).unwrap(), s);
        let json = serde_json::to_string(&s.to_record()).unwrap();
        assert_eq!(Spectrum::parse(&json, None).unwrap(), s);
    }

    #[test]
    fn fits_for_sum_of_squares() {
        let s = poly_spectrum(&"x^2 + 1".parse().unwrap(), table(10_000)).unwrap();
        let fits = fit_congruences(&s, 8, None).unwrap();
        let found: Vec<(u64, Vec<u64>)> = fits.iter().map(|f| (f.class.modulus, f.class.residues.clone())).collect();
        assert_eq!(found, vec![(4, vec![1]), (8, vec![1, 5])]);
        assert!(fits.iter().all(|f| f.exact_above_threshold));
        assert_eq!(fits[0].report.exceptions, vec![2]);
    }

    #[test]
    fn worker_count_does_not_change_spectra() {
        let s = sentence("A x. !(x = 0) -> E y. x*y = 1");
        let t = table(2000);
        let one = spectrum(&s, t.clone(), &SpectrumOptions::default()).unwrap();
        let many = spectrum(&s, t.clone(), &SpectrumOptions { workers: 8, ..Default::default() }).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.count(), t.len());
    }
}
