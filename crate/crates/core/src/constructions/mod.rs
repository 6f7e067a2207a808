//! Builders for the sentence families whose spectra are studied: fraction
//! order, congruence classes, cyclotomic roots, modular counts, power
//! residues, and the interval-structured sentences built from powers of a
//! prime `q`.
//!
//! All numeric parameters enter as literals, so in `Z_m` they are read
//! modulo `m`. Each family carries the smallest prime from which its
//! characterization is claimed.

use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;

use crate::arith::{cyclotomic, is_prime_u64, IntPolynomial};
use crate::error::{Error, Result};
use crate::logic::{count_exact, Formula, Sentence, Term};

fn var(name: &str) -> Term {
    Term::var(name)
}

fn lit(k: u64) -> Term {
    Term::lit(k)
}

fn nonzero(name: &str, value: u64) -> Result<()> {
    if value == 0 {
        return Err(Error::invalid(format!("{name} must be positive")));
    }
    Ok(())
}

fn require_prime(q: u64) -> Result<()> {
    if !is_prime_u64(q) {
        return Err(Error::invalid(format!("q = {q} must be prime")));
    }
    Ok(())
}

/// `E x. E y. (x*d = a & y*d = b & x < y)`: the residue `a/d` precedes `b/d`.
pub fn frac_lt(a: u64, b: u64, d: u64) -> Result<Formula> {
    nonzero("a", a)?;
    nonzero("b", b)?;
    nonzero("d", d)?;
    let body = Formula::and_all([
        Formula::equal(Term::mul(var("x"), lit(d)), lit(a)),
        Formula::equal(Term::mul(var("y"), lit(d)), lit(b)),
        Formula::less(var("x"), var("y")),
    ]);
    Ok(Formula::exists("x", Formula::exists("y", body)))
}

/// Holds in `Z_p` (`p` prime, `p > d`) exactly when `p = a (mod d)`: the
/// fraction `(d-a)/d` is the least of all `r/d`.
pub fn congruence_sentence(a: u64, d: u64) -> Result<Sentence> {
    if a == 0 || a >= d {
        return Err(Error::invalid(format!("need 0 < a < d, got a = {a}, d = {d}")));
    }
    let mut parts = vec![Formula::less(lit(a), lit(d))];
    for r in 1..d {
        if r != d - a {
            parts.push(frac_lt(d - a, r, d)?);
        }
    }
    Sentence::new(Formula::and_all(parts))
}

fn literal_coeff(c: &BigInt) -> Result<u64> {
    c.magnitude()
        .to_u64()
        .ok_or_else(|| Error::invalid(format!("coefficient {c} does not fit a literal")))
}

fn power(v: &str, k: usize) -> Term {
    let mut t = var(v);
    for _ in 1..k {
        t = Term::mul(t, var(v));
    }
    t
}

/// `sum c_k v^k` in Horner form, for `(k, c_k)` with `k` strictly descending.
fn horner(v: &str, monomials: &[(usize, u64)]) -> Term {
    let Some(&(top, c)) = monomials.first() else {
        return Term::Zero;
    };
    // `None` stands for the constant 1 before any factor of `v` is applied.
    let mut acc = (c != 1 || top == 0).then(|| lit(c));
    let mut degree = top;
    for &(k, c) in &monomials[1..] {
        let scaled = times_power(acc, v, degree - k);
        acc = Some(Term::add(scaled, lit(c)));
        degree = k;
    }
    times_power(acc, v, degree)
}

fn times_power(acc: Option<Term>, v: &str, k: usize) -> Term {
    match (acc, k) {
        (Some(t), 0) => t,
        (None, 0) => lit(1),
        (None, k) => power(v, k),
        (Some(t), k) => Term::mul(t, power(v, k)),
    }
}

/// `f(v) = 0` with negative coefficients moved to the right-hand side.
pub fn poly_equation(f: &IntPolynomial, v: &str) -> Result<Formula> {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for (k, c) in f.coeffs().iter().enumerate().rev() {
        if c.sign() == Sign::NoSign {
            continue;
        }
        let mag = literal_coeff(c)?;
        if c.sign() == Sign::Minus {
            rhs.push((k, mag));
        } else {
            lhs.push((k, mag));
        }
    }
    Ok(Formula::equal(horner(v, &lhs), horner(v, &rhs)))
}

/// `E x. f(x) = 0`.
pub fn poly_root_sentence(f: &IntPolynomial) -> Result<Sentence> {
    if f.is_constant() {
        return Err(Error::invalid("polynomial must be nonconstant"));
    }
    Sentence::new(Formula::exists("x", poly_equation(f, "x")?))
}

/// `E x. F_n(x) = 0` for the `n`-th cyclotomic polynomial.
pub fn cyclotomic_sentence(n: u64) -> Result<Sentence> {
    nonzero("n", n)?;
    poly_root_sentence(&cyclotomic(n as usize)?)
}

/// `E[r,q] x. x = x`: the ring size is `r` modulo `q`.
pub fn mod_count_sentence(r: u64, q: u64) -> Result<Sentence> {
    let f = Formula::mod_exists(r, q, "x", Formula::equal(var("x"), var("x")))
        .map_err(|e| Error::invalid(e.to_string()))?;
    Sentence::new(f)
}

/// `F_n` has a root and the number of nonzero `n`-th powers is `r` modulo
/// `d`. Holds in `Z_p` for almost all primes `p = rn + 1 (mod nd)`.
pub fn power_residue_sentence(n: u64, d: u64, r: u64) -> Result<Sentence> {
    if n < 2 || d < 2 || r >= d {
        return Err(Error::invalid(format!("need n, d > 1 and r < d, got n = {n}, d = {d}, r = {r}")));
    }
    let root = poly_equation(&cyclotomic(n as usize)?, "x")?;
    let nth_power = Formula::and(
        Formula::not(Formula::equal(var("y"), Term::Zero)),
        Formula::exists("z", Formula::equal(power("z", n as usize), var("y"))),
    );
    Sentence::new(Formula::and(Formula::exists("x", root), Formula::mod_exists(r, d, "y", nth_power)?))
}

/// Every nonzero element is invertible: true in `Z_m` iff `m` is prime.
pub fn prime_sentence() -> Sentence {
    let body = Formula::implies(
        Formula::not(Formula::equal(var("x"), Term::Zero)),
        Formula::exists("y", Formula::equal(Term::mul(var("x"), var("y")), lit(1))),
    );
    Sentence::new(Formula::forall("x", body)).expect("closed")
}

/// Supplies bound-variable names that never collide with each other.
#[derive(Debug, Default)]
struct Namer {
    next: usize,
}

impl Namer {
    fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }
}

/// Formulas in one free variable built from a prime `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerFamily {
    pub q: u64,
    /// `z` is a power of `q`.
    pub exp: Formula,
    /// `z` is the square of a power of `q`.
    pub exp_sq: Formula,
    /// `z` is the largest power of `q`.
    pub max_exp: Formula,
    /// `z` is the largest square of a power of `q`.
    pub max_exp_sq: Formula,
}

/// Formulas in one free variable with a counting quantifier over powers of `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperPowerFamily {
    pub q: u64,
    /// `z = q^n` where the number of powers of `q` below `z` is a power of `q`.
    pub sup_exp: Formula,
    /// As `sup_exp`, with that number also a perfect square.
    pub sup_exp_sq: Formula,
    pub sup_max_exp: Formula,
    pub sup_max_exp_sq: Formula,
}

fn exp_q(q: u64, z: &str, names: &mut Namer) -> Formula {
    let (x, y, w) = (names.fresh("x"), names.fresh("y"), names.fresh("w"));
    let divisor = Formula::exists(
        y.clone(),
        Formula::and(
            Formula::times(var(&x), var(&y), var(z)),
            Formula::not(Formula::equal(var(&x), lit(1))),
        ),
    );
    let multiple_of_q = Formula::exists(w.clone(), Formula::times(lit(q), var(&w), var(&x)));
    Formula::forall(x, Formula::implies(divisor, multiple_of_q))
}

fn exp_q_sq(q: u64, z: &str, names: &mut Namer) -> Formula {
    let x = names.fresh("s");
    let inner = exp_q(q, &x, names);
    Formula::exists(x.clone(), Formula::and(Formula::times(var(&x), var(&x), var(z)), inner))
}

/// `P(z) & A w. (z < w -> !P(w))` for a property builder `P`.
fn maximal(z: &str, names: &mut Namer, mut prop: impl FnMut(&str, &mut Namer) -> Formula) -> Formula {
    let here = prop(z, names);
    let w = names.fresh("u");
    let above = prop(&w, names);
    Formula::and(
        here,
        Formula::forall(w.clone(), Formula::implies(Formula::less(var(z), var(&w)), Formula::not(above))),
    )
}

/// Builds the power-of-`q` formulas with free variable `z`.
pub fn exp_family(q: u64) -> Result<PowerFamily> {
    require_prime(q)?;
    let mut names = Namer::default();
    Ok(PowerFamily {
        q,
        exp: exp_q(q, "z", &mut names),
        exp_sq: exp_q_sq(q, "z", &mut names),
        max_exp: maximal("z", &mut names, |v, n| exp_q(q, v, n)),
        max_exp_sq: maximal("z", &mut names, |v, n| exp_q_sq(q, v, n)),
    })
}

/// `PRIME & E z. (MAXEXP_q(z) & MAXEXP_q^2(z))`: for primes `p > q`, holds
/// iff `q^(2n) < p < q^(2n+1)` for some `n >= 0`.
pub fn psi_sentence(q: u64) -> Result<Sentence> {
    require_prime(q)?;
    let mut names = Namer::default();
    let both = Formula::and(
        maximal("z", &mut names, |v, n| exp_q(q, v, n)),
        maximal("z", &mut names, |v, n| exp_q_sq(q, v, n)),
    );
    Sentence::new(Formula::and(prime_sentence().into_formula(), Formula::exists("z", both)))
}

fn sup_exp(q: u64, z: &str, square: bool, names: &mut Namer) -> Result<Formula> {
    let (i, y, j, k, h) = (
        names.fresh("i"),
        names.fresh("y"),
        names.fresh("j"),
        names.fresh("k"),
        names.fresh("h"),
    );
    let below = Formula::and(Formula::less(var(&y), var(z)), exp_q(q, &y, names));
    let count = count_exact(var(&i), &y, below)?;
    let divisor = Formula::and(
        Formula::not(Formula::equal(var(&j), lit(1))),
        Formula::exists(k.clone(), Formula::times(var(&k), var(&j), var(&i))),
    );
    let divisible = Formula::exists(h.clone(), Formula::times(lit(q), var(&h), var(&j)));
    let mut bracket = vec![count, Formula::forall(j, Formula::implies(divisor, divisible))];
    if square {
        let r = names.fresh("k");
        bracket.push(Formula::exists(r.clone(), Formula::times(var(&r), var(&r), var(&i))));
    }
    Ok(Formula::and(exp_q(q, z, names), Formula::exists(i, Formula::and_all(bracket))))
}

fn sup_max(q: u64, z: &str, square: bool, names: &mut Namer) -> Result<Formula> {
    let here = sup_exp(q, z, square, names)?;
    let w = names.fresh("u");
    let above = sup_exp(q, &w, square, names)?;
    Ok(Formula::and(
        here,
        Formula::forall(w.clone(), Formula::implies(Formula::less(var(z), var(&w)), Formula::not(above))),
    ))
}

/// Builds the counting formulas over powers of `q` with free variable `z`.
/// The count of powers below `z` includes `q^0 = 1`.
pub fn supexp_family(q: u64) -> Result<SuperPowerFamily> {
    require_prime(q)?;
    let mut names = Namer::default();
    Ok(SuperPowerFamily {
        q,
        sup_exp: sup_exp(q, "z", false, &mut names)?,
        sup_exp_sq: sup_exp(q, "z", true, &mut names)?,
        sup_max_exp: sup_max(q, "z", false, &mut names)?,
        sup_max_exp_sq: sup_max(q, "z", true, &mut names)?,
    })
}

/// `PRIME & E z. (SUPMAXEXP_q(z) & SUPMAXEXP_q^2(z))`.
pub fn theta_sentence(q: u64) -> Result<Sentence> {
    require_prime(q)?;
    let mut names = Namer::default();
    let both = Formula::and(sup_max(q, "z", false, &mut names)?, sup_max(q, "z", true, &mut names)?);
    Sentence::new(Formula::and(prime_sentence().into_formula(), Formula::exists("z", both)))
}

/// A built sentence together with its parameters and validity range.
#[derive(Debug, Clone)]
pub struct SentenceFamily {
    pub name: String,
    pub params: Vec<(String, u64)>,
    /// Human-readable validity condition.
    pub precondition: String,
    /// Primes at or below this value lie outside the characterization.
    pub valid_above: u64,
    pub sentence: Sentence,
}

pub const FAMILY_NAMES: [&str; 7] = ["congruence", "cyclotomic", "modcount", "powres", "psi", "theta", "prime"];

/// Parameter names expected by each family, in order.
pub fn family_params(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "congruence" => &["a", "d"],
        "cyclotomic" => &["n"],
        "modcount" => &["r", "q"],
        "powres" => &["n", "d", "r"],
        "psi" | "theta" => &["q"],
        "prime" => &[],
        other => {
            return Err(Error::invalid(format!(
                "unknown family `{other}`; expected one of {}",
                FAMILY_NAMES.join(", ")
            )))
        }
    })
}

/// Builds a family by name from positional parameters.
pub fn build_family(name: &str, values: &[u64]) -> Result<SentenceFamily> {
    let names = family_params(name)?;
    if names.len() != values.len() {
        return Err(Error::invalid(format!(
            "family `{name}` takes {} parameter(s) ({}), got {}",
            names.len(),
            names.join(", "),
            values.len()
        )));
    }
    let (sentence, precondition, valid_above) = match (name, values) {
        ("congruence", &[a, d]) => (congruence_sentence(a, d)?, format!("p prime, p > {d}"), d),
        ("cyclotomic", &[n]) => (cyclotomic_sentence(n)?, format!("p prime not dividing {n}"), n),
        ("modcount", &[r, q]) => (mod_count_sentence(r, q)?, "p prime".to_string(), 0),
        ("powres", &[n, d, r]) => (power_residue_sentence(n, d, r)?, format!("p prime, p > {}", n * d), n * d),
        ("psi", &[q]) => (psi_sentence(q)?, format!("p prime, p > {q}"), q),
        ("theta", &[q]) => (theta_sentence(q)?, format!("p prime, p > {q}"), q),
        ("prime", &[]) => (prime_sentence(), "m >= 2".to_string(), 0),
        _ => unreachable!("arity checked above"),
    };
    Ok(SentenceFamily {
        name: name.to_string(),
        params: names.iter().map(|s| s.to_string()).zip(values.iter().copied()).collect(),
        precondition,
        valid_above,
        sentence,
    })
}
