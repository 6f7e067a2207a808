//! Semantics of ring-logic formulas in `Z_m`.
//!
//! Two evaluators are provided. [`eval_naive`] recurses over the universe
//! and is the reference; [`eval_fast`] computes satisfying relations
//! bottom-up. Counting quantifiers compare the true witness count, which
//! may equal `m`, against the residue value of the index term, so
//! `C>=(i) y. y = y` never holds for every `i` once the count is `m`.

mod fast;
mod naive;
mod relation;

pub use fast::{eval_fast, eval_fast_with, FastConfig};
pub use naive::{eval_naive, eval_term};
pub use relation::{Groups, SparseRelation};

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logic::{Formula, Sentence};

/// The ring `Z_m` with residues `0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingContext {
    m: u64,
    /// `floor((2^64 - 1) / m)`, for Barrett reduction.
    inv: u64,
}

impl RingContext {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("modulus must be at least 1"));
        }
        if m > u32::MAX as u64 {
            return Err(Error::invalid(format!("modulus {m} exceeds the supported range")));
        }
        Ok(RingContext { m, inv: u64::MAX / m })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn reduce(&self, k: u64) -> u64 {
        k % self.m
    }

    /// Operands must already be reduced.
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    /// Operands must already be reduced; the modulus fits in 32 bits so the
    /// product fits in 64.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let x = a * b;
        let q = ((x as u128 * self.inv as u128) >> 64) as u64;
        let mut r = x - q * self.m;
        while r >= self.m {
            r -= self.m;
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Pick by estimated cost.
    #[default]
    Auto,
    Naive,
    Fast,
    /// Run both and fail on disagreement.
    Both,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "naive" => Ok(Engine::Naive),
            "fast" => Ok(Engine::Fast),
            "both" => Ok(Engine::Both),
            other => Err(Error::invalid(format!("unknown engine `{other}`"))),
        }
    }
}

/// Naive work above which the fast evaluator is preferred.
const NAIVE_WORK_LIMIT: f64 = 50_000.0;

fn naive_work(ctx: &RingContext, f: &Formula) -> f64 {
    (ctx.modulus() as f64).powi(f.quantifier_depth() as i32)
}

/// Truth of a sentence in `ctx`.
pub fn eval_sentence(ctx: &RingContext, s: &Sentence) -> Result<bool> {
    eval_sentence_with(ctx, s, Engine::Auto, &FastConfig::default())
}

pub fn eval_sentence_with(ctx: &RingContext, s: &Sentence, engine: Engine, cfg: &FastConfig) -> Result<bool> {
    let f = s.formula();
    let naive = || eval_naive(ctx, f, &BTreeMap::new());
    let fast = || eval_fast_with(ctx, f, cfg).map(|r| r.truth());
    match engine {
        Engine::Naive => naive(),
        Engine::Fast => fast(),
        Engine::Auto if naive_work(ctx, f) <= NAIVE_WORK_LIMIT => naive(),
        Engine::Auto => fast(),
        Engine::Both => {
            let (a, b) = (naive()?, fast()?);
            if a != b {
                return Err(Error::EngineMismatch { modulus: ctx.modulus(), naive: a, fast: b });
            }
            Ok(a)
        }
    }
}

/// Satisfying assignments of a formula with free variables.
pub fn satisfying_relation(ctx: &RingContext, f: &Formula, engine: Engine, cfg: &FastConfig) -> Result<SparseRelation> {
    match engine {
        Engine::Naive => naive_relation(ctx, f),
        Engine::Fast | Engine::Auto => eval_fast_with(ctx, f, cfg),
        Engine::Both => {
            let (a, b) = (naive_relation(ctx, f)?, eval_fast_with(ctx, f, cfg)?);
            if a != b {
                return Err(Error::EngineMismatch { modulus: ctx.modulus(), naive: a.truth(), fast: b.truth() });
            }
            Ok(a)
        }
    }
}

fn naive_relation(ctx: &RingContext, f: &Formula) -> Result<SparseRelation> {
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    let m = ctx.modulus();
    let total = (m as f64).powi(vars.len() as i32);
    if total > FastConfig::default().tuple_budget as f64 {
        return Err(Error::ResourceLimit(format!(
            "enumerating {} free variables in Z_{m}",
            vars.len()
        )));
    }
    if vars.is_empty() {
        return Ok(SparseRelation::boolean(eval_naive(ctx, f, &BTreeMap::new())?));
    }
    let mut data = Vec::new();
    let mut digits = vec![0u64; vars.len()];
    loop {
        let env: BTreeMap<String, u64> = vars.iter().cloned().zip(digits.iter().copied()).collect();
        if eval_naive(ctx, f, &env)? {
            data.extend(digits.iter().map(|&d| d as u32));
        }
        let mut i = digits.len();
        loop {
            if i == 0 {
                return Ok(SparseRelation::from_rows(vars, data));
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < m {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;
    use crate::logic::random::FormulaGen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest::proptest! {
        #[test]
        fn ring_ops_match_wide_arithmetic(m in 1u64..=u32::MAX as u64, a in proptest::num::u64::ANY, b in proptest::num::u64::ANY) {
            let ctx = RingContext::new(m).unwrap();
            let (a, b) = (a % m, b % m);
            proptest::prop_assert_eq!(ctx.mul(a, b) as u128, a as u128 * b as u128 % m as u128);
            proptest::prop_assert_eq!(ctx.add(a, b) as u128, (a as u128 + b as u128) % m as u128);
        }
    }

    fn sentence(text: &str) -> Sentence {
        Sentence::new(parse(text).unwrap()).unwrap()
    }

    const PRIME: &str = "A x. !(x = 0) -> E y. x*y = 1";

    #[test]
    fn prime_sentence_small_rings() {
        let s = sentence(PRIME);
        for engine in [Engine::Naive, Engine::Fast, Engine::Auto] {
            let ev = |m| eval_sentence_with(&RingContext::new(m).unwrap(), &s, engine, &FastConfig::default()).unwrap();
            assert!(ev(5));
            assert!(!ev(6));
        }
    }

    #[test]
    fn prime_sentence_matches_primality() {
        let s = sentence(PRIME);
        for m in 2..400u64 {
            let ctx = RingContext::new(m).unwrap();
            let t = eval_sentence_with(&ctx, &s, Engine::Fast, &FastConfig::default()).unwrap();
            assert_eq!(t, crate::arith::is_prime_u64(m), "m={m}");
        }
    }

    #[test]
    fn empty_witness_in_trivial_ring() {
        let ctx = RingContext::new(1).unwrap();
        assert!(!eval_sentence(&ctx, &sentence("E x. x < x")).unwrap());
        assert!(RingContext::new(0).is_err());
    }

    #[test]
    fn engines_agree_on_random_sentences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let gen = FormulaGen::default();
        for i in 0..500 {
            let s = Sentence::new(gen.generate(&mut rng)).unwrap();
            let m = 1 + (i % 40) as u64;
            let ctx = RingContext::new(m).unwrap();
            let r = eval_sentence_with(&ctx, &s, Engine::Both, &FastConfig::default());
            assert!(r.is_ok(), "{s} in Z_{m}: {r:?}");
        }
    }

    #[test]
    fn engines_agree_on_open_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gen = FormulaGen { max_depth: 4, closed: false, max_literal: 6 };
        for i in 0..300 {
            let f = gen.generate(&mut rng);
            let m = 1 + (i % 13) as u64;
            let ctx = RingContext::new(m).unwrap();
            let a = naive_relation(&ctx, &f).unwrap();
            let b = eval_fast(&ctx, &f).unwrap();
            assert_eq!(a, b, "{f} in Z_{m}");
        }
    }

    #[test]
    fn majority_and_counting_edges() {
        let ev = |m, t: &str| eval_sentence_with(&RingContext::new(m).unwrap(), &sentence(t), Engine::Both, &FastConfig::default()).unwrap();
        assert!(!ev(4, "M y. y < 2"));
        assert!(ev(5, "M y. y < 3"));
        assert!(!ev(5, "E i. C=(i) y. y = y"));
        for m in 1..=30u64 {
            for i in 0..6u64.min(m) {
                for j in 0..=i {
                    let t = format!("C>=({i}) y. y < 3");
                    if ev(m, &t) {
                        assert!(ev(m, &format!("C>=({j}) y. y < 3")));
                    }
                }
            }
        }
    }
}
