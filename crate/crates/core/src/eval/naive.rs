//! Reference evaluator: direct recursion over the universe.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{Formula, Term};

use super::RingContext;

/// Variable bindings, innermost last, all reduced modulo the ring size. Lookups scan from the end so inner
/// quantifiers shadow outer ones.
#[derive(Debug, Default, Clone)]
pub(crate) struct Env<'a> {
    slots: Vec<(&'a str, u64)>,
}

impl<'a> Env<'a> {
    pub(crate) fn from_pairs(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        Env { slots: pairs.into_iter().collect() }
    }

    /// Overwrites the values of the first `values.len()` slots.
    pub(crate) fn set_values(&mut self, values: &[u32]) {
        for (slot, &v) in self.slots.iter_mut().zip(values) {
            slot.1 = v as u64;
        }
    }

    fn get(&self, name: &str) -> Result<u64> {
        self.slots
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))
    }
}

pub fn eval_term(ctx: &RingContext, t: &Term, env: &BTreeMap<String, u64>) -> Result<u64> {
    let env = Env::from_pairs(env.iter().map(|(k, v)| (k.as_str(), ctx.reduce(*v))));
    term_value(ctx, t, &env)
}

pub(crate) fn term_value(ctx: &RingContext, t: &Term, env: &Env<'_>) -> Result<u64> {
    Ok(match t {
        Term::Var(v) => env.get(v)?,
        Term::Lit(k) => ctx.reduce(*k),
        Term::Zero => 0,
        Term::Add(a, b) => ctx.add(term_value(ctx, a, env)?, term_value(ctx, b, env)?),
        Term::Mul(a, b) => ctx.mul(term_value(ctx, a, env)?, term_value(ctx, b, env)?),
    })
}

/// Truth of `f` in `Z_m` under `env`, which must bind every free variable.
pub fn eval_naive(ctx: &RingContext, f: &Formula, env: &BTreeMap<String, u64>) -> Result<bool> {
    let mut env = Env::from_pairs(env.iter().map(|(k, v)| (k.as_str(), ctx.reduce(*v))));
    holds(ctx, f, &mut env)
}

pub(crate) fn holds<'a>(ctx: &RingContext, f: &'a Formula, env: &mut Env<'a>) -> Result<bool> {
    let m = ctx.modulus();
    Ok(match f {
        Formula::Equal(a, b) => term_value(ctx, a, env)? == term_value(ctx, b, env)?,
        Formula::Less(a, b) => term_value(ctx, a, env)? < term_value(ctx, b, env)?,
        Formula::IntTimes(a, b, c) => {
            let (x, y, z) = (term_value(ctx, a, env)?, term_value(ctx, b, env)?, term_value(ctx, c, env)?);
            x as u128 * y as u128 == z as u128
        }
        Formula::Not(g) => !holds(ctx, g, env)?,
        Formula::And(a, b) => holds(ctx, a, env)? && holds(ctx, b, env)?,
        Formula::Or(a, b) => holds(ctx, a, env)? || holds(ctx, b, env)?,
        Formula::Implies(a, b) => !holds(ctx, a, env)? || holds(ctx, b, env)?,
        Formula::Exists(v, g) => {
            let mut found = false;
            for x in 0..m {
                if with_binding(ctx, v, x, g, env)? {
                    found = true;
                    break;
                }
            }
            found
        }
        Formula::Forall(v, g) => {
            let mut all = true;
            for x in 0..m {
                if !with_binding(ctx, v, x, g, env)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Formula::ModExists { r, q, var, body } => count(ctx, var, body, env)? % q == *r,
        Formula::Majority(v, g) => 2 * count(ctx, v, g, env)? > m,
        Formula::CountGe { count: t, var, body } => {
            let threshold = term_value(ctx, t, env)?;
            count(ctx, var, body, env)? >= threshold
        }
    })
}

fn with_binding<'a>(
    ctx: &RingContext,
    var: &'a str,
    value: u64,
    body: &'a Formula,
    env: &mut Env<'a>,
) -> Result<bool> {
    env.slots.push((var, value));
    let out = holds(ctx, body, env);
    env.slots.pop();
    out
}

fn count<'a>(ctx: &RingContext, var: &'a str, body: &'a Formula, env: &mut Env<'a>) -> Result<u64> {
    let mut n = 0;
    for x in 0..ctx.modulus() {
        if with_binding(ctx, var, x, body, env)? {
            n += 1;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;

    fn truth(m: u64, text: &str) -> bool {
        eval_naive(&RingContext::new(m).unwrap(), &parse(text).unwrap(), &BTreeMap::new()).unwrap()
    }

    #[test]
    fn square_roots_of_minus_one() {
        assert!(truth(5, "E x. x*x + 1 = 0"));
        assert!(!truth(7, "E x. x*x + 1 = 0"));
    }

    #[test]
    fn strict_majority() {
        assert!(truth(7, "M y. y < 4"));
        assert!(!truth(4, "M y. y < 2"));
        assert!(truth(5, "M y. y < 3"));
    }

    #[test]
    fn modular_count_of_universe() {
        for m in 1..=60u64 {
            for q in 2..=8u64 {
                let hits: Vec<u64> = (0..q)
                    .filter(|r| truth(m, &format!("E[{r},{q}] x. x = x")))
                    .collect();
                assert_eq!(hits, vec![m % q], "m={m} q={q}");
            }
        }
    }

    #[test]
    fn counting_reaches_universe_size() {
        // Five witnesses in Z_5, but index terms only reach 4.
        assert!(truth(5, "C>=(4) y. y = y"));
        assert!(truth(5, "C=(0) y. !(y = y)"));
        assert!(!truth(5, "E i. C=(i) y. y = y"));
        assert!(truth(5, "E i. C=(i) y. y < 3"));
        // The successor index wraps: C=(4) in Z_5 compares against 4 and 0.
        assert!(!truth(5, "C=(4) y. y < 4"));
    }

    #[test]
    fn literals_reduce_and_times_does_not_wrap() {
        assert!(truth(5, "7 = 2"));
        assert!(truth(10, "TIMES(3, 3, 9)"));
        assert!(!truth(10, "E z. TIMES(4, 3, z)"));
        assert!(truth(10, "E z. 4 * 3 = z"));
    }

    #[test]
    fn single_element_ring() {
        assert!(!truth(1, "E x. x < x"));
        assert!(truth(1, "A x. x = 0"));
        assert!(truth(1, "1 = 0"));
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let ctx = RingContext::new(3).unwrap();
        let err = eval_naive(&ctx, &parse("x = 1").unwrap(), &BTreeMap::new()).unwrap_err();
        assert_eq!(err, Error::UnboundVariable("x".into()));
    }
}
