use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Terms of the ring signature: `0`, `+`, `*`, variables and literals.
///
/// A literal `k` denotes `k mod m` in `Z_m`. `Lit(0)` is never produced by
/// the parser or [`Term::lit`]; zero is always the [`Term::Zero`] constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lit(u64),
    Zero,
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn lit(k: u64) -> Term {
        if k == 0 {
            Term::Zero
        } else {
            Term::Lit(k)
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Lit(_) | Term::Zero => {}
            Term::Add(a, b) | Term::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Lit(_) | Term::Zero => false,
            Term::Add(a, b) | Term::Mul(a, b) => a.mentions(var) || b.mentions(var),
        }
    }

    pub(crate) fn max_literal(&self) -> u64 {
        match self {
            Term::Lit(k) => *k,
            Term::Var(_) | Term::Zero => 0,
            Term::Add(a, b) | Term::Mul(a, b) => a.max_literal().max(b.max_literal()),
        }
    }
}

/// Ring-logic formulas with first-order, modular, majority and counting
/// quantifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Equal(Term, Term),
    Less(Term, Term),
    /// `TIMES(x, y, z)`: `x * y = z` as integers, without wraparound.
    IntTimes(Term, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    /// Number of witnesses is congruent to `r` modulo `q`.
    ModExists { r: u64, q: u64, var: String, body: Box<Formula> },
    /// Strictly more than half of the universe are witnesses.
    Majority(String, Box<Formula>),
    /// At least `count` witnesses.
    CountGe { count: Term, var: String, body: Box<Formula> },
}

impl Formula {
    pub fn equal(a: Term, b: Term) -> Formula {
        Formula::Equal(a, b)
    }

    pub fn less(a: Term, b: Term) -> Formula {
        Formula::Less(a, b)
    }

    pub fn times(a: Term, b: Term, c: Term) -> Formula {
        Formula::IntTimes(a, b, c)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn mod_exists(r: u64, q: u64, v: impl Into<String>, f: Formula) -> Result<Formula> {
        if q < 2 || r >= q {
            return Err(Error::Semantic(format!(
                "modular quantifier needs 0 <= r < q and q >= 2, got r={r}, q={q}"
            )));
        }
        Ok(Formula::ModExists { r, q, var: v.into(), body: Box::new(f) })
    }

    pub fn majority(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Majority(v.into(), Box::new(f))
    }

    pub fn count_ge(count: Term, v: impl Into<String>, f: Formula) -> Result<Formula> {
        let var = v.into();
        if count.mentions(&var) {
            return Err(Error::invalid(format!(
                "counting index may not mention the bound variable `{var}`"
            )));
        }
        Ok(Formula::CountGe { count, var, body: Box::new(f) })
    }

    /// Conjunction of a nonempty list; `0 = 0` for an empty one.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or_else(|| Formula::equal(Term::Zero, Term::Zero))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let add_term = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::Equal(a, b) | Formula::Less(a, b) => {
                add_term(a, bound, out);
                add_term(b, bound, out);
            }
            Formula::IntTimes(a, b, c) => {
                add_term(a, bound, out);
                add_term(b, bound, out);
                add_term(c, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f)
            | Formula::Forall(v, f)
            | Formula::Majority(v, f)
            | Formula::ModExists { var: v, body: f, .. } => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::CountGe { count, var, body } => {
                add_term(count, bound, out);
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Largest literal anywhere in the formula.
    pub fn max_literal(&self) -> u64 {
        match self {
            Formula::Equal(a, b) | Formula::Less(a, b) => a.max_literal().max(b.max_literal()),
            Formula::IntTimes(a, b, c) => a.max_literal().max(b.max_literal()).max(c.max_literal()),
            Formula::Not(f) => f.max_literal(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.max_literal().max(b.max_literal())
            }
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::Majority(_, f)
            | Formula::ModExists { body: f, .. } => f.max_literal(),
            Formula::CountGe { count, body, .. } => count.max_literal().max(body.max_literal()),
        }
    }

    /// Deepest nesting of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Equal(..) | Formula::Less(..) | Formula::IntTimes(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::Majority(_, f)
            | Formula::ModExists { body: f, .. }
            | Formula::CountGe { body: f, .. } => 1 + f.quantifier_depth(),
        }
    }

    /// Syntactic depth counting every node.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Equal(..) | Formula::Less(..) | Formula::IntTimes(..) => 1,
            Formula::Not(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::Majority(_, f)
            | Formula::ModExists { body: f, .. }
            | Formula::CountGe { body: f, .. } => 1 + f.depth(),
        }
    }
}

/// `(exactly count x) f`, written as `count_ge(count) & !count_ge(count + 1)`.
pub fn count_exact(count: Term, var: &str, body: Formula) -> Result<Formula> {
    let at_least = Formula::count_ge(count.clone(), var, body.clone())?;
    let more = Formula::count_ge(Term::add(count, Term::lit(1)), var, body)?;
    Ok(Formula::and(at_least, Formula::not(more)))
}

/// A formula checked to have no free variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence(Formula);

impl Sentence {
    pub fn new(f: Formula) -> Result<Sentence> {
        let free = f.free_vars();
        if !free.is_empty() {
            let names: Vec<_> = free.into_iter().collect();
            return Err(Error::Semantic(format!(
                "not a sentence; free variables: {}",
                names.join(", ")
            )));
        }
        Ok(Sentence(f))
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }
}

impl std::fmt::Display for Sentence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }
    fn y() -> Term {
        Term::var("y")
    }

    #[test]
    fn free_variables() {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(Formula::equal(x(), y()).free_vars(), set(&["x", "y"]));
        assert_eq!(Formula::exists("x", Formula::equal(x(), y())).free_vars(), set(&["y"]));
        let c = Formula::count_ge(Term::var("i"), "x", Formula::less(x(), Term::var("z"))).unwrap();
        assert_eq!(c.free_vars(), set(&["i", "z"]));
        // Inner binding shadows but the outer occurrence stays free.
        let f = Formula::and(Formula::equal(x(), x()), Formula::exists("x", Formula::equal(x(), x())));
        assert_eq!(f.free_vars(), set(&["x"]));
    }

    #[test]
    fn count_exact_desugars() {
        let body = Formula::equal(y(), y());
        let f = count_exact(Term::var("i"), "y", body.clone()).unwrap();
        let expected = Formula::and(
            Formula::count_ge(Term::var("i"), "y", body.clone()).unwrap(),
            Formula::not(
                Formula::count_ge(Term::add(Term::var("i"), Term::lit(1)), "y", body.clone()).unwrap(),
            ),
        );
        assert_eq!(f, expected);
        let z = count_exact(Term::Zero, "y", body.clone()).unwrap();
        assert!(matches!(z, Formula::And(..)));
        assert!(count_exact(Term::var("y"), "y", body).is_err());
    }

    #[test]
    fn modular_quantifier_validation() {
        assert!(Formula::mod_exists(1, 4, "z", Formula::equal(x(), x())).is_ok());
        assert!(Formula::mod_exists(4, 4, "z", Formula::equal(x(), x())).is_err());
        assert!(Formula::mod_exists(0, 1, "z", Formula::equal(x(), x())).is_err());
    }

    #[test]
    fn sentences_are_closed() {
        assert!(Sentence::new(Formula::equal(x(), x())).is_err());
        assert!(Sentence::new(Formula::exists("x", Formula::equal(x(), x()))).is_ok());
    }
}
