//! Fully parenthesized concrete syntax. The output of `Display` always
//! parses back to the same tree.

use std::fmt;

use super::ast::{Formula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Lit(k) => write!(f, "{k}"),
            Term::Zero => write!(f, "0"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Equal(a, b) => write!(f, "({a} = {b})"),
            Formula::Less(a, b) => write!(f, "({a} < {b})"),
            Formula::IntTimes(a, b, c) => write!(f, "TIMES({a}, {b}, {c})"),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Exists(v, g) => write!(f, "(E {v}. {g})"),
            Formula::Forall(v, g) => write!(f, "(A {v}. {g})"),
            Formula::ModExists { r, q, var, body } => write!(f, "(E[{r},{q}] {var}. {body})"),
            Formula::Majority(v, g) => write!(f, "(M {v}. {g})"),
            Formula::CountGe { count, var, body } => write!(f, "(C>=({count}) {var}. {body})"),
        }
    }
}
