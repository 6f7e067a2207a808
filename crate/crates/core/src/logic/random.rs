//! Seeded generator of well-formed random formulas, used for round-trip and
//! engine-equivalence checks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::ast::{Formula, Term};

const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, Copy)]
pub struct FormulaGen {
    /// Maximum syntactic depth, counting every formula node.
    pub max_depth: usize,
    /// Restrict atoms to bound variables so the result is a sentence.
    pub closed: bool,
    /// Largest literal produced.
    pub max_literal: u64,
}

impl Default for FormulaGen {
    fn default() -> Self {
        FormulaGen { max_depth: 5, closed: true, max_literal: 5 }
    }
}

impl FormulaGen {
    pub fn generate<R: Rng>(&self, rng: &mut R) -> Formula {
        let scope: Vec<&'static str> = if self.closed { Vec::new() } else { VARS.to_vec() };
        self.formula(rng, self.max_depth.max(1), &scope)
    }

    fn term<R: Rng>(&self, rng: &mut R, depth: usize, scope: &[&'static str]) -> Term {
        let leaf = depth <= 1 || rng.gen_bool(0.55);
        if leaf {
            if !scope.is_empty() && rng.gen_bool(0.6) {
                return Term::var(*scope.choose(rng).expect("nonempty"));
            }
            return Term::lit(rng.gen_range(0..=self.max_literal));
        }
        let a = self.term(rng, depth - 1, scope);
        let b = self.term(rng, depth - 1, scope);
        if rng.gen_bool(0.5) {
            Term::add(a, b)
        } else {
            Term::mul(a, b)
        }
    }

    fn atom<R: Rng>(&self, rng: &mut R, scope: &[&'static str]) -> Formula {
        match rng.gen_range(0..3) {
            0 => Formula::equal(self.term(rng, 3, scope), self.term(rng, 3, scope)),
            1 => Formula::less(self.term(rng, 2, scope), self.term(rng, 2, scope)),
            _ => Formula::times(self.term(rng, 1, scope), self.term(rng, 1, scope), self.term(rng, 2, scope)),
        }
    }

    fn formula<R: Rng>(&self, rng: &mut R, depth: usize, scope: &[&'static str]) -> Formula {
        if depth <= 1 {
            return self.atom(rng, scope);
        }
        let d = depth - 1;
        match rng.gen_range(0..12) {
            0 => self.atom(rng, scope),
            1 => Formula::not(self.formula(rng, d, scope)),
            2 => Formula::and(self.formula(rng, d, scope), self.formula(rng, d, scope)),
            3 => Formula::or(self.formula(rng, d, scope), self.formula(rng, d, scope)),
            4 => Formula::implies(self.formula(rng, d, scope), self.formula(rng, d, scope)),
            k => {
                let v = *VARS.choose(rng).expect("nonempty");
                let mut inner: Vec<&'static str> = scope.iter().copied().filter(|s| *s != v).collect();
                inner.push(v);
                let body = self.formula(rng, d, &inner);
                match k {
                    5 | 6 => Formula::exists(v, body),
                    7 | 8 => Formula::forall(v, body),
                    9 => {
                        let q = rng.gen_range(2..=4);
                        let r = rng.gen_range(0..q);
                        Formula::mod_exists(r, q, v, body).expect("r < q")
                    }
                    10 => Formula::majority(v, body),
                    _ => {
                        let outer: Vec<&'static str> =
                            scope.iter().copied().filter(|s| *s != v).collect();
                        let count = if !outer.is_empty() && rng.gen_bool(0.5) {
                            let base = Term::var(*outer.choose(rng).expect("nonempty"));
                            if rng.gen_bool(0.3) {
                                Term::add(base, Term::lit(1))
                            } else {
                                base
                            }
                        } else {
                            Term::lit(rng.gen_range(0..=self.max_literal))
                        };
                        Formula::count_ge(count, v, body).expect("index avoids bound var")
                    }
                }
            }
        }
    }
}
