//! Bottom-up relational evaluator.
//!
//! Every subformula evaluates to a description of its satisfying set over
//! its free variables: an explicit sorted relation, the complement of one,
//! or a lazy test (atoms, counting quantifiers with a variable index) that
//! is only applied once neighbouring conjuncts have bound its variables.
//! Conjunctions are planned greedily: filters first, then the cheapest
//! join or extension. Negation flips between a relation and its complement
//! without materializing anything.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::arith::{gcd_u64, inverse_mod};
use crate::error::{Error, Result};
use crate::logic::{Formula, Term};

use super::naive::{holds, term_value, Env};
use super::relation::{Groups, SparseRelation};
use super::RingContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FastConfig {
    /// Largest intermediate relation, in tuples.
    pub tuple_budget: usize,
    /// Complements wider than this many columns are enumerated through the
    /// reference evaluator instead.
    pub complement_width_cap: usize,
}

impl Default for FastConfig {
    fn default() -> Self {
        FastConfig { tuple_budget: 50_000_000, complement_width_cap: 3 }
    }
}

/// Satisfying relation of `f` in `ctx`, over the free variables of `f`.
pub fn eval_fast(ctx: &RingContext, f: &Formula) -> Result<SparseRelation> {
    eval_fast_with(ctx, f, &FastConfig::default())
}

pub fn eval_fast_with(ctx: &RingContext, f: &Formula, cfg: &FastConfig) -> Result<SparseRelation> {
    let engine = Engine { ctx, cfg, memo: RefCell::new(HashMap::new()) };
    let sat = engine.eval(f)?;
    engine.materialize(&sat)
}

enum Repr<'f> {
    Pos(SparseRelation),
    Neg(SparseRelation),
    /// Tested per assignment by the reference evaluator (atoms).
    Lazy,
    /// `count >= index` with a per-group count table.
    Count {
        rest: Vec<String>,
        counts: HashMap<Vec<u32>, u64>,
        absent: u64,
        index: &'f Term,
    },
}

struct Sat<'f> {
    /// The formula (or its negation, when `negated`) this value describes.
    origin: &'f Formula,
    negated: bool,
    /// Free variables of `origin`, sorted.
    vars: Vec<String>,
    repr: Repr<'f>,
}

impl<'f> Sat<'f> {
    fn relation(origin: &'f Formula, negated: bool, rel: SparseRelation) -> Self {
        Sat { origin, negated, vars: rel.vars().to_vec(), repr: Repr::Pos(rel) }
    }

    fn negate(self) -> Self {
        let repr = match self.repr {
            Repr::Pos(r) if r.arity() == 0 => Repr::Pos(SparseRelation::boolean(!r.truth())),
            Repr::Pos(r) => Repr::Neg(r),
            Repr::Neg(r) => Repr::Pos(r),
            other => other,
        };
        Sat { origin: self.origin, negated: !self.negated, vars: self.vars, repr }
    }
}

struct Engine<'c> {
    ctx: &'c RingContext,
    cfg: &'c FastConfig,
    /// Quantified subformulas already evaluated, keyed up to renaming.
    memo: RefCell<HashMap<String, (bool, SparseRelation)>>,
}

/// Text of `f` with bound variables numbered by binding order and free
/// variables by first occurrence, plus the free variables in that order.
fn canonical(f: &Formula) -> (String, Vec<String>) {
    struct Walk {
        out: String,
        scope: Vec<(String, usize)>,
        bound: usize,
        free: Vec<String>,
    }
    impl Walk {
        fn name(&mut self, v: &str) {
            if let Some((_, k)) = self.scope.iter().rev().find(|(n, _)| n == v) {
                let _ = write!(self.out, "#{k}");
            } else {
                let i = match self.free.iter().position(|n| n == v) {
                    Some(i) => i,
                    None => {
                        self.free.push(v.to_string());
                        self.free.len() - 1
                    }
                };
                let _ = write!(self.out, "${i}");
            }
        }
        fn term(&mut self, t: &Term) {
            match t {
                Term::Var(v) => self.name(v),
                Term::Lit(k) => {
                    let _ = write!(self.out, "{k}");
                }
                Term::Zero => self.out.push('0'),
                Term::Add(a, b) | Term::Mul(a, b) => {
                    self.out.push(if matches!(t, Term::Add(..)) { '+' } else { '*' });
                    self.out.push('(');
                    self.term(a);
                    self.out.push(',');
                    self.term(b);
                    self.out.push(')');
                }
            }
        }
        fn bind(&mut self, tag: &str, v: &str, body: &Formula) {
            self.bound += 1;
            let _ = write!(self.out, "{tag}#{}(", self.bound);
            self.scope.push((v.to_string(), self.bound));
            self.formula(body);
            self.scope.pop();
            self.out.push(')');
        }
        fn formula(&mut self, f: &Formula) {
            match f {
                Formula::Equal(a, b) | Formula::Less(a, b) => {
                    self.out.push_str(if matches!(f, Formula::Equal(..)) { "=(" } else { "<(" });
                    self.term(a);
                    self.out.push(',');
                    self.term(b);
                    self.out.push(')');
                }
                Formula::IntTimes(a, b, c) => {
                    self.out.push_str("T(");
                    self.term(a);
                    self.out.push(',');
                    self.term(b);
                    self.out.push(',');
                    self.term(c);
                    self.out.push(')');
                }
                Formula::Not(g) => {
                    self.out.push('!');
                    self.formula(g);
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    self.out.push_str(match f {
                        Formula::And(..) => "&(",
                        Formula::Or(..) => "|(",
                        _ => ">(",
                    });
                    self.formula(a);
                    self.out.push(',');
                    self.formula(b);
                    self.out.push(')');
                }
                Formula::Exists(v, g) => self.bind("E", v, g),
                Formula::Forall(v, g) => self.bind("A", v, g),
                Formula::ModExists { r, q, var, body } => self.bind(&format!("E[{r},{q}]"), var, body),
                Formula::Majority(v, g) => self.bind("M", v, g),
                Formula::CountGe { count, var, body } => {
                    self.out.push_str("C[");
                    self.term(count);
                    self.out.push(']');
                    self.bind("", var, body);
                }
            }
        }
    }
    let mut w = Walk { out: String::new(), scope: Vec::new(), bound: 0, free: Vec::new() };
    w.formula(f);
    (w.out, w.free)
}

fn sorted_vars(set: BTreeSet<String>) -> Vec<String> {
    set.into_iter().collect()
}

/// Degree of `var` in a term read as a polynomial.
fn degree_in(t: &Term, var: &str) -> usize {
    match t {
        Term::Var(v) => usize::from(v == var),
        Term::Lit(_) | Term::Zero => 0,
        Term::Add(a, b) => degree_in(a, var).max(degree_in(b, var)),
        Term::Mul(a, b) => degree_in(a, var) + degree_in(b, var),
    }
}

fn bare_var(t: &Term) -> Option<&str> {
    match t {
        Term::Var(v) => Some(v.as_str()),
        _ => None,
    }
}

impl<'c> Engine<'c> {
    fn m(&self) -> u64 {
        self.ctx.modulus()
    }

    fn budget(&self) -> usize {
        self.cfg.tuple_budget
    }

    fn over_budget(&self, origin: &Formula, what: &str) -> Error {
        let mut text = origin.to_string();
        if text.len() > 160 {
            text.truncate(157);
            text.push_str("...");
        }
        Error::ResourceLimit(format!(
            "{what} for subformula `{text}` in Z_{} exceeds the budget of {} tuples",
            self.m(),
            self.budget()
        ))
    }

    fn eval<'f>(&self, f: &'f Formula) -> Result<Sat<'f>> {
        let quantified = match f {
            Formula::Exists(..) | Formula::Forall(..) | Formula::ModExists { .. } | Formula::Majority(..) => true,
            Formula::CountGe { count, .. } => count.vars().is_empty(),
            _ => false,
        };
        if !quantified {
            return self.eval_node(f);
        }
        let (key, free) = canonical(f);
        if let Some((neg, rel)) = self.memo.borrow().get(&key) {
            let rel = rel.renamed(|c| free[c[1..].parse::<usize>().expect("canonical column")].clone());
            let vars = rel.vars().to_vec();
            let repr = if *neg { Repr::Neg(rel) } else { Repr::Pos(rel) };
            return Ok(Sat { origin: f, negated: false, vars, repr });
        }
        let sat = self.eval_node(f)?;
        let stored = match &sat.repr {
            Repr::Pos(r) => Some((false, r)),
            Repr::Neg(r) => Some((true, r)),
            _ => None,
        };
        if let Some((neg, rel)) = stored {
            let canon = rel.renamed(|c| format!("${}", free.iter().position(|v| v == c).expect("free column")));
            self.memo.borrow_mut().insert(key, (neg, canon));
        }
        Ok(sat)
    }

    fn eval_node<'f>(&self, f: &'f Formula) -> Result<Sat<'f>> {
        match f {
            Formula::Equal(..) | Formula::Less(..) | Formula::IntTimes(..) => {
                let vars = sorted_vars(f.free_vars());
                if vars.is_empty() {
                    let truth = holds(self.ctx, f, &mut Env::default())?;
                    return Ok(Sat::relation(f, false, SparseRelation::boolean(truth)));
                }
                Ok(Sat { origin: f, negated: false, vars, repr: Repr::Lazy })
            }
            Formula::Not(g) => Ok(self.eval(g)?.negate()),
            Formula::And(..) => {
                let mut parts = Vec::new();
                flatten_and(f, &mut parts);
                let items = parts.into_iter().map(|p| self.eval(p)).collect::<Result<Vec<_>>>()?;
                self.conjoin(items, f, false)
            }
            Formula::Or(a, b) => {
                let items = vec![self.eval(a)?.negate(), self.eval(b)?.negate()];
                Ok(self.conjoin(items, f, true)?.negate())
            }
            Formula::Implies(a, b) => {
                let items = vec![self.eval(a)?, self.eval(b)?.negate()];
                Ok(self.conjoin(items, f, true)?.negate())
            }
            Formula::Exists(v, g) => self.quantify(f, v, self.eval(g)?, |c, _| c >= 1),
            Formula::Forall(v, g) => self.quantify(f, v, self.eval(g)?, |c, m| c == m),
            Formula::ModExists { r, q, var, body } => {
                let (r, q) = (*r, *q);
                self.quantify(f, var, self.eval(body)?, move |c, _| c % q == r)
            }
            Formula::Majority(v, g) => self.quantify(f, v, self.eval(g)?, |c, m| 2 * c > m),
            Formula::CountGe { count, var, body } => {
                let body_sat = self.eval(body)?;
                if count.vars().is_empty() {
                    let threshold = term_value(self.ctx, count, &Env::default())?;
                    return self.quantify(f, var, body_sat, move |c, _| c >= threshold);
                }
                let (rel, complemented) = self.to_relational(&body_sat)?;
                let (groups, absent) = self.group(&rel, complemented, var);
                let counts = groups.iter().map(|(k, c)| (k.to_vec(), c)).collect();
                Ok(Sat {
                    origin: f,
                    negated: false,
                    vars: sorted_vars(f.free_vars()),
                    repr: Repr::Count { rest: groups.rest, counts, absent, index: count },
                })
            }
        }
    }

    /// Witness counts of `var` per assignment of the remaining columns.
    /// Returns the groups that appear in `rel` and the count shared by
    /// every group that does not appear.
    fn group(&self, rel: &SparseRelation, complemented: bool, var: &str) -> (Groups, u64) {
        let m = self.m();
        if rel.column(var).is_some() {
            let mut groups = rel.group_counts(var);
            if complemented {
                groups.counts.iter_mut().for_each(|c| *c = m - *c);
            }
            (groups, if complemented { m } else { 0 })
        } else {
            // Vacuous quantification: all or nothing per assignment.
            let inside = if complemented { 0 } else { m };
            let groups = Groups {
                rest: rel.vars().to_vec(),
                keys: rel.rows().flatten().copied().collect(),
                counts: vec![inside; rel.len()],
            };
            (groups, m - inside)
        }
    }

    fn quantify<'f>(
        &self,
        origin: &'f Formula,
        var: &str,
        body: Sat<'f>,
        pred: impl Fn(u64, u64) -> bool,
    ) -> Result<Sat<'f>> {
        let m = self.m();
        let (rel, complemented) = self.to_relational(&body)?;
        let (groups, absent) = self.group(&rel, complemented, var);
        let rest = groups.rest.clone();
        let absent_truth = pred(absent, m);
        let mut data = Vec::new();
        let mut exceptional = 0usize;
        for (key, c) in groups.iter() {
            if pred(c, m) != absent_truth {
                data.extend_from_slice(key);
                exceptional += 1;
            }
        }
        if rest.is_empty() {
            let truth = if exceptional > 0 { !absent_truth } else { absent_truth };
            return Ok(Sat::relation(origin, false, SparseRelation::boolean(truth)));
        }
        let rel = SparseRelation::from_rows(rest.clone(), data);
        let repr = if absent_truth { Repr::Neg(rel) } else { Repr::Pos(rel) };
        Ok(Sat { origin, negated: false, vars: rest, repr })
    }

    /// Explicit relation, flagged when it stands for its complement.
    fn to_relational(&self, sat: &Sat<'_>) -> Result<(SparseRelation, bool)> {
        match &sat.repr {
            Repr::Pos(r) => Ok((r.clone(), false)),
            Repr::Neg(r) => Ok((r.clone(), true)),
            Repr::Lazy if sat.negated => {
                let positive = Sat { origin: sat.origin, negated: false, vars: sat.vars.clone(), repr: Repr::Lazy };
                Ok((self.materialize(&positive)?, true))
            }
            _ => Ok((self.materialize(sat)?, false)),
        }
    }

    fn materialize(&self, sat: &Sat<'_>) -> Result<SparseRelation> {
        match &sat.repr {
            Repr::Pos(r) => Ok(r.clone()),
            Repr::Neg(r) if r.arity() <= self.cfg.complement_width_cap => r
                .complement(self.m(), self.budget())
                .map_err(|_| self.over_budget(sat.origin, "complement")),
            Repr::Neg(_) => {
                // Too wide to complement: enumerate through the reference evaluator.
                let lazy = Sat { origin: sat.origin, negated: sat.negated, vars: sat.vars.clone(), repr: Repr::Lazy };
                self.extend(&SparseRelation::boolean(true), &lazy)
            }
            Repr::Lazy | Repr::Count { .. } => self.extend(&SparseRelation::boolean(true), sat),
        }
    }

    fn conjoin<'f>(&self, items: Vec<Sat<'f>>, origin: &'f Formula, negated: bool) -> Result<Sat<'f>> {
        let all_vars: BTreeSet<String> = items.iter().flat_map(|s| s.vars.iter().cloned()).collect();
        let all_vars = sorted_vars(all_vars);
        let empty = || Sat::relation(origin, negated, SparseRelation::empty(all_vars.clone()));

        let mut pending: Vec<Sat<'f>> = Vec::new();
        for item in items {
            match &item.repr {
                Repr::Pos(r) if r.is_empty() => return Ok(empty()),
                Repr::Pos(r) if r.arity() == 0 => {}
                _ => pending.push(item),
            }
        }
        if pending.is_empty() {
            return Ok(Sat::relation(origin, negated, SparseRelation::boolean(true)));
        }

        // A conjunction of complements over identical columns stays a complement.
        if pending.iter().all(|s| matches!(s.repr, Repr::Neg(_)))
            && pending.iter().all(|s| s.vars == pending[0].vars)
        {
            let mut acc: Option<SparseRelation> = None;
            for s in &pending {
                if let Repr::Neg(r) = &s.repr {
                    acc = Some(match acc {
                        None => r.clone(),
                        Some(a) => a.union(r),
                    });
                }
            }
            let rel = acc.expect("nonempty");
            return Ok(Sat { origin, negated, vars: rel.vars().to_vec(), repr: Repr::Neg(rel) });
        }

        let unit = SparseRelation::boolean(true);
        let mut cur = {
            let (idx, _) = pending
                .iter()
                .enumerate()
                .map(|(i, s)| (i, self.seed_cost(s)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            let seed = pending.swap_remove(idx);
            match seed.repr {
                Repr::Pos(r) => r,
                _ => {
                    if self.extension_cost(&unit, &seed) > self.budget() as f64 {
                        return Err(self.over_budget(seed.origin, "materialization"));
                    }
                    self.materialize(&seed)?
                }
            }
        };

        while !pending.is_empty() {
            if cur.is_empty() {
                return Ok(empty());
            }
            // Filters over already bound columns.
            let mut i = 0;
            let mut filtered = false;
            while i < pending.len() {
                if pending[i].vars.iter().all(|v| cur.column(v).is_some()) {
                    let item = pending.swap_remove(i);
                    cur = self.filter(&cur, &item)?;
                    filtered = true;
                } else {
                    i += 1;
                }
            }
            if filtered || pending.is_empty() {
                continue;
            }
            let (idx, cost) = pending
                .iter()
                .enumerate()
                .map(|(i, s)| (i, self.step_cost(&cur, s)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            let item = pending.swap_remove(idx);
            if cost > self.budget() as f64 {
                return Err(self.over_budget(item.origin, "intermediate relation"));
            }
            cur = match &item.repr {
                Repr::Pos(r) => cur.join(r, self.budget()).map_err(|_| self.over_budget(item.origin, "join"))?,
                Repr::Neg(_) => {
                    let r = self.materialize(&item)?;
                    cur.join(&r, self.budget()).map_err(|_| self.over_budget(item.origin, "join"))?
                }
                _ => self.extend(&cur, &item)?,
            };
        }
        debug_assert_eq!(cur.vars(), all_vars.as_slice());
        Ok(Sat { origin, negated, vars: all_vars, repr: Repr::Pos(cur) })
    }

    fn seed_cost(&self, s: &Sat<'_>) -> f64 {
        let m = self.m() as f64;
        match &s.repr {
            Repr::Pos(r) => r.len() as f64,
            Repr::Neg(r) => m.powi(r.arity() as i32) - r.len() as f64,
            _ => self.extension_cost(&SparseRelation::boolean(true), s),
        }
    }

    fn step_cost(&self, cur: &SparseRelation, s: &Sat<'_>) -> f64 {
        let m = self.m() as f64;
        let n = cur.len() as f64;
        match &s.repr {
            Repr::Pos(r) => {
                let shared = s.vars.iter().any(|v| cur.column(v).is_some());
                if shared {
                    n + r.len() as f64
                } else {
                    n * r.len() as f64
                }
            }
            Repr::Neg(r) => {
                let size = m.powi(r.arity() as i32) - r.len() as f64;
                let shared = s.vars.iter().any(|v| cur.column(v).is_some());
                size + if shared { n } else { n * size }
            }
            _ => self.extension_cost(cur, s),
        }
    }

    fn extra_vars(&self, cur: &SparseRelation, s: &Sat<'_>) -> Vec<String> {
        s.vars.iter().filter(|v| cur.column(v).is_none()).cloned().collect()
    }

    /// Estimated number of candidates generated by [`Self::extend`].
    fn extension_cost(&self, cur: &SparseRelation, s: &Sat<'_>) -> f64 {
        let m = self.m() as f64;
        let n = cur.len().max(1) as f64;
        let extra = self.extra_vars(cur, s);
        let k = extra.len() as i32;
        match self.generator(s, &extra) {
            Generator::Enumerate => n * m.powi(k),
            Generator::Solve { .. } => n * m.powi(k - 1),
            Generator::Range { .. } => n * m.powi(k) / 2.0,
            Generator::Times { args, free_args } => {
                let free = |i: usize| free_args.iter().any(|(j, _)| *j == i);
                // Average number of solutions per row; a bound factor is
                // typically a literal or ranges over the whole ring.
                let spread = |t: &Term| match t {
                    Term::Lit(a) => (m / *a as f64).max(1.0),
                    _ => m.ln() + 1.0,
                };
                let per = match (free(0), free(1), free(2)) {
                    (false, false, _) => 1.0,
                    (true, false, false) | (false, true, false) => 1.0,
                    (true, false, true) => spread(args[1]),
                    (false, true, true) => spread(args[0]),
                    (true, true, false) => m.sqrt() + 2.0,
                    (true, true, true) => m * (m.ln() + 1.0),
                };
                n * per
            }
            Generator::CountKeys { counts, .. } => n * counts.len().max(1) as f64,
        }
    }

    fn generator<'s>(&self, s: &'s Sat<'_>, extra: &[String]) -> Generator<'s> {
        if s.negated || extra.is_empty() {
            return Generator::Enumerate;
        }
        let in_extra = |v: &str| extra.iter().any(|e| e == v);
        match (&s.repr, s.origin) {
            (Repr::Lazy, Formula::Equal(a, b)) => {
                for v in extra {
                    let (da, db) = (degree_in(a, v), degree_in(b, v));
                    if da.max(db) == 1 {
                        return Generator::Solve { var: v.clone(), lhs: a, rhs: b };
                    }
                }
                Generator::Enumerate
            }
            (Repr::Lazy, Formula::Less(a, b)) => {
                if let Some(v) = bare_var(a).filter(|v| in_extra(v) && !b.mentions(v)) {
                    return Generator::Range { var: v.to_string(), bound: b, below: true };
                }
                if let Some(v) = bare_var(b).filter(|v| in_extra(v) && !a.mentions(v)) {
                    return Generator::Range { var: v.to_string(), bound: a, below: false };
                }
                Generator::Enumerate
            }
            (Repr::Lazy, Formula::IntTimes(a, b, c)) => {
                let args = [a, b, c];
                let mut free_args = Vec::new();
                for (i, t) in args.iter().enumerate() {
                    match bare_var(t) {
                        Some(v) if in_extra(v) => free_args.push((i, v.to_string())),
                        _ if extra.iter().any(|e| t.mentions(e)) => return Generator::Enumerate,
                        _ => {}
                    }
                }
                Generator::Times { args, free_args }
            }
            (Repr::Count { rest, counts, absent, index }, _)
                if extra.iter().all(|e| rest.contains(e)) && !extra.iter().any(|e| index.mentions(e)) =>
            {
                Generator::CountKeys { rest, counts, absent: *absent, index }
            }
            _ => Generator::Enumerate,
        }
    }

    /// Per-assignment test of a lazy item against full rows over `cols`.
    fn tester<'s>(&'s self, s: &'s Sat<'s>, cols: &'s [String]) -> Tester<'s> {
        let rest_pos: Vec<usize> = match &s.repr {
            Repr::Count { rest, .. } => rest
                .iter()
                .map(|r| cols.iter().position(|c| c == r).expect("bound rest column"))
                .collect(),
            _ => Vec::new(),
        };
        Tester {
            engine: self,
            sat: s,
            cols,
            key: RefCell::new(vec![0; rest_pos.len()]),
            rest_pos,
            env: RefCell::new(Env::from_pairs(cols.iter().map(|c| (c.as_str(), 0)))),
        }
    }

    fn filter(&self, cur: &SparseRelation, s: &Sat<'_>) -> Result<SparseRelation> {
        match &s.repr {
            Repr::Pos(r) => Ok(cur.semijoin(r, false)),
            Repr::Neg(r) => Ok(cur.semijoin(r, true)),
            _ => {
                let cols = cur.vars().to_vec();
                let tester = self.tester(s, &cols);
                let mut data = Vec::new();
                for row in cur.rows() {
                    if tester.test(row)? {
                        data.extend_from_slice(row);
                    }
                }
                if cols.is_empty() {
                    let truth = cur.truth() && tester.test(&[])?;
                    return Ok(SparseRelation::boolean(truth));
                }
                Ok(SparseRelation::from_rows(cols, data))
            }
        }
    }

    /// Extends every row of `cur` with values for the variables of `s` it
    /// does not bind yet, keeping the combinations that satisfy `s`.
    fn extend(&self, cur: &SparseRelation, s: &Sat<'_>) -> Result<SparseRelation> {
        let extra = self.extra_vars(cur, s);
        let mut cols: Vec<String> = cur.vars().to_vec();
        cols.extend(extra.iter().cloned());
        let base = cur.arity();
        let k = extra.len();
        let m = self.m();
        let gen = self.generator(s, &extra);
        let tester = self.tester(s, &cols);
        let budget = self.budget();
        let mut data: Vec<u32> = Vec::new();
        let mut generated = 0usize;
        let mut row_buf = vec![0u32; base + k];

        for row in cur.rows() {
            row_buf[..base].copy_from_slice(row);
            // Variables enumerated exhaustively before the generator fills the rest.
            let fixed: Vec<usize> = match &gen {
                Generator::Enumerate => (0..k).collect(),
                Generator::CountKeys { .. } => Vec::new(),
                Generator::Solve { var, .. } | Generator::Range { var, .. } => {
                    (0..k).filter(|&j| &extra[j] != var).collect()
                }
                Generator::Times { free_args, .. } => (0..k)
                    .filter(|&j| !free_args.iter().any(|(_, v)| v == &extra[j]))
                    .collect(),
            };
            let mut odometer = vec![0u64; fixed.len()];
            loop {
                for (slot, &j) in fixed.iter().enumerate() {
                    row_buf[base + j] = odometer[slot] as u32;
                }
                let mut emit = |vals: &mut Vec<u32>, exact: bool| -> Result<()> {
                    generated += 1;
                    if generated > budget {
                        return Err(self.over_budget(s.origin, "extension"));
                    }
                    if exact || tester.test(vals)? {
                        data.extend_from_slice(vals);
                    }
                    Ok(())
                };
                self.candidates(&gen, &extra, base, &cols, &mut row_buf, &mut emit)?;

                // Advance the odometer.
                let mut pos = fixed.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    odometer[pos] += 1;
                    if odometer[pos] < m {
                        break;
                    }
                    odometer[pos] = 0;
                }
                if odometer.iter().all(|&d| d == 0) {
                    break;
                }
            }
        }
        if cols.is_empty() {
            return Ok(SparseRelation::boolean(!data.is_empty() || (cur.truth() && tester.test(&[])?)));
        }
        Ok(SparseRelation::from_rows(cols, data))
    }

    /// Fills the generator-owned variables in `row` and calls `emit` for
    /// each candidate.
    fn candidates(
        &self,
        gen: &Generator<'_>,
        extra: &[String],
        base: usize,
        cols: &[String],
        row: &mut Vec<u32>,
        emit: &mut dyn FnMut(&mut Vec<u32>, bool) -> Result<()>,
    ) -> Result<()> {
        let m = self.m();
        let slot_of = |v: &str| base + extra.iter().position(|e| e == v).expect("extra var");
        match gen {
            Generator::Enumerate => emit(row, false),
            Generator::Solve { var, lhs, rhs } => {
                let j = slot_of(var);
                let eval_at = |row: &mut Vec<u32>, x: u32| -> Result<u64> {
                    row[j] = x;
                    let env = row_env(cols, row);
                    let l = term_value(self.ctx, lhs, &env)?;
                    let r = term_value(self.ctx, rhs, &env)?;
                    Ok((l + m - r) % m)
                };
                let f0 = eval_at(row, 0)?;
                let f1 = if m > 1 { eval_at(row, 1)? } else { f0 };
                let a = (f1 + m - f0) % m;
                let target = (m - f0) % m;
                for x in solve_linear(a, target, m) {
                    row[j] = x as u32;
                    emit(row, true)?;
                }
                Ok(())
            }
            Generator::Range { var, bound, below } => {
                let j = slot_of(var);
                let env = row_env(cols, row);
                let b = term_value(self.ctx, bound, &env)?;
                let range = if *below { 0..b } else { (b + 1)..m };
                for x in range {
                    row[j] = x as u32;
                    emit(row, true)?;
                }
                Ok(())
            }
            Generator::CountKeys { rest, counts, absent, index } => {
                let threshold = term_value(self.ctx, index, &row_env(&cols[..base], &row[..base]))?;
                let slots: Vec<usize> = extra.iter().map(|v| slot_of(v)).collect();
                if *absent >= threshold {
                    // Groups missing from the table qualify too: try everything.
                    let mut digits = vec![0u64; slots.len()];
                    loop {
                        for (d, &j) in digits.iter().zip(&slots) {
                            row[j] = *d as u32;
                        }
                        emit(row, false)?;
                        if !advance(&mut digits, m) {
                            return Ok(());
                        }
                    }
                }
                let positions: Vec<usize> = rest
                    .iter()
                    .map(|r| cols.iter().position(|c| c == r).expect("rest column"))
                    .collect();
                for (key, &c) in counts.iter() {
                    if c < threshold {
                        continue;
                    }
                    let consistent = positions
                        .iter()
                        .zip(key)
                        .all(|(&p, &v)| p >= base || row[p] == v);
                    if !consistent {
                        continue;
                    }
                    for (&p, &v) in positions.iter().zip(key) {
                        if p >= base {
                            row[p] = v;
                        }
                    }
                    emit(row, true)?;
                }
                Ok(())
            }
            Generator::Times { args, free_args } => {
                // Values of the three arguments: bound ones are fixed by the row.
                let env = row_env(cols, row);
                let mut fixed: [Option<u64>; 3] = [None; 3];
                for (i, t) in args.iter().enumerate() {
                    if !free_args.iter().any(|(fi, _)| *fi == i) {
                        fixed[i] = Some(term_value(self.ctx, t, &env)?);
                    }
                }
                drop(env);
                let slots: Vec<(usize, usize)> = free_args.iter().map(|(i, v)| (*i, slot_of(v))).collect();
                let mut assign = |row: &mut Vec<u32>, vals: [u64; 3]| -> Result<()> {
                    // Repeated variables must receive one consistent value.
                    let mut seen: Vec<(usize, u64)> = Vec::with_capacity(3);
                    for &(i, j) in &slots {
                        if let Some(&(_, prev)) = seen.iter().find(|(s, _)| *s == j) {
                            if prev != vals[i] {
                                return Ok(());
                            }
                        }
                        seen.push((j, vals[i]));
                        row[j] = vals[i] as u32;
                    }
                    emit(row, true)
                };
                times_solutions(fixed, m, &mut |vals| assign(row, vals))?;
                Ok(())
            }
        }
    }
}

enum Generator<'s> {
    Enumerate,
    /// `lhs = rhs` is linear in `var`.
    Solve { var: String, lhs: &'s Term, rhs: &'s Term },
    /// `var < bound` (`below`) or `bound < var`.
    Range { var: String, bound: &'s Term, below: bool },
    /// `TIMES(a, b, c)` where each argument is bound or a bare unbound variable.
    Times { args: [&'s Term; 3], free_args: Vec<(usize, String)> },
    /// `count >= index` with the index bound: groups from the count table.
    CountKeys {
        rest: &'s [String],
        counts: &'s HashMap<Vec<u32>, u64>,
        absent: u64,
        index: &'s Term,
    },
}

struct Tester<'s> {
    engine: &'s Engine<'s>,
    sat: &'s Sat<'s>,
    cols: &'s [String],
    rest_pos: Vec<usize>,
    /// Scratch buffers reused across rows.
    key: RefCell<Vec<u32>>,
    env: RefCell<Env<'s>>,
}

impl Tester<'_> {
    fn test(&self, row: &[u32]) -> Result<bool> {
        let ctx = self.engine.ctx;
        let truth = match &self.sat.repr {
            Repr::Pos(r) | Repr::Neg(r) => {
                let probe: Vec<u32> = r
                    .vars()
                    .iter()
                    .map(|v| row[self.cols.iter().position(|c| c == v).expect("bound")])
                    .collect();
                let inside = r.contains(&probe);
                return Ok(if matches!(self.sat.repr, Repr::Pos(_)) { inside } else { !inside });
            }
            Repr::Lazy => {
                let mut env = self.env.borrow_mut();
                env.set_values(row);
                holds(ctx, self.sat.origin, &mut env)?
            }
            Repr::Count { counts, absent, index, .. } => {
                let mut key = self.key.borrow_mut();
                for (slot, &p) in key.iter_mut().zip(&self.rest_pos) {
                    *slot = row[p];
                }
                let c = counts.get(key.as_slice()).copied().unwrap_or(*absent);
                let mut env = self.env.borrow_mut();
                env.set_values(row);
                c >= term_value(ctx, index, &env)?
            }
        };
        Ok(truth != self.sat.negated)
    }
}

fn row_env<'a>(cols: &'a [String], row: &[u32]) -> Env<'a> {
    Env::from_pairs(cols.iter().zip(row).map(|(c, &v)| (c.as_str(), v as u64)))
}

/// Calls `f` with every `[a, b, c]` in `0..m` with `a*b = c` as integers,
/// agreeing with the fixed entries.
fn times_solutions(
    fixed: [Option<u64>; 3],
    m: u64,
    f: &mut dyn FnMut([u64; 3]) -> Result<()>,
) -> Result<()> {
    match fixed {
        [None, Some(b), c] => times_solutions([Some(b), None, c], m, &mut |[x, y, z]| f([y, x, z])),
        [Some(a), Some(b), c] => {
            let prod = a as u128 * b as u128;
            if prod < m as u128 && c.map_or(true, |c| c as u128 == prod) {
                f([a, b, prod as u64])?;
            }
            Ok(())
        }
        [Some(0), None, Some(c)] => {
            if c == 0 {
                for b in 0..m {
                    f([0, b, 0])?;
                }
            }
            Ok(())
        }
        [Some(a), None, Some(c)] => {
            if c % a == 0 {
                f([a, c / a, c])?;
            }
            Ok(())
        }
        [Some(0), None, None] => {
            for b in 0..m {
                f([0, b, 0])?;
            }
            Ok(())
        }
        [Some(a), None, None] => {
            for b in 0..=((m - 1) / a) {
                f([a, b, a * b])?;
            }
            Ok(())
        }
        [None, None, Some(0)] => {
            for b in 0..m {
                f([0, b, 0])?;
            }
            for a in 1..m {
                f([a, 0, 0])?;
            }
            Ok(())
        }
        [None, None, Some(c)] => {
            let mut a = 1;
            while a * a <= c {
                if c % a == 0 {
                    f([a, c / a, c])?;
                    if a != c / a {
                        f([c / a, a, c])?;
                    }
                }
                a += 1;
            }
            Ok(())
        }
        [None, None, None] => {
            for b in 0..m {
                f([0, b, 0])?;
            }
            for a in 1..m {
                for b in 0..=((m - 1) / a) {
                    f([a, b, a * b])?;
                }
            }
            Ok(())
        }
    }
}

/// Odometer step over `0..m` digits; false after the last combination.
fn advance(digits: &mut [u64], m: u64) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < m {
            return true;
        }
        *d = 0;
    }
    false
}

fn flatten_and<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other),
    }
}

/// All `x` in `0..m` with `a*x = target (mod m)`.
fn solve_linear(a: u64, target: u64, m: u64) -> Vec<u64> {
    let g = gcd_u64(a, m);
    if target % g != 0 {
        return Vec::new();
    }
    let step = m / g;
    let base = if step == 1 {
        0
    } else {
        let inv = inverse_mod((a / g) % step, step).expect("coprime after dividing by gcd");
        ((target / g) as u128 * inv as u128 % step as u128) as u64
    };
    (0..g).map(|k| base + k * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::naive::eval_naive;
    use crate::logic::parse;
    use std::collections::BTreeMap;

    fn ctx(m: u64) -> RingContext {
        RingContext::new(m).unwrap()
    }

    #[test]
    fn linear_congruences() {
        assert_eq!(solve_linear(3, 1, 7), vec![5]);
        assert_eq!(solve_linear(2, 4, 6), vec![2, 5]);
        assert!(solve_linear(2, 3, 6).is_empty());
        assert_eq!(solve_linear(0, 0, 3), vec![0, 1, 2]);
        assert!(solve_linear(0, 1, 3).is_empty());
        for m in 1..30u64 {
            for a in 0..m {
                for t in 0..m {
                    let brute: Vec<u64> = (0..m).filter(|x| (a * x) % m == t).collect();
                    assert_eq!(solve_linear(a, t, m), brute, "a={a} t={t} m={m}");
                }
            }
        }
    }

    #[test]
    fn times_relation_matches_triple_loop() {
        let m = 100;
        let rel = eval_fast(&ctx(m), &parse("TIMES(x, y, z)").unwrap()).unwrap();
        let mut brute = 0;
        for x in 0..m {
            for y in 0..m {
                if x * y < m {
                    brute += 1;
                    assert!(rel.contains(&[x as u32, y as u32, (x * y) as u32]));
                }
            }
        }
        assert_eq!(rel.len(), brute);
    }

    #[test]
    fn identity_relation_is_full() {
        for m in [1u64, 2, 17] {
            let rel = eval_fast(&ctx(m), &parse("x = x").unwrap()).unwrap();
            assert_eq!(rel.len() as u64, m);
        }
    }

    #[test]
    fn agrees_with_naive_on_assorted_formulas() {
        let formulas = [
            "A x. !x = 0 -> E y. x*y = 1",
            "E x. x*x + 1 = 0",
            "M y. y < 4",
            "E[1,3] y. E z. z*z*z = y",
            "E i. C=(i) y. (y < z & TIMES(y, y, y))",
            "A x. (E y. TIMES(x, y, z) & !x = 1) -> E w. TIMES(3, w, x)",
            "x < y | y < x",
            "C>=(x + 1) y. y*y = x",
            "!(E[0,2] x. x = x) & M z. !(z < 2)",
            "A x. A y. A z. (x + y) * z = x*z + y*z",
        ];
        for text in formulas {
            let f = parse(text).unwrap();
            let free: Vec<String> = f.free_vars().into_iter().collect();
            for m in 1..=23u64 {
                let c = ctx(m);
                let rel = eval_fast(&c, &f).unwrap();
                // Enumerate all assignments of the free variables.
                let k = free.len() as u32;
                for code in 0..m.pow(k) {
                    let mut env = BTreeMap::new();
                    let mut rest = code;
                    let mut row = Vec::new();
                    for v in &free {
                        env.insert(v.clone(), rest % m);
                        row.push((rest % m) as u32);
                        rest /= m;
                    }
                    let expected = eval_naive(&c, &f, &env).unwrap();
                    assert_eq!(rel.contains(&row), expected, "{text} in Z_{m} at {env:?}");
                }
            }
        }
    }

    #[test]
    fn budget_errors_name_the_subformula() {
        let cfg = FastConfig { tuple_budget: 1000, complement_width_cap: 3 };
        let err = eval_fast_with(&ctx(100), &parse("E x. E y. x < y").unwrap(), &cfg).unwrap_err();
        match err {
            Error::ResourceLimit(msg) => assert!(msg.contains("x < y"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
