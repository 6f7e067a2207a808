//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := or ("->" formula)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | quant | primary
//! quant   := ("E" | "A" | "M" | "E[" r "," q "]" | "C>=(" t ")" | "C=(" t ")") var "." formula
//! primary := t "=" t | t "<" t | "TIMES(" t "," t "," t ")" | "(" formula ")"
//! t       := p ("+" p)*      p := a ("*" a)*      a := var | nat | "(" t ")"
//! ```
//!
//! `#` starts a comment running to the end of the line.

use crate::error::{Error, Result};

use super::ast::{count_exact, Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Eq,
    Lt,
    Ge,
    Plus,
    Star,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", symbol(other)),
        }
    }
}

fn symbol(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Comma => ",",
        Tok::Dot => ".",
        Tok::Eq => "=",
        Tok::Lt => "<",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Star => "*",
        Tok::Bang => "!",
        Tok::Amp => "&",
        Tok::Pipe => "|",
        Tok::Arrow => "->",
        _ => "?",
    }
}

const KEYWORDS: [&str; 5] = ["E", "A", "M", "C", "TIMES"];

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| Error::Syntax { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            let n = s
                .parse::<u64>()
                .map_err(|_| err(l0, c0, format!("integer literal `{s}` out of range")))?;
            out.push(Spanned { tok: Tok::Num(n), line: l0, column: c0 });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, width) = match (c, two.as_str()) {
            (_, "->") => (Tok::Arrow, 2),
            (_, ">=") => (Tok::Ge, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('*', _) => (Tok::Star, 1),
            ('!', _) => (Tok::Bang, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Pipe, 1),
            _ => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        };
        i += width;
        col += width;
        out.push(Spanned { tok, line: l0, column: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

/// Parses a formula from the concrete syntax.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(format!("unexpected {} after formula", p.peek().describe())));
    }
    Ok(f)
}

/// Parses a standalone term.
pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(format!("unexpected {} after term", p.peek().describe())));
    }
    Ok(t)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> Error {
        let s = &self.toks[self.pos];
        Error::Syntax { line: s.line, column: s.column, message }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if self.peek() == &want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected `{}`, found {}",
                symbol(&want),
                self.peek().describe()
            )))
        }
    }

    fn semantic(&self, at: usize, e: Error) -> Error {
        let s = &self.toks[at];
        match e {
            Error::Semantic(m) | Error::InvalidArgument(m) => Error::Semantic(format!(
                "{m} (line {}, column {})",
                s.line, s.column
            )),
            other => other,
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.peek() == &Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut acc = self.and()?;
        while self.peek() == &Tok::Pipe {
            self.bump();
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(k) if k == "E" || k == "A" || k == "M" || k == "C" => self.quantifier(&k),
            _ => self.primary(),
        }
    }

    fn bound_var(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(v) if !KEYWORDS.contains(&v.as_str()) => {
                self.bump();
                Ok(v)
            }
            other => Err(self.error(format!("expected a variable, found {}", other.describe()))),
        }
    }

    fn number(&mut self) -> Result<u64> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            other => Err(self.error(format!("expected a number, found {}", other.describe()))),
        }
    }

    fn quantifier(&mut self, kind: &str) -> Result<Formula> {
        let start = self.pos;
        self.bump();
        match kind {
            "E" if self.peek() == &Tok::LBracket => {
                self.bump();
                let r = self.number()?;
                self.expect(Tok::Comma)?;
                let q = self.number()?;
                self.expect(Tok::RBracket)?;
                let v = self.bound_var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Formula::mod_exists(r, q, v, body).map_err(|e| self.semantic(start, e))
            }
            "E" | "A" | "M" => {
                let v = self.bound_var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(match kind {
                    "E" => Formula::exists(v, body),
                    "A" => Formula::forall(v, body),
                    _ => Formula::majority(v, body),
                })
            }
            _ => {
                let exact = match self.bump() {
                    Tok::Ge => false,
                    Tok::Eq => true,
                    other => {
                        self.pos -= 1;
                        return Err(self.error(format!(
                            "expected `>=` or `=` after `C`, found {}",
                            other.describe()
                        )));
                    }
                };
                self.expect(Tok::LParen)?;
                let count = self.term()?;
                self.expect(Tok::RParen)?;
                let v = self.bound_var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                let built = if exact {
                    count_exact(count, &v, body)
                } else {
                    Formula::count_ge(count, v, body)
                };
                built.map_err(|e| self.semantic(start, e))
            }
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        if matches!(self.peek(), Tok::Ident(k) if k == "TIMES") && self.peek_at(1) == &Tok::LParen {
            self.bump();
            self.bump();
            let a = self.term()?;
            self.expect(Tok::Comma)?;
            let b = self.term()?;
            self.expect(Tok::Comma)?;
            let c = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok(Formula::times(a, b, c));
        }
        let start = self.pos;
        let atom_err = match self.atom() {
            Ok(f) => return Ok(f),
            Err(e) => (self.pos, e),
        };
        if self.toks[start].tok != Tok::LParen {
            return Err(atom_err.1);
        }
        let atom_pos = atom_err.0;
        self.pos = start;
        self.bump();
        let inner = self.formula().and_then(|f| {
            self.expect(Tok::RParen)?;
            Ok(f)
        });
        match inner {
            Ok(f) => Ok(f),
            Err(e) if self.pos >= atom_pos => Err(e),
            Err(_) => {
                self.pos = atom_pos;
                Err(atom_err.1)
            }
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let a = self.term()?;
        match self.peek() {
            Tok::Eq => {
                self.bump();
                Ok(Formula::equal(a, self.term()?))
            }
            Tok::Lt => {
                self.bump();
                Ok(Formula::less(a, self.term()?))
            }
            other => Err(self.error(format!("expected `=` or `<`, found {}", other.describe()))),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut acc = self.product()?;
        while self.peek() == &Tok::Plus {
            self.bump();
            acc = Term::add(acc, self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Term> {
        let mut acc = self.term_atom()?;
        while self.peek() == &Tok::Star {
            self.bump();
            acc = Term::mul(acc, self.term_atom()?);
        }
        Ok(acc)
    }

    fn term_atom(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Ident(v) if !KEYWORDS.contains(&v.as_str()) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Num(n) => {
                self.bump();
                Ok(Term::lit(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => Err(self.error(format!("expected a term, found {}", other.describe()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn spec_examples() {
        assert_eq!(
            parse("E x. x*x + 1 = 0").unwrap(),
            Formula::exists(
                "x",
                Formula::equal(Term::add(Term::mul(v("x"), v("x")), Term::lit(1)), Term::Zero)
            )
        );
        assert_eq!(
            parse("E[1,4] z. z = z").unwrap(),
            Formula::mod_exists(1, 4, "z", Formula::equal(v("z"), v("z"))).unwrap()
        );
        assert_eq!(
            parse("M y. y < 4").unwrap(),
            Formula::majority("y", Formula::less(v("y"), Term::lit(4)))
        );
    }

    #[test]
    fn precedence() {
        let f = parse("x = 0 | y = 0 & !z = 0 -> x < y").unwrap();
        let expected = Formula::implies(
            Formula::or(
                Formula::equal(v("x"), Term::Zero),
                Formula::and(
                    Formula::equal(v("y"), Term::Zero),
                    Formula::not(Formula::equal(v("z"), Term::Zero)),
                ),
            ),
            Formula::less(v("x"), v("y")),
        );
        assert_eq!(f, expected);
        // Quantifier bodies extend to the right.
        let g = parse("E x. x = 1 & x = 2").unwrap();
        assert!(matches!(g, Formula::Exists(_, ref b) if matches!(**b, Formula::And(..))));
        // Implication is right associative.
        let h = parse("a = 0 -> b = 0 -> c = 0").unwrap();
        assert!(matches!(h, Formula::Implies(_, ref r) if matches!(**r, Formula::Implies(..))));
    }

    #[test]
    fn parenthesized_terms_and_formulas() {
        assert_eq!(
            parse("(x + 1) * y = 2").unwrap(),
            Formula::equal(Term::mul(Term::add(v("x"), Term::lit(1)), v("y")), Term::lit(2))
        );
        assert_eq!(parse("((x = 1))").unwrap(), Formula::equal(v("x"), Term::lit(1)));
        assert_eq!(
            parse("TIMES(x, 2, z) # trailing comment\n").unwrap(),
            Formula::times(v("x"), Term::lit(2), v("z"))
        );
        assert_eq!(
            parse("C=(i) y. y < z").unwrap(),
            count_exact(v("i"), "y", Formula::less(v("y"), v("z"))).unwrap()
        );
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse("E x.\n  x = ") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("x = 1 $") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 7)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(x = 1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("E E. x = x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("C>(1) x. x = x"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(parse("E[4,4] z. z = z"), Err(Error::Semantic(_))));
        assert!(matches!(parse("E[0,1] z. z = z"), Err(Error::Semantic(_))));
        assert!(matches!(parse("C>=(x) x. x = x"), Err(Error::Semantic(_))));
    }

    #[test]
    fn printed_forms_reparse() {
        for text in [
            "A x. !x = 0 -> E y. x*y = 1",
            "E[2,5] x. x = x",
            "C>=(i + 1) y. TIMES(y, y, z) | M w. w < 3",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{text}");
        }
    }
}
