//! LTL formulas.
//!
//! The primitive grammar is `π | ¬φ | φ ∨ φ | ○φ | φ U φ` plus the constant
//! `⊤`. Conjunction, implication, equivalence, eventually and always are kept
//! as tagged derived nodes so that specifications print the way they were
//! written; [`Ltl::expand`] rewrites them into primitives.
//!
//! Text syntax (lowest to highest precedence):
//!
//! ```text
//! <->        (left assoc)
//! ->         (right assoc)
//! |          (left assoc)
//! &          (left assoc)
//! U          (right assoc)
//! ! X F G    (prefix)
//! TRUE FALSE name ( ... )
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    Atom(String),
    Not(Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    // derived
    And(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Iff(Box<Ltl>, Box<Ltl>),
    Eventually(Box<Ltl>),
    Always(Box<Ltl>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {msg}")]
pub struct LtlSyntaxError {
    pub line: usize,
    pub column: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("temporal operator outside the GR(1) fragment: {0}")]
    Temporal(String),
    #[error("nested next operator")]
    NestedNext,
    #[error("next operator in a state formula")]
    NextInStateFormula,
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
}

pub fn atom(name: &str) -> Ltl {
    Ltl::Atom(name.to_string())
}

pub fn not(f: Ltl) -> Ltl {
    Ltl::Not(Box::new(f))
}

pub fn next(f: Ltl) -> Ltl {
    Ltl::Next(Box::new(f))
}

pub fn or(a: Ltl, b: Ltl) -> Ltl {
    Ltl::Or(Box::new(a), Box::new(b))
}

pub fn and(a: Ltl, b: Ltl) -> Ltl {
    Ltl::And(Box::new(a), Box::new(b))
}

pub fn implies(a: Ltl, b: Ltl) -> Ltl {
    Ltl::Implies(Box::new(a), Box::new(b))
}

pub fn iff(a: Ltl, b: Ltl) -> Ltl {
    Ltl::Iff(Box::new(a), Box::new(b))
}

pub fn until(a: Ltl, b: Ltl) -> Ltl {
    Ltl::Until(Box::new(a), Box::new(b))
}

pub fn eventually(f: Ltl) -> Ltl {
    Ltl::Eventually(Box::new(f))
}

pub fn always(f: Ltl) -> Ltl {
    Ltl::Always(Box::new(f))
}

pub fn falsity() -> Ltl {
    not(Ltl::True)
}

/// Left-nested conjunction; `TRUE` for an empty list.
pub fn conj(parts: impl IntoIterator<Item = Ltl>) -> Ltl {
    parts.into_iter().reduce(and).unwrap_or(Ltl::True)
}

/// Left-nested disjunction; `FALSE` for an empty list.
pub fn disj(parts: impl IntoIterator<Item = Ltl>) -> Ltl {
    parts.into_iter().reduce(or).unwrap_or_else(falsity)
}

/// Exactly one of `atoms` holds, as a disjunction of minterms.
pub fn exactly_one(atoms: &[Ltl]) -> Ltl {
    disj((0..atoms.len()).map(|i| {
        conj(atoms.iter().enumerate().map(|(j, a)| {
            if i == j {
                a.clone()
            } else {
                not(a.clone())
            }
        }))
    }))
}

/// Two-state valuation lookup used when evaluating transition formulas.
pub trait Valuation {
    fn current(&self, atom: &str) -> Option<bool>;
    fn next(&self, atom: &str) -> Option<bool>;
}

impl Ltl {
    pub fn is_primitive(&self) -> bool {
        match self {
            Ltl::True | Ltl::Atom(_) => true,
            Ltl::Not(a) | Ltl::Next(a) => a.is_primitive(),
            Ltl::Or(a, b) | Ltl::Until(a, b) => a.is_primitive() && b.is_primitive(),
            _ => false,
        }
    }

    /// Rewrites derived operators into the primitive grammar.
    pub fn expand(&self) -> Ltl {
        match self {
            Ltl::True => Ltl::True,
            Ltl::Atom(a) => Ltl::Atom(a.clone()),
            Ltl::Not(a) => not(a.expand()),
            Ltl::Or(a, b) => or(a.expand(), b.expand()),
            Ltl::Next(a) => next(a.expand()),
            Ltl::Until(a, b) => until(a.expand(), b.expand()),
            Ltl::And(a, b) => not(or(not(a.expand()), not(b.expand()))),
            Ltl::Implies(a, b) => or(not(a.expand()), b.expand()),
            Ltl::Iff(a, b) => {
                let (a, b) = (a.expand(), b.expand());
                // (a -> b) & (b -> a)
                let ab = or(not(a.clone()), b.clone());
                let ba = or(not(b), a);
                not(or(not(ab), not(ba)))
            }
            Ltl::Eventually(a) => until(Ltl::True, a.expand()),
            Ltl::Always(a) => not(until(Ltl::True, not(a.expand()))),
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out, false, &mut BTreeSet::new());
        out
    }

    /// Atoms appearing under a next operator.
    pub fn next_atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut BTreeSet::new(), false, &mut out);
        out
    }

    fn collect_atoms<'a>(
        &'a self,
        all: &mut BTreeSet<&'a str>,
        under_next: bool,
        nexts: &mut BTreeSet<&'a str>,
    ) {
        match self {
            Ltl::True => {}
            Ltl::Atom(a) => {
                all.insert(a);
                if under_next {
                    nexts.insert(a);
                }
            }
            Ltl::Next(a) => a.collect_atoms(all, true, nexts),
            Ltl::Not(a) | Ltl::Eventually(a) | Ltl::Always(a) => {
                a.collect_atoms(all, under_next, nexts)
            }
            Ltl::Or(a, b)
            | Ltl::And(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Iff(a, b)
            | Ltl::Until(a, b) => {
                a.collect_atoms(all, under_next, nexts);
                b.collect_atoms(all, under_next, nexts);
            }
        }
    }

    /// True if the formula only reads next-state atoms.
    pub fn is_next_only(&self) -> bool {
        fn go(f: &Ltl, under_next: bool) -> bool {
            match f {
                Ltl::True => true,
                Ltl::Atom(_) => under_next,
                Ltl::Next(a) => go(a, true),
                Ltl::Not(a) | Ltl::Eventually(a) | Ltl::Always(a) => go(a, under_next),
                Ltl::Or(a, b)
                | Ltl::And(a, b)
                | Ltl::Implies(a, b)
                | Ltl::Iff(a, b)
                | Ltl::Until(a, b) => go(a, under_next) && go(b, under_next),
            }
        }
        go(self, false)
    }

    /// Strips next operators, turning a next-only formula into a state formula.
    pub fn strip_next(&self) -> Ltl {
        match self {
            Ltl::Next(a) => a.strip_next(),
            Ltl::True => Ltl::True,
            Ltl::Atom(a) => Ltl::Atom(a.clone()),
            Ltl::Not(a) => not(a.strip_next()),
            Ltl::Eventually(a) => eventually(a.strip_next()),
            Ltl::Always(a) => always(a.strip_next()),
            Ltl::Or(a, b) => or(a.strip_next(), b.strip_next()),
            Ltl::And(a, b) => and(a.strip_next(), b.strip_next()),
            Ltl::Implies(a, b) => implies(a.strip_next(), b.strip_next()),
            Ltl::Iff(a, b) => iff(a.strip_next(), b.strip_next()),
            Ltl::Until(a, b) => until(a.strip_next(), b.strip_next()),
        }
    }

    /// Evaluates a transition-level formula (Boolean connectives plus next on
    /// atoms) over a pair of consecutive states.
    pub fn eval<V: Valuation + ?Sized>(&self, v: &V) -> Result<bool, EvalError> {
        self.eval_at(v, false)
    }

    fn eval_at<V: Valuation + ?Sized>(&self, v: &V, in_next: bool) -> Result<bool, EvalError> {
        Ok(match self {
            Ltl::True => true,
            Ltl::Atom(a) => {
                let val = if in_next { v.next(a) } else { v.current(a) };
                val.ok_or_else(|| EvalError::UnknownAtom(a.clone()))?
            }
            Ltl::Not(a) => !a.eval_at(v, in_next)?,
            Ltl::Or(a, b) => a.eval_at(v, in_next)? || b.eval_at(v, in_next)?,
            Ltl::And(a, b) => a.eval_at(v, in_next)? && b.eval_at(v, in_next)?,
            Ltl::Implies(a, b) => !a.eval_at(v, in_next)? || b.eval_at(v, in_next)?,
            Ltl::Iff(a, b) => a.eval_at(v, in_next)? == b.eval_at(v, in_next)?,
            Ltl::Next(a) => {
                if in_next {
                    return Err(EvalError::NestedNext);
                }
                a.eval_at(v, true)?
            }
            Ltl::Until(..) | Ltl::Eventually(_) | Ltl::Always(_) => {
                return Err(EvalError::Temporal(self.to_string()))
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Ltl::Iff(..) => 1,
            Ltl::Implies(..) => 2,
            Ltl::Or(..) => 3,
            Ltl::And(..) => 4,
            Ltl::Until(..) => 5,
            Ltl::Not(_) | Ltl::Next(_) | Ltl::Eventually(_) | Ltl::Always(_) => 6,
            Ltl::True | Ltl::Atom(_) => 7,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        if p < min {
            f.write_str("(")?;
        }
        match self {
            Ltl::True => f.write_str("TRUE")?,
            Ltl::Atom(a) => f.write_str(a)?,
            Ltl::Not(a) if **a == Ltl::True => f.write_str("FALSE")?,
            Ltl::Not(a) => {
                f.write_str("!")?;
                a.write_prec(f, 6)?;
            }
            Ltl::Next(a) => {
                f.write_str("X ")?;
                a.write_prec(f, 6)?;
            }
            Ltl::Eventually(a) => {
                f.write_str("F ")?;
                a.write_prec(f, 6)?;
            }
            Ltl::Always(a) => {
                f.write_str("G ")?;
                a.write_prec(f, 6)?;
            }
            Ltl::Or(a, b) | Ltl::And(a, b) | Ltl::Iff(a, b) => {
                let op = match self {
                    Ltl::Or(..) => " | ",
                    Ltl::And(..) => " & ",
                    _ => " <-> ",
                };
                a.write_prec(f, p)?;
                f.write_str(op)?;
                b.write_prec(f, p + 1)?;
            }
            Ltl::Implies(a, b) | Ltl::Until(a, b) => {
                let op = if matches!(self, Ltl::Implies(..)) { " -> " } else { " U " };
                a.write_prec(f, p + 1)?;
                f.write_str(op)?;
                b.write_prec(f, p)?;
            }
        }
        if p < min {
            f.write_str(")")?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Ltl, LtlSyntaxError> {
        parse_line(text, 1)
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Eventually,
    Always,
    Until,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<(Tok, usize)>, LtlSyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| LtlSyntaxError {
        line,
        column: col + 1,
        msg,
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' => {
                i += 1;
                continue;
            }
            b'(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            b'!' => {
                out.push((Tok::Not, start));
                i += 1;
            }
            b'&' => {
                out.push((Tok::And, start));
                i += 1;
            }
            b'|' => {
                out.push((Tok::Or, start));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Tok::Implies, start));
                i += 2;
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                out.push((Tok::Iff, start));
                i += 3;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "TRUE" => Tok::True,
                    "FALSE" => Tok::False,
                    "X" => Tok::Next,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    "U" => Tok::Until,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((tok, start));
            }
            _ => return Err(err(start, format!("unexpected character `{}`", c as char))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end) + 1
    }

    fn error(&self, msg: impl Into<String>) -> LtlSyntaxError {
        LtlSyntaxError {
            line: self.line,
            column: self.col(),
            msg: msg.into(),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Ltl, LtlSyntaxError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            lhs = iff(lhs, self.implies()?);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Ltl, LtlSyntaxError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            Ok(implies(lhs, self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Ltl, LtlSyntaxError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ltl, LtlSyntaxError> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::And) {
            lhs = and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Ltl, LtlSyntaxError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            Ok(until(lhs, self.until()?))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Ltl, LtlSyntaxError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("unexpected end of formula"));
        };
        self.pos += 1;
        match tok {
            Tok::Not => Ok(not(self.unary()?)),
            Tok::Next => Ok(next(self.unary()?)),
            Tok::Eventually => Ok(eventually(self.unary()?)),
            Tok::Always => Ok(always(self.unary()?)),
            Tok::True => Ok(Ltl::True),
            Tok::False => Ok(falsity()),
            Tok::Ident(name) => Ok(Ltl::Atom(name)),
            Tok::LParen => {
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("unexpected token {other:?}")))
            }
        }
    }
}

pub(crate) fn parse_line(text: &str, line: usize) -> Result<Ltl, LtlSyntaxError> {
    let toks = tokenize(text, line)?;
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        end: text.len(),
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    struct Pair(HashMap<&'static str, (bool, bool)>);

    impl Valuation for Pair {
        fn current(&self, a: &str) -> Option<bool> {
            self.0.get(a).map(|v| v.0)
        }
        fn next(&self, a: &str) -> Option<bool> {
            self.0.get(a).map(|v| v.1)
        }
    }

    #[test]
    fn derived_identities_are_structural() {
        let p = atom("p");
        assert_eq!(eventually(p.clone()).expand(), until(Ltl::True, p.clone()));
        assert_eq!(
            always(p.clone()).expand(),
            not(until(Ltl::True, not(p.clone())))
        );
        assert!(always(and(p.clone(), atom("q"))).expand().is_primitive());
        assert!(!and(p.clone(), p).is_primitive());
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let f = implies(
            and(atom("in_a"), atom("go_b")),
            or(next(atom("in_a")), next(atom("in_b"))),
        );
        assert_eq!(f.to_string(), "in_a & go_b -> X in_a | X in_b");
        let g = and(or(atom("a"), atom("b")), atom("c"));
        assert_eq!(g.to_string(), "(a | b) & c");
        assert_eq!(not(and(atom("a"), next(atom("b")))).to_string(), "!(a & X b)");
        assert_eq!(falsity().to_string(), "FALSE");
        assert_eq!(implies(implies(atom("a"), atom("b")), atom("c")).to_string(), "(a -> b) -> c");
        assert_eq!(or(atom("a"), or(atom("b"), atom("c"))).to_string(), "a | (b | c)");
    }

    #[test]
    fn parse_reports_position() {
        let e = Ltl::parse("a & (b | c").unwrap_err();
        assert_eq!(e.column, 11);
        let e = Ltl::parse("a & $").unwrap_err();
        assert_eq!(e.column, 5);
        assert!(Ltl::parse("a b").is_err());
        assert!(Ltl::parse("").is_err());
    }

    #[test]
    fn eval_transition_formula() {
        let f = Ltl::parse("in_a & go_b -> X in_a | X in_b").unwrap();
        let v = Pair(HashMap::from([("in_a", (true, false)), ("go_b", (true, true)), ("in_b", (false, true))]));
        assert_eq!(f.eval(&v), Ok(true));
        let v = Pair(HashMap::from([("in_a", (true, false)), ("go_b", (true, true)), ("in_b", (false, false))]));
        assert_eq!(f.eval(&v), Ok(false));
        assert!(matches!(Ltl::parse("F a").unwrap().eval(&v), Err(EvalError::Temporal(_))));
        assert_eq!(Ltl::parse("X X in_a").unwrap().eval(&v), Err(EvalError::NestedNext));
        assert!(matches!(Ltl::parse("zzz").unwrap().eval(&v), Err(EvalError::UnknownAtom(_))));
    }

    #[test]
    fn exactly_one_semantics() {
        let atoms = [atom("a"), atom("b"), atom("c")];
        let f = exactly_one(&atoms);
        for bits in 0u8..8 {
            let v = Pair(HashMap::from([
                ("a", (bits & 1 != 0, false)),
                ("b", (bits & 2 != 0, false)),
                ("c", (bits & 4 != 0, false)),
            ]));
            assert_eq!(f.eval(&v).unwrap(), bits.count_ones() == 1, "bits={bits:03b}");
        }
    }

    fn arb_ltl() -> impl Strategy<Value = Ltl> {
        let leaf = prop_oneof![
            Just(Ltl::True),
            Just(falsity()),
            "[a-e]".prop_map(|s| Ltl::Atom(format!("p_{s}"))),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(not),
                inner.clone().prop_map(next),
                inner.clone().prop_map(eventually),
                inner.clone().prop_map(always),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| iff(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| until(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_ltl()) {
            let text = f.to_string();
            prop_assert_eq!(Ltl::parse(&text).unwrap(), f, "{}", text);
        }

        #[test]
        fn expansion_preserves_boolean_semantics(f in arb_ltl(), bits in 0u32..1024) {
            let names = ["p_a", "p_b", "p_c", "p_d", "p_e"];
            let v = Pair(names.iter().enumerate().map(|(i, n)| (*n, (bits >> i & 1 == 1, bits >> (i + 5) & 1 == 1))).collect());
            if let Ok(expected) = f.eval(&v) {
                prop_assert_eq!(f.expand().eval(&v), Ok(expected));
            }
        }
    }
}
