//! Propositional formulas, truth tables and the arithmetic translation.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! iff   := imp ("<->" imp)*
//! imp   := disj ("->" imp)?
//! disj  := conj (("|" | "^") conj)*
//! conj  := unary ("&" unary)*
//! unary := "!" unary | atom | "T" | "F" | "(" iff ")"
//! ```
//!
//! `~`, `¬`, `∧`, `∨`, `⊕`, `→`, `↔` are accepted as synonyms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::polynomial::{Monomial, Polynomial};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("formula parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("atom `{0}` has no truth value")]
    UnboundAtom(String),
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

pub type Valuation = BTreeMap<String, bool>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TruthTableClass {
    Tautology,
    Contingent,
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LTok {
    Atom(String),
    True,
    False,
    Not,
    And,
    Or,
    Xor,
    Imp,
    Iff,
    Open,
    Close,
}

fn lex(src: &str) -> Result<Vec<(usize, LTok)>, LogicError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, m: &str| LogicError::Parse { offset, message: m.to_string() };
    while i < chars.len() {
        let (off, c) = chars[i];
        let next = chars.get(i + 1).map(|p| p.1);
        let next2 = chars.get(i + 2).map(|p| p.1);
        let (tok, width) = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '!' | '~' | '¬' => (LTok::Not, 1),
            '&' | '∧' => (LTok::And, 1),
            '|' | '∨' => (LTok::Or, 1),
            '^' | '⊕' => (LTok::Xor, 1),
            '→' => (LTok::Imp, 1),
            '↔' => (LTok::Iff, 1),
            '(' => (LTok::Open, 1),
            ')' => (LTok::Close, 1),
            '-' if next == Some('>') => (LTok::Imp, 2),
            '<' if next == Some('-') && next2 == Some('>') => (LTok::Iff, 3),
            c if c.is_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().map(|p| p.1).collect();
                if word.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                    return Err(err(off, "atoms must start with a letter"));
                }
                let tok = match word.as_str() {
                    "T" => LTok::True,
                    "F" => LTok::False,
                    _ => LTok::Atom(word),
                };
                out.push((off, tok));
                i = j;
                continue;
            }
            _ => return Err(err(off, &format!("unexpected character `{c}`"))),
        };
        out.push((off, tok));
        i += width;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, LTok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&LTok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len)
    }

    fn fail<T>(&self, m: &str) -> Result<T, LogicError> {
        Err(LogicError::Parse { offset: self.offset(), message: m.to_string() })
    }

    fn eat(&mut self, t: &LTok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.imp()?;
        while self.eat(&LTok::Iff) {
            let rhs = self.imp()?;
            lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disj()?;
        if self.eat(&LTok::Imp) {
            let rhs = self.imp()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conj()?;
        loop {
            if self.eat(&LTok::Or) {
                let rhs = self.conj()?;
                lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&LTok::Xor) {
                let rhs = self.conj()?;
                lhs = Formula::Xor(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn conj(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.eat(&LTok::And) {
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.fail("unexpected end of formula"),
        };
        self.pos += 1;
        match tok {
            LTok::Not => Ok(Formula::Not(Box::new(self.unary()?))),
            LTok::True => Ok(Formula::True),
            LTok::False => Ok(Formula::False),
            LTok::Atom(a) => Ok(Formula::Atom(a)),
            LTok::Open => {
                let f = self.iff()?;
                if !self.eat(&LTok::Close) {
                    return self.fail("expected `)`");
                }
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                self.fail("expected an atom, constant, `!` or `(`")
            }
        }
    }
}

impl Formula {
    pub fn parse(src: &str) -> Result<Formula, LogicError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, len: src.len() };
        let f = p.iff()?;
        if p.pos != p.toks.len() {
            return p.fail("unexpected trailing input");
        }
        Ok(f)
    }

    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
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

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `T` for an empty list.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(a) => a.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Xor(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Atoms with the polarity they occur under (`true` = unnegated).
    pub fn literals(&self) -> BTreeSet<(String, bool)> {
        let mut out = BTreeSet::new();
        self.collect_literals(true, &mut out);
        out
    }

    fn collect_literals(&self, positive: bool, out: &mut BTreeSet<(String, bool)>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert((a.clone(), positive));
            }
            Formula::Not(a) => a.collect_literals(!positive, out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Xor(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_literals(positive, out);
                b.collect_literals(positive, out);
            }
        }
    }

    pub fn eval(&self, v: &Valuation) -> Result<bool, LogicError> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => *v.get(a).ok_or_else(|| LogicError::UnboundAtom(a.clone()))?,
            Formula::Not(a) => !a.eval(v)?,
            Formula::And(a, b) => a.eval(v)? & b.eval(v)?,
            Formula::Or(a, b) => a.eval(v)? | b.eval(v)?,
            Formula::Xor(a, b) => a.eval(v)? ^ b.eval(v)?,
            Formula::Implies(a, b) => !a.eval(v)? | b.eval(v)?,
            Formula::Iff(a, b) => a.eval(v)? == b.eval(v)?,
        })
    }

    /// Raw arithmetic translation, before idempotent reduction.
    fn translate_raw(&self) -> Polynomial {
        let one = Polynomial::one();
        let two = Polynomial::from_int(2);
        match self {
            Formula::True => one,
            Formula::False => Polynomial::zero(),
            Formula::Atom(a) => Polynomial::var(&atom_variable(a)),
            Formula::Not(a) => &one - &a.translate_raw(),
            Formula::And(a, b) => &a.translate_raw() * &b.translate_raw(),
            Formula::Xor(a, b) => {
                let (p, q) = (a.translate_raw(), b.translate_raw());
                &(&p + &q) - &(&two * &(&p * &q))
            }
            Formula::Or(a, b) => {
                let (p, q) = (a.translate_raw(), b.translate_raw());
                &(&p + &q) - &(&p * &q)
            }
            Formula::Implies(a, b) => {
                let (p, q) = (a.translate_raw(), b.translate_raw());
                &(&one - &p) + &(&p * &q)
            }
            Formula::Iff(a, b) => {
                let (p, q) = (a.translate_raw(), b.translate_raw());
                &(&(&one - &p) - &q) + &(&two * &(&p * &q))
            }
        }
    }

    /// Arithmetic form over lower-cased atom variables, with `v^2 = v` applied.
    pub fn translate(&self) -> Polynomial {
        let vars: BTreeSet<String> = self.atoms().iter().map(|a| atom_variable(a)).collect();
        self.translate_raw().idempotent_reduce(&vars)
    }

    /// Rows over the sorted atoms, `T` before `F`.
    pub fn truth_table(&self) -> Vec<(Valuation, bool)> {
        let atoms: Vec<String> = self.atoms().into_iter().collect();
        self.truth_table_over(&atoms).expect("every atom is covered")
    }

    pub fn truth_table_over(&self, atoms: &[String]) -> Result<Vec<(Valuation, bool)>, LogicError> {
        valuations(atoms)
            .into_iter()
            .map(|v| {
                let value = self.eval(&v)?;
                Ok((v, value))
            })
            .collect()
    }

    pub fn classify(&self) -> TruthTableClass {
        let rows = self.truth_table();
        if rows.iter().all(|r| r.1) {
            TruthTableClass::Tautology
        } else if rows.iter().any(|r| r.1) {
            TruthTableClass::Contingent
        } else {
            TruthTableClass::Contradiction
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) | Formula::Xor(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) => 5,
            _ => 6,
        }
    }
}

/// Polynomial variable standing for an atom.
pub fn atom_variable(atom: &str) -> String {
    atom.to_lowercase()
}

/// All valuations over `atoms`, in T-before-F lexicographic order.
pub fn valuations(atoms: &[String]) -> Vec<Valuation> {
    let n = atoms.len();
    (0..1usize << n)
        .map(|row| {
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), row & (1 << (n - 1 - i)) == 0))
                .collect()
        })
        .collect()
}

/// `Σ cᵢ Π (xⱼ or 1 - xⱼ)` with rows in truth-table order.
pub fn indicator_expansion(coefficients: &[Rational], atoms: &[String]) -> Result<Polynomial, LogicError> {
    let rows = valuations(atoms);
    if coefficients.len() != rows.len() {
        return Err(LogicError::CoefficientCount { expected: rows.len(), got: coefficients.len() });
    }
    let mut out = Polynomial::zero();
    for (c, v) in coefficients.iter().zip(rows) {
        let mut term = Polynomial::constant(c.clone());
        for a in atoms {
            let x = Polynomial::var(&atom_variable(a));
            let factor = if v[a] { x } else { &Polynomial::one() - &x };
            term = &term * &factor;
        }
        out = out + term;
    }
    Ok(out)
}

/// Evaluates a translated polynomial at a 0/1 point given by a valuation.
pub fn evaluate_translation(p: &Polynomial, v: &Valuation) -> Result<Rational, LogicError> {
    let point: BTreeMap<String, Rational> = v
        .iter()
        .map(|(a, b)| (atom_variable(a), crate::rational::int(*b as i64)))
        .collect();
    p.evaluate(&point).map_err(|e| match e {
        crate::polynomial::PolyError::UnboundVariable(x) => LogicError::UnboundAtom(x),
        other => LogicError::UnboundAtom(other.to_string()),
    })
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &Formula, b: &Formula, op: &str, right_assoc: bool| {
            let p = self.prec();
            let lp = a.prec() < p || (a.prec() == p && right_assoc);
            let rp = b.prec() < p || (b.prec() == p && !right_assoc);
            let l = if lp { format!("({a})") } else { a.to_string() };
            let r = if rp { format!("({b})") } else { b.to_string() };
            write!(f, "{l} {op} {r}")
        };
        match self {
            Formula::True => write!(f, "T"),
            Formula::False => write!(f, "F"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => {
                if a.prec() < 5 {
                    write!(f, "!({a})")
                } else {
                    write!(f, "!{a}")
                }
            }
            Formula::And(a, b) => binary(f, a, b, "&", false),
            Formula::Or(a, b) => binary(f, a, b, "|", false),
            Formula::Xor(a, b) => binary(f, a, b, "^", false),
            Formula::Implies(a, b) => binary(f, a, b, "->", true),
            Formula::Iff(a, b) => binary(f, a, b, "<->", false),
        }
    }
}

/// Monomial `Π xᵢ` over the named atoms.
pub fn atom_monomial(atoms: &[String]) -> Monomial {
    Monomial::from_factors(atoms.iter().map(|a| (atom_variable(a), 1)))
}
