//! Tokenizer and expression grammar shared by polynomial text and model files.
//!
//! Products may be written with `*` or by juxtaposition (`2 x y`, `x(1-z)`).
//! Division is kept as a quotient; plain polynomial parsing only allows
//! division by constants.

use std::fmt;

use num_traits::Zero;

use crate::polynomial::{FractionalPolynomial, Polynomial};
use crate::proplogic::Formula;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(Rational, String),
    Str(String),
    /// Raw text between `[` and `]`, parsed later as a formula.
    Bracket(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Num(_, raw) => write!(f, "{raw}"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Bracket(s) => write!(f, "[{s}]"),
            Tok::Sym(s) => write!(f, "{s}"),
        }
    }
}

const SYMBOLS: &[&str] = &[
    "|-", "=>", "<=", ">=", "!=", "+", "-", "*", "/", "^", "(", ")", "{", "}", ",", ";", ":", "=",
    "<", ">", "|", "&", "!", "~", "@",
];

pub fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' {
                j += 1;
            }
            if j >= chars.len() {
                return Err("unterminated string".into());
            }
            out.push(Tok::Str(chars[start..j].iter().collect()));
            i = j + 1;
            continue;
        }
        if c == '[' {
            let mut depth = 1;
            let mut j = i + 1;
            while j < chars.len() && depth > 0 {
                match chars[j] {
                    '[' => depth += 1,
                    ']' => depth -= 1,
                    _ => {}
                }
                j += 1;
            }
            if depth != 0 {
                return Err("unterminated `[`".into());
            }
            out.push(Tok::Bracket(chars[i + 1..j - 1].iter().collect()));
            i = j;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let raw: String = chars[start..i].iter().collect();
            let value = parse_rational(&raw).ok_or_else(|| format!("bad number `{raw}`"))?;
            out.push(Tok::Num(value, raw));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let unicode = match c {
            '⇒' => Some("=>"),
            '⊢' => Some("|-"),
            '≤' => Some("<="),
            '≥' => Some(">="),
            '≠' => Some("!="),
            '¬' => Some("!"),
            '·' => Some("*"),
            _ => None,
        };
        if let Some(sym) = unicode {
            out.push(Tok::Sym(sym));
            i += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                out.push(Tok::Sym(sym));
                i += sym.chars().count();
            }
            None => return Err(format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

/// Cursor over a token slice.
pub struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Tok]) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k)
    }

    pub fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, s: &str) -> bool {
        if self.is_ident(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), String> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s.clone()),
            other => Err(format!("expected a name, found {}", describe(other))),
        }
    }

    pub fn expect_end(&self) -> Result<(), String> {
        if self.at_end() {
            Ok(())
        } else {
            Err(format!("unexpected trailing {}", self.describe()))
        }
    }

    pub fn describe(&self) -> String {
        describe(self.peek())
    }
}

pub fn describe(t: Option<&Tok>) -> String {
    match t {
        Some(t) => format!("`{t}`"),
        None => "end of input".to_string(),
    }
}

/// Reference to a variable inside `P(...)`: a name or an inline formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarRef {
    Name(String),
    Formula(Formula),
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRef::Name(n) => write!(f, "{n}"),
            VarRef::Formula(fm) => write!(f, "[{fm}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventSpec {
    pub var: VarRef,
    pub state: bool,
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.var, if self.state { "T" } else { "F" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Param(String),
    /// `P(target | given)` over the modelled distribution.
    Prob { target: Vec<EventSpec>, given: Vec<EventSpec> },
    /// `P0(...)`: a cell of an input table.
    Input { target: Vec<EventSpec>, given: Vec<EventSpec> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Rational),
    Atom(Atom),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

fn events_str(evs: &[EventSpec]) -> String {
    evs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, target, given) = match self {
            Atom::Param(p) => return write!(f, "{p}"),
            Atom::Prob { target, given } => ("P", target, given),
            Atom::Input { target, given } => ("P0", target, given),
        };
        if given.is_empty() {
            write!(f, "{name}({})", events_str(target))
        } else {
            write!(f, "{name}({}|{})", events_str(target), events_str(given))
        }
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Atom(_) => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, min: u8| -> String {
            if e.prec() < min {
                format!("({e})")
            } else {
                e.to_string()
            }
        };
        match self {
            Expr::Num(r) => {
                if r < &Rational::zero() {
                    write!(f, "({})", format_rational(r))
                } else if r.is_integer() {
                    write!(f, "{}", format_rational(r))
                } else {
                    // Fractions print as a parenthesised quotient so they re-parse.
                    write!(f, "({})", format_rational(r))
                }
            }
            Expr::Atom(a) => write!(f, "{a}"),
            Expr::Add(a, b) => write!(f, "{} + {}", wrap(a, 1), wrap(b, 2)),
            Expr::Sub(a, b) => write!(f, "{} - {}", wrap(a, 1), wrap(b, 2)),
            Expr::Mul(a, b) => write!(f, "{} * {}", wrap(a, 2), wrap(b, 3)),
            Expr::Div(a, b) => write!(f, "{} / {}", wrap(a, 2), wrap(b, 3)),
            Expr::Neg(a) => write!(f, "-{}", wrap(a, 4)),
            Expr::Pow(a, e) => write!(f, "{}^{e}", wrap(a, 5)),
        }
    }
}

pub fn parse_expr(cur: &mut Cursor) -> Result<Expr, String> {
    let mut lhs = parse_term(cur)?;
    loop {
        if cur.eat_sym("+") {
            let rhs = parse_term(cur)?;
            lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
        } else if cur.eat_sym("-") {
            let rhs = parse_term(cur)?;
            lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

/// Words that end an expression instead of multiplying into it.
pub const KEYWORDS: [&str; 5] = ["given", "over", "fact", "by", "in"];

fn starts_factor(cur: &Cursor) -> bool {
    match cur.peek() {
        Some(Tok::Ident(w)) => !KEYWORDS.contains(&w.as_str()),
        other => matches!(other, Some(Tok::Num(..)) | Some(Tok::Sym("("))),
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Expr, String> {
    let mut lhs = parse_unary(cur)?;
    loop {
        if cur.eat_sym("*") {
            let rhs = parse_unary(cur)?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        } else if cur.eat_sym("/") {
            let rhs = parse_unary(cur)?;
            lhs = match (lhs, rhs) {
                (Expr::Num(a), Expr::Num(b)) => {
                    if b.is_zero() {
                        return Err("division by zero".into());
                    }
                    Expr::Num(a / b)
                }
                (a, b) => Expr::Div(Box::new(a), Box::new(b)),
            };
        } else if starts_factor(cur) {
            let rhs = parse_power(cur)?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn parse_unary(cur: &mut Cursor) -> Result<Expr, String> {
    if cur.eat_sym("-") {
        return Ok(match parse_unary(cur)? {
            Expr::Num(r) => Expr::Num(-r),
            e => Expr::Neg(Box::new(e)),
        });
    }
    if cur.eat_sym("+") {
        return parse_unary(cur);
    }
    parse_power(cur)
}

fn parse_power(cur: &mut Cursor) -> Result<Expr, String> {
    let base = parse_primary(cur)?;
    if cur.eat_sym("^") {
        match cur.next() {
            Some(Tok::Num(r, raw)) if r.is_integer() && r >= &Rational::zero() => {
                let e: u32 = r
                    .to_integer()
                    .try_into()
                    .map_err(|_| format!("exponent `{raw}` too large"))?;
                Ok(Expr::Pow(Box::new(base), e))
            }
            other => Err(format!("expected a non-negative integer exponent, found {}", describe(other))),
        }
    } else {
        Ok(base)
    }
}

fn parse_primary(cur: &mut Cursor) -> Result<Expr, String> {
    match cur.next() {
        Some(Tok::Num(r, _)) => Ok(Expr::Num(r.clone())),
        Some(Tok::Sym("(")) => {
            let e = parse_expr(cur)?;
            cur.expect_sym(")")?;
            Ok(e)
        }
        Some(Tok::Ident(name)) if (name == "P" || name == "P0") && cur.is_sym("(") => {
            cur.expect_sym("(")?;
            let target = parse_events(cur)?;
            let given = if cur.eat_sym("|") { parse_events(cur)? } else { Vec::new() };
            cur.expect_sym(")")?;
            Ok(Expr::Atom(if name == "P" {
                Atom::Prob { target, given }
            } else {
                Atom::Input { target, given }
            }))
        }
        Some(Tok::Ident(name)) => Ok(Expr::Atom(Atom::Param(name.clone()))),
        other => Err(format!("expected an expression, found {}", describe(other))),
    }
}

/// Comma separated events: `A=T`, `A`, `!A`, `~A`, `[A & B]=F`.
pub fn parse_events(cur: &mut Cursor) -> Result<Vec<EventSpec>, String> {
    let mut out = vec![parse_event(cur)?];
    while cur.eat_sym(",") {
        out.push(parse_event(cur)?);
    }
    Ok(out)
}

pub fn parse_event(cur: &mut Cursor) -> Result<EventSpec, String> {
    let negated = cur.eat_sym("!") || cur.eat_sym("~");
    let var = match cur.next() {
        Some(Tok::Ident(n)) => VarRef::Name(n.clone()),
        Some(Tok::Bracket(src)) => VarRef::Formula(Formula::parse(src).map_err(|e| e.to_string())?),
        other => return Err(format!("expected an event, found {}", describe(other))),
    };
    let mut state = true;
    if cur.eat_sym("=") {
        state = parse_state(cur)?;
    }
    Ok(EventSpec { var, state: state != negated })
}

pub fn parse_state(cur: &mut Cursor) -> Result<bool, String> {
    match cur.next() {
        Some(Tok::Ident(s)) if s == "T" => Ok(true),
        Some(Tok::Ident(s)) if s == "F" => Ok(false),
        other => Err(format!("expected `T` or `F`, found {}", describe(other))),
    }
}

/// Value of an expression: a polynomial or an uncancelled quotient.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Poly(Polynomial),
    Frac(Polynomial, Polynomial),
}

impl Value {
    fn parts(self) -> (Polynomial, Option<Polynomial>) {
        match self {
            Value::Poly(p) => (p, None),
            Value::Frac(n, d) => (n, Some(d)),
        }
    }

    fn combine(a: Value, b: Value, op: fn(&Polynomial, &Polynomial) -> Polynomial) -> Value {
        match (a.parts(), b.parts()) {
            ((p, None), (q, None)) => Value::Poly(op(&p, &q)),
            ((n, Some(d)), (q, None)) => Value::Frac(op(&n, &(&q * &d)), d),
            ((p, None), (n, Some(d))) => Value::Frac(op(&(&p * &d), &n), d),
            ((n1, Some(d1)), (n2, Some(d2))) => {
                if d1 == d2 {
                    Value::Frac(op(&n1, &n2), d1)
                } else {
                    Value::Frac(op(&(&n1 * &d2), &(&n2 * &d1)), &d1 * &d2)
                }
            }
        }
    }

    pub fn into_fraction(self) -> Result<FractionalPolynomial, String> {
        match self {
            Value::Poly(p) => FractionalPolynomial::new(p, Polynomial::one()).map_err(|e| e.to_string()),
            Value::Frac(n, d) => FractionalPolynomial::new(n, d).map_err(|e| e.to_string()),
        }
    }
}

impl Expr {
    /// Evaluates with `resolve` supplying the value of every atom.
    pub fn eval<F>(&self, resolve: &mut F) -> Result<Value, String>
    where
        F: FnMut(&Atom) -> Result<Value, String>,
    {
        Ok(match self {
            Expr::Num(r) => Value::Poly(Polynomial::constant(r.clone())),
            Expr::Atom(a) => resolve(a)?,
            Expr::Add(a, b) => Value::combine(a.eval(resolve)?, b.eval(resolve)?, |p, q| p + q),
            Expr::Sub(a, b) => Value::combine(a.eval(resolve)?, b.eval(resolve)?, |p, q| p - q),
            Expr::Neg(a) => match a.eval(resolve)? {
                Value::Poly(p) => Value::Poly(-p),
                Value::Frac(n, d) => Value::Frac(-n, d),
            },
            Expr::Mul(a, b) => match (a.eval(resolve)?.parts(), b.eval(resolve)?.parts()) {
                ((p, None), (q, None)) => Value::Poly(&p * &q),
                ((n, Some(d)), (q, None)) | ((q, None), (n, Some(d))) => Value::Frac(&n * &q, d),
                ((n1, Some(d1)), (n2, Some(d2))) => Value::Frac(&n1 * &n2, &d1 * &d2),
            },
            Expr::Div(a, b) => {
                let (n1, d1) = a.eval(resolve)?.parts();
                let (n2, d2) = b.eval(resolve)?.parts();
                if n2.is_zero() {
                    return Err("division by zero".into());
                }
                let num = match d2 {
                    Some(d2) => &n1 * &d2,
                    None => n1,
                };
                let den = match d1 {
                    Some(d1) => &d1 * &n2,
                    None => n2,
                };
                match den.as_constant() {
                    Some(c) => Value::Poly(num.scale(&(Rational::from_integer(1.into()) / c))),
                    None => Value::Frac(num, den),
                }
            }
            Expr::Pow(a, e) => match a.eval(resolve)? {
                Value::Poly(p) => Value::Poly(p.pow(*e)),
                Value::Frac(n, d) => Value::Frac(n.pow(*e), d.pow(*e)),
            },
        })
    }

    /// Every probability atom in the expression.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Expr::Num(_) => {}
            Expr::Atom(a) => out.push(a),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_atoms(out),
        }
    }
}

pub fn parse_expr_str(src: &str) -> Result<Expr, String> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks);
    let e = parse_expr(&mut cur)?;
    cur.expect_end()?;
    Ok(e)
}

pub fn parse_plain_polynomial(src: &str) -> Result<Polynomial, String> {
    let e = parse_expr_str(src)?;
    match e.eval(&mut |a| match a {
        Atom::Param(p) => Ok(Value::Poly(Polynomial::var(p))),
        other => Err(format!("`{other}` is not allowed in a plain polynomial")),
    })? {
        Value::Poly(p) => Ok(p),
        Value::Frac(..) => Err("division by a non-constant".into()),
    }
}
