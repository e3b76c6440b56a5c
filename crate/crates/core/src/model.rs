//! Line-oriented model files.
//!
//! ```text
//! model butter
//! var A, B
//! param x, y, z in [0,1]
//! table P0(A) { T: x }
//! table P0(B|A) { T|T: y ; T|F: z }
//! assert P(A=T) = 0
//! cond S3 = su k=1 : A => B
//! query set P(A=F) given { P(B=T) = 0 ; P0(B=T|A=T) = 1 }
//! expect set = {1.000}
//! ```
//!
//! `#` starts a comment. A statement continues onto following lines while
//! its braces are unbalanced. `measures <name> {` opens a raw table block
//! closed by a line holding only `}`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::conditionals::{Body, ConditionalStatement, Kind, Sense, Term};
use crate::deduction::SetTerm;
use crate::expr::{self, Cursor, Expr, Tok};
use crate::lower::{self, ProbConstraint};
use crate::measures::{MeasureTable, Selector};
use crate::polynomial::Polynomial;
use crate::probnet::state_label;
use crate::proplogic::Formula;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ModelError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Interval(Rational, Rational),
    Integers(Rational, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub given: Vec<bool>,
    pub state: bool,
    pub value: Polynomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Equals,
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub key: String,
    pub op: Op,
    pub value: String,
}

impl Expectation {
    pub fn check(&self, actual: Option<&str>) -> bool {
        match (actual, &self.op) {
            (Some(a), Op::Equals) => a.trim() == self.value.trim(),
            (Some(a), Op::Contains) => a.contains(self.value.trim()),
            (None, _) => false,
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Op::Equals => "=",
            Op::Contains => "~",
        };
        write!(f, "expect {} {op} {}", self.key, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Value(Expr),
    Set { objective: Expr, given: Vec<ProbConstraint> },
    Status { cond: String, given: Vec<ProbConstraint> },
    Consistent { conds: Vec<String>, given: Vec<ProbConstraint> },
    Deduce { premises: Vec<Formula>, conclusion: Formula },
    BStatus { antecedent: Formula, consequent: Formula, given: Vec<ProbConstraint> },
    Family { term: SetTerm, over: Vec<String> },
    Valuations { cond: String, over: Vec<String> },
    Counterexamples { premise: String, conclusion: String, over: Vec<String> },
    Factuality { cond: String, fact: Term },
    Compile { cond: String },
    Measure { event: Selector, given: Option<Selector>, measure: String, table: Option<String> },
    MeasureCond { antecedent: Selector, consequent: Selector, k: Rational, measure: String, table: Option<String> },
    Classify(Formula),
    Translate(Formula),
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::Value(_) => "value",
            Query::Set { .. } => "set",
            Query::Status { .. } => "status",
            Query::Consistent { .. } => "consistent",
            Query::Deduce { .. } => "deduce",
            Query::BStatus { .. } => "bstatus",
            Query::Family { .. } => "family",
            Query::Valuations { .. } => "valuations",
            Query::Counterexamples { .. } => "counterexamples",
            Query::Factuality { .. } => "factuality",
            Query::Compile { .. } => "compile",
            Query::Measure { .. } => "measure",
            Query::MeasureCond { .. } => "measure",
            Query::Classify(_) => "classify",
            Query::Translate(_) => "translate",
        }
    }

    /// Probability constraints and expressions that may hold inline formulas.
    pub fn inline_formulas(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        let mut given = |g: &[ProbConstraint]| {
            for c in g {
                out.extend(c.formulas());
            }
        };
        match self {
            Query::Set { given: g, .. }
            | Query::Status { given: g, .. }
            | Query::Consistent { given: g, .. }
            | Query::BStatus { given: g, .. } => given(g),
            _ => {}
        }
        match self {
            Query::Value(e) | Query::Set { objective: e, .. } => out.extend(lower::expr_formulas(e)),
            Query::BStatus { antecedent, consequent, .. } => {
                out.push(Formula::and(antecedent.clone(), Formula::not(consequent.clone())));
                out.push(Formula::and(antecedent.clone(), consequent.clone()));
            }
            _ => {}
        }
        out
    }
}

fn given_str(g: &[ProbConstraint]) -> String {
    if g.is_empty() {
        String::new()
    } else {
        let parts: Vec<String> = g.iter().map(|c| c.to_string()).collect();
        format!(" given {{ {} }}", parts.join(" ; "))
    }
}

fn over_str(over: &[String]) -> String {
    if over.is_empty() {
        String::new()
    } else {
        format!(" over {}", over.join(", "))
    }
}

fn table_str(t: &Option<String>) -> String {
    t.as_ref().map(|t| format!(" in {t}")).unwrap_or_default()
}

fn q(f: &impl fmt::Display) -> String {
    format!("\"{f}\"")
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Value(e) => write!(f, "query {e}"),
            Query::Set { objective, given } => write!(f, "query set {objective}{}", given_str(given)),
            Query::Status { cond, given } => write!(f, "query status {cond}{}", given_str(given)),
            Query::Consistent { conds, given } => write!(f, "query consistent {}{}", conds.join(", "), given_str(given)),
            Query::Deduce { premises, conclusion } => {
                let ps: Vec<String> = premises.iter().map(q).collect();
                write!(f, "query deduce {{ {} }} |- {}", ps.join(" ; "), q(conclusion))
            }
            Query::BStatus { antecedent, consequent, given } => {
                write!(f, "query bstatus {} => {}{}", q(antecedent), q(consequent), given_str(given))
            }
            Query::Family { term, over } => write!(f, "query family {}{}", q(term), over_str(over)),
            Query::Valuations { cond, over } => write!(f, "query valuations {cond}{}", over_str(over)),
            Query::Counterexamples { premise, conclusion, over } => {
                write!(f, "query counterexamples {premise} |- {conclusion}{}", over_str(over))
            }
            Query::Factuality { cond, fact } => {
                write!(f, "query factuality {cond} fact {}={}", fact.variable, if fact.asserted { "T" } else { "F" })
            }
            Query::Compile { cond } => write!(f, "query compile {cond}"),
            Query::Measure { event, given, measure, table } => {
                let g = given.as_ref().map(|g| format!(" | {g}")).unwrap_or_default();
                write!(f, "query measure P({event}{g}) by {measure}{}", table_str(table))
            }
            Query::MeasureCond { antecedent, consequent, k, measure, table } => write!(
                f,
                "query measure M({antecedent} => {consequent}) k={} by {measure}{}",
                format_rational(k),
                table_str(table)
            ),
            Query::Classify(fm) => write!(f, "query classify {}", q(fm)),
            Query::Translate(fm) => write!(f, "query translate {}", q(fm)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Model(String),
    Var(String),
    Param { name: String, domain: Domain },
    Table { target: String, given: Vec<String>, rows: Vec<TableRow> },
    Joint { vars: Vec<String>, cells: Vec<(Vec<bool>, Polynomial)> },
    Embed { name: String, formula: Formula },
    Assert(ProbConstraint),
    Cond { id: String, statement: ConditionalStatement },
    Measures { name: String, table: MeasureTable },
    Query { query: Query, expect: Vec<Expectation> },
}

fn render_states(s: &[bool]) -> String {
    state_label(s)
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Model(n) => write!(f, "model {n}"),
            Item::Var(v) => write!(f, "var {v}"),
            Item::Param { name, domain } => match domain {
                Domain::Interval(a, b) => write!(f, "param {name} in [{},{}]", format_rational(a), format_rational(b)),
                Domain::Integers(a, b) => {
                    let mut vals = Vec::new();
                    let mut v = a.clone();
                    while &v <= b {
                        vals.push(format_rational(&v));
                        v += Rational::from_integer(1.into());
                    }
                    write!(f, "param {name} int in {{{}}}", vals.join(","))
                }
            },
            Item::Table { target, given, rows } => {
                let head = if given.is_empty() { target.clone() } else { format!("{target}|{}", given.join(",")) };
                let rs: Vec<String> = rows
                    .iter()
                    .map(|r| {
                        let s = render_states(&[r.state]);
                        if given.is_empty() {
                            format!("{s}: {}", r.value)
                        } else {
                            format!("{s}|{}: {}", render_states(&r.given), r.value)
                        }
                    })
                    .collect();
                write!(f, "table P0({head}) {{ {} }}", rs.join(" ; "))
            }
            Item::Joint { vars, cells } => {
                let cs: Vec<String> = cells.iter().map(|(s, p)| format!("{}: {p}", render_states(s))).collect();
                write!(f, "joint P0({}) {{ {} }}", vars.join(","), cs.join(" ; "))
            }
            Item::Embed { name, formula } => write!(f, "embed {name} = \"{formula}\""),
            Item::Assert(c) => write!(f, "assert {c}"),
            Item::Cond { id, statement } => write!(f, "cond {id} = {statement}"),
            Item::Measures { name, table } => {
                writeln!(f, "measures {name} {{")?;
                for line in table.render().lines() {
                    writeln!(f, "  {line}")?;
                }
                write!(f, "}}")
            }
            Item::Query { query, expect } => {
                write!(f, "{query}")?;
                for e in expect {
                    write!(f, "\n{e}")?;
                }
                Ok(())
            }
        }
    }
}

/// A parsed model. Equality ignores line numbers.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub items: Vec<Item>,
    pub lines: Vec<usize>,
}

impl PartialEq for ModelFile {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
}

impl ModelFile {
    pub fn name(&self) -> Option<&str> {
        self.items.iter().find_map(|i| match i {
            Item::Model(n) => Some(n.as_str()),
            _ => None,
        })
    }

    pub fn conditional(&self, id: &str) -> Option<&ConditionalStatement> {
        self.items.iter().find_map(|i| match i {
            Item::Cond { id: x, statement } if x == id => Some(statement),
            _ => None,
        })
    }

    pub fn queries(&self) -> impl Iterator<Item = (usize, &Query, &[Expectation])> {
        self.items.iter().zip(&self.lines).filter_map(|(i, l)| match i {
            Item::Query { query, expect } => Some((*l, query, expect.as_slice())),
            _ => None,
        })
    }

    pub fn parse(src: &str) -> Result<ModelFile, ModelError> {
        let mut items = Vec::new();
        let mut lines = Vec::new();
        let raw: Vec<&str> = src.lines().collect();
        let mut i = 0;
        while i < raw.len() {
            let start = i + 1;
            let mut text = strip_comment(raw[i]).trim().to_string();
            i += 1;
            if text.is_empty() {
                continue;
            }
            if let Some(rest) = text.strip_prefix("measures ") {
                let Some(name) = rest.trim().strip_suffix('{') else {
                    return Err(err(start, "expected `measures <name> {`"));
                };
                let name = name.trim().to_string();
                let mut body = String::new();
                let mut closed = false;
                while i < raw.len() {
                    let l = raw[i];
                    i += 1;
                    if l.trim() == "}" {
                        closed = true;
                        break;
                    }
                    body.push_str(l);
                    body.push('\n');
                }
                if !closed {
                    return Err(err(start, "unterminated measures block"));
                }
                let table = MeasureTable::parse_from(&body, start + 1).map_err(|e| err(start, &e.to_string()))?;
                items.push(Item::Measures { name, table });
                lines.push(start);
                continue;
            }
            while depth(&text) > 0 && i < raw.len() {
                text.push(' ');
                text.push_str(strip_comment(raw[i]).trim());
                i += 1;
            }
            if depth(&text) != 0 {
                return Err(err(start, "unbalanced braces"));
            }
            if let Some(rest) = text.strip_prefix("expect ") {
                let e = parse_expectation(rest).map_err(|m| err(start, &m))?;
                match items.last_mut() {
                    Some(Item::Query { expect, .. }) => expect.push(e),
                    _ => return Err(err(start, "`expect` must follow a query")),
                }
                continue;
            }
            for mut item in parse_statement(&text).map_err(|m| err(start, &m))? {
                if let Item::Cond { id, .. } = &mut item {
                    if id.is_empty() {
                        *id = format!("c{}", items.iter().filter(|i| matches!(i, Item::Cond { .. })).count() + 1);
                    }
                }
                items.push(item);
                lines.push(start);
            }
        }
        let m = ModelFile { items, lines };
        m.validate()?;
        Ok(m)
    }

    /// Declaration-before-use and reference checks.
    fn validate(&self) -> Result<(), ModelError> {
        let mut vars = Vec::new();
        let mut params = Vec::new();
        let mut conds = Vec::new();
        let mut tables = 0;
        for (item, &line) in self.items.iter().zip(&self.lines) {
            let known_var = |v: &String, vars: &Vec<String>| {
                if vars.contains(v) {
                    Ok(())
                } else {
                    Err(err(line, &format!("variable `{v}` is not declared")))
                }
            };
            let known_cond = |c: &String, conds: &Vec<String>| {
                if conds.contains(c) {
                    Ok(())
                } else {
                    Err(err(line, &format!("conditional `{c}` is not declared")))
                }
            };
            let known_params = |p: &Polynomial, params: &Vec<String>| {
                for v in p.variables() {
                    if !params.contains(&v) {
                        return Err(err(line, &format!("parameter `{v}` is not declared")));
                    }
                }
                Ok(())
            };
            match item {
                Item::Model(_) => {}
                Item::Var(v) => {
                    if v == "T" || v == "F" {
                        return Err(err(line, "`T` and `F` are reserved"));
                    }
                    if vars.contains(v) || params.contains(v) {
                        return Err(err(line, &format!("`{v}` is already declared")));
                    }
                    vars.push(v.clone());
                }
                Item::Param { name, domain } => {
                    if vars.contains(name) || params.contains(name) {
                        return Err(err(line, &format!("`{name}` is already declared")));
                    }
                    let (Domain::Interval(a, b) | Domain::Integers(a, b)) = domain;
                    if a > b {
                        return Err(err(line, &format!("parameter `{name}` has an empty range")));
                    }
                    params.push(name.clone());
                }
                Item::Table { target, given, rows } => {
                    known_var(target, &vars)?;
                    for g in given {
                        known_var(g, &vars)?;
                    }
                    for r in rows {
                        known_params(&r.value, &params)?;
                    }
                    tables += 1;
                }
                Item::Joint { vars: vs, cells } => {
                    for v in vs {
                        known_var(v, &vars)?;
                    }
                    for (_, p) in cells {
                        known_params(p, &params)?;
                    }
                    tables += 1;
                }
                Item::Embed { name, formula } => {
                    for a in formula.atoms() {
                        known_var(&a, &vars)?;
                    }
                    vars.push(name.clone());
                }
                Item::Assert(c) => {
                    for p in [&c.lhs, &c.rhs] {
                        for a in p.atoms() {
                            if let expr::Atom::Param(n) = a {
                                if !params.contains(n) {
                                    return Err(err(line, &format!("parameter `{n}` is not declared")));
                                }
                            }
                        }
                    }
                }
                Item::Cond { id, .. } => {
                    if conds.contains(id) {
                        return Err(err(line, &format!("conditional `{id}` is already declared")));
                    }
                    conds.push(id.clone());
                }
                Item::Measures { .. } => {}
                Item::Query { query, .. } => match query {
                    Query::Status { cond, .. } | Query::Valuations { cond, .. } | Query::Compile { cond } => {
                        known_cond(cond, &conds)?
                    }
                    Query::Factuality { cond, .. } => known_cond(cond, &conds)?,
                    Query::Consistent { conds: cs, .. } => {
                        for c in cs {
                            known_cond(c, &conds)?;
                        }
                    }
                    Query::Counterexamples { premise, conclusion, .. } => {
                        known_cond(premise, &conds)?;
                        known_cond(conclusion, &conds)?;
                    }
                    _ => {}
                },
            }
        }
        let _ = tables;
        Ok(())
    }
}

fn err(line: usize, m: &str) -> ModelError {
    ModelError { line, message: m.to_string() }
}

fn strip_comment(l: &str) -> &str {
    let mut in_str = false;
    for (i, c) in l.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &l[..i],
            _ => {}
        }
    }
    l
}

fn depth(s: &str) -> i64 {
    let mut d = 0;
    let mut in_str = false;
    for c in s.chars() {
        match c {
            '"' => in_str = !in_str,
            '{' if !in_str => d += 1,
            '}' if !in_str => d -= 1,
            _ => {}
        }
    }
    d
}

fn parse_expectation(s: &str) -> Result<Expectation, String> {
    let s = s.trim();
    let key_len = s.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(s.len());
    let key = &s[..key_len];
    if key.is_empty() {
        return Err("expected `expect <key> = <value>`".into());
    }
    let rest = s[key_len..].trim_start();
    let (op, value) = if let Some(v) = rest.strip_prefix('=') {
        (Op::Equals, v)
    } else if let Some(v) = rest.strip_prefix('~') {
        (Op::Contains, v)
    } else {
        return Err(format!("expected `=` or `~` after `{key}`"));
    };
    Ok(Expectation { key: key.to_string(), op, value: value.trim().to_string() })
}

fn names(cur: &mut Cursor) -> Result<Vec<String>, String> {
    let mut out = vec![cur.expect_ident()?];
    while cur.eat_sym(",") {
        out.push(cur.expect_ident()?);
    }
    Ok(out)
}

fn expect_str(cur: &mut Cursor, what: &str) -> Result<String, String> {
    match cur.next() {
        Some(Tok::Str(s)) => Ok(s.clone()),
        other => Err(format!("expected a quoted {what}, found {}", expr::describe(other))),
    }
}

/// A quoted formula, or a bare atom.
fn formula(cur: &mut Cursor) -> Result<Formula, String> {
    if let Some(Tok::Ident(a)) = cur.peek() {
        if !expr::KEYWORDS.contains(&a.as_str()) {
            cur.next();
            return Ok(Formula::atom(a));
        }
    }
    let s = expect_str(cur, "formula")?;
    Formula::parse(&s).map_err(|e| e.to_string())
}

fn rational_value(cur: &mut Cursor) -> Result<Rational, String> {
    let e = expr::parse_expr(cur)?;
    let p = expr::parse_plain_polynomial(&e.to_string())?;
    p.as_constant().ok_or_else(|| format!("`{e}` is not a number"))
}

fn states(cur: &mut Cursor, n: usize) -> Result<Vec<bool>, String> {
    match cur.next() {
        Some(Tok::Ident(s)) if s.len() == n && s.chars().all(|c| c == 'T' || c == 'F') => {
            Ok(s.chars().map(|c| c == 'T').collect())
        }
        other => Err(format!("expected {n} of T/F, found {}", expr::describe(other))),
    }
}

fn polynomial_until(cur: &mut Cursor) -> Result<Polynomial, String> {
    let e = expr::parse_expr(cur)?;
    expr::parse_plain_polynomial(&e.to_string())
}

fn given_block(cur: &mut Cursor) -> Result<Vec<ProbConstraint>, String> {
    if !cur.eat_ident("given") {
        return Ok(Vec::new());
    }
    cur.expect_sym("{")?;
    let mut out = Vec::new();
    while !cur.eat_sym("}") {
        out.push(lower::parse_prob_constraint(cur)?);
        if !cur.eat_sym(";") && !cur.is_sym("}") {
            return Err(format!("expected `;` or `}}`, found {}", cur.describe()));
        }
    }
    Ok(out)
}

fn over(cur: &mut Cursor) -> Result<Vec<String>, String> {
    if cur.eat_ident("over") {
        names(cur)
    } else {
        Ok(Vec::new())
    }
}

fn term(cur: &mut Cursor) -> Result<Term, String> {
    let e = expr::parse_event(cur)?;
    match e.var {
        expr::VarRef::Name(n) => Ok(Term::new(&n, e.state)),
        expr::VarRef::Formula(f) => Err(format!("conditionals take plain variables, found [{f}]")),
    }
}

fn parse_cond(cur: &mut Cursor) -> Result<ConditionalStatement, String> {
    let tag = cur.expect_ident()?;
    let kind = Kind::from_tag(&tag).ok_or_else(|| format!("unknown conditional type `{tag}`"))?;
    let sense_name = cur.expect_ident()?;
    cur.expect_sym("=")?;
    let sense = match sense_name.as_str() {
        "k" => Sense::Fraction(rational_value(cur)?),
        "K" => Sense::Boolean(expr::parse_state(cur)?),
        other => return Err(format!("expected `k=` or `K=`, found `{other}`")),
    };
    cur.expect_sym(":")?;
    let body = if matches!(cur.peek(), Some(Tok::Str(_))) {
        let antecedent = formula(cur)?;
        cur.expect_sym("=>")?;
        let consequent = formula(cur)?;
        Body::Formulas { antecedent, consequent }
    } else {
        let mut antecedent = Vec::new();
        if !cur.eat_ident("T") {
            antecedent.push(term(cur)?);
            while cur.eat_sym(",") {
                antecedent.push(term(cur)?);
            }
        }
        cur.expect_sym("=>")?;
        Body::Terms { antecedent, consequent: term(cur)? }
    };
    let given = given_block(cur)?;
    ConditionalStatement::new(kind, body, sense, given).map_err(|e| e.to_string())
}

fn parse_measure_query(rest: &str) -> Result<Query, String> {
    let (body, tail) = split_call(rest)?;
    let tail = tail.trim();
    let (k, tail) = match tail.strip_prefix("k=") {
        Some(t) => {
            let (kv, t) = t.split_once(char::is_whitespace).ok_or("expected `by <measure>`")?;
            (Some(parse_rational(kv).ok_or_else(|| format!("bad sense `{kv}`"))?), t.trim())
        }
        None => (None, tail),
    };
    let tail = tail.strip_prefix("by").ok_or("expected `by <measure>`")?.trim();
    let (measure, table) = match tail.split_once(" in ") {
        Some((m, t)) => (m.trim().to_string(), Some(t.trim().to_string())),
        None => (tail.to_string(), None),
    };
    if measure.is_empty() || measure.contains(char::is_whitespace) {
        return Err(format!("bad measure name `{measure}`"));
    }
    match body {
        Call::P(inner) => {
            let (event, given) = match inner.split_once('|') {
                Some((e, g)) => (Selector::parse(e), Some(Selector::parse(g))),
                None => (Selector::parse(&inner), None),
            };
            if k.is_some() {
                return Err("`k=` applies to `M(...)` only".into());
            }
            Ok(Query::Measure { event, given, measure, table })
        }
        Call::M(inner) => {
            let (a, c) = inner.split_once("=>").ok_or("expected `M(<event> => <event>)`")?;
            Ok(Query::MeasureCond {
                antecedent: Selector::parse(a),
                consequent: Selector::parse(c),
                k: k.unwrap_or_else(|| Rational::from_integer(1.into())),
                measure,
                table,
            })
        }
    }
}

enum Call {
    P(String),
    M(String),
}

fn split_call(s: &str) -> Result<(Call, &str), String> {
    let s = s.trim();
    let (ctor, rest): (fn(String) -> Call, &str) = if let Some(r) = s.strip_prefix("P(") {
        (Call::P, r)
    } else if let Some(r) = s.strip_prefix("M(") {
        (Call::M, r)
    } else {
        return Err("expected `P(...)` or `M(...)`".into());
    };
    let close = rest.rfind(')').ok_or("missing `)`")?;
    Ok((ctor(rest[..close].to_string()), &rest[close + 1..]))
}

fn parse_query(rest: &str) -> Result<Query, String> {
    let rest = rest.trim();
    if let Some(m) = rest.strip_prefix("measure ") {
        return parse_measure_query(m);
    }
    let toks = expr::tokenize(rest)?;
    let mut cur = Cursor::new(&toks);
    let keyword = match cur.peek() {
        Some(Tok::Ident(w)) if !cur.peek_at(1).is_some_and(|t| *t == Tok::Sym("(")) => w.clone(),
        _ => String::new(),
    };
    let q = match keyword.as_str() {
        "set" => {
            cur.next();
            let objective = expr::parse_expr(&mut cur)?;
            Query::Set { objective, given: given_block(&mut cur)? }
        }
        "status" => {
            cur.next();
            let cond = cur.expect_ident()?;
            Query::Status { cond, given: given_block(&mut cur)? }
        }
        "consistent" => {
            cur.next();
            let conds = if matches!(cur.peek(), Some(Tok::Ident(w)) if w != "given") { names(&mut cur)? } else { Vec::new() };
            Query::Consistent { conds, given: given_block(&mut cur)? }
        }
        "deduce" => {
            cur.next();
            cur.expect_sym("{")?;
            let mut premises = Vec::new();
            while !cur.eat_sym("}") {
                premises.push(formula(&mut cur)?);
                if !cur.eat_sym(";") && !cur.is_sym("}") {
                    return Err(format!("expected `;` or `}}`, found {}", cur.describe()));
                }
            }
            cur.expect_sym("|-")?;
            Query::Deduce { premises, conclusion: formula(&mut cur)? }
        }
        "bstatus" => {
            cur.next();
            let antecedent = formula(&mut cur)?;
            cur.expect_sym("=>")?;
            let consequent = formula(&mut cur)?;
            Query::BStatus { antecedent, consequent, given: given_block(&mut cur)? }
        }
        "family" => {
            cur.next();
            let s = expect_str(&mut cur, "set term")?;
            let term = SetTerm::parse(&s).map_err(|e| e.to_string())?;
            Query::Family { term, over: over(&mut cur)? }
        }
        "valuations" => {
            cur.next();
            let cond = cur.expect_ident()?;
            Query::Valuations { cond, over: over(&mut cur)? }
        }
        "counterexamples" => {
            cur.next();
            let premise = cur.expect_ident()?;
            cur.expect_sym("|-")?;
            let conclusion = cur.expect_ident()?;
            Query::Counterexamples { premise, conclusion, over: over(&mut cur)? }
        }
        "factuality" => {
            cur.next();
            let cond = cur.expect_ident()?;
            if !cur.eat_ident("fact") {
                return Err("expected `fact <event>`".into());
            }
            Query::Factuality { cond, fact: term(&mut cur)? }
        }
        "compile" => {
            cur.next();
            Query::Compile { cond: cur.expect_ident()? }
        }
        "classify" => {
            cur.next();
            Query::Classify(formula(&mut cur)?)
        }
        "translate" => {
            cur.next();
            Query::Translate(formula(&mut cur)?)
        }
        _ => Query::Value(expr::parse_expr(&mut cur)?),
    };
    cur.expect_end()?;
    Ok(q)
}

fn parse_statement(text: &str) -> Result<Vec<Item>, String> {
    let (word, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    match word {
        "query" => return Ok(vec![Item::Query { query: parse_query(rest)?, expect: Vec::new() }]),
        "model" => {
            let name = rest.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err("expected `model <name>`".into());
            }
            return Ok(vec![Item::Model(name.to_string())]);
        }
        _ => {}
    }
    let toks = expr::tokenize(rest)?;
    let mut cur = Cursor::new(&toks);
    let items = match word {
        "var" => names(&mut cur)?.into_iter().map(Item::Var).collect(),
        "param" => {
            let ns = names(&mut cur)?;
            let integer = cur.eat_ident("int");
            if !cur.eat_ident("in") {
                return Err("expected `in`".into());
            }
            let domain = match cur.next() {
                Some(Tok::Bracket(inner)) if !integer => {
                    let (a, b) = inner.split_once(',').ok_or("expected `[lo,hi]`")?;
                    let lo = parse_rational(a).ok_or_else(|| format!("bad bound `{a}`"))?;
                    let hi = parse_rational(b).ok_or_else(|| format!("bad bound `{b}`"))?;
                    Domain::Interval(lo, hi)
                }
                Some(Tok::Sym("{")) if integer => {
                    let mut vals = vec![rational_value(&mut cur)?];
                    while cur.eat_sym(",") {
                        vals.push(rational_value(&mut cur)?);
                    }
                    cur.expect_sym("}")?;
                    let one = Rational::from_integer(1.into());
                    if vals.iter().any(|v| !v.is_integer()) || vals.windows(2).any(|w| w[1] != &w[0] + &one) {
                        return Err("integer domains must list consecutive integers".into());
                    }
                    Domain::Integers(vals[0].clone(), vals[vals.len() - 1].clone())
                }
                other => return Err(format!("expected a domain, found {}", expr::describe(other))),
            };
            ns.into_iter().map(|name| Item::Param { name, domain: domain.clone() }).collect()
        }
        "table" => {
            if !cur.eat_ident("P0") {
                return Err("expected `P0(...)`".into());
            }
            cur.expect_sym("(")?;
            let target = cur.expect_ident()?;
            let given = if cur.eat_sym("|") { names(&mut cur)? } else { Vec::new() };
            cur.expect_sym(")")?;
            cur.expect_sym("{")?;
            let mut rows = Vec::new();
            while !cur.eat_sym("}") {
                let state = states(&mut cur, 1)?[0];
                let g = if given.is_empty() {
                    Vec::new()
                } else {
                    cur.expect_sym("|")?;
                    states(&mut cur, given.len())?
                };
                cur.expect_sym(":")?;
                rows.push(TableRow { given: g, state, value: polynomial_until(&mut cur)? });
                if !cur.eat_sym(";") && !cur.is_sym("}") {
                    return Err(format!("expected `;` or `}}`, found {}", cur.describe()));
                }
            }
            vec![Item::Table { target, given, rows }]
        }
        "joint" => {
            if !cur.eat_ident("P0") {
                return Err("expected `P0(...)`".into());
            }
            cur.expect_sym("(")?;
            let vars = names(&mut cur)?;
            cur.expect_sym(")")?;
            cur.expect_sym("{")?;
            let mut cells = Vec::new();
            while !cur.eat_sym("}") {
                let s = states(&mut cur, vars.len())?;
                cur.expect_sym(":")?;
                cells.push((s, polynomial_until(&mut cur)?));
                if !cur.eat_sym(";") && !cur.is_sym("}") {
                    return Err(format!("expected `;` or `}}`, found {}", cur.describe()));
                }
            }
            vec![Item::Joint { vars, cells }]
        }
        "embed" => {
            let name = cur.expect_ident()?;
            cur.expect_sym("=")?;
            vec![Item::Embed { name, formula: formula(&mut cur)? }]
        }
        "assert" => vec![Item::Assert(lower::parse_prob_constraint(&mut cur)?)],
        "cond" => {
            let id = if matches!(cur.peek_at(1), Some(Tok::Sym("="))) {
                let id = cur.expect_ident()?;
                cur.next();
                id
            } else {
                String::new()
            };
            vec![Item::Cond { id, statement: parse_cond(&mut cur)? }]
        }
        other => return Err(format!("unknown statement `{other}`")),
    };
    cur.expect_end()?;
    Ok(items)
}

/// Table rows keyed for the network builder.
pub fn table_entries(rows: &[TableRow]) -> BTreeMap<(Vec<bool>, bool), Polynomial> {
    rows.iter().map(|r| ((r.given.clone(), r.state), r.value.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
model basic
var A, B   # two variables
param x, y, z in [0,1]
table P0(A) { T: x ; F: 1-x }
table P0(B|A) {
  T|T: y ; F|T: 1-y ;
  T|F: z ; F|F: 1-z
}
embed AimpB = \"A -> B\"
assert P(A=T) = 0
cond S3 = su k=1 : A => B
cond Q = qf k=1/2 : A, !B => B2 given { P(A=T) > 0 }
query set P(A=F) given { P(B=T) = 0 ; P0(B=T|A=T) = 1 }
expect set = {1.000}
query deduce { \"X\" ; \"X -> Y\" } |- \"Y\"
query family \"bf(A => bf(!A => B))\" over A, B
query measure P(cu=yes | edge=smooth) by value
query measure M(edge=smooth => cu=yes) k=1 by lincolns
";

    #[test]
    fn parses_and_round_trips() {
        let src = BASIC.replace("B2", "B").replace(", !B", "");
        let m = ModelFile::parse(&src).unwrap();
        assert_eq!(m.name(), Some("basic"));
        assert_eq!(m.items.iter().filter(|i| matches!(i, Item::Var(_))).count(), 2);
        let rendered = m.to_string();
        let again = ModelFile::parse(&rendered).unwrap();
        assert_eq!(again, m, "{rendered}");
        assert_eq!(m.queries().count(), 5);
        let (_, _, ex) = m.queries().next().unwrap();
        assert_eq!(ex[0].value, "{1.000}");
    }

    #[test]
    fn errors_carry_lines() {
        let e = ModelFile::parse("var A\nparam x in [0,1]\ntable P0(A) { T: q }\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("`q`"));
        let e = ModelFile::parse("var A\nquery status nope\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(ModelFile::parse("expect set = x\n").is_err());
        assert!(ModelFile::parse("var A\ntable P0(A) {\n T: 1\n").is_err());
        assert!(ModelFile::parse("frobnicate A\n").is_err());
    }

    #[test]
    fn conditional_forms() {
        let m = ModelFile::parse(
            "var A, B, C\ncond a = bf K=T : \"A & C\" => \"B\"\ncond b = mat k=0.5 : A => ~B\ncond c = feas k=1 : T => B given { P(A=T) = 1 }\n",
        )
        .unwrap();
        let b = m.conditional("b").unwrap();
        assert_eq!(b.to_string(), "mat k=1/2 : A => !B");
        assert_eq!(m.conditional("a").unwrap().kind, Kind::BooleanFeasibility);
        assert_eq!(m.conditional("c").unwrap().given.len(), 1);
    }

    #[test]
    fn automatic_ids_and_bare_atoms() {
        let m = ModelFile::parse("var A, B\ncond su k=1 : A => B\ncond mat k=0 : A => B\nquery status c2\nquery deduce { \"A\" ; \"A -> B\" } |- B\n").unwrap();
        assert!(m.conditional("c1").is_some());
        assert_eq!(m.conditional("c2").unwrap().kind, Kind::Material);
        let (_, q, _) = m.queries().nth(1).unwrap();
        assert_eq!(q, &Query::Deduce { premises: vec![Formula::atom("A"), Formula::parse("A -> B").unwrap()], conclusion: Formula::atom("B") });
        assert_eq!(ModelFile::parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn integer_params_and_expectations() {
        let m = ModelFile::parse("param n int in {0,1,2}\nquery translate \"A & B\"\nexpect poly ~ a b\n").unwrap();
        assert_eq!(m.items[0], Item::Param { name: "n".into(), domain: Domain::Integers(crate::rational::int(0), crate::rational::int(2)) });
        let (_, _, ex) = m.queries().next().unwrap();
        assert!(ex[0].check(Some("a b")));
        assert!(!ex[0].check(Some("a")));
        assert!(ModelFile::parse("param n int in {0,2}\n").is_err());
    }
}
