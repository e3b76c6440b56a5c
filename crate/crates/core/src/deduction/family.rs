//! Boolean-feasibility conditionals as predicates on sets of valuations.
//!
//! A valuation set is any subset of the truth-table rows declared possible,
//! the empty set included. A plain formula holds on a set when the set is
//! nonempty and the formula is true on every member. `bf(A => B)` with sense
//! `K` holds when `{B(v) : v in V, A(v)}` is exactly `{K}`; a set-level
//! antecedent gates the whole set instead of filtering it, and a formula
//! antecedent in front of a set-level consequent restricts the set first.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{DeductionError, ModalStatus};
use crate::conditionals::{ConditionalStatement, Kind};
use crate::parallel::{self, Execution};
use crate::proplogic::{valuations, Formula, Valuation};

/// Largest atom count for enumerating every valuation set.
pub const MAX_FAMILY_ATOMS: usize = 4;
/// Largest atom count for counting the sets that match a specification.
pub const MAX_SPEC_ATOMS: usize = 12;
/// Counterexample sets listed explicitly.
pub const SAMPLE_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetTerm {
    Formula(Formula),
    Bf { antecedent: Box<SetTerm>, consequent: Box<SetTerm>, sense: bool },
    Not(Box<SetTerm>),
    And(Box<SetTerm>, Box<SetTerm>),
    Or(Box<SetTerm>, Box<SetTerm>),
}

impl SetTerm {
    pub fn bf(antecedent: SetTerm, consequent: SetTerm, sense: bool) -> SetTerm {
        SetTerm::Bf { antecedent: Box::new(antecedent), consequent: Box::new(consequent), sense }
    }

    pub fn formula(f: Formula) -> SetTerm {
        SetTerm::Formula(f)
    }

    /// `bf(ant => cons)` for a Boolean-feasibility conditional.
    pub fn from_conditional(c: &ConditionalStatement) -> Result<SetTerm, DeductionError> {
        if c.kind != Kind::BooleanFeasibility {
            return Err(DeductionError::Unsupported(format!("{} conditional as a set predicate", c.kind.name())));
        }
        Ok(SetTerm::bf(
            SetTerm::Formula(c.antecedent_formula()),
            SetTerm::Formula(c.consequent_formula()),
            c.sense.affirmative(),
        ))
    }

    pub fn parse(src: &str) -> Result<SetTerm, DeductionError> {
        let toks = lex(src)?;
        let mut p = TermParser { toks, pos: 0 };
        let t = p.iff()?;
        if p.pos != p.toks.len() {
            return Err(DeductionError::Parse(format!("unexpected trailing input in `{src}`")));
        }
        Ok(t)
    }

    /// The plain formula, when no Boolean-feasibility conditional occurs inside.
    pub fn as_formula(&self) -> Option<Formula> {
        match self {
            SetTerm::Formula(f) => Some(f.clone()),
            SetTerm::Bf { .. } => None,
            SetTerm::Not(a) => Some(Formula::not(a.as_formula()?)),
            SetTerm::And(a, b) => Some(Formula::and(a.as_formula()?, b.as_formula()?)),
            SetTerm::Or(a, b) => Some(Formula::or(a.as_formula()?, b.as_formula()?)),
        }
    }

    pub fn atoms(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_atoms(&mut out);
        out.into_iter().collect()
    }

    fn collect_atoms(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            SetTerm::Formula(f) => out.extend(f.atoms()),
            SetTerm::Bf { antecedent, consequent, .. } => {
                antecedent.collect_atoms(out);
                consequent.collect_atoms(out);
            }
            SetTerm::Not(a) => a.collect_atoms(out),
            SetTerm::And(a, b) | SetTerm::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// The inner Boolean-feasibility conditionals, outermost first.
    pub fn inner_conditionals(&self) -> Vec<SetTerm> {
        let mut out = Vec::new();
        self.collect_bf(&mut out);
        out
    }

    fn collect_bf(&self, out: &mut Vec<SetTerm>) {
        match self {
            SetTerm::Formula(_) => {}
            SetTerm::Bf { antecedent, consequent, .. } => {
                out.push(self.clone());
                antecedent.collect_bf(out);
                consequent.collect_bf(out);
            }
            SetTerm::Not(a) => a.collect_bf(out),
            SetTerm::And(a, b) | SetTerm::Or(a, b) => {
                a.collect_bf(out);
                b.collect_bf(out);
            }
        }
    }
}

impl fmt::Display for SetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(form) = self.as_formula() {
            return write!(f, "{form}");
        }
        match self {
            SetTerm::Bf { antecedent, consequent, sense } => {
                let tag = if *sense { "bf" } else { "bf[F]" };
                write!(f, "{tag}({antecedent} => {consequent})")
            }
            SetTerm::Not(a) => write!(f, "!{}", Wrapped(a)),
            SetTerm::And(a, b) => write!(f, "{} & {}", Wrapped(a), Wrapped(b)),
            SetTerm::Or(a, b) => write!(f, "{} | {}", Wrapped(a), Wrapped(b)),
            SetTerm::Formula(_) => unreachable!(),
        }
    }
}

struct Wrapped<'a>(&'a SetTerm);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SetTerm::Bf { .. } => write!(f, "{}", self.0),
            SetTerm::Formula(Formula::Atom(_) | Formula::True | Formula::False | Formula::Not(_)) => write!(f, "{}", self.0),
            other => write!(f, "({other})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum STok {
    Bf(bool),
    Atom(String),
    True,
    False,
    Not,
    And,
    Or,
    Xor,
    Imp,
    Iff,
    Then,
    Open,
    Close,
}

fn lex(src: &str) -> Result<Vec<STok>, DeductionError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        let (tok, width) = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' | '~' | '¬' => (STok::Not, 1),
            '&' | '∧' => (STok::And, 1),
            '|' | '∨' => (STok::Or, 1),
            '^' | '⊕' => (STok::Xor, 1),
            '→' => (STok::Imp, 1),
            '↔' => (STok::Iff, 1),
            '⇒' => (STok::Then, 1),
            '(' => (STok::Open, 1),
            ')' => (STok::Close, 1),
            '=' if next == Some('>') => (STok::Then, 2),
            '-' if next == Some('>') => (STok::Imp, 2),
            '<' if next == Some('-') && chars.get(i + 2) == Some(&'>') => (STok::Iff, 3),
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                if word == "bf" {
                    let rest: String = chars[i..].iter().take(5).collect();
                    if rest.starts_with("[F]") || rest.starts_with("[T]") {
                        out.push(STok::Bf(rest.starts_with("[T]")));
                        i += 3;
                    } else if rest.starts_with("[K=F]") || rest.starts_with("[K=T]") {
                        out.push(STok::Bf(rest.starts_with("[K=T]")));
                        i += 5;
                    } else {
                        out.push(STok::Bf(true));
                    }
                    continue;
                }
                out.push(match word.as_str() {
                    "T" => STok::True,
                    "F" => STok::False,
                    _ => STok::Atom(word),
                });
                continue;
            }
            other => return Err(DeductionError::Parse(format!("unexpected character `{other}` in `{src}`"))),
        };
        out.push(tok);
        i += width;
    }
    Ok(out)
}

struct TermParser {
    toks: Vec<STok>,
    pos: usize,
}

fn combine(op: &STok, a: SetTerm, b: SetTerm) -> Result<SetTerm, DeductionError> {
    if let (Some(fa), Some(fb)) = (a.as_formula(), b.as_formula()) {
        let f = match op {
            STok::And => Formula::and(fa, fb),
            STok::Or => Formula::or(fa, fb),
            STok::Xor => Formula::Xor(Box::new(fa), Box::new(fb)),
            STok::Imp => Formula::implies(fa, fb),
            STok::Iff => Formula::iff(fa, fb),
            _ => unreachable!(),
        };
        return Ok(SetTerm::Formula(f));
    }
    match op {
        STok::And => Ok(SetTerm::And(Box::new(a), Box::new(b))),
        STok::Or => Ok(SetTerm::Or(Box::new(a), Box::new(b))),
        _ => Err(DeductionError::Parse(
            "only `!`, `&` and `|` may combine Boolean-feasibility conditionals".into(),
        )),
    }
}

impl TermParser {
    fn peek(&self) -> Option<&STok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &STok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, m: &str) -> Result<T, DeductionError> {
        Err(DeductionError::Parse(format!("{m} at token {}", self.pos + 1)))
    }

    fn iff(&mut self) -> Result<SetTerm, DeductionError> {
        let mut lhs = self.imp()?;
        while self.eat(&STok::Iff) {
            let rhs = self.imp()?;
            lhs = combine(&STok::Iff, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<SetTerm, DeductionError> {
        let lhs = self.disj()?;
        if self.eat(&STok::Imp) {
            let rhs = self.imp()?;
            return combine(&STok::Imp, lhs, rhs);
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<SetTerm, DeductionError> {
        let mut lhs = self.conj()?;
        loop {
            let op = match self.peek() {
                Some(STok::Or) => STok::Or,
                Some(STok::Xor) => STok::Xor,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.conj()?;
            lhs = combine(&op, lhs, rhs)?;
        }
    }

    fn conj(&mut self) -> Result<SetTerm, DeductionError> {
        let mut lhs = self.unary()?;
        while self.eat(&STok::And) {
            let rhs = self.unary()?;
            lhs = combine(&STok::And, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SetTerm, DeductionError> {
        let Some(tok) = self.peek().cloned() else {
            return self.fail("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            STok::Not => {
                let inner = self.unary()?;
                Ok(match inner.as_formula() {
                    Some(f) => SetTerm::Formula(Formula::not(f)),
                    None => SetTerm::Not(Box::new(inner)),
                })
            }
            STok::True => Ok(SetTerm::Formula(Formula::True)),
            STok::False => Ok(SetTerm::Formula(Formula::False)),
            STok::Atom(a) => Ok(SetTerm::Formula(Formula::Atom(a))),
            STok::Open => {
                let t = self.iff()?;
                if !self.eat(&STok::Close) {
                    return self.fail("expected `)`");
                }
                Ok(t)
            }
            STok::Bf(sense) => {
                if !self.eat(&STok::Open) {
                    return self.fail("expected `(` after bf");
                }
                let ant = self.iff()?;
                if !self.eat(&STok::Then) {
                    return self.fail("expected `=>`");
                }
                let cons = self.iff()?;
                if !self.eat(&STok::Close) {
                    return self.fail("expected `)`");
                }
                Ok(SetTerm::bf(ant, cons, sense))
            }
            _ => {
                self.pos -= 1;
                self.fail("expected an atom, `bf(`, `!` or `(`")
            }
        }
    }
}

/// Truth-table rows over a fixed atom order, each row one bit of a mask.
#[derive(Debug, Clone)]
pub struct Universe {
    atoms: Vec<String>,
    rows: Vec<Valuation>,
}

impl Universe {
    pub fn new(atoms: &[String], limit: usize) -> Result<Self, DeductionError> {
        if atoms.len() > limit {
            return Err(DeductionError::TooLarge { atoms: atoms.len(), limit });
        }
        Ok(Universe { atoms: atoms.to_vec(), rows: valuations(atoms) })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn truth_mask(&self, f: &Formula) -> Result<u64, DeductionError> {
        let mut m = 0u64;
        for (i, v) in self.rows.iter().enumerate() {
            if f.eval(v)? {
                m |= 1 << i;
            }
        }
        Ok(m)
    }

    /// `TTF`-style label of one row.
    pub fn row_label(&self, i: usize) -> String {
        self.atoms.iter().map(|a| if self.rows[i][a] { 'T' } else { 'F' }).collect()
    }

    /// Row index of a `TTF`-style label.
    pub fn row_index(&self, label: &str) -> Option<usize> {
        (0..self.rows.len()).find(|&i| self.row_label(i) == label)
    }

    pub fn set_label(&self, mask: u64) -> String {
        let rows: Vec<String> = (0..self.rows.len()).filter(|i| mask & (1 << i) != 0).map(|i| self.row_label(i)).collect();
        format!("{{{}}}", rows.join(", "))
    }

    fn mask_of(&self, labels: &[String]) -> Result<u64, DeductionError> {
        let mut m = 0;
        for l in labels {
            let i = self.row_index(l).ok_or_else(|| DeductionError::Parse(format!("no valuation `{l}`")))?;
            m |= 1 << i;
        }
        Ok(m)
    }
}

/// A set term with formulas replaced by their truth masks.
#[derive(Debug, Clone)]
pub enum Predicate {
    Formula(u64),
    Spec { forbidden: u64, groups: Vec<u64> },
    Bf { antecedent: Box<Predicate>, consequent: Box<Predicate>, sense: bool },
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

/// Which truth values occur in a value set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Values {
    pub t: bool,
    pub f: bool,
}

impl Values {
    const EMPTY: Values = Values { t: false, f: false };

    fn single(b: bool) -> Values {
        Values { t: b, f: !b }
    }

    pub fn is_empty(self) -> bool {
        !self.t && !self.f
    }

    pub fn is_exactly(self, k: bool) -> bool {
        self == Values::single(k)
    }
}

impl Predicate {
    pub fn compile(term: &SetTerm, u: &Universe) -> Result<Predicate, DeductionError> {
        if let Some(f) = term.as_formula() {
            return Ok(Predicate::Formula(u.truth_mask(&f)?));
        }
        Ok(match term {
            SetTerm::Bf { antecedent, consequent, sense } => Predicate::Bf {
                antecedent: Box::new(Predicate::compile(antecedent, u)?),
                consequent: Box::new(Predicate::compile(consequent, u)?),
                sense: *sense,
            },
            SetTerm::Not(a) => Predicate::Not(Box::new(Predicate::compile(a, u)?)),
            SetTerm::And(a, b) => Predicate::And(Box::new(Predicate::compile(a, u)?), Box::new(Predicate::compile(b, u)?)),
            SetTerm::Or(a, b) => Predicate::Or(Box::new(Predicate::compile(a, u)?), Box::new(Predicate::compile(b, u)?)),
            SetTerm::Formula(_) => unreachable!(),
        })
    }

    pub fn from_spec(spec: &ValuationSetSpec, u: &Universe) -> Result<Predicate, DeductionError> {
        if spec.atoms != u.atoms {
            return Err(DeductionError::Unsupported("specifications over different atoms".into()));
        }
        let groups = spec.mandatory_any.iter().map(|g| u.mask_of(g)).collect::<Result<_, _>>()?;
        Ok(Predicate::Spec { forbidden: u.mask_of(&spec.forbidden)?, groups })
    }

    pub fn holds(&self, v: u64) -> bool {
        match self {
            Predicate::Formula(m) => v != 0 && v & !m == 0,
            Predicate::Spec { forbidden, groups } => v & forbidden == 0 && groups.iter().all(|g| v & g != 0),
            Predicate::Bf { sense, .. } => self.values(v).is_exactly(*sense),
            Predicate::Not(a) => !a.holds(v),
            Predicate::And(a, b) => a.holds(v) && b.holds(v),
            Predicate::Or(a, b) => a.holds(v) || b.holds(v),
        }
    }

    /// Value set of a Boolean-feasibility predicate on `v`; other predicates
    /// give `{holds}`.
    pub fn values(&self, v: u64) -> Values {
        let Predicate::Bf { antecedent, consequent, .. } = self else {
            return Values::single(self.holds(v));
        };
        let scope = match antecedent.as_ref() {
            Predicate::Formula(a) => v & a,
            gate => {
                if !gate.holds(v) {
                    return Values::EMPTY;
                }
                v
            }
        };
        if scope == 0 {
            return Values::EMPTY;
        }
        match consequent.as_ref() {
            Predicate::Formula(c) => Values { t: scope & c != 0, f: scope & !c != 0 },
            inner => Values::single(inner.holds(scope)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Vacuous,
    Affirms,
    Counter,
}

/// Outcome of checking a statement against every valuation set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyVerdict {
    pub statement: String,
    pub atoms: Vec<String>,
    pub status: ModalStatus,
    /// Valuation sets considered, `2^(2^n)`.
    pub sets: u64,
    /// Sets on which the statement's value set is nonempty.
    pub premise_sets: u64,
    /// Sets on which the value set is exactly the asserted sense.
    pub affirming_sets: u64,
    pub counterexample_count: u64,
    /// Up to [`SAMPLE_LIMIT`] counterexample sets, in enumeration order.
    pub counterexamples: Vec<String>,
}

fn family_size(u: &Universe) -> Result<u64, DeductionError> {
    if u.len() > 16 {
        return Err(DeductionError::TooLarge { atoms: u.atoms.len(), limit: MAX_FAMILY_ATOMS });
    }
    Ok(1u64 << u.len())
}

fn status_of(premise: u64, affirming: u64) -> ModalStatus {
    if premise == 0 || affirming == 0 {
        ModalStatus::Impossible
    } else if affirming == premise {
        ModalStatus::Necessary
    } else {
        ModalStatus::Possible
    }
}

/// Modal status of a top-level Boolean-feasibility statement over all
/// valuation sets. Sets with an empty value set do not count; if no set
/// gives a value the statement is impossible.
pub fn family_status(statement: &SetTerm, atoms: Option<&[String]>, exec: Execution) -> Result<FamilyVerdict, DeductionError> {
    let SetTerm::Bf { sense, .. } = statement else {
        return Err(DeductionError::Unsupported(format!("`{statement}` is not a Boolean-feasibility statement")));
    };
    let own = statement.atoms();
    let atoms = atoms.map(|a| a.to_vec()).unwrap_or(own);
    let u = Universe::new(&atoms, MAX_FAMILY_ATOMS)?;
    let pred = Predicate::compile(statement, &u)?;
    let n = family_size(&u)?;
    let classes = parallel::map_range(exec, n as usize, |v| {
        let vals = pred.values(v as u64);
        if vals.is_empty() {
            Class::Vacuous
        } else if vals.is_exactly(*sense) {
            Class::Affirms
        } else {
            Class::Counter
        }
    });
    let premise = classes.iter().filter(|c| **c != Class::Vacuous).count() as u64;
    let affirming = classes.iter().filter(|c| **c == Class::Affirms).count() as u64;
    let counters: Vec<u64> = (0..n).filter(|&v| classes[v as usize] == Class::Counter).collect();
    Ok(FamilyVerdict {
        statement: statement.to_string(),
        atoms,
        status: status_of(premise, affirming),
        sets: n,
        premise_sets: premise,
        affirming_sets: affirming,
        counterexample_count: counters.len() as u64,
        counterexamples: counters.iter().take(SAMPLE_LIMIT).map(|&v| u.set_label(v)).collect(),
    })
}

/// Number of valuation sets on which `term` holds.
pub fn count_sets(term: &SetTerm, atoms: &[String], exec: Execution) -> Result<u64, DeductionError> {
    let u = Universe::new(atoms, MAX_FAMILY_ATOMS)?;
    let pred = Predicate::compile(term, &u)?;
    let n = family_size(&u)?;
    Ok(parallel::map_range(exec, n as usize, |v| pred.holds(v as u64)).into_iter().filter(|b| *b).count() as u64)
}

/// Labels of every valuation set on which `term` holds.
pub fn matching_sets(term: &SetTerm, atoms: &[String]) -> Result<Vec<String>, DeductionError> {
    let u = Universe::new(atoms, MAX_FAMILY_ATOMS)?;
    let pred = Predicate::compile(term, &u)?;
    let n = family_size(&u)?;
    Ok((0..n).filter(|&v| pred.holds(v)).map(|v| u.set_label(v)).collect())
}

/// The valuation sets satisfying one Boolean-feasibility conditional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValuationSetSpec {
    pub atoms: Vec<String>,
    /// At least one member of each group must be in the set.
    pub mandatory_any: Vec<Vec<String>>,
    pub forbidden: Vec<String>,
    pub optional: Vec<String>,
    #[serde(serialize_with = "big_as_string")]
    pub count: BigUint,
}

fn big_as_string<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// Row-by-row reading of `bf(ant => cons)`: rows whose singleton gives the
/// sense are mandatory (at least one), rows giving the opposite are
/// forbidden and rows outside the antecedent are optional.
pub fn valuation_analysis(c: &ConditionalStatement, atoms: Option<&[String]>) -> Result<ValuationSetSpec, DeductionError> {
    if c.kind != Kind::BooleanFeasibility {
        return Err(DeductionError::Unsupported(format!("valuation analysis of a {} conditional", c.kind.name())));
    }
    let ant = c.antecedent_formula();
    let cons = c.consequent_formula();
    let k = c.sense.affirmative();
    let mut own: Vec<String> = ant.atoms().into_iter().chain(cons.atoms()).collect();
    own.sort();
    own.dedup();
    let atoms = match atoms {
        Some(a) => {
            if let Some(missing) = own.iter().find(|x| !a.contains(x)) {
                return Err(DeductionError::Parse(format!("atom `{missing}` is outside the universe")));
            }
            a.to_vec()
        }
        None => own,
    };
    let u = Universe::new(&atoms, MAX_SPEC_ATOMS)?;
    let (mut group, mut forbidden, mut optional) = (Vec::new(), Vec::new(), Vec::new());
    for (i, v) in u.rows.iter().enumerate() {
        let label = u.row_label(i);
        if !ant.eval(v)? {
            optional.push(label);
        } else if cons.eval(v)? == k {
            group.push(label);
        } else {
            forbidden.push(label);
        }
    }
    let two = BigUint::from(2u32);
    let count = if group.is_empty() {
        BigUint::zero()
    } else {
        two.pow(optional.len() as u32) * (two.pow(group.len() as u32) - BigUint::one())
    };
    Ok(ValuationSetSpec { atoms, mandatory_any: vec![group], forbidden, optional, count })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexamples {
    pub count: u64,
    pub samples: Vec<String>,
}

/// Valuation sets matching `premise` but not `conclusion`.
pub fn counterexample_sets(
    premise: &ValuationSetSpec,
    conclusion: &ValuationSetSpec,
    exec: Execution,
) -> Result<Counterexamples, DeductionError> {
    let u = Universe::new(&premise.atoms, MAX_FAMILY_ATOMS)?;
    let p = Predicate::from_spec(premise, &u)?;
    let c = Predicate::from_spec(conclusion, &u)?;
    counterexamples_between(&u, &p, &c, exec)
}

/// Like [`counterexample_sets`] for arbitrary set terms.
pub fn term_counterexamples(
    premise: &SetTerm,
    conclusion: &SetTerm,
    atoms: &[String],
    exec: Execution,
) -> Result<Counterexamples, DeductionError> {
    let u = Universe::new(atoms, MAX_FAMILY_ATOMS)?;
    let p = Predicate::compile(premise, &u)?;
    let c = Predicate::compile(conclusion, &u)?;
    counterexamples_between(&u, &p, &c, exec)
}

fn counterexamples_between(
    u: &Universe,
    p: &Predicate,
    c: &Predicate,
    exec: Execution,
) -> Result<Counterexamples, DeductionError> {
    let n = family_size(u)?;
    let hits = parallel::map_range(exec, n as usize, |v| p.holds(v as u64) && !c.holds(v as u64));
    let idx: Vec<u64> = (0..n).filter(|&v| hits[v as usize]).collect();
    Ok(Counterexamples {
        count: idx.len() as u64,
        samples: idx.iter().take(SAMPLE_LIMIT).map(|&v| u.set_label(v)).collect(),
    })
}

/// Whether `term` holds on the set of the labelled rows.
pub fn holds_on(term: &SetTerm, atoms: &[String], rows: &[&str]) -> Result<bool, DeductionError> {
    let u = Universe::new(atoms, MAX_FAMILY_ATOMS)?;
    let labels: Vec<String> = rows.iter().map(|s| s.to_string()).collect();
    let mask = u.mask_of(&labels)?;
    Ok(Predicate::compile(term, &u)?.holds(mask))
}

/// Value set of a Boolean-feasibility term on the labelled rows, as `{T, F}` labels.
pub fn values_on(term: &SetTerm, atoms: &[String], rows: &[&str]) -> Result<Vec<bool>, DeductionError> {
    let u = Universe::new(atoms, MAX_FAMILY_ATOMS)?;
    let labels: Vec<String> = rows.iter().map(|s| s.to_string()).collect();
    let vals = Predicate::compile(term, &u)?.values(u.mask_of(&labels)?);
    Ok([(vals.t, true), (vals.f, false)].into_iter().filter(|p| p.0).map(|p| p.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditionals::Sense;

    fn abc() -> Vec<String> {
        ["A", "B", "C"].map(String::from).to_vec()
    }

    fn ab() -> Vec<String> {
        ["A", "B"].map(String::from).to_vec()
    }

    fn bf(src_ant: &str, src_cons: &str) -> ConditionalStatement {
        ConditionalStatement::formulas(
            Kind::BooleanFeasibility,
            Formula::parse(src_ant).unwrap(),
            Formula::parse(src_cons).unwrap(),
            Sense::Boolean(true),
        )
        .unwrap()
    }

    #[test]
    fn single_conditional_counts() {
        let s = valuation_analysis(&bf("A", "B"), None).unwrap();
        assert_eq!(s.count, BigUint::from(4u32));
        assert_eq!(s.mandatory_any, vec![vec!["TT".to_string()]]);
        assert_eq!(s.forbidden, ["TF"]);
        let t = SetTerm::from_conditional(&bf("A", "B")).unwrap();
        assert_eq!(count_sets(&t, &ab(), Execution::Sequential).unwrap(), 4);
        assert_eq!(valuation_analysis(&bf("A & B", "C"), None).unwrap().count, BigUint::from(64u32));
        assert_eq!(valuation_analysis(&bf("A", "C"), Some(&abc())).unwrap().count, BigUint::from(48u32));
        assert_eq!(valuation_analysis(&bf("!(B & !A)", "!B"), None).unwrap().count, BigUint::from(6u32));
        assert_eq!(valuation_analysis(&bf("A", "!B"), None).unwrap().count, BigUint::from(4u32));
    }

    #[test]
    fn spec_count_matches_enumeration() {
        for (a, c) in [("A & B", "C"), ("A | C", "!B"), ("T", "A ^ B"), ("A & !A", "B")] {
            let cond = bf(a, c);
            let spec = valuation_analysis(&cond, Some(&abc())).unwrap();
            let t = SetTerm::from_conditional(&cond).unwrap();
            let n = count_sets(&t, &abc(), Execution::Parallel).unwrap();
            assert_eq!(spec.count, BigUint::from(n), "{a} => {c}");
        }
    }

    #[test]
    fn parses_nested_terms() {
        let t = SetTerm::parse("bf(bf(A & B => C) => bf(A => C) | bf(B => C))").unwrap();
        assert_eq!(t.to_string(), "bf(bf(A & B => C) => bf(A => C) | bf(B => C))");
        assert_eq!(SetTerm::parse(&t.to_string()).unwrap(), t);
        let neg = SetTerm::parse("bf[F](A => B)").unwrap();
        assert_eq!(neg, SetTerm::bf(SetTerm::Formula(Formula::atom("A")), SetTerm::Formula(Formula::atom("B")), false));
        assert!(SetTerm::parse("bf(A => B) -> A").is_err());
        assert!(SetTerm::parse("bf(A B)").is_err());
    }

    #[test]
    fn nested_statements() {
        let st = |s: &str| family_status(&SetTerm::parse(s).unwrap(), None, Execution::Sequential).unwrap();
        assert_eq!(st("bf(A => bf(!A => B))").status, ModalStatus::Impossible);
        assert_eq!(st("bf(A => bf(B => A))").status, ModalStatus::Possible);
        assert_eq!(st("bf(bf(A => B) & bf(A => !B) => !A)").status, ModalStatus::Impossible);
        assert_eq!(st("bf(!bf(A => B) => A)").status, ModalStatus::Possible);
        let f8 = st("bf(bf(A & B => C) => bf(A => C) | bf(B => C))");
        assert_eq!(f8.status, ModalStatus::Possible);
        assert_eq!(f8.premise_sets, 64);
        assert_eq!(f8.counterexample_count, 16);
        assert!(f8.counterexamples.contains(&"{TTT, TFF, FTF}".to_string()));
        let f9 = st("bf(bf(!(B & !A) => !B) => bf(A => !B))");
        assert_eq!(f9.counterexamples, ["{FF}", "{FT, FF}"]);
    }

    #[test]
    fn spec_counterexamples() {
        let p = valuation_analysis(&bf("!(B & !A)", "!B"), None).unwrap();
        let c = valuation_analysis(&bf("A", "!B"), None).unwrap();
        let r = counterexample_sets(&p, &c, Execution::Sequential).unwrap();
        assert_eq!(r.samples, ["{FF}", "{FT, FF}"]);
        assert_eq!(counterexample_sets(&p, &p, Execution::Sequential).unwrap().count, 0);
    }

    #[test]
    fn seven_counterexamples_of_necessity() {
        let t = SetTerm::parse("bf(!bf(A => B) => A)").unwrap();
        for rows in [&["FT", "FF"][..], &["TF", "FT", "FF"], &["TT", "TF", "FT", "FF"]] {
            let vals = values_on(&t, &ab(), rows).unwrap();
            assert!(!vals.is_empty() && vals != [true], "{rows:?}");
        }
    }

    #[test]
    fn empty_set_is_vacuous() {
        let t = SetTerm::parse("bf(A => B)").unwrap();
        assert!(!holds_on(&t, &ab(), &[]).unwrap());
        assert!(values_on(&t, &ab(), &[]).unwrap().is_empty());
        assert!(!holds_on(&SetTerm::parse("A | !A").unwrap(), &ab(), &[]).unwrap());
    }

    #[test]
    fn size_guard() {
        let atoms: Vec<String> = ["A", "B", "C", "D", "E"].map(String::from).to_vec();
        let t = SetTerm::parse("bf(A => B)").unwrap();
        assert!(matches!(count_sets(&t, &atoms, Execution::Sequential), Err(DeductionError::TooLarge { .. })));
    }
}
