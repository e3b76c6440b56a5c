//! Parametric probability networks over true/false variables.
//!
//! Input tables hold polynomials in bounded parameters. Queries join the
//! tables of the ancestral closure into a full joint and sum the matching
//! cells, so every answer is an exact polynomial or an uncancelled quotient.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::optimizer::{Bounds, Constraint, VarBounds};
use crate::polynomial::{FractionalPolynomial, PolyError, Polynomial};
use crate::proplogic::{Formula, Valuation};
use crate::rational::{int, Rational};

/// Largest ancestral closure materialized as a full joint.
pub const MAX_JOINT_VARIABLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("name `{0}` is already declared")]
    Duplicate(String),
    #[error("variable `{0}` already has an input table")]
    TableExists(String),
    #[error("variable `{0}` has no input table")]
    MissingTable(String),
    #[error("adding a table for `{0}` would create a cycle")]
    Cycle(String),
    #[error("table for `{target}`: {message}")]
    BadTable { target: String, message: String },
    #[error("`{missing}` is an ancestor of `{of}` but is not in the requested joint")]
    NotAncestrallyClosed { missing: String, of: String },
    #[error("variable `{0}` appears on both sides of the conditioning bar")]
    Overlap(String),
    #[error("variable `{0}` is repeated in an event")]
    Repeated(String),
    #[error("ancestral closure has {0} variables, more than the limit of 16")]
    TooLarge(usize),
    #[error("subjunctive inexpressible in this model: {0}")]
    SubjunctiveInexpressible(String),
    #[error("parameter `{name}` has empty range")]
    EmptyRange { name: String },
    #[error("{0}")]
    Poly(#[from] PolyError),
}

pub type Event = (String, bool);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub lower: Rational,
    pub upper: Rational,
    pub integer: bool,
}

impl Parameter {
    pub fn unit(name: &str) -> Self {
        Parameter { name: name.to_string(), lower: int(0), upper: int(1), integer: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableKind {
    Input,
    /// Deterministic table of an embedded formula.
    Embedded(Formula),
}

/// Input table `P0(target | given)`, keyed by parent states then target state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub target: String,
    pub given: Vec<String>,
    pub rows: BTreeMap<(Vec<bool>, bool), Polynomial>,
    pub kind: TableKind,
}

impl Table {
    pub fn cell(&self, given: &[bool], state: bool) -> &Polynomial {
        &self.rows[&(given.to_vec(), state)]
    }

    /// Rows in display order: parent states T-first, target T before F.
    pub fn ordered_rows(&self) -> Vec<(Vec<bool>, bool, &Polynomial)> {
        let mut out = Vec::new();
        for g in state_vectors(self.given.len()) {
            for s in [true, false] {
                out.push((g.clone(), s, self.cell(&g, s)));
            }
        }
        out
    }
}

/// Joint input table over several root variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    pub vars: Vec<String>,
    pub cells: BTreeMap<Vec<bool>, Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Block {
    Table(Table),
    Joint(JointTable),
}

impl Block {
    fn vars(&self) -> Vec<String> {
        match self {
            Block::Table(t) => vec![t.target.clone()],
            Block::Joint(j) => j.vars.clone(),
        }
    }

    fn parents(&self) -> &[String] {
        match self {
            Block::Table(t) => &t.given,
            Block::Joint(_) => &[],
        }
    }
}

/// All `2^n` state vectors, T-first in lexicographic order.
pub fn state_vectors(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n)
        .map(|k| (0..n).map(|i| (k >> (n - 1 - i)) & 1 == 0).collect())
        .collect()
}

pub fn state_label(states: &[bool]) -> String {
    states.iter().map(|&s| if s { 'T' } else { 'F' }).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Network {
    variables: Vec<String>,
    parameters: BTreeMap<String, Parameter>,
    blocks: Vec<Block>,
    /// Variable name to index in `blocks`.
    owner: BTreeMap<String, usize>,
    embedded: BTreeMap<String, Formula>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn parameters(&self) -> impl Iterator<Item = &Parameter> {
        self.parameters.values()
    }

    pub fn parameter(&self, name: &str) -> Option<&Parameter> {
        self.parameters.get(name)
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }

    pub fn embedded(&self) -> &BTreeMap<String, Formula> {
        &self.embedded
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Table(t) => Some(t),
            _ => None,
        })
    }

    pub fn joints(&self) -> impl Iterator<Item = &JointTable> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Joint(j) => Some(j),
            _ => None,
        })
    }

    pub fn table(&self, var: &str) -> Option<&Table> {
        match self.owner.get(var).map(|&i| &self.blocks[i]) {
            Some(Block::Table(t)) => Some(t),
            _ => None,
        }
    }

    fn name_taken(&self, name: &str) -> bool {
        self.has_variable(name) || self.parameters.contains_key(name)
    }

    pub fn add_variable(&mut self, name: &str) -> Result<(), NetError> {
        if self.name_taken(name) {
            return Err(NetError::Duplicate(name.to_string()));
        }
        self.variables.push(name.to_string());
        Ok(())
    }

    pub fn add_parameter(&mut self, p: Parameter) -> Result<(), NetError> {
        if self.name_taken(&p.name) {
            return Err(NetError::Duplicate(p.name));
        }
        if p.lower > p.upper {
            return Err(NetError::EmptyRange { name: p.name });
        }
        self.parameters.insert(p.name.clone(), p);
        Ok(())
    }

    fn check_poly(&self, p: &Polynomial) -> Result<(), NetError> {
        for v in p.variables() {
            if !self.parameters.contains_key(&v) {
                return Err(NetError::UnknownParameter(v));
            }
        }
        Ok(())
    }

    fn check_var(&self, v: &str) -> Result<(), NetError> {
        if self.has_variable(v) {
            Ok(())
        } else {
            Err(NetError::UnknownVariable(v.to_string()))
        }
    }

    /// True when `a` is `b` or an ancestor of `b`.
    fn reaches(&self, a: &str, b: &str) -> bool {
        let mut stack = vec![b.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if v == a {
                return true;
            }
            if !seen.insert(v.clone()) {
                continue;
            }
            if let Some(&i) = self.owner.get(&v) {
                stack.extend(self.blocks[i].parents().iter().cloned());
                if let Block::Joint(j) = &self.blocks[i] {
                    stack.extend(j.vars.iter().cloned());
                }
            }
        }
        false
    }

    /// Adds `P0(target | given)`. Missing F rows default to `1 - T row`.
    pub fn add_table(
        &mut self,
        target: &str,
        given: &[String],
        entries: BTreeMap<(Vec<bool>, bool), Polynomial>,
    ) -> Result<(), NetError> {
        self.add_table_kind(target, given, entries, TableKind::Input)
    }

    fn add_table_kind(
        &mut self,
        target: &str,
        given: &[String],
        mut entries: BTreeMap<(Vec<bool>, bool), Polynomial>,
        kind: TableKind,
    ) -> Result<(), NetError> {
        self.check_var(target)?;
        if self.owner.contains_key(target) {
            return Err(NetError::TableExists(target.to_string()));
        }
        let mut seen = BTreeSet::new();
        for g in given {
            self.check_var(g)?;
            if !seen.insert(g) || g == target {
                return Err(NetError::Repeated(g.clone()));
            }
            if self.reaches(target, g) {
                return Err(NetError::Cycle(target.to_string()));
            }
        }
        let bad = |message: String| NetError::BadTable { target: target.to_string(), message };
        for ((g, _), p) in &entries {
            if g.len() != given.len() {
                return Err(bad(format!("row key `{}` has the wrong number of parent states", state_label(g))));
            }
            self.check_poly(p)?;
        }
        for g in state_vectors(given.len()) {
            let t = entries.get(&(g.clone(), true)).cloned();
            let f = entries.get(&(g.clone(), false)).cloned();
            let label = if g.is_empty() { String::new() } else { format!(" given {}", state_label(&g)) };
            match (t, f) {
                (Some(t), Some(f)) => {
                    if &t + &f != Polynomial::one() {
                        return Err(bad(format!("entries{label} sum to {} instead of 1", &t + &f)));
                    }
                }
                (Some(t), None) => {
                    entries.insert((g, false), &Polynomial::one() - &t);
                }
                (None, Some(f)) => {
                    entries.insert((g, true), &Polynomial::one() - &f);
                }
                (None, None) => return Err(bad(format!("missing entries{label}"))),
            }
        }
        let table = Table { target: target.to_string(), given: given.to_vec(), rows: entries, kind };
        self.owner.insert(target.to_string(), self.blocks.len());
        self.blocks.push(Block::Table(table));
        Ok(())
    }

    /// Adds a joint input table over root variables.
    pub fn add_joint(&mut self, vars: &[String], cells: BTreeMap<Vec<bool>, Polynomial>) -> Result<(), NetError> {
        let mut seen = BTreeSet::new();
        for v in vars {
            self.check_var(v)?;
            if !seen.insert(v) {
                return Err(NetError::Repeated(v.clone()));
            }
            if self.owner.contains_key(v) {
                return Err(NetError::TableExists(v.clone()));
            }
        }
        let label = vars.join(",");
        for s in state_vectors(vars.len()) {
            match cells.get(&s) {
                Some(p) => self.check_poly(p)?,
                None => {
                    return Err(NetError::BadTable { target: label, message: format!("missing cell {}", state_label(&s)) })
                }
            }
        }
        if cells.len() != 1 << vars.len() {
            return Err(NetError::BadTable { target: label, message: "cell key of the wrong length".into() });
        }
        let k = self.blocks.len();
        for v in vars {
            self.owner.insert(v.clone(), k);
        }
        self.blocks.push(Block::Joint(JointTable { vars: vars.to_vec(), cells }));
        Ok(())
    }

    /// Adds variable `name` with the deterministic table of `f`, ordered by its atoms.
    pub fn embed(&mut self, name: &str, f: &Formula) -> Result<(), NetError> {
        let atoms: Vec<String> = f.atoms().into_iter().collect();
        for a in &atoms {
            self.check_var(a)?;
        }
        self.add_variable(name)?;
        let mut rows = BTreeMap::new();
        for g in state_vectors(atoms.len()) {
            let v: Valuation = atoms.iter().cloned().zip(g.iter().copied()).collect();
            let truth = f.eval(&v).expect("atoms bound");
            rows.insert((g.clone(), true), Polynomial::from_int(truth as i64));
            rows.insert((g, false), Polynomial::from_int(!truth as i64));
        }
        if let Err(e) = self.add_table_kind(name, &atoms, rows, TableKind::Embedded(f.clone())) {
            self.variables.pop();
            return Err(e);
        }
        self.embedded.insert(name.to_string(), f.clone());
        Ok(())
    }

    /// Variable standing for `f`: an existing atom, a prior embedding, or a new one.
    pub fn ensure_embedded(&mut self, f: &Formula) -> Result<String, NetError> {
        if let Formula::Atom(a) = f {
            self.check_var(a)?;
            return Ok(a.clone());
        }
        if let Some((n, _)) = self.embedded.iter().find(|(_, g)| *g == f) {
            return Ok(n.clone());
        }
        let name = formula_variable_name(f);
        self.embed(&name, f)?;
        Ok(name)
    }

    /// Variable for `f` if it is already present.
    pub fn lookup_formula(&self, f: &Formula) -> Option<String> {
        if let Formula::Atom(a) = f {
            return self.has_variable(a).then(|| a.clone());
        }
        self.embedded.iter().find(|(_, g)| *g == f).map(|(n, _)| n.clone())
    }

    /// Ancestral closure of `vars` in declaration order.
    pub fn ancestors(&self, vars: &[String]) -> Result<Vec<String>, NetError> {
        let mut closed = BTreeSet::new();
        let mut stack: Vec<String> = vars.to_vec();
        while let Some(v) = stack.pop() {
            self.check_var(&v)?;
            if !closed.insert(v.clone()) {
                continue;
            }
            let i = *self.owner.get(&v).ok_or_else(|| NetError::MissingTable(v.clone()))?;
            stack.extend(self.blocks[i].parents().iter().cloned());
            stack.extend(self.blocks[i].vars());
        }
        Ok(self.variables.iter().filter(|v| closed.contains(*v)).cloned().collect())
    }

    /// Every variable has a table.
    pub fn validate(&self) -> Result<(), NetError> {
        for v in &self.variables {
            if !self.owner.contains_key(v) {
                return Err(NetError::MissingTable(v.clone()));
            }
        }
        Ok(())
    }

    /// Blocks of `closure`, parents before children.
    fn ordered_blocks(&self, closure: &[String]) -> Vec<usize> {
        let mut ids: Vec<usize> = closure.iter().map(|v| self.owner[v]).collect();
        ids.sort();
        ids.dedup();
        let mut order = Vec::new();
        let mut placed: BTreeSet<String> = BTreeSet::new();
        while !ids.is_empty() {
            let pos = ids
                .iter()
                .position(|&i| self.blocks[i].parents().iter().all(|p| placed.contains(p)))
                .expect("acyclic");
            let i = ids.remove(pos);
            placed.extend(self.blocks[i].vars());
            order.push(i);
        }
        order
    }

    /// Full joint over `over`, which must be ancestrally closed. Rows are T-first.
    pub fn full_joint(&self, over: &[String]) -> Result<Vec<(Vec<bool>, Polynomial)>, NetError> {
        let closure = self.ancestors(over)?;
        for v in &closure {
            if !over.contains(v) {
                let of = over
                    .iter()
                    .find(|o| self.reaches(v, o))
                    .cloned()
                    .unwrap_or_else(|| v.clone());
                return Err(NetError::NotAncestrallyClosed { missing: v.clone(), of });
            }
        }
        let mut seen = BTreeSet::new();
        for v in over {
            if !seen.insert(v) {
                return Err(NetError::Repeated(v.clone()));
            }
        }
        let cells = self.joint_cells(&closure)?;
        let pos: Vec<usize> = over.iter().map(|v| closure.iter().position(|c| c == v).unwrap()).collect();
        let mut by_state: BTreeMap<Vec<bool>, Polynomial> = BTreeMap::new();
        for (states, p) in cells {
            let key: Vec<bool> = pos.iter().map(|&i| states[i]).collect();
            by_state.insert(key, p);
        }
        Ok(state_vectors(over.len())
            .into_iter()
            .map(|s| {
                let p = by_state.remove(&s).unwrap_or_else(Polynomial::zero);
                (s, p)
            })
            .collect())
    }

    /// Nonzero cells of the joint over an ancestrally closed variable list.
    fn joint_cells(&self, closure: &[String]) -> Result<Vec<(Vec<bool>, Polynomial)>, NetError> {
        if closure.len() > MAX_JOINT_VARIABLES {
            return Err(NetError::TooLarge(closure.len()));
        }
        let index: BTreeMap<&str, usize> = closure.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let order = self.ordered_blocks(closure);
        let mut out = Vec::new();
        let mut states = vec![false; closure.len()];
        self.expand(&order, 0, &index, &mut states, Polynomial::one(), &mut out);
        Ok(out)
    }

    fn expand(
        &self,
        order: &[usize],
        k: usize,
        index: &BTreeMap<&str, usize>,
        states: &mut Vec<bool>,
        acc: Polynomial,
        out: &mut Vec<(Vec<bool>, Polynomial)>,
    ) {
        if k == order.len() {
            out.push((states.clone(), acc));
            return;
        }
        match &self.blocks[order[k]] {
            Block::Table(t) => {
                let g: Vec<bool> = t.given.iter().map(|p| states[index[p.as_str()]]).collect();
                let i = index[t.target.as_str()];
                for s in [true, false] {
                    let c = t.cell(&g, s);
                    if c.is_zero() {
                        continue;
                    }
                    states[i] = s;
                    self.expand(order, k + 1, index, states, &acc * c, out);
                }
            }
            Block::Joint(j) => {
                let ids: Vec<usize> = j.vars.iter().map(|v| index[v.as_str()]).collect();
                for (s, c) in &j.cells {
                    if c.is_zero() {
                        continue;
                    }
                    for (&i, &b) in ids.iter().zip(s) {
                        states[i] = b;
                    }
                    self.expand(order, k + 1, index, states, &acc * c, out);
                }
            }
        }
    }

    fn check_event(&self, e: &[Event]) -> Result<(), NetError> {
        let mut seen = BTreeSet::new();
        for (v, _) in e {
            self.check_var(v)?;
            if !seen.insert(v) {
                return Err(NetError::Repeated(v.clone()));
            }
        }
        Ok(())
    }

    /// `P(e)` as a polynomial.
    pub fn query(&self, e: &[Event]) -> Result<Polynomial, NetError> {
        self.check_event(e)?;
        let vars: Vec<String> = e.iter().map(|(v, _)| v.clone()).collect();
        let closure = self.ancestors(&vars)?;
        let want: Vec<(usize, bool)> = e
            .iter()
            .map(|(v, s)| (closure.iter().position(|c| c == v).unwrap(), *s))
            .collect();
        let mut total = Polynomial::zero();
        for (states, p) in self.joint_cells(&closure)? {
            if want.iter().all(|&(i, s)| states[i] == s) {
                total = &total + &p;
            }
        }
        Ok(total)
    }

    /// `P(target | cond)` as `P(target, cond) / P(cond)`, never cancelled.
    pub fn query_conditional(&self, target: &[Event], cond: &[Event]) -> Result<FractionalPolynomial, NetError> {
        for (v, _) in target {
            if cond.iter().any(|(c, _)| c == v) {
                return Err(NetError::Overlap(v.clone()));
            }
        }
        let mut both = target.to_vec();
        both.extend(cond.iter().cloned());
        let num = self.query(&both)?;
        let den = self.query(cond)?;
        if den.is_zero() {
            return Err(NetError::Poly(PolyError::ZeroDenominator));
        }
        Ok(FractionalPolynomial::new(num, den)?)
    }

    /// Input cell `P0(target=state | given)` when a table has exactly those parents.
    pub fn input_cell(&self, target: &Event, given: &[Event]) -> Option<Polynomial> {
        let t = self.table(&target.0)?;
        if t.given.len() != given.len() {
            return None;
        }
        let mut g = Vec::with_capacity(given.len());
        for p in &t.given {
            let (_, s) = given.iter().find(|(v, _)| v == p)?;
            g.push(*s);
        }
        Some(t.cell(&g, target.1).clone())
    }

    /// Expression that a subjunctive `antecedents => consequent` sets equal to `k`.
    pub fn subjunctive_input_expr(&self, antecedents: &[Event], consequent: &Event) -> Result<Polynomial, NetError> {
        self.check_event(antecedents)?;
        self.check_var(&consequent.0)?;
        if let Some(p) = self.input_cell(consequent, antecedents) {
            return Ok(p);
        }
        let not_ancestors: Vec<&str> = antecedents
            .iter()
            .filter(|(v, _)| v == &consequent.0 || !self.reaches(v, &consequent.0))
            .map(|(v, _)| v.as_str())
            .collect();
        if !not_ancestors.is_empty() {
            return Err(NetError::SubjunctiveInexpressible(format!(
                "{} not an ancestor of {}",
                not_ancestors.join(", "),
                consequent.0
            )));
        }
        let q = self.query_conditional(std::slice::from_ref(consequent), antecedents)?;
        q.cancel_structural_factor().map_err(|_| {
            NetError::SubjunctiveInexpressible(format!("P({}) has no factor-free form {q}", event_label(consequent)))
        })
    }

    /// Parameter box constraints and joint normalization.
    pub fn gamma0(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        for j in self.joints() {
            let total = j.cells.values().fold(Polynomial::zero(), |a, p| &a + p);
            if total != Polynomial::one() {
                out.push(Constraint::eq(total, Polynomial::one()));
            }
        }
        out
    }

    pub fn bounds(&self) -> Bounds {
        self.parameters
            .values()
            .map(|p| {
                (p.name.clone(), VarBounds { lower: p.lower.clone(), upper: p.upper.clone(), integer: p.integer })
            })
            .collect()
    }
}

pub fn event_label(e: &Event) -> String {
    format!("{}={}", e.0, if e.1 { "T" } else { "F" })
}

/// Name under which an inline formula is embedded.
pub fn formula_variable_name(f: &Formula) -> String {
    format!("[{f}]")
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            match b {
                Block::Table(t) => {
                    let head = if t.given.is_empty() {
                        format!("P0({})", t.target)
                    } else {
                        format!("P0({}|{})", t.target, t.given.join(","))
                    };
                    let rows: Vec<String> = t
                        .ordered_rows()
                        .into_iter()
                        .map(|(g, s, p)| {
                            if g.is_empty() {
                                format!("{}: {p}", state_label(&[s]))
                            } else {
                                format!("{}|{}: {p}", state_label(&[s]), state_label(&g))
                            }
                        })
                        .collect();
                    writeln!(f, "{head} {{ {} }}", rows.join(" ; "))?;
                }
                Block::Joint(j) => {
                    let rows: Vec<String> = j.cells.iter().rev().map(|(s, p)| format!("{}: {p}", state_label(s))).collect();
                    writeln!(f, "P0({}) {{ {} }}", j.vars.join(","), rows.join(" ; "))?;
                }
            }
        }
        Ok(())
    }
}
