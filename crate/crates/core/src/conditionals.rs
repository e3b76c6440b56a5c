//! The seven conditional types and their algebraic systems.
//!
//! Subjunctive, material, existential and truth-functional conditionals
//! compile to plain constraint systems. Feasibility, quotient-feasibility and
//! Boolean-feasibility conditionals are claims about a whole solution set and
//! compile to a set equation `{objective : given} = {value}`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lower::{self, LowerError, ProbConstraint};
use crate::optimizer::{
    self, Bounds, Constraint, Objective, OptError, SolutionSet, SolverConfig, VarBounds, Witness,
};
use crate::polynomial::{FractionalPolynomial, Polynomial};
use crate::probnet::{Event, NetError, Network};
use crate::proplogic::{atom_variable, Formula, LogicError, Valuation};
use crate::rational::{format_rational, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CondError {
    #[error("{0}")]
    Lower(#[from] LowerError),
    #[error("{0}")]
    Net(#[from] NetError),
    #[error("{0}")]
    Opt(#[from] OptError),
    #[error("{0}")]
    Logic(#[from] LogicError),
    #[error("{kind} conditionals take {expected}")]
    Sense { kind: &'static str, expected: &'static str },
    #[error("malformed conditional: {0}")]
    Malformed(String),
    #[error("cannot compare a {0} conditional with a {1} conditional")]
    KindMismatch(&'static str, &'static str),
    #[error("atom `{atom}` translates to `{var}`, which is also a network parameter")]
    AtomCollision { atom: String, var: String },
}

/// A variable with a polarity, `A` or `!A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Term {
    pub variable: String,
    pub asserted: bool,
}

impl Term {
    pub fn new(variable: &str, asserted: bool) -> Self {
        Term { variable: variable.to_string(), asserted }
    }

    pub fn pos(variable: &str) -> Self {
        Term::new(variable, true)
    }

    pub fn neg(variable: &str) -> Self {
        Term::new(variable, false)
    }

    pub fn negated(&self) -> Self {
        Term { variable: self.variable.clone(), asserted: !self.asserted }
    }

    pub fn event(&self) -> Event {
        (self.variable.clone(), self.asserted)
    }

    pub fn formula(&self) -> Formula {
        let a = Formula::atom(&self.variable);
        if self.asserted {
            a
        } else {
            Formula::not(a)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.asserted {
            write!(f, "{}", self.variable)
        } else {
            write!(f, "!{}", self.variable)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sense {
    Fraction(Rational),
    Boolean(bool),
}

impl Sense {
    pub fn affirmative(&self) -> bool {
        match self {
            Sense::Fraction(k) => k.is_one(),
            Sense::Boolean(b) => *b,
        }
    }

    /// `k` for fractional senses, `1`/`0` for Boolean ones.
    pub fn value(&self) -> Rational {
        match self {
            Sense::Fraction(k) => k.clone(),
            Sense::Boolean(b) => int(*b as i64),
        }
    }

    /// `1 - k`, or `!K`.
    pub fn flipped(&self) -> Sense {
        match self {
            Sense::Fraction(k) => Sense::Fraction(Rational::one() - k),
            Sense::Boolean(b) => Sense::Boolean(!b),
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Fraction(k) => write!(f, "k={}", format_rational(k)),
            Sense::Boolean(b) => write!(f, "K={}", if *b { "T" } else { "F" }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    Subjunctive,
    Material,
    Existential,
    Feasibility,
    QuotientFeasibility,
    TruthFunctional,
    BooleanFeasibility,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Subjunctive,
        Kind::Material,
        Kind::Existential,
        Kind::Feasibility,
        Kind::QuotientFeasibility,
        Kind::TruthFunctional,
        Kind::BooleanFeasibility,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Kind::Subjunctive => "su",
            Kind::Material => "mat",
            Kind::Existential => "ex",
            Kind::Feasibility => "feas",
            Kind::QuotientFeasibility => "qf",
            Kind::TruthFunctional => "tf",
            Kind::BooleanFeasibility => "bf",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Subjunctive => "subjunctive",
            Kind::Material => "material",
            Kind::Existential => "existential",
            Kind::Feasibility => "feasibility",
            Kind::QuotientFeasibility => "quotient-feasibility",
            Kind::TruthFunctional => "truth-functional",
            Kind::BooleanFeasibility => "Boolean-feasibility",
        }
    }

    pub fn is_propositional(self) -> bool {
        matches!(self, Kind::TruthFunctional | Kind::BooleanFeasibility)
    }

    pub fn is_set_valued(self) -> bool {
        matches!(self, Kind::Feasibility | Kind::QuotientFeasibility | Kind::BooleanFeasibility)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Body {
    Terms { antecedent: Vec<Term>, consequent: Term },
    Formulas { antecedent: Formula, consequent: Formula },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionalStatement {
    pub kind: Kind,
    pub body: Body,
    pub sense: Sense,
    /// Extra premises Γ of a feasibility-style conditional.
    pub given: Vec<ProbConstraint>,
}

impl ConditionalStatement {
    pub fn new(kind: Kind, body: Body, sense: Sense, given: Vec<ProbConstraint>) -> Result<Self, CondError> {
        match (&sense, kind.is_propositional()) {
            (Sense::Fraction(k), false) => {
                if k < &Rational::zero() || k > &Rational::one() {
                    return Err(CondError::Malformed(format!("sense k={} is outside [0,1]", format_rational(k))));
                }
            }
            (Sense::Boolean(_), true) => {}
            (_, false) => return Err(CondError::Sense { kind: kind.name(), expected: "a fraction k in [0,1]" }),
            (_, true) => return Err(CondError::Sense { kind: kind.name(), expected: "a truth value K" }),
        }
        if !given.is_empty() && !matches!(kind, Kind::Feasibility | Kind::QuotientFeasibility) {
            return Err(CondError::Malformed(format!("{} conditionals take no `given` premises", kind.name())));
        }
        let body = match body {
            Body::Terms { antecedent, consequent } if kind.is_propositional() => Body::Formulas {
                antecedent: if antecedent.is_empty() {
                    Formula::True
                } else {
                    Formula::conjunction(antecedent.iter().map(Term::formula))
                },
                consequent: consequent.formula(),
            },
            Body::Formulas { antecedent, consequent } if !kind.is_propositional() => {
                let antecedent = formula_terms(&antecedent).ok_or_else(|| {
                    CondError::Malformed(format!("antecedent `{antecedent}` is not a conjunction of literals"))
                })?;
                let consequent = match formula_terms(&consequent).as_deref() {
                    Some([t]) => t.clone(),
                    _ => return Err(CondError::Malformed(format!("consequent `{consequent}` is not a literal"))),
                };
                Body::Terms { antecedent, consequent }
            }
            b => b,
        };
        if let Body::Terms { antecedent, consequent } = &body {
            let mut seen = BTreeSet::new();
            for t in antecedent.iter().chain(std::iter::once(consequent)) {
                if !seen.insert(&t.variable) {
                    return Err(CondError::Malformed(format!("variable `{}` appears twice", t.variable)));
                }
            }
            let needs_antecedent = matches!(
                kind,
                Kind::Subjunctive | Kind::Material | Kind::Existential | Kind::QuotientFeasibility
            );
            if needs_antecedent && antecedent.is_empty() {
                return Err(CondError::Malformed(format!("{} conditionals need an antecedent", kind.name())));
            }
        }
        Ok(ConditionalStatement { kind, body, sense, given })
    }

    pub fn terms(kind: Kind, antecedent: &[Term], consequent: Term, sense: Sense) -> Result<Self, CondError> {
        ConditionalStatement::new(kind, Body::Terms { antecedent: antecedent.to_vec(), consequent }, sense, Vec::new())
    }

    pub fn formulas(kind: Kind, antecedent: Formula, consequent: Formula, sense: Sense) -> Result<Self, CondError> {
        ConditionalStatement::new(kind, Body::Formulas { antecedent, consequent }, sense, Vec::new())
    }

    /// The same conditional with the opposite sense.
    pub fn opposite(&self) -> Self {
        ConditionalStatement { sense: self.sense.flipped(), ..self.clone() }
    }

    /// The same conditional with its consequent negated.
    pub fn with_negated_consequent(&self) -> Self {
        let body = match &self.body {
            Body::Terms { antecedent, consequent } => {
                Body::Terms { antecedent: antecedent.clone(), consequent: consequent.negated() }
            }
            Body::Formulas { antecedent, consequent } => {
                Body::Formulas { antecedent: antecedent.clone(), consequent: Formula::not(consequent.clone()) }
            }
        };
        ConditionalStatement { body, ..self.clone() }
    }

    pub fn antecedent_formula(&self) -> Formula {
        match &self.body {
            Body::Terms { antecedent, .. } if antecedent.is_empty() => Formula::True,
            Body::Terms { antecedent, .. } => Formula::conjunction(antecedent.iter().map(Term::formula)),
            Body::Formulas { antecedent, .. } => antecedent.clone(),
        }
    }

    pub fn consequent_formula(&self) -> Formula {
        match &self.body {
            Body::Terms { consequent, .. } => consequent.formula(),
            Body::Formulas { consequent, .. } => consequent.clone(),
        }
    }

    /// Consequent adjusted for a Boolean sense: `B` for `K=T`, `!B` for `K=F`.
    pub fn sensed_consequent(&self) -> Formula {
        let b = self.consequent_formula();
        if self.sense.affirmative() {
            b
        } else {
            Formula::not(b)
        }
    }

    fn term_parts(&self) -> (&[Term], &Term) {
        match &self.body {
            Body::Terms { antecedent, consequent } => (antecedent, consequent),
            Body::Formulas { .. } => unreachable!("probabilistic conditionals always hold terms"),
        }
    }

    /// Literals mentioned anywhere in the conditional, premises included.
    pub fn mentioned_literals(&self) -> BTreeSet<(String, bool)> {
        let mut out = BTreeSet::new();
        match &self.body {
            Body::Terms { antecedent, consequent } => {
                for t in antecedent.iter().chain(std::iter::once(consequent)) {
                    out.insert((t.variable.clone(), t.asserted));
                }
            }
            Body::Formulas { antecedent, consequent } => {
                out.extend(antecedent.literals());
                out.extend(consequent.literals());
            }
        }
        for g in &self.given {
            out.extend(g.events());
        }
        out
    }

    /// Inline formulas a network must embed before this conditional compiles.
    pub fn inline_formulas(&self) -> Vec<Formula> {
        self.given.iter().flat_map(|g| g.formulas()).collect()
    }
}

fn quoted(f: &Formula) -> String {
    format!("\"{f}\"")
}

impl fmt::Display for ConditionalStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} : ", self.kind.tag(), self.sense)?;
        match &self.body {
            Body::Terms { antecedent, consequent } => {
                let ants: Vec<String> = antecedent.iter().map(|t| t.to_string()).collect();
                if ants.is_empty() {
                    write!(f, "T => {consequent}")?;
                } else {
                    write!(f, "{} => {consequent}", ants.join(", "))?;
                }
            }
            Body::Formulas { antecedent, consequent } => {
                write!(f, "{} => {}", quoted(antecedent), quoted(consequent))?;
            }
        }
        if !self.given.is_empty() {
            let gs: Vec<String> = self.given.iter().map(|g| g.to_string()).collect();
            write!(f, " given {{ {} }}", gs.join(" ; "))?;
        }
        Ok(())
    }
}

/// Literals of a conjunction of literals, `None` for anything else.
pub fn formula_terms(f: &Formula) -> Option<Vec<Term>> {
    match f {
        Formula::True => Some(Vec::new()),
        Formula::Atom(a) => Some(vec![Term::pos(a)]),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => Some(vec![Term::neg(a)]),
            _ => None,
        },
        Formula::And(a, b) => {
            let mut out = formula_terms(a)?;
            out.extend(formula_terms(b)?);
            Some(out)
        }
        _ => None,
    }
}

/// Top-level conjuncts of a formula.
pub fn conjuncts(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        other => vec![other.clone()],
    }
}

/// `{objective : given} = {value}` over `bounds`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetEquation {
    pub objective: Objective,
    pub given: Vec<Constraint>,
    pub bounds: Bounds,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiled {
    /// Constraints the conditional adds; the network's own box and
    /// normalization constraints are not repeated here.
    System { constraints: Vec<Constraint>, bounds: Bounds },
    SetEquation(SetEquation),
}

impl Compiled {
    pub fn constraints(&self) -> &[Constraint] {
        match self {
            Compiled::System { constraints, .. } => constraints,
            Compiled::SetEquation(eq) => &eq.given,
        }
    }
}

fn binary_bounds(atoms: &BTreeSet<String>, net: Option<&Network>) -> Result<Bounds, CondError> {
    let mut b = Bounds::new();
    for a in atoms {
        let var = atom_variable(a);
        if let Some(n) = net {
            if n.parameter(&var).is_some() {
                return Err(CondError::AtomCollision { atom: a.clone(), var });
            }
        }
        b.insert(var, VarBounds::binary());
    }
    Ok(b)
}

fn events(terms: &[Term]) -> Vec<Event> {
    terms.iter().map(Term::event).collect()
}

fn check_terms(net: &Network, c: &ConditionalStatement) -> Result<(), CondError> {
    let (ants, cons) = c.term_parts();
    for t in ants.iter().chain(std::iter::once(cons)) {
        if !net.has_variable(&t.variable) {
            return Err(NetError::UnknownVariable(t.variable.clone()).into());
        }
    }
    Ok(())
}

/// Algebraic system of `c` on `net`. Truth-functional conditionals use the
/// Boolean translation over 0/1 atom variables.
pub fn compile(c: &ConditionalStatement, net: &Network) -> Result<Compiled, CondError> {
    let k = c.sense.value();
    let kpoly = Polynomial::constant(k.clone());
    match c.kind {
        Kind::Subjunctive => {
            check_terms(net, c)?;
            let (ants, cons) = c.term_parts();
            let p = net.subjunctive_input_expr(&events(ants), &cons.event())?;
            Ok(Compiled::System { constraints: vec![Constraint::eq(p, kpoly)], bounds: net.bounds() })
        }
        Kind::Material | Kind::Existential => {
            check_terms(net, c)?;
            let (ants, cons) = c.term_parts();
            let pa = net.query(&events(ants))?;
            let mut both = events(ants);
            both.push(cons.event());
            let pab = net.query(&both)?;
            let mut constraints = vec![Constraint::eq(pab, pa.scale(&k))];
            if c.kind == Kind::Existential {
                constraints.push(Constraint::gt(pa, Polynomial::zero()));
            }
            Ok(Compiled::System { constraints, bounds: net.bounds() })
        }
        Kind::Feasibility => {
            check_terms(net, c)?;
            let (ants, cons) = c.term_parts();
            let mut given = net.gamma0();
            for t in ants {
                given.push(Constraint::eq(net.query(&[t.event()])?, Polynomial::one()));
            }
            given.extend(lower::lower_constraints(net, &c.given)?);
            let objective = Objective::Polynomial(net.query(&[cons.event()])?);
            Ok(Compiled::SetEquation(SetEquation { objective, given, bounds: net.bounds(), value: k }))
        }
        Kind::QuotientFeasibility => {
            check_terms(net, c)?;
            let (ants, cons) = c.term_parts();
            let q = net.query_conditional(&[cons.event()], &events(ants))?;
            let mut given = net.gamma0();
            given.extend(lower::lower_constraints(net, &c.given)?);
            Ok(Compiled::SetEquation(SetEquation {
                objective: Objective::Fractional(q),
                given,
                bounds: net.bounds(),
                value: k,
            }))
        }
        Kind::TruthFunctional => {
            let f = Formula::implies(c.antecedent_formula(), c.sensed_consequent());
            let bounds = binary_bounds(&f.atoms(), Some(net))?;
            Ok(Compiled::System { constraints: vec![Constraint::eq(f.translate(), Polynomial::one())], bounds })
        }
        Kind::BooleanFeasibility => compile_boolean_feasibility(c, Some(net)),
    }
}

/// Boolean-feasibility set equation without any network.
pub fn compile_boolean_feasibility(c: &ConditionalStatement, net: Option<&Network>) -> Result<Compiled, CondError> {
    if c.kind != Kind::BooleanFeasibility {
        return Err(CondError::KindMismatch(c.kind.name(), Kind::BooleanFeasibility.name()));
    }
    let ant = c.antecedent_formula();
    let cons = c.consequent_formula();
    let mut atoms = ant.atoms();
    atoms.extend(cons.atoms());
    let bounds = binary_bounds(&atoms, net)?;
    let given = conjuncts(&ant)
        .into_iter()
        .filter(|f| *f != Formula::True)
        .map(|f| Constraint::eq(f.translate(), Polynomial::one()))
        .collect();
    Ok(Compiled::SetEquation(SetEquation {
        objective: Objective::Polynomial(cons.translate()),
        given,
        bounds,
        value: c.sense.value(),
    }))
}

/// Like [`compile`], but a truth-functional conditional embeds its formula in
/// the network and asserts that the embedded variable is certainly true.
pub fn compile_probabilistic(c: &ConditionalStatement, net: &mut Network) -> Result<Compiled, CondError> {
    if c.kind != Kind::TruthFunctional {
        return compile(c, net);
    }
    let f = Formula::implies(c.antecedent_formula(), c.sensed_consequent());
    let name = net.ensure_embedded(&f)?;
    let p = net.query(&[(name, true)])?;
    Ok(Compiled::System { constraints: vec![Constraint::eq(p, Polynomial::one())], bounds: net.bounds() })
}

/// Outcome of checking a set equation, with the sets that decided it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetEquationResult {
    pub holds: bool,
    /// Named sets in evaluation order, rendered for reports.
    pub sets: Vec<(String, String)>,
}

fn tolerance(config: &SolverConfig) -> Rational {
    config.gap.clone()
}

/// Decides a set equation. Quotient objectives use the three-set form:
/// the denominator set is neither empty nor `{0}`, and
/// `{numerator - k denominator} = {0}`.
pub fn evaluate_set_equation(eq: &SetEquation, config: &SolverConfig) -> Result<SetEquationResult, CondError> {
    let tol = tolerance(config);
    match &eq.objective {
        Objective::Polynomial(p) => {
            let s = optimizer::solution_set(p, &eq.given, &eq.bounds, config)?;
            Ok(SetEquationResult { holds: s.is_singleton(&eq.value, &tol), sets: vec![("set".into(), s.to_string())] })
        }
        Objective::Fractional(q) => {
            let (holds, sets) = quotient_triple(q, &eq.value, &eq.given, &eq.bounds, config)?;
            Ok(SetEquationResult { holds, sets })
        }
    }
}

type NamedSets = Vec<(String, String)>;

pub(crate) fn quotient_triple(
    q: &FractionalPolynomial,
    k: &Rational,
    given: &[Constraint],
    bounds: &Bounds,
    config: &SolverConfig,
) -> Result<(bool, NamedSets), CondError> {
    let tol = tolerance(config);
    let den = optimizer::solution_set(&q.denominator, given, bounds, config)?;
    let mut sets = vec![("denominator".to_string(), den.to_string())];
    let den_ok = !den.is_empty() && !den.is_singleton(&Rational::zero(), &tol);
    if !den_ok {
        return Ok((false, sets));
    }
    let residual = &q.numerator - &q.denominator.scale(k);
    let r = optimizer::solution_set(&residual, given, bounds, config)?;
    let holds = r.is_singleton(&Rational::zero(), &tol);
    sets.push(("residual".to_string(), r.to_string()));
    Ok((holds, sets))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Consistency {
    /// Satisfiable together; plain systems carry a witness point.
    Consistent(Option<Witness>),
    Inconsistent,
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent(_))
    }
}

fn merged(a: &Bounds, b: &Bounds) -> Bounds {
    let mut out = a.clone();
    for (k, v) in b {
        out.entry(k.clone()).or_insert_with(|| v.clone());
    }
    out
}

/// Whether two conditionals of one type can hold together on `net`.
pub fn check_opposites(
    c1: &ConditionalStatement,
    c2: &ConditionalStatement,
    net: &Network,
    config: &SolverConfig,
) -> Result<Consistency, CondError> {
    if c1.kind != c2.kind {
        return Err(CondError::KindMismatch(c1.kind.name(), c2.kind.name()));
    }
    match (compile(c1, net)?, compile(c2, net)?) {
        (Compiled::System { constraints: a, bounds: ba }, Compiled::System { constraints: b, bounds: bb }) => {
            let mut all = net.gamma0();
            all.extend(a);
            all.extend(b);
            let bounds = merged(&merged(&ba, &bb), &net.bounds());
            Ok(match optimizer::feasible(&all, &bounds, config)? {
                Some(w) => Consistency::Consistent(Some(w)),
                None => Consistency::Inconsistent,
            })
        }
        (Compiled::SetEquation(a), Compiled::SetEquation(b)) => {
            // Set equations are facts about the model: both must hold.
            let both = evaluate_set_equation(&a, config)?.holds && evaluate_set_equation(&b, config)?.holds;
            Ok(if both { Consistency::Consistent(None) } else { Consistency::Inconsistent })
        }
        _ => unreachable!("one kind compiles to one shape"),
    }
}

/// Whether all of `conds` can hold together with `gamma` on `net`. Plain
/// systems are solved jointly; set equations are decided with `gamma`
/// added to their own premises and must each hold.
pub fn consistent(
    conds: &[&ConditionalStatement],
    net: &Network,
    gamma: &[Constraint],
    config: &SolverConfig,
) -> Result<Consistency, CondError> {
    let mut all = net.gamma0();
    all.extend_from_slice(gamma);
    let mut bounds = net.bounds();
    for c in conds {
        match compile(c, net)? {
            Compiled::System { constraints, bounds: b } => {
                all.extend(constraints);
                bounds = merged(&bounds, &b);
            }
            Compiled::SetEquation(mut eq) => {
                eq.given.extend_from_slice(gamma);
                if !evaluate_set_equation(&eq, config)?.holds {
                    return Ok(Consistency::Inconsistent);
                }
            }
        }
    }
    Ok(match optimizer::feasible(&all, &bounds, config)? {
        Some(w) => Consistency::Consistent(Some(w)),
        None => Consistency::Inconsistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Factuality {
    Factual,
    Antifactual,
    Afactual,
}

impl fmt::Display for Factuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factuality::Factual => "factual",
            Factuality::Antifactual => "antifactual",
            Factuality::Afactual => "afactual",
        })
    }
}

/// Factual when the fact appears, antifactual when its negation does; both can hold.
pub fn classify_factuality(c: &ConditionalStatement, fact: &Term) -> BTreeSet<Factuality> {
    let lits = c.mentioned_literals();
    let mut out = BTreeSet::new();
    if lits.contains(&(fact.variable.clone(), fact.asserted)) {
        out.insert(Factuality::Factual);
    }
    if lits.contains(&(fact.variable.clone(), !fact.asserted)) {
        out.insert(Factuality::Antifactual);
    }
    if out.is_empty() {
        out.insert(Factuality::Afactual);
    }
    out
}

/// `A -> (K <-> B)` at one valuation.
pub fn truth_functional_eval(c: &ConditionalStatement, v: &Valuation) -> Result<bool, CondError> {
    if c.kind != Kind::TruthFunctional {
        return Err(CondError::KindMismatch(c.kind.name(), Kind::TruthFunctional.name()));
    }
    Ok(Formula::implies(c.antecedent_formula(), c.sensed_consequent()).eval(v)?)
}

/// Exact satisfaction of a plain system at a point, strict relations kept strict.
pub fn system_holds_at(constraints: &[Constraint], point: &Witness) -> Result<bool, CondError> {
    for c in constraints {
        if !c.holds_at(point).map_err(|e| CondError::Malformed(e.to_string()))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A solution set rendered for reports, `empty` included.
pub fn render_set(s: &SolutionSet) -> String {
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probnet::tests::basic;
    use crate::rational::ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cond(kind: Kind, ants: &[Term], cons: Term, k: Rational) -> ConditionalStatement {
        ConditionalStatement::terms(kind, ants, cons, Sense::Fraction(k)).unwrap()
    }

    fn canon(c: &Compiled) -> Vec<optimizer::CanonicalConstraint> {
        let mut v: Vec<_> = c.constraints().iter().map(|c| c.canonical()).collect();
        v.sort();
        v
    }

    #[test]
    fn table_two_systems() {
        let net = basic();
        let a = [Term::pos("A")];
        let su = compile(&cond(Kind::Subjunctive, &a, Term::pos("B"), int(1)), &net).unwrap();
        assert_eq!(su.constraints()[0].to_string(), "y = 1");
        let mat = compile(&cond(Kind::Material, &a, Term::pos("B"), ratio(1, 2)), &net).unwrap();
        assert_eq!(mat.constraints()[0].to_string(), "x y = 1/2 x");
        let ex = compile(&cond(Kind::Existential, &a, Term::pos("B"), int(1)), &net).unwrap();
        let shown: Vec<String> = ex.constraints().iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["x y = x", "x > 0"]);
        let tf = ConditionalStatement::formulas(
            Kind::TruthFunctional,
            Formula::atom("A"),
            Formula::atom("B"),
            Sense::Boolean(true),
        )
        .unwrap();
        let tfc = compile(&tf, &net).unwrap();
        assert_eq!(tfc.constraints()[0].to_string(), "1 - a + a b = 1");
    }

    #[test]
    fn truth_functional_matches_material() {
        let mut net = basic();
        let tf = ConditionalStatement::terms(Kind::TruthFunctional, &[Term::pos("A")], Term::pos("B"), Sense::Boolean(true))
            .unwrap();
        let mat = cond(Kind::Material, &[Term::pos("A")], Term::pos("B"), int(1));
        let p = compile_probabilistic(&tf, &mut net).unwrap();
        assert_eq!(canon(&p), canon(&compile(&mat, &net).unwrap()));
        let tf0 = tf.opposite();
        let mat0 = mat.opposite();
        let p0 = compile_probabilistic(&tf0, &mut net).unwrap();
        assert_eq!(canon(&p0), canon(&compile(&mat0, &net).unwrap()));
    }

    #[test]
    fn negated_consequent_flips_sense() {
        let net = basic();
        for kind in [Kind::Subjunctive, Kind::Material, Kind::Existential] {
            for k in [int(0), ratio(1, 3), int(1)] {
                let c = cond(kind, &[Term::pos("A")], Term::pos("B"), k);
                let a = compile(&c.with_negated_consequent(), &net).unwrap();
                let b = compile(&c.opposite(), &net).unwrap();
                assert_eq!(canon(&a), canon(&b), "{kind:?}");
            }
        }
    }

    #[test]
    fn opposites_matrix() {
        let net = basic();
        let cfg = SolverConfig::default();
        let a = [Term::pos("A")];
        for (kind, consistent) in [
            (Kind::Subjunctive, false),
            (Kind::Material, true),
            (Kind::Existential, false),
            (Kind::Feasibility, false),
        ] {
            let c = cond(kind, &a, Term::pos("B"), int(1));
            let r = check_opposites(&c, &c.opposite(), &net, &cfg).unwrap();
            assert_eq!(r.is_consistent(), consistent, "{kind:?}");
            if let Consistency::Consistent(Some(w)) = r {
                assert_eq!(w["x"], int(0));
            }
        }
        for (kind, consistent) in [(Kind::TruthFunctional, true), (Kind::BooleanFeasibility, false)] {
            let c = ConditionalStatement::terms(kind, &a, Term::pos("B"), Sense::Boolean(true)).unwrap();
            let r = check_opposites(&c, &c.opposite(), &net, &cfg).unwrap();
            assert_eq!(r.is_consistent(), consistent, "{kind:?}");
            if let Consistency::Consistent(Some(w)) = r {
                assert_eq!(w["a"], int(0));
            }
        }
    }

    #[test]
    fn hierarchy_on_samples() {
        let net = basic();
        let a = [Term::pos("A")];
        let sys = |kind| compile(&cond(kind, &a, Term::pos("B"), int(1)), &net).unwrap().constraints().to_vec();
        let (ex, su, mat) = (sys(Kind::Existential), sys(Kind::Subjunctive), sys(Kind::Material));
        let grid = [int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.7) {
                grid[rng.gen_range(0..grid.len())].clone()
            } else {
                ratio(rng.gen_range(0..1000), 1000)
            }
        };
        let (mut n_ex, mut n_su) = (0, 0);
        for _ in 0..10_000 {
            let point: Witness = ["x", "y", "z"].iter().map(|v| (v.to_string(), pick(&mut rng))).collect();
            let e = system_holds_at(&ex, &point).unwrap();
            let s = system_holds_at(&su, &point).unwrap();
            let m = system_holds_at(&mat, &point).unwrap();
            assert!(!e || s, "existential without subjunctive at {point:?}");
            assert!(!s || m, "subjunctive without material at {point:?}");
            n_ex += e as usize;
            n_su += s as usize;
        }
        assert!(n_ex > 100 && n_su > n_ex);
    }

    #[test]
    fn factuality() {
        let c = cond(Kind::Material, &[Term::neg("A"), Term::pos("C")], Term::pos("B"), int(1));
        assert_eq!(classify_factuality(&c, &Term::pos("C")), BTreeSet::from([Factuality::Factual]));
        assert_eq!(classify_factuality(&c, &Term::pos("A")), BTreeSet::from([Factuality::Antifactual]));
        let su = cond(Kind::Subjunctive, &[Term::pos("C")], Term::pos("B"), int(1));
        assert_eq!(classify_factuality(&su, &Term::pos("A")), BTreeSet::from([Factuality::Afactual]));
        let swapped = cond(Kind::Material, &[Term::pos("C"), Term::neg("A")], Term::pos("B"), int(1));
        assert_eq!(classify_factuality(&swapped, &Term::pos("A")), classify_factuality(&c, &Term::pos("A")));
    }

    #[test]
    fn truth_functional_rows() {
        let c = ConditionalStatement::terms(Kind::TruthFunctional, &[Term::pos("A")], Term::pos("B"), Sense::Boolean(true))
            .unwrap();
        let v = |a, b| Valuation::from([("A".to_string(), a), ("B".to_string(), b)]);
        assert!(!truth_functional_eval(&c, &v(true, false)).unwrap());
        assert!(truth_functional_eval(&c, &v(false, false)).unwrap());
        assert!(truth_functional_eval(&c.opposite(), &v(true, false)).unwrap());
        let su = cond(Kind::Subjunctive, &[Term::pos("A")], Term::pos("B"), int(1));
        assert!(truth_functional_eval(&su, &v(true, true)).is_err());
    }

    #[test]
    fn rejects_malformed() {
        let a = [Term::pos("A")];
        assert!(ConditionalStatement::terms(Kind::Material, &a, Term::pos("B"), Sense::Boolean(true)).is_err());
        assert!(ConditionalStatement::terms(Kind::BooleanFeasibility, &a, Term::pos("B"), Sense::Fraction(int(1))).is_err());
        assert!(ConditionalStatement::terms(Kind::Material, &a, Term::pos("B"), Sense::Fraction(int(2))).is_err());
        assert!(ConditionalStatement::terms(Kind::Material, &a, Term::pos("A"), Sense::Fraction(int(1))).is_err());
        assert!(ConditionalStatement::terms(Kind::Subjunctive, &[], Term::pos("A"), Sense::Fraction(int(1))).is_err());
        let mut net = basic();
        net.add_variable("C").unwrap();
        let su = cond(Kind::Subjunctive, &[Term::pos("B")], Term::pos("A"), int(1));
        assert!(matches!(compile(&su, &net), Err(CondError::Net(NetError::SubjunctiveInexpressible(_)))));
    }

    #[test]
    fn quotient_feasibility_three_sets() {
        let net = basic();
        let cfg = SolverConfig::default();
        let c = ConditionalStatement::new(
            Kind::QuotientFeasibility,
            Body::Terms { antecedent: vec![Term::pos("A")], consequent: Term::pos("B") },
            Sense::Fraction(int(1)),
            vec![ProbConstraint::parse("P0(B=T|A=T) = 1").unwrap()],
        )
        .unwrap();
        let Compiled::SetEquation(eq) = compile(&c, &net).unwrap() else { panic!() };
        assert!(evaluate_set_equation(&eq, &cfg).unwrap().holds);
        let Compiled::SetEquation(eq0) = compile(&c.opposite(), &net).unwrap() else { panic!() };
        assert!(!evaluate_set_equation(&eq0, &cfg).unwrap().holds);
        // With P(A) forced to zero the denominator set is {0}.
        let dead = ConditionalStatement { given: vec![ProbConstraint::parse("P(A=T) = 0").unwrap()], ..c };
        let Compiled::SetEquation(eqd) = compile(&dead, &net).unwrap() else { panic!() };
        assert!(!evaluate_set_equation(&eqd, &cfg).unwrap().holds);
    }

    #[test]
    fn display_forms() {
        let c = cond(Kind::Material, &[Term::pos("A")], Term::neg("B"), ratio(1, 2));
        assert_eq!(c.to_string(), "mat k=1/2 : A => !B");
        let bf = ConditionalStatement::formulas(
            Kind::BooleanFeasibility,
            Formula::parse("A & C").unwrap(),
            Formula::atom("B"),
            Sense::Boolean(true),
        )
        .unwrap();
        assert_eq!(bf.to_string(), "bf K=T : \"A & C\" => \"B\"");
    }
}
