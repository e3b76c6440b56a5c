//! Modal status of conclusions under premises.
//!
//! Probabilistic conditionals are judged by the solution sets of a few
//! derived objectives; Boolean-feasibility conditionals by 0/1 integer
//! programs, by probabilistic criteria on a joint table, or by enumerating
//! valuation sets (see [`family`]).

pub mod family;

use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::conditionals::{CondError, ConditionalStatement, Kind, Term};
use crate::lower::{self, LowerError};
use crate::optimizer::{self, Bounds, Constraint, OptError, SolutionSet, SolverConfig, VarBounds};
use crate::polynomial::Polynomial;
use crate::probnet::{NetError, Network};
use crate::proplogic::{atom_variable, valuations, Formula, LogicError};
use crate::rational::{format_rational, Rational};

pub use family::{
    count_sets, counterexample_sets, family_status, term_counterexamples, valuation_analysis, Counterexamples,
    FamilyVerdict, SetTerm, ValuationSetSpec,
};

/// Atom limit for Boolean deduction by integer programming.
pub const MAX_BOOLEAN_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeductionError {
    #[error("{0}")]
    Cond(#[from] CondError),
    #[error("{0}")]
    Opt(#[from] OptError),
    #[error("{0}")]
    Lower(#[from] LowerError),
    #[error("{0}")]
    Net(#[from] NetError),
    #[error("{0}")]
    Logic(#[from] LogicError),
    #[error("{atoms} atoms exceed the limit of {limit}")]
    TooLarge { atoms: usize, limit: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModalStatus {
    Necessary,
    Possible,
    Impossible,
}

impl ModalStatus {
    pub fn parse(s: &str) -> Option<ModalStatus> {
        match s {
            "necessary" => Some(ModalStatus::Necessary),
            "possible" => Some(ModalStatus::Possible),
            "impossible" => Some(ModalStatus::Impossible),
            _ => None,
        }
    }
}

impl fmt::Display for ModalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModalStatus::Necessary => "necessary",
            ModalStatus::Possible => "possible",
            ModalStatus::Impossible => "impossible",
        })
    }
}

/// One solution set behind a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetRecord {
    pub name: String,
    pub objective: String,
    pub constraints: Vec<String>,
    pub set: String,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    #[serde(skip)]
    pub solution: SolutionSet,
    /// The program behind the set, for independent checks.
    #[serde(skip)]
    pub program: (Polynomial, Vec<Constraint>, Bounds),
}

impl SetRecord {
    pub fn new(name: &str, objective: &Polynomial, constraints: &[Constraint], bounds: &Bounds, solution: SolutionSet) -> Self {
        let (alpha, beta) = match solution.endpoints() {
            Some((a, b)) => (Some(format_rational(a)), Some(format_rational(b))),
            None => (None, None),
        };
        SetRecord {
            name: name.to_string(),
            objective: objective.to_string(),
            constraints: constraints.iter().map(|c| c.to_string()).collect(),
            set: solution.to_string(),
            alpha,
            beta,
            solution,
            program: (objective.clone(), constraints.to_vec(), bounds.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: ModalStatus,
    pub sets: Vec<SetRecord>,
}

impl Verdict {
    pub fn set(&self, name: &str) -> Option<&SetRecord> {
        self.sets.iter().find(|s| s.name == name)
    }
}

fn tol(cfg: &SolverConfig) -> Rational {
    cfg.gap.clone()
}

fn solve_set(
    name: &str,
    objective: &Polynomial,
    constraints: &[Constraint],
    bounds: &Bounds,
    cfg: &SolverConfig,
) -> Result<SetRecord, DeductionError> {
    let s = optimizer::solution_set(objective, constraints, bounds, cfg)?;
    Ok(SetRecord::new(name, objective, constraints, bounds, s))
}

fn attains(
    objective: &Polynomial,
    constraints: &[Constraint],
    bounds: &Bounds,
    value: &Rational,
    cfg: &SolverConfig,
) -> Result<bool, DeductionError> {
    let obj = optimizer::Objective::Polynomial(objective.clone());
    Ok(optimizer::membership(&obj, constraints, bounds, value, cfg)?)
}

/// `{P(consequent) : Γ, Γ₀} = {k}`, with the set that decided it.
pub fn feasibility_deduce(
    net: &Network,
    gamma: &[Constraint],
    consequent: &Term,
    k: &Rational,
    cfg: &SolverConfig,
) -> Result<(bool, SetRecord), DeductionError> {
    let mut cs = net.gamma0();
    cs.extend_from_slice(gamma);
    let obj = net.query(&[consequent.event()])?;
    let rec = solve_set("consequent", &obj, &cs, &net.bounds(), cfg)?;
    Ok((rec.solution.is_singleton(k, &tol(cfg)), rec))
}

/// Status of a probabilistic conditional under premises Γ.
///
/// Subjunctive and feasibility conditionals use `Φ`, the set of the
/// constrained quantity, against `{k}`. Material conditionals use
/// `Ψ = {k P(A) - P(A,B)}` against `{0}`. Existential conditionals use
/// `Υ = {P(A) : P(A,B) = k P(A)}`, which must avoid `0`. Quotient-feasibility
/// conditionals use the denominator and residual sets.
pub fn conditional_status(
    net: &Network,
    gamma: &[Constraint],
    c: &ConditionalStatement,
    cfg: &SolverConfig,
) -> Result<Verdict, DeductionError> {
    let mut base = net.gamma0();
    base.extend_from_slice(gamma);
    let bounds = net.bounds();
    let crate::conditionals::Body::Terms { antecedent, consequent } = &c.body else {
        return Err(DeductionError::Unsupported(format!("{} conditionals take the Boolean routes", c.kind.name())));
    };
    for t in antecedent.iter().chain(std::iter::once(consequent)) {
        if !net.has_variable(&t.variable) {
            return Err(NetError::UnknownVariable(t.variable.clone()).into());
        }
    }
    let k = c.sense.value();
    let tol = tol(cfg);
    let ants: Vec<_> = antecedent.iter().map(Term::event).collect();
    let mut both = ants.clone();
    both.push(consequent.event());
    let zero = Rational::zero();
    match c.kind {
        Kind::Subjunctive | Kind::Feasibility => {
            let (obj, cs) = if c.kind == Kind::Subjunctive {
                (net.subjunctive_input_expr(&ants, &consequent.event())?, base)
            } else {
                let mut cs = base;
                for e in &ants {
                    cs.push(Constraint::eq(net.query(std::slice::from_ref(e))?, Polynomial::one()));
                }
                cs.extend(lower::lower_constraints(net, &c.given)?);
                (net.query(&[consequent.event()])?, cs)
            };
            let phi = solve_set("phi", &obj, &cs, &bounds, cfg)?;
            let status = if phi.solution.is_singleton(&k, &tol) {
                ModalStatus::Necessary
            } else if !phi.solution.is_empty() && attains(&obj, &cs, &bounds, &k, cfg)? {
                ModalStatus::Possible
            } else {
                ModalStatus::Impossible
            };
            Ok(Verdict { status, sets: vec![phi] })
        }
        Kind::Material => {
            let obj = &net.query(&ants)?.scale(&k) - &net.query(&both)?;
            let psi = solve_set("psi", &obj, &base, &bounds, cfg)?;
            let status = if psi.solution.is_singleton(&zero, &tol) {
                ModalStatus::Necessary
            } else if !psi.solution.is_empty() && attains(&obj, &base, &bounds, &zero, cfg)? {
                ModalStatus::Possible
            } else {
                ModalStatus::Impossible
            };
            Ok(Verdict { status, sets: vec![psi] })
        }
        Kind::Existential => {
            let pa = net.query(&ants)?;
            let mut cs = base;
            cs.push(Constraint::eq(net.query(&both)?, pa.scale(&k)));
            let ups = solve_set("upsilon", &pa, &cs, &bounds, cfg)?;
            let status = if ups.solution.is_empty() {
                ModalStatus::Impossible
            } else if !attains(&pa, &cs, &bounds, &zero, cfg)? {
                ModalStatus::Necessary
            } else if !ups.solution.is_singleton(&zero, &tol) {
                ModalStatus::Possible
            } else {
                ModalStatus::Impossible
            };
            Ok(Verdict { status, sets: vec![ups] })
        }
        Kind::QuotientFeasibility => {
            let mut cs = base;
            cs.extend(lower::lower_constraints(net, &c.given)?);
            let den = net.query(&ants)?;
            let residual = &net.query(&both)? - &den.scale(&k);
            let d = solve_set("denominator", &den, &cs, &bounds, cfg)?;
            let r = solve_set("residual", &residual, &cs, &bounds, cfg)?;
            let den_ok = !d.solution.is_empty() && !d.solution.is_singleton(&zero, &tol);
            let status = if den_ok && r.solution.is_singleton(&zero, &tol) {
                ModalStatus::Necessary
            } else if den_ok && {
                let mut tie = cs.clone();
                tie.push(Constraint::eq(residual.clone(), Polynomial::zero()));
                tie.push(Constraint::gt(den.clone(), Polynomial::zero()));
                optimizer::feasible(&tie, &bounds, cfg)?.is_some()
            } {
                ModalStatus::Possible
            } else {
                ModalStatus::Impossible
            };
            Ok(Verdict { status, sets: vec![d, r] })
        }
        Kind::TruthFunctional | Kind::BooleanFeasibility => unreachable!("propositional bodies hold formulas"),
    }
}

/// A set of 0/1 values mapped to a status: `{1}` necessary, `{0, 1}`
/// possible, `{0}` or empty impossible.
pub fn status_from_values(has_true: bool, has_false: bool) -> ModalStatus {
    match (has_true, has_false) {
        (true, false) => ModalStatus::Necessary,
        (true, true) => ModalStatus::Possible,
        _ => ModalStatus::Impossible,
    }
}

fn binary_bounds<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Result<Bounds, DeductionError> {
    let mut b = Bounds::new();
    for f in formulas {
        for a in f.atoms() {
            b.insert(atom_variable(&a), VarBounds::binary());
        }
    }
    if b.len() > MAX_BOOLEAN_ATOMS {
        return Err(DeductionError::TooLarge { atoms: b.len(), limit: MAX_BOOLEAN_ATOMS });
    }
    Ok(b)
}

/// `{consequent : antecedents true}` over 0/1 assignments, by integer programming.
pub fn boolean_deduce(
    antecedents: &[Formula],
    consequent: &Formula,
    cfg: &SolverConfig,
) -> Result<Verdict, DeductionError> {
    let bounds = binary_bounds(antecedents.iter().chain(std::iter::once(consequent)))?;
    let cs: Vec<Constraint> =
        antecedents.iter().map(|a| Constraint::eq(a.translate(), Polynomial::one())).collect();
    let obj = consequent.translate();
    let rec = solve_set("consequent", &obj, &cs, &bounds, cfg)?;
    let half = Rational::new(1.into(), 2.into());
    let status = match rec.solution.endpoints() {
        None => ModalStatus::Impossible,
        Some((a, b)) => status_from_values(b > &half, a < &half),
    };
    Ok(Verdict { status, sets: vec![rec] })
}

/// [`boolean_deduce`] by walking the truth table.
pub fn boolean_deduce_by_enumeration(antecedents: &[Formula], consequent: &Formula) -> Result<ModalStatus, DeductionError> {
    let mut atoms = std::collections::BTreeSet::new();
    for f in antecedents.iter().chain(std::iter::once(consequent)) {
        atoms.extend(f.atoms());
    }
    let atoms: Vec<String> = atoms.into_iter().collect();
    if atoms.len() > MAX_BOOLEAN_ATOMS {
        return Err(DeductionError::TooLarge { atoms: atoms.len(), limit: MAX_BOOLEAN_ATOMS });
    }
    let (mut t, mut f) = (false, false);
    for v in valuations(&atoms) {
        let mut ok = true;
        for a in antecedents {
            if !a.eval(&v)? {
                ok = false;
                break;
            }
        }
        if ok {
            if consequent.eval(&v)? {
                t = true;
            } else {
                f = true;
            }
        }
    }
    Ok(status_from_values(t, f))
}

/// Boolean-feasibility status through probabilities on a joint model.
///
/// `Φ = {P([ant & !cons]=T) : Γ}` must contain `0`, and
/// `Ψ = {P([ant & cons]=T) : Φ-expression = 0, Γ}` must be nonempty. The
/// conclusion is necessary when `Φ = {0}` and `0 ∉ Ψ`, possible when
/// `0 ∈ Φ` and `Ψ ≠ {0}`, and impossible otherwise.
pub fn boolean_status_probabilistic(
    net: &mut Network,
    gamma: &[Constraint],
    antecedent: &Formula,
    consequent: &Formula,
    cfg: &SolverConfig,
) -> Result<Verdict, DeductionError> {
    let neg = Formula::and(antecedent.clone(), Formula::not(consequent.clone()));
    let pos = Formula::and(antecedent.clone(), consequent.clone());
    let neg_name = net.ensure_embedded(&neg)?;
    let pos_name = net.ensure_embedded(&pos)?;
    let phi_obj = net.query(&[(neg_name, true)])?;
    let psi_obj = net.query(&[(pos_name, true)])?;
    let bounds = net.bounds();
    let mut cs = net.gamma0();
    cs.extend_from_slice(gamma);
    let zero = Rational::zero();
    let tol = tol(cfg);
    let phi = solve_set("phi", &phi_obj, &cs, &bounds, cfg)?;
    let mut psi_cs = cs.clone();
    psi_cs.push(Constraint::eq(phi_obj.clone(), Polynomial::zero()));
    let psi = solve_set("psi", &psi_obj, &psi_cs, &bounds, cfg)?;
    let status = if psi.solution.is_empty() {
        ModalStatus::Impossible
    } else if phi.solution.is_singleton(&zero, &tol) && !attains(&psi_obj, &psi_cs, &bounds, &zero, cfg)? {
        ModalStatus::Necessary
    } else if !psi.solution.is_singleton(&zero, &tol) {
        // Ψ nonempty already shows 0 ∈ Φ.
        ModalStatus::Possible
    } else {
        ModalStatus::Impossible
    };
    Ok(Verdict { status, sets: vec![phi, psi] })
}

/// Modal status of a Boolean-feasibility conditional as a deduction from its
/// antecedent conjuncts.
pub fn boolean_conditional_status(c: &ConditionalStatement, cfg: &SolverConfig) -> Result<Verdict, DeductionError> {
    if c.kind != Kind::BooleanFeasibility {
        return Err(DeductionError::Unsupported(format!("{} conditional", c.kind.name())));
    }
    let ants = crate::conditionals::conjuncts(&c.antecedent_formula());
    boolean_deduce(&ants, &c.sensed_consequent(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditionals::Sense;
    use crate::lower::ProbConstraint;
    use crate::probnet::tests::basic;
    use crate::rational::{int, ratio};

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    fn lowered(net: &Network, srcs: &[&str]) -> Vec<Constraint> {
        let cs: Vec<ProbConstraint> = srcs.iter().map(|s| ProbConstraint::parse(s).unwrap()).collect();
        lower::lower_constraints(net, &cs).unwrap()
    }

    #[test]
    fn modus_ponens_and_friends() {
        let cfg = SolverConfig::default();
        let mp = boolean_deduce(&[f("X"), f("X -> Y")], &f("Y"), &cfg).unwrap();
        assert_eq!(mp.status, ModalStatus::Necessary);
        assert_eq!(mp.sets[0].set, "{1.000}");
        assert_eq!(boolean_deduce(&[f("A")], &f("A | B"), &cfg).unwrap().status, ModalStatus::Necessary);
        assert_eq!(boolean_deduce(&[f("A | B"), f("!A")], &f("B"), &cfg).unwrap().status, ModalStatus::Necessary);
        let forced = boolean_deduce(&[f("A | B"), f("!A"), f("A <-> B")], &f("B"), &cfg).unwrap();
        assert_eq!(forced.status, ModalStatus::Impossible);
        assert_eq!(boolean_deduce(&[f("A")], &f("B"), &cfg).unwrap().status, ModalStatus::Possible);
    }

    #[test]
    fn no_explosion() {
        let cfg = SolverConfig::default();
        for cons in ["B", "!B", "A", "T"] {
            assert_eq!(boolean_deduce(&[f("A"), f("!A")], &f(cons), &cfg).unwrap().status, ModalStatus::Impossible);
        }
    }

    #[test]
    fn enumeration_agrees() {
        let cfg = SolverConfig::default();
        let cases: [(&[&str], &str); 5] =
            [(&["A", "A -> B"], "B"), (&["A | B"], "A"), (&["A ^ B", "A"], "B"), (&[], "A | !A"), (&["A & !A"], "B")];
        for (ants, cons) in cases {
            let ants: Vec<Formula> = ants.iter().map(|s| f(s)).collect();
            let ip = boolean_deduce(&ants, &f(cons), &cfg).unwrap().status;
            assert_eq!(ip, boolean_deduce_by_enumeration(&ants, &f(cons)).unwrap(), "{cons}");
        }
    }

    #[test]
    fn butter_deduction() {
        let net = basic();
        let cfg = SolverConfig::default();
        let gamma = lowered(&net, &["P(B=T) = 0", "P0(B=T|A=T) = 1"]);
        let (ok, rec) = feasibility_deduce(&net, &gamma, &Term::neg("A"), &int(1), &cfg).unwrap();
        assert!(ok);
        assert_eq!(rec.set, "{1.000}");
    }

    #[test]
    fn statuses_under_evidence() {
        let net = basic();
        let cfg = SolverConfig::default();
        let gamma = lowered(&net, &["P(B=T) = 0"]);
        let c = |kind| ConditionalStatement::terms(kind, &[Term::pos("A")], Term::pos("B"), Sense::Fraction(int(1))).unwrap();
        let su = conditional_status(&net, &gamma, &c(Kind::Subjunctive), &cfg).unwrap();
        assert_eq!(su.status, ModalStatus::Possible);
        assert_eq!(su.sets[0].set, "[0.000, 1.000]");
        let mat = conditional_status(&net, &gamma, &c(Kind::Material), &cfg).unwrap();
        assert_eq!(mat.status, ModalStatus::Possible);
        assert_eq!(mat.sets[0].set, "[0.000, 1.000]");
        let ex = conditional_status(&net, &gamma, &c(Kind::Existential), &cfg).unwrap();
        assert_eq!(ex.status, ModalStatus::Impossible);
        assert_eq!(ex.sets[0].set, "{0.000}");
    }

    #[test]
    fn inconsistent_premises_are_impossible() {
        let net = basic();
        let cfg = SolverConfig::default();
        let gamma = lowered(&net, &["P(A=T) = 1", "P(A=T) = 0"]);
        for kind in [Kind::Subjunctive, Kind::Material, Kind::Existential, Kind::QuotientFeasibility, Kind::Feasibility] {
            for k in [int(0), int(1)] {
                let c = ConditionalStatement::terms(kind, &[Term::pos("A")], Term::pos("B"), Sense::Fraction(k)).unwrap();
                assert_eq!(conditional_status(&net, &gamma, &c, &cfg).unwrap().status, ModalStatus::Impossible);
            }
        }
    }

    #[test]
    fn quotient_statuses() {
        let net = basic();
        let cfg = SolverConfig::default();
        let c = ConditionalStatement::terms(Kind::QuotientFeasibility, &[Term::pos("A")], Term::pos("B"), Sense::Fraction(ratio(1, 2)))
            .unwrap();
        assert_eq!(conditional_status(&net, &[], &c, &cfg).unwrap().status, ModalStatus::Possible);
        let gamma = lowered(&net, &["P0(B=T|A=T) = 1/2"]);
        assert_eq!(conditional_status(&net, &gamma, &c, &cfg).unwrap().status, ModalStatus::Necessary);
        let dead = lowered(&net, &["P(A=T) = 0"]);
        assert_eq!(conditional_status(&net, &dead, &c, &cfg).unwrap().status, ModalStatus::Impossible);
    }

    #[test]
    fn probabilistic_boolean_route() {
        let mut net = Network::new();
        net.add_variable("A").unwrap();
        net.add_variable("B").unwrap();
        let cells = (1..=4).zip(crate::probnet::state_vectors(2)).map(|(i, s)| (s, Polynomial::var(&format!("x{i}"))));
        for i in 1..=4 {
            net.add_parameter(crate::probnet::Parameter::unit(&format!("x{i}"))).unwrap();
        }
        net.add_joint(&["A".into(), "B".into()], cells.collect()).unwrap();
        let cfg = SolverConfig::default();
        let gamma = lowered(&net, &["P(A=T) = 1"]);
        let v = boolean_status_probabilistic(&mut net, &gamma, &f("!A"), &f("B"), &cfg).unwrap();
        assert_eq!(v.status, ModalStatus::Impossible);
        assert_eq!((v.sets[0].set.as_str(), v.sets[1].set.as_str()), ("{0.000}", "{0.000}"));
        let mut net2 = net.clone();
        let v = boolean_status_probabilistic(&mut net2, &gamma, &f("B"), &f("A"), &cfg).unwrap();
        assert_eq!(v.status, ModalStatus::Possible);
        assert_eq!(v.sets[1].set, "[0.000, 1.000]");
    }
}
