//! Lowering probability expressions to polynomials over a network.

use std::fmt;

use thiserror::Error;

use crate::expr::{self, Atom, Cursor, EventSpec, Expr, Tok, Value, VarRef};
use crate::optimizer::{Constraint, Relation};
use crate::polynomial::Polynomial;
use crate::probnet::{Event, NetError, Network};
use crate::proplogic::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("formula [{0}] is not embedded in the network")]
    NotEmbedded(String),
    #[error("`{0}` needs a single target event")]
    InputTarget(String),
    #[error("{0}")]
    Net(#[from] NetError),
    #[error("{0}")]
    Expr(String),
}

/// `lhs rel rhs` over probability expressions, before lowering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbConstraint {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

impl fmt::Display for ProbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation.symbol(), self.rhs)
    }
}

impl ProbConstraint {
    pub fn new(lhs: Expr, relation: Relation, rhs: Expr) -> Self {
        ProbConstraint { lhs, relation, rhs }
    }

    pub fn parse(src: &str) -> Result<Self, String> {
        let toks = expr::tokenize(src)?;
        let mut cur = Cursor::new(&toks);
        let c = parse_prob_constraint(&mut cur)?;
        cur.expect_end()?;
        Ok(c)
    }

    /// Events named in the constraint, by plain variable name.
    pub fn events(&self) -> Vec<(String, bool)> {
        let mut out = Vec::new();
        for a in self.lhs.atoms().into_iter().chain(self.rhs.atoms()) {
            if let Atom::Prob { target, given } | Atom::Input { target, given } = a {
                for e in target.iter().chain(given) {
                    if let VarRef::Name(n) = &e.var {
                        out.push((n.clone(), e.state));
                    }
                }
            }
        }
        out
    }

    pub fn formulas(&self) -> Vec<Formula> {
        let mut out = expr_formulas(&self.lhs);
        out.extend(expr_formulas(&self.rhs));
        out
    }
}

pub fn parse_relation(cur: &mut Cursor) -> Result<Relation, String> {
    let rel = match cur.next() {
        Some(Tok::Sym("=")) => Relation::Eq,
        Some(Tok::Sym("<=")) => Relation::Le,
        Some(Tok::Sym(">=")) => Relation::Ge,
        Some(Tok::Sym("<")) => Relation::Lt,
        Some(Tok::Sym(">")) => Relation::Gt,
        Some(Tok::Sym("!=")) => return Err("`!=` is a disjunction and cannot be a constraint".into()),
        other => return Err(format!("expected a relation, found {}", expr::describe(other))),
    };
    Ok(rel)
}

pub fn parse_prob_constraint(cur: &mut Cursor) -> Result<ProbConstraint, String> {
    let lhs = expr::parse_expr(cur)?;
    let relation = parse_relation(cur)?;
    let rhs = expr::parse_expr(cur)?;
    Ok(ProbConstraint { lhs, relation, rhs })
}

/// Inline formulas used inside `P(...)` atoms.
pub fn expr_formulas(e: &Expr) -> Vec<Formula> {
    let mut out = Vec::new();
    for a in e.atoms() {
        if let Atom::Prob { target, given } | Atom::Input { target, given } = a {
            for ev in target.iter().chain(given) {
                if let VarRef::Formula(f) = &ev.var {
                    out.push(f.clone());
                }
            }
        }
    }
    out
}

/// Embeds every inline formula of `e` that the network lacks.
pub fn embed_inline(net: &mut Network, e: &Expr) -> Result<(), LowerError> {
    for f in expr_formulas(e) {
        net.ensure_embedded(&f)?;
    }
    Ok(())
}

pub fn resolve_event(net: &Network, e: &EventSpec) -> Result<Event, LowerError> {
    let name = match &e.var {
        VarRef::Name(n) => {
            if !net.has_variable(n) {
                return Err(NetError::UnknownVariable(n.clone()).into());
            }
            n.clone()
        }
        VarRef::Formula(f) => net.lookup_formula(f).ok_or_else(|| LowerError::NotEmbedded(f.to_string()))?,
    };
    Ok((name, e.state))
}

pub fn resolve_events(net: &Network, es: &[EventSpec]) -> Result<Vec<Event>, LowerError> {
    es.iter().map(|e| resolve_event(net, e)).collect()
}

fn resolve_atom(net: &Network, a: &Atom) -> Result<Value, LowerError> {
    match a {
        Atom::Param(p) => {
            if net.parameter(p).is_none() {
                return Err(LowerError::UnknownParameter(p.clone()));
            }
            Ok(Value::Poly(Polynomial::var(p)))
        }
        Atom::Prob { target, given } => {
            let t = resolve_events(net, target)?;
            if given.is_empty() {
                return Ok(Value::Poly(net.query(&t)?));
            }
            let g = resolve_events(net, given)?;
            let q = net.query_conditional(&t, &g)?;
            Ok(Value::Frac(q.numerator, q.denominator))
        }
        Atom::Input { target, given } => {
            if target.len() != 1 {
                return Err(LowerError::InputTarget(a.to_string()));
            }
            let t = resolve_event(net, &target[0])?;
            let g = resolve_events(net, given)?;
            Ok(Value::Poly(net.subjunctive_input_expr(&g, &t)?))
        }
    }
}

/// Value of `e` on the network: a polynomial or an uncancelled quotient.
pub fn lower_expr(net: &Network, e: &Expr) -> Result<Value, LowerError> {
    let mut err = None;
    let v = e.eval(&mut |a| {
        resolve_atom(net, a).map_err(|e| {
            let msg = e.to_string();
            err = Some(e);
            msg
        })
    });
    match v {
        Ok(v) => Ok(v),
        Err(msg) => Err(err.unwrap_or(LowerError::Expr(msg))),
    }
}

pub fn lower_polynomial(net: &Network, e: &Expr) -> Result<Polynomial, LowerError> {
    match lower_expr(net, e)? {
        Value::Poly(p) => Ok(p),
        Value::Frac(n, d) => Err(LowerError::Expr(format!("`{e}` is a quotient ({n}) / ({d})"))),
    }
}

/// Polynomial constraints for `c`.
///
/// A quotient side is multiplied out and its denominator is required to be
/// positive, so conditional probabilities in constraints are never `0/0`.
pub fn lower_constraint(net: &Network, c: &ProbConstraint) -> Result<Vec<Constraint>, LowerError> {
    let l = lower_expr(net, &c.lhs)?;
    let r = lower_expr(net, &c.rhs)?;
    let (ln, ld) = split(l);
    let (rn, rd) = split(r);
    let mut out = Vec::new();
    let lhs = match &rd {
        Some(d) => &ln * d,
        None => ln,
    };
    let rhs = match &ld {
        Some(d) => &rn * d,
        None => rn,
    };
    out.push(Constraint::new(lhs, c.relation, rhs));
    for d in ld.into_iter().chain(rd) {
        if d.as_constant().is_none() {
            out.push(Constraint::gt(d, Polynomial::zero()));
        }
    }
    Ok(out)
}

fn split(v: Value) -> (Polynomial, Option<Polynomial>) {
    match v {
        Value::Poly(p) => (p, None),
        Value::Frac(n, d) => (n, Some(d)),
    }
}

pub fn lower_constraints(net: &Network, cs: &[ProbConstraint]) -> Result<Vec<Constraint>, LowerError> {
    let mut out = Vec::new();
    for c in cs {
        out.extend(lower_constraint(net, c)?);
    }
    Ok(out)
}

/// `P(e₁, …, eₙ)` as an expression.
pub fn prob_expr(events: &[Event]) -> Expr {
    Expr::Atom(Atom::Prob { target: specs(events), given: Vec::new() })
}

pub fn specs(events: &[Event]) -> Vec<EventSpec> {
    events
        .iter()
        .map(|(v, s)| EventSpec { var: var_ref(v), state: *s })
        .collect()
}

fn var_ref(name: &str) -> VarRef {
    match name.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(src) => match Formula::parse(src) {
            Ok(f) => VarRef::Formula(f),
            Err(_) => VarRef::Name(name.to_string()),
        },
        None => VarRef::Name(name.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probnet::tests::basic;

    #[test]
    fn lowers_queries_and_inputs() {
        let net = basic();
        let c = ProbConstraint::parse("P(B=T) = 0").unwrap();
        let cs = lower_constraint(&net, &c).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].lhs.to_string(), "z + x y - x z");
        let c = ProbConstraint::parse("P0(B=T|A=T) = 1").unwrap();
        assert_eq!(lower_constraint(&net, &c).unwrap()[0].lhs.to_string(), "y");
    }

    #[test]
    fn quotient_constraint_requires_positive_denominator() {
        let net = basic();
        let c = ProbConstraint::parse("P(B=T|A=T) = 1/2").unwrap();
        let cs = lower_constraint(&net, &c).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].to_string(), "x y = 1/2 x");
        assert_eq!(cs[1].to_string(), "x > 0");
    }

    #[test]
    fn inline_formulas_must_be_embedded() {
        let mut net = basic();
        let e = crate::expr::parse_expr_str("P([A -> B]=T)").unwrap();
        assert!(matches!(lower_expr(&net, &e), Err(LowerError::NotEmbedded(_))));
        embed_inline(&mut net, &e).unwrap();
        assert_eq!(lower_polynomial(&net, &e).unwrap().to_string(), "1 - x + x y");
    }

    #[test]
    fn unknown_names() {
        let net = basic();
        let e = crate::expr::parse_expr_str("q + P(A)").unwrap();
        assert_eq!(lower_expr(&net, &e), Err(LowerError::UnknownParameter("q".into())));
        let e = crate::expr::parse_expr_str("P(Q=T)").unwrap();
        assert!(matches!(lower_expr(&net, &e), Err(LowerError::Net(NetError::UnknownVariable(_)))));
    }
}
