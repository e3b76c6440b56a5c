//! Global optimization of polynomial and quotient-of-polynomial objectives.
//!
//! Programs are linearized by giving every distinct monomial a lifted column
//! with McCormick envelopes from the variable box, solved with an exact
//! rational simplex, and refined by spatial branch-and-bound. Quotient
//! objectives go through the Charnes-Cooper scaling of each node relaxation.

mod bnb;
mod interval;
pub mod oracle;
mod relax;
pub mod render;
mod repair;
pub mod simplex;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::parallel::{self, Execution};
use crate::polynomial::{FractionalPolynomial, PolyError, Polynomial};
use crate::rational::{int, pow10_neg, ratio, Rational};

pub use oracle::{grid_oracle, grid_oracle_with, OracleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Gt => ">",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: Polynomial,
    pub relation: Relation,
    pub rhs: Polynomial,
}

/// Normalized form `g rel 0` with `rel` one of `=`, `>=`, `>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalConstraint {
    pub kind: CanonicalKind,
    pub poly: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CanonicalKind {
    Eq,
    Ge,
    Gt,
}

impl Constraint {
    pub fn new(lhs: Polynomial, relation: Relation, rhs: Polynomial) -> Self {
        Constraint { lhs, relation, rhs }
    }

    pub fn eq(lhs: Polynomial, rhs: Polynomial) -> Self {
        Constraint::new(lhs, Relation::Eq, rhs)
    }

    pub fn ge(lhs: Polynomial, rhs: Polynomial) -> Self {
        Constraint::new(lhs, Relation::Ge, rhs)
    }

    pub fn le(lhs: Polynomial, rhs: Polynomial) -> Self {
        Constraint::new(lhs, Relation::Le, rhs)
    }

    pub fn gt(lhs: Polynomial, rhs: Polynomial) -> Self {
        Constraint::new(lhs, Relation::Gt, rhs)
    }

    pub fn lt(lhs: Polynomial, rhs: Polynomial) -> Self {
        Constraint::new(lhs, Relation::Lt, rhs)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut v = self.lhs.variables();
        v.extend(self.rhs.variables());
        v
    }

    /// `g` and kind such that the constraint reads `g kind 0`.
    pub fn normalized(&self) -> (Polynomial, CanonicalKind) {
        let d = &self.lhs - &self.rhs;
        match self.relation {
            Relation::Eq => (d, CanonicalKind::Eq),
            Relation::Ge => (d, CanonicalKind::Ge),
            Relation::Gt => (d, CanonicalKind::Gt),
            Relation::Le => (-d, CanonicalKind::Ge),
            Relation::Lt => (-d, CanonicalKind::Gt),
        }
    }

    /// Scale- and side-independent form, so `xy = kx` and `kx - xy = 0` agree.
    pub fn canonical(&self) -> CanonicalConstraint {
        let (g, kind) = self.normalized();
        let g = match kind {
            CanonicalKind::Eq => g.monic(),
            _ => g.sign_preserving_normal(),
        };
        CanonicalConstraint { kind, poly: g.to_string() }
    }

    /// Exact check with strict relations kept strict.
    pub fn holds_at(&self, point: &BTreeMap<String, Rational>) -> Result<bool, PolyError> {
        let (g, kind) = self.normalized();
        let v = g.evaluate(point)?;
        Ok(match kind {
            CanonicalKind::Eq => v.is_zero(),
            CanonicalKind::Ge => !v.is_negative(),
            CanonicalKind::Gt => v.is_positive(),
        })
    }

    /// Amount by which the lowered constraint fails, zero when satisfied.
    pub fn violation(&self, point: &BTreeMap<String, Rational>, epsilon: &Rational) -> Result<Rational, PolyError> {
        let (g, kind) = self.normalized();
        let v = g.evaluate(point)?;
        Ok(match kind {
            CanonicalKind::Eq => v.abs(),
            CanonicalKind::Ge => {
                if v.is_negative() {
                    -v
                } else {
                    Rational::zero()
                }
            }
            CanonicalKind::Gt => {
                if &v < epsilon {
                    epsilon - v
                } else {
                    Rational::zero()
                }
            }
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarBounds {
    pub lower: Rational,
    pub upper: Rational,
    pub integer: bool,
}

impl VarBounds {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        VarBounds { lower, upper, integer: false }
    }

    pub fn unit() -> Self {
        VarBounds::new(int(0), int(1))
    }

    pub fn binary() -> Self {
        VarBounds { lower: int(0), upper: int(1), integer: true }
    }
}

pub type Bounds = BTreeMap<String, VarBounds>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Objective {
    Polynomial(Polynomial),
    Fractional(FractionalPolynomial),
}

impl Objective {
    pub fn variables(&self) -> BTreeSet<String> {
        match self {
            Objective::Polynomial(p) => p.variables(),
            Objective::Fractional(f) => f.variables(),
        }
    }

    pub fn evaluate(&self, point: &BTreeMap<String, Rational>) -> Result<Option<Rational>, PolyError> {
        match self {
            Objective::Polynomial(p) => p.evaluate(point).map(Some),
            Objective::Fractional(f) => f.evaluate(point),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Polynomial(p) => write!(f, "{p}"),
            Objective::Fractional(q) => write!(f, "{q}"),
        }
    }
}

impl From<Polynomial> for Objective {
    fn from(p: Polynomial) -> Self {
        Objective::Polynomial(p)
    }
}

impl From<FractionalPolynomial> for Objective {
    fn from(f: FractionalPolynomial) -> Self {
        Objective::Fractional(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub direction: Direction,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    pub bounds: Bounds,
}

impl Program {
    pub fn new(direction: Direction, objective: Objective, constraints: Vec<Constraint>, bounds: Bounds) -> Self {
        Program { direction, objective, constraints, bounds }
    }

    /// Variables of the objective and constraints, in name order.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut v = self.objective.variables();
        for c in &self.constraints {
            v.extend(c.variables());
        }
        v
    }

    pub fn continuous_dimension(&self) -> usize {
        self.variables()
            .iter()
            .filter(|v| self.bounds.get(*v).map_or(true, |b| !b.integer))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Margin used to lower strict relations (default 1/1000).
    pub epsilon: Rational,
    /// Absolute optimality gap (default 1e-6).
    pub gap: Rational,
    pub max_nodes: usize,
    /// Violation accepted when checking a witness (default 1e-9).
    pub feasibility_tolerance: Rational,
    /// Quotient values beyond this magnitude are reported unbounded.
    pub unbounded_threshold: Rational,
    /// Upper limit `T` on the Charnes-Cooper scale, so denominators stay above `1/T`.
    pub scale_cap: Rational,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: ratio(1, 1000),
            gap: pow10_neg(6),
            max_nodes: 100_000,
            feasibility_tolerance: pow10_neg(9),
            unbounded_threshold: int(1_000_000_000),
            scale_cap: int(1_000_000_000_000),
            execution: Execution::default(),
        }
    }
}

pub type Witness = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Optimal { value: Rational, witness: Witness },
    Infeasible,
    Unbounded,
}

impl SolveOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            SolveOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Optimal { .. } => "optimal",
            SolveOutcome::Infeasible => "infeasible",
            SolveOutcome::Unbounded => "unbounded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptError {
    #[error("variable `{0}` has no bounds")]
    MissingBounds(String),
    #[error("variable `{0}` has an empty range")]
    EmptyBounds(String),
    #[error("node limit of {0} reached before the gap closed")]
    NodeLimit(usize),
    #[error("grid oracle handles at most {max} continuous variables, got {got}")]
    OracleDimension { max: usize, got: usize },
    #[error("minimization and maximization disagree on feasibility")]
    Inconsistent,
    #[error("{0}")]
    Poly(#[from] PolyError),
}

/// Solves one program to the configured gap.
pub fn solve(program: &Program, config: &SolverConfig) -> Result<SolveOutcome, OptError> {
    check_bounds(program)?;
    let outcome = bnb::solve(program, config)?;
    if let SolveOutcome::Optimal { witness, .. } = &outcome {
        debug_assert!(witness_ok(program, witness, config));
    }
    Ok(outcome)
}

/// Returns whether the witness satisfies every constraint within tolerance.
pub fn witness_ok(program: &Program, witness: &Witness, config: &SolverConfig) -> bool {
    for (v, b) in &program.bounds {
        if let Some(x) = witness.get(v) {
            if x < &(&b.lower - &config.feasibility_tolerance) || x > &(&b.upper + &config.feasibility_tolerance) {
                return false;
            }
            if b.integer && !x.is_integer() {
                return false;
            }
        }
    }
    program.constraints.iter().all(|c| {
        c.violation(witness, &config.epsilon)
            .map(|v| v <= config.feasibility_tolerance)
            .unwrap_or(false)
    })
}

fn check_bounds(program: &Program) -> Result<(), OptError> {
    for v in program.variables() {
        match program.bounds.get(&v) {
            None => return Err(OptError::MissingBounds(v)),
            Some(b) if b.lower > b.upper => return Err(OptError::EmptyBounds(v)),
            _ => {}
        }
    }
    Ok(())
}

/// `{objective : constraints}` described by its extreme values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionSet {
    Empty,
    Characterized { alpha_star: Rational, beta_star: Rational },
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SolutionSet::Empty)
    }

    /// True when the set is exactly `{k}` up to `tol`.
    pub fn is_singleton(&self, k: &Rational, tol: &Rational) -> bool {
        match self {
            SolutionSet::Empty => false,
            SolutionSet::Characterized { alpha_star, beta_star } => {
                (alpha_star - k).abs() <= *tol && (beta_star - k).abs() <= *tol
            }
        }
    }

    pub fn endpoints(&self) -> Option<(&Rational, &Rational)> {
        match self {
            SolutionSet::Empty => None,
            SolutionSet::Characterized { alpha_star, beta_star } => Some((alpha_star, beta_star)),
        }
    }
}

impl fmt::Display for SolutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::rational::format_decimal;
        match self {
            SolutionSet::Empty => write!(f, "empty"),
            SolutionSet::Characterized { alpha_star, beta_star } if alpha_star == beta_star => {
                write!(f, "{{{}}}", format_decimal(alpha_star, 3))
            }
            SolutionSet::Characterized { alpha_star, beta_star } => {
                write!(f, "[{}, {}]", format_decimal(alpha_star, 3), format_decimal(beta_star, 3))
            }
        }
    }
}

/// Both solves behind a solution set, kept for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSolve {
    pub min: SolveOutcome,
    pub max: SolveOutcome,
}

/// Solves min and max of a polynomial objective.
pub fn solution_set(
    objective: &Polynomial,
    constraints: &[Constraint],
    bounds: &Bounds,
    config: &SolverConfig,
) -> Result<SolutionSet, OptError> {
    solution_set_detailed(objective, constraints, bounds, config).map(|(s, _)| s)
}

pub fn solution_set_detailed(
    objective: &Polynomial,
    constraints: &[Constraint],
    bounds: &Bounds,
    config: &SolverConfig,
) -> Result<(SolutionSet, SetSolve), OptError> {
    let objective = Objective::Polynomial(objective.clone());
    let (min, max) = solve_pair(&objective, constraints, bounds, config)?;
    let set = match (&min, &max) {
        (SolveOutcome::Infeasible, SolveOutcome::Infeasible) => SolutionSet::Empty,
        (SolveOutcome::Optimal { value: a, .. }, SolveOutcome::Optimal { value: b, .. }) => {
            SolutionSet::Characterized { alpha_star: a.clone(), beta_star: b.clone() }
        }
        _ => return Err(OptError::Inconsistent),
    };
    Ok((set, SetSolve { min, max }))
}

fn solve_pair(
    objective: &Objective,
    constraints: &[Constraint],
    bounds: &Bounds,
    config: &SolverConfig,
) -> Result<(SolveOutcome, SolveOutcome), OptError> {
    let make = |direction| Program::new(direction, objective.clone(), constraints.to_vec(), bounds.clone());
    let pmin = make(Direction::Minimize);
    let pmax = make(Direction::Maximize);
    let (a, b) = parallel::join(config.execution, || solve(&pmin, config), || solve(&pmax, config));
    Ok((a?, b?))
}

/// One end of a quotient's solution set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Finite(Rational),
    Unbounded,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Finite(r) => write!(f, "{}", crate::rational::format_decimal(r, 3)),
            Endpoint::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Solution set of a quotient objective over the points where its denominator is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalSet {
    /// `None` when no feasible point has a nonzero denominator.
    pub range: Option<(Endpoint, Endpoint)>,
    pub constraints_feasible: bool,
    /// Some feasible point makes the denominator exactly zero.
    pub denominator_zero_feasible: bool,
    pub min: SolveOutcome,
    pub max: SolveOutcome,
}

impl FractionalSet {
    /// The polynomial-style set when both ends are finite.
    pub fn as_solution_set(&self) -> Option<SolutionSet> {
        match &self.range {
            None => Some(SolutionSet::Empty),
            Some((Endpoint::Finite(a), Endpoint::Finite(b))) => {
                Some(SolutionSet::Characterized { alpha_star: a.clone(), beta_star: b.clone() })
            }
            _ => None,
        }
    }
}

impl fmt::Display for FractionalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.range {
            None if self.constraints_feasible => write!(f, "empty (denominator forced to zero)"),
            None => write!(f, "empty (constraints infeasible)"),
            Some((a, b)) => {
                if a == b {
                    write!(f, "{{{a}}}")?;
                } else {
                    write!(f, "[{a}, {b}]")?;
                }
                if self.denominator_zero_feasible {
                    write!(f, " or empty (denominator may vanish)")?;
                }
                Ok(())
            }
        }
    }
}

pub fn fractional_solution_set(
    objective: &FractionalPolynomial,
    constraints: &[Constraint],
    bounds: &Bounds,
    config: &SolverConfig,
) -> Result<FractionalSet, OptError> {
    let obj = Objective::Fractional(objective.clone());
    let (min, max) = solve_pair(&obj, constraints, bounds, config)?;
    let endpoint = |o: &SolveOutcome| match o {
        SolveOutcome::Optimal { value, .. } => Some(Endpoint::Finite(value.clone())),
        SolveOutcome::Unbounded => Some(Endpoint::Unbounded),
        SolveOutcome::Infeasible => None,
    };
    let range = match (endpoint(&min), endpoint(&max)) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(OptError::Inconsistent),
    };
    let constraints_feasible = if range.is_some() {
        true
    } else {
        feasible(constraints, bounds, config)?.is_some()
    };
    let denominator_zero_feasible = if constraints_feasible {
        let mut with_zero = constraints.to_vec();
        with_zero.push(Constraint::eq(objective.denominator.clone(), Polynomial::zero()));
        feasible(&with_zero, bounds, config)?.is_some()
    } else {
        false
    };
    Ok(FractionalSet { range, constraints_feasible, denominator_zero_feasible, min, max })
}

/// Some point satisfying the constraints, if any.
pub fn feasible(constraints: &[Constraint], bounds: &Bounds, config: &SolverConfig) -> Result<Option<Witness>, OptError> {
    let program = Program::new(
        Direction::Minimize,
        Objective::Polynomial(Polynomial::zero()),
        constraints.to_vec(),
        bounds.clone(),
    );
    Ok(match solve(&program, config)? {
        SolveOutcome::Optimal { witness, .. } => Some(witness),
        _ => None,
    })
}

/// Whether `value` is attained: the constraints plus `objective = value` are feasible.
pub fn membership(
    objective: &Objective,
    constraints: &[Constraint],
    bounds: &Bounds,
    value: &Rational,
    config: &SolverConfig,
) -> Result<bool, OptError> {
    match objective {
        Objective::Polynomial(p) => {
            let mut cs = constraints.to_vec();
            cs.push(Constraint::eq(p.clone(), Polynomial::constant(value.clone())));
            Ok(feasible(&cs, bounds, config)?.is_some())
        }
        Objective::Fractional(q) => {
            // f = v h with h bounded away from zero on one side.
            let tie = &q.numerator - &q.denominator.scale(value);
            for side in [Relation::Gt, Relation::Lt] {
                let mut cs = constraints.to_vec();
                cs.push(Constraint::eq(tie.clone(), Polynomial::zero()));
                cs.push(Constraint::new(q.denominator.clone(), side, Polynomial::zero()));
                if feasible(&cs, bounds, config)?.is_some() {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

#[cfg(test)]
mod tests;
