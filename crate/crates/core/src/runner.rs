//! Executes the queries of a model file and assembles a report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::conditionals::{self, Compiled, ConditionalStatement, Consistency, Kind};
use crate::deduction::{self, SetRecord, SetTerm};
use crate::expr::{Expr, Value};
use crate::lower::{self, ProbConstraint};
use crate::measures::{self, MeasureTable};
use crate::model::{table_entries, Domain, Expectation, Item, ModelError, ModelFile, Op, Query};
use crate::optimizer::{self, render, Bounds, Constraint, Direction, Objective, OracleSet, Program, SolutionSet, SolverConfig};
use crate::parallel::{self, Execution};
use crate::polynomial::Polynomial;
use crate::probnet::{Network, Parameter};
use crate::proplogic::{Formula, TruthTableClass};
use crate::rational::{format_decimal, format_rational, ratio, to_f64, Rational};

/// Largest continuous dimension the oracle check will grid.
pub const ORACLE_MAX_DIMENSION: usize = 4;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub epsilon: Rational,
    pub oracle_check: bool,
    pub grid: usize,
    pub dump_programs: bool,
    pub timing: bool,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            epsilon: ratio(1, 1000),
            oracle_check: false,
            grid: 200,
            dump_programs: false,
            timing: false,
            execution: Execution::default(),
        }
    }
}

impl RunOptions {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { epsilon: self.epsilon.clone(), execution: self.execution, ..SolverConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fact {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpectationResult {
    pub key: String,
    pub op: &'static str,
    pub expected: String,
    pub actual: Option<String>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub set: String,
    pub dimension: usize,
    pub solver: Option<(f64, f64)>,
    pub grid: Option<(f64, f64)>,
    pub delta: Option<f64>,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub index: usize,
    pub line: usize,
    pub kind: &'static str,
    pub query: String,
    pub facts: Vec<Fact>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub programs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleCheck>,
    pub expectations: Vec<ExpectationResult>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl QueryRecord {
    pub fn fact(&self, key: &str) -> Option<&str> {
        self.facts.iter().find(|f| f.key == key).map(|f| f.value.as_str())
    }

    pub fn mismatches(&self) -> usize {
        self.expectations.iter().filter(|e| !e.ok).count()
    }

    pub fn oracle_failures(&self) -> usize {
        self.oracle.iter().filter(|o| !o.ok).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub queries: usize,
    pub errors: usize,
    pub mismatches: usize,
    pub oracle_checks: usize,
    pub oracle_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub model: Option<String>,
    pub epsilon: String,
    pub queries: Vec<QueryRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.summary.errors == 0 && self.summary.mismatches == 0 && self.summary.oracle_failures == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.ok() {
            0
        } else {
            1
        }
    }

    pub fn query(&self, index: usize) -> Option<&QueryRecord> {
        self.queries.get(index)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.model {
            out.push_str(&format!("model {m}\n"));
        }
        for q in &self.queries {
            out.push_str(&format!("[{}] line {}: {}\n", q.index + 1, q.line, q.query));
            for f in &q.facts {
                out.push_str(&format!("  {} = {}\n", f.key, f.value));
            }
            for p in &q.programs {
                out.push_str(&format!("  program: {p}\n"));
            }
            for o in &q.oracle {
                let r = |x: &Option<(f64, f64)>| match x {
                    Some((a, b)) => format!("[{a:.6}, {b:.6}]"),
                    None => "empty".to_string(),
                };
                let delta = o.delta.map(|d| format!("{d:.2e}")).unwrap_or_else(|| "-".into());
                out.push_str(&format!(
                    "  oracle {}: solver {} grid {} delta {} tol {:.2e} {}\n",
                    o.set,
                    r(&o.solver),
                    r(&o.grid),
                    delta,
                    o.tolerance,
                    if o.ok { "ok" } else { "FAIL" }
                ));
            }
            if let Some(e) = &q.error {
                out.push_str(&format!("  error: {e}\n"));
            }
            for e in &q.expectations {
                let status = if e.ok { "ok".to_string() } else { format!("MISMATCH (got {})", e.actual.as_deref().unwrap_or("nothing")) };
                out.push_str(&format!("  expect {} {} {}: {status}\n", e.key, e.op, e.expected));
            }
            if let Some(ms) = q.elapsed_ms {
                out.push_str(&format!("  time = {ms:.3} ms\n"));
            }
        }
        let s = &self.summary;
        out.push_str(&format!(
            "summary: {} queries, {} errors, {} mismatches, {} oracle checks, {} oracle failures\n",
            s.queries, s.errors, s.mismatches, s.oracle_checks, s.oracle_failures
        ));
        out
    }
}

/// A model ready to answer queries: network, global premises and tables.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: ModelFile,
    pub network: Network,
    pub asserts: Vec<ProbConstraint>,
    pub conditionals: BTreeMap<String, ConditionalStatement>,
    pub measures: BTreeMap<String, MeasureTable>,
}

fn at(line: usize) -> impl Fn(String) -> ModelError {
    move |message| ModelError { line, message }
}

/// Builds the network and embeds every formula the queries mention, so
/// that query evaluation never changes the network.
pub fn load(model: ModelFile) -> Result<Loaded, ModelError> {
    let mut net = Network::new();
    let mut asserts = Vec::new();
    let mut conds = BTreeMap::new();
    let mut tables = BTreeMap::new();
    let mut inline: Vec<(usize, Formula)> = Vec::new();
    for (item, &line) in model.items.iter().zip(&model.lines) {
        let e = at(line);
        match item {
            Item::Model(_) => {}
            Item::Var(v) => net.add_variable(v).map_err(|x| e(x.to_string()))?,
            Item::Param { name, domain } => {
                let (lower, upper, integer) = match domain {
                    Domain::Interval(a, b) => (a.clone(), b.clone(), false),
                    Domain::Integers(a, b) => (a.clone(), b.clone(), true),
                };
                net.add_parameter(Parameter { name: name.clone(), lower, upper, integer }).map_err(|x| e(x.to_string()))?
            }
            Item::Table { target, given, rows } => {
                net.add_table(target, given, table_entries(rows)).map_err(|x| e(x.to_string()))?
            }
            Item::Joint { vars, cells } => {
                net.add_joint(vars, cells.iter().cloned().collect()).map_err(|x| e(x.to_string()))?
            }
            Item::Embed { name, formula } => net.embed(name, formula).map_err(|x| e(x.to_string()))?,
            Item::Assert(c) => {
                inline.extend(c.formulas().into_iter().map(|f| (line, f)));
                asserts.push(c.clone());
            }
            Item::Cond { id, statement } => {
                if !statement.kind.is_propositional() {
                    inline.extend(statement.inline_formulas().into_iter().map(|f| (line, f)));
                }
                conds.insert(id.clone(), statement.clone());
            }
            Item::Measures { name, table } => {
                tables.insert(name.clone(), table.clone());
            }
            Item::Query { query, .. } => inline.extend(query.inline_formulas().into_iter().map(|f| (line, f))),
        }
    }
    for (line, f) in inline {
        net.ensure_embedded(&f).map_err(|x| at(line)(x.to_string()))?;
    }
    let first = model.lines.first().copied().unwrap_or(1);
    // A model with no tables at all is purely propositional; probabilistic
    // queries against it fail individually.
    let has_tables = model.items.iter().any(|i| matches!(i, Item::Table { .. } | Item::Joint { .. }));
    if has_tables || !asserts.is_empty() {
        net.validate().map_err(|x| at(first)(x.to_string()))?;
    }
    for (c, &line) in model.items.iter().zip(&model.lines) {
        let e = |x: lower::LowerError| at(line)(x.to_string());
        match c {
            Item::Assert(a) => {
                lower::lower_constraint(&net, a).map_err(e)?;
            }
            Item::Query { query, .. } if has_tables => {
                let (expr, given) = match query {
                    Query::Value(x) => (Some(x), &[][..]),
                    Query::Set { objective, given } => (Some(objective), &given[..]),
                    Query::Status { given, .. } | Query::Consistent { given, .. } | Query::BStatus { given, .. } => {
                        (None, &given[..])
                    }
                    _ => (None, &[][..]),
                };
                if let Some(x) = expr {
                    lower::lower_expr(&net, x).map_err(e)?;
                }
                lower::lower_constraints(&net, given).map_err(e)?;
            }
            _ => {}
        }
    }
    Ok(Loaded { model, network: net, asserts, conditionals: conds, measures: tables })
}

pub fn load_str(src: &str) -> Result<Loaded, ModelError> {
    load(ModelFile::parse(src)?)
}

/// A solved set kept for program dumps and oracle checks.
struct Solved {
    name: String,
    objective: Polynomial,
    constraints: Vec<Constraint>,
    bounds: Bounds,
    solution: SolutionSet,
}

impl Solved {
    fn from_record(r: &SetRecord) -> Solved {
        Solved {
            name: r.name.clone(),
            objective: r.program.0.clone(),
            constraints: r.program.1.clone(),
            bounds: r.program.2.clone(),
            solution: r.solution.clone(),
        }
    }
}

#[derive(Default)]
struct Outcome {
    facts: Vec<Fact>,
    solved: Vec<Solved>,
    programs: Vec<String>,
}

impl Outcome {
    fn fact(&mut self, key: &str, value: impl Into<String>) {
        self.facts.push(Fact { key: key.to_string(), value: value.into() });
    }

    fn set_facts(&mut self, key: &str, s: &SolutionSet) {
        self.fact(key, s.to_string());
        if key == "set" {
            if let Some((a, b)) = s.endpoints() {
                self.fact("alpha", format_rational(a));
                self.fact("beta", format_rational(b));
            }
        }
    }

    fn records(&mut self, rs: &[SetRecord]) {
        for r in rs {
            self.fact(&r.name, r.set.clone());
            self.solved.push(Solved::from_record(r));
        }
    }
}

struct Ctx<'a> {
    loaded: &'a Loaded,
    cfg: SolverConfig,
    dump: bool,
}

fn join_or(items: &[String], empty: &str) -> String {
    if items.is_empty() {
        empty.to_string()
    } else {
        items.join(", ")
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl Ctx<'_> {
    fn net(&self) -> &Network {
        &self.loaded.network
    }

    fn cond(&self, id: &str) -> Result<&ConditionalStatement, String> {
        self.loaded.conditionals.get(id).ok_or_else(|| format!("conditional `{id}` is not declared"))
    }

    /// Global assertions followed by the query's own premises.
    fn gamma(&self, given: &[ProbConstraint]) -> Result<Vec<Constraint>, String> {
        let mut all = self.loaded.asserts.clone();
        all.extend_from_slice(given);
        lower::lower_constraints(self.net(), &all).map_err(|e| e.to_string())
    }

    fn table(&self, name: &Option<String>) -> Result<&MeasureTable, String> {
        match name {
            Some(n) => self.loaded.measures.get(n).ok_or_else(|| format!("measure table `{n}` is not declared")),
            None if self.loaded.measures.len() == 1 => Ok(self.loaded.measures.values().next().unwrap()),
            None => Err("name the measure table with `in <table>`".into()),
        }
    }

    fn run(&self, q: &Query) -> Result<Outcome, String> {
        let mut out = Outcome::default();
        let cfg = &self.cfg;
        let net = self.net();
        match q {
            Query::Value(e) => {
                out.fact("value", render_value(&lower::lower_expr(net, e).map_err(|x| x.to_string())?));
            }
            Query::Set { objective, given } => self.set_query(objective, given, &mut out)?,
            Query::Status { cond, given } => {
                let c = self.cond(cond)?;
                let gamma = self.gamma(given)?;
                let v = match c.kind {
                    Kind::BooleanFeasibility if !gamma.is_empty() => {
                        let mut n = net.clone();
                        let ant = c.antecedent_formula();
                        deduction::boolean_status_probabilistic(&mut n, &gamma, &ant, &c.sensed_consequent(), cfg)
                    }
                    Kind::BooleanFeasibility => deduction::boolean_conditional_status(c, cfg),
                    Kind::TruthFunctional => {
                        let f = Formula::implies(c.antecedent_formula(), c.sensed_consequent());
                        deduction::boolean_deduce(&[], &f, cfg)
                    }
                    _ => deduction::conditional_status(net, &gamma, c, cfg),
                }
                .map_err(|e| e.to_string())?;
                out.fact("status", v.status.to_string());
                out.records(&v.sets);
            }
            Query::Consistent { conds, given } => {
                let cs = conds.iter().map(|id| self.cond(id)).collect::<Result<Vec<_>, _>>()?;
                let gamma = self.gamma(given)?;
                let r = conditionals::consistent(&cs, net, &gamma, cfg).map_err(|e| e.to_string())?;
                out.fact("consistent", yes_no(r.is_consistent()));
                if let Consistency::Consistent(Some(w)) = r {
                    let parts: Vec<String> = w.iter().map(|(k, v)| format!("{k}={}", format_rational(v))).collect();
                    out.fact("witness", join_or(&parts, "none"));
                }
            }
            Query::Deduce { premises, conclusion } => {
                let v = deduction::boolean_deduce(premises, conclusion, cfg).map_err(|e| e.to_string())?;
                out.fact("status", v.status.to_string());
                out.records(&v.sets);
                out.fact("set", v.sets[0].set.clone());
            }
            Query::BStatus { antecedent, consequent, given } => {
                let gamma = self.gamma(given)?;
                let mut n = net.clone();
                let v = deduction::boolean_status_probabilistic(&mut n, &gamma, antecedent, consequent, cfg)
                    .map_err(|e| e.to_string())?;
                out.fact("status", v.status.to_string());
                out.records(&v.sets);
            }
            Query::Family { term, over } => {
                let atoms = (!over.is_empty()).then_some(over.as_slice());
                let v = deduction::family_status(term, atoms, cfg.execution).map_err(|e| e.to_string())?;
                out.fact("status", v.status.to_string());
                out.fact("atoms", v.atoms.join(", "));
                out.fact("sets", v.sets.to_string());
                out.fact("premise_sets", v.premise_sets.to_string());
                out.fact("affirming_sets", v.affirming_sets.to_string());
                out.fact("counterexamples", v.counterexample_count.to_string());
                out.fact("samples", sample_list(&v.counterexamples));
            }
            Query::Valuations { cond, over } => {
                let c = self.cond(cond)?;
                let atoms = (!over.is_empty()).then_some(over.as_slice());
                let v = deduction::valuation_analysis(c, atoms).map_err(|e| e.to_string())?;
                out.fact("atoms", v.atoms.join(", "));
                out.fact("count", v.count.to_string());
                let groups: Vec<String> = v.mandatory_any.iter().map(|g| format!("any of {{{}}}", g.join(", "))).collect();
                out.fact("mandatory", groups.join("; "));
                out.fact("forbidden", join_or(&v.forbidden, "none"));
                out.fact("optional", join_or(&v.optional, "none"));
            }
            Query::Counterexamples { premise, conclusion, over } => {
                let p = self.cond(premise)?;
                let c = self.cond(conclusion)?;
                let atoms: Vec<String> = if over.is_empty() {
                    let mut a: Vec<String> = [p, c]
                        .iter()
                        .flat_map(|s| s.antecedent_formula().atoms().into_iter().chain(s.consequent_formula().atoms()))
                        .collect();
                    a.sort();
                    a.dedup();
                    a
                } else {
                    over.clone()
                };
                let tp = SetTerm::from_conditional(p).map_err(|e| e.to_string())?;
                let tc = SetTerm::from_conditional(c).map_err(|e| e.to_string())?;
                let r = deduction::term_counterexamples(&tp, &tc, &atoms, cfg.execution).map_err(|e| e.to_string())?;
                out.fact("atoms", atoms.join(", "));
                out.fact("count", r.count.to_string());
                out.fact("samples", sample_list(&r.samples));
            }
            Query::Factuality { cond, fact } => {
                let c = self.cond(cond)?;
                let classes: Vec<String> = conditionals::classify_factuality(c, fact).iter().map(|f| f.to_string()).collect();
                out.fact("factuality", classes.join(", "));
            }
            Query::Compile { cond } => {
                let c = self.cond(cond)?;
                match conditionals::compile(c, net).map_err(|e| e.to_string())? {
                    Compiled::System { constraints, .. } => {
                        let cs: Vec<String> = constraints.iter().map(|c| c.to_string()).collect();
                        out.fact("system", cs.join(" ; "));
                    }
                    Compiled::SetEquation(eq) => {
                        out.fact("objective", eq.objective.to_string());
                        let cs: Vec<String> = eq.given.iter().map(|c| c.to_string()).collect();
                        out.fact("given", cs.join(" ; "));
                        out.fact("value", format_rational(&eq.value));
                    }
                }
            }
            Query::Measure { event, given, measure, table } => {
                let t = self.table(table)?;
                let r = measures::measure_probability(t, event, given.as_ref(), measure).map_err(|e| e.to_string())?;
                match r.value() {
                    Some(v) => {
                        out.fact("value", format_rational(&v));
                        out.fact("raw", r.raw());
                        out.fact("decimal", format_decimal(&v, 3));
                    }
                    None => {
                        out.fact("value", "indefinite");
                        out.fact("raw", r.raw());
                    }
                }
            }
            Query::MeasureCond { antecedent, consequent, k, measure, table } => {
                let t = self.table(table)?;
                let holds =
                    measures::conditional_by_measure(t, antecedent, consequent, k, measure).map_err(|e| e.to_string())?;
                out.fact("holds", yes_no(holds));
            }
            Query::Classify(f) => {
                let class = match f.classify() {
                    TruthTableClass::Tautology => "tautology",
                    TruthTableClass::Contingent => "contingent",
                    TruthTableClass::Contradiction => "contradiction",
                };
                out.fact("class", class);
                let atoms: Vec<String> = f.atoms().into_iter().collect();
                let rows: Vec<String> = f
                    .truth_table()
                    .into_iter()
                    .filter(|(_, t)| !t)
                    .map(|(v, _)| atoms.iter().map(|a| if v[a] { 'T' } else { 'F' }).collect())
                    .collect();
                out.fact("atoms", atoms.join(", "));
                out.fact("falsifying", join_or(&rows, "none"));
            }
            Query::Translate(f) => out.fact("poly", f.translate().to_string()),
        }
        Ok(out)
    }

    fn set_query(&self, objective: &Expr, given: &[ProbConstraint], out: &mut Outcome) -> Result<(), String> {
        let net = self.net();
        let mut cs = net.gamma0();
        cs.extend(self.gamma(given)?);
        let bounds = net.bounds();
        match lower::lower_expr(net, objective).map_err(|e| e.to_string())? {
            Value::Poly(p) => {
                let s = optimizer::solution_set(&p, &cs, &bounds, &self.cfg).map_err(|e| e.to_string())?;
                out.set_facts("set", &s);
                out.solved.push(Solved { name: "set".into(), objective: p, constraints: cs, bounds, solution: s });
            }
            Value::Frac(n, d) => {
                let q = crate::polynomial::FractionalPolynomial { numerator: n, denominator: d };
                let s = optimizer::fractional_solution_set(&q, &cs, &bounds, &self.cfg).map_err(|e| e.to_string())?;
                out.fact("set", s.to_string());
                if let Some((a, b)) = &s.range {
                    out.fact("alpha", endpoint(a));
                    out.fact("beta", endpoint(b));
                }
                out.fact("denominator_may_vanish", yes_no(s.denominator_zero_feasible));
                if self.dump {
                    for dir in [Direction::Minimize, Direction::Maximize] {
                        let p = Program::new(dir, Objective::Fractional(q.clone()), cs.clone(), bounds.clone());
                        out.programs.push(render::program(&p));
                    }
                }
            }
        }
        Ok(())
    }
}

fn endpoint(e: &optimizer::Endpoint) -> String {
    match e {
        optimizer::Endpoint::Finite(r) => format_rational(r),
        optimizer::Endpoint::Unbounded => "unbounded".into(),
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Poly(p) => p.to_string(),
        Value::Frac(n, d) => format!("({n}) / ({d})"),
    }
}

fn sample_list(s: &[String]) -> String {
    if s.is_empty() {
        "none".into()
    } else {
        s.join(" ; ")
    }
}

fn continuous_width(s: &Solved) -> (usize, f64) {
    let mut vars = s.objective.variables();
    for c in &s.constraints {
        vars.extend(c.variables());
    }
    let mut dim = 0;
    let mut width: f64 = 0.0;
    for v in vars {
        if let Some(b) = s.bounds.get(&v) {
            if !b.integer {
                dim += 1;
                width = width.max(to_f64(&(&b.upper - &b.lower)));
            }
        }
    }
    (dim, width)
}

/// Solver extremes against the grid oracle, when the program is small enough.
fn oracle_check(s: &Solved, opts: &RunOptions) -> Result<Option<OracleCheck>, String> {
    let (dim, width) = continuous_width(s);
    if dim > ORACLE_MAX_DIMENSION {
        return Ok(None);
    }
    let tolerance = 2.0 * width / opts.grid as f64 + 1e-6;
    let obj = Objective::Polynomial(s.objective.clone());
    let grid = optimizer::grid_oracle_with(&obj, &s.constraints, &s.bounds, opts.grid, to_f64(&opts.epsilon), opts.execution)
        .map_err(|e| e.to_string())?;
    let solver = s.solution.endpoints().map(|(a, b)| (to_f64(a), to_f64(b)));
    let grid = match grid {
        OracleSet::Empty => None,
        g => g.range(),
    };
    let delta = match (solver, grid) {
        (Some((a, b)), Some((c, d))) => Some((a - c).abs().max((b - d).abs())),
        _ => None,
    };
    let ok = match (solver, grid) {
        (None, None) => true,
        (Some(_), Some(_)) => delta.unwrap() <= tolerance,
        _ => false,
    };
    Ok(Some(OracleCheck { set: s.name.clone(), dimension: dim, solver, grid, delta, tolerance, ok }))
}

fn programs_of(s: &Solved) -> Vec<String> {
    [Direction::Minimize, Direction::Maximize]
        .into_iter()
        .map(|d| {
            let p = Program::new(d, Objective::Polynomial(s.objective.clone()), s.constraints.clone(), s.bounds.clone());
            format!("{}: {}", s.name, render::program(&p))
        })
        .collect()
}

fn check(e: &Expectation, facts: &[Fact]) -> ExpectationResult {
    let actual = facts.iter().find(|f| f.key == e.key).map(|f| f.value.clone());
    ExpectationResult {
        key: e.key.clone(),
        op: match e.op {
            Op::Equals => "=",
            Op::Contains => "~",
        },
        expected: e.value.clone(),
        ok: e.check(actual.as_deref()),
        actual,
    }
}

/// Runs every query in declaration order. Queries may be evaluated
/// concurrently; the report order never changes.
pub fn run(loaded: &Loaded, opts: &RunOptions) -> Report {
    let ctx = Ctx { loaded, cfg: opts.solver_config(), dump: opts.dump_programs };
    let queries: Vec<(usize, &Query, &[Expectation])> = loaded.model.queries().collect();
    let records = parallel::map(opts.execution, &queries, |(line, q, expect)| {
        let start = Instant::now();
        let result = ctx.run(q).and_then(|mut out| {
            if opts.dump_programs {
                let extra: Vec<String> = out.solved.iter().flat_map(programs_of).collect();
                out.programs.splice(0..0, extra);
            }
            let mut checks = Vec::new();
            if opts.oracle_check {
                for s in &out.solved {
                    checks.extend(oracle_check(s, opts)?);
                }
            }
            Ok((out, checks))
        });
        let elapsed = start.elapsed().as_secs_f64() * 1000.0;
        let (facts, programs, oracle, error) = match result {
            Ok((out, checks)) => (out.facts, if opts.dump_programs { out.programs } else { Vec::new() }, checks, None),
            Err(e) => (Vec::new(), Vec::new(), Vec::new(), Some(e)),
        };
        let expectations = expect.iter().map(|e| check(e, &facts)).collect();
        QueryRecord {
            index: 0,
            line: *line,
            kind: q.kind(),
            query: q.to_string().trim_start_matches("query ").to_string(),
            facts,
            programs,
            oracle,
            expectations,
            error,
            elapsed_ms: opts.timing.then_some(elapsed),
        }
    });
    let mut queries: Vec<QueryRecord> = records;
    for (i, q) in queries.iter_mut().enumerate() {
        q.index = i;
    }
    let summary = Summary {
        queries: queries.len(),
        errors: queries.iter().filter(|q| q.error.is_some()).count(),
        mismatches: queries.iter().map(QueryRecord::mismatches).sum(),
        oracle_checks: queries.iter().map(|q| q.oracle.len()).sum(),
        oracle_failures: queries.iter().map(QueryRecord::oracle_failures).sum(),
    };
    Report {
        schema: 1,
        model: loaded.model.name().map(str::to_string),
        epsilon: format_rational(&opts.epsilon),
        queries,
        summary,
    }
}

/// Parses, loads and runs a model source.
pub fn run_str(src: &str, opts: &RunOptions) -> Result<Report, ModelError> {
    Ok(run(&load_str(src)?, opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUTTER: &str = "\
model butter
var A, B
param x, y, z in [0,1]
table P0(A) { T: x }
table P0(B|A) { T|T: y ; T|F: z }
assert P(A=T) = 0
assert P(B=T) = 0
cond S3 = su k=1 : A => B
cond S4 = su k=0 : A => B
query consistent S3, S4
expect consistent = no
query consistent S3
expect consistent = yes
query set P(A=F) given { P0(B=T|A=T) = 1 }
expect set = {1.000}
query P(B=T|A=T)
expect value = (x y) / (x)
query status nope_is_not_here
";

    #[test]
    fn butter_queries() {
        let src = BUTTER.replace("query status nope_is_not_here\n", "");
        let r = run_str(&src, &RunOptions { oracle_check: true, ..RunOptions::default() }).unwrap();
        assert!(r.ok(), "{}", r.to_text());
        assert_eq!(r.summary.queries, 4);
        assert!(r.summary.oracle_checks >= 1);
        assert_eq!(r.query(2).unwrap().fact("alpha"), Some("1"));
    }

    #[test]
    fn load_errors_and_query_errors() {
        assert_eq!(load_str(BUTTER).unwrap_err().line, 18);
        let head = "var A, B\nparam x in [0,1]\ntable P0(A) { T: x }\ntable P0(B) { T: 1/2 }\n";
        let unknown = load_str("var A\nparam x in [0,1]\ntable P0(A) { T: x }\nquery P(C=T)\n").unwrap_err();
        assert_eq!(unknown.line, 4);
        let r = run_str(&format!("{head}query family \"bf(A => B)\" over A\n"), &RunOptions::default()).unwrap();
        assert_eq!(r.summary.errors, 1);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn text_and_json_agree() {
        let src = BUTTER.replace("query status nope_is_not_here\n", "");
        let r = run_str(&src, &RunOptions::default()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["schema"], 1);
        let text = r.to_text();
        for q in json["queries"].as_array().unwrap() {
            for f in q["facts"].as_array().unwrap() {
                let line = format!("  {} = {}", f["key"].as_str().unwrap(), f["value"].as_str().unwrap());
                assert!(text.contains(&line), "{line}");
            }
        }
    }

    #[test]
    fn sequential_matches_parallel() {
        let src = BUTTER.replace("query status nope_is_not_here\n", "");
        let a = run_str(&src, &RunOptions { execution: Execution::Sequential, ..RunOptions::default() }).unwrap();
        let b = run_str(&src, &RunOptions { execution: Execution::Parallel, ..RunOptions::default() }).unwrap();
        assert_eq!(a, b);
    }
}
