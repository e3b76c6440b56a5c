use super::*;
use crate::polynomial::FractionalPolynomial;
use crate::rational::{int, ratio, to_f64};

fn p(s: &str) -> Polynomial {
    Polynomial::parse(s).unwrap()
}

fn unit_box(vars: &[&str]) -> Bounds {
    vars.iter().map(|v| (v.to_string(), VarBounds::unit())).collect()
}

fn quotient(n: &str, d: &str) -> Objective {
    Objective::Fractional(FractionalPolynomial::new(p(n), p(d)).unwrap())
}

fn run(direction: Direction, objective: Objective, constraints: Vec<Constraint>, bounds: Bounds) -> SolveOutcome {
    solve(&Program::new(direction, objective, constraints, bounds), &SolverConfig::default()).unwrap()
}

#[test]
fn trivial_linear() {
    let out = run(Direction::Minimize, p("x").into(), vec![], unit_box(&["x"]));
    assert_eq!(out.value(), Some(&int(0)));
    let out = run(Direction::Maximize, p("2x - x y").into(), vec![], unit_box(&["x", "y"]));
    assert_eq!(out.value(), Some(&int(2)));
}

#[test]
fn worked_example_is_singleton_one() {
    let cs = vec![Constraint::eq(p("x"), p("1")), Constraint::eq(p("x y"), p("x"))];
    let set = solution_set(&p("z + x y - x z"), &cs, &unit_box(&["x", "y", "z"]), &SolverConfig::default()).unwrap();
    assert!(set.is_singleton(&int(1), &pow10_neg(6)), "{set}");
    assert_eq!(set.to_string(), "{1.000}");
}

#[test]
fn binary_modus_ponens() {
    let mut b = Bounds::new();
    b.insert("x".into(), VarBounds::binary());
    b.insert("y".into(), VarBounds::binary());
    let cs = vec![Constraint::eq(p("x y"), p("1"))];
    let out = run(Direction::Maximize, p("y").into(), cs.clone(), b.clone());
    assert_eq!(out.value(), Some(&int(1)));
    let out = run(Direction::Minimize, p("y").into(), cs, b);
    assert_eq!(out.value(), Some(&int(1)));
}

#[test]
fn infeasible_reported() {
    let cs = vec![Constraint::eq(p("x"), p("1")), Constraint::eq(p("x y"), p("2"))];
    let out = run(Direction::Minimize, p("y").into(), cs.clone(), unit_box(&["x", "y"]));
    assert_eq!(out, SolveOutcome::Infeasible);
    let set = solution_set(&p("y"), &cs, &unit_box(&["x", "y"]), &SolverConfig::default()).unwrap();
    assert!(set.is_empty());
}

#[test]
fn nonconvex_bilinear_global() {
    // Minimum of x y - x - y on the unit square is -1 at (0,1) and (1,0); max 0.
    let set = solution_set(&p("x y - x - y"), &[], &unit_box(&["x", "y"]), &SolverConfig::default()).unwrap();
    assert_eq!(set.endpoints(), Some((&int(-1), &int(0))));
    // (x - 1/3)^2 has interior minimum.
    let out = run(Direction::Minimize, p("x^2 - 2/3 x").into(), vec![], unit_box(&["x"]));
    let v = out.value().unwrap();
    assert!((v - ratio(-1, 9)).abs() <= pow10_neg(6), "{v}");
}

#[test]
fn strict_constraints_use_epsilon() {
    let cs = vec![Constraint::gt(p("x"), p("0"))];
    let out = run(Direction::Minimize, p("x").into(), cs, unit_box(&["x"]));
    assert_eq!(out.value(), Some(&ratio(1, 1000)));
}

#[test]
fn quotient_suite() {
    let b = unit_box(&["x", "y"]);
    let x0 = vec![Constraint::eq(p("x"), p("0"))];
    assert_eq!(run(Direction::Minimize, quotient("y", "x"), vec![], b.clone()).value(), Some(&int(0)));
    assert_eq!(run(Direction::Maximize, quotient("y", "x"), vec![], b.clone()), SolveOutcome::Unbounded);
    assert_eq!(run(Direction::Minimize, quotient("y", "x"), x0.clone(), b.clone()), SolveOutcome::Infeasible);
    assert_eq!(run(Direction::Minimize, quotient("x y", "x"), vec![], b.clone()).value(), Some(&int(0)));
    assert_eq!(run(Direction::Maximize, quotient("x y", "x"), vec![], b.clone()).value(), Some(&int(1)));
    assert_eq!(run(Direction::Minimize, quotient("x y", "x"), x0, b), SolveOutcome::Infeasible);
}

#[test]
fn quotient_with_negative_denominator() {
    let mut b = Bounds::new();
    b.insert("x".into(), VarBounds::new(int(-2), int(-1)));
    b.insert("y".into(), VarBounds::unit());
    let set = fractional_solution_set(
        &FractionalPolynomial::new(p("y"), p("x")).unwrap(),
        &[],
        &b,
        &SolverConfig::default(),
    )
    .unwrap();
    let s = set.as_solution_set().unwrap();
    assert_eq!(s.endpoints(), Some((&int(-1), &int(0))));
    assert!(!set.denominator_zero_feasible);
}

#[test]
fn quotient_disambiguation() {
    let b = unit_box(&["x", "y"]);
    let q = FractionalPolynomial::new(p("x y"), p("x")).unwrap();
    let cfg = SolverConfig::default();
    let forced = fractional_solution_set(&q, &[Constraint::eq(p("x"), p("0"))], &b, &cfg).unwrap();
    assert!(forced.range.is_none());
    assert!(forced.constraints_feasible);
    assert_eq!(forced.to_string(), "empty (denominator forced to zero)");
    let open = fractional_solution_set(&q, &[Constraint::eq(p("y"), p("1"))], &b, &cfg).unwrap();
    assert_eq!(open.to_string(), "{1.000} or empty (denominator may vanish)");
    let bad = fractional_solution_set(&q, &[Constraint::eq(p("y"), p("2"))], &b, &cfg).unwrap();
    assert_eq!(bad.to_string(), "empty (constraints infeasible)");
}

#[test]
fn membership_checks() {
    let b = unit_box(&["x", "y"]);
    let cfg = SolverConfig::default();
    let obj: Objective = p("x y").into();
    assert!(membership(&obj, &[], &b, &ratio(1, 2), &cfg).unwrap());
    assert!(!membership(&obj, &[Constraint::eq(p("x"), p("0"))], &b, &ratio(1, 2), &cfg).unwrap());
    let q = quotient("x y", "x");
    assert!(membership(&q, &[], &b, &int(0), &cfg).unwrap());
    assert!(!membership(&q, &[Constraint::eq(p("x"), p("0"))], &b, &int(0), &cfg).unwrap());
}

#[test]
fn witnesses_are_exact_rationals() {
    let cs = vec![Constraint::eq(p("x y"), p("1/3")), Constraint::ge(p("x"), p("1/2"))];
    let prog = Program::new(Direction::Minimize, p("y").into(), cs, unit_box(&["x", "y"]));
    let cfg = SolverConfig::default();
    match solve(&prog, &cfg).unwrap() {
        SolveOutcome::Optimal { value, witness } => {
            assert!((value - ratio(1, 3)).abs() <= pow10_neg(6));
            assert!(witness_ok(&prog, &witness, &cfg));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_bounds_rejected() {
    let prog = Program::new(Direction::Minimize, p("x").into(), vec![], Bounds::new());
    assert_eq!(solve(&prog, &SolverConfig::default()), Err(OptError::MissingBounds("x".into())));
}

#[test]
fn sequential_and_parallel_agree() {
    let cs = vec![Constraint::eq(p("x"), p("1")), Constraint::eq(p("x y"), p("x"))];
    let b = unit_box(&["x", "y", "z"]);
    let mut seq = SolverConfig::default();
    seq.execution = Execution::Sequential;
    let mut par = SolverConfig::default();
    par.execution = Execution::Parallel;
    let obj = p("z + x y - x z");
    assert_eq!(solution_set(&obj, &cs, &b, &seq).unwrap(), solution_set(&obj, &cs, &b, &par).unwrap());
}

#[test]
fn oracle_matches_solver_on_small_programs() {
    let b = unit_box(&["x", "y", "z"]);
    let cs = vec![Constraint::ge(p("x + y"), p("1/2")), Constraint::le(p("x z"), p("1/4"))];
    let obj = p("x y - z + x z");
    let set = solution_set(&obj, &cs, &b, &SolverConfig::default()).unwrap();
    let (lo, hi) = set.endpoints().unwrap();
    let (olo, ohi) = grid_oracle(&Objective::Polynomial(obj), &cs, &b, 40, 1e-3).unwrap().range().unwrap();
    let tol = 2.0 / 40.0 + 1e-6;
    assert!((to_f64(lo) - olo).abs() <= tol, "{lo} vs {olo}");
    assert!((to_f64(hi) - ohi).abs() <= tol, "{hi} vs {ohi}");
}

#[test]
fn oracle_dimension_guard_and_empty() {
    let names = ["a", "b", "c", "d", "e", "f", "g"];
    let obj = p("a + b + c + d + e + f + g");
    let err = grid_oracle(&Objective::Polynomial(obj), &[], &unit_box(&names), 4, 1e-3).unwrap_err();
    assert_eq!(err, OptError::OracleDimension { max: 6, got: 7 });
    let cs = vec![Constraint::ge(p("x"), p("2"))];
    let r = grid_oracle(&Objective::Polynomial(p("x")), &cs, &unit_box(&["x"]), 10, 1e-3).unwrap();
    assert_eq!(r, OracleSet::Empty);
}

#[test]
fn render_program() {
    let prog = Program::new(
        Direction::Maximize,
        p("z + x y - x z").into(),
        vec![Constraint::eq(p("x"), p("1"))],
        unit_box(&["x", "y", "z"]),
    );
    assert_eq!(
        render::program(&prog),
        "Maximize z + x y - x z subject to x = 1, 0 <= x <= 1, 0 <= y <= 1 and 0 <= z <= 1"
    );
}
