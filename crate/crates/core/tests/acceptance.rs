//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so the lines print in order. A failing
//! sub-check listed in `KNOWN_CONFLICTS` is reported as FAIL but does not fail
//! the target; any other failure does, and so does a listed conflict that
//! starts passing.

use std::collections::BTreeMap;
use std::process::ExitCode;

use polylogic::conditionals::{self, check_opposites, compile, system_holds_at, ConditionalStatement, Kind, Sense, Term};
use polylogic::corpus;
use polylogic::deduction::{self, family, ModalStatus, SetTerm};
use polylogic::optimizer::{self, Bounds, Constraint, Direction, Objective, Program, SolutionSet, SolveOutcome, SolverConfig, VarBounds, Witness};
use polylogic::polynomial::{FractionalPolynomial, Polynomial};
use polylogic::proplogic::{self, Formula};
use polylogic::rational::{int, parse_rational, ratio, to_f64, Rational};
use polylogic::runner::{self, Report, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Value tolerance for solved extremes.
const TOL: f64 = 1e-6;
/// Tolerance for endpoints that sit exactly on an epsilon margin.
const EPS_TOL: f64 = 1e-9;

/// (criterion, sub-check) pairs that are expected to fail, with the reason.
const KNOWN_CONFLICTS: &[(u32, &str, &str)] = &[(
    7,
    "raven phi5 endpoints 0/1",
    "P0(B=T|A=T)=1 with P(B=T)=0 forces x=z=0, so P(A=T)-P(A=T,B=T) is identically 0",
)];

const BASIC: &str = "model basic
var A, B
param x, y, z in [0,1]
table P0(A) { T: x ; F: 1-x }
table P0(B|A) { T|T: y ; F|T: 1-y ; T|F: z ; F|F: 1-z }
query P(A=T, B=T)
query P(A=T, B=F)
query P(A=F, B=T)
query P(A=F, B=F)
query P(B=T)
query P(B=T | A=T)
query P([A -> B]=T)
query P([A & B]=T)
";

struct Checks {
    failures: Vec<(String, String)>,
}

impl Checks {
    fn new() -> Self {
        Checks { failures: Vec::new() }
    }

    fn check(&mut self, label: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push((label.to_string(), detail()));
        }
    }

    fn eq(&mut self, label: &str, got: Option<&str>, want: &str) {
        self.check(label, got == Some(want), || format!("got {:?}, want {want:?}", got));
    }
}

fn p(s: &str) -> Polynomial {
    Polynomial::parse(s).unwrap()
}

fn unit_box(vars: &[&str]) -> Bounds {
    vars.iter().map(|v| (v.to_string(), VarBounds::unit())).collect()
}

fn corpus_report(name: &str) -> Report {
    let opts = RunOptions { oracle_check: true, ..RunOptions::default() };
    corpus::run(name, &opts).expect("bundled model").expect("bundled model loads")
}

fn fact<'a>(r: &'a Report, index: usize, key: &str) -> Option<&'a str> {
    r.query(index).and_then(|q| q.fact(key))
}

fn rational_fact(r: &Report, index: usize, key: &str) -> Option<Rational> {
    fact(r, index, key).and_then(parse_rational)
}

fn near(a: &Rational, b: f64, tol: f64) -> bool {
    (to_f64(a) - b).abs() <= tol
}

fn endpoints_near(s: &SolutionSet, lo: f64, hi: f64, tol: f64) -> bool {
    matches!(s.endpoints(), Some((a, b)) if near(a, lo, tol) && near(b, hi, tol))
}

fn joint_and_inference(c: &mut Checks) {
    let r = runner::run_str(BASIC, &RunOptions::default()).unwrap();
    for (i, want) in ["x y", "x - x y", "z - x z", "1 - x - z + x z"].iter().enumerate() {
        c.eq(&format!("joint cell {i}"), fact(&r, i, "value"), want);
    }
    c.eq("P(B=T)", fact(&r, 4, "value"), "z + x y - x z");
    c.eq("P(B=T|A=T) unsimplified", fact(&r, 5, "value"), "(x y) / (x)");
    c.eq("P([A->B]=T)", fact(&r, 6, "value"), "1 - x + x y");
    c.eq("P([A&B]=T)", fact(&r, 7, "value"), "x y");
}

fn boolean_translation(c: &mut Checks) {
    c.check("X & (X -> Y)", Formula::parse("X & (X -> Y)").unwrap().translate() == p("x y"), || {
        Formula::parse("X & (X -> Y)").unwrap().translate().to_string()
    });
    let atoms = vec!["X".to_string(), "Y".to_string()];
    let pool: Vec<Formula> = ["X", "Y", "!X", "X & Y", "X | !Y", "X -> Y", "X <-> Y", "T", "F", "!(X & !Y)"]
        .iter()
        .map(|s| Formula::parse(s).unwrap())
        .collect();
    let one = Polynomial::one();
    let reduce = |q: Polynomial| q.idempotent_reduce_all();
    let mut bad = Vec::new();
    for a in &pool {
        let ta = a.translate();
        let unary = [
            (Formula::not(a.clone()), reduce(&one - &ta)),
            (a.clone(), ta.clone()),
        ];
        let mut cases: Vec<(Formula, Polynomial)> = unary.to_vec();
        for b in &pool {
            let tb = b.translate();
            let ab = &ta * &tb;
            cases.push((Formula::and(a.clone(), b.clone()), reduce(ab.clone())));
            cases.push((Formula::or(a.clone(), b.clone()), reduce(&(&ta + &tb) - &ab)));
            cases.push((Formula::implies(a.clone(), b.clone()), reduce(&(&one - &ta) + &ab)));
            cases.push((
                Formula::iff(a.clone(), b.clone()),
                reduce(&(&(&one - &ta) - &tb) + &ab.scale(&int(2))),
            ));
        }
        for (f, rule) in cases {
            let t = f.translate();
            if t != rule {
                bad.push(format!("{f}: {t} vs rule {rule}"));
            }
            for v in proplogic::valuations(&atoms) {
                let want = int(f.eval(&v).unwrap() as i64);
                if proplogic::evaluate_translation(&t, &v).unwrap() != want {
                    bad.push(format!("{f} at {v:?}"));
                }
            }
        }
    }
    for (s, want) in [("T", "1"), ("F", "0"), ("X", "x")] {
        let t = Formula::parse(s).unwrap().translate();
        if t != p(want) {
            bad.push(format!("{s} -> {t}"));
        }
    }
    c.check("table rules over two atoms", bad.is_empty(), || bad.join("; "));
    let ind = proplogic::indicator_expansion(&[int(1), int(0), int(1), int(1)], &atoms).unwrap();
    c.check("indicator (1,0,1,1)", ind == p("1 - x + x y"), || ind.to_string());
}

fn optimizer_numbers(c: &mut Checks) {
    let cfg = SolverConfig::default();
    let cs = vec![Constraint::eq(p("x"), p("1")), Constraint::eq(p("x y"), p("x"))];
    let set = optimizer::solution_set(&p("z + x y - x z"), &cs, &unit_box(&["x", "y", "z"]), &cfg).unwrap();
    c.check("butter 1.000/1.000", endpoints_near(&set, 1.0, 1.0, TOL), || set.to_string());
    let butter = corpus_report("butter");
    let (a, b) = (rational_fact(&butter, 3, "alpha"), rational_fact(&butter, 3, "beta"));
    c.check(
        "butter corpus deduction",
        matches!((&a, &b), (Some(a), Some(b)) if near(a, 1.0, TOL) && near(b, 1.0, TOL)),
        || format!("{a:?} {b:?}"),
    );

    let mp = deduction::boolean_deduce(
        &[Formula::parse("X").unwrap(), Formula::parse("X -> Y").unwrap()],
        &Formula::parse("Y").unwrap(),
        &cfg,
    )
    .unwrap();
    let s = &mp.sets[0].solution;
    c.check("modus ponens IP 1.000/1.000", endpoints_near(s, 1.0, 1.0, TOL), || s.to_string());

    let t = corpus_report("transitivity");
    c.eq("transitivity P([A->C]=F)", fact(&t, 0, "set"), "{0.000}");
    let (a, b) = (rational_fact(&t, 0, "alpha"), rational_fact(&t, 0, "beta"));
    c.check(
        "transitivity P([A->C]=F) endpoints",
        matches!((&a, &b), (Some(a), Some(b)) if near(a, 0.0, TOL) && near(b, 0.0, TOL)),
        || format!("{a:?} {b:?}"),
    );
    c.eq("transitivity P([A&C]=T)", fact(&t, 1, "set"), "[0.001, 1.000]");
    let (a, b) = (rational_fact(&t, 1, "alpha"), rational_fact(&t, 1, "beta"));
    c.check(
        "transitivity epsilon endpoint",
        matches!((&a, &b), (Some(a), Some(b)) if near(a, 0.001, EPS_TOL) && near(b, 1.0, TOL)),
        || format!("{a:?} {b:?}"),
    );
}

fn fractional_suite(c: &mut Checks) {
    let cfg = SolverConfig::default();
    let q = |n: &str, d: &str| Objective::Fractional(FractionalPolynomial::new(p(n), p(d)).unwrap());
    let b = unit_box(&["x", "y"]);
    let x0 = vec![Constraint::eq(p("x"), p("0"))];
    let cases: [(&str, Direction, Objective, Vec<Constraint>, &str); 6] = [
        ("min y/x", Direction::Minimize, q("y", "x"), vec![], "optimal 0"),
        ("max y/x", Direction::Maximize, q("y", "x"), vec![], "unbounded"),
        ("min y/x, x=0", Direction::Minimize, q("y", "x"), x0.clone(), "infeasible"),
        ("min xy/x", Direction::Minimize, q("x y", "x"), vec![], "optimal 0"),
        ("max xy/x", Direction::Maximize, q("x y", "x"), vec![], "optimal 1"),
        ("min xy/x, x=0", Direction::Minimize, q("x y", "x"), x0, "infeasible"),
    ];
    for (label, dir, obj, cs, want) in cases {
        let out = optimizer::solve(&Program::new(dir, obj, cs, b.clone()), &cfg).unwrap();
        let got = match &out {
            SolveOutcome::Optimal { value, .. } if near(value, 0.0, TOL) => "optimal 0".to_string(),
            SolveOutcome::Optimal { value, .. } if near(value, 1.0, TOL) => "optimal 1".to_string(),
            SolveOutcome::Optimal { value, .. } => format!("optimal {value}"),
            SolveOutcome::Unbounded => "unbounded".to_string(),
            SolveOutcome::Infeasible => "infeasible".to_string(),
        };
        c.check(label, got == want, || format!("got {got}, want {want}"));
    }
}

fn oracle_agreement(c: &mut Checks) {
    let mut checks = 0;
    for name in corpus::names() {
        let r = corpus_report(name);
        for q in &r.queries {
            for o in &q.oracle {
                checks += 1;
                c.check(&format!("{name} [{}] {}", q.index + 1, o.set), o.ok, || {
                    format!("solver {:?} grid {:?} delta {:?} tol {}", o.solver, o.grid, o.delta, o.tolerance)
                });
            }
        }
    }
    c.check("oracle exercised", checks >= 30, || format!("only {checks} programs checked"));
}

fn opposites_and_hierarchy(c: &mut Checks) {
    let net = runner::load_str(BASIC).unwrap().network;
    let cfg = SolverConfig::default();
    let a = [Term::pos("A")];
    let frac = |kind| ConditionalStatement::terms(kind, &a, Term::pos("B"), Sense::Fraction(int(1))).unwrap();
    let boolean = |kind| ConditionalStatement::terms(kind, &a, Term::pos("B"), Sense::Boolean(true)).unwrap();
    let cases = [
        ("Su", frac(Kind::Subjunctive), false, "x"),
        ("Ex", frac(Kind::Existential), false, "x"),
        ("Feas", frac(Kind::Feasibility), false, "x"),
        ("BF", boolean(Kind::BooleanFeasibility), false, "a"),
        ("Mat", frac(Kind::Material), true, "x"),
        ("TF", boolean(Kind::TruthFunctional), true, "a"),
    ];
    for (label, cond, want, var) in cases {
        match check_opposites(&cond, &cond.opposite(), &net, &cfg) {
            Ok(r) => {
                c.check(&format!("{label} opposites"), r.is_consistent() == want, || format!("consistent = {}", r.is_consistent()));
                if let conditionals::Consistency::Consistent(Some(w)) = &r {
                    c.check(&format!("{label} witness {var}=0"), w.get(var) == Some(&int(0)), || format!("{w:?}"));
                }
            }
            Err(e) => c.check(&format!("{label} opposites"), false, || e.to_string()),
        }
    }

    let sys = |kind| compile(&frac(kind), &net).unwrap().constraints().to_vec();
    let (ex, su, mat) = (sys(Kind::Existential), sys(Kind::Subjunctive), sys(Kind::Material));
    let grid = [int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = Vec::new();
    let (mut n_ex, mut n_su, mut n_mat) = (0, 0, 0);
    for _ in 0..10_000 {
        let point: Witness = ["x", "y", "z"]
            .iter()
            .map(|v| {
                let val = if rng.gen_bool(0.7) { grid[rng.gen_range(0..grid.len())].clone() } else { ratio(rng.gen_range(0..1000), 1000) };
                (v.to_string(), val)
            })
            .collect();
        let e = system_holds_at(&ex, &point).unwrap();
        let s = system_holds_at(&su, &point).unwrap();
        let m = system_holds_at(&mat, &point).unwrap();
        if (e && !s) || (s && !m) {
            violations.push(format!("{point:?}"));
        }
        n_ex += e as usize;
        n_su += s as usize;
        n_mat += m as usize;
    }
    c.check("Ex => Su => Mat on 10^4 samples", violations.is_empty(), || violations[..violations.len().min(3)].join("; "));
    c.check("hierarchy is strict on samples", n_ex > 0 && n_su > n_ex && n_mat > n_su, || format!("{n_ex} {n_su} {n_mat}"));
}

fn corpus_verdicts(c: &mut Checks) {
    let butter = corpus_report("butter");
    c.eq("butter opposing subjunctives", fact(&butter, 2, "consistent"), "no");
    c.eq("butter deduction {1}", fact(&butter, 3, "set"), "{1.000}");
    c.eq("butter z=0 derived", fact(&butter, 4, "set"), "{0.000}");

    let murder = corpus_report("murder");
    c.eq("murder I1-F actual set", fact(&murder, 6, "phi"), "{0.000}");

    let oswald = corpus_report("oswald3");
    c.eq("oswald I3-F set", fact(&oswald, 7, "phi"), "{0.000}");
    c.eq("oswald afactual variant", fact(&oswald, 8, "set"), "[0.000, 1.000]");

    let soft = corpus_report("soft");
    c.eq("soft phi1 endpoints 0/1", fact(&soft, 0, "set"), "[0.000, 1.000]");
    c.eq("soft phi2 endpoints 0/1", fact(&soft, 1, "set"), "[0.000, 1.000]");
    c.eq("soft phi3", fact(&soft, 2, "set"), "{0.000}");

    let raven = corpus_report("raven");
    c.eq("raven phi5 endpoints 0/1", fact(&raven, 0, "set"), "[0.000, 1.000]");
    c.eq("raven phi6", fact(&raven, 1, "set"), "{0.000}");

    let coins = corpus_report("coins");
    c.eq("coins dime by value", fact(&coins, 0, "value"), "10/41");
    c.eq("coins dime by mass", fact(&coins, 1, "raw"), "2268/15438");
    c.eq("coins dime by count", fact(&coins, 2, "value"), "1/4");
    c.eq("coins cu|smooth by value", fact(&coins, 3, "value"), "1/6");
    c.eq("coins cu|smooth by lincolns", fact(&coins, 4, "value"), "1");

    for name in corpus::names() {
        let r = corpus_report(name);
        c.check(&format!("{name} embedded expectations"), r.summary.mismatches == 0 && r.summary.errors == 0, || {
            format!("{} mismatches, {} errors", r.summary.mismatches, r.summary.errors)
        });
    }
}

fn fallacies(c: &mut Checks) {
    let f1 = corpus_report("f1");
    c.eq("F1 status", fact(&f1, 2, "status"), "impossible");
    c.eq("F1 phi", fact(&f1, 2, "phi"), "{0.000}");
    c.eq("F1 psi", fact(&f1, 2, "psi"), "{0.000}");
    c.eq("F1 upsilon route", fact(&f1, 3, "set"), "empty (denominator forced to zero)");
    c.eq("F1 family", fact(&f1, 1, "status"), "impossible");

    let f2 = corpus_report("f2");
    c.eq("F2 status", fact(&f2, 2, "status"), "possible");
    c.eq("F2 psi endpoints 0/1", fact(&f2, 2, "psi"), "[0.000, 1.000]");
    c.eq("F2 upsilon {1} or empty", fact(&f2, 3, "set"), "{1.000} or empty (denominator may vanish)");

    let f3 = corpus_report("f3");
    c.eq("F3 status", fact(&f3, 2, "status"), "possible");
    c.eq("F3 psi endpoints 0/1", fact(&f3, 2, "psi"), "[0.000, 1.000]");
    c.eq("F3 with P(B=T,C=T)=0", fact(&f3, 3, "status"), "impossible");

    let f5 = corpus_report("f5");
    c.eq("F5 family", fact(&f5, 1, "status"), "impossible");

    let f6 = corpus_report("f6");
    c.eq("F6 status", fact(&f6, 2, "status"), "impossible");
    c.eq("F6 phi", fact(&f6, 2, "phi"), "{0.000}");
    c.eq("F6 psi", fact(&f6, 2, "psi"), "{0.000}");

    let f7 = corpus_report("f7");
    c.check("F7 not necessary", fact(&f7, 1, "status") != Some("necessary"), || format!("{:?}", fact(&f7, 1, "status")));
    let atoms = vec!["A".to_string(), "B".to_string()];
    let outer = SetTerm::parse("bf(!bf(A => B) => A)").unwrap();
    let premise = SetTerm::parse("!bf(A => B)").unwrap();
    for (label, rows) in [("V1", vec!["FT", "FF"]), ("V2", vec!["TF", "FT", "FF"]), ("V3", vec!["TT", "TF", "FT", "FF"])] {
        let holds = family::holds_on(&outer, &atoms, &rows).unwrap();
        c.check(&format!("F7 fails on {label}"), !holds, || "outer conditional holds".into());
        let pv = family::values_on(&premise, &atoms, &rows).unwrap();
        c.check(&format!("F7 premise true on {label}"), pv == [true], || format!("{pv:?}"));
    }

    let f8 = corpus_report("f8");
    c.eq("F8 inner sets", fact(&f8, 1, "count"), "64");
    c.eq("F8 S sets", fact(&f8, 2, "count"), "48");
    c.eq("F8 T sets", fact(&f8, 3, "count"), "48");
    c.eq("F8 status", fact(&f8, 4, "status"), "possible");
    c.eq("F8 counterexamples", fact(&f8, 4, "counterexamples"), "16");
    c.check(
        "F8 sample {TTT, TFF, FTF}",
        fact(&f8, 4, "samples").is_some_and(|s| s.split(" ; ").any(|x| x == "{TTT, TFF, FTF}")),
        || format!("{:?}", fact(&f8, 4, "samples")),
    );

    let f9 = corpus_report("f9");
    c.eq("F9 premise sets", fact(&f9, 1, "count"), "6");
    c.eq("F9 conclusion sets", fact(&f9, 2, "count"), "4");
    c.eq("F9 counterexamples", fact(&f9, 3, "count"), "2");
    c.eq("F9 counterexample sets", fact(&f9, 3, "samples"), "{FF} ; {FT, FF}");
}

fn random_formula(rng: &mut ChaCha8Rng, atoms: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return Formula::atom(atoms[rng.gen_range(0..atoms.len())]);
    }
    let a = random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(a),
        1 => Formula::and(a, random_formula(rng, atoms, depth - 1)),
        2 => Formula::or(a, random_formula(rng, atoms, depth - 1)),
        3 => Formula::implies(a, random_formula(rng, atoms, depth - 1)),
        _ => Formula::iff(a, random_formula(rng, atoms, depth - 1)),
    }
}

fn satisfiable(premises: &[Formula]) -> bool {
    let atoms: Vec<String> = premises.iter().flat_map(|f| f.atoms()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    proplogic::valuations(&atoms).iter().any(|v| premises.iter().all(|f| f.eval(v).unwrap()))
}

fn paraconsistency(c: &mut Checks) {
    let cfg = SolverConfig::default();
    let universe = ["A", "B", "C"];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = 0;
    let mut bad = Vec::new();
    let mut statuses: BTreeMap<ModalStatus, usize> = BTreeMap::new();
    while seen < 300 {
        let n_atoms = rng.gen_range(1..=3);
        let atoms = &universe[..n_atoms];
        let mut premises: Vec<Formula> = (0..rng.gen_range(1..=3)).map(|_| random_formula(&mut rng, atoms, 3)).collect();
        // Force a contradiction on some cases, let the others arise naturally.
        if rng.gen_bool(0.5) {
            let f = random_formula(&mut rng, atoms, 2);
            premises.push(f.clone());
            premises.push(Formula::not(f));
        }
        if satisfiable(&premises) {
            continue;
        }
        seen += 1;
        let conclusion = random_formula(&mut rng, atoms, 3);
        let ip = deduction::boolean_deduce(&premises, &conclusion, &cfg).unwrap().status;
        let en = deduction::boolean_deduce_by_enumeration(&premises, &conclusion).unwrap();
        *statuses.entry(ip).or_default() += 1;
        if ip == ModalStatus::Necessary || ip != en {
            bad.push(format!("{premises:?} |- {conclusion}: {ip:?} vs {en:?}"));
        }
    }
    c.check("inconsistent premises never necessary", bad.is_empty(), || bad[..bad.len().min(3)].join("; "));
    c.check("all 300 cases impossible", statuses.get(&ModalStatus::Impossible) == Some(&300), || format!("{statuses:?}"));
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn(&mut Checks)); 9] = [
        (1, "joint and symbolic inference of the basic model", joint_and_inference),
        (2, "boolean translation", boolean_translation),
        (3, "optimizer reproduces worked numbers", optimizer_numbers),
        (4, "fractional objective suite", fractional_suite),
        (5, "grid oracle agreement on the corpus", oracle_agreement),
        (6, "opposites matrix and hierarchy", opposites_and_hierarchy),
        (7, "example corpus verdicts", corpus_verdicts),
        (8, "fallacy suite", fallacies),
        (9, "paraconsistency", paraconsistency),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let mut c = Checks::new();
        run(&mut c);
        let known: Vec<_> = KNOWN_CONFLICTS.iter().filter(|k| k.0 == id).collect();
        if c.failures.is_empty() {
            println!("PASS {id} {name}");
        } else {
            println!("FAIL {id} {name}");
        }
        for (label, detail) in &c.failures {
            match known.iter().find(|k| k.1 == label) {
                Some(k) => println!("    known conflict: {label}: {detail} ({})", k.2),
                None => {
                    unexpected += 1;
                    println!("    {label}: {detail}");
                }
            }
        }
        for k in known {
            if !c.failures.iter().any(|f| f.0 == k.1) {
                unexpected += 1;
                println!("    listed conflict now passes: {}", k.1);
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected acceptance failures");
        ExitCode::FAILURE
    }
}
