use std::collections::BTreeSet;

use polylogic::deduction::{self, family, ModalStatus, SetTerm};
use polylogic::measures::{measure_probability, MeasureTable, Selector};
use polylogic::model::ModelFile;
use polylogic::optimizer::SolverConfig;
use polylogic::parallel::Execution;
use polylogic::polynomial::Polynomial;
use polylogic::proplogic::{self, Formula};
use polylogic::rational::int;
use proptest::prelude::*;

const ATOMS: [&str; 3] = ["A", "B", "C"];

fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        8 => (0..ATOMS.len()).prop_map(|i| Formula::atom(ATOMS[i])),
        1 => Just(Formula::parse("T").unwrap()),
        1 => Just(Formula::parse("F").unwrap()),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

fn set_term() -> impl Strategy<Value = SetTerm> {
    let leaf = formula(2).prop_map(SetTerm::formula);
    leaf.prop_recursive(2, 8, 2, |inner| {
        (inner.clone(), inner, any::<bool>()).prop_map(|(a, b, k)| SetTerm::bf(a, b, k))
    })
}

fn atoms_of(fs: &[Formula]) -> Vec<String> {
    fs.iter().flat_map(|f| f.atoms()).collect::<BTreeSet<_>>().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn translation_agrees_with_truth_table(f in formula(4)) {
        let atoms = atoms_of(std::slice::from_ref(&f));
        let t = f.translate();
        for v in proplogic::valuations(&atoms) {
            let want = int(f.eval(&v).unwrap() as i64);
            prop_assert_eq!(proplogic::evaluate_translation(&t, &v).unwrap(), want);
        }
    }

    #[test]
    fn translation_is_multilinear(f in formula(4)) {
        let t = f.translate();
        prop_assert_eq!(t.idempotent_reduce_all(), t);
    }

    #[test]
    fn boolean_deduction_matches_enumeration(premises in prop::collection::vec(formula(3), 0..3), c in formula(3)) {
        let ip = deduction::boolean_deduce(&premises, &c, &SolverConfig::default()).unwrap().status;
        let en = deduction::boolean_deduce_by_enumeration(&premises, &c).unwrap();
        prop_assert_eq!(ip, en);
    }

    #[test]
    fn contradictory_premises_never_necessary(mut premises in prop::collection::vec(formula(3), 0..3), f in formula(2), c in formula(3)) {
        premises.push(f.clone());
        premises.push(Formula::not(f));
        let ip = deduction::boolean_deduce(&premises, &c, &SolverConfig::default()).unwrap().status;
        prop_assert_eq!(ip, ModalStatus::Impossible);
    }

    #[test]
    fn polynomial_display_round_trips(f in formula(4), k in -5i64..5) {
        let p = &f.translate().scale(&int(k)) + &Polynomial::from_int(k);
        prop_assert_eq!(Polynomial::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn model_file_round_trips(fs in prop::collection::vec(formula(3), 1..4)) {
        let mut src = String::from("model generated\nvar A, B, C\nparam x in [0,1]\n");
        src.push_str("table P0(A) { T: x ; F: 1-x }\ntable P0(B) { T: 1/2 }\ntable P0(C|A) { T|T: x ; T|F: 1/3 }\n");
        for (i, f) in fs.iter().enumerate() {
            src.push_str(&format!("embed E{i} = \"{f}\"\n"));
            src.push_str(&format!("query classify \"{f}\"\nquery P([{f}]=T)\n"));
        }
        let m = ModelFile::parse(&src).unwrap();
        let again = ModelFile::parse(&m.to_string()).unwrap();
        prop_assert_eq!(again, m);
    }

    #[test]
    fn family_counts_agree_across_execution(t in set_term()) {
        let atoms: Vec<String> = ATOMS.iter().map(|s| s.to_string()).collect();
        let s = family::count_sets(&t, &atoms, Execution::Sequential).unwrap();
        let p = family::count_sets(&t, &atoms, Execution::Parallel).unwrap();
        prop_assert_eq!(s, p);
    }

    #[test]
    fn additive_measures_add_over_disjoint_events(values in prop::collection::vec(0u32..100, 4), split in 0usize..16) {
        let names = ["e0", "e1", "e2", "e3"];
        let mut text = String::from("name | w [u]\n");
        for (n, v) in names.iter().zip(&values) {
            text.push_str(&format!("{n} | {v}\n"));
        }
        let t = MeasureTable::parse(&text).unwrap();
        let (left, right): (Vec<_>, Vec<_>) = names.iter().enumerate().partition(|(i, _)| split & (1 << i) != 0);
        let sel = |part: &[(usize, &&str)]| Selector::Elements(part.iter().map(|(_, n)| n.to_string()).collect());
        let total = measure_probability(&t, &Selector::All, None, "w").unwrap();
        let a = measure_probability(&t, &sel(&left), None, "w").unwrap();
        let b = measure_probability(&t, &sel(&right), None, "w").unwrap();
        prop_assert_eq!(&a.numerator + &b.numerator, total.numerator.clone());
        if let (Some(pa), Some(pb)) = (a.value(), b.value()) {
            prop_assert_eq!(pa + pb, int(1));
        } else {
            prop_assert!(total.is_indefinite());
        }
    }
}
