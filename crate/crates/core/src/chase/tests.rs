use super::*;
use crate::dl::{parse_abox, parse_cq, parse_tbox};

const EXAMPLE: &str = "A sub ex P\nex P sub A\nP rsub S\nP rsub R-\nB sub ex Q\nex Q sub B\nQ rsub R\nQ rsub S-\n";

fn tbox(src: &str) -> TBox {
    parse_tbox(src).unwrap().normalize().unwrap()
}

/// Exhaustive assignment enumeration over a materialized model.
fn brute_force(model: &CanonicalModel, cq: &Cq) -> BTreeSet<Vec<String>> {
    fn go(
        model: &CanonicalModel,
        cq: &Cq,
        domain: &[&ModelElement],
        choice: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<String>>,
    ) {
        let vars = cq.vars();
        let k = choice.len();
        let at = |choice: &Vec<usize>, v: &str| cq.var_index(v).filter(|&i| i < k).map(|i| domain[choice[i]]);
        let ok = cq.atoms().iter().all(|a| match a {
            CqAtom::Concept(c, v) => at(choice, v).is_none_or(|e| model.has_concept(c, e)),
            CqAtom::Role(p, u, v) => match (at(choice, u), at(choice, v)) {
                (Some(e1), Some(e2)) => model.has_role(p, e1, e2),
                _ => true,
            },
        });
        if !ok {
            return;
        }
        if k == vars.len() {
            let img: Vec<&ModelElement> = cq.answer_vars().iter().map(|v| at(choice, v).unwrap()).collect();
            if img.iter().all(|e| e.word.is_empty()) {
                out.insert(img.iter().map(|e| e.individual.clone()).collect());
            }
            return;
        }
        for i in 0..domain.len() {
            choice.push(i);
            go(model, cq, domain, choice, out);
            choice.pop();
        }
    }
    let domain: Vec<&ModelElement> = model.domain.iter().collect();
    let mut out = BTreeSet::new();
    go(model, cq, &domain, &mut Vec::new(), &mut out);
    out
}

#[test]
fn example_chase_from_a() {
    let t = tbox(EXAMPLE);
    let abox = parse_abox("A(a)").unwrap();
    let m = build_chase(&t, &abox, 2).unwrap();
    let a = ModelElement {
        individual: "a".into(),
        word: Word::empty(),
    };
    let ap = ModelElement {
        individual: "a".into(),
        word: Word(vec![Role::new("P")]),
    };
    assert_eq!(m.domain, BTreeSet::from([a.clone(), ap.clone()]));
    assert!(m.has_concept(&exists_concept_name(&Role::inv("P")), &ap));
    assert!(m.has_role("P", &a, &ap));
    assert!(m.has_role("S", &a, &ap));
    assert!(m.has_role("R", &ap, &a));
}

#[test]
fn empty_and_flat_models() {
    let t = tbox(EXAMPLE);
    assert!(build_chase(&t, &ABox::new(), 3).unwrap().domain.is_empty());
    let flat = tbox("A sub B\nP rsub S\n");
    let abox = parse_abox("A(a)\nP(a,b)\nP(b,c)").unwrap();
    let m = build_chase(&flat, &abox, 5).unwrap();
    assert_eq!(m.domain.len(), 3);
    assert!(m.domain.iter().all(|e| e.word.is_empty()));
}

#[test]
fn consistency() {
    assert!(is_consistent(&tbox(EXAMPLE), &parse_abox("A(a)\nR(a,b)").unwrap()).unwrap());
    let t = tbox("A disj B\n");
    assert!(!is_consistent(&t, &parse_abox("A(a)\nB(a)").unwrap()).unwrap());
    let t = tbox("A sub ex P\nex P sub A\nex P- disj B\n");
    assert!(is_consistent(&t, &parse_abox("A(a)\nB(b)").unwrap()).unwrap());
    assert!(!is_consistent(&t, &parse_abox("P(b,c)\nB(c)").unwrap()).unwrap());
    let t = tbox("A sub ex P\nP rsub S\nP rsub T\nS rdisj T\n");
    assert!(!is_consistent(&t, &parse_abox("A(a)").unwrap()).unwrap());
    assert!(is_consistent(&t, &parse_abox("S(a,b)").unwrap()).unwrap());
}

#[test]
fn chain_query_answers() {
    let t = tbox(EXAMPLE);
    let q = parse_cq("q(x0,x7) :- R(x0,x1), S(x1,x2), R(x2,x3), R(x3,x4), S(x4,x5), R(x5,x6), R(x6,x7)").unwrap();
    let abox = parse_abox("R(a,b)\nS(b,c)\nR(c,d)\nR(d,e)\nS(e,f)\nR(f,g)\nR(g,h)").unwrap();
    let ans = certain_answers(&t, &q, &abox).unwrap();
    assert_eq!(ans, BTreeSet::from([vec!["a".to_string(), "h".to_string()]]));
    let q = parse_cq("q(x) :- R(x,y)").unwrap();
    assert!(certain_answers(&t, &q, &ABox::new()).unwrap().is_empty());
    let t = tbox("B sub A\n");
    let q = parse_cq("q(x) :- A(x)").unwrap();
    let ans = certain_answers(&t, &q, &parse_abox("B(a)").unwrap()).unwrap();
    assert_eq!(ans, BTreeSet::from([vec!["a".to_string()]]));
}

#[test]
fn anonymous_matches() {
    let t = tbox(EXAMPLE);
    // A(a) yields a·P with R(a·P, a) and S(a, a·P)
    let q = parse_cq("q(x) :- S(x,y), R(y,x)").unwrap();
    let ans = certain_answers(&t, &q, &parse_abox("A(a)").unwrap()).unwrap();
    assert_eq!(ans.len(), 1);
    let q = parse_cq("q() :- S(x,y), R(y,z)").unwrap();
    assert_eq!(certain_answers(&t, &q, &parse_abox("A(a)").unwrap()).unwrap().len(), 1);
    let q = parse_cq("q() :- S(x,y), S(y,z)").unwrap();
    assert!(certain_answers(&t, &q, &parse_abox("A(a)").unwrap()).unwrap().is_empty());
}

#[test]
fn infinite_depth_boolean() {
    // A ⊑ ∃P, ∃P⁻ ⊑ ∃P: an infinite P-chain below every A
    let t = tbox("A sub ex P\nex P- sub ex P\n");
    let q = parse_cq("q() :- P(x,y), P(y,z), P(z,w), P(w,v)").unwrap();
    assert_eq!(certain_answers(&t, &q, &parse_abox("A(a)").unwrap()).unwrap().len(), 1);
    let q = parse_cq("q(x) :- P(y,x), P(z,y)").unwrap();
    assert!(certain_answers(&t, &q, &parse_abox("A(a)").unwrap()).unwrap().is_empty());
}

#[test]
fn inconsistent_input_rejected() {
    let t = tbox("A disj B\n");
    let q = parse_cq("q(x) :- A(x)").unwrap();
    let err = certain_answers(&t, &q, &parse_abox("A(a)\nB(a)").unwrap()).unwrap_err();
    assert!(matches!(err, Error::InconsistentInput));
}

#[test]
fn entailment_from_concepts() {
    let t = tbox(EXAMPLE);
    let q = parse_cq("q() :- P(x,y)").unwrap();
    assert!(entails_from_concept(&t, "A", &q).unwrap());
    assert!(!entails_from_concept(&t, "B", &q).unwrap());
    let q = parse_cq("q() :- C(x)").unwrap();
    assert!(!entails_from_concept(&t, "A", &q).unwrap());
    assert!(entails_from_concept(&t, "A", &Cq::new(vec![], vec![])).unwrap());
    let q = parse_cq("q(x) :- C(x)").unwrap();
    assert!(matches!(entails_from_concept(&t, "A", &q), Err(Error::NotBoolean(_))));
}

fn set(vs: &[&str]) -> BTreeSet<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn witnesses_of_single_edge() {
    let t = tbox(EXAMPLE);
    let q = parse_cq("q() :- R(x3,x4)").unwrap();
    let tws = tree_witnesses(&t, &q).unwrap();
    let find = |tr: &[&str], ti: &[&str]| tws.iter().find(|w| w.t_r == set(tr) && w.t_i == set(ti)).cloned();
    let w = find(&["x3"], &["x4"]).expect("witness generated by Q");
    assert_eq!(w.generators, BTreeSet::from([Role::new("Q")]));
    let w = find(&["x4"], &["x3"]).expect("witness generated by P");
    assert_eq!(w.generators, BTreeSet::from([Role::new("P")]));
    assert_eq!(tws.len(), 2);
}

#[test]
fn witnesses_trivial_cases() {
    let t = tbox(EXAMPLE);
    let q = parse_cq("q(x,y) :- R(x,y)").unwrap();
    assert!(tree_witnesses(&t, &q).unwrap().is_empty());
    let flat = tbox("A sub B\nP rsub R\n");
    let q = parse_cq("q() :- R(x,y), R(y,z)").unwrap();
    assert!(tree_witnesses(&flat, &q).unwrap().is_empty());
    let cyc = parse_cq("q() :- R(x,y), R(y,z), R(z,x)").unwrap();
    assert!(matches!(tree_witnesses(&t, &cyc), Err(Error::NotTreeShaped)));
}

#[test]
fn witnesses_reverified() {
    let t = tbox("A sub ex P\nex P- sub ex Q\nQ rsub R\nP rsub R-\n");
    let q = parse_cq("q(x) :- R(y,x), R(y,z), R(w,z)").unwrap();
    let tws = tree_witnesses(&t, &q).unwrap();
    assert!(!tws.is_empty());
    for w in &tws {
        assert!(w.t_i.iter().all(|v| !q.is_answer_var(v)));
        for r in &w.generators {
            let mut abox = ABox::new();
            abox.add_concept(exists_concept_name(r), "a");
            let m = build_chase(&t, &abox, q.vars().len()).unwrap();
            let qt = Cq::new(w.t_r.iter().cloned().collect(), w.atoms.clone());
            let found = brute_force(&m, &qt);
            let all_a: Vec<String> = vec!["a".into(); w.t_r.len()];
            assert!(found.contains(&all_a), "{w:?}");
        }
    }
}

mod random {
    use super::*;
    use proptest::prelude::*;

    fn tbox_strategy() -> impl Strategy<Value = TBox> {
        let concept = prop_oneof![
            Just("A".to_string()),
            Just("B".to_string()),
            Just("ex P".to_string()),
            Just("ex P-".to_string()),
            Just("ex R".to_string()),
            Just("ex R-".to_string()),
        ];
        let role = prop_oneof![Just("P"), Just("P-"), Just("R"), Just("R-")];
        let ci = (concept.clone(), concept).prop_map(|(a, b)| format!("{a} sub {b}"));
        let ri = (role.clone(), role).prop_map(|(a, b)| format!("{a} rsub {b}"));
        (prop::collection::vec(ci, 0..4), prop::collection::vec(ri, 0..2))
            .prop_map(|(c, r)| tbox(&[c, r].concat().join("\n")))
    }

    fn abox_strategy() -> impl Strategy<Value = ABox> {
        let ind = prop_oneof![Just("a"), Just("b"), Just("c")];
        let fact = prop_oneof![
            (prop_oneof![Just("A"), Just("B")], ind.clone()).prop_map(|(c, a)| format!("{c}({a})")),
            (prop_oneof![Just("P"), Just("R")], ind.clone(), ind).prop_map(|(p, a, b)| format!("{p}({a},{b})")),
        ];
        prop::collection::vec(fact, 0..4).prop_map(|fs| parse_abox(&fs.join("\n")).unwrap())
    }

    fn cq_strategy() -> impl Strategy<Value = Cq> {
        let var = prop_oneof![Just("x"), Just("y"), Just("z")];
        let atom = prop_oneof![
            (prop_oneof![Just("A"), Just("B")], var.clone()).prop_map(|(c, v)| CqAtom::concept(c, v)),
            (prop_oneof![Just("P"), Just("R")], var.clone(), var).prop_map(|(p, u, v)| CqAtom::role(p, u, v)),
        ];
        (prop::collection::vec(atom, 1..4), 0usize..3).prop_map(|(atoms, k)| {
            let q = Cq::new(vec![], atoms);
            let answers = q.vars().iter().take(k).cloned().collect();
            Cq::new(answers, q.atoms().to_vec())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn lazy_search_matches_brute_force(t in tbox_strategy(), a in abox_strategy(), q in cq_strategy()) {
            prop_assume!(is_consistent(&t, &a).unwrap());
            let lazy = certain_answers(&t, &q, &a).unwrap();
            let deeper = certain_answers_with_limit(&t, &q, &a, Some(q.vars().len() + 2)).unwrap();
            prop_assert_eq!(&lazy, &deeper);
            let model = build_chase(&t, &a, q.vars().len()).unwrap();
            prop_assert_eq!(&lazy, &brute_force(&model, &q));
            let mut bigger = a.clone();
            bigger.add_concept("A", "c");
            prop_assume!(is_consistent(&t, &bigger).unwrap());
            let more = certain_answers(&t, &q, &bigger).unwrap();
            prop_assert!(lazy.is_subset(&more));
        }
    }
}
