use std::collections::BTreeMap;

use proptest::prelude::*;

use icterm_core::engine::{ic_resolvable_renamed, Unresolvable};
use icterm_core::program::{parse_program, Atom, Clause, Mode, ModeFlag, ModedProgram, Pred};
use icterm_core::subst::Substitution;
use icterm_core::term::{tsize, Term, Var};
use icterm_core::unify::{is_relevant, unify, unify_terms};

fn term_over(vars: std::ops::Range<u32>, depth: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        3 => vars.prop_map(|v| Term::Var(Var(v))),
        1 => Just(Term::constant("a")),
        1 => Just(Term::constant("b")),
        1 => (0i64..3).prop_map(Term::Int),
        1 => Just(Term::nil()),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("f", vec![a, b])),
            inner.clone().prop_map(|a| Term::app("g", vec![a])),
            (inner.clone(), inner).prop_map(|(h, t)| Term::cons(h, t)),
        ]
    })
    .boxed()
}

fn term() -> BoxedStrategy<Term> {
    term_over(0..5, 3)
}

fn subst() -> impl Strategy<Value = Substitution> {
    proptest::collection::btree_map(0u32..5, term_over(5..9, 2), 0..4)
        .prop_map(|m| Substitution::from_bindings(m.into_iter().map(|(v, t)| (Var(v), t))))
}

/// All injective maps from `from` into `to`.
fn injections(from: &[Var], to: &[Var]) -> Vec<BTreeMap<Var, Var>> {
    if from.is_empty() {
        return vec![BTreeMap::new()];
    }
    let mut out = Vec::new();
    for rest in injections(&from[1..], to) {
        for &t in to {
            if !rest.values().any(|&u| u == t) {
                let mut m = rest.clone();
                m.insert(from[0], t);
                out.push(m);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn mgu_unifies_and_is_idempotent_and_relevant(a in term(), b in term_over(3..8, 3)) {
        if let Ok(theta) = unify_terms(&a, &b) {
            prop_assert_eq!(theta.apply(&a), theta.apply(&b));
            prop_assert!(theta.is_idempotent());
            prop_assert!(is_relevant(&theta, std::slice::from_ref(&a), std::slice::from_ref(&b)));
        }
    }

    /// Our resolvability verdict against brute force: some mgu fixes the
    /// input term iff the plain mgu's image of it can be renamed back onto it.
    #[test]
    fn input_fixing_matches_brute_force(s in term_over(0..4, 2), t in term_over(0..4, 2),
                                        u in term_over(10..14, 2), v in term_over(10..14, 2)) {
        let program = ModedProgram::new(
            vec![],
            [(Pred::new("p", 2), Mode(vec![ModeFlag::In, ModeFlag::Out]))].into(),
        ).unwrap();
        let atom = Atom::new("p", vec![s.clone(), t.clone()]);
        let clause = Clause::new(Atom::new("p", vec![u.clone(), v.clone()]), vec![]);
        let plain = unify(&[s.clone(), t.clone()], &[u, v]);
        let verdict = ic_resolvable_renamed(&program, &atom, &clause);
        match plain {
            Err(_) => prop_assert_eq!(verdict, Err(Unresolvable::NotUnifiable)),
            Ok(sigma) => {
                let image = sigma.apply(&s);
                let img_vars: Vec<Var> = image.var_set().into_iter().collect();
                let s_vars: Vec<Var> = s.var_set().into_iter().collect();
                // σρ is again an mgu for every renaming ρ; try them all
                let exists = injections(&img_vars, &s_vars)
                    .iter()
                    .any(|m| image.rename(m) == s);
                match &verdict {
                    Ok(theta) => {
                        prop_assert_eq!(theta.apply(&s), s.clone());
                        prop_assert!(exists);
                    }
                    Err(e) => {
                        prop_assert_eq!(e, &Unresolvable::NotInputConsuming);
                        prop_assert!(!exists);
                    }
                }
            }
        }
    }

    #[test]
    fn compose_is_associative(a in subst(), b in subst(), c in subst(), t in term_over(0..9, 3)) {
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        prop_assert_eq!(left.apply(&t), right.apply(&t));
        prop_assert_eq!(left.apply(&t), c.apply(&b.apply(&a.apply(&t))));
    }

    #[test]
    fn empty_substitution_is_identity(a in subst(), t in term_over(0..9, 3)) {
        let e = Substitution::new();
        prop_assert_eq!(e.compose(&a).apply(&t), a.apply(&t));
        prop_assert_eq!(a.compose(&e).apply(&t), a.apply(&t));
        prop_assert_eq!(e.apply(&t), t);
    }

    #[test]
    fn tsize_of_instance(t in term(), theta in subst()) {
        let expected = tsize(&t)
            + t.var_set()
                .into_iter()
                .map(|x| t.occurrences(x) as u64 * tsize(&theta.apply(&Term::Var(x))))
                .sum::<u64>();
        prop_assert_eq!(tsize(&theta.apply(&t)), expected);
    }

    #[test]
    fn inputs_and_outputs_partition_arguments(
        flags in proptest::collection::vec(any::<bool>(), 0..6),
        seed in any::<u32>(),
    ) {
        let arity = flags.len();
        let mode = Mode(flags.iter().map(|&b| if b { ModeFlag::In } else { ModeFlag::Out }).collect());
        let program = ModedProgram::new(vec![], [(Pred::new("q", arity), mode.clone())].into()).unwrap();
        let args: Vec<Term> = (0..arity).map(|i| Term::Int((seed as i64) * 10 + i as i64)).collect();
        let atom = Atom::new("q", args.clone());
        let mut joined: Vec<Term> = program.input_args(&atom).into_iter().cloned().collect();
        joined.extend(program.output_args(&atom).into_iter().cloned());
        let order: Vec<usize> = mode.input_positions().chain(mode.output_positions()).collect();
        let expected: Vec<Term> = order.iter().map(|&i| args[i].clone()).collect();
        prop_assert_eq!(joined, expected);
    }

    #[test]
    fn print_then_parse_gives_variants(
        clauses in proptest::collection::vec(
            (term(), term(), proptest::collection::vec((term(), term()), 0..3)), 1..4)
    ) {
        let clauses: Vec<Clause> = clauses
            .into_iter()
            .map(|(a, b, body)| Clause::new(
                Atom::new("r", vec![a, b]),
                body.into_iter().map(|(c, d)| Atom::new("r", vec![c, d])).collect(),
            ))
            .collect();
        let program = ModedProgram::new(
            clauses,
            [(Pred::new("r", 2), Mode(vec![ModeFlag::In, ModeFlag::Out]))].into(),
        ).unwrap();
        let back = parse_program(&program.to_source()).unwrap();
        prop_assert_eq!(back.clauses.len(), program.clauses.len());
        for (x, y) in back.clauses.iter().zip(&program.clauses) {
            prop_assert!(x.variant_eq(y), "{:?} vs {:?}", x, y);
        }
        prop_assert_eq!(back.modes(), program.modes());
    }
}
