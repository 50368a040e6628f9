mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{check_steps, check_switching, random_derivation, random_query, subjects};
use icterm_core::corpus::REVERSE;
use icterm_core::program::{parse_program, parse_query};
use icterm_core::term::{Term, Var};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn step_properties_hold(seed in any::<u64>(), which in any::<prop::sample::Index>(), simply in any::<bool>()) {
        let subs = subjects();
        let s = &subs[which.index(subs.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&s.program, &mut rng, simply);
        let d = random_derivation(&s.program, &q, &mut rng, 30);
        let r = check_steps(&s.program, s.simply_moded, &d);
        prop_assert!(r.is_ok(), "{}: {} from {:?}", s.name, r.unwrap_err(), q);
    }

    #[test]
    fn switching_preserves_derivations(seed in any::<u64>(), which in any::<prop::sample::Index>()) {
        let subs = subjects();
        let s = &subs[which.index(subs.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&s.program, &mut rng, false);
        let d = random_derivation(&s.program, &q, &mut rng, 20);
        let r = check_switching(&s.program, &d);
        prop_assert!(r.is_ok(), "{}: {} from {:?}", s.name, r.unwrap_err(), q);
    }

    #[test]
    fn genealogy_reaches_initial_atoms(seed in any::<u64>(), which in any::<prop::sample::Index>()) {
        let subs = subjects();
        let s = &subs[which.index(subs.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&s.program, &mut rng, false);
        let d = random_derivation(&s.program, &q, &mut rng, 30);
        let origins = d.origins();
        prop_assert_eq!(origins.len(), d.len() + 1);
        for (k, o) in origins.iter().enumerate() {
            prop_assert_eq!(o.len(), d.query(k).len());
            prop_assert!(o.iter().all(|&i| i < q.len()));
        }
    }
}

#[test]
fn reverse_inputs_never_bound() {
    let p = parse_program(REVERSE).unwrap();
    let (q, names) = parse_query("reverse([X1,X2],Zs)", &p).unwrap();
    let by_name = |n: &str| *names.iter().find(|(_, s)| &***s == n).unwrap().0;
    let xs: Vec<Var> = vec![by_name("X1"), by_name("X2")];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let d = random_derivation(&p, &q, &mut rng, 10);
        let mut theta = icterm_core::subst::Substitution::new();
        for s in &d.steps {
            theta = theta.compose(&s.mgu);
            for &x in &xs {
                assert_eq!(theta.apply(&Term::Var(x)), Term::Var(x));
            }
        }
    }
}
