mod common;

use std::collections::HashMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::random_formula;
use treepres::oracle::{
    decision_stub_library, finite_model_check, or_issue_adversary, product_units_adversary,
    skolem_stub_library, FiniteModel, OrRefutation, SkolemStub,
};
use treepres::qe::cyclic_decide;
use treepres::zp_add::PadicInt;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn or_issue_defeats_every_library_stub(
        p in prop::sample::select(vec![2u64, 3, 5]),
        u in 1usize..=6,
        num in -200i64..200,
        den in 1i64..9,
    ) {
        prop_assume!(den % p as i64 != 0);
        let path = PadicInt::from_rational(p, num, den).unwrap();
        for stub in skolem_stub_library(p, u) {
            let report = or_issue_adversary(&stub, &path).unwrap();
            prop_assert!(report.verified, "{}", report);
        }
    }

    #[test]
    fn finite_model_agrees_with_cyclic_evaluation(seed in any::<u64>(), t in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9])) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_formula(&mut rng, &["c1", "c2"], &["G", "H"], 4, 5);
        let (p, n) = match t { 4 => (2, 2), 8 => (2, 3), 9 => (3, 2), q => (q, 1) };
        let vals: Vec<(String, BigInt)> = ["c1", "c2"]
            .iter()
            .map(|s| (s.to_string(), BigInt::from(rng.gen_range(0..t))))
            .collect();
        let env: HashMap<String, BigInt> = vals.iter().cloned().collect();
        prop_assert_eq!(
            finite_model_check(&FiniteModel::new(p, n), &f, &vals).unwrap(),
            cyclic_decide(t, &f, &env).unwrap()
        );
    }
}

#[test]
fn product_units_defeats_every_library_stub() {
    for primes in 1..=6 {
        for levels in 1..=4 {
            for stub in decision_stub_library(primes, levels) {
                let report = product_units_adversary(&stub).unwrap();
                assert!(report.verified, "{report}");
            }
        }
    }
}

#[test]
fn a_stub_that_echoes_its_second_input_is_perturbed() {
    let echo = SkolemStub::new("echo", 3, 2, |inp, n| inp.get(1, n.min(3)));
    // 100 has labels 1, 1, 19, 19, 100: the copy stalls at 19 past its use.
    let report = or_issue_adversary(&echo, &PadicInt::from_integer(3, 100)).unwrap();
    assert!(report.verified);
    assert_eq!(report.refutation, OrRefutation::Perturbed { level: 5 });
    let copy = SkolemStub::new("copy", 3, 2, |inp, n| inp.get(1, n.min(3)));
    let report = or_issue_adversary(&copy, &PadicInt::from_integer(3, 7)).unwrap();
    assert_eq!(
        report.refutation,
        OrRefutation::NoSeparation { horizon: 11 }
    );
}
