mod common;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{
    double_negate, random_conjunctive, random_formula, random_param, scale_atoms, zp_context,
};
use treepres::formula::{atom_to_lin, parse, to_prenex, Flavor, Formula};
use treepres::qe::{skolem, tree_decide, DecisionContext, SkolemWitness, Value};
use treepres::residue::pow_u;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5])
}

fn setup(seed: u64, p: u64, names: [&str; 2], bound: [&str; 2]) -> (DecisionContext, Formula) {
    let mut rng = StdRng::seed_from_u64(seed);
    let f = random_formula(&mut rng, &names, &bound, 4, 4);
    let vals = [random_param(&mut rng, p, 12), random_param(&mut rng, p, 12)];
    (zp_context(p, &names, &vals), f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn renaming_preserves_truth(seed in any::<u64>(), p in prime()) {
        let (ctx, f) = setup(seed, p, ["c1", "c2"], ["G", "H"]);
        let (ctx2, g) = setup(seed, p, ["b", "a"], ["Y", "X"]);
        prop_assert_eq!(tree_decide(&ctx, &f).ok(), tree_decide(&ctx2, &g).ok());
    }

    #[test]
    fn scaling_preserves_truth(seed in any::<u64>(), p in prime(), k in prop::sample::select(vec![-5i64, 2, 3, 12])) {
        let (ctx, f) = setup(seed, p, ["c1", "c2"], ["G", "H"]);
        prop_assert_eq!(tree_decide(&ctx, &f).ok(), tree_decide(&ctx, &scale_atoms(&f, k)).ok());
    }

    #[test]
    fn double_negation_and_prenex_preserve_truth(seed in any::<u64>(), p in prime()) {
        let (ctx, f) = setup(seed, p, ["c1", "c2"], ["G", "H"]);
        let truth = tree_decide(&ctx, &f).ok();
        prop_assert!(truth.is_some());
        prop_assert_eq!(tree_decide(&ctx, &double_negate(&f)).ok(), truth);
        prop_assert_eq!(tree_decide(&ctx, &to_prenex(&f)).ok(), truth);
        prop_assert_eq!(tree_decide(&ctx, &Formula::not(f.clone())).ok(), truth.map(|t| !t));
    }

    #[test]
    fn skolem_witnesses_satisfy_the_matrix(seed in any::<u64>(), p in prime()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let nb = rng.gen_range(1..=2);
        let bound = &["G", "H"][..nb];
        let lits = rng.gen_range(1..=3);
        let f = random_conjunctive(&mut rng, &["F1", "F2"], bound, lits, 4);
        let vals = [random_param(&mut rng, p, 12), random_param(&mut rng, p, 12)];
        let ctx = zp_context(p, &["F1", "F2"], &vals);
        let truth = tree_decide(&ctx, &f).unwrap();
        match skolem(&ctx, &f).unwrap() {
            SkolemWitness::NotApplicable(_) => prop_assert!(!truth),
            SkolemWitness::Witness(ws) => {
                prop_assert!(truth);
                let label = |name: &str, n: usize| -> BigInt {
                    if let Some((_, x)) = ws.iter().find(|(v, _)| v == name) {
                        return x.label(n);
                    }
                    match ctx.params.iter().find(|(v, _)| v == name) {
                        Some((_, Value::Padic(x))) => x.label(n),
                        _ => unreachable!(),
                    }
                };
                let mut body = &f;
                while let Formula::Exists(_, g) = body {
                    body = g;
                }
                let Formula::And(parts) = body else { unreachable!() };
                for lit in parts {
                    let (atom, positive) = match lit {
                        Formula::Atom(a) => (a, true),
                        Formula::Not(g) => match g.as_ref() {
                            Formula::Atom(a) => (a, false),
                            _ => unreachable!(),
                        },
                        _ => unreachable!(),
                    };
                    let lin = atom_to_lin(atom, Flavor::Additive).unwrap();
                    let residue = |n: usize| lin.eval(&|v| label(v, n)).mod_floor(&pow_u(p, n as u32));
                    if positive {
                        for n in 1..=8 {
                            prop_assert!(residue(n).is_zero(), "{} fails at level {}", lit, n);
                        }
                    } else {
                        prop_assert!((1..=40).any(|n| !residue(n).is_zero()), "{} not separated", lit);
                    }
                }
            }
        }
    }
}

#[test]
fn golden_sentences() {
    let ctx = zp_context(3, &[], &[]);
    let cases = [
        ("ALL F. EX G. F = 2*G", true),
        ("ALL F. EX G. F = 3*G", false),
        ("EX G. ALL F. F = G", false),
        ("ALL F. ALL G. F = G | F != G", true),
        ("ALL F. EX G. EX H. F = 3*G + 2*H", true),
        ("ALL F. EX G. EX H. F = 3*G + 6*H", false),
        ("EX G. G != 0 & 9*G = 0", false),
        ("ALL F. EX G. G != F", true),
    ];
    for (text, want) in cases {
        let f = parse(text).unwrap();
        assert_eq!(tree_decide(&ctx, &f).unwrap(), want, "{text}");
    }
}
