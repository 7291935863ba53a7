use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

use treepres::oracle::solvable_mod_tower;
use treepres::residue::{p_valuation, pow_u};
use treepres::zp_add::{solve_linear, LinearEquation, PadicInt, SolveOutcome};

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

/// Parameter as (numerator, denominator) with the denominator prime to p.
fn param(p: u64) -> impl Strategy<Value = (i64, i64)> {
    (-50i64..=50, 1i64..=12).prop_filter("unit denominator", move |(_, d)| d % p as i64 != 0)
}

fn instance() -> impl Strategy<Value = (u64, Vec<i64>, i64, Vec<(i64, i64)>)> {
    prime().prop_flat_map(|p| {
        (1usize..=3).prop_flat_map(move |k| {
            (
                Just(p),
                prop::collection::vec(-20i64..=20, k),
                (-20i64..=20).prop_filter("b != 0", |b| *b != 0),
                prop::collection::vec(param(p), k),
            )
        })
    })
}

fn residue(q: (i64, i64), m: &BigInt) -> BigInt {
    // Denominator inverse by brute force: m is small here.
    let d = BigInt::from(q.1).mod_floor(m);
    let mut x = BigInt::from(1);
    while (&x * &d).mod_floor(m) != BigInt::from(1) {
        x += 1;
    }
    (BigInt::from(q.0) * x).mod_floor(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn verdict_matches_tower((p, a, b, f) in instance()) {
        let eq = LinearEquation::new(a.clone(), b);
        let xs: Vec<PadicInt> = f.iter().map(|&(n, d)| PadicInt::from_rational(p, n, d).unwrap()).collect();
        let e = p_valuation(&BigInt::from(b), p).unwrap();
        let m = pow_u(p, e + 1);
        let fr: Vec<BigInt> = f.iter().map(|&q| residue(q, &m)).collect();
        let coeffs: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
        let tower = solvable_mod_tower(&coeffs, &fr, &BigInt::from(b), p, e + 1);
        match solve_linear(&eq, &xs).unwrap() {
            SolveOutcome::NoSolution => prop_assert!(!tower),
            SolveOutcome::Unique(g) => {
                prop_assert!(tower);
                for n in 1..=10 {
                    let pm = pow_u(p, n as u32);
                    let lhs: BigInt = coeffs.iter().zip(&xs).map(|(c, x)| c * x.label(n)).sum();
                    prop_assert!((lhs - b * g.label(n)).mod_floor(&pm).is_zero());
                }
            }
            SolveOutcome::AllSolutions(_) => prop_assert!(false, "b != 0"),
        }
    }

    #[test]
    fn witness_is_local((p, a, b, f) in instance(), n in 1usize..6, bump in 1i64..20) {
        let eq = LinearEquation::new(a, b);
        let e = p_valuation(&BigInt::from(b), p).unwrap() as usize;
        let xs: Vec<PadicInt> = f.iter().map(|&(n, d)| PadicInt::from_rational(p, n, d).unwrap()).collect();
        // Change every input strictly above level n + e.
        let shift = PadicInt::from_integer(p, pow_u(p, (n + e) as u32) * bump);
        let ys: Vec<PadicInt> = xs.iter().map(|x| x.add(&shift).unwrap()).collect();
        match (solve_linear(&eq, &xs).unwrap(), solve_linear(&eq, &ys).unwrap()) {
            (SolveOutcome::Unique(g), SolveOutcome::Unique(h)) => prop_assert_eq!(g.prefix(n), h.prefix(n)),
            (SolveOutcome::NoSolution, SolveOutcome::NoSolution) => {}
            _ => prop_assert!(false, "solvability depends only on level e"),
        }
    }
}

#[test]
fn tower_handles_zero_parameters() {
    assert!(solvable_mod_tower(
        &[BigInt::from(5)],
        &[BigInt::zero()],
        &BigInt::from(4),
        2,
        3
    ));
}
