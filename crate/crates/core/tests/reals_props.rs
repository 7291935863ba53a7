mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use common::sign_corpus;
use treepres::reals::{
    convergence_violation, equiv_semidecide, newton_sqrt, sign_decide, Equiv, FastCauchyReal, Poly,
    RealDiagram, SignResult,
};

#[derive(Debug, Clone)]
enum R {
    Int(i64),
    Rat(i64, i64),
    Dec(String),
    Sqrt(u64),
    Neg(Box<R>),
    Scale(i64, Box<R>),
    Add(Box<R>, Box<R>),
    Sub(Box<R>, Box<R>),
    Mul(Box<R>, Box<R>),
}

fn build(r: &R) -> (FastCauchyReal, f64) {
    match r {
        R::Int(z) => (FastCauchyReal::from_integer(*z), *z as f64),
        R::Rat(a, b) => (
            FastCauchyReal::from_rational(BigRational::new((*a).into(), (*b).into())),
            *a as f64 / *b as f64,
        ),
        R::Dec(s) => (FastCauchyReal::from_decimal(s).unwrap(), s.parse().unwrap()),
        R::Sqrt(k) => (newton_sqrt(*k), (*k as f64).sqrt()),
        R::Neg(a) => {
            let (x, v) = build(a);
            (x.neg(), -v)
        }
        R::Scale(c, a) => {
            let (x, v) = build(a);
            (x.scale(&BigInt::from(*c)), *c as f64 * v)
        }
        R::Add(a, b) | R::Sub(a, b) | R::Mul(a, b) => {
            let ((x, u), (y, v)) = (build(a), build(b));
            match r {
                R::Add(..) => (x.add(&y), u + v),
                R::Sub(..) => (x.sub(&y), u - v),
                _ => (x.mul(&y), u * v),
            }
        }
    }
}

fn expr() -> impl Strategy<Value = R> {
    let leaf = prop_oneof![
        (-50i64..50).prop_map(R::Int),
        (-50i64..50, 1i64..30).prop_map(|(a, b)| R::Rat(a, b)),
        (-99i64..99, 0u32..100000).prop_map(|(a, b)| R::Dec(format!("{a}.{b:05}"))),
        (1u64..40).prop_map(R::Sqrt),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| R::Neg(Box::new(a))),
            (-7i64..7, inner.clone()).prop_map(|(c, a)| R::Scale(c, Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| R::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| R::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| R::Mul(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn fast_convergence_to_level_20(r in expr()) {
        let (x, v) = build(&r);
        prop_assert_eq!(convergence_violation(&x, 20), None);
        let approx = x.at(20).to_f64().unwrap();
        prop_assert!((approx - v).abs() <= 2f64.powi(-20) + 1e-9 * v.abs().max(1.0));
    }
}

fn sqrt_diagram() -> RealDiagram {
    RealDiagram::parse("x*x = 2\ny*y = 3", &["x".into(), "y".into()]).unwrap()
}

#[test]
fn sign_matches_interval_oracle() {
    let xs = [newton_sqrt(2), newton_sqrt(3)];
    let d = sqrt_diagram();
    for case in sign_corpus(50, 5) {
        let got = match sign_decide(&case.to_poly(), &xs, &d, 80).unwrap() {
            SignResult::Negative(_) => -1,
            SignResult::Zero => 0,
            SignResult::Positive(_) => 1,
        };
        assert_eq!(got, case.oracle_sign(), "{case:?}");
    }
}

#[test]
fn equality_is_only_semidecidable() {
    let x = newton_sqrt(2);
    let y = FastCauchyReal::from_rational(BigRational::new(3.into(), 2.into()));
    assert!(matches!(equiv_semidecide(&x, &y, 20), Equiv::Apart(_)));
    assert_eq!(
        equiv_semidecide(&x, &x.add(&FastCauchyReal::from_integer(0)), 40),
        Equiv::Unknown
    );
    let z = Poly::var(2, 0)
        .mul(&Poly::var(2, 0))
        .sub(&Poly::constant(2, 2));
    let empty = RealDiagram {
        names: vec!["x".into(), "y".into()],
        basis: vec![],
    };
    assert!(sign_decide(&z, &[x.clone(), x], &empty, 30).is_err());
}
