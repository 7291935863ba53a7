//! Shared corpus generators for the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use treepres::formula::{integer_kernel, Atom, Diagram, Formula, Mono, RelationLattice, Term};
use treepres::qe::{DecisionContext, Structure, Value};
use treepres::zp_add::PadicInt;

pub fn term(monos: &[(i64, &str)]) -> Term {
    if monos.is_empty() {
        return Term::zero();
    }
    Term(
        monos
            .iter()
            .map(|&(c, v)| Mono {
                coeff: BigInt::from(c),
                factors: vec![v.to_string()],
            })
            .collect(),
    )
}

/// A linear atom over 1 to 3 of `scope`, with the innermost name always
/// present when `prefer_last` is set.
pub fn random_atom(rng: &mut StdRng, scope: &[&str], coeff: i64, prefer_last: bool) -> Formula {
    let mut chosen: Vec<&str> = Vec::new();
    if prefer_last {
        chosen.push(scope[scope.len() - 1]);
    }
    let k = rng.gen_range(1..=3usize.min(scope.len()));
    while chosen.len() < k {
        let v = scope[rng.gen_range(0..scope.len())];
        if !chosen.contains(&v) {
            chosen.push(v);
        }
    }
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for v in chosen {
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-coeff..=coeff);
        }
        if rng.gen_bool(0.5) {
            lhs.push((c, v));
        } else {
            rhs.push((c, v));
        }
    }
    let atom = Formula::Atom(Atom::new(term(&lhs), term(&rhs)));
    if rng.gen_bool(0.35) {
        Formula::not(atom)
    } else {
        atom
    }
}

/// Random formula over `params` binding names from `bound`, each at most
/// once along a branch. The shape depends only on the RNG, so equal seeds
/// with different names give alpha-variants.
pub fn random_formula(
    rng: &mut StdRng,
    params: &[&str],
    bound: &[&str],
    depth: usize,
    coeff: i64,
) -> Formula {
    fn go(
        rng: &mut StdRng,
        scope: &mut Vec<String>,
        bound: &[&str],
        depth: usize,
        coeff: i64,
        fresh: bool,
    ) -> Formula {
        let leaf = depth == 0 || rng.gen_bool(0.25);
        if leaf && !scope.is_empty() {
            let names: Vec<&str> = scope.iter().map(String::as_str).collect();
            return random_atom(rng, &names, coeff, fresh);
        }
        let pick = rng.gen_range(0..4);
        match pick {
            3 | 2 if !bound.is_empty() => {
                let v = bound[0];
                scope.push(v.to_string());
                let body = go(
                    rng,
                    scope,
                    &bound[1..],
                    depth.saturating_sub(1),
                    coeff,
                    true,
                );
                scope.pop();
                if rng.gen_bool(0.5) {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
            0 => Formula::not(go(rng, scope, bound, depth.saturating_sub(1), coeff, fresh)),
            1 => Formula::And(vec![
                go(rng, scope, bound, depth.saturating_sub(1), coeff, fresh),
                go(rng, scope, bound, depth.saturating_sub(1), coeff, false),
            ]),
            _ => Formula::Or(vec![
                go(rng, scope, bound, depth.saturating_sub(1), coeff, fresh),
                go(rng, scope, bound, depth.saturating_sub(1), coeff, false),
            ]),
        }
    }
    let mut scope: Vec<String> = params.iter().map(|s| s.to_string()).collect();
    go(rng, &mut scope, bound, depth, coeff, false)
}

/// Conjunction of literals under an existential prefix over `bound`.
pub fn random_conjunctive(
    rng: &mut StdRng,
    params: &[&str],
    bound: &[&str],
    lits: usize,
    coeff: i64,
) -> Formula {
    let scope: Vec<&str> = params.iter().chain(bound).copied().collect();
    let body = Formula::And(
        (0..lits)
            .map(|_| random_atom(rng, &scope, coeff, false))
            .collect(),
    );
    bound
        .iter()
        .rev()
        .fold(body, |acc, v| Formula::exists(v, acc))
}

/// Multiply every atom by `k`.
pub fn scale_atoms(f: &Formula, k: i64) -> Formula {
    let sc = |t: &Term| {
        Term(
            t.0.iter()
                .map(|m| Mono {
                    coeff: &m.coeff * k,
                    factors: m.factors.clone(),
                })
                .collect(),
        )
    };
    match f {
        Formula::Atom(a) => Formula::Atom(Atom::new(sc(&a.lhs), sc(&a.rhs))),
        Formula::Not(g) => Formula::not(scale_atoms(g, k)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| scale_atoms(g, k)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| scale_atoms(g, k)).collect()),
        Formula::Exists(v, g) => Formula::exists(v, scale_atoms(g, k)),
        Formula::Forall(v, g) => Formula::forall(v, scale_atoms(g, k)),
    }
}

/// Wrap every other connective in a double negation.
pub fn double_negate(f: &Formula) -> Formula {
    fn go(f: &Formula, flip: &mut bool) -> Formula {
        let inner = match f {
            Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::not(go(g, flip)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, flip)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, flip)).collect()),
            Formula::Exists(v, g) => Formula::exists(v, go(g, flip)),
            Formula::Forall(v, g) => Formula::forall(v, go(g, flip)),
        };
        *flip = !*flip;
        if *flip {
            Formula::not(Formula::not(inner))
        } else {
            inner
        }
    }
    go(f, &mut false)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Complete diagram of known rationals: the integer relations among them.
pub fn rational_diagram(names: &[&str], vals: &[BigRational]) -> Diagram {
    let den = vals.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let cols: Vec<Vec<BigInt>> = vals.iter().map(|q| vec![(q * &den).to_integer()]).collect();
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    Diagram::Complete(RelationLattice::new(names, integer_kernel(&cols)).unwrap())
}

/// Context over Z_p^+ whose parameters are the given rationals.
pub fn zp_context(p: u64, names: &[&str], vals: &[BigRational]) -> DecisionContext {
    let params = names
        .iter()
        .zip(vals)
        .map(|(n, q)| {
            let x = PadicInt::from_rational(p, q.numer().clone(), q.denom().clone()).unwrap();
            (n.to_string(), Value::Padic(x))
        })
        .collect();
    DecisionContext::new(Structure::ZpPlus(p), params, rational_diagram(names, vals)).unwrap()
}

/// Random rational with denominator prime to p.
pub fn random_param(rng: &mut StdRng, p: u64, num: i64) -> BigRational {
    loop {
        let d = rng.gen_range(1..=6i64);
        if d % p as i64 != 0 {
            return rat(rng.gen_range(-num..=num), d);
        }
    }
}

pub fn valuation(x: i64, p: u64) -> u32 {
    assert!(x != 0);
    let mut x = x.unsigned_abs();
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Polynomial in x = sqrt(2), y = sqrt(3) as (coeff, deg x, deg y) triples.
#[derive(Debug, Clone)]
pub struct SqrtPoly(pub Vec<(i64, u32, u32)>);

impl SqrtPoly {
    pub fn mul(&self, o: &SqrtPoly) -> SqrtPoly {
        let mut out = Vec::new();
        for &(a, i, j) in &self.0 {
            for &(b, k, l) in &o.0 {
                out.push((a * b, i + k, j + l));
            }
        }
        SqrtPoly(out)
    }

    pub fn to_poly(&self) -> treepres::reals::Poly {
        let mut p = treepres::reals::Poly::zero(2);
        for &(c, i, j) in &self.0 {
            let e = p.terms.entry(vec![i, j]).or_insert_with(|| BigInt::from(0));
            *e += c;
        }
        p.terms.retain(|_, c| *c != BigInt::from(0));
        p
    }

    /// Sign from 256-bit enclosures of sqrt(2) and sqrt(3); values inside
    /// 2^-100 of zero count as zero, which is safe for the small heights
    /// used here since a nonzero value has norm at least 1.
    pub fn oracle_sign(&self) -> i8 {
        let (x0, x1) = sqrt_enclosure(2, 256);
        let (y0, y1) = sqrt_enclosure(3, 256);
        let mut lo = BigRational::from_integer(0.into());
        let mut hi = lo.clone();
        for &(c, i, j) in &self.0 {
            let mlo =
                num_traits::pow(x0.clone(), i as usize) * num_traits::pow(y0.clone(), j as usize);
            let mhi =
                num_traits::pow(x1.clone(), i as usize) * num_traits::pow(y1.clone(), j as usize);
            let c = BigRational::from_integer(c.into());
            if c >= BigRational::from_integer(0.into()) {
                lo += &c * mlo;
                hi += &c * mhi;
            } else {
                lo += &c * mhi;
                hi += &c * mlo;
            }
        }
        let zero = BigRational::from_integer(0.into());
        if lo > zero {
            1
        } else if hi < zero {
            -1
        } else {
            let eps = BigRational::new(1.into(), BigInt::from(1) << 100);
            assert!(hi - lo < eps, "enclosure too wide");
            0
        }
    }
}

/// [floor, floor + 1] * 2^-bits around sqrt(k).
pub fn sqrt_enclosure(k: u64, bits: u32) -> (BigRational, BigRational) {
    let scale = BigInt::from(1) << bits;
    let s = (BigInt::from(k) * &scale * &scale).sqrt();
    (
        BigRational::new(s.clone(), scale.clone()),
        BigRational::new(s + 1, scale),
    )
}

/// Seeded corpus of `n` polynomials, every fourth one a multiple of
/// x^2 - 2 or y^2 - 3 plus such a multiple.
pub fn sign_corpus(n: usize, seed: u64) -> Vec<SqrtPoly> {
    let mut rng = StdRng::seed_from_u64(seed);
    let random = |rng: &mut StdRng| {
        let k = rng.gen_range(1..=4);
        SqrtPoly(
            (0..k)
                .map(|_| {
                    let mut c = 0;
                    while c == 0 {
                        c = rng.gen_range(-5..=5);
                    }
                    (c, rng.gen_range(0..=2), rng.gen_range(0..=2))
                })
                .collect(),
        )
    };
    let rx = SqrtPoly(vec![(1, 2, 0), (-2, 0, 0)]);
    let ry = SqrtPoly(vec![(1, 0, 2), (-3, 0, 0)]);
    (0..n)
        .map(|i| {
            if i % 4 == 3 {
                let a = random(&mut rng).mul(&rx);
                let b = random(&mut rng).mul(&ry);
                SqrtPoly(a.0.into_iter().chain(b.0).collect())
            } else {
                random(&mut rng)
            }
        })
        .collect()
}
