//! Z_p^+ as coherent residue sequences, and the linear solver for
//! sum a_i F_i = b G.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::residue::{mod_inv, p_valuation, pow_u};
use crate::tree::{
    apart_semidecide, tuples, Apartness, ClopenSet, Label, Path, PrefixFunctional, Step,
    TreePresentation,
};

/// Element of Z_p^+: level n carries k_n in [0, p^n).
#[derive(Clone)]
pub struct PadicInt {
    pub p: u64,
    path: Path,
    /// Rational value when the element is known to be one (integers, rationals, and their combinations).
    exact: Option<BigRational>,
}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z{}{:?}", self.p, self.prefix(4))
    }
}

pub fn pres_id(p: u64) -> String {
    format!("Z{p}+")
}

/// Reduce a rational with unit denominator modulo m.
pub fn rational_mod(q: &BigRational, m: &BigInt) -> Option<BigInt> {
    let inv = mod_inv(q.denom(), m).ok()?;
    Some((q.numer() * inv.value()).mod_floor(m))
}

impl PadicInt {
    pub fn from_path(p: u64, path: Path) -> Self {
        PadicInt {
            p,
            path,
            exact: None,
        }
    }

    pub fn from_fn(p: u64, f: impl Fn(usize) -> Label + Send + Sync + 'static) -> Self {
        PadicInt::from_path(p, Path::new(pres_id(p), f))
    }

    pub fn from_integer(p: u64, z: impl Into<BigInt>) -> Self {
        let z: BigInt = z.into();
        let q = BigRational::from_integer(z.clone());
        PadicInt {
            p,
            path: Path::new(pres_id(p), move |n| z.mod_floor(&pow_u(p, n as u32))),
            exact: Some(q),
        }
    }

    pub fn from_rational(p: u64, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() || (&den % p).is_zero() {
            return Err(Error::DenominatorNotUnit(den.to_string(), p));
        }
        Ok(Self::from_exact(p, BigRational::new(num, den)))
    }

    fn from_exact(p: u64, q: BigRational) -> Self {
        let q2 = q.clone();
        PadicInt {
            p,
            path: Path::new(pres_id(p), move |n| {
                rational_mod(&q2, &pow_u(p, n as u32)).expect("denominator is a p-adic unit")
            }),
            exact: Some(q),
        }
    }

    pub fn zero(p: u64) -> Self {
        Self::from_integer(p, 0)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn label(&self, n: usize) -> Label {
        self.path.label(n)
    }

    pub fn prefix(&self, n: usize) -> Vec<Label> {
        self.path.prefix(n)
    }

    fn check(&self, other: &PadicInt) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn add(&self, other: &PadicInt) -> Result<PadicInt> {
        self.check(other)?;
        Ok(linear_combination(
            self.p,
            &[BigInt::one(), BigInt::one()],
            &[self.clone(), other.clone()],
        ))
    }

    pub fn neg(&self) -> PadicInt {
        self.scalar_mul(&BigInt::from(-1))
    }

    pub fn sub(&self, other: &PadicInt) -> Result<PadicInt> {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, c: &BigInt) -> PadicInt {
        linear_combination(self.p, &[c.clone()], &[self.clone()])
    }

    /// Labels differ at some level <= fuel.
    pub fn apart(&self, other: &PadicInt, fuel: usize) -> Apartness {
        apart_semidecide(&self.path, &other.path, fuel)
    }
}

/// sum c_i x_i, computed levelwise.
pub fn linear_combination(p: u64, coeffs: &[BigInt], xs: &[PadicInt]) -> PadicInt {
    assert_eq!(coeffs.len(), xs.len());
    let exact = xs
        .iter()
        .zip(coeffs)
        .try_fold(BigRational::zero(), |acc, (x, c)| {
            x.exact
                .as_ref()
                .map(|q| acc + q * BigRational::from_integer(c.clone()))
        });
    let coeffs = coeffs.to_vec();
    let paths: Vec<Path> = xs.iter().map(|x| x.path.clone()).collect();
    PadicInt {
        p,
        path: Path::new(pres_id(p), move |n| {
            let m = pow_u(p, n as u32);
            paths
                .iter()
                .zip(&coeffs)
                .fold(BigInt::zero(), |acc, (x, c)| acc + c * x.label(n))
                .mod_floor(&m)
        }),
        exact,
    }
}

/// The coherent presentation T_p^+ with +, - and 0.
pub fn zp_plus_presentation(p: u64) -> TreePresentation {
    let validator = move |node: &[Label]| {
        node.iter().enumerate().all(|(i, k)| {
            let m = pow_u(p, i as u32 + 1);
            !k.is_negative()
                && k < &m
                && (i == 0 || k.mod_floor(&pow_u(p, i as u32)) == node[i - 1])
        })
    };
    let branching = move |node: &[Label]| {
        let l = node.len() as u32;
        let base = node.last().cloned().unwrap_or_default();
        (0..p).map(|j| &base + pow_u(p, l) * j).collect()
    };
    let add = PrefixFunctional::levelwise("+", 2, move |x, n| {
        (&x[0] + &x[1]).mod_floor(&pow_u(p, n as u32))
    });
    let neg =
        PrefixFunctional::levelwise("-", 1, move |x, n| (-&x[0]).mod_floor(&pow_u(p, n as u32)));
    let zero = PrefixFunctional::levelwise("0", 0, |_, _| BigInt::zero());
    TreePresentation::new(pres_id(p), validator, branching, vec![add, neg, zero])
}

/// The digit presentation (Z/p)^omega with carry addition.
pub fn digit_presentation(p: u64) -> TreePresentation {
    let validator = move |node: &[Label]| {
        node.iter()
            .all(|d| !d.is_negative() && d < &BigInt::from(p))
    };
    let branching = move |_: &[Label]| (0..p).map(BigInt::from).collect();
    let carry = |p: u64, f: fn(&BigInt, &BigInt) -> BigInt| {
        move |ins: &[Vec<Label>], level: usize| {
            if ins.iter().any(|d| d.len() < level) {
                return Step::NeedMore(level);
            }
            let xs: Vec<BigInt> = ins.iter().map(|d| digits_value(p, &d[..level])).collect();
            let v = match xs.len() {
                0 => BigInt::zero(),
                1 => f(&xs[0], &BigInt::zero()),
                _ => f(&xs[0], &xs[1]),
            };
            let m = pow_u(p, level as u32);
            let digit = v.mod_floor(&m) / pow_u(p, level as u32 - 1);
            Step::Emit {
                label: digit,
                used: level,
            }
        }
    };
    let add = PrefixFunctional::new("+", 2, carry(p, |a, b| a + b));
    let neg = PrefixFunctional::new("-", 1, carry(p, |a, _| -a));
    let zero = PrefixFunctional::levelwise("0", 0, |_, _| BigInt::zero());
    TreePresentation::new(format!("D{p}"), validator, branching, vec![add, neg, zero])
}

fn digits_value(p: u64, digits: &[Label]) -> BigInt {
    digits
        .iter()
        .enumerate()
        .fold(BigInt::zero(), |acc, (i, d)| acc + d * pow_u(p, i as u32))
}

/// Digit path to coherent path: (j_0, j_0 + j_1 p, ...).
pub fn digits_to_coherent_functional(p: u64) -> PrefixFunctional {
    PrefixFunctional::new("digits->coherent", 1, move |ins, level| {
        if ins[0].len() < level {
            return Step::NeedMore(level);
        }
        Step::Emit {
            label: digits_value(p, &ins[0][..level]),
            used: level,
        }
    })
}

pub fn coherent_to_digits_functional(p: u64) -> PrefixFunctional {
    PrefixFunctional::levelwise("coherent->digits", 1, move |x, n| {
        x[0].mod_floor(&pow_u(p, n as u32)) / pow_u(p, n as u32 - 1)
    })
}

pub fn digits_to_coherent(p: u64, digits: &Path) -> PadicInt {
    PadicInt::from_path(
        p,
        digits_to_coherent_functional(p).apply(pres_id(p), vec![digits.clone()]),
    )
}

pub fn coherent_to_digits(x: &PadicInt) -> Path {
    coherent_to_digits_functional(x.p).apply(format!("D{}", x.p), vec![x.path.clone()])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEquation {
    pub coeffs: Vec<BigInt>,
    pub b: BigInt,
}

impl LinearEquation {
    pub fn new(coeffs: Vec<i64>, b: i64) -> Self {
        LinearEquation {
            coeffs: coeffs.into_iter().map(BigInt::from).collect(),
            b: BigInt::from(b),
        }
    }

    /// Same solution set with b >= 0.
    pub fn normalized(&self) -> LinearEquation {
        if self.b.is_negative() {
            LinearEquation {
                coeffs: self.coeffs.iter().map(|a| -a).collect(),
                b: -&self.b,
            }
        } else {
            self.clone()
        }
    }
}

/// Obligation left by b = 0: the equation holds iff the left side is 0.
#[derive(Debug, Clone)]
pub struct ZeroObligation {
    pub lhs: PadicInt,
}

impl ZeroObligation {
    /// Witness(level) refutes the obligation; Unknown means it held up to fuel.
    pub fn refute(&self, fuel: usize) -> Apartness {
        self.lhs.apart(&PadicInt::zero(self.lhs.p), fuel)
    }
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    NoSolution,
    Unique(PadicInt),
    AllSolutions(ZeroObligation),
}

pub fn solve_linear(eq: &LinearEquation, f: &[PadicInt]) -> Result<SolveOutcome> {
    if eq.coeffs.len() != f.len() {
        return Err(Error::ArityMismatch {
            expected: eq.coeffs.len(),
            got: f.len(),
        });
    }
    let p = match f.first() {
        Some(x) => x.p,
        None => {
            return Err(Error::Unsupported(
                "solver needs at least one input to fix p".into(),
            ))
        }
    };
    if let Some(x) = f.iter().find(|x| x.p != p) {
        return Err(Error::PrimeMismatch(p, x.p));
    }
    let eq = eq.normalized();
    let lhs = linear_combination(p, &eq.coeffs, f);
    if eq.b.is_zero() {
        return Ok(SolveOutcome::AllSolutions(ZeroObligation { lhs }));
    }
    Ok(solve_scaled(p, &eq.b, &lhs))
}

/// Solve b G = F for a single path F (b != 0).
pub fn solve_scaled(p: u64, b: &BigInt, lhs: &PadicInt) -> SolveOutcome {
    let (b, lhs) = if b.is_negative() {
        (-b, lhs.neg())
    } else {
        (b.clone(), lhs.clone())
    };
    let e = p_valuation(&b, p).expect("b is nonzero");
    let pe = pow_u(p, e);
    if e > 0 && !(lhs.label(e as usize) % &pe).is_zero() {
        return SolveOutcome::NoSolution;
    }
    let unit = &b / &pe;
    let exact = lhs
        .exact
        .as_ref()
        .map(|q| q / BigRational::from_integer(b.clone()));
    let src = lhs.clone();
    let path = Path::new(pres_id(p), move |n| {
        let top = src.label(n + e as usize);
        let (q, r) = top.div_rem(&pe);
        assert!(r.is_zero(), "p^e divides F(n+e) once it divides F(e)");
        let m = pow_u(p, n as u32);
        let c = mod_inv(&unit, &m).expect("b / p^e is a unit");
        (c.value() * q).mod_floor(&m)
    });
    SolveOutcome::Unique(PadicInt { p, path, exact })
}

/// Tuples at level e with p^e | sum a_i r_i; the whole space when e = 0.
pub fn clopen_of_equation(eq: &LinearEquation, p: u64) -> Result<ClopenSet> {
    if eq.b.is_zero() {
        return Err(Error::ZeroRhs);
    }
    let n = eq.coeffs.len();
    let e = p_valuation(&eq.b, p)?;
    if e == 0 {
        return Ok(ClopenSet::full(n));
    }
    let pe = pow_u(p, e);
    let entries = tuples(&pe, n)
        .into_iter()
        .filter(|r| {
            let s: BigInt = r.iter().zip(&eq.coeffs).map(|(x, a)| x * a).sum();
            (s % &pe).is_zero()
        })
        .map(|r| (e as usize, r))
        .collect();
    Ok(ClopenSet { arity: n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn constructors() {
        assert_eq!(PadicInt::from_integer(3, 0).prefix(3), labels(&[0, 0, 0]));
        assert_eq!(
            PadicInt::from_integer(3, 5).prefix(4),
            labels(&[2, 5, 5, 5])
        );
        assert_eq!(
            PadicInt::from_integer(2, -1).prefix(4),
            labels(&[1, 3, 7, 15])
        );
        assert_eq!(
            PadicInt::from_rational(3, 1, 2).unwrap().prefix(3),
            labels(&[2, 5, 14])
        );
        assert!(matches!(
            PadicInt::from_rational(2, 1, 2),
            Err(Error::DenominatorNotUnit(..))
        ));
        assert_eq!(
            PadicInt::from_rational(3, 1, 1).unwrap().prefix(6),
            PadicInt::from_integer(3, 1).prefix(6)
        );
    }

    #[test]
    fn group_ops() {
        let x = PadicInt::from_rational(5, -7, 3).unwrap();
        let z = PadicInt::zero(5);
        assert_eq!(x.add(&z).unwrap().prefix(8), x.prefix(8));
        assert_eq!(x.add(&x.neg()).unwrap().prefix(8), z.prefix(8));
        let half = PadicInt::from_rational(3, 1, 2).unwrap();
        assert_eq!(
            half.scalar_mul(&BigInt::from(2)).prefix(8),
            PadicInt::from_integer(3, 1).prefix(8)
        );
        assert!(matches!(x.add(&half), Err(Error::PrimeMismatch(5, 3))));
    }

    #[test]
    fn digits() {
        let zero = Path::new("D3", |_| BigInt::zero());
        assert_eq!(
            digits_to_coherent(3, &zero).prefix(4),
            labels(&[0, 0, 0, 0])
        );
        let d = Path::from_labels("D3", labels(&[2, 1]), |_| BigInt::zero());
        assert_eq!(digits_to_coherent(3, &d).prefix(3), labels(&[2, 5, 5]));
        let x = PadicInt::from_integer(3, -40);
        let back = digits_to_coherent(3, &coherent_to_digits(&x));
        assert_eq!(back.prefix(12), x.prefix(12));
    }

    #[test]
    fn presentations_are_extendible() {
        for p in [2u64, 3] {
            for pres in [zp_plus_presentation(p), digit_presentation(p)] {
                let mut frontier = vec![Vec::<BigInt>::new()];
                for _ in 0..4 {
                    let mut next = Vec::new();
                    for node in &frontier {
                        assert!(pres.is_valid(node));
                        let kids: Vec<_> = pres
                            .children(node)
                            .into_iter()
                            .map(|c| {
                                let mut n2 = node.clone();
                                n2.push(c);
                                n2
                            })
                            .filter(|n2| pres.is_valid(n2))
                            .collect();
                        assert!(!kids.is_empty());
                        next.extend(kids);
                    }
                    frontier = next;
                }
                assert_eq!(frontier.len(), (p as usize).pow(4));
            }
        }
    }

    #[test]
    fn solver_examples() {
        let one = PadicInt::from_integer(3, 1);
        match solve_linear(&LinearEquation::new(vec![1], 2), &[one.clone()]).unwrap() {
            SolveOutcome::Unique(g) => assert_eq!(g.prefix(4), labels(&[2, 5, 14, 41])),
            o => panic!("{o:?}"),
        }
        match solve_linear(
            &LinearEquation::new(vec![1], 3),
            &[PadicInt::from_integer(3, 3)],
        )
        .unwrap()
        {
            SolveOutcome::Unique(g) => {
                assert_eq!(g.prefix(6), PadicInt::from_integer(3, 1).prefix(6))
            }
            o => panic!("{o:?}"),
        }
        assert!(matches!(
            solve_linear(&LinearEquation::new(vec![1], 3), &[one.clone()]).unwrap(),
            SolveOutcome::NoSolution
        ));
        match solve_linear(
            &LinearEquation::new(vec![1, -1], 0),
            &[one.clone(), one.clone()],
        )
        .unwrap()
        {
            SolveOutcome::AllSolutions(ob) => assert_eq!(ob.refute(20), Apartness::Unknown),
            o => panic!("{o:?}"),
        }
        assert!(matches!(
            solve_linear(&LinearEquation::new(vec![1, 1], 2), &[one]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn equation_clopens() {
        assert!(clopen_of_equation(&LinearEquation::new(vec![1, 2], 5), 3)
            .unwrap()
            .is_full());
        let c = clopen_of_equation(&LinearEquation::new(vec![1], 3), 3).unwrap();
        assert_eq!(c.entries, vec![(1, labels(&[0]))]);
        let c = clopen_of_equation(&LinearEquation::new(vec![2], 9), 3).unwrap();
        assert_eq!(c.entries, vec![(2, labels(&[0]))]);
        assert_eq!(
            clopen_of_equation(&LinearEquation::new(vec![2], 0), 3),
            Err(Error::ZeroRhs)
        );
    }
}
