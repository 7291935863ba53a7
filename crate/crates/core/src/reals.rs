//! The reals as fast-converging Cauchy sequences of rationals modulo
//! equivalence, and sign decisions for polynomials at real parameters.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::formula::normal::qf_to_bool;
use crate::formula::{Formula, Term};

pub const REAL_ID: &str = "R";

fn two_pow(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << n)
}

fn ceil_abs(q: &BigRational) -> BigInt {
    q.abs().ceil().to_integer()
}

/// Level n (n >= 1) carries q_n with |q_j - q_k| <= 1/2^j for j < k.
#[derive(Clone)]
pub struct FastCauchyReal {
    f: Arc<dyn Fn(usize) -> BigRational + Send + Sync>,
    memo: Arc<Mutex<HashMap<usize, BigRational>>>,
}

impl fmt::Debug for FastCauchyReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real(~{})", self.approx(20))
    }
}

impl FastCauchyReal {
    pub fn new(f: impl Fn(usize) -> BigRational + Send + Sync + 'static) -> Self {
        FastCauchyReal {
            f: Arc::new(f),
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::new(move |_| q.clone())
    }

    pub fn from_integer(z: impl Into<BigInt>) -> Self {
        Self::from_rational(BigRational::from_integer(z.into()))
    }

    /// Decimal expansion; digits past the end of the string are zero.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let t = text.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("not a decimal: {t}"),
            });
        }
        let int: BigInt = if int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().unwrap()
        };
        let frac: Vec<u8> = frac.bytes().map(|b| b - b'0').collect();
        Ok(Self::new(move |n| {
            // 10^-d <= 2^-n once d >= 0.302 n; truncation error is below 10^-d.
            let d = (n * 31).div_ceil(100) + 1;
            let mut num = int.clone();
            for i in 0..d {
                num = num * 10 + frac.get(i).copied().unwrap_or(0);
            }
            let q = BigRational::new(num, BigInt::from(10).pow(d as u32));
            if neg {
                -q
            } else {
                q
            }
        }))
    }

    pub fn at(&self, n: usize) -> BigRational {
        assert!(n >= 1, "levels start at 1");
        if let Some(q) = self.memo.lock().unwrap().get(&n) {
            return q.clone();
        }
        let q = (self.f)(n);
        self.memo.lock().unwrap().insert(n, q.clone());
        q
    }

    pub fn approx(&self, n: usize) -> f64 {
        self.at(n).to_f64().unwrap_or(f64::NAN)
    }

    pub fn neg(&self) -> Self {
        let x = self.clone();
        Self::new(move |n| -x.at(n))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (x, y) = (self.clone(), other.clone());
        Self::new(move |n| x.at(n + 2) + y.at(n + 2))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (x, y) = (self.clone(), other.clone());
        let b: BigInt = ceil_abs(&x.at(1)) + ceil_abs(&y.at(1)) + 2;
        let extra = b.bits() as usize; // ceil(log2(B+1))
        Self::new(move |n| {
            let m = n + 2 + extra;
            x.at(m) * y.at(m)
        })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        self.mul(&Self::from_integer(c.clone()))
    }
}

/// Newton iterates for sqrt(k) from 3/2; level n is the first iterate x
/// with x^2 >= k and x - k/x <= 2^-(n+1).
pub fn newton_sqrt(k: u64) -> FastCauchyReal {
    assert!(k > 0, "square root of a positive integer");
    let kq = BigRational::from_integer(BigInt::from(k));
    let iterates: Arc<Mutex<Vec<BigRational>>> =
        Arc::new(Mutex::new(vec![BigRational::new(3.into(), 2.into())]));
    FastCauchyReal::new(move |n| {
        let tol = two_pow(n + 1).recip();
        let mut its = iterates.lock().unwrap();
        let mut i = 0;
        loop {
            if i == its.len() {
                let x = its[i - 1].clone();
                let next = (&x + &kq / &x) / BigRational::from_integer(2.into());
                its.push(next);
            }
            let x = &its[i];
            if x * x >= kq && x - &kq / x <= tol {
                return x.clone();
            }
            i += 1;
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equiv {
    Apart(usize),
    Unknown,
}

/// Least n <= fuel with |x_n - y_n| > 2/2^n.
pub fn equiv_semidecide(x: &FastCauchyReal, y: &FastCauchyReal, fuel: usize) -> Equiv {
    (1..=fuel)
        .find(|&n| (x.at(n) - y.at(n)).abs() > BigRational::from_integer(2.into()) / two_pow(n))
        .map_or(Equiv::Unknown, Equiv::Apart)
}

/// Worst observed violation of the fast-convergence modulus up to `depth`
/// (none means the invariant holds on all pairs j < k <= depth).
pub fn convergence_violation(x: &FastCauchyReal, depth: usize) -> Option<(usize, usize)> {
    for j in 1..=depth {
        for k in j + 1..=depth {
            if (x.at(j) - x.at(k)).abs() > two_pow(j).recip() {
                return Some((j, k));
            }
        }
    }
    None
}

/// Integer polynomial: exponent vector over the parameter list -> coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        let v = self.terms.remove(&e).unwrap_or_default() + c;
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&BigInt::from(-1)))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    fn leading(&self) -> Option<(&Vec<u32>, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Pseudo-remainder by the basis in lexicographic order: each step
    /// scales by a nonzero integer, which leaves the zero set unchanged.
    pub fn reduce(&self, basis: &[Poly]) -> Poly {
        let mut h = self.clone();
        let mut out = Poly::zero(self.nvars);
        while let Some((e, c)) = h.leading().map(|(e, c)| (e.clone(), c.clone())) {
            let divisor = basis.iter().find(|g| {
                g.leading()
                    .is_some_and(|(ge, _)| ge.iter().zip(&e).all(|(a, b)| a <= b))
            });
            match divisor {
                Some(g) => {
                    let (ge, gc) = g.leading().unwrap();
                    let shift: Vec<u32> = e.iter().zip(ge).map(|(a, b)| a - b).collect();
                    let l = c.lcm(gc);
                    let hs = &l / &c;
                    let gs = &l / gc;
                    let mut mono = Poly::zero(self.nvars);
                    mono.add_term(shift, gs);
                    h = h.scale(&hs).sub(&g.mul(&mono));
                    out = out.scale(&hs);
                }
                None => {
                    h.terms.remove(&e);
                    out.add_term(e, c);
                }
            }
        }
        out
    }

    /// Interval enclosing the values on the box |X_i - x_i| <= r.
    pub fn enclose(
        &self,
        center: &[BigRational],
        radius: &BigRational,
    ) -> (BigRational, BigRational) {
        let boxes: Vec<(BigRational, BigRational)> =
            center.iter().map(|c| (c - radius, c + radius)).collect();
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (e, c) in &self.terms {
            let mut iv = (BigRational::one(), BigRational::one());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    iv = imul(&iv, &boxes[i]);
                }
            }
            let cq = BigRational::from_integer(c.clone());
            let t = imul(&iv, &(cq.clone(), cq));
            lo += t.0;
            hi += t.1;
        }
        (lo, hi)
    }

    pub fn eval_rational(&self, xs: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (x, &k) in xs.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            s += t;
        }
        s
    }
}

fn imul(
    a: &(BigRational, BigRational),
    b: &(BigRational, BigRational),
) -> (BigRational, BigRational) {
    let c = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = c.iter().min().unwrap().clone();
    let hi = c.iter().max().unwrap().clone();
    (lo, hi)
}

/// Ring term over the named parameters as a polynomial.
pub fn poly_of_term(t: &Term, names: &[String]) -> Result<Poly> {
    let n = names.len();
    let mut out = Poly::zero(n);
    for m in &t.0 {
        let mut e = vec![0u32; n];
        for f in &m.factors {
            let i = names
                .iter()
                .position(|x| x == f)
                .ok_or_else(|| Error::Type(format!("unknown real parameter {f}")))?;
            e[i] += 1;
        }
        out.add_term(e, m.coeff.clone());
    }
    Ok(out)
}

/// Polynomial relations known to vanish at the parameters.
#[derive(Debug, Clone)]
pub struct RealDiagram {
    pub names: Vec<String>,
    pub basis: Vec<Poly>,
}

impl RealDiagram {
    pub fn entails_zero(&self, h: &Poly) -> bool {
        h.is_zero() || h.reduce(&self.basis).is_zero()
    }

    /// One polynomial per line, written as a ring term or an equation.
    pub fn parse(text: &str, names: &[String]) -> Result<Self> {
        let mut basis = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let p = match crate::formula::parse_atom(line) {
                Ok(a) => poly_of_term(&a.lhs, names)?.sub(&poly_of_term(&a.rhs, names)?),
                Err(_) => poly_of_term(&crate::formula::parse_term(line)?, names)?,
            };
            basis.push(p);
        }
        Ok(RealDiagram {
            names: names.to_vec(),
            basis,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignResult {
    Negative(usize),
    Zero,
    Positive(usize),
}

/// Zero when the diagram certifies it, otherwise the sign read off
/// interval enclosures at increasing levels.
pub fn sign_decide(
    h: &Poly,
    xs: &[FastCauchyReal],
    d: &RealDiagram,
    fuel: usize,
) -> Result<SignResult> {
    if h.nvars != xs.len() {
        return Err(Error::ArityMismatch {
            expected: h.nvars,
            got: xs.len(),
        });
    }
    if d.entails_zero(h) {
        return Ok(SignResult::Zero);
    }
    for n in 1..=fuel {
        let center: Vec<BigRational> = xs.iter().map(|x| x.at(n)).collect();
        let (lo, hi) = h.enclose(&center, &two_pow(n).recip());
        if lo.is_positive() {
            return Ok(SignResult::Positive(n));
        }
        if hi.is_negative() {
            return Ok(SignResult::Negative(n));
        }
    }
    Err(Error::FuelExhausted(fuel))
}

/// Quantifier-free sentence over ring terms: each atom l = r holds iff
/// l - r has sign Zero.
pub fn decide_qf_real(
    f: &Formula,
    xs: &[FastCauchyReal],
    d: &RealDiagram,
    fuel: usize,
) -> Result<bool> {
    if !f.is_quantifier_free() {
        return Err(Error::Unsupported("quantifiers over the reals".into()));
    }
    let b = qf_to_bool(f)?;
    b.eval(&mut |a| {
        let h = poly_of_term(&a.lhs, &d.names)?.sub(&poly_of_term(&a.rhs, &d.names)?);
        Ok(sign_decide(&h, xs, d, fuel)? == SignResult::Zero)
    })
}
