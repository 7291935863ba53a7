//! Modular arithmetic on arbitrary-precision integers and the generator
//! ladder q_1, q_2, ... of (Z/p^n)^x.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigInt,
    modulus: BigInt,
}

impl Residue {
    pub fn new(value: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Self {
        let modulus = modulus.into();
        assert!(modulus.is_positive(), "modulus must be positive");
        let value = value.into().mod_floor(&modulus);
        Residue { value, modulus }
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn add(&self, other: &Residue) -> Residue {
        debug_assert_eq!(self.modulus, other.modulus);
        Residue::new(&self.value + &other.value, self.modulus.clone())
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        debug_assert_eq!(self.modulus, other.modulus);
        Residue::new(&self.value * &other.value, self.modulus.clone())
    }

    pub fn neg(&self) -> Residue {
        Residue::new(-&self.value, self.modulus.clone())
    }

    pub fn pow(&self, e: &BigInt) -> Result<Residue> {
        if e.is_negative() {
            let inv = mod_inv(&self.value, &self.modulus)?;
            return inv.pow(&-e);
        }
        Ok(Residue {
            value: self.value.modpow(e, &self.modulus),
            modulus: self.modulus.clone(),
        })
    }

    pub fn inv(&self) -> Result<Residue> {
        mod_inv(&self.value, &self.modulus)
    }
}

/// Extended Euclid: returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
pub fn egcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if a.is_zero() && b.is_zero() {
        return (BigInt::zero(), BigInt::zero(), BigInt::zero());
    }
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

pub fn mod_inv(a: &BigInt, m: &BigInt) -> Result<Residue> {
    let (g, x, _) = egcd(&a.mod_floor(m), m);
    if !g.is_one() {
        return Err(Error::NotAUnit(a.to_string(), m.to_string()));
    }
    Ok(Residue::new(x, m.clone()))
}

pub fn p_valuation(b: &BigInt, p: u64) -> Result<u32> {
    if b.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = BigInt::from(p);
    let mut b = b.abs();
    let mut e = 0;
    loop {
        let (q, r) = b.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        b = q;
        e += 1;
    }
}

/// p-adic valuation where 0 maps to None.
pub fn valuation_or_inf(b: &BigInt, p: u64) -> Option<u32> {
    p_valuation(b, p).ok()
}

pub fn pow_u(p: u64, n: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), n as usize)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The i-th prime, 0-based: 2, 3, 5, ...
pub fn nth_prime(i: usize) -> u64 {
    static PRIMES: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();
    let mut ps = PRIMES.get_or_init(|| Mutex::new(vec![2])).lock().unwrap();
    let mut c = *ps.last().unwrap();
    while ps.len() <= i {
        c += 1;
        if is_prime(c) {
            ps.push(c);
        }
    }
    ps[i]
}

pub fn prime_index(p: u64) -> Option<usize> {
    if !is_prime(p) {
        return None;
    }
    (0..).find(|&i| nth_prime(i) == p)
}

/// Trial-division factorization of |n| into (prime, exponent), ascending.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e > 0 {
            out.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn totient(m: &BigInt) -> BigInt {
    factorize(m).into_iter().fold(BigInt::one(), |acc, (q, e)| {
        acc * (&q - 1) * num_traits::pow(q, e as usize - 1)
    })
}

pub fn order_mod(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    if m.is_one() {
        return Ok(BigInt::one());
    }
    if !a.gcd(m).is_one() {
        return Err(Error::NotAUnit(a.to_string(), m.to_string()));
    }
    let a = a.mod_floor(m);
    let mut ord = totient(m);
    for (q, _) in factorize(&ord.clone()) {
        while (&ord % &q).is_zero() && a.modpow(&(&ord / &q), m).is_one() {
            ord /= &q;
        }
    }
    Ok(ord)
}

pub fn least_generator(p: u64) -> u64 {
    let m = BigInt::from(p);
    let target = BigInt::from(p - 1);
    (2..p.max(3))
        .find(|&g| {
            order_mod(&BigInt::from(g), &m)
                .map(|o| o == target)
                .unwrap_or(false)
        })
        .unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorLadder {
    pub p: u64,
    pub entries: Vec<BigInt>,
}

impl GeneratorLadder {
    /// q_n, 1-based.
    pub fn q(&self, n: usize) -> &BigInt {
        &self.entries[n - 1]
    }
}

type LadderCache = Mutex<HashMap<u64, Vec<BigInt>>>;

fn ladder_cache() -> &'static LadderCache {
    static CACHE: OnceLock<LadderCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Fails for p = 2 past depth 2, where (Z/2^n)^x is not cyclic.
pub fn generator_ladder(p: u64, depth: usize) -> Result<GeneratorLadder> {
    assert!(depth >= 1);
    if p == 2 && depth > 2 {
        return Err(Error::Unsupported(format!(
            "(Z/2^{depth})^x has no generator"
        )));
    }
    let mut cache = ladder_cache().lock().unwrap();
    let entries = cache
        .entry(p)
        .or_insert_with(|| vec![BigInt::from(least_generator(p))]);
    while entries.len() < depth {
        let n = entries.len() as u32;
        let pn = pow_u(p, n);
        let pn1 = &pn * p;
        let order = &pn1 - &pn;
        let prev = entries.last().unwrap().clone();
        let next = (0..p)
            .map(|k| &prev + &pn * k)
            .find(|c| order_mod(c, &pn1).map(|o| o == order).unwrap_or(false))
            .expect("every generator mod p^n has a generating lift");
        entries.push(next);
    }
    Ok(GeneratorLadder {
        p,
        entries: entries[..depth].to_vec(),
    })
}

pub fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().expect("value fits in u64")
}
