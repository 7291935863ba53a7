//! Integer-linear forms over symbols, normalized atoms and their codes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ast::{Atom, Formula, Sym, Term};
use super::parse::parse_atom;
use crate::error::{Error, Result};

/// How terms denote group elements: sums with scalar multiples, or
/// products with exponents (written either way in the concrete syntax).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Additive,
    Multiplicative,
}

/// sum_i a_i x_i with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lin(pub BTreeMap<Sym, BigInt>);

impl Lin {
    pub fn zero() -> Lin {
        Lin(BTreeMap::new())
    }

    pub fn var(name: &str, c: impl Into<BigInt>) -> Lin {
        let mut l = Lin::zero();
        l.add_term(name, c.into());
        l
    }

    pub fn from_pairs(pairs: &[(&str, i64)]) -> Lin {
        let mut l = Lin::zero();
        for (v, c) in pairs {
            l.add_term(v, BigInt::from(*c));
        }
        l
    }

    pub fn add_term(&mut self, name: &str, c: BigInt) {
        let key = Sym::new(name);
        let v = self.0.remove(&key).unwrap_or_default() + c;
        if !v.is_zero() {
            self.0.insert(key, v);
        }
    }

    pub fn coeff(&self, name: &str) -> BigInt {
        self.0.get(&Sym::new(name)).cloned().unwrap_or_default()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.0.contains_key(&Sym::new(name))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.0.as_str())
    }

    pub fn scale(&self, c: &BigInt) -> Lin {
        if c.is_zero() {
            return Lin::zero();
        }
        Lin(self.0.iter().map(|(k, v)| (k.clone(), v * c)).collect())
    }

    pub fn add(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.add_term(&k.0, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Lin) -> Lin {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn without(&self, name: &str) -> Lin {
        let mut out = self.clone();
        out.0.remove(&Sym::new(name));
        out
    }

    pub fn content(&self) -> BigInt {
        self.0.values().fold(BigInt::zero(), |g, v| g.gcd(v))
    }

    /// Leading coefficient positive; with `gcd`, also primitive.
    pub fn normalized(&self, gcd: bool) -> Lin {
        let mut l = self.clone();
        if gcd {
            let g = l.content();
            if !g.is_zero() && !g.is_one() {
                l = Lin(l.0.into_iter().map(|(k, v)| (k, v / &g)).collect());
            }
        }
        match l.0.values().next() {
            Some(v) if v.is_negative() => l.scale(&BigInt::from(-1)),
            _ => l,
        }
    }

    /// Reduce coefficients into [0, m) and drop zeros.
    pub fn reduce_mod(&self, m: &BigInt) -> Lin {
        let mut out = Lin::zero();
        for (k, v) in &self.0 {
            out.add_term(&k.0, v.mod_floor(m));
        }
        out
    }

    pub fn rename(&self, from: &str, to: &str) -> Lin {
        let mut out = Lin::zero();
        for (k, v) in &self.0 {
            out.add_term(if k.0 == from { to } else { &k.0 }, v.clone());
        }
        out
    }

    /// Evaluate with integer values for the symbols.
    pub fn eval(&self, val: &dyn Fn(&str) -> BigInt) -> BigInt {
        self.0.iter().map(|(k, v)| v * val(&k.0)).sum()
    }

    pub fn to_term(&self) -> Term {
        if self.is_zero() {
            return Term::zero();
        }
        Term(
            self.0
                .iter()
                .map(|(k, v)| super::ast::Mono {
                    coeff: v.clone(),
                    factors: vec![k.0.clone()],
                })
                .collect(),
        )
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut s = String::new();
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                s.push(if v.is_negative() { '-' } else { '+' });
            } else if v.is_negative() {
                s.push('-');
            }
            let a = v.abs();
            if !a.is_one() {
                s.push_str(&a.to_string());
                s.push('*');
            }
            s.push_str(&k.0);
        }
        f.write_str(&s)
    }
}

pub fn term_to_lin(t: &Term, flavor: Flavor) -> Result<Lin> {
    let mut l = Lin::zero();
    for m in &t.0 {
        match (flavor, m.factors.len()) {
            (_, 0) if m.coeff.is_zero() => {}
            (Flavor::Multiplicative, 0) if m.coeff.is_one() => {}
            (_, 0) => {
                return Err(Error::Type(format!(
                    "constant {} is not a group element",
                    m.coeff
                )))
            }
            (Flavor::Additive, 1) => l.add_term(&m.factors[0], m.coeff.clone()),
            (Flavor::Additive, _) => {
                return Err(Error::Type(format!(
                    "product {} in an additive group",
                    m.factors.join("*")
                )))
            }
            (Flavor::Multiplicative, _) => {
                for f in &m.factors {
                    l.add_term(f, m.coeff.clone());
                }
            }
        }
    }
    Ok(l)
}

/// lhs - rhs of an atom.
pub fn atom_to_lin(a: &Atom, flavor: Flavor) -> Result<Lin> {
    Ok(term_to_lin(&a.lhs, flavor)?.sub(&term_to_lin(&a.rhs, flavor)?))
}

/// Literal `lin = 0` (positive) or `lin != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinLit {
    pub lin: Lin,
    pub positive: bool,
}

impl LinLit {
    pub fn eq(lin: Lin) -> Self {
        LinLit {
            lin,
            positive: true,
        }
    }

    pub fn ne(lin: Lin) -> Self {
        LinLit {
            lin,
            positive: false,
        }
    }

    pub fn to_formula(&self) -> Formula {
        let (lhs, rhs) = split_sides(&self.lin);
        let a = Formula::eq(lhs, rhs);
        if self.positive {
            a
        } else {
            Formula::not(a)
        }
    }
}

/// Write lin = 0 as (positive part) = (negated negative part).
fn split_sides(lin: &Lin) -> (Term, Term) {
    let mut pos = Lin::zero();
    let mut neg = Lin::zero();
    for (k, v) in &lin.0 {
        if v.is_negative() {
            neg.add_term(&k.0, -v);
        } else {
            pos.add_term(&k.0, v.clone());
        }
    }
    (pos.to_term(), neg.to_term())
}

impl fmt::Display for LinLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}0", self.lin, if self.positive { "=" } else { "!=" })
    }
}

/// Canonical code of an atom: sorted symbols, sign-normalized, and
/// gcd-normalized in the additive flavor.
pub fn encode_atom(lin: &Lin, flavor: Flavor) -> String {
    let n = lin.normalized(flavor == Flavor::Additive);
    format!("{n}=0")
}

pub fn decode_atom(code: &str, flavor: Flavor) -> Result<Lin> {
    let bad = || Error::MalformedCode(code.to_string());
    let atom = parse_atom(code).map_err(|_| bad())?;
    let lin = atom_to_lin(&atom, flavor).map_err(|_| bad())?;
    if encode_atom(&lin, flavor) != code {
        return Err(bad());
    }
    Ok(lin)
}
