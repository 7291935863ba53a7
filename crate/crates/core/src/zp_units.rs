//! Z_p^x through the isomorphism with Z/(p-1) x Z_p^+ (Z/2 x Z_2^+ when p = 2).

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::residue::{generator_ladder, mod_inv, pow_u, GeneratorLadder};
use crate::tree::{Label, Path, PrefixFunctional, TreePresentation};
use crate::zp_add::PadicInt;

/// Order of the torsion factor: p - 1 for odd p, 2 for p = 2.
pub fn torsion_order(p: u64) -> u64 {
    if p == 2 {
        2
    } else {
        p - 1
    }
}

#[derive(Clone)]
pub struct UnitPadic {
    pub p: u64,
    pub x: BigInt,
    pub y: PadicInt,
}

impl fmt::Debug for UnitPadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unit{}(x={}, y={:?})", self.p, self.x, self.y.prefix(4))
    }
}

#[derive(Clone, Debug)]
pub struct UnitLabelPath {
    pub p: u64,
    pub path: Path,
}

pub fn units_pres_id(p: u64) -> String {
    format!("Z{p}x")
}

impl UnitLabelPath {
    pub fn new(p: u64, path: Path) -> Self {
        UnitLabelPath { p, path }
    }

    /// Units given by a rational with unit numerator and denominator.
    pub fn from_padic(x: &PadicInt) -> Result<Self> {
        if (x.label(1) % x.p).is_zero() {
            return Err(Error::NotAUnit(format!("{:?}", x), x.p.to_string()));
        }
        Ok(UnitLabelPath {
            p: x.p,
            path: x.path().clone(),
        })
    }

    pub fn label(&self, n: usize) -> Label {
        self.path.label(n)
    }

    pub fn prefix(&self, n: usize) -> Vec<Label> {
        self.path.prefix(n)
    }
}

impl UnitPadic {
    pub fn new(p: u64, x: impl Into<BigInt>, y: PadicInt) -> Result<Self> {
        if y.p != p {
            return Err(Error::PrimeMismatch(p, y.p));
        }
        Ok(UnitPadic {
            p,
            x: x.into().mod_floor(&BigInt::from(torsion_order(p))),
            y,
        })
    }

    pub fn identity(p: u64) -> Self {
        UnitPadic {
            p,
            x: BigInt::zero(),
            y: PadicInt::zero(p),
        }
    }

    fn check(&self, other: &UnitPadic) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }
}

pub fn unit_mul(u: &UnitPadic, v: &UnitPadic) -> Result<UnitPadic> {
    u.check(v)?;
    UnitPadic::new(u.p, &u.x + &v.x, u.y.add(&v.y)?)
}

pub fn unit_inv(u: &UnitPadic) -> UnitPadic {
    UnitPadic::new(u.p, -&u.x, u.y.neg()).expect("same prime")
}

pub fn unit_pow(u: &UnitPadic, m: &BigInt) -> UnitPadic {
    UnitPadic::new(u.p, &u.x * m, u.y.scalar_mul(m)).expect("same prime")
}

fn odd_ladder(p: u64, n: usize) -> GeneratorLadder {
    generator_ladder(p, n).expect("odd primes have generator ladders")
}

/// Level-n label of f(x, y).
fn forward_label(p: u64, x: &BigInt, y: &PadicInt, n: usize) -> BigInt {
    let m = pow_u(p, n as u32);
    if p == 2 {
        let sign = if x.is_zero() { BigInt::one() } else { &m - 1 };
        if n <= 2 {
            return sign.mod_floor(&m);
        }
        let e = y.label(n - 2);
        return (sign * BigInt::from(5).modpow(&e, &m)).mod_floor(&m);
    }
    let q = odd_ladder(p, n).q(n).clone();
    let yl = if n == 1 {
        BigInt::zero()
    } else {
        y.label(n - 1)
    };
    let e = x * pow_u(p, n as u32 - 1) + yl * (p - 1);
    q.modpow(&e, &m)
}

pub fn iso_forward(u: &UnitPadic) -> UnitLabelPath {
    let (p, x, y) = (u.p, u.x.clone(), u.y.clone());
    UnitLabelPath::new(
        p,
        Path::new(units_pres_id(p), move |n| forward_label(p, &x, &y, n)),
    )
}

/// Discrete logs j_n of w(n) to base q_n (odd p) or of (-1)^x w(n) to base 5 (p = 2),
/// lifted level by level.
struct LogChain {
    p: u64,
    w: Path,
    x: BigInt,
    logs: Mutex<Vec<BigInt>>,
}

impl LogChain {
    fn new(p: u64, w: Path) -> Self {
        let x = if p == 2 {
            if w.label(2) == BigInt::one() {
                BigInt::zero()
            } else {
                BigInt::one()
            }
        } else {
            let q1 = odd_ladder(p, 1).q(1).clone();
            let target = w.label(1);
            let m = BigInt::from(p);
            (0..p - 1)
                .map(BigInt::from)
                .find(|j| q1.modpow(j, &m) == target)
                .expect("level-1 label is a unit")
        };
        LogChain {
            p,
            w,
            x,
            logs: Mutex::new(Vec::new()),
        }
    }

    /// Logs are indexed from level 1 (odd p) or level 3 (p = 2).
    fn log_at(&self, n: usize) -> BigInt {
        let p = self.p;
        let first = if p == 2 { 3 } else { 1 };
        let mut logs = self.logs.lock().unwrap();
        if logs.is_empty() {
            logs.push(if p == 2 {
                self.log_seed2()
            } else {
                self.x.clone()
            });
        }
        while logs.len() <= n - first {
            let level = first + logs.len();
            let prev = logs.last().unwrap().clone();
            let m = pow_u(p, level as u32);
            let (base, target, step) = if p == 2 {
                (
                    BigInt::from(5),
                    self.unsigned(level),
                    pow_u(2, level as u32 - 3),
                )
            } else {
                let q = odd_ladder(p, level).q(level).clone();
                (q, self.w.label(level), pow_u(p, level as u32 - 2) * (p - 1))
            };
            let next = (0..p)
                .map(|k| &prev + &step * k)
                .find(|j| base.modpow(j, &m) == target)
                .expect("logs lift uniquely");
            logs.push(next);
        }
        logs[n - first].clone()
    }

    fn unsigned(&self, level: usize) -> BigInt {
        let m = pow_u(2, level as u32);
        let w = self.w.label(level);
        if self.x.is_zero() {
            w
        } else {
            (-w).mod_floor(&m)
        }
    }

    fn log_seed2(&self) -> BigInt {
        if self.unsigned(3) == BigInt::one() {
            BigInt::zero()
        } else {
            BigInt::one()
        }
    }

    /// Free-part label at level m.
    fn y_label(&self, m: usize) -> BigInt {
        let p = self.p;
        if p == 2 {
            return self.log_at(m + 2).mod_floor(&pow_u(2, m as u32));
        }
        let n = m + 1;
        let v = pow_u(p, m as u32) * (p - 1);
        let j = self.log_at(n);
        let d = (j - &self.x * pow_u(p, m as u32)).mod_floor(&v);
        let (q, r) = d.div_rem(&BigInt::from(p - 1));
        debug_assert!(r.is_zero());
        q
    }
}

pub fn iso_backward(w: &UnitLabelPath) -> UnitPadic {
    let chain = Arc::new(LogChain::new(w.p, w.path.clone()));
    let x = chain.x.clone();
    let c = chain.clone();
    let y = PadicInt::from_fn(w.p, move |m| c.y_label(m));
    UnitPadic { p: w.p, x, y }
}

/// Free parts of u^t and v^t with t the torsion order; equal iff the free parts of u and v are.
pub fn enums_reduce(u: &UnitPadic, v: &UnitPadic) -> Result<(PadicInt, PadicInt)> {
    u.check(v)?;
    let t = BigInt::from(torsion_order(u.p));
    Ok((unit_pow(u, &t).y, unit_pow(v, &t).y))
}

/// T_p^x with its multiplication, inversion and identity on label paths.
pub fn units_presentation(p: u64) -> TreePresentation {
    let validator = move |node: &[Label]| {
        node.iter().enumerate().all(|(i, k)| {
            let m = pow_u(p, i as u32 + 1);
            let coherent = i == 0 || k.mod_floor(&pow_u(p, i as u32)) == node[i - 1];
            k < &m && !(k % p).is_zero() && coherent && (p != 2 || i != 0 || k.is_one())
        })
    };
    let branching = move |node: &[Label]| match node.last() {
        None if p == 2 => vec![BigInt::one()],
        None => (1..p).map(BigInt::from).collect(),
        Some(last) => {
            let step = pow_u(p, node.len() as u32);
            (0..p).map(|k| last + &step * k).collect()
        }
    };
    let mul = PrefixFunctional::levelwise("*", 2, move |x, n| {
        (&x[0] * &x[1]).mod_floor(&pow_u(p, n as u32))
    });
    let inv = PrefixFunctional::levelwise("inv", 1, move |x, n| {
        mod_inv(&x[0], &pow_u(p, n as u32))
            .expect("labels are units")
            .value()
            .clone()
    });
    let one = PrefixFunctional::levelwise("1", 0, |_, _| BigInt::one());
    TreePresentation::new(units_pres_id(p), validator, branching, vec![mul, inv, one])
}
