//! The profinite integers as the infinite product of Z_p^+ over all primes.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::residue::{factorize, nth_prime, pow_u, to_u64};
use crate::tree::{pair, splice_infinite, Apartness, Path};
use crate::zp_add::{linear_combination, PadicInt};

pub const ZHAT_ID: &str = "Zhat";

/// Element of Z^ given by its p-adic component for each prime p.
#[derive(Clone)]
pub struct ZhatElem {
    comp: Arc<dyn Fn(u64) -> PadicInt + Send + Sync>,
    exact: Option<BigInt>,
}

impl fmt::Debug for ZhatElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(z) => write!(f, "Zhat({z})"),
            None => write!(f, "Zhat(..)"),
        }
    }
}

impl ZhatElem {
    pub fn from_fn(f: impl Fn(u64) -> PadicInt + Send + Sync + 'static) -> Self {
        ZhatElem {
            comp: Arc::new(f),
            exact: None,
        }
    }

    pub fn from_integer(z: impl Into<BigInt>) -> Self {
        let z: BigInt = z.into();
        let zz = z.clone();
        ZhatElem {
            comp: Arc::new(move |p| PadicInt::from_integer(p, zz.clone())),
            exact: Some(z),
        }
    }

    pub fn exact(&self) -> Option<&BigInt> {
        self.exact.as_ref()
    }

    pub fn component(&self, p: u64) -> PadicInt {
        (self.comp)(p)
    }

    /// Spliced path: level <i, l> (0-based) carries level l+1 of the i-th prime.
    pub fn path(&self) -> Path {
        let comp = self.comp.clone();
        splice_infinite(
            ZHAT_ID,
            Arc::new(move |i| comp(nth_prime(i)).path().clone()),
        )
    }

    /// sum c_i x_i + d, componentwise.
    pub fn combine(coeffs: &[BigInt], xs: &[ZhatElem], d: &BigInt) -> ZhatElem {
        let coeffs = coeffs.to_vec();
        let xs = xs.to_vec();
        let d = d.clone();
        let exact = xs
            .iter()
            .map(|x| x.exact.clone())
            .collect::<Option<Vec<_>>>()
            .map(|vals| vals.iter().zip(&coeffs).map(|(v, c)| v * c).sum::<BigInt>() + &d);
        ZhatElem {
            comp: Arc::new(move |p| {
                let comps: Vec<PadicInt> = xs.iter().map(|x| x.component(p)).collect();
                let mut cs = coeffs.clone();
                let mut all = comps;
                if !d.is_zero() {
                    cs.push(d.clone());
                    all.push(PadicInt::from_integer(p, 1));
                }
                linear_combination(p, &cs, &all)
            }),
            exact,
        }
    }

    /// Whether m divides the element, read off the components at the primes of m.
    pub fn divisible_by(&self, m: &BigInt) -> bool {
        if m.is_zero() {
            return false;
        }
        factorize(m).into_iter().all(|(q, e)| {
            let q = to_u64(&q);
            let label = self.component(q).label(e as usize);
            label.mod_floor(&pow_u(q, e)).is_zero()
        })
    }

    /// Search for a nonzero label, interleaving primes fairly.
    pub fn apart_from_zero(&self, fuel: usize) -> Apartness {
        for s in 0..fuel {
            let (i, l) = crate::tree::unpair(s);
            if !self.component(nth_prime(i)).label(l + 1).is_zero() {
                return Apartness::Witness(pair(i, l) + 1);
            }
        }
        Apartness::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_and_divisibility() {
        let six = ZhatElem::from_integer(6);
        assert!(six.divisible_by(&BigInt::from(2)));
        assert!(six.divisible_by(&BigInt::from(3)));
        assert!(!six.divisible_by(&BigInt::from(4)));
        let x = ZhatElem::combine(&[BigInt::from(2)], &[six], &BigInt::from(-12));
        assert_eq!(x.exact(), Some(&BigInt::zero()));
        assert_eq!(x.apart_from_zero(50), Apartness::Unknown);
        assert!(matches!(
            ZhatElem::from_integer(5).apart_from_zero(10),
            Apartness::Witness(_)
        ));
    }

    #[test]
    fn spliced_path() {
        let x = ZhatElem::from_integer(7);
        let path = x.path();
        // Levels 1, 2, 3 are <0,0>, <0,1>, <1,0>: 7 mod 2, 7 mod 4, 7 mod 3.
        assert_eq!(path.label(1), BigInt::from(1));
        assert_eq!(path.label(2), BigInt::from(3));
        assert_eq!(path.label(3), BigInt::from(1));
    }
}
