//! Quantifier elimination down to Boolean combinations of parameter
//! equations and congruences, and the decision procedures built on it.

mod decide;
mod product;
mod skolem;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::{atom_to_lin, Bool, Flavor, Formula, Lin, LinLit};
use crate::residue::{p_valuation, pow_u};
use crate::tree::{tuples, ClopenSet};

pub use decide::{
    cyclic_decide, decide_leaf, decide_units, decide_zhat, to_additive, tree_decide,
    DecisionContext, Value, DEFAULT_FUEL,
};
pub use product::{decide_product, product_translate, FactorLeaf, Factors, Index};
pub use skolem::{skolem, SkolemWitness};

/// Residue enumeration bound when several congruences share a variable.
pub const RESIDUE_LIMIT: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    ZpPlus(u64),
    ZpUnits(u64),
    Zhat,
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::ZpPlus(p) => write!(f, "Z_{p}^+"),
            Structure::ZpUnits(p) => write!(f, "Z_{p}^x"),
            Structure::Zhat => f.write_str("Zhat"),
        }
    }
}

/// modulus | lin + offset, where offset is an integer multiple of 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    pub modulus: BigInt,
    pub lin: Lin,
    pub offset: BigInt,
}

impl Congruence {
    /// Tuples over `coords` at level v_p(modulus) satisfying the
    /// congruence in Z_p.
    pub fn to_clopen(&self, p: u64, coords: &[String]) -> Result<ClopenSet> {
        for v in self.lin.vars() {
            if !coords.iter().any(|c| c == v) {
                return Err(Error::ArityMismatch {
                    expected: coords.len(),
                    got: coords.len() + 1,
                });
            }
        }
        let k = p_valuation(&self.modulus, p)?;
        if k == 0 {
            return Ok(ClopenSet::full(coords.len()));
        }
        let m = pow_u(p, k);
        let coeffs: Vec<BigInt> = coords.iter().map(|c| self.lin.coeff(c)).collect();
        let entries = tuples(&m, coords.len())
            .into_iter()
            .filter(|t| {
                let s: BigInt =
                    t.iter().zip(&coeffs).map(|(x, a)| x * a).sum::<BigInt>() + &self.offset;
                s.mod_floor(&m).is_zero()
            })
            .map(|t| (k as usize, t))
            .collect();
        Ok(ClopenSet {
            arity: coords.len(),
            entries,
        })
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.modulus, self.lin)?;
        if !self.offset.is_zero() {
            write!(f, " + {}", self.offset)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leaf {
    /// lin = 0
    Eq(Lin),
    Cong(Congruence),
}

impl Leaf {
    pub fn lin(&self) -> &Lin {
        match self {
            Leaf::Eq(l) => l,
            Leaf::Cong(c) => &c.lin,
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.lin().mentions(v)
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leaf::Eq(l) => write!(f, "{}", LinLit::eq(l.clone())),
            Leaf::Cong(c) => write!(f, "{c}"),
        }
    }
}

pub type ClopenCombination = Bool<Leaf>;

pub fn show(c: &ClopenCombination) -> String {
    match c {
        Bool::True => "true".into(),
        Bool::False => "false".into(),
        Bool::Leaf(l) => format!("[{l}]"),
        Bool::Not(b) => format!("~{}", show(b)),
        Bool::And(bs) => format!("({})", bs.iter().map(show).collect::<Vec<_>>().join(" & ")),
        Bool::Or(bs) => format!("({})", bs.iter().map(show).collect::<Vec<_>>().join(" | ")),
    }
}

/// The additive structures eliminated over directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Domain {
    Padic(u64),
    Profinite,
}

fn domain(s: Structure) -> Result<Domain> {
    match s {
        Structure::ZpPlus(p) => Ok(Domain::Padic(p)),
        Structure::Zhat => Ok(Domain::Profinite),
        Structure::ZpUnits(_) => Err(Error::Unsupported(format!(
            "direct elimination over {s}; decide through the additive factor"
        ))),
    }
}

fn eq_leaf(lin: Lin) -> ClopenCombination {
    if lin.is_zero() {
        Bool::True
    } else {
        Bool::Leaf(Leaf::Eq(lin.normalized(true)))
    }
}

fn cong_leaf(dom: Domain, modulus: BigInt, lin: Lin, offset: BigInt) -> ClopenCombination {
    let mut m = modulus.abs();
    if let Domain::Padic(p) = dom {
        m = pow_u(p, p_valuation(&m, p).expect("moduli are nonzero"));
    }
    if m.is_one() {
        return Bool::True;
    }
    let mut lin = lin.reduce_mod(&m);
    let mut d = offset.mod_floor(&m);
    let g = lin.content().gcd(&d).gcd(&m);
    if !g.is_one() {
        lin = Lin(lin.0.into_iter().map(|(k, v)| (k, v / &g)).collect());
        d /= &g;
        m /= &g;
        if m.is_one() {
            return Bool::True;
        }
    }
    if lin.is_zero() {
        return if d.is_zero() { Bool::True } else { Bool::False };
    }
    Bool::Leaf(Leaf::Cong(Congruence {
        modulus: m,
        lin,
        offset: d,
    }))
}

fn lit(b: ClopenCombination, pos: bool) -> ClopenCombination {
    if pos {
        b
    } else {
        Bool::not(b)
    }
}

/// Truth-equivalent clopen combination of a formula over Z_p^+ or Z^.
pub fn eliminate(f: &Formula, structure: Structure) -> Result<ClopenCombination> {
    let dom = domain(structure)?;
    elim(f, dom)
}

fn elim(f: &Formula, dom: Domain) -> Result<ClopenCombination> {
    Ok(match f {
        Formula::Atom(a) => eq_leaf(atom_to_lin(a, Flavor::Additive)?),
        Formula::Not(g) => Bool::not(elim(g, dom)?),
        Formula::And(gs) => Bool::and(gs.iter().map(|g| elim(g, dom)).collect::<Result<_>>()?),
        Formula::Or(gs) => Bool::or(gs.iter().map(|g| elim(g, dom)).collect::<Result<_>>()?),
        Formula::Exists(v, g) => exists(v, &elim(g, dom)?, dom)?,
        Formula::Forall(v, g) => Bool::not(exists(v, &Bool::not(elim(g, dom)?), dom)?),
    })
}

/// Eliminate ∃v from a combination already free of quantifiers.
pub fn eliminate_exists(
    v: &str,
    c: &ClopenCombination,
    structure: Structure,
) -> Result<ClopenCombination> {
    exists(v, c, domain(structure)?)
}

fn exists(v: &str, c: &ClopenCombination, dom: Domain) -> Result<ClopenCombination> {
    let mut out = Vec::new();
    for conj in c.dnf()? {
        let mut seen = BTreeSet::new();
        let mut lits = Vec::new();
        let mut contradictory = false;
        for (l, pos) in conj {
            contradictory |= seen.contains(&(l.clone(), !pos));
            if seen.insert((l.clone(), pos)) {
                lits.push((l, pos));
            }
        }
        if contradictory {
            continue;
        }
        out.push(exists_conjunct(v, lits, dom)?);
    }
    Ok(Bool::or(out))
}

fn exists_conjunct(v: &str, lits: Vec<(Leaf, bool)>, dom: Domain) -> Result<ClopenCombination> {
    let (with, rest): (Vec<_>, Vec<_>) = lits.into_iter().partition(|(l, _)| l.mentions(v));
    let mut parts: Vec<ClopenCombination> = rest
        .into_iter()
        .map(|(l, pos)| lit(Bool::Leaf(l), pos))
        .collect();
    let pivot = with
        .iter()
        .filter(|(l, pos)| *pos && matches!(l, Leaf::Eq(_)))
        .min_by_key(|(l, _)| l.lin().coeff(v).abs())
        .map(|(l, _)| l.lin().clone());
    if let Some(mut pivot) = pivot {
        // b v + R = 0 determines v; substitute b v = -R elsewhere.
        if pivot.coeff(v).is_negative() {
            pivot = pivot.scale(&BigInt::from(-1));
        }
        let b = pivot.coeff(v);
        let r = pivot.without(v);
        let mut used_pivot = false;
        for (l, pos) in &with {
            match l {
                Leaf::Eq(lin) => {
                    if *pos && !used_pivot && lin.normalized(false) == pivot.normalized(false) {
                        used_pivot = true;
                        continue;
                    }
                    let b2 = lin.coeff(v);
                    parts.push(lit(eq_leaf(lin.scale(&b).sub(&pivot.scale(&b2))), *pos));
                }
                Leaf::Cong(c) => {
                    let a = c.lin.coeff(v);
                    let rest = c.lin.without(v);
                    let lin = r.scale(&-a).add(&rest.scale(&b));
                    parts.push(lit(
                        cong_leaf(dom, &c.modulus * &b, lin, &c.offset * &b),
                        *pos,
                    ));
                }
            }
        }
        parts.push(cong_leaf(dom, b, r, BigInt::zero()));
        return Ok(Bool::and(parts));
    }
    // No equation: inequations in v only remove finitely many points from
    // an open set without isolated points, so they can be dropped.
    let congs: Vec<(Congruence, bool)> = with
        .into_iter()
        .filter_map(|(l, pos)| match l {
            Leaf::Cong(c) => Some((c, pos)),
            Leaf::Eq(_) => None,
        })
        .collect();
    match congs.as_slice() {
        [] => {}
        [(c, true)] => {
            let a = c.lin.coeff(v);
            parts.push(cong_leaf(
                dom,
                a.gcd(&c.modulus),
                c.lin.without(v),
                c.offset.clone(),
            ));
        }
        [(c, false)] => {
            let a = c.lin.coeff(v);
            if a.mod_floor(&c.modulus).is_zero() {
                parts.push(Bool::not(cong_leaf(
                    dom,
                    c.modulus.clone(),
                    c.lin.without(v),
                    c.offset.clone(),
                )));
            }
        }
        _ => {
            let l = congs
                .iter()
                .fold(BigInt::one(), |acc, (c, _)| acc.lcm(&c.modulus));
            if l > BigInt::from(RESIDUE_LIMIT) {
                return Err(Error::TooLarge(format!("residue enumeration modulo {l}")));
            }
            let mut alts = Vec::new();
            let mut r = BigInt::zero();
            while r < l {
                let mut conj = Vec::new();
                for (c, pos) in &congs {
                    let a = c.lin.coeff(v);
                    conj.push(lit(
                        cong_leaf(
                            dom,
                            c.modulus.clone(),
                            c.lin.without(v),
                            &c.offset + &a * &r,
                        ),
                        *pos,
                    ));
                }
                alts.push(Bool::and(conj));
                r += 1;
            }
            parts.push(Bool::or(alts));
        }
    }
    Ok(Bool::and(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn elim_str(f: &str, s: Structure) -> ClopenCombination {
        eliminate(&parse(f).unwrap(), s).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(elim_str("EX G. F = 2*G", Structure::ZpPlus(3)), Bool::True);
        let c = elim_str("EX G. F = 3*G", Structure::ZpPlus(3));
        let Bool::Leaf(Leaf::Cong(cong)) = &c else {
            panic!("{c:?}")
        };
        assert_eq!(cong.modulus, BigInt::from(3));
        let set = cong.to_clopen(3, &["F".to_string()]).unwrap();
        assert_eq!(set.entries, vec![(1, vec![BigInt::zero()])]);
        assert_eq!(elim_str("EX G. G != F", Structure::ZpPlus(3)), Bool::True);
    }

    #[test]
    fn golden_sentences() {
        assert_eq!(
            elim_str("ALL F. EX G. F = 2*G", Structure::ZpPlus(3)),
            Bool::True
        );
        assert_eq!(
            elim_str("ALL F. EX G. F = 2*G", Structure::ZpPlus(2)),
            Bool::False
        );
        assert_eq!(
            elim_str("ALL F. EX G. F = 2*G", Structure::Zhat),
            Bool::False
        );
        assert_eq!(
            elim_str("ALL F. EX G. F = 3*G", Structure::ZpPlus(3)),
            Bool::False
        );
        for s in [Structure::ZpPlus(2), Structure::ZpPlus(3), Structure::Zhat] {
            assert_eq!(elim_str("EX G. G != 0", s), Bool::True);
            assert_eq!(elim_str("EX G. G = 0 & G != 0", s), Bool::False);
        }
    }

    #[test]
    fn residue_enumeration() {
        assert_eq!(
            elim_str(
                "ALL F. EX G. (EX H. G = 2*H) & (EX K. G + F = 2*K)",
                Structure::ZpPlus(2)
            ),
            Bool::False
        );
        assert_eq!(
            elim_str(
                "ALL F. EX G. (EX H. G = 4*H) & ~(EX K. G + F = 2*K)",
                Structure::ZpPlus(2)
            ),
            Bool::False
        );
        assert_eq!(
            elim_str(
                "EX F. EX G. (EX H. G = 4*H) & ~(EX K. G + F = 2*K)",
                Structure::ZpPlus(2)
            ),
            Bool::True
        );
    }

    #[test]
    fn units_rejected() {
        assert!(matches!(
            eliminate(&parse("c1 = c1").unwrap(), Structure::ZpUnits(5)),
            Err(Error::Unsupported(_))
        ));
    }
}
