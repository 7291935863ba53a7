//! Translating formulas about direct products into Boolean combinations
//! of formulas about the factors.

use std::collections::BTreeMap;
use std::fmt;

use super::decide::{tree_decide, DecisionContext};
use crate::error::{Error, Result};
use crate::formula::{Bool, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factors {
    Finite(usize),
    Infinite,
}

/// Which factors a leaf speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    At(usize),
    /// The formula holds in every factor.
    All,
    /// The formula holds in some factor.
    Some,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorLeaf {
    pub index: Index,
    pub formula: Formula,
}

impl fmt::Display for FactorLeaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Index::At(i) => write!(f, "[{i}] {}", self.formula),
            Index::All => write!(f, "[all i] {}", self.formula),
            Index::Some => write!(f, "[some i] {}", self.formula),
        }
    }
}

fn leaf(index: Index, formula: Formula) -> Bool<FactorLeaf> {
    Bool::Leaf(FactorLeaf { index, formula })
}

fn conj(mut fs: Vec<Formula>) -> Formula {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Formula::And(fs)
    }
}

fn signed(f: &Formula, pos: bool) -> Formula {
    if pos {
        f.clone()
    } else {
        Formula::not(f.clone())
    }
}

/// Equations split conjunctively over the factors; a quantifier acts on
/// each factor separately once the body is in disjunctive normal form.
pub fn product_translate(f: &Formula, factors: Factors) -> Result<Bool<FactorLeaf>> {
    Ok(match f {
        Formula::Atom(_) => match factors {
            Factors::Finite(k) => {
                Bool::and((0..k).map(|i| leaf(Index::At(i), f.clone())).collect())
            }
            Factors::Infinite => leaf(Index::All, f.clone()),
        },
        Formula::Not(g) => Bool::not(product_translate(g, factors)?),
        Formula::And(gs) => Bool::and(
            gs.iter()
                .map(|g| product_translate(g, factors))
                .collect::<Result<_>>()?,
        ),
        Formula::Or(gs) => Bool::or(
            gs.iter()
                .map(|g| product_translate(g, factors))
                .collect::<Result<_>>()?,
        ),
        Formula::Exists(v, g) => exists(v, &product_translate(g, factors)?, factors)?,
        Formula::Forall(v, g) => Bool::not(exists(
            v,
            &Bool::not(product_translate(g, factors)?),
            factors,
        )?),
    })
}

fn exists(v: &str, t: &Bool<FactorLeaf>, factors: Factors) -> Result<Bool<FactorLeaf>> {
    let mut alts = Vec::new();
    for c in t.dnf()? {
        let (with, rest): (Vec<_>, Vec<_>) = c
            .into_iter()
            .partition(|(l, _)| l.formula.free_vars().iter().any(|s| s.0 == v));
        let mut parts: Vec<Bool<FactorLeaf>> = rest
            .into_iter()
            .map(|(l, pos)| {
                if pos {
                    Bool::Leaf(l)
                } else {
                    Bool::not(Bool::Leaf(l))
                }
            })
            .collect();
        match factors {
            Factors::Finite(_) => {
                let mut groups: BTreeMap<usize, Vec<Formula>> = BTreeMap::new();
                for (l, pos) in with {
                    let Index::At(i) = l.index else {
                        unreachable!("finite products index their leaves")
                    };
                    groups.entry(i).or_default().push(signed(&l.formula, pos));
                }
                for (i, fs) in groups {
                    parts.push(leaf(Index::At(i), Formula::exists(v, conj(fs))));
                }
            }
            Factors::Infinite => {
                let mut universal = Vec::new();
                let mut existential = Vec::new();
                for (l, pos) in with {
                    match (l.index, pos) {
                        (Index::All, true) | (Index::Some, false) => {
                            universal.push(signed(&l.formula, pos))
                        }
                        _ => existential.push(signed(&l.formula, pos)),
                    }
                }
                if existential.len() > 1 {
                    return Err(Error::Unsupported(
                        "several factor-existential constraints on one variable in an infinite product".into(),
                    ));
                }
                if !universal.is_empty() {
                    parts.push(leaf(
                        Index::All,
                        Formula::exists(v, conj(universal.clone())),
                    ));
                }
                if let Some(e) = existential.pop() {
                    universal.push(e);
                    parts.push(leaf(Index::Some, Formula::exists(v, conj(universal))));
                }
            }
        }
        alts.push(Bool::and(parts));
    }
    Ok(Bool::or(alts))
}

/// Decide a formula over a finite product, one context per factor.
pub fn decide_product(factors: &[DecisionContext], f: &Formula) -> Result<bool> {
    let t = product_translate(f, Factors::Finite(factors.len()))?;
    t.eval(&mut |l| match l.index {
        Index::At(i) => tree_decide(&factors[i], &l.formula),
        _ => unreachable!("finite products index their leaves"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn show(b: &Bool<FactorLeaf>) -> String {
        match b {
            Bool::True => "T".into(),
            Bool::False => "F".into(),
            Bool::Leaf(l) => l.to_string(),
            Bool::Not(x) => format!("~({})", show(x)),
            Bool::And(xs) => xs.iter().map(show).collect::<Vec<_>>().join(" & "),
            Bool::Or(xs) => xs.iter().map(show).collect::<Vec<_>>().join(" | "),
        }
    }

    #[test]
    fn examples() {
        let t = product_translate(&parse("EX X. X = c").unwrap(), Factors::Finite(2)).unwrap();
        assert_eq!(show(&t), "[0] EX X. X = c & [1] EX X. X = c");
        let t = product_translate(&parse("c != d").unwrap(), Factors::Finite(2)).unwrap();
        assert_eq!(show(&t), "~([0] c = d & [1] c = d)");
        let t = product_translate(&parse("c = d").unwrap(), Factors::Infinite).unwrap();
        assert_eq!(show(&t), "[all i] c = d");
    }

    #[test]
    fn infinite_existential() {
        let t =
            product_translate(&parse("EX X. X = c & X != d").unwrap(), Factors::Infinite).unwrap();
        assert_eq!(
            show(&t),
            "[all i] EX X. X = c & [some i] EX X. X = c & X != d"
        );
        let bad = parse("EX X. X != c & X != d").unwrap();
        assert!(matches!(
            product_translate(&bad, Factors::Infinite),
            Err(Error::Unsupported(_))
        ));
    }
}
