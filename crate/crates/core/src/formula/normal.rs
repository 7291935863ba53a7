//! Prenex and disjunctive normal forms, and a small generic Boolean tree.

use std::collections::BTreeSet;

use super::ast::{Atom, Formula};
use crate::error::{Error, Result};

/// Upper bound on the number of DNF conjuncts before giving up.
pub const DNF_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn flip(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }

    pub fn wrap(self, v: &str, body: Formula) -> Formula {
        match self {
            Quant::Exists => Formula::exists(v, body),
            Quant::Forall => Formula::forall(v, body),
        }
    }
}

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut k = 1;
    loop {
        let cand = format!("{base}_{k}");
        if used.insert(cand.clone()) {
            return cand;
        }
        k += 1;
    }
}

/// Rename bound variables so that every binder is distinct and none
/// shadows a free variable.
pub fn rename_apart(f: &Formula) -> Formula {
    let mut used = f.all_symbols();
    let free: BTreeSet<String> = f.free_vars().into_iter().map(|s| s.0).collect();
    let mut seen = BTreeSet::new();
    apart(f, &free, &mut seen, &mut used)
}

fn apart(
    f: &Formula,
    free: &BTreeSet<String>,
    seen: &mut BTreeSet<String>,
    used: &mut BTreeSet<String>,
) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(apart(g, free, seen, used)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| apart(g, free, seen, used)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| apart(g, free, seen, used)).collect()),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let q = if matches!(f, Formula::Exists(..)) {
                Quant::Exists
            } else {
                Quant::Forall
            };
            let (name, body) = if free.contains(v) || seen.contains(v) {
                let n = fresh(v, used);
                let b = g.rename_free(v, &n);
                (n, b)
            } else {
                (v.clone(), (**g).clone())
            };
            seen.insert(name.clone());
            q.wrap(&name, apart(&body, free, seen, used))
        }
    }
}

/// Split a prenex formula into its quantifier prefix and matrix.
pub fn split_prefix(f: &Formula) -> (Vec<(Quant, String)>, &Formula) {
    let mut prefix = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::Exists(v, g) => {
                prefix.push((Quant::Exists, v.clone()));
                cur = g;
            }
            Formula::Forall(v, g) => {
                prefix.push((Quant::Forall, v.clone()));
                cur = g;
            }
            _ => return (prefix, cur),
        }
    }
}

pub fn with_prefix(prefix: &[(Quant, String)], matrix: Formula) -> Formula {
    prefix
        .iter()
        .rev()
        .fold(matrix, |acc, (q, v)| q.wrap(v, acc))
}

fn pull(f: &Formula) -> (Vec<(Quant, String)>, Formula) {
    match f {
        Formula::Atom(_) => (vec![], f.clone()),
        Formula::Not(g) => {
            let (qs, m) = pull(g);
            (
                qs.into_iter().map(|(q, v)| (q.flip(), v)).collect(),
                Formula::not(m),
            )
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let mut qs = Vec::new();
            let mut ms = Vec::new();
            for g in gs {
                let (q, m) = pull(g);
                qs.extend(q);
                ms.push(m);
            }
            let m = if matches!(f, Formula::And(_)) {
                Formula::And(ms)
            } else {
                Formula::Or(ms)
            };
            (qs, m)
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let q = if matches!(f, Formula::Exists(..)) {
                Quant::Exists
            } else {
                Quant::Forall
            };
            let (mut qs, m) = pull(g);
            qs.insert(0, (q, v.clone()));
            (qs, m)
        }
    }
}

pub fn to_prenex(f: &Formula) -> Formula {
    if f.is_quantifier_free() {
        return f.clone();
    }
    let (qs, m) = pull(&rename_apart(f));
    with_prefix(&qs, m)
}

/// Negation normal form: negations only directly above atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::Atom(_) if neg => Formula::not(f.clone()),
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(gs) | Formula::Or(gs) => {
            let parts = gs.iter().map(|g| nnf(g, neg)).collect();
            if matches!(f, Formula::And(_)) != neg {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let q = if matches!(f, Formula::Exists(..)) {
                Quant::Exists
            } else {
                Quant::Forall
            };
            let q = if neg { q.flip() } else { q };
            q.wrap(v, nnf(g, neg))
        }
    }
}

/// A Boolean combination of leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bool<L> {
    True,
    False,
    Leaf(L),
    Not(Box<Bool<L>>),
    And(Vec<Bool<L>>),
    Or(Vec<Bool<L>>),
}

/// A DNF: disjunction of conjunctions of (leaf, polarity).
pub type Dnf<L> = Vec<Vec<(L, bool)>>;

impl<L: Clone> Bool<L> {
    pub fn not(b: Bool<L>) -> Bool<L> {
        match b {
            Bool::True => Bool::False,
            Bool::False => Bool::True,
            Bool::Not(inner) => *inner,
            b => Bool::Not(Box::new(b)),
        }
    }

    pub fn and(parts: Vec<Bool<L>>) -> Bool<L> {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Bool::True => {}
                Bool::False => return Bool::False,
                Bool::And(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Bool::True,
            1 => out.pop().unwrap(),
            _ => Bool::And(out),
        }
    }

    pub fn or(parts: Vec<Bool<L>>) -> Bool<L> {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Bool::False => {}
                Bool::True => return Bool::True,
                Bool::Or(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Bool::False,
            1 => out.pop().unwrap(),
            _ => Bool::Or(out),
        }
    }

    pub fn from_dnf(d: Dnf<L>) -> Bool<L> {
        Bool::or(
            d.into_iter()
                .map(|c| {
                    Bool::and(
                        c.into_iter()
                            .map(|(l, pos)| {
                                if pos {
                                    Bool::Leaf(l)
                                } else {
                                    Bool::not(Bool::Leaf(l))
                                }
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn map<M: Clone>(&self, f: &mut impl FnMut(&L) -> Bool<M>) -> Bool<M> {
        match self {
            Bool::True => Bool::True,
            Bool::False => Bool::False,
            Bool::Leaf(l) => f(l),
            Bool::Not(b) => Bool::not(b.map(f)),
            Bool::And(bs) => Bool::and(bs.iter().map(|b| b.map(f)).collect()),
            Bool::Or(bs) => Bool::or(bs.iter().map(|b| b.map(f)).collect()),
        }
    }

    pub fn try_map<M: Clone>(&self, f: &mut impl FnMut(&L) -> Result<Bool<M>>) -> Result<Bool<M>> {
        Ok(match self {
            Bool::True => Bool::True,
            Bool::False => Bool::False,
            Bool::Leaf(l) => f(l)?,
            Bool::Not(b) => Bool::not(b.try_map(f)?),
            Bool::And(bs) => Bool::and(bs.iter().map(|b| b.try_map(f)).collect::<Result<_>>()?),
            Bool::Or(bs) => Bool::or(bs.iter().map(|b| b.try_map(f)).collect::<Result<_>>()?),
        })
    }

    /// Short-circuit evaluation.
    pub fn eval(&self, f: &mut impl FnMut(&L) -> Result<bool>) -> Result<bool> {
        Ok(match self {
            Bool::True => true,
            Bool::False => false,
            Bool::Leaf(l) => f(l)?,
            Bool::Not(b) => !b.eval(f)?,
            Bool::And(bs) => {
                for b in bs {
                    if !b.eval(f)? {
                        return Ok(false);
                    }
                }
                true
            }
            Bool::Or(bs) => {
                for b in bs {
                    if b.eval(f)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Bool::Leaf(l) => out.push(l),
            Bool::Not(b) => b.collect(out),
            Bool::And(bs) | Bool::Or(bs) => bs.iter().for_each(|b| b.collect(out)),
            _ => {}
        }
    }

    pub fn dnf(&self) -> Result<Dnf<L>> {
        self.dnf_signed(true)
    }

    fn dnf_signed(&self, pos: bool) -> Result<Dnf<L>> {
        Ok(match (self, pos) {
            (Bool::True, true) | (Bool::False, false) => vec![vec![]],
            (Bool::True, false) | (Bool::False, true) => vec![],
            (Bool::Leaf(l), _) => vec![vec![(l.clone(), pos)]],
            (Bool::Not(b), _) => b.dnf_signed(!pos)?,
            (Bool::Or(bs), true) | (Bool::And(bs), false) => {
                let mut out = Vec::new();
                for b in bs {
                    out.extend(b.dnf_signed(pos)?);
                    if out.len() > DNF_LIMIT {
                        return Err(Error::TooLarge("disjunctive normal form".into()));
                    }
                }
                out
            }
            (Bool::And(bs), true) | (Bool::Or(bs), false) => {
                let mut acc: Dnf<L> = vec![vec![]];
                for b in bs {
                    let d = b.dnf_signed(pos)?;
                    if acc.len().saturating_mul(d.len()) > DNF_LIMIT {
                        return Err(Error::TooLarge("disjunctive normal form".into()));
                    }
                    let mut next = Vec::with_capacity(acc.len() * d.len());
                    for a in &acc {
                        for c in &d {
                            let mut m = a.clone();
                            m.extend(c.iter().cloned());
                            next.push(m);
                        }
                    }
                    acc = next;
                }
                acc
            }
        })
    }
}

/// Quantifier-free formula as a Boolean tree over atoms.
pub fn qf_to_bool(f: &Formula) -> Result<Bool<Atom>> {
    Ok(match f {
        Formula::Atom(a) => Bool::Leaf(a.clone()),
        Formula::Not(g) => Bool::not(qf_to_bool(g)?),
        Formula::And(gs) => Bool::and(gs.iter().map(qf_to_bool).collect::<Result<_>>()?),
        Formula::Or(gs) => Bool::or(gs.iter().map(qf_to_bool).collect::<Result<_>>()?),
        Formula::Exists(..) | Formula::Forall(..) => {
            return Err(Error::Unsupported("quantifier inside a matrix".into()))
        }
    })
}

fn lit_formula(a: Atom, pos: bool) -> Formula {
    if pos {
        Formula::Atom(a)
    } else {
        Formula::not(Formula::Atom(a))
    }
}

/// Disjunctive normal form of a quantifier-free formula.
pub fn to_dnf(f: &Formula) -> Result<Formula> {
    let d = qf_to_bool(f)?.dnf()?;
    Ok(Formula::Or(
        d.into_iter()
            .map(|c| Formula::And(c.into_iter().map(|(a, p)| lit_formula(a, p)).collect()))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse::parse;

    #[test]
    fn prenex_examples() {
        let qf = parse("~(c1 = c2 & c2 = 0)").unwrap();
        assert_eq!(to_prenex(&qf), qf);
        let f = parse("~(EX G. G = c1)").unwrap();
        assert_eq!(to_prenex(&f), parse("ALL G. ~(G = c1)").unwrap());
        let f = parse("(EX G. G = c1) & (EX G. 2*G = c1)").unwrap();
        assert_eq!(
            to_prenex(&f).to_string(),
            "EX G. EX G_1. G = c1 & 2*G_1 = c1"
        );
        let f = parse("(EX c1. c1 = 0) & c1 = 0").unwrap();
        assert_eq!(to_prenex(&f).to_string(), "EX c1_1. c1_1 = 0 & c1 = 0");
    }

    #[test]
    fn dnf_example() {
        let f = parse("(a = 0 | b = 0) & c = 0").unwrap();
        assert_eq!(
            to_dnf(&f).unwrap(),
            parse("(a = 0 & c = 0) | (b = 0 & c = 0)").unwrap()
        );
    }

    #[test]
    fn nnf_pushes_negation() {
        let f = parse("~(EX G. G = 0 & G != c1)").unwrap();
        assert_eq!(to_nnf(&f).to_string(), "ALL G. G != 0 | G = c1");
    }
}
