use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Symbol with natural ordering: alphabetic prefix, then numeric suffix (c2 < c10).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sym(pub String);

impl Sym {
    pub fn new(s: impl Into<String>) -> Self {
        Sym(s.into())
    }

    fn key(&self) -> (&str, Option<u128>, &str) {
        let s = self.0.as_str();
        let split = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, digits) = s.split_at(split);
        (head, digits.parse().ok(), digits)
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// coeff * f_1 * ... * f_k; no factors means an integer constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono {
    pub coeff: BigInt,
    pub factors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term(pub Vec<Mono>);

impl Term {
    pub fn var(name: &str) -> Term {
        Term(vec![Mono {
            coeff: BigInt::one(),
            factors: vec![name.to_string()],
        }])
    }

    pub fn scaled(c: i64, name: &str) -> Term {
        Term(vec![Mono {
            coeff: BigInt::from(c),
            factors: vec![name.to_string()],
        }])
    }

    pub fn zero() -> Term {
        Term(vec![Mono {
            coeff: BigInt::zero(),
            factors: vec![],
        }])
    }

    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.0.iter().flat_map(|m| m.factors.iter())
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        Term(
            self.0
                .iter()
                .map(|m| Mono {
                    coeff: m.coeff.clone(),
                    factors: m
                        .factors
                        .iter()
                        .map(|f| if f == from { to.to_string() } else { f.clone() })
                        .collect(),
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub lhs: Term,
    pub rhs: Term,
}

impl Atom {
    pub fn new(lhs: Term, rhs: Term) -> Atom {
        Atom { lhs, rhs }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.lhs.symbols().chain(self.rhs.symbols())
    }

    pub fn rename(&self, from: &str, to: &str) -> Atom {
        Atom {
            lhs: self.lhs.rename(from, to),
            rhs: self.rhs.rename(from, to),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::Atom(Atom::new(lhs, rhs))
    }

    pub fn ne(lhs: Term, rhs: Term) -> Formula {
        Formula::not(Formula::eq(lhs, rhs))
    }

    pub fn free_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<Sym>) {
        match self {
            Formula::Atom(a) => {
                for s in a.symbols() {
                    if !bound.contains(s) {
                        out.insert(Sym::new(s.clone()));
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(bound, out))
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn all_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(a) => out.extend(a.symbols().cloned()),
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    pub fn visit(&self, g: &mut impl FnMut(&Formula)) {
        g(self);
        match self {
            Formula::Atom(_) => {}
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.visit(g),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.visit(g)),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut qf = true;
        self.visit(&mut |f| {
            if matches!(f, Formula::Exists(..) | Formula::Forall(..)) {
                qf = false;
            }
        });
        qf
    }

    /// Rename free occurrences of `from`.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.rename(from, to)),
            Formula::Not(f) => Formula::not(f.rename_free(from, to)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_free(from, to)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_free(from, to)).collect()),
            Formula::Exists(v, f) if v != from => {
                Formula::Exists(v.clone(), Box::new(f.rename_free(from, to)))
            }
            Formula::Forall(v, f) if v != from => {
                Formula::Forall(v.clone(), Box::new(f.rename_free(from, to)))
            }
            q => q.clone(),
        }
    }
}

fn write_mono(out: &mut String, m: &Mono, first: bool) {
    let c = if first {
        m.coeff.clone()
    } else {
        m.coeff.abs()
    };
    if !first {
        out.push_str(if m.coeff.is_negative() { " - " } else { " + " });
    }
    if m.factors.is_empty() {
        out.push_str(&c.to_string());
        return;
    }
    if !c.is_one() {
        out.push_str(&c.to_string());
        out.push('*');
    }
    out.push_str(&m.factors.join("*"));
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (i, m) in self.0.iter().enumerate() {
            write_mono(&mut s, m, i == 0);
        }
        f.write_str(&s)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

fn fmt_formula(f: &Formula) -> String {
    match f {
        Formula::Exists(v, b) => format!("EX {v}. {}", fmt_formula(b)),
        Formula::Forall(v, b) => format!("ALL {v}. {}", fmt_formula(b)),
        Formula::Or(fs) if fs.len() >= 2 => fs.iter().map(fmt_conj).collect::<Vec<_>>().join(" | "),
        _ => fmt_conj(f),
    }
}

fn fmt_conj(f: &Formula) -> String {
    match f {
        Formula::And(fs) if fs.len() >= 2 => fs.iter().map(fmt_lit).collect::<Vec<_>>().join(" & "),
        _ => fmt_lit(f),
    }
}

fn fmt_lit(f: &Formula) -> String {
    match f {
        Formula::Atom(a) => a.to_string(),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => format!("{} != {}", a.lhs, a.rhs),
            other => format!("~({})", fmt_formula(other)),
        },
        Formula::And(fs) if fs.is_empty() => "0 = 0".into(),
        Formula::Or(fs) if fs.is_empty() => "0 != 0".into(),
        Formula::And(fs) | Formula::Or(fs) if fs.len() == 1 => fmt_lit(&fs[0]),
        other => format!("({})", fmt_formula(other)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_formula(self))
    }
}
