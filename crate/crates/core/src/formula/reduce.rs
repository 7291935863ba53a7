//! Rewriting conjunctive existentials into reduced form: each bound
//! variable isolated in a single pivot equation, parameter-only literals
//! moved outside.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use super::ast::Formula;
use super::linear::{atom_to_lin, Flavor, Lin, LinLit};
use super::normal::{with_prefix, Quant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedExistential {
    pub vars: Vec<String>,
    /// `equations[i]` is the pivot equation of `pivots[i]`.
    pub pivots: Vec<String>,
    pub equations: Vec<Lin>,
    pub inequations: Vec<Lin>,
    /// Pivot coefficients used as multipliers during elimination. The
    /// rewrite is exact in any abelian group where these act injectively.
    pub multipliers: Vec<BigInt>,
}

impl ReducedExistential {
    fn mentions_bound(&self, l: &Lin) -> bool {
        self.vars.iter().any(|v| l.mentions(v))
    }

    /// Structural check: no parameter-only literal, every bound variable
    /// in at most one equation, and never in both an equation and an
    /// inequation.
    pub fn is_reduced(&self) -> bool {
        if self
            .equations
            .iter()
            .chain(&self.inequations)
            .any(|l| !self.mentions_bound(l))
        {
            return false;
        }
        self.vars.iter().all(|v| {
            let eqs = self.equations.iter().filter(|l| l.mentions(v)).count();
            let nes = self.inequations.iter().any(|l| l.mentions(v));
            eqs <= 1 && !(eqs == 1 && nes)
        })
    }

    pub fn literals(&self) -> Vec<LinLit> {
        self.equations
            .iter()
            .map(|l| LinLit::eq(l.clone()))
            .chain(self.inequations.iter().map(|l| LinLit::ne(l.clone())))
            .collect()
    }

    pub fn to_formula(&self) -> Formula {
        let body = Formula::And(self.literals().iter().map(LinLit::to_formula).collect());
        let prefix: Vec<_> = self
            .vars
            .iter()
            .map(|v| (Quant::Exists, v.clone()))
            .collect();
        with_prefix(&prefix, body)
    }
}

impl fmt::Display for ReducedExistential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Literals of a conjunction of (in)equations.
pub fn conjunctive_literals(f: &Formula, flavor: Flavor) -> Result<Vec<LinLit>> {
    let mut out = Vec::new();
    collect_lits(f, flavor, &mut out)?;
    Ok(out)
}

fn collect_lits(f: &Formula, flavor: Flavor, out: &mut Vec<LinLit>) -> Result<()> {
    match f {
        Formula::Atom(a) => out.push(LinLit::eq(atom_to_lin(a, flavor)?)),
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(a) => out.push(LinLit::ne(atom_to_lin(a, flavor)?)),
            Formula::Not(h) => collect_lits(h, flavor, out)?,
            _ => return Err(Error::NotConjunctive(f.to_string())),
        },
        Formula::And(gs) => {
            for g in gs {
                collect_lits(g, flavor, out)?;
            }
        }
        _ => return Err(Error::NotConjunctive(f.to_string())),
    }
    Ok(())
}

/// Split `EX G1 ... EX Gk. matrix` with a conjunctive matrix.
pub fn split_existential(f: &Formula) -> Result<(Vec<String>, Vec<LinLit>)> {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Exists(v, g) = cur {
        vars.push(v.clone());
        cur = g;
    }
    Ok((vars, conjunctive_literals(cur, Flavor::Additive)?))
}

pub fn reduce_conjunctive(f: &Formula) -> Result<(Vec<LinLit>, ReducedExistential)> {
    let (vars, lits) = split_existential(f)?;
    Ok(reduce_literals(&vars, lits))
}

/// Eliminate each bound variable from all literals but one pivot equation,
/// then move literals without bound variables outside.
pub fn reduce_literals(vars: &[String], lits: Vec<LinLit>) -> (Vec<LinLit>, ReducedExistential) {
    let mut lits: Vec<LinLit> = lits
        .into_iter()
        .map(|l| LinLit {
            lin: l.lin.normalized(false),
            ..l
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut pivot_vars = Vec::new();
    let mut multipliers = Vec::new();
    for v in vars {
        let candidate = lits
            .iter()
            .enumerate()
            .filter(|(i, l)| l.positive && !pivots.contains(i) && l.lin.mentions(v))
            .min_by_key(|(_, l)| l.lin.coeff(v).abs())
            .map(|(i, _)| i);
        let Some(pi) = candidate else { continue };
        let mut pivot = lits[pi].lin.clone();
        if pivot.coeff(v).is_negative() {
            pivot = pivot.scale(&BigInt::from(-1));
        }
        let b = pivot.coeff(v);
        for (i, lit) in lits.iter_mut().enumerate() {
            if i == pi || !lit.lin.mentions(v) {
                continue;
            }
            let b2 = lit.lin.coeff(v);
            lit.lin = lit.lin.scale(&b).sub(&pivot.scale(&b2)).normalized(false);
        }
        lits[pi].lin = pivot;
        pivots.push(pi);
        pivot_vars.push(v.clone());
        multipliers.push(b);
    }
    let mut removables = Vec::new();
    let mut equations = Vec::new();
    let mut inequations = Vec::new();
    let mut order: Vec<usize> = pivots.clone();
    order.extend((0..lits.len()).filter(|i| !pivots.contains(i)));
    for i in order {
        let lit = &lits[i];
        let bound = vars.iter().any(|v| lit.lin.mentions(v));
        if !bound {
            // 0 = 0 is dropped; 0 != 0 stays as a false removable.
            if !(lit.positive && lit.lin.is_zero()) && !removables.contains(lit) {
                removables.push(lit.clone());
            }
        } else if lit.positive {
            equations.push(lit.lin.clone());
        } else {
            inequations.push(lit.lin.clone());
        }
    }
    let reduced = ReducedExistential {
        vars: vars.to_vec(),
        pivots: pivot_vars,
        equations,
        inequations,
        multipliers,
    };
    (removables, reduced)
}
