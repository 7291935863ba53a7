//! Witnesses for existential formulas with disjunction-free matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::decide::{tree_decide, DecisionContext, Value};
use super::Structure;
use crate::error::{Error, Result};
use crate::formula::normal::{split_prefix, Quant};
use crate::formula::reduce::{conjunctive_literals, reduce_literals};
use crate::formula::{to_nnf, to_prenex, Flavor, Formula, Lin};
use crate::residue::{p_valuation, pow_u};
use crate::zp_add::{linear_combination, solve_scaled, PadicInt, SolveOutcome};

/// Bound on the residue tuples searched for free variables.
pub const SKOLEM_SEARCH_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub enum SkolemWitness {
    Witness(Vec<(String, PadicInt)>),
    /// The formula is false at the parameters; the paths are placeholders.
    NotApplicable(Vec<(String, PadicInt)>),
}

impl SkolemWitness {
    pub fn paths(&self) -> &[(String, PadicInt)] {
        match self {
            SkolemWitness::Witness(w) | SkolemWitness::NotApplicable(w) => w,
        }
    }
}

fn has_disjunction(f: &Formula) -> bool {
    let mut found = false;
    f.visit(&mut |g| found |= matches!(g, Formula::Or(gs) if gs.len() > 1));
    found
}

/// Value of `lin` with parameters from the context and integer values
/// for already chosen variables.
fn evaluate(
    p: u64,
    ctx: &DecisionContext,
    lin: &Lin,
    chosen: &[(String, BigInt)],
) -> Result<PadicInt> {
    let mut cs = vec![BigInt::zero()];
    let mut xs = vec![PadicInt::zero(p)];
    for (k, c) in &lin.0 {
        let x = if let Some((_, v)) = chosen.iter().find(|(n, _)| *n == k.0) {
            PadicInt::from_integer(p, v.clone())
        } else {
            match ctx.params.iter().find(|(n, _)| *n == k.0) {
                Some((_, Value::Padic(x))) => x.clone(),
                _ => return Err(Error::Type(format!("{k} is not a p-adic parameter"))),
            }
        };
        cs.push(c.clone());
        xs.push(x);
    }
    Ok(linear_combination(p, &cs, &xs))
}

/// Digit of `x` at `level` (1-based) in base p.
fn digit(x: &PadicInt, level: usize) -> BigInt {
    let p = x.p;
    let hi = x.label(level);
    let lo = if level > 1 {
        x.label(level - 1)
    } else {
        BigInt::zero()
    };
    (hi - lo) / pow_u(p, level as u32 - 1)
}

/// Witnesses for `EX G1 ... EX Gk. matrix` over Z_p^+.
///
/// Pivot variables are solved from their equations; the remaining
/// variables take the least residue tuple meeting the divisibility
/// conditions, then one digit per inequation steers clear of its root.
pub fn skolem(ctx: &DecisionContext, f: &Formula) -> Result<SkolemWitness> {
    let Structure::ZpPlus(p) = ctx.structure else {
        return Err(Error::Unsupported(format!(
            "witnesses over {}",
            ctx.structure
        )));
    };
    let prenex = to_prenex(f);
    let (prefix, matrix) = split_prefix(&prenex);
    if prefix.iter().any(|(q, _)| *q == Quant::Forall) {
        return Err(Error::Unsupported(
            "universal quantifier in a witness prefix".into(),
        ));
    }
    let matrix = to_nnf(matrix);
    if has_disjunction(&matrix) {
        return Err(Error::DisjunctionPresent);
    }
    let vars: Vec<String> = prefix.into_iter().map(|(_, v)| v).collect();
    let zeros = || {
        vars.iter()
            .map(|v| (v.clone(), PadicInt::zero(p)))
            .collect::<Vec<_>>()
    };
    if !tree_decide(ctx, &prenex)? {
        return Ok(SkolemWitness::NotApplicable(zeros()));
    }
    let lits = conjunctive_literals(&matrix, Flavor::Additive)?;
    let (_, red) = reduce_literals(&vars, lits);

    let free: Vec<String> = vars
        .iter()
        .filter(|v| !red.pivots.contains(v))
        .cloned()
        .collect();
    let conds: Vec<(BigInt, Lin)> = red
        .pivots
        .iter()
        .zip(&red.equations)
        .map(|(v, eq)| {
            let e = p_valuation(&eq.coeff(v), p).expect("pivot coefficients are nonzero");
            (pow_u(p, e), eq.without(v))
        })
        .collect();
    let k = conds
        .iter()
        .map(|(m, _)| p_valuation(m, p).unwrap())
        .max()
        .unwrap_or(0);
    let modulus = pow_u(p, k);
    let searched: Vec<String> = free
        .iter()
        .filter(|u| conds.iter().any(|(_, r)| r.mentions(u)))
        .cloned()
        .collect();
    let space = num_traits::pow(modulus.clone(), searched.len());
    if space > BigInt::from(SKOLEM_SEARCH_LIMIT) {
        return Err(Error::TooLarge(format!("{space} residue tuples")));
    }
    let mut chosen: Vec<(String, BigInt)> = Vec::new();
    let mut idx = BigInt::zero();
    let found = loop {
        if idx >= space {
            break false;
        }
        let mut rest = idx.clone();
        let trial: Vec<(String, BigInt)> = searched
            .iter()
            .map(|u| {
                let (q, r) = rest.div_rem(&modulus);
                rest = q;
                (u.clone(), r)
            })
            .collect();
        let mut ok = true;
        for (m, r) in &conds {
            let level = p_valuation(m, p).unwrap() as usize;
            if level > 0
                && !evaluate(p, ctx, r, &trial)?
                    .label(level)
                    .mod_floor(m)
                    .is_zero()
            {
                ok = false;
                break;
            }
        }
        if ok {
            chosen = trial;
            break true;
        }
        idx += 1;
    };
    if !found {
        return Err(Error::Unsupported(
            "no residue class meets the pivot conditions".into(),
        ));
    }

    // Inequations are handled by their last free variable.
    let mut values: Vec<(String, BigInt)> = Vec::new();
    for u in &free {
        let mut x = chosen
            .iter()
            .find(|(n, _)| n == u)
            .map_or(BigInt::zero(), |(_, r)| r.clone());
        let mut level = k as usize;
        for ne in &red.inequations {
            let last = free.iter().rev().find(|w| ne.mentions(w));
            if last != Some(u) {
                continue;
            }
            let a = ne.coeff(u);
            let s = evaluate(p, ctx, &ne.without(u), &values)?;
            if let SolveOutcome::Unique(h) = solve_scaled(p, &a, &s.neg()) {
                level += 1;
                let d = (digit(&h, level) + BigInt::one()).mod_floor(&BigInt::from(p));
                x += d * pow_u(p, level as u32 - 1);
            }
        }
        values.push((u.clone(), x));
    }

    let mut out = Vec::new();
    for v in &vars {
        if let Some((_, x)) = values.iter().find(|(n, _)| n == v) {
            out.push((v.clone(), PadicInt::from_integer(p, x.clone())));
            continue;
        }
        let i = red
            .pivots
            .iter()
            .position(|w| w == v)
            .expect("every variable is free or a pivot");
        let eq = &red.equations[i];
        let rest = evaluate(p, ctx, &eq.without(v), &values)?;
        match solve_scaled(p, &eq.coeff(v), &rest.neg()) {
            SolveOutcome::Unique(g) => out.push((v.clone(), g)),
            _ => {
                return Err(Error::Unsupported(
                    "pivot equation lost its solution".into(),
                ))
            }
        }
    }
    Ok(SkolemWitness::Witness(out))
}
