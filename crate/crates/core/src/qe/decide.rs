use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::product::{product_translate, Factors, Index};
use super::{eliminate, ClopenCombination, Leaf, Structure};
use crate::error::{Error, Result};
use crate::formula::{atom_to_lin, Diagram, Flavor, Formula, Lin, LinLit};
use crate::par::{self, Exec};
use crate::residue::p_valuation;
use crate::tree::Apartness;
use crate::zhat::ZhatElem;
use crate::zp_add::{linear_combination, PadicInt};
use crate::zp_units::{torsion_order, UnitPadic};

pub const DEFAULT_FUEL: usize = 64;

#[derive(Debug, Clone)]
pub enum Value {
    Padic(PadicInt),
    Unit(UnitPadic),
    Zhat(ZhatElem),
}

/// Parameters, their positive diagram and a level budget for refutations.
#[derive(Debug, Clone)]
pub struct DecisionContext {
    pub structure: Structure,
    pub params: Vec<(String, Value)>,
    pub diagram: Diagram,
    pub fuel: usize,
    pub exec: Exec,
}

impl DecisionContext {
    pub fn new(
        structure: Structure,
        params: Vec<(String, Value)>,
        diagram: Diagram,
    ) -> Result<Self> {
        let names: Vec<&str> = params.iter().map(|(n, _)| n.as_str()).collect();
        let dnames: Vec<&str> = diagram.names().iter().map(String::as_str).collect();
        if names != dnames {
            return Err(Error::ArityMismatch {
                expected: names.len(),
                got: dnames.len(),
            });
        }
        for (name, v) in &params {
            let ok = match (structure, v) {
                (Structure::ZpPlus(p), Value::Padic(x)) => x.p == p,
                (Structure::ZpUnits(p), Value::Unit(u)) => u.p == p,
                (Structure::Zhat, Value::Zhat(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::Type(format!(
                    "parameter {name} is not an element of {structure}"
                )));
            }
        }
        Ok(DecisionContext {
            structure,
            params,
            diagram,
            fuel: DEFAULT_FUEL,
            exec: Exec::default(),
        })
    }

    pub fn with_fuel(mut self, fuel: usize) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|(n, _)| n.clone()).collect()
    }

    fn check_free(&self, f: &Formula) -> Result<()> {
        for s in f.free_vars() {
            if !self.params.iter().any(|(n, _)| *n == s.0) {
                return Err(Error::Type(format!(
                    "free symbol {s} has no parameter value"
                )));
            }
        }
        Ok(())
    }

    fn padic_params(&self, lin: &Lin, p: u64) -> Result<(Vec<BigInt>, Vec<PadicInt>)> {
        let mut cs = Vec::new();
        let mut xs = Vec::new();
        for (k, c) in &lin.0 {
            match self.params.iter().find(|(n, _)| *n == k.0) {
                Some((_, Value::Padic(x))) => xs.push(x.clone()),
                _ => return Err(Error::Type(format!("{k} is not a p-adic parameter"))),
            }
            cs.push(c.clone());
        }
        if xs.is_empty() {
            xs.push(PadicInt::zero(p));
            cs.push(BigInt::zero());
        }
        Ok((cs, xs))
    }

    fn zhat_value(&self, lin: &Lin, d: &BigInt) -> Result<ZhatElem> {
        let mut cs = Vec::new();
        let mut xs = Vec::new();
        for (k, c) in &lin.0 {
            match self.params.iter().find(|(n, _)| *n == k.0) {
                Some((_, Value::Zhat(x))) => xs.push(x.clone()),
                _ => return Err(Error::Type(format!("{k} is not a profinite parameter"))),
            }
            cs.push(c.clone());
        }
        Ok(ZhatElem::combine(&cs, &xs, d))
    }
}

/// Decide a parameter-only leaf: equations through the diagram, with a
/// fuel-bounded refutation when the diagram is not complete; congruences
/// from parameter labels.
pub fn decide_leaf(ctx: &DecisionContext, leaf: &Leaf) -> Result<bool> {
    match leaf {
        Leaf::Eq(lin) => {
            if ctx.diagram.entails(lin)? {
                return Ok(true);
            }
            if ctx.diagram.is_complete() {
                return Ok(false);
            }
            let apart = match ctx.structure {
                Structure::ZpPlus(p) => {
                    let (cs, xs) = ctx.padic_params(lin, p)?;
                    linear_combination(p, &cs, &xs).apart(&PadicInt::zero(p), ctx.fuel)
                }
                Structure::Zhat => ctx
                    .zhat_value(lin, &BigInt::zero())?
                    .apart_from_zero(ctx.fuel),
                Structure::ZpUnits(_) => {
                    return Err(Error::Unsupported(
                        "unit leaves are decided through the additive factor".into(),
                    ))
                }
            };
            match apart {
                Apartness::Witness(_) => Ok(false),
                Apartness::Unknown => Err(Error::FuelExhausted(ctx.fuel)),
            }
        }
        Leaf::Cong(c) => match ctx.structure {
            Structure::ZpPlus(p) => {
                let k = p_valuation(&c.modulus, p)? as usize;
                let (mut cs, mut xs) = ctx.padic_params(&c.lin, p)?;
                cs.push(c.offset.clone());
                xs.push(PadicInt::from_integer(p, 1));
                let m = crate::residue::pow_u(p, k as u32);
                Ok(linear_combination(p, &cs, &xs)
                    .label(k)
                    .mod_floor(&m)
                    .is_zero())
            }
            Structure::Zhat => Ok(ctx.zhat_value(&c.lin, &c.offset)?.divisible_by(&c.modulus)),
            Structure::ZpUnits(_) => Err(Error::Unsupported(
                "unit leaves are decided through the additive factor".into(),
            )),
        },
    }
}

/// Evaluate an eliminated combination. Leaves are decided up front (in
/// parallel when enabled); an error only surfaces if its leaf is consulted.
fn evaluate(ctx: &DecisionContext, comb: &ClopenCombination) -> Result<bool> {
    let mut leaves: Vec<Leaf> = comb.leaves().into_iter().cloned().collect();
    leaves.sort();
    leaves.dedup();
    let results = par::map(ctx.exec, &leaves, |l| decide_leaf(ctx, l));
    let table: BTreeMap<&Leaf, &Result<bool>> = leaves.iter().zip(&results).collect();
    comb.eval(&mut |l| match table[l] {
        Ok(b) => Ok(*b),
        Err(e) => Err(e.clone()),
    })
}

/// Truth of `f` at the parameters of `ctx`.
pub fn tree_decide(ctx: &DecisionContext, f: &Formula) -> Result<bool> {
    ctx.check_free(f)?;
    match ctx.structure {
        Structure::ZpPlus(_) => evaluate(ctx, &eliminate(f, ctx.structure)?),
        Structure::Zhat => decide_zhat(ctx, f),
        Structure::ZpUnits(_) => decide_units(ctx, f),
    }
}

/// Over Z^ the eliminated congruences are checked only at the primes
/// dividing their moduli.
pub fn decide_zhat(ctx: &DecisionContext, f: &Formula) -> Result<bool> {
    if ctx.structure != Structure::Zhat {
        return Err(Error::Unsupported(format!(
            "decide_zhat over {}",
            ctx.structure
        )));
    }
    ctx.check_free(f)?;
    evaluate(ctx, &eliminate(f, Structure::Zhat)?)
}

/// Rewrite multiplicative atoms as additive ones over exponent vectors.
pub fn to_additive(f: &Formula, flavor: Flavor) -> Result<Formula> {
    Ok(match f {
        Formula::Atom(a) => LinLit::eq(atom_to_lin(a, flavor)?).to_formula(),
        Formula::Not(g) => Formula::not(to_additive(g, flavor)?),
        Formula::And(gs) => Formula::And(
            gs.iter()
                .map(|g| to_additive(g, flavor))
                .collect::<Result<_>>()?,
        ),
        Formula::Or(gs) => Formula::Or(
            gs.iter()
                .map(|g| to_additive(g, flavor))
                .collect::<Result<_>>()?,
        ),
        Formula::Exists(v, g) => Formula::exists(v, to_additive(g, flavor)?),
        Formula::Forall(v, g) => Formula::forall(v, to_additive(g, flavor)?),
    })
}

/// Exhaustive truth of an additive formula in Z/t.
pub fn cyclic_decide(t: u64, f: &Formula, env: &HashMap<String, BigInt>) -> Result<bool> {
    let m = BigInt::from(t);
    let mut env = env.clone();
    cyclic(&m, f, &mut env)
}

fn cyclic(m: &BigInt, f: &Formula, env: &mut HashMap<String, BigInt>) -> Result<bool> {
    Ok(match f {
        Formula::Atom(a) => {
            let lin = atom_to_lin(a, Flavor::Additive)?;
            if let Some(s) = lin.vars().find(|s| !env.contains_key(*s)) {
                return Err(Error::Type(format!("unbound symbol {s}")));
            }
            let v = lin.eval(&|s| env[s].clone());
            v.mod_floor(m).is_zero()
        }
        Formula::Not(g) => !cyclic(m, g, env)?,
        Formula::And(gs) => {
            for g in gs {
                if !cyclic(m, g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if cyclic(m, g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(f, Formula::Exists(..));
            let saved = env.get(v).cloned();
            let mut x = BigInt::zero();
            let mut result = !want;
            while &x < m {
                env.insert(v.clone(), x.clone());
                if cyclic(m, g, env)? == want {
                    result = want;
                    break;
                }
                x += 1;
            }
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            result
        }
    })
}

/// Z_p^x as Z/t x Z_p^+: the torsion factor is decided exhaustively and
/// the free factor by elimination, with diagram {a : t*a in L}.
pub fn decide_units(ctx: &DecisionContext, f: &Formula) -> Result<bool> {
    let Structure::ZpUnits(p) = ctx.structure else {
        return Err(Error::Unsupported(format!(
            "decide_units over {}",
            ctx.structure
        )));
    };
    ctx.check_free(f)?;
    let t = torsion_order(p);
    let add = to_additive(f, Flavor::Multiplicative)?;
    let mut torsion_env = HashMap::new();
    let mut free_params = Vec::new();
    for (name, v) in &ctx.params {
        let Value::Unit(u) = v else {
            unreachable!("checked by DecisionContext::new")
        };
        torsion_env.insert(name.clone(), u.x.clone());
        free_params.push((name.clone(), Value::Padic(u.y.clone())));
    }
    let tb = BigInt::from(t);
    let diagram = match &ctx.diagram {
        Diagram::Complete(l) => Diagram::Scaled(l.clone(), tb),
        Diagram::Scaled(l, s) => Diagram::Scaled(l.clone(), s * tb),
        Diagram::Enumerated(l) => Diagram::Enumerated(l.saturate_by(&tb)),
    };
    let free_ctx = DecisionContext {
        structure: Structure::ZpPlus(p),
        params: free_params,
        diagram,
        fuel: ctx.fuel,
        exec: ctx.exec,
    };
    let translated = product_translate(&add, Factors::Finite(2))?;
    translated.eval(&mut |leaf| match leaf.index {
        Index::At(0) => cyclic_decide(t, &leaf.formula, &torsion_env),
        Index::At(1) => tree_decide(&free_ctx, &leaf.formula),
        _ => unreachable!("finite translation yields indexed leaves"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, RelationLattice};

    fn zp_ctx(p: u64, vals: &[(&str, PadicInt)], basis: &[&[i64]]) -> DecisionContext {
        let names: Vec<&str> = vals.iter().map(|(n, _)| *n).collect();
        let lat = RelationLattice::from_i64(&names, basis).unwrap();
        DecisionContext::new(
            Structure::ZpPlus(p),
            vals.iter()
                .map(|(n, v)| (n.to_string(), Value::Padic(v.clone())))
                .collect(),
            Diagram::Complete(lat),
        )
        .unwrap()
    }

    #[test]
    fn padic_examples() {
        let ctx = zp_ctx(
            3,
            &[
                ("c1", PadicInt::from_integer(3, 1)),
                ("c2", PadicInt::from_integer(3, 2)),
            ],
            &[&[2, -1]],
        );
        assert!(tree_decide(&ctx, &parse("EX G. c1 = 2*G & G != c2").unwrap()).unwrap());
        assert!(tree_decide(&ctx, &parse("c1 = c1").unwrap()).unwrap());
        assert!(tree_decide(&ctx, &parse("c2 = 2*c1").unwrap()).unwrap());
        assert!(!tree_decide(&ctx, &parse("c2 = c1").unwrap()).unwrap());
        assert!(!tree_decide(&ctx, &parse("EX G. c1 = 3*G").unwrap()).unwrap());
        let empty = zp_ctx(2, &[], &[]);
        assert!(!tree_decide(&empty, &parse("ALL F. EX G. F = 2*G").unwrap()).unwrap());
        let empty3 = zp_ctx(3, &[], &[]);
        assert!(tree_decide(&empty3, &parse("ALL F. EX G. F = 2*G").unwrap()).unwrap());
    }

    #[test]
    fn unbound_symbol() {
        let ctx = zp_ctx(3, &[], &[]);
        assert!(matches!(
            tree_decide(&ctx, &parse("c1 = 0").unwrap()),
            Err(Error::Type(_))
        ));
    }

    #[test]
    fn free_form_needs_fuel() {
        let one = PadicInt::from_integer(3, 1);
        let lat = RelationLattice::from_i64(&["c1", "c2"], &[]).unwrap();
        let params = vec![
            ("c1".to_string(), Value::Padic(one.clone())),
            ("c2".to_string(), Value::Padic(one)),
        ];
        let ctx = DecisionContext::new(Structure::ZpPlus(3), params, Diagram::Enumerated(lat))
            .unwrap()
            .with_fuel(10);
        assert!(matches!(
            tree_decide(&ctx, &parse("c1 = c2").unwrap()),
            Err(Error::FuelExhausted(10))
        ));
        assert!(!tree_decide(&ctx, &parse("c1 = 0").unwrap()).unwrap());
    }

    #[test]
    fn zhat_examples() {
        let mk = |z: i64| {
            let lat = RelationLattice::from_i64(&["c"], &[]).unwrap();
            DecisionContext::new(
                Structure::Zhat,
                vec![("c".into(), Value::Zhat(ZhatElem::from_integer(z)))],
                Diagram::Complete(lat),
            )
            .unwrap()
        };
        let f = parse("EX G. 2*G = c").unwrap();
        assert!(tree_decide(&mk(6), &f).unwrap());
        assert!(!tree_decide(&mk(3), &f).unwrap());
        assert!(tree_decide(&mk(5), &parse("EX G. G = c").unwrap()).unwrap());
    }

    #[test]
    fn unit_examples() {
        let mk = |c: u64| {
            let u = crate::zp_units::iso_backward(
                &crate::zp_units::UnitLabelPath::from_padic(&PadicInt::from_integer(5, c)).unwrap(),
            );
            // Units of infinite order generate a free cyclic group.
            let lat = RelationLattice::from_i64(&["c"], &[]).unwrap();
            DecisionContext::new(
                Structure::ZpUnits(5),
                vec![("c".into(), Value::Unit(u))],
                Diagram::Complete(lat),
            )
            .unwrap()
        };
        let f = parse("EX G. G*G = c").unwrap();
        assert!(tree_decide(&mk(4), &f).unwrap());
        assert!(!tree_decide(&mk(2), &f).unwrap());
        assert!(tree_decide(&mk(2), &parse("EX G. G = c").unwrap()).unwrap());
    }

    #[test]
    fn cyclic_group() {
        let env = HashMap::from([("c".to_string(), BigInt::from(2))]);
        assert!(cyclic_decide(4, &parse("EX G. 2*G = c").unwrap(), &env).unwrap());
        assert!(!cyclic_decide(4, &parse("ALL G. 2*G = c").unwrap(), &env).unwrap());
    }
}
