//! Path expressions for parameters, and the relation diagrams that can be
//! read off them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use treepres::formula::{
    atom_to_lin, integer_kernel, parse_atom, Diagram, Flavor, RelationLattice,
};
use treepres::reals::{newton_sqrt, FastCauchyReal, Poly, RealDiagram};
use treepres::residue::{factorize, pow_u};
use treepres::zhat::ZhatElem;
use treepres::zp_add::{solve_linear, LinearEquation, PadicInt, SolveOutcome};
use treepres::zp_units::{iso_backward, UnitLabelPath, UnitPadic};
use treepres::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Rat(BigInt, BigInt),
    Solve {
        eq: String,
        args: Vec<Expr>,
    },
    Unit {
        p: u64,
        x: BigInt,
        y: Box<Expr>,
    },
    Override {
        prime: u64,
        coord: Box<Expr>,
        base: Box<Expr>,
    },
    NewtonSqrt(u64),
    File(String),
}

/// Which structure a parameter lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    ZpPlus(u64),
    ZpUnits(u64),
    Zhat,
    Prod(Vec<u64>),
    Real,
}

/// What is known exactly about a value, for diagram derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exact {
    Rational(BigRational),
    Sqrt(u64),
    Unknown,
}

#[derive(Debug, Clone)]
pub enum Val {
    Padic(PadicInt),
    Unit(UnitPadic, Exact),
    Zhat(ZhatElem),
    Prod(Vec<PadicInt>),
    Real(FastCauchyReal, Exact),
}

fn type_err(msg: impl Into<String>) -> Error {
    Error::Type(msg.into())
}

fn syntax(msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos: 0,
        msg: msg.into(),
    }
}

/// Split at depth-0 occurrences of `sep`.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return false;
        }
    }
    depth == 0
}

fn int_arg(s: &str) -> Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| syntax(format!("expected an integer, found {s:?}")))
}

fn u64_arg(s: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|_| syntax(format!("expected a natural number, found {s:?}")))
}

fn arity(name: &str, groups: &[Vec<&str>], shape: &[usize]) -> Result<()> {
    let got: Vec<usize> = groups.iter().map(Vec::len).collect();
    if got != shape {
        return Err(syntax(format!(
            "{name} expects argument groups {shape:?}, got {got:?}"
        )));
    }
    Ok(())
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let t = text.trim();
    let open = t
        .find('(')
        .ok_or_else(|| syntax(format!("expected name(...), found {t:?}")))?;
    if !t.ends_with(')') {
        return Err(syntax(format!("unbalanced parentheses in {t:?}")));
    }
    let name = t[..open].trim();
    let inner = &t[open + 1..t.len() - 1];
    if !balanced(inner) {
        return Err(syntax(format!("unbalanced parentheses in {t:?}")));
    }
    let groups: Vec<Vec<&str>> = split_top(inner, ';')
        .into_iter()
        .map(|g| split_top(g, ','))
        .collect();
    Ok(match name {
        "int" => {
            arity(name, &groups, &[1])?;
            Expr::Int(int_arg(groups[0][0])?)
        }
        "rat" => {
            arity(name, &groups, &[2])?;
            let den = int_arg(groups[0][1])?;
            if den.is_zero() {
                return Err(type_err("rat with zero denominator"));
            }
            Expr::Rat(int_arg(groups[0][0])?, den)
        }
        "solve" => {
            if groups.len() != 2 || groups[0].len() != 1 {
                return Err(syntax("solve expects (equation; expr, ...)"));
            }
            let args = groups[1]
                .iter()
                .filter(|s| !s.is_empty())
                .map(|s| parse_expr(s))
                .collect::<Result<_>>()?;
            Expr::Solve {
                eq: groups[0][0].to_string(),
                args,
            }
        }
        "unit" => {
            arity(name, &groups, &[1, 2])?;
            Expr::Unit {
                p: u64_arg(groups[0][0])?,
                x: int_arg(groups[1][0])?,
                y: Box::new(parse_expr(groups[1][1])?),
            }
        }
        "override" => {
            arity(name, &groups, &[2, 1])?;
            Expr::Override {
                prime: u64_arg(groups[0][0])?,
                coord: Box::new(parse_expr(groups[0][1])?),
                base: Box::new(parse_expr(groups[1][0])?),
            }
        }
        "newton_sqrt" => {
            arity(name, &groups, &[1])?;
            let k = u64_arg(groups[0][0])?;
            if k == 0 {
                return Err(type_err("newton_sqrt needs k > 0"));
            }
            Expr::NewtonSqrt(k)
        }
        "file" => {
            arity(name, &groups, &[1])?;
            Expr::File(groups[0][0].to_string())
        }
        other => return Err(syntax(format!("unknown path expression {other}"))),
    })
}

fn padic_rational(p: u64, a: &BigInt, b: &BigInt) -> Result<PadicInt> {
    PadicInt::from_rational(p, a.clone(), b.clone())
        .map_err(|e| type_err(format!("rat({a},{b}) at p = {p}: {e}")))
}

fn read_labels(path: &str, p: u64) -> Result<Vec<BigInt>> {
    let text = std::fs::read_to_string(path).map_err(|e| type_err(format!("{path}: {e}")))?;
    let labels: Vec<BigInt> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(int_arg)
        .collect::<Result<_>>()?;
    if labels.is_empty() {
        return Err(type_err(format!("{path}: no labels")));
    }
    for (i, l) in labels.iter().enumerate() {
        let m = pow_u(p, i as u32 + 1);
        let coherent = i == 0 || l.mod_floor(&pow_u(p, i as u32)) == labels[i - 1];
        if l.is_negative() || *l >= m || !coherent {
            return Err(type_err(format!(
                "{path}: label {l} at level {} is not coherent",
                i + 1
            )));
        }
    }
    Ok(labels)
}

fn eval_padic(e: &Expr, p: u64) -> Result<PadicInt> {
    Ok(match e {
        Expr::Int(z) => PadicInt::from_integer(p, z.clone()),
        Expr::Rat(a, b) => padic_rational(p, a, b)?,
        Expr::Solve { eq, args } => {
            let atom = parse_atom(eq)?;
            let lin = atom_to_lin(&atom, Flavor::Additive)?;
            if !lin.mentions("G") {
                return Err(type_err(format!(
                    "solve: {eq} does not mention the unknown G"
                )));
            }
            let inputs: Vec<String> = lin.vars().filter(|s| *s != "G").map(String::from).collect();
            if inputs.len() != args.len() {
                return Err(Error::ArityMismatch {
                    expected: inputs.len(),
                    got: args.len(),
                });
            }
            let f: Vec<PadicInt> = args
                .iter()
                .map(|a| eval_padic(a, p))
                .collect::<Result<_>>()?;
            let coeffs = inputs.iter().map(|s| lin.coeff(s)).collect();
            let b = -lin.coeff("G");
            match solve_linear(&LinearEquation { coeffs, b }, &f)? {
                SolveOutcome::Unique(g) => g,
                SolveOutcome::NoSolution => {
                    return Err(type_err(format!("solve: {eq} has no solution")))
                }
                SolveOutcome::AllSolutions(_) => {
                    return Err(type_err(format!("solve: {eq} does not determine G")))
                }
            }
        }
        Expr::File(path) => {
            let labels = read_labels(path, p)?;
            let last = labels.last().unwrap().clone();
            PadicInt::from_fn(p, move |n| {
                labels.get(n - 1).cloned().unwrap_or_else(|| last.clone())
            })
        }
        other => return Err(type_err(format!("{other:?} is not an element of Z_{p}^+"))),
    })
}

fn rational_unit(p: u64, q: BigRational) -> Result<Val> {
    let x = PadicInt::from_rational(p, q.numer().clone(), q.denom().clone())
        .map_err(|e| type_err(e.to_string()))?;
    let w = UnitLabelPath::from_padic(&x)
        .map_err(|_| type_err(format!("{q} is not a unit at p = {p}")))?;
    Ok(Val::Unit(iso_backward(&w), Exact::Rational(q)))
}

pub fn eval(e: &Expr, kind: &Kind) -> Result<Val> {
    match kind {
        Kind::ZpPlus(p) => Ok(Val::Padic(eval_padic(e, *p)?)),
        Kind::ZpUnits(p) => match e {
            Expr::Int(z) => rational_unit(*p, BigRational::from_integer(z.clone())),
            Expr::Rat(a, b) => rational_unit(*p, BigRational::new(a.clone(), b.clone())),
            Expr::Unit { p: q, x, y } => {
                if q != p {
                    return Err(type_err(format!("unit at p = {q} in Z_{p}^x")));
                }
                Ok(Val::Unit(
                    UnitPadic::new(*p, x.clone(), eval_padic(y, *p)?)?,
                    Exact::Unknown,
                ))
            }
            other => Err(type_err(format!("{other:?} is not an element of Z_{p}^x"))),
        },
        Kind::Zhat => match e {
            Expr::Int(z) => Ok(Val::Zhat(ZhatElem::from_integer(z.clone()))),
            other => Err(type_err(format!("{other:?} is not an element of Zhat"))),
        },
        Kind::Prod(ps) => match e {
            Expr::Int(_) | Expr::Rat(..) => Ok(Val::Prod(
                ps.iter()
                    .map(|&p| eval_padic(e, p))
                    .collect::<Result<_>>()?,
            )),
            Expr::Override { prime, coord, base } => {
                let i = ps
                    .iter()
                    .position(|q| q == prime)
                    .ok_or_else(|| type_err(format!("{prime} is not a factor prime")))?;
                let Val::Prod(mut xs) = eval(base, kind)? else {
                    unreachable!("product expressions evaluate to products")
                };
                xs[i] = eval_padic(coord, *prime)?;
                Ok(Val::Prod(xs))
            }
            other => Err(type_err(format!(
                "{other:?} is not an element of the product"
            ))),
        },
        Kind::Real => match e {
            Expr::Int(z) => Ok(Val::Real(
                FastCauchyReal::from_integer(z.clone()),
                Exact::Rational(BigRational::from_integer(z.clone())),
            )),
            Expr::Rat(a, b) => {
                let q = BigRational::new(a.clone(), b.clone());
                Ok(Val::Real(
                    FastCauchyReal::from_rational(q.clone()),
                    Exact::Rational(q),
                ))
            }
            Expr::NewtonSqrt(k) => Ok(Val::Real(newton_sqrt(*k), Exact::Sqrt(*k))),
            Expr::File(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| type_err(format!("{path}: {e}")))?;
                Ok(Val::Real(
                    FastCauchyReal::from_decimal(&text)?,
                    Exact::Unknown,
                ))
            }
            other => Err(type_err(format!("{other:?} is not a real"))),
        },
    }
}

/// Relations sum a_i q_i = 0 among the known rationals; unknown values get
/// no relations, which leaves the diagram incomplete.
pub fn additive_diagram(names: &[String], vals: &[Option<BigRational>]) -> Diagram {
    let known: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_some()).collect();
    let den = known.iter().fold(BigInt::one(), |acc, &i| {
        acc.lcm(vals[i].as_ref().unwrap().denom())
    });
    let columns: Vec<Vec<BigInt>> = known
        .iter()
        .map(|&i| vec![(vals[i].as_ref().unwrap() * &den).to_integer()])
        .collect();
    finish(names, &known, &columns, known.len() == vals.len())
}

/// Relations prod q_i^a_i = 1 among the known rationals, from prime
/// exponents and the parity of signs.
pub fn multiplicative_diagram(names: &[String], vals: &[Option<BigRational>]) -> Diagram {
    let known: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_some()).collect();
    let mut primes: Vec<BigInt> = Vec::new();
    let mut exps: Vec<Vec<(BigInt, i64)>> = Vec::new();
    for &i in &known {
        let q = vals[i].as_ref().unwrap();
        let mut e: Vec<(BigInt, i64)> = factorize(q.numer())
            .into_iter()
            .map(|(l, k)| (l, k as i64))
            .collect();
        e.extend(
            factorize(q.denom())
                .into_iter()
                .map(|(l, k)| (l, -(k as i64))),
        );
        for (l, _) in &e {
            if !primes.contains(l) {
                primes.push(l.clone());
            }
        }
        exps.push(e);
    }
    primes.sort();
    let column = |e: &[(BigInt, i64)], sign: bool| -> Vec<BigInt> {
        let mut c: Vec<BigInt> = primes
            .iter()
            .map(|l| {
                BigInt::from(
                    e.iter()
                        .filter(|(m, _)| m == l)
                        .map(|(_, k)| k)
                        .sum::<i64>(),
                )
            })
            .collect();
        c.push(BigInt::from(sign as i32));
        c
    };
    let mut columns: Vec<Vec<BigInt>> = known
        .iter()
        .zip(&exps)
        .map(|(&i, e)| column(e, vals[i].as_ref().unwrap().is_negative()))
        .collect();
    // An extra column 2 in the sign row makes the sign condition mod 2.
    let mut two = vec![BigInt::zero(); primes.len()];
    two.push(BigInt::from(2));
    columns.push(two);
    let k = known.len();
    let kernel: Vec<Vec<BigInt>> = integer_kernel(&columns)
        .into_iter()
        .map(|mut v| {
            v.truncate(k);
            v
        })
        .collect();
    embed(names, &known, kernel, known.len() == vals.len())
}

fn finish(names: &[String], known: &[usize], columns: &[Vec<BigInt>], complete: bool) -> Diagram {
    embed(names, known, integer_kernel(columns), complete)
}

fn embed(names: &[String], known: &[usize], kernel: Vec<Vec<BigInt>>, complete: bool) -> Diagram {
    let basis = kernel
        .into_iter()
        .map(|v| {
            let mut full = vec![BigInt::zero(); names.len()];
            for (j, &i) in known.iter().enumerate() {
                full[i] = v[j].clone();
            }
            full
        })
        .collect();
    let l = RelationLattice::new(names.to_vec(), basis).expect("rows match the names");
    if complete {
        Diagram::Complete(l)
    } else {
        Diagram::Enumerated(l)
    }
}

/// Defining polynomials b*c - a for rationals and c*c - k for square roots.
pub fn real_diagram(names: &[String], vals: &[Exact]) -> RealDiagram {
    let n = names.len();
    let basis = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| match v {
            Exact::Rational(q) => Some(
                Poly::var(n, i)
                    .scale(q.denom())
                    .sub(&Poly::constant(n, q.numer().clone())),
            ),
            Exact::Sqrt(k) => Some(
                Poly::var(n, i)
                    .mul(&Poly::var(n, i))
                    .sub(&Poly::constant(n, *k)),
            ),
            Exact::Unknown => None,
        })
        .collect();
    RealDiagram {
        names: names.to_vec(),
        basis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses() {
        assert_eq!(parse_expr("int(0)").unwrap(), Expr::Int(BigInt::zero()));
        assert_eq!(
            parse_expr(" rat(1, 2) ").unwrap(),
            Expr::Rat(1.into(), 2.into())
        );
        assert!(matches!(
            parse_expr("solve(F = 2*G; int(1))").unwrap(),
            Expr::Solve { .. }
        ));
        assert!(matches!(
            parse_expr("override(7, int(3); int(4))").unwrap(),
            Expr::Override { prime: 7, .. }
        ));
        assert!(parse_expr("int(1").is_err());
        assert!(parse_expr("frob(1)").is_err());
        assert!(parse_expr("rat(1)").is_err());
    }

    #[test]
    fn type_checks() {
        let Val::Padic(x) = eval(&parse_expr("rat(1,2)").unwrap(), &Kind::ZpPlus(3)).unwrap()
        else {
            panic!()
        };
        assert_eq!(
            x.prefix(3),
            vec![BigInt::from(2), BigInt::from(5), BigInt::from(14)]
        );
        assert!(matches!(
            eval(&parse_expr("rat(1,2)").unwrap(), &Kind::ZpPlus(2)),
            Err(Error::Type(_))
        ));
        assert!(matches!(
            eval(&parse_expr("int(3)").unwrap(), &Kind::ZpUnits(3)),
            Err(Error::Type(_))
        ));
        assert!(matches!(
            eval(&parse_expr("newton_sqrt(2)").unwrap(), &Kind::ZpPlus(3)),
            Err(Error::Type(_))
        ));
        let Val::Padic(g) = eval(
            &parse_expr("solve(F = 2*G; int(1))").unwrap(),
            &Kind::ZpPlus(3),
        )
        .unwrap() else {
            panic!()
        };
        assert_eq!(g.label(4), BigInt::from(41));
    }

    #[test]
    fn diagrams() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let q = |a: i64, b: i64| Some(BigRational::new(a.into(), b.into()));
        let d = additive_diagram(&names, &[q(1, 2), q(3, 2), q(0, 1)]);
        assert!(d.is_complete());
        let l = d.lattice();
        assert!(l.contains(&[3.into(), (-1).into(), 0.into()]).unwrap());
        assert!(l.contains(&[0.into(), 0.into(), 1.into()]).unwrap());
        assert!(!l.contains(&[1.into(), 0.into(), 0.into()]).unwrap());
        let m = multiplicative_diagram(&names, &[q(2, 1), q(4, 1), q(-1, 1)]).lattice();
        assert!(m.contains(&[2.into(), (-1).into(), 0.into()]).unwrap());
        assert!(m.contains(&[0.into(), 0.into(), 2.into()]).unwrap());
        assert!(!m.contains(&[0.into(), 0.into(), 1.into()]).unwrap());
        assert!(!additive_diagram(&names, &[q(1, 1), None, q(2, 1)]).is_complete());
    }
}
