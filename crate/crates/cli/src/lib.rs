//! Command-line front end: deciding formulas, Skolem witnesses, evaluating
//! and solving over the presented structures, and the adversary demos.

pub mod expr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde_json::{json, Value as Json};

use treepres::formula::{atom_to_lin, parse, parse_atom, parse_diagram, Diagram, Flavor, Formula};
use treepres::oracle::{
    decision_stub_library, or_issue_adversary, product_units_adversary, skolem_stub_library,
    OrRefutation, ProductRefutation,
};
use treepres::qe::DEFAULT_FUEL;
use treepres::qe::{
    decide_product, skolem, tree_decide, DecisionContext, SkolemWitness, Structure, Value,
};
use treepres::reals::{decide_qf_real, FastCauchyReal, RealDiagram};
use treepres::residue::is_prime;
use treepres::tree::Apartness;
use treepres::zp_add::{
    coherent_to_digits, digits_to_coherent, solve_linear, LinearEquation, PadicInt, SolveOutcome,
};
use treepres::zp_units::{iso_backward, iso_forward};
use treepres::{Error, Result};

use expr::{
    additive_diagram, eval, multiplicative_diagram, parse_expr, real_diagram, Exact, Kind, Val,
};

#[derive(Parser, Debug)]
#[command(
    name = "treepres",
    version,
    about = "Decide, solve and witness formulas over tree-presented structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a sentence at the given parameters
    Decide(Common),
    /// Witness paths for an existential formula without disjunctions
    Skolem(Common),
    /// Print the labels of a path expression
    Eval {
        #[command(flatten)]
        common: Common,
        expr: String,
    },
    /// Solve a linear equation for its one unknown
    Solve(Common),
    /// Run a path through an isomorphism and back
    Iso {
        #[command(flatten)]
        common: Common,
        expr: String,
    },
    /// Adversaries against procedures that read finite prefixes
    Demo {
        which: DemoKind,
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Use bound: levels read (or-issue) or prime coordinates read (product-units)
        #[arg(long = "use", default_value_t = 3)]
        use_bound: usize,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DemoKind {
    OrIssue,
    ProductUnits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StructureArg {
    #[value(name = "zp+")]
    ZpPlus,
    #[value(name = "zpx")]
    ZpUnits,
    Zhat,
    Prod,
    Real,
}

impl StructureArg {
    fn name(self) -> &'static str {
        match self {
            StructureArg::ZpPlus => "zp+",
            StructureArg::ZpUnits => "zpx",
            StructureArg::Zhat => "zhat",
            StructureArg::Prod => "prod",
            StructureArg::Real => "real",
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value = "zp+")]
    structure: StructureArg,
    /// Prime, or comma-separated primes for prod
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    formula: Option<String>,
    /// NAME=EXPR, repeatable
    #[arg(long = "param")]
    params: Vec<String>,
    /// Relation diagram overriding the derived one
    #[arg(long)]
    diagram: Option<String>,
    #[arg(long, default_value_t = 8)]
    levels: usize,
    #[arg(long)]
    fuel: Option<usize>,
    #[arg(long)]
    json: bool,
}

/// Exit code, standard output and standard error of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Reply {
    code: i32,
    text: String,
    json: Json,
}

impl Reply {
    fn verdict(b: bool, json: Json) -> Reply {
        Reply {
            code: if b { 0 } else { 1 },
            text: b.to_string(),
            json,
        }
    }
}

enum Setup {
    Single(DecisionContext),
    Prod(Vec<DecisionContext>),
    Real(Vec<FastCauchyReal>, RealDiagram),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Type(msg.into())
}

fn json_labels(v: &[BigInt]) -> Json {
    Json::Array(
        v.iter()
            .map(|x| {
                x.to_i64()
                    .map_or_else(|| json!(x.to_string()), |i| json!(i))
            })
            .collect(),
    )
}

fn show_labels(v: &[BigInt]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn primes(c: &Common) -> Result<Vec<u64>> {
    let text =
        c.p.as_deref()
            .ok_or_else(|| usage(format!("--p is required for {}", c.structure.name())))?;
    let ps: Vec<u64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("bad prime {s:?}")))
        })
        .collect::<Result<_>>()?;
    if let Some(q) = ps.iter().find(|&&q| !is_prime(q)) {
        return Err(usage(format!("{q} is not prime")));
    }
    if ps.is_empty() {
        return Err(usage("no primes given"));
    }
    Ok(ps)
}

fn single_prime(c: &Common) -> Result<u64> {
    match primes(c)?.as_slice() {
        [p] => Ok(*p),
        _ => Err(usage(format!(
            "{} takes a single prime",
            c.structure.name()
        ))),
    }
}

fn kind(c: &Common) -> Result<Kind> {
    Ok(match c.structure {
        StructureArg::ZpPlus => Kind::ZpPlus(single_prime(c)?),
        StructureArg::ZpUnits => Kind::ZpUnits(single_prime(c)?),
        StructureArg::Zhat => Kind::Zhat,
        StructureArg::Prod => Kind::Prod(primes(c)?),
        StructureArg::Real => Kind::Real,
    })
}

fn params(c: &Common, kind: &Kind) -> Result<Vec<(String, Val)>> {
    let mut out: Vec<(String, Val)> = Vec::new();
    for item in &c.params {
        let (name, text) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects NAME=EXPR, got {item:?}")))?;
        let name = name.trim().to_string();
        if out.iter().any(|(n, _)| *n == name) {
            return Err(usage(format!("parameter {name} given twice")));
        }
        out.push((name, eval(&parse_expr(text)?, kind)?));
    }
    Ok(out)
}

fn diagram_text(c: &Common) -> Result<Option<String>> {
    c.diagram
        .as_ref()
        .map(|path| std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}"))))
        .transpose()
}

fn setup(c: &Common) -> Result<Setup> {
    let kind = kind(c)?;
    let ps = params(c, &kind)?;
    let names: Vec<String> = ps.iter().map(|(n, _)| n.clone()).collect();
    let text = diagram_text(c)?;
    let fuel = c.fuel.unwrap_or(DEFAULT_FUEL);
    let single = |structure: Structure,
                  values: Vec<(String, Value)>,
                  derived: Diagram,
                  flavor: Flavor|
     -> Result<Setup> {
        let d = match &text {
            Some(t) => parse_diagram(t, &names, flavor)?,
            None => derived,
        };
        Ok(Setup::Single(
            DecisionContext::new(structure, values, d)?.with_fuel(fuel),
        ))
    };
    match &kind {
        Kind::ZpPlus(p) => {
            let mut values = Vec::new();
            let mut exact = Vec::new();
            for (n, v) in ps {
                let Val::Padic(x) = v else {
                    unreachable!("evaluated in Z_p^+")
                };
                exact.push(x.exact().cloned());
                values.push((n, Value::Padic(x)));
            }
            single(
                Structure::ZpPlus(*p),
                values,
                additive_diagram(&names, &exact),
                Flavor::Additive,
            )
        }
        Kind::ZpUnits(p) => {
            let mut values = Vec::new();
            let mut exact = Vec::new();
            for (n, v) in ps {
                let Val::Unit(u, e) = v else {
                    unreachable!("evaluated in Z_p^x")
                };
                exact.push(match e {
                    Exact::Rational(q) => Some(q),
                    _ => None,
                });
                values.push((n, Value::Unit(u)));
            }
            single(
                Structure::ZpUnits(*p),
                values,
                multiplicative_diagram(&names, &exact),
                Flavor::Multiplicative,
            )
        }
        Kind::Zhat => {
            let mut values = Vec::new();
            let mut exact = Vec::new();
            for (n, v) in ps {
                let Val::Zhat(z) = v else {
                    unreachable!("evaluated in Zhat")
                };
                exact.push(z.exact().map(|i| BigRational::from_integer(i.clone())));
                values.push((n, Value::Zhat(z)));
            }
            single(
                Structure::Zhat,
                values,
                additive_diagram(&names, &exact),
                Flavor::Additive,
            )
        }
        Kind::Prod(primes) => {
            let mut contexts = Vec::new();
            for (i, &p) in primes.iter().enumerate() {
                let mut values = Vec::new();
                let mut exact = Vec::new();
                for (n, v) in &ps {
                    let Val::Prod(xs) = v else {
                        unreachable!("evaluated in the product")
                    };
                    exact.push(xs[i].exact().cloned());
                    values.push((n.clone(), Value::Padic(xs[i].clone())));
                }
                let d = match &text {
                    Some(t) => parse_diagram(t, &names, Flavor::Additive)?,
                    None => additive_diagram(&names, &exact),
                };
                contexts
                    .push(DecisionContext::new(Structure::ZpPlus(p), values, d)?.with_fuel(fuel));
            }
            Ok(Setup::Prod(contexts))
        }
        Kind::Real => {
            let mut xs = Vec::new();
            let mut exact = Vec::new();
            for (_, v) in ps {
                let Val::Real(x, e) = v else {
                    unreachable!("evaluated in the reals")
                };
                xs.push(x);
                exact.push(e);
            }
            let d = match &text {
                Some(t) => RealDiagram::parse(t, &names)?,
                None => real_diagram(&names, &exact),
            };
            Ok(Setup::Real(xs, d))
        }
    }
}

fn formula(c: &Common) -> Result<Formula> {
    parse(
        c.formula
            .as_deref()
            .ok_or_else(|| usage("--formula is required"))?,
    )
}

fn decide(c: &Common) -> Result<Reply> {
    let f = formula(c)?;
    let verdict = match setup(c)? {
        Setup::Single(ctx) => tree_decide(&ctx, &f)?,
        Setup::Prod(ctxs) => decide_product(&ctxs, &f)?,
        Setup::Real(xs, d) => decide_qf_real(&f, &xs, &d, c.fuel.unwrap_or(DEFAULT_FUEL))?,
    };
    Ok(Reply::verdict(
        verdict,
        json!({ "command": "decide", "structure": c.structure.name(), "verdict": verdict }),
    ))
}

fn skolem_cmd(c: &Common) -> Result<Reply> {
    let f = formula(c)?;
    let Setup::Single(ctx) = setup(c)? else {
        return Err(Error::Unsupported(format!(
            "witnesses over {}",
            c.structure.name()
        )));
    };
    let w = skolem(&ctx, &f)?;
    let paths: Vec<(String, Vec<BigInt>)> = w
        .paths()
        .iter()
        .map(|(n, x)| (n.clone(), x.prefix(c.levels)))
        .collect();
    let applicable = matches!(w, SkolemWitness::Witness(_));
    let text = if !applicable {
        "not applicable: the formula is false at these parameters".to_string()
    } else if let [(_, labels)] = paths.as_slice() {
        show_labels(labels)
    } else {
        paths
            .iter()
            .map(|(n, l)| format!("{n}: {}", show_labels(l)))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let witness: serde_json::Map<String, Json> = paths
        .iter()
        .map(|(n, l)| (n.clone(), json_labels(l)))
        .collect();
    let json = json!({ "command": "skolem", "applicable": applicable, "witness": witness });
    Ok(Reply {
        code: if applicable { 0 } else { 1 },
        text,
        json,
    })
}

/// Truncated decimal expansion with `digits` fractional digits.
fn decimal(q: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let n = (q.abs() * BigRational::from_integer(scale.clone()))
        .floor()
        .to_integer();
    let (int, frac) = n.div_rem(&scale);
    let sign = if q.is_negative() { "-" } else { "" };
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

fn eval_cmd(c: &Common, text: &str) -> Result<Reply> {
    let kind = kind(c)?;
    let v = eval(&parse_expr(text)?, &kind)?;
    let n = c.levels;
    let (out, json) = match v {
        Val::Padic(x) => (show_labels(&x.prefix(n)), json_labels(&x.prefix(n))),
        Val::Unit(u, _) => {
            let l = iso_forward(&u).prefix(n);
            (show_labels(&l), json_labels(&l))
        }
        Val::Zhat(z) => {
            let l = z.path().prefix(n);
            (show_labels(&l), json_labels(&l))
        }
        Val::Prod(xs) => {
            let Kind::Prod(ps) = &kind else {
                unreachable!("products come from prod")
            };
            let lines: Vec<String> = ps
                .iter()
                .zip(&xs)
                .map(|(p, x)| format!("{p}: {}", show_labels(&x.prefix(n))))
                .collect();
            let obj: serde_json::Map<String, Json> = ps
                .iter()
                .zip(&xs)
                .map(|(p, x)| (p.to_string(), json_labels(&x.prefix(n))))
                .collect();
            (lines.join("\n"), Json::Object(obj))
        }
        Val::Real(x, _) => {
            let approx: Vec<String> = (1..=n).map(|k| decimal(&x.at(k), k / 3 + 2)).collect();
            (
                approx
                    .iter()
                    .enumerate()
                    .map(|(k, a)| format!("{}: {a}", k + 1))
                    .collect::<Vec<_>>()
                    .join("\n"),
                json!(approx),
            )
        }
    };
    Ok(Reply {
        code: 0,
        text: out,
        json: json!({ "command": "eval", "structure": c.structure.name(), "labels": json }),
    })
}

fn solve_cmd(c: &Common) -> Result<Reply> {
    let text = c
        .formula
        .as_deref()
        .ok_or_else(|| usage("--formula is required"))?;
    let lin = atom_to_lin(&parse_atom(text)?, Flavor::Additive)?;
    let Setup::Single(ctx) = setup(c)? else {
        return Err(Error::Unsupported(format!(
            "solving over {}",
            c.structure.name()
        )));
    };
    let Structure::ZpPlus(p) = ctx.structure else {
        return Err(Error::Unsupported(format!(
            "solving over {}",
            ctx.structure
        )));
    };
    let names = ctx.names();
    let unknowns: Vec<&str> = lin
        .vars()
        .filter(|v| !names.iter().any(|n| n == v))
        .collect();
    let [g] = unknowns.as_slice() else {
        return Err(usage(format!(
            "expected exactly one unknown, found {unknowns:?}"
        )));
    };
    let g = g.to_string();
    let inputs: Vec<(String, BigInt)> = lin
        .vars()
        .filter(|v| *v != g)
        .map(|v| (v.to_string(), lin.coeff(v)))
        .collect();
    let f: Vec<PadicInt> = inputs
        .iter()
        .map(|(n, _)| match ctx.params.iter().find(|(m, _)| m == n) {
            Some((_, Value::Padic(x))) => x.clone(),
            _ => unreachable!("inputs are parameters"),
        })
        .collect();
    let eq = LinearEquation {
        coeffs: inputs.iter().map(|(_, a)| a.clone()).collect(),
        b: -lin.coeff(&g),
    };
    let (f, eq) = if f.is_empty() {
        (
            vec![PadicInt::zero(p)],
            LinearEquation {
                coeffs: vec![0.into()],
                b: eq.b,
            },
        )
    } else {
        (f, eq)
    };
    let reply = |code: i32, outcome: &str, text: String, labels: Json| Reply {
        code,
        text,
        json: json!({ "command": "solve", "unknown": g, "outcome": outcome, "labels": labels }),
    };
    Ok(match solve_linear(&eq, &f)? {
        SolveOutcome::Unique(x) => {
            let l = x.prefix(c.levels);
            reply(0, "unique", show_labels(&l), json_labels(&l))
        }
        SolveOutcome::NoSolution => reply(1, "none", "no solution".into(), Json::Null),
        SolveOutcome::AllSolutions(ob) => match ob.refute(ctx.fuel) {
            Apartness::Witness(n) => reply(
                1,
                "none",
                format!("no solution: the left side is nonzero at level {n}"),
                Json::Null,
            ),
            Apartness::Unknown => {
                let zero: treepres::formula::Lin = lin.without(&g);
                if ctx.diagram.is_complete() && ctx.diagram.entails(&zero)? {
                    reply(0, "all", format!("every {g} is a solution"), Json::Null)
                } else {
                    return Err(Error::FuelExhausted(ctx.fuel));
                }
            }
        },
    })
}

fn iso_cmd(c: &Common, text: &str) -> Result<Reply> {
    let kind = kind(c)?;
    let n = c.levels;
    match eval(&parse_expr(text)?, &kind)? {
        Val::Unit(u, _) => {
            let w = iso_forward(&u);
            let back = iso_backward(&w);
            let ok = back.x == u.x && back.y.prefix(n) == u.y.prefix(n);
            let text = format!(
                "labels: {}\ntorsion: {}\nfree: {}\nround trip: {}",
                show_labels(&w.prefix(n)),
                u.x,
                show_labels(&u.y.prefix(n)),
                if ok { "ok" } else { "failed" }
            );
            let json = json!({
                "command": "iso", "labels": json_labels(&w.prefix(n)), "torsion": u.x.to_string(),
                "free": json_labels(&u.y.prefix(n)), "round_trip": ok,
            });
            Ok(Reply {
                code: if ok { 0 } else { 1 },
                text,
                json,
            })
        }
        Val::Padic(x) => {
            let digits = coherent_to_digits(&x);
            let back = digits_to_coherent(x.p, &digits);
            let ok = back.prefix(n) == x.prefix(n);
            let text = format!(
                "labels: {}\ndigits: {}\nround trip: {}",
                show_labels(&x.prefix(n)),
                show_labels(&digits.prefix(n)),
                if ok { "ok" } else { "failed" }
            );
            let json = json!({
                "command": "iso", "labels": json_labels(&x.prefix(n)), "digits": json_labels(&digits.prefix(n)), "round_trip": ok,
            });
            Ok(Reply {
                code: if ok { 0 } else { 1 },
                text,
                json,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "isomorphisms over {}",
            c.structure.name()
        ))),
    }
}

fn demo(which: DemoKind, p: u64, use_bound: usize, levels: usize) -> Result<Reply> {
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    let mut all = true;
    match which {
        DemoKind::OrIssue => {
            if !is_prime(p) {
                return Err(usage(format!("{p} is not prime")));
            }
            let zero = PadicInt::zero(p);
            for stub in skolem_stub_library(p, use_bound) {
                let r = or_issue_adversary(&stub, &zero)?;
                all &= r.verified;
                lines.push(r.to_string());
                reports.push(json!({
                    "stub": r.stub, "P": json_labels(&r.p_prefix), "R": json_labels(&r.r_prefix),
                    "stub_PP": json_labels(&r.output_pp), "stub_PR": json_labels(&r.output_pr),
                    "refutation": match r.refutation {
                        OrRefutation::Perturbed { level } => json!({"kind": "perturbed", "level": level}),
                        OrRefutation::NoSeparation { horizon } => json!({"kind": "no-separation", "horizon": horizon}),
                    },
                    "certified": r.verified,
                }));
            }
        }
        DemoKind::ProductUnits => {
            for stub in decision_stub_library(use_bound, levels) {
                let r = product_units_adversary(&stub)?;
                all &= r.verified;
                lines.push(r.to_string());
                reports.push(json!({
                    "stub": r.stub, "answer_f": r.answer_f, "prime": r.prime, "generator": r.generator,
                    "answer_f_prime": r.answer_f_prime, "refutation": match r.refutation {
                        ProductRefutation::FalseOnTrueInstance => "false-on-true-instance",
                        ProductRefutation::TrueOnFalseInstance { .. } => "true-on-false-instance",
                    },
                    "certified": r.verified,
                }));
            }
        }
    }
    lines.push(format!("all stubs defeated: {all}"));
    let name = match which {
        DemoKind::OrIssue => "or-issue",
        DemoKind::ProductUnits => "product-units",
    };
    Ok(Reply {
        code: if all { 0 } else { 1 },
        text: lines.join("\n"),
        json: json!({ "command": "demo", "demo": name, "reports": reports, "all_defeated": all }),
    })
}

fn render(result: Result<Reply>, json_mode: bool, command: &str) -> Output {
    match result {
        Ok(r) if json_mode => Output {
            code: r.code,
            stdout: format!("{}\n", r.json),
            stderr: String::new(),
        },
        Ok(r) => Output {
            code: r.code,
            stdout: format!("{}\n", r.text),
            stderr: String::new(),
        },
        Err(e) => {
            let kind = if matches!(e, Error::FuelExhausted(_)) {
                "fuel-exhausted"
            } else {
                "error"
            };
            if json_mode {
                Output {
                    code: 2,
                    stdout: format!(
                        "{}\n",
                        json!({ "command": command, "error": e.to_string(), "kind": kind })
                    ),
                    stderr: String::new(),
                }
            } else {
                Output {
                    code: 2,
                    stdout: String::new(),
                    stderr: format!("{kind}: {e}\n"),
                }
            }
        }
    }
}

/// Run one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Output {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match &cli.command {
        Command::Decide(c) => render(decide(c), c.json, "decide"),
        Command::Skolem(c) => render(skolem_cmd(c), c.json, "skolem"),
        Command::Eval { common, expr } => render(eval_cmd(common, expr), common.json, "eval"),
        Command::Solve(c) => render(solve_cmd(c), c.json, "solve"),
        Command::Iso { common, expr } => render(iso_cmd(common, expr), common.json, "iso"),
        Command::Demo {
            which,
            p,
            use_bound,
            levels,
            json,
        } => render(demo(*which, *p, *use_bound, *levels), *json, "demo"),
    }
}
