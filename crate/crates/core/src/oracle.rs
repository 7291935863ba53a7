//! Brute-force ground truth over finite quotients Z/p^n, and the two
//! adversaries that defeat any procedure reading finite prefixes.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formula::{atom_to_lin, Flavor, Formula};
use crate::par::{self, Exec};
use crate::residue::{least_generator, nth_prime, pow_u, to_u64};
use crate::zp_add::PadicInt;

/// Bound on (p^n)^(quantifier depth) for exhaustive checks.
pub const FINITE_MODEL_BUDGET: u64 = 1 << 22;

/// Levels past the use bound at which stub outputs are inspected.
pub const HORIZON_EXTRA: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteModel {
    pub p: u64,
    pub n: u32,
}

impl FiniteModel {
    pub fn new(p: u64, n: u32) -> Self {
        assert!(n >= 1, "finite models need n >= 1");
        FiniteModel { p, n }
    }

    pub fn modulus(&self) -> BigInt {
        pow_u(self.p, self.n)
    }
}

fn depth(f: &Formula) -> u32 {
    match f {
        Formula::Atom(_) => 0,
        Formula::Not(g) => depth(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(depth).max().unwrap_or(0),
        Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + depth(g),
    }
}

/// Formula with atoms as residue vectors over variable slots.
enum Node {
    Atom(Vec<(usize, u128)>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Quant(bool, usize, Box<Node>),
}

fn residue(x: &BigInt, m: u128) -> u128 {
    x.mod_floor(&BigInt::from(m))
        .try_into()
        .expect("reduced below the modulus")
}

fn compile(f: &Formula, m: u128, scope: &mut Vec<String>) -> Result<Node> {
    Ok(match f {
        Formula::Atom(a) => {
            let lin = atom_to_lin(a, Flavor::Additive)?;
            let mut terms = Vec::new();
            for (s, c) in &lin.0 {
                let slot = scope
                    .iter()
                    .rposition(|n| *n == s.0)
                    .ok_or_else(|| Error::Type(format!("unbound symbol {s}")))?;
                terms.push((slot, residue(c, m)));
            }
            Node::Atom(terms)
        }
        Formula::Not(g) => Node::Not(Box::new(compile(g, m, scope)?)),
        Formula::And(gs) => Node::And(
            gs.iter()
                .map(|g| compile(g, m, scope))
                .collect::<Result<_>>()?,
        ),
        Formula::Or(gs) => Node::Or(
            gs.iter()
                .map(|g| compile(g, m, scope))
                .collect::<Result<_>>()?,
        ),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            scope.push(v.clone());
            let body = compile(g, m, scope);
            scope.pop();
            Node::Quant(
                matches!(f, Formula::Exists(..)),
                scope.len(),
                Box::new(body?),
            )
        }
    })
}

fn eval(node: &Node, m: u128, env: &mut Vec<u128>) -> bool {
    match node {
        Node::Atom(terms) => {
            terms
                .iter()
                .fold(0u128, |acc, (slot, c)| (acc + c * env[*slot]) % m)
                == 0
        }
        Node::Not(g) => !eval(g, m, env),
        Node::And(gs) => gs.iter().all(|g| eval(g, m, env)),
        Node::Or(gs) => gs.iter().any(|g| eval(g, m, env)),
        Node::Quant(want, slot, g) => {
            env.truncate(*slot);
            env.push(0);
            for x in 0..m {
                env[*slot] = x;
                if eval(g, m, env) == *want {
                    return *want;
                }
            }
            !*want
        }
    }
}

/// Truth of `f` in Z/p^n with the parameters read modulo p^n.
pub fn finite_model_check(
    m: &FiniteModel,
    f: &Formula,
    params: &[(String, BigInt)],
) -> Result<bool> {
    finite_model_check_with(Exec::default(), m, f, params)
}

pub fn finite_model_check_with(
    exec: Exec,
    m: &FiniteModel,
    f: &Formula,
    params: &[(String, BigInt)],
) -> Result<bool> {
    let size = m.modulus();
    let cost = num_traits::pow(size.clone(), depth(f) as usize);
    if cost > BigInt::from(FINITE_MODEL_BUDGET) || size.bits() > 63 {
        return Err(Error::TooLarge(format!("{cost} assignments over Z/{size}")));
    }
    let md = to_u64(&size) as u128;
    let mut scope: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
    let node = compile(f, md, &mut scope)?;
    let env: Vec<u128> = params.iter().map(|(_, v)| residue(v, md)).collect();
    // The outermost quantifier fans out; everything below runs sequentially.
    match &node {
        Node::Quant(want, slot, g) => {
            let hit = par::any_range(exec, md as u64, |x| {
                let mut env = env.clone();
                env.truncate(*slot);
                env.push(x as u128);
                eval(g, md, &mut env) == *want
            });
            Ok(if hit { *want } else { !*want })
        }
        _ => Ok(eval(&node, md, &mut env.clone())),
    }
}

/// Whether sum a_i f_i = b G has a solution G mod p^m for every m <= n,
/// by trying every residue.
pub fn solvable_mod_tower(coeffs: &[BigInt], f: &[BigInt], b: &BigInt, p: u64, n: u32) -> bool {
    let lhs: BigInt = coeffs.iter().zip(f).map(|(a, x)| a * x).sum();
    (1..=n).all(|m| {
        let pm = pow_u(p, m);
        let target = lhs.mod_floor(&pm);
        let mut g = BigInt::zero();
        while g < pm {
            if (b * &g).mod_floor(&pm) == target {
                return true;
            }
            g += 1;
        }
        false
    })
}

/// Read-only view of input prefixes; reads past the declared use fail.
pub struct Prefixes<'a> {
    inputs: &'a [Vec<BigInt>],
    use_bound: usize,
}

impl Prefixes<'_> {
    /// Label of input `coord` at `level` (1-based).
    pub fn get(&self, coord: usize, level: usize) -> Result<BigInt> {
        if level == 0 || level > self.use_bound {
            return Err(Error::StubDiverged(format!(
                "read level {level} beyond use {}",
                self.use_bound
            )));
        }
        self.inputs
            .get(coord)
            .map(|v| v[level - 1].clone())
            .ok_or_else(|| Error::StubDiverged(format!("read coordinate {coord} beyond use")))
    }

    pub fn coords(&self) -> usize {
        self.inputs.len()
    }

    pub fn use_bound(&self) -> usize {
        self.use_bound
    }
}

type StubFn<I, O> = Arc<dyn Fn(&Prefixes, I) -> Result<O> + Send + Sync>;

/// A purported procedure that reads only `use_bound` levels of its first
/// `coords` inputs.
#[derive(Clone)]
pub struct PrefixStub<I, O> {
    pub name: String,
    pub use_bound: usize,
    pub coords: usize,
    run: StubFn<I, O>,
}

impl<I, O> fmt::Debug for PrefixStub<I, O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PrefixStub({}, use {}, coords {})",
            self.name, self.use_bound, self.coords
        )
    }
}

impl<I, O> PrefixStub<I, O> {
    pub fn new(
        name: &str,
        use_bound: usize,
        coords: usize,
        run: impl Fn(&Prefixes, I) -> Result<O> + Send + Sync + 'static,
    ) -> Self {
        PrefixStub {
            name: name.into(),
            use_bound,
            coords,
            run: Arc::new(run),
        }
    }

    /// Feed the first `coords` inputs truncated to the use bound.
    pub fn call(&self, inputs: &[Vec<BigInt>], arg: I) -> Result<O> {
        let cut: Vec<Vec<BigInt>> = inputs
            .iter()
            .take(self.coords)
            .map(|v| v[..self.use_bound.min(v.len())].to_vec())
            .collect();
        if cut.iter().any(|v| v.len() < self.use_bound) {
            return Err(Error::StubDiverged(
                "inputs shorter than the use bound".into(),
            ));
        }
        (self.run)(
            &Prefixes {
                inputs: &cut,
                use_bound: self.use_bound,
            },
            arg,
        )
    }
}

/// Claims a Skolem function for EX H [(F = G & F != H) | (F != G & F = H)]:
/// given prefixes of F and G and a level, the label of H there.
pub type SkolemStub = PrefixStub<usize, BigInt>;

/// Claims to decide EX G. G*G = F in the product of all Z_p^x; input i is
/// the coordinate at the i-th prime, as residues mod p^n.
pub type DecisionStub = PrefixStub<(), bool>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrRefutation {
    /// The output on (P, R) differs from P, the only witness, at `level`.
    Perturbed { level: usize },
    /// The output on (P, P) matches P through `horizon`, so it never
    /// exhibits a witness different from F.
    NoSeparation { horizon: usize },
}

#[derive(Debug, Clone)]
pub struct OrIssueReport {
    pub stub: String,
    pub p_prefix: Vec<BigInt>,
    pub r_prefix: Vec<BigInt>,
    pub output_pp: Vec<BigInt>,
    pub output_pr: Vec<BigInt>,
    pub refutation: OrRefutation,
    pub verified: bool,
}

impl fmt::Display for OrIssueReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[BigInt]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(f, "stub {}", self.stub)?;
        writeln!(f, "  P = {}", show(&self.p_prefix))?;
        writeln!(f, "  R = {}", show(&self.r_prefix))?;
        writeln!(f, "  stub(P,P) = {}", show(&self.output_pp))?;
        writeln!(f, "  stub(P,R) = {}", show(&self.output_pr))?;
        match &self.refutation {
            OrRefutation::Perturbed { level } => write!(
                f,
                "  refuted at level {level}: stub(P,R) differs from P, the unique witness"
            )?,
            OrRefutation::NoSeparation { horizon } => write!(
                f,
                "  refuted on (P,P): output equals P through level {horizon}"
            )?,
        }
        write!(f, "\n  certified: {}", self.verified)
    }
}

fn run_skolem(
    stub: &SkolemStub,
    f: &[BigInt],
    g: &[BigInt],
    horizon: usize,
) -> Result<Vec<BigInt>> {
    let inputs = [f.to_vec(), g.to_vec()];
    (1..=horizon).map(|n| stub.call(&inputs, n)).collect()
}

/// Defeat a Skolem stub at the path `p_path`: perturb the second input just
/// past the stub's use so that F != G and the witness must be F itself.
pub fn or_issue_adversary(stub: &SkolemStub, p_path: &PadicInt) -> Result<OrIssueReport> {
    let p = p_path.p;
    let u = stub.use_bound;
    let horizon = u + HORIZON_EXTRA;
    let r_path = p_path.add(&PadicInt::from_integer(p, pow_u(p, u as u32)))?;
    let pp = p_path.prefix(horizon);
    let rp = r_path.prefix(horizon);
    let out_pp = run_skolem(stub, &pp, &pp, horizon)?;
    let out_pr = run_skolem(stub, &pp, &rp, horizon)?;
    let (refutation, verified) = match (1..=horizon).find(|&n| out_pp[n - 1] != pp[n - 1]) {
        Some(level) => {
            // R agrees with P through the use and differs right after.
            let agree = pp[..u] == rp[..u] && pp[u] != rp[u];
            (
                OrRefutation::Perturbed { level },
                agree && out_pr == out_pp && out_pr[level - 1] != pp[level - 1],
            )
        }
        None => (OrRefutation::NoSeparation { horizon }, out_pp == pp),
    };
    Ok(OrIssueReport {
        stub: stub.name.clone(),
        p_prefix: pp,
        r_prefix: rp,
        output_pp: out_pp,
        output_pr: out_pr,
        refutation,
        verified,
    })
}

fn coherent(x: BigInt, p: u64, n: usize) -> BigInt {
    x.mod_floor(&pow_u(p, n as u32))
}

/// Skolem stubs with use bound `u` over Z_p^+.
pub fn skolem_stub_library(p: u64, u: usize) -> Vec<SkolemStub> {
    vec![
        SkolemStub::new("constant-zero", u, 2, |_, _| Ok(BigInt::zero())),
        SkolemStub::new("constant-one", u, 2, move |_, n| {
            Ok(coherent(BigInt::one(), p, n))
        }),
        SkolemStub::new("copy-second", u, 2, move |x, n| {
            Ok(coherent(x.get(1, n.min(x.use_bound()))?, p, n))
        }),
        SkolemStub::new("first-plus-one", u, 2, move |x, n| {
            Ok(coherent(x.get(0, n.min(x.use_bound()))? + 1, p, n))
        }),
        SkolemStub::new("compare-then-choose", u, 2, move |x, n| {
            let k = n.min(x.use_bound());
            let same = (1..=x.use_bound())
                .map(|l| Ok(x.get(0, l)? == x.get(1, l)?))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|b| b);
            let f = x.get(0, k)?;
            Ok(coherent(if same { f + 1 } else { f }, p, n))
        }),
        SkolemStub::new("prefix-hash", u, 2, move |x, n| {
            let mut h = BigInt::from(17);
            for c in 0..x.coords() {
                for l in 1..=x.use_bound() {
                    h = h * 31 + x.get(c, l)?;
                }
            }
            Ok(coherent(h, p, n))
        }),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductRefutation {
    /// Answered false although the witness (1,1,2,2,...) squares to f.
    FalseOnTrueInstance,
    /// Answered true on f', where the coordinate at `prime` is the least
    /// generator, a non-square.
    TrueOnFalseInstance { prime: u64, generator: u64 },
}

#[derive(Debug, Clone)]
pub struct ProductUnitsReport {
    pub stub: String,
    pub answer_f: bool,
    pub prime: u64,
    pub generator: u64,
    pub answer_f_prime: bool,
    pub refutation: ProductRefutation,
    pub verified: bool,
}

impl fmt::Display for ProductUnitsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stub {}", self.stub)?;
        writeln!(
            f,
            "  stub(f) = {}  with f = (1,1,4,4,...), true via witness (1,1,2,2,...)",
            self.answer_f
        )?;
        writeln!(
            f,
            "  f' replaces coordinate p = {} by y = {}",
            self.prime, self.generator
        )?;
        writeln!(
            f,
            "  stub(f') = {}  while the formula is false at f'",
            self.answer_f_prime
        )?;
        match &self.refutation {
            ProductRefutation::FalseOnTrueInstance => write!(f, "  refuted on f")?,
            ProductRefutation::TrueOnFalseInstance { prime, generator } => write!(
                f,
                "  refuted on f': {generator} is not a square mod {prime}"
            )?,
        }
        write!(f, "\n  certified: {}", self.verified)
    }
}

fn base_coordinate(i: usize) -> u64 {
    if i < 2 {
        1
    } else {
        4
    }
}

fn coordinate_prefix(value: u64, p: u64, levels: usize) -> Vec<BigInt> {
    (1..=levels)
        .map(|n| coherent(BigInt::from(value), p, n))
        .collect()
}

fn is_square_mod(y: u64, p: u64) -> bool {
    (0..p).any(|g| (g * g) % p == y % p)
}

fn generates(y: u64, p: u64) -> bool {
    let mut seen = vec![false; p as usize];
    let mut x = 1u64;
    for _ in 0..p - 1 {
        x = x * y % p;
        seen[x as usize] = true;
    }
    (1..p as usize).all(|i| seen[i])
}

/// Defeat a decision stub for EX G. G*G = F over the product of all Z_p^x.
pub fn product_units_adversary(stub: &DecisionStub) -> Result<ProductUnitsReport> {
    let levels = stub.use_bound;
    let coords = stub.coords;
    let f: Vec<Vec<BigInt>> = (0..coords)
        .map(|i| coordinate_prefix(base_coordinate(i), nth_prime(i), levels))
        .collect();
    // Witness check on every coordinate the stub sees and one beyond.
    let witness_ok = (0..=coords).all(|i| {
        let p = nth_prime(i);
        let w = if i < 2 { 1u64 } else { 2 };
        (1..=levels.max(1)).all(|n| {
            coherent(BigInt::from(w * w), p, n) == coherent(BigInt::from(base_coordinate(i)), p, n)
        })
    });
    let answer_f = stub.call(&f, ())?;

    // Odd prime past the use, so the unit group mod p has even order.
    let idx = coords.max(1);
    let prime = nth_prime(idx);
    let generator = least_generator(prime);
    let mut f_prime = f.clone();
    if idx < f_prime.len() {
        f_prime[idx] = coordinate_prefix(generator, prime, levels);
    }
    let answer_f_prime = stub.call(&f_prime, ())?;

    let (refutation, verified) = if !answer_f {
        (ProductRefutation::FalseOnTrueInstance, witness_ok)
    } else {
        let certified = generates(generator, prime)
            && !is_square_mod(generator, prime)
            && answer_f_prime == answer_f;
        (
            ProductRefutation::TrueOnFalseInstance { prime, generator },
            certified,
        )
    };
    Ok(ProductUnitsReport {
        stub: stub.name.clone(),
        answer_f,
        prime,
        generator,
        answer_f_prime,
        refutation,
        verified,
    })
}

fn local_square(x: &BigInt, p: u64, n: usize) -> bool {
    if p == 2 {
        let k = n.min(3) as u32;
        let mk = pow_u(2, k);
        return (0..to_u64(&mk)).any(|g| (BigInt::from(g * g) - x).mod_floor(&mk).is_zero());
    }
    let e = (p - 1) / 2;
    let r = x.mod_floor(&BigInt::from(p));
    !r.is_zero() && r.modpow(&BigInt::from(e), &BigInt::from(p)).is_one()
}

/// Decision stubs reading `levels` labels at the first `primes` coordinates.
pub fn decision_stub_library(primes: usize, levels: usize) -> Vec<DecisionStub> {
    vec![
        DecisionStub::new("always-true", levels, primes, |_, _| Ok(true)),
        DecisionStub::new("always-false", levels, primes, |_, _| Ok(false)),
        DecisionStub::new("local-squares", levels, primes, |x, _| {
            for i in 0..x.coords() {
                let top = x.get(i, x.use_bound())?;
                if !local_square(&top, nth_prime(i), x.use_bound()) {
                    return Ok(false);
                }
            }
            Ok(true)
        }),
        DecisionStub::new("first-is-one", levels, primes, |x, _| {
            Ok(x.coords() == 0 || x.get(0, 1)?.is_one())
        }),
        DecisionStub::new("prefix-hash-parity", levels, primes, |x, _| {
            let mut h = BigInt::from(7);
            for i in 0..x.coords() {
                for l in 1..=x.use_bound() {
                    h = h * 131 + x.get(i, l)?;
                }
            }
            Ok(h.is_even())
        }),
        DecisionStub::new("level-one-residues", levels, primes, |x, _| {
            let mut all_small = true;
            for i in 0..x.coords() {
                all_small &= x.get(i, 1)? < BigInt::from(5);
            }
            Ok(all_small)
        }),
    ]
}
