//! Paths, tree presentations, prefix functionals, clopen sets and products.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::residue::pow_u;

pub type Label = BigInt;

/// How a product path interleaves its coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Finite(usize),
    Infinite,
}

/// Cantor pairing <i, l> = (i+l)(i+l+1)/2 + i.
pub fn pair(i: usize, l: usize) -> usize {
    (i + l) * (i + l + 1) / 2 + i
}

pub fn unpair(z: usize) -> (usize, usize) {
    let mut w = ((((8 * z + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let i = z - w * (w + 1) / 2;
    (i, w - i)
}

impl Layout {
    /// 0-based spliced position of 0-based factor level `l` of factor `i`.
    pub fn position(&self, i: usize, l: usize) -> usize {
        match self {
            Layout::Finite(n) => n * l + i,
            Layout::Infinite => pair(i, l),
        }
    }

    pub fn decode(&self, s: usize) -> (usize, usize) {
        match self {
            Layout::Finite(n) => (s % n, s / n),
            Layout::Infinite => unpair(s),
        }
    }

    /// Number of factor-`i` levels contained in a spliced prefix of length `len`.
    pub fn factor_len(&self, i: usize, len: usize) -> usize {
        let mut l = 0;
        while self.position(i, l) < len {
            l += 1;
        }
        l
    }

    fn check(&self, i: usize) -> Result<()> {
        match self {
            Layout::Finite(n) if i >= *n => Err(Error::BadCoordinate(i)),
            _ => Ok(()),
        }
    }
}

type LabelFn = dyn Fn(usize) -> Label + Send + Sync;

struct PathInner {
    f: Box<LabelFn>,
    memo: Mutex<Vec<Option<Label>>>,
}

/// A lazily evaluated branch, queried by level (levels start at 1).
#[derive(Clone)]
pub struct Path {
    pres: Arc<str>,
    layout: Option<Layout>,
    inner: Arc<PathInner>,
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Path[{}]{:?}..", self.pres, self.prefix(4))
    }
}

impl Path {
    pub fn new(pres: impl AsRef<str>, f: impl Fn(usize) -> Label + Send + Sync + 'static) -> Path {
        Path {
            pres: Arc::from(pres.as_ref()),
            layout: None,
            inner: Arc::new(PathInner {
                f: Box::new(f),
                memo: Mutex::new(Vec::new()),
            }),
        }
    }

    pub fn from_labels(
        pres: impl AsRef<str>,
        labels: Vec<Label>,
        tail: impl Fn(usize) -> Label + Send + Sync + 'static,
    ) -> Path {
        Path::new(pres, move |n| {
            if n <= labels.len() {
                labels[n - 1].clone()
            } else {
                tail(n)
            }
        })
    }

    pub fn presentation(&self) -> &str {
        &self.pres
    }

    pub fn layout(&self) -> Option<Layout> {
        self.layout
    }

    pub fn label(&self, level: usize) -> Label {
        assert!(level >= 1, "levels start at 1");
        {
            let memo = self.inner.memo.lock().unwrap();
            if let Some(Some(v)) = memo.get(level - 1) {
                return v.clone();
            }
        }
        let v = (self.inner.f)(level);
        let mut memo = self.inner.memo.lock().unwrap();
        if memo.len() < level {
            memo.resize(level, None);
        }
        memo[level - 1] = Some(v.clone());
        v
    }

    pub fn prefix(&self, n: usize) -> Vec<Label> {
        (1..=n).map(|l| self.label(l)).collect()
    }
}

/// Interleaves coordinate paths level by level.
pub fn splice(pres: impl AsRef<str>, parts: Vec<Path>) -> Path {
    let layout = Layout::Finite(parts.len());
    let mut path = Path::new(pres, move |s| {
        let (i, l) = layout.decode(s - 1);
        parts[i].label(l + 1)
    });
    path.layout = Some(layout);
    path
}

pub fn splice_infinite(
    pres: impl AsRef<str>,
    coord: Arc<dyn Fn(usize) -> Path + Send + Sync>,
) -> Path {
    let cache: Mutex<HashMap<usize, Path>> = Mutex::new(HashMap::new());
    let mut path = Path::new(pres, move |s| {
        let (i, l) = unpair(s - 1);
        let p = {
            let mut c = cache.lock().unwrap();
            c.entry(i).or_insert_with(|| coord(i)).clone()
        };
        p.label(l + 1)
    });
    path.layout = Some(Layout::Infinite);
    path
}

pub fn project(path: &Path, i: usize) -> Result<Path> {
    let layout = path.layout.ok_or(Error::BadCoordinate(i))?;
    layout.check(i)?;
    let src = path.clone();
    Ok(Path::new(format!("{}#{}", path.pres, i), move |l| {
        src.label(layout.position(i, l - 1) + 1)
    }))
}

/// Project a finite spliced prefix onto factor `i`.
pub fn project_prefix(layout: Layout, prefix: &[Label], i: usize) -> Vec<Label> {
    (0..layout.factor_len(i, prefix.len()))
        .map(|l| prefix[layout.position(i, l)].clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Apartness {
    Witness(usize),
    Unknown,
}

pub fn apart_semidecide(x: &Path, y: &Path, fuel: usize) -> Apartness {
    (1..=fuel)
        .find(|&l| x.label(l) != y.label(l))
        .map_or(Apartness::Unknown, Apartness::Witness)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Emit { label: Label, used: usize },
    NeedMore(usize),
}

type EvalFn = dyn Fn(&[Vec<Label>], usize) -> Step + Send + Sync;

/// An oracle computation reading finite input prefixes.
#[derive(Clone)]
pub struct PrefixFunctional {
    pub name: String,
    pub arity: usize,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for PrefixFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrefixFunctional({}/{})", self.name, self.arity)
    }
}

impl PrefixFunctional {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        eval: impl Fn(&[Vec<Label>], usize) -> Step + Send + Sync + 'static,
    ) -> Self {
        PrefixFunctional {
            name: name.into(),
            arity,
            eval: Arc::new(eval),
        }
    }

    /// A functional whose level-n output reads exactly level n of its inputs.
    pub fn levelwise(
        name: impl Into<String>,
        arity: usize,
        f: impl Fn(&[Label], usize) -> Label + Send + Sync + 'static,
    ) -> Self {
        PrefixFunctional::new(name, arity, move |ins, level| {
            if ins.iter().any(|p| p.len() < level) {
                return Step::NeedMore(level);
            }
            let at: Vec<Label> = ins.iter().map(|p| p[level - 1].clone()).collect();
            Step::Emit {
                label: f(&at, level),
                used: level,
            }
        })
    }

    pub fn eval(&self, prefixes: &[Vec<Label>], level: usize) -> Step {
        (self.eval)(prefixes, level)
    }

    /// Drive the functional on full paths, feeding deeper prefixes on demand.
    pub fn run(&self, inputs: &[Path], level: usize) -> (Label, usize) {
        let mut depth = level;
        loop {
            let prefixes: Vec<Vec<Label>> = inputs.iter().map(|p| p.prefix(depth)).collect();
            match self.eval(&prefixes, level) {
                Step::Emit { label, used } => return (label, used),
                Step::NeedMore(d) => {
                    assert!(
                        d > depth,
                        "functional {} asked for depth {d} again",
                        self.name
                    );
                    depth = d;
                }
            }
        }
    }

    pub fn apply(&self, pres: impl AsRef<str>, inputs: Vec<Path>) -> Path {
        let me = self.clone();
        Path::new(pres, move |l| me.run(&inputs, l).0)
    }
}

type NodePred = dyn Fn(&[Label]) -> bool + Send + Sync;
type Branching = dyn Fn(&[Label]) -> Vec<Label> + Send + Sync;

#[derive(Clone)]
pub struct TreePresentation {
    pub id: String,
    validator: Arc<NodePred>,
    branching: Arc<Branching>,
    pub signature: Vec<(String, usize)>,
    functionals: BTreeMap<String, PrefixFunctional>,
}

impl fmt::Debug for TreePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreePresentation({})", self.id)
    }
}

impl TreePresentation {
    pub fn new(
        id: impl Into<String>,
        validator: impl Fn(&[Label]) -> bool + Send + Sync + 'static,
        branching: impl Fn(&[Label]) -> Vec<Label> + Send + Sync + 'static,
        functionals: Vec<PrefixFunctional>,
    ) -> Self {
        let signature = functionals
            .iter()
            .map(|f| (f.name.clone(), f.arity))
            .collect();
        TreePresentation {
            id: id.into(),
            validator: Arc::new(validator),
            branching: Arc::new(branching),
            signature,
            functionals: functionals
                .into_iter()
                .map(|f| (f.name.clone(), f))
                .collect(),
        }
    }

    pub fn is_valid(&self, node: &[Label]) -> bool {
        (self.validator)(node)
    }

    pub fn children(&self, node: &[Label]) -> Vec<Label> {
        (self.branching)(node)
    }

    pub fn functional(&self, name: &str) -> Option<&PrefixFunctional> {
        self.functionals.get(name)
    }

    pub fn apply(&self, name: &str, inputs: Vec<Path>) -> Option<Path> {
        self.functional(name).map(|f| f.apply(&self.id, inputs))
    }
}

/// Lift a factor functional to a spliced product.
fn lift_functional(
    layout: Layout,
    name: String,
    arity: usize,
    factor: Arc<dyn Fn(usize) -> PrefixFunctional + Send + Sync>,
) -> PrefixFunctional {
    PrefixFunctional::new(name, arity, move |ins, s| {
        let (i, l) = layout.decode(s - 1);
        let proj: Vec<Vec<Label>> = ins.iter().map(|p| project_prefix(layout, p, i)).collect();
        match factor(i).eval(&proj, l + 1) {
            Step::Emit { label, used } => Step::Emit {
                label,
                used: if used == 0 {
                    0
                } else {
                    layout.position(i, used - 1) + 1
                },
            },
            Step::NeedMore(d) => Step::NeedMore(layout.position(i, d - 1) + 1),
        }
    })
}

fn split_node(layout: Layout, node: &[Label]) -> BTreeMap<usize, Vec<Label>> {
    let mut parts: BTreeMap<usize, Vec<Label>> = BTreeMap::new();
    for (s, lab) in node.iter().enumerate() {
        let (i, _) = layout.decode(s);
        parts.entry(i).or_default().push(lab.clone());
    }
    parts
}

pub fn product_finite(factors: Vec<TreePresentation>) -> Result<TreePresentation> {
    let first = factors.first().ok_or(Error::ArityMismatch {
        expected: 1,
        got: 0,
    })?;
    if factors.iter().any(|f| f.signature != first.signature) {
        return Err(Error::SignatureMismatch);
    }
    let n = factors.len();
    let layout = Layout::Finite(n);
    let id = format!(
        "({})",
        factors
            .iter()
            .map(|f| f.id.as_str())
            .collect::<Vec<_>>()
            .join("x")
    );
    let fs = Arc::new(factors);
    let v = fs.clone();
    let validator = move |node: &[Label]| {
        split_node(layout, node)
            .iter()
            .all(|(i, part)| v[*i].is_valid(part))
    };
    let b = fs.clone();
    let branching = move |node: &[Label]| {
        let (i, _) = layout.decode(node.len());
        let part = split_node(layout, node).remove(&i).unwrap_or_default();
        b[i].children(&part)
    };
    let functionals = fs[0]
        .signature
        .iter()
        .map(|(name, arity)| {
            let fs = fs.clone();
            let nm = name.clone();
            lift_functional(
                layout,
                name.clone(),
                *arity,
                Arc::new(move |i| fs[i].functional(&nm).unwrap().clone()),
            )
        })
        .collect();
    Ok(TreePresentation::new(id, validator, branching, functionals))
}

pub fn product_infinite(
    id: impl Into<String>,
    family: Arc<dyn Fn(usize) -> TreePresentation + Send + Sync>,
) -> TreePresentation {
    let layout = Layout::Infinite;
    let cache: Arc<Mutex<HashMap<usize, TreePresentation>>> = Arc::new(Mutex::new(HashMap::new()));
    let get = {
        let cache = cache.clone();
        let family = family.clone();
        Arc::new(move |i: usize| {
            cache
                .lock()
                .unwrap()
                .entry(i)
                .or_insert_with(|| family(i))
                .clone()
        })
    };
    let g = get.clone();
    let validator = move |node: &[Label]| {
        split_node(layout, node)
            .iter()
            .all(|(i, part)| g(*i).is_valid(part))
    };
    let g = get.clone();
    let branching = move |node: &[Label]| {
        let (i, _) = layout.decode(node.len());
        let part = split_node(layout, node).remove(&i).unwrap_or_default();
        g(i).children(&part)
    };
    let functionals = get(0)
        .signature
        .iter()
        .map(|(name, arity)| {
            let g = get.clone();
            let nm = name.clone();
            lift_functional(
                layout,
                name.clone(),
                *arity,
                Arc::new(move |i| g(i).functional(&nm).unwrap().clone()),
            )
        })
        .collect();
    TreePresentation::new(id, validator, branching, functionals)
}

/// Finite union of basic cylinders: entry (level, labels) accepts a tuple
/// whose coordinate j has label labels[j] at that level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenSet {
    pub arity: usize,
    pub entries: Vec<(usize, Vec<Label>)>,
}

impl ClopenSet {
    pub fn empty(arity: usize) -> Self {
        ClopenSet {
            arity,
            entries: Vec::new(),
        }
    }

    pub fn full(arity: usize) -> Self {
        ClopenSet {
            arity,
            entries: vec![(0, Vec::new())],
        }
    }

    pub fn is_full(&self) -> bool {
        self.entries.iter().any(|(l, _)| *l == 0)
    }

    pub fn contains(&self, tuple: &[Path]) -> Result<bool> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: tuple.len(),
            });
        }
        Ok(self.entries.iter().any(|(level, labels)| {
            *level == 0
                || tuple
                    .iter()
                    .zip(labels)
                    .all(|(x, lab)| &x.label(*level) == lab)
        }))
    }

    pub fn max_level(&self) -> usize {
        self.entries.iter().map(|e| e.0).max().unwrap_or(0)
    }

    /// Complement inside (Z/p^L)^arity where L is the deepest entry level.
    pub fn complement_padic(&self, p: u64) -> ClopenSet {
        let level = self.max_level();
        if level == 0 {
            return if self.is_full() {
                ClopenSet::empty(self.arity)
            } else {
                ClopenSet::full(self.arity)
            };
        }
        let m = pow_u(p, level as u32);
        let mut out = Vec::new();
        for t in tuples(&m, self.arity) {
            let hit = self.entries.iter().any(|(l, labs)| {
                let ml = pow_u(p, *l as u32);
                t.iter().zip(labs).all(|(x, y)| &x.mod_floor(&ml) == y)
            });
            if !hit {
                out.push((level, t));
            }
        }
        ClopenSet {
            arity: self.arity,
            entries: out,
        }
    }
}

/// All tuples in [0, m)^k in lexicographic order.
pub fn tuples(m: &BigInt, k: usize) -> Vec<Vec<BigInt>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            let mut x = BigInt::from(0);
            while &x < m {
                let mut t2 = t.clone();
                t2.push(x.clone());
                next.push(t2);
                x += 1;
            }
        }
        out = next;
    }
    out
}

/// Conjugate a path-valued procedure by a presentation isomorphism:
/// the result runs `h_inv` on its inputs, then `proc`, then `h`.
pub fn transport_iso(
    h: PrefixFunctional,
    h_inv: PrefixFunctional,
    proc: impl Fn(&[Path]) -> Path + Send + Sync + 'static,
) -> impl Fn(&[Path]) -> Path + Send + Sync {
    move |xs: &[Path]| {
        let src: Vec<Path> = xs
            .iter()
            .map(|x| h_inv.apply("source", vec![x.clone()]))
            .collect();
        h.apply("target", vec![proc(&src)])
    }
}

/// Decisions carry over unchanged; only the inputs are pulled back.
pub fn transport_decision(
    h_inv: PrefixFunctional,
    decide: impl Fn(&[Path]) -> bool + Send + Sync + 'static,
) -> impl Fn(&[Path]) -> bool + Send + Sync {
    move |xs: &[Path]| {
        let src: Vec<Path> = xs
            .iter()
            .map(|x| h_inv.apply("source", vec![x.clone()]))
            .collect();
        decide(&src)
    }
}
