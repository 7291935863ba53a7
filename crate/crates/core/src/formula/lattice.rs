//! Relation lattices: finitely presented positive atomic diagrams of a
//! parameter tuple, with Hermite-form membership.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::linear::{decode_atom, encode_atom, Flavor, Lin};
use super::parse::parse_atom;
use crate::error::{Error, Result};

/// Row-style Hermite normal form. Returns the nonzero rows and their pivot columns.
pub fn hermite(rows: &[Vec<BigInt>], ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        loop {
            let nz: Vec<usize> = (top..m.len()).filter(|&r| !m[r][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let best = *nz.iter().min_by_key(|&&r| m[r][col].abs()).unwrap();
            for &r in &nz {
                if r != best {
                    let q = m[r][col].div_floor(&m[best][col]);
                    let (src, dst) = (m[best].clone(), &mut m[r]);
                    for (d, s) in dst.iter_mut().zip(&src) {
                        *d -= &q * s;
                    }
                }
            }
        }
        let Some(r) = (top..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(top, r);
        if m[top][col].is_negative() {
            m[top].iter_mut().for_each(|x| *x = -x.clone());
        }
        for above in 0..top {
            let q = m[above][col].div_floor(&m[top][col]);
            if !q.is_zero() {
                let src = m[top].clone();
                for (d, s) in m[above].iter_mut().zip(&src) {
                    *d -= &q * s;
                }
            }
        }
        pivots.push(col);
        top += 1;
    }
    m.truncate(top);
    (m, pivots)
}

/// Integer relations a with sum_i a_i * v_i = 0 for every listed column
/// vector v_i; `columns[i]` holds the coordinates of the i-th element.
pub fn integer_kernel(columns: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = columns.len();
    let m = columns.first().map_or(0, |c| c.len());
    let rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut r = columns[i].clone();
            r.extend((0..n).map(|j| BigInt::from((i == j) as i32)));
            r
        })
        .collect();
    let (h, pivots) = hermite(&rows, m + n);
    h.into_iter()
        .zip(pivots)
        .filter(|(_, p)| *p >= m)
        .map(|(r, _)| r[m..].to_vec())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationLattice {
    pub names: Vec<String>,
    pub basis: Vec<Vec<BigInt>>,
    hnf: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl RelationLattice {
    pub fn new(names: Vec<String>, basis: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = names.len();
        for b in &basis {
            if b.len() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    got: b.len(),
                });
            }
        }
        let basis: Vec<_> = basis
            .into_iter()
            .filter(|b| b.iter().any(|x| !x.is_zero()))
            .collect();
        let (hnf, pivots) = hermite(&basis, n);
        Ok(RelationLattice {
            names,
            basis,
            hnf,
            pivots,
        })
    }

    pub fn from_i64(names: &[&str], basis: &[&[i64]]) -> Result<Self> {
        Self::new(
            names.iter().map(|s| s.to_string()).collect(),
            basis
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// No relations at all.
    pub fn free(names: Vec<String>) -> Self {
        Self::new(names, vec![]).unwrap()
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn hermite_basis(&self) -> &[Vec<BigInt>] {
        &self.hnf
    }

    pub fn vector_of(&self, lin: &Lin) -> Result<Vec<BigInt>> {
        let mut v = vec![BigInt::zero(); self.names.len()];
        for (k, c) in &lin.0 {
            let i = self
                .names
                .iter()
                .position(|n| *n == k.0)
                .ok_or(Error::ArityMismatch {
                    expected: self.names.len(),
                    got: self.names.len() + 1,
                })?;
            v[i] = c.clone();
        }
        Ok(v)
    }

    pub fn lin_of(&self, v: &[BigInt]) -> Lin {
        let mut l = Lin::zero();
        for (n, c) in self.names.iter().zip(v) {
            l.add_term(n, c.clone());
        }
        l
    }

    pub fn contains(&self, v: &[BigInt]) -> Result<bool> {
        if v.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: v.len(),
            });
        }
        let mut v = v.to_vec();
        for (row, &col) in self.hnf.iter().zip(&self.pivots) {
            if v[..col].iter().any(|x| !x.is_zero()) {
                return Ok(false);
            }
            let (q, r) = v[col].div_rem(&row[col]);
            if !r.is_zero() {
                return Ok(false);
            }
            for (d, s) in v.iter_mut().zip(row) {
                *d -= &q * s;
            }
        }
        Ok(v.iter().all(|x| x.is_zero()))
    }

    /// Whether the lattice asserts `lin = 0`.
    pub fn entails(&self, lin: &Lin) -> Result<bool> {
        self.contains(&self.vector_of(lin)?)
    }

    /// The lattice {a : t*a in self}.
    pub fn saturate_by(&self, t: &BigInt) -> RelationLattice {
        // Integer solutions of sum_j x_j h_j - t*a = 0, projected to a.
        let n = self.arity();
        let k = self.hnf.len();
        let mut columns: Vec<Vec<BigInt>> = Vec::new();
        for h in &self.hnf {
            columns.push(h.clone());
        }
        for i in 0..n {
            let mut e = vec![BigInt::zero(); n];
            e[i] = -t.clone();
            columns.push(e);
        }
        let ker = integer_kernel(&columns);
        let basis = ker.into_iter().map(|r| r[k..].to_vec()).collect();
        RelationLattice::new(self.names.clone(), basis).unwrap()
    }
}

/// Lattice vectors in a fair order: integer combinations of the Hermite
/// basis by increasing max-norm of the coefficients.
pub fn enumerate_diagram(l: &RelationLattice, budget: usize, flavor: Flavor) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let k = l.hnf.len();
    let mut push = |v: &[BigInt], out: &mut Vec<String>| {
        let code = encode_atom(&l.lin_of(v), flavor);
        if seen.insert(code.clone()) {
            out.push(code);
        }
    };
    push(&vec![BigInt::zero(); l.arity()], &mut out);
    if k == 0 {
        out.truncate(budget);
        return out;
    }
    let mut radius: i64 = 1;
    while out.len() < budget {
        let before = out.len();
        // All coefficient vectors with max |c_j| = radius.
        let side = (2 * radius + 1) as u64;
        let total = side.pow(k as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut cs = Vec::with_capacity(k);
            for _ in 0..k {
                cs.push((rest % side) as i64 - radius);
                rest /= side;
            }
            if cs.iter().all(|c| c.abs() < radius) {
                continue;
            }
            let mut v = vec![BigInt::zero(); l.arity()];
            for (c, row) in cs.iter().zip(&l.hnf) {
                for (d, s) in v.iter_mut().zip(row) {
                    *d += s * c;
                }
            }
            push(&v, &mut out);
            if out.len() >= budget {
                break;
            }
        }
        // Rank one and additive codes: every multiple has the same code.
        if out.len() == before {
            break;
        }
        radius += 1;
    }
    out
}

/// How the positive diagram of the parameters is supplied.
#[derive(Debug, Clone)]
pub enum Diagram {
    /// A lattice asserted to contain every true relation.
    Complete(RelationLattice),
    /// Relations a with t*a in the lattice, again complete.
    Scaled(RelationLattice, BigInt),
    /// Listed atoms with no completeness promise: non-entailed atoms must
    /// be refuted from the parameter paths.
    Enumerated(RelationLattice),
}

impl Diagram {
    pub fn names(&self) -> &[String] {
        match self {
            Diagram::Complete(l) | Diagram::Scaled(l, _) | Diagram::Enumerated(l) => &l.names,
        }
    }

    pub fn is_complete(&self) -> bool {
        !matches!(self, Diagram::Enumerated(_))
    }

    pub fn entails(&self, lin: &Lin) -> Result<bool> {
        match self {
            Diagram::Complete(l) | Diagram::Enumerated(l) => l.entails(lin),
            Diagram::Scaled(l, t) => l.entails(&lin.scale(t)),
        }
    }

    /// The lattice of entailed relations.
    pub fn lattice(&self) -> RelationLattice {
        match self {
            Diagram::Complete(l) | Diagram::Enumerated(l) => l.clone(),
            Diagram::Scaled(l, t) => l.saturate_by(t),
        }
    }
}

/// Diagram file: either a `lattice-basis` header followed by integer
/// vectors (complete), or one atom code per line (enumerated).
pub fn parse_diagram(text: &str, names: &[String], flavor: Flavor) -> Result<Diagram> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    if lines.peek() == Some(&"lattice-basis") {
        lines.next();
        let mut basis = Vec::new();
        for line in lines {
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<BigInt>()
                        .map_err(|_| Error::MalformedCode(line.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            basis.push(row);
        }
        return Ok(Diagram::Complete(RelationLattice::new(
            names.to_vec(),
            basis,
        )?));
    }
    let mut basis = Vec::new();
    let proto = RelationLattice::free(names.to_vec());
    for line in lines {
        let lin = match decode_atom(line, flavor) {
            Ok(l) => l,
            Err(_) => {
                let a = parse_atom(line).map_err(|_| Error::MalformedCode(line.to_string()))?;
                super::linear::atom_to_lin(&a, flavor)
                    .map_err(|_| Error::MalformedCode(line.to_string()))?
            }
        };
        basis.push(proto.vector_of(&lin)?);
    }
    Ok(Diagram::Enumerated(RelationLattice::new(
        names.to_vec(),
        basis,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn entailment_examples() {
        let empty = RelationLattice::from_i64(&["c1", "c2"], &[]).unwrap();
        assert!(empty.entails(&Lin::zero()).unwrap());
        assert!(!empty.entails(&Lin::from_pairs(&[("c1", 1)])).unwrap());
        let l = RelationLattice::from_i64(&["c1", "c2"], &[&[2, -1]]).unwrap();
        assert!(l
            .entails(&Lin::from_pairs(&[("c1", 4), ("c2", -2)]))
            .unwrap());
        assert!(!l
            .entails(&Lin::from_pairs(&[("c1", 1), ("c2", -1)]))
            .unwrap());
        assert!(matches!(
            l.contains(&v(&[1])),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(l.entails(&Lin::from_pairs(&[("c3", 1)])).is_err());
    }

    #[test]
    fn hermite_membership() {
        let l = RelationLattice::from_i64(&["a", "b", "c"], &[&[4, 6, 0], &[6, 9, 3]]).unwrap();
        assert!(l.contains(&v(&[2, 3, 3])).unwrap());
        assert!(l.contains(&v(&[10, 15, 3])).unwrap());
        assert!(!l.contains(&v(&[2, 3, 0])).unwrap());
    }

    #[test]
    fn kernel_of_rationals() {
        // 1, 2, 1/2 scaled to 2, 4, 1.
        let ker = integer_kernel(&[v(&[2]), v(&[4]), v(&[1])]);
        let l = RelationLattice::new(vec!["x".into(), "y".into(), "z".into()], ker).unwrap();
        assert!(l.contains(&v(&[2, -1, 0])).unwrap());
        assert!(l.contains(&v(&[1, 0, -2])).unwrap());
        assert!(!l.contains(&v(&[1, 0, -1])).unwrap());
        assert_eq!(l.hermite_basis().len(), 2);
    }

    #[test]
    fn saturation() {
        let l = RelationLattice::from_i64(&["a", "b"], &[&[2, -2]]).unwrap();
        let s = l.saturate_by(&BigInt::from(2));
        assert!(s.contains(&v(&[1, -1])).unwrap());
        let d = Diagram::Scaled(l, BigInt::from(2));
        assert!(d.entails(&Lin::from_pairs(&[("a", 1), ("b", -1)])).unwrap());
    }

    #[test]
    fn fair_enumeration() {
        let l = RelationLattice::from_i64(&["c1", "c2"], &[&[2, -1]]).unwrap();
        let e = enumerate_diagram(&l, 3, Flavor::Additive);
        assert_eq!(e[0], "0=0");
        assert_eq!(e[1], "2*c1-c2=0");
        assert_eq!(e.len(), 2);
        let m = enumerate_diagram(&l, 3, Flavor::Multiplicative);
        assert_eq!(m, vec!["0=0", "2*c1-c2=0", "4*c1-2*c2=0"]);
    }

    #[test]
    fn diagram_files() {
        let names: Vec<String> = vec!["c1".into(), "c2".into()];
        let d = parse_diagram("lattice-basis\n2 -1\n", &names, Flavor::Additive).unwrap();
        assert!(d.is_complete());
        assert!(d
            .entails(&Lin::from_pairs(&[("c1", -4), ("c2", 2)]))
            .unwrap());
        let d = parse_diagram("2*c1-c2=0\n", &names, Flavor::Additive).unwrap();
        assert!(!d.is_complete());
        assert!(parse_diagram("lattice-basis\n1 x\n", &names, Flavor::Additive).is_err());
    }
}
