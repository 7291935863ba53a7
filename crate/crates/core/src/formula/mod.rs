//! Formulas over abelian group signatures.

pub mod ast;
pub mod lattice;
pub mod linear;
pub mod normal;
pub mod parse;
pub mod reduce;

pub use ast::{Atom, Formula, Mono, Sym, Term};
pub use lattice::{enumerate_diagram, integer_kernel, parse_diagram, Diagram, RelationLattice};
pub use linear::{atom_to_lin, decode_atom, encode_atom, term_to_lin, Flavor, Lin, LinLit};
pub use normal::{to_dnf, to_nnf, to_prenex, Bool, Quant};
pub use parse::{parse, parse_atom, parse_term};
pub use reduce::{reduce_conjunctive, ReducedExistential};
