//! Tree presentations of Z_p^+, Z_p^x, Z-hat, their products and the reals,
//! with quantifier elimination, tree-decision and Skolem witnesses.

pub mod error;
pub mod formula;
pub mod oracle;
pub mod par;
pub mod qe;
pub mod reals;
pub mod residue;
pub mod tree;
pub mod zhat;
pub mod zp_add;
pub mod zp_units;

pub use error::{Error, Result};
