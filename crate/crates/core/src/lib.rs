//! Numerical invariants and dimension formulas for Witt-vector affine Springer
//! fibers of GL_n over p-adic fields, together with brute-force lattice
//! oracles that verify every formula by enumeration over truncated rings.

pub mod battery;
pub mod error;
pub mod fq;
pub mod invariants;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod order;
pub mod padic;
pub mod poly;
pub mod rootdata;
pub mod window;

pub use error::{with_precision_retry, Error, Result};
pub use padic::{LocalField, PadicElt, Valuation};
