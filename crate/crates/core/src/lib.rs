// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes, series coefficients and reference values keep every digit.
#![allow(clippy::excessive_precision)]

pub mod classical;
pub mod cli;
pub mod grid;
pub mod quadrature;
pub mod quantum_cyl;
pub mod quantum_par;
pub mod specfun;
pub mod verify;
