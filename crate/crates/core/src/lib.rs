//! Surrogate modelling of deterministic black-box simulators.
//!
//! Two surrogate families are provided: Legendre polynomial chaos expansions
//! fitted by least squares or by spectral projection on tensor Gauss-Legendre
//! grids ([`polychaos`]), and Gaussian process emulators with squared
//! exponential or Matérn-5/2 correlation ([`gp`]). The [`validation`] module
//! scores any surrogate against an independent Latin hypercube, and
//! [`bench`] wires everything into the experiment harness behind the
//! `uqbench` binary.
//!
//! All fitting and prediction happens on the standard cube `[-1, 1]^n`;
//! [`domain::InputSpace`] maps native units in and out.

// `!(x <= y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod designs;
pub mod domain;
pub mod error;
pub mod gp;
pub mod io;
pub mod polychaos;
pub mod seeds;
pub mod surrogate;
pub mod validation;

mod linalg;

pub use error::{Error, Result};
