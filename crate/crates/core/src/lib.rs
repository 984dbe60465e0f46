//! Numerical lift of finitely summable Fredholm modules over groups of
//! polynomial growth to spectral triples `D = F|D|`, together with checks of
//! every inequality the construction relies on.
//!
//! The pipeline is `module` → `lift` → `verify`; `cli` wraps it for the
//! `spectral-lift` binary.

pub mod cli;
pub mod error;
pub mod group;
pub mod interchange;
pub mod lift;
pub mod module;
pub mod operator;
pub mod verify;

pub use error::{Error, Result};
