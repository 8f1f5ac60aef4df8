//! Numeric verification of elementary-function inequalities.
//!
//! The crate is `no_std` with `alloc`. Bounds live in a text catalog
//! ([`catalog`]), are written in a small expression language ([`expr`]),
//! evaluated with propagated error bounds ([`oracle`]) and checked by the
//! [`verifier`], [`analysis`] and [`special`] modules.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod catalog;
pub mod expr;
pub mod oracle;
pub mod real;
pub mod special;
pub mod verifier;

pub use oracle::{NumError, Precision, RefValue};
pub use real::{Ext, Real};
pub use verifier::{Context, Settings, Status, VerifyError};
