//! Exact-arithmetic toolkit for perfect equilibria of finite games and of
//! countable-action games played with finitely additive strategies.

pub mod charges;
pub mod error;
pub mod finite;
pub mod integration;
pub mod invariance;
pub mod io;
pub mod perfection;
pub mod rational;
pub mod report;
pub mod sets;
mod text;

pub use error::{Error, Result};
pub use rational::{q, Rational};
pub use sets::{Classification, NormalForm, SetExpr};
