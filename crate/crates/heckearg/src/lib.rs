//! Weight-2 Hecke eigenforms of prime level: modular symbols, L-functions on the
//! critical line, the argument function S(t,f) and harmonic family statistics.

pub mod arith;
pub mod cache;
pub mod error;
pub mod hecke;
pub mod lfunction;
pub mod modsym;
pub mod numeric;
pub mod selberg;
pub mod stats;
pub mod sym2;

pub use error::{Error, Result};
