//! Quantum codes correcting a single qubit deletion, built from families of
//! classical words.
//!
//! A family set `X^(0), ..., X^(M-1)` of length-`n` binary words encodes
//! `ceil(log2 M)` logical qubits: message `|m>` maps to the uniform
//! superposition over `X^(m)`. The [`partition`] module checks the three
//! combinatorial conditions under which every single deletion is
//! correctable, [`codes`] supplies classical deletion codes and a high-rate
//! construction, and [`quantum`] simulates encoding, deletion and decoding
//! exactly on sparse states.

pub mod codes;
pub mod delsets;
pub mod error;
pub mod partition;
pub mod quantum;
pub mod seqcore;

pub use error::{Error, Result};
pub use seqcore::{Bit, BitString};
