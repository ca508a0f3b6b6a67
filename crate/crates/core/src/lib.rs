//! Exact real arithmetic on signed-digit streams, with functions on the
//! interval `[-1, 1]` represented as lazily built, memoized continuity trees.

pub mod ctree;
pub mod digitsys;
pub mod dsl;
pub mod error;
pub mod integrate;
pub mod oracle;
pub mod rational;
pub mod render;
pub mod sdstream;
mod tree;

pub use error::{CoreError, Result};
pub use oracle::FuncExpr;
pub use rational::Rational;
pub use sdstream::{DigitStream, SignedDigit};
pub use tree::{thread_expansions, CTree, DigitalSystem, Node, NodeKey, Step};
