//! Definite integration over `[-1, 1]` of functions given by unary trees.
//!
//! With `S f` the integral of `f` over `I`, the algorithm rests on two
//! identities: `S f = S(2f - d) / 2 + d` at a writing node, and
//! `S f = (S(f o av_-1) + S(f o av_1)) / 2` at a reading node, where
//! `av_d(x) = (x + d) / 2`. The middle branch of a reading node is never
//! visited: the two outer halves already cover `I`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{CoreError, Result};
use crate::rational::{self, Rational};
use crate::sdstream::{N, P};
use crate::tree::{CTree, Step};

/// Default cap on nodes visited by [`integral`].
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralResult {
    pub value: Rational,
    /// `2^(1-k)`.
    pub error_bound: Rational,
    pub nodes_visited: u64,
}

/// Approximates the integral over `I` of the function realized by `t` to
/// within `2^(1-k)`.
pub fn integral(t: &CTree, k: usize) -> Result<IntegralResult> {
    integral_with_budget(t, k, DEFAULT_NODE_BUDGET)
}

/// Like [`integral`], failing with a resource-limit error once more than
/// `budget` nodes have been visited.
pub fn integral_with_budget(t: &CTree, k: usize, budget: u64) -> Result<IntegralResult> {
    if t.arity() != 1 {
        return Err(CoreError::Arity { expected: 1, got: t.arity() });
    }
    let mut walk = Walk { visited: 0, budget };
    let value = walk.level(t, k)?;
    Ok(IntegralResult {
        value: Rational::new(value.numer, rational::pow2(value.exp)),
        error_bound: rational::pow2_rat(1 - k as i64),
        nodes_visited: walk.visited,
    })
}

/// `numer / 2^exp`
struct Dyadic {
    numer: BigInt,
    exp: u64,
}

impl Dyadic {
    fn zero() -> Dyadic {
        Dyadic { numer: BigInt::zero(), exp: 0 }
    }

    fn half(self) -> Dyadic {
        Dyadic { numer: self.numer, exp: self.exp + 1 }
    }

    fn plus_int(self, d: i64) -> Dyadic {
        Dyadic { numer: self.numer + (BigInt::from(d) << self.exp), exp: self.exp }
    }

    fn mean(self, other: Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let numer = (self.numer << (exp - self.exp)) + (other.numer << (exp - other.exp));
        Dyadic { numer, exp: exp + 1 }
    }
}

struct Walk {
    visited: u64,
    budget: u64,
}

impl Walk {
    fn level(&mut self, t: &CTree, k: usize) -> Result<Dyadic> {
        if k == 0 {
            return Ok(Dyadic::zero());
        }
        self.visited += 1;
        if self.visited > self.budget {
            return Err(CoreError::ResourceLimit(format!(
                "integration visited more than {} nodes",
                self.budget
            )));
        }
        match t.node() {
            Step::Write(d, next) => Ok(self.level(&next, k - 1)?.half().plus_int(d.numeric())),
            Step::Read(_, br) => {
                let low = self.level(&br[N.branch()], k)?;
                let high = self.level(&br[P.branch()], k)?;
                Ok(low.mean(high))
            }
        }
    }
}
