//! Signed digits, persistent lazy digit streams and conversions between fast
//! rational Cauchy sequences and digit streams.
//!
//! A stream `a_0 a_1 ...` of digits in `{-1, 0, 1}` denotes
//! `sum a_i * 2^-(i+1)`, a point of `I = [-1, 1]`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{CoreError, Result};
use crate::rational::{self, pow2, ratio, Rational};
use crate::tree::{build_tree, build_tree_shared, CTree, DigitalSystem, Step};

/// A binary signed digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignedDigit {
    N,
    Z,
    P,
}

pub use SignedDigit::{N, P, Z};

impl SignedDigit {
    /// All digits in branch order.
    pub const ALL: [SignedDigit; 3] = [N, Z, P];

    pub fn numeric(self) -> i64 {
        match self {
            N => -1,
            Z => 0,
            P => 1,
        }
    }

    pub fn to_rational(self) -> Rational {
        rational::int(self.numeric())
    }

    /// Position in a reading node's branch triple.
    pub fn branch(self) -> usize {
        (self.numeric() + 1) as usize
    }

    pub fn as_char(self) -> char {
        match self {
            N => 'N',
            Z => 'Z',
            P => 'P',
        }
    }

    pub fn from_char(c: char) -> Option<SignedDigit> {
        match c {
            'N' => Some(N),
            'Z' => Some(Z),
            'P' => Some(P),
            _ => None,
        }
    }

    /// Whether `x` lies in `I_d = [d/2 - 1/2, d/2 + 1/2]`.
    pub fn interval_contains(self, x: &Rational) -> bool {
        (x - self.to_rational() / rational::int(2)).abs() <= ratio(1, 2)
    }
}

impl fmt::Display for SignedDigit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Renders digits as `N`/`Z`/`P` with no separators.
pub fn render_digits(digits: &[SignedDigit]) -> String {
    digits.iter().map(|d| d.as_char()).collect()
}

pub fn parse_digits(text: &str) -> Option<Vec<SignedDigit>> {
    text.chars().map(SignedDigit::from_char).collect()
}

/// An infinite, persistent digit stream. Every position is computed at most
/// once and then shared by all clones.
#[derive(Clone, Debug)]
pub struct DigitStream(CTree);

impl DigitStream {
    /// Views a 0-ary tree as the stream it writes.
    pub fn from_tree(tree: CTree) -> Result<DigitStream> {
        if tree.arity() != 0 {
            return Err(CoreError::Arity { expected: 0, got: tree.arity() });
        }
        Ok(DigitStream(tree))
    }

    pub fn as_tree(&self) -> &CTree {
        &self.0
    }

    pub fn into_tree(self) -> CTree {
        self.0
    }

    pub fn uncons(&self) -> (SignedDigit, DigitStream) {
        match self.0.node() {
            Step::Write(d, rest) => (d, DigitStream(rest)),
            Step::Read(..) => unreachable!("0-ary trees never read"),
        }
    }

    pub fn head(&self) -> SignedDigit {
        self.uncons().0
    }

    pub fn tail(&self) -> DigitStream {
        self.uncons().1
    }

    pub fn iter(&self) -> Digits {
        Digits(self.clone())
    }

    pub fn prefix(&self, n: usize) -> Vec<SignedDigit> {
        self.iter().take(n).collect()
    }

    /// The stream `prefix` followed by `cycle` repeated forever. An empty
    /// cycle repeats `Z`.
    pub fn eventually_periodic(prefix: &[SignedDigit], cycle: &[SignedDigit]) -> DigitStream {
        let cycle = if cycle.is_empty() { vec![Z] } else { cycle.to_vec() };
        let sys = Periodic { prefix: prefix.to_vec(), cycle };
        DigitStream(build_tree_shared(sys, 0))
    }

    pub fn constant(d: SignedDigit) -> DigitStream {
        DigitStream(CTree::constant(0, d))
    }
}

pub struct Digits(DigitStream);

impl Iterator for Digits {
    type Item = SignedDigit;

    fn next(&mut self) -> Option<SignedDigit> {
        let (d, rest) = self.0.uncons();
        self.0 = rest;
        Some(d)
    }
}

struct Periodic {
    prefix: Vec<SignedDigit>,
    cycle: Vec<SignedDigit>,
}

impl DigitalSystem for Periodic {
    type State = usize;

    fn arity(&self) -> usize {
        0
    }

    fn step(&self, &pos: &usize) -> Step<usize> {
        let total = self.prefix.len() + self.cycle.len();
        let d = if pos < self.prefix.len() {
            self.prefix[pos]
        } else {
            self.cycle[pos - self.prefix.len()]
        };
        let next = if pos + 1 == total { self.prefix.len() } else { pos + 1 };
        Step::Write(d, next)
    }
}

/// `sum_{i<n} a_i 2^-(i+1)`, the standard `2^-n` approximation of the value
/// of `s`. The denominator divides `2^n`.
pub fn sigma_approx(s: &DigitStream, n: usize) -> Rational {
    if n == 0 {
        return Rational::zero();
    }
    let mut numer = BigInt::zero();
    for d in s.iter().take(n) {
        numer = (numer << 1u32) + d.numeric();
    }
    Rational::new(numer, pow2(n as u64))
}

/// Chooses a digit from a 1/4-accurate approximation `q` of a point of `I`:
/// `P` if `q > 1/4`, `Z` if `|q| <= 1/4`, `N` otherwise. The point then lies
/// in `I_d`.
pub fn select_digit(q: &Rational) -> SignedDigit {
    let quarter = ratio(1, 4);
    if *q > quarter {
        P
    } else if q.abs() <= quarter {
        Z
    } else {
        N
    }
}

/// A fast Cauchy sequence: `approx(n)` is within `2^-n` of the intended real.
///
/// Sequences supplied from outside are trusted; only [`const_seq`] certifies
/// the guarantee by construction.
#[derive(Clone)]
pub struct CauchySequence(Arc<dyn Fn(u64) -> Rational + Send + Sync>);

impl CauchySequence {
    pub fn new(f: impl Fn(u64) -> Rational + Send + Sync + 'static) -> Self {
        CauchySequence(Arc::new(f))
    }

    pub fn approx(&self, n: u64) -> Rational {
        (self.0)(n)
    }
}

impl fmt::Debug for CauchySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CauchySequence(..)")
    }
}

/// The constant sequence of a rational in `[-1, 1]`.
pub fn const_seq(q: Rational) -> Result<CauchySequence> {
    if !rational::in_unit_interval(&q) {
        return Err(CoreError::domain(format!(
            "{} lies outside [-1, 1]",
            rational::render(&q)
        )));
    }
    Ok(CauchySequence::new(move |_| q.clone()))
}

/// The residual sequence after `shift` digits have been emitted:
/// `n -> 2^shift * f(n + shift) - offset`. Each step of the conversion
/// replaces `g` by `n -> 2 g(n+1) - d`; keeping the affine form makes that
/// replacement O(1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residual {
    pub shift: u64,
    pub offset: BigInt,
}

impl Residual {
    pub fn eval(&self, f: &CauchySequence, n: u64) -> Rational {
        f.approx(n + self.shift) * Rational::from_integer(pow2(self.shift))
            - Rational::from_integer(self.offset.clone())
    }

    /// The exact value the residual converges to when `f` converges to `x`.
    pub fn value_at(&self, x: &Rational) -> Rational {
        x * Rational::from_integer(pow2(self.shift)) - Rational::from_integer(self.offset.clone())
    }

    fn next(&self, d: SignedDigit) -> Residual {
        Residual {
            shift: self.shift + 1,
            offset: (&self.offset << 1u32) + d.numeric(),
        }
    }
}

/// One coiteration step of the conversion: query the residual at index 2,
/// pick the digit, and move to the next residual.
pub fn cauchy_step(f: &CauchySequence, r: &Residual) -> (SignedDigit, Residual) {
    let d = select_digit(&r.eval(f, 2));
    (d, r.next(d))
}

/// The digits of `cauchy_to_stream` together with the residual in effect
/// before each digit was chosen.
pub fn cauchy_trace(f: &CauchySequence) -> impl Iterator<Item = (SignedDigit, Residual)> + '_ {
    let mut r = Residual { shift: 0, offset: BigInt::zero() };
    std::iter::from_fn(move || {
        let (d, next) = cauchy_step(f, &r);
        Some((d, std::mem::replace(&mut r, next)))
    })
}

struct CauchyDigits(CauchySequence);

impl DigitalSystem for CauchyDigits {
    type State = Residual;

    fn arity(&self) -> usize {
        0
    }

    fn step(&self, r: &Residual) -> Step<Residual> {
        let (d, next) = cauchy_step(&self.0, r);
        Step::Write(d, next)
    }
}

/// Converts a fast Cauchy sequence for `x` in `I` into a digit stream for `x`.
pub fn cauchy_to_stream(f: CauchySequence) -> DigitStream {
    let start = Residual { shift: 0, offset: BigInt::zero() };
    DigitStream(build_tree(CauchyDigits(f), start))
}

/// `sigma_approx` as a Cauchy sequence over the stream.
pub fn stream_to_cauchy(s: DigitStream) -> CauchySequence {
    CauchySequence::new(move |n| sigma_approx(&s, n as usize))
}

/// The digit stream of a rational in `[-1, 1]`.
pub fn rational_stream(q: &Rational) -> Result<DigitStream> {
    Ok(cauchy_to_stream(const_seq(q.clone())?))
}
