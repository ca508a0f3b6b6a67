//! Exact rational reference semantics for the function expressions the
//! engine can build trees for. Used as ground truth by tests and by the
//! modulus-based builder.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::digitsys::{LinState, ModulusEvaluator, QuadState};
use crate::error::{CoreError, Result};
use crate::rational::{self, int, Rational};

/// Largest polynomial degree the oracle will expand to.
pub const MAX_ORACLE_DEGREE: usize = 64;

/// A unary function `I -> I` built from the supported families.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FuncExpr {
    /// `x -> u x + v`
    Lin(Rational, Rational),
    /// `x -> u x^2 + v x + w`
    Quad(Rational, Rational, Rational),
    /// `x -> a (1 - x^2) - 1`
    Logistic(Rational),
    /// `outer o inner`
    Comp(Box<FuncExpr>, Box<FuncExpr>),
    /// `base` composed with itself `n >= 1` times.
    Pow(Box<FuncExpr>, usize),
}

impl FuncExpr {
    pub fn lin(u: Rational, v: Rational) -> Result<FuncExpr> {
        let e = FuncExpr::Lin(u, v);
        e.validate()?;
        Ok(e)
    }

    pub fn quad(u: Rational, v: Rational, w: Rational) -> Result<FuncExpr> {
        let e = FuncExpr::Quad(u, v, w);
        e.validate()?;
        Ok(e)
    }

    pub fn logistic(a: Rational) -> Result<FuncExpr> {
        let e = FuncExpr::Logistic(a);
        e.validate()?;
        Ok(e)
    }

    pub fn comp(outer: FuncExpr, inner: FuncExpr) -> FuncExpr {
        FuncExpr::Comp(Box::new(outer), Box::new(inner))
    }

    pub fn pow(base: FuncExpr, n: usize) -> Result<FuncExpr> {
        let e = FuncExpr::Pow(Box::new(base), n);
        e.validate()?;
        Ok(e)
    }

    /// Checks that every atom maps `I` into `I`; composites inherit this.
    pub fn validate(&self) -> Result<()> {
        match self {
            FuncExpr::Lin(u, v) => LinState::new(vec![u.clone()], v.clone()).map(drop),
            FuncExpr::Quad(u, v, w) => QuadState::new(u.clone(), v.clone(), w.clone()).map(drop),
            FuncExpr::Logistic(a) => {
                if a.is_negative() || *a > int(2) {
                    Err(CoreError::domain(format!(
                        "logistic parameter {} outside [0, 2]",
                        rational::render(a)
                    )))
                } else {
                    Ok(())
                }
            }
            FuncExpr::Comp(f, g) => {
                f.validate()?;
                g.validate()
            }
            FuncExpr::Pow(f, n) => {
                if *n == 0 {
                    return Err(CoreError::domain("iteration count must be at least 1"));
                }
                f.validate()
            }
        }
    }

    /// Degree of the polynomial this expression denotes.
    pub fn degree(&self) -> u128 {
        match self {
            FuncExpr::Lin(..) => 1,
            FuncExpr::Quad(u, ..) => if u.is_zero() { 1 } else { 2 },
            FuncExpr::Logistic(a) => if a.is_zero() { 0 } else { 2 },
            FuncExpr::Comp(f, g) => f.degree().saturating_mul(g.degree()),
            FuncExpr::Pow(f, n) => {
                let d = f.degree();
                (0..*n).fold(1u128, |acc, _| acc.saturating_mul(d))
            }
        }
    }
}

fn render_atom(f: &mut fmt::Formatter<'_>, name: &str, args: &[&Rational]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", rational::render(a))?;
    }
    write!(f, ")")
}

/// Renders in the expression language; the output parses back to an equal
/// expression.
impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncExpr::Lin(u, v) => render_atom(f, "lin", &[u, v]),
            FuncExpr::Quad(u, v, w) => render_atom(f, "quad", &[u, v, w]),
            FuncExpr::Logistic(a) => render_atom(f, "logistic", &[a]),
            FuncExpr::Comp(outer, inner) => match **inner {
                FuncExpr::Comp(..) => write!(f, "{outer} o ({inner})"),
                _ => write!(f, "{outer} o {inner}"),
            },
            FuncExpr::Pow(base, n) => write!(f, "pow({base}, {n})"),
        }
    }
}

/// Exact value of `e` at `x`.
pub fn eval_exact(e: &FuncExpr, x: &Rational) -> Result<Rational> {
    if !rational::in_unit_interval(x) {
        return Err(CoreError::domain(format!("{} lies outside [-1, 1]", rational::render(x))));
    }
    Ok(eval_unchecked(e, x.clone()))
}

fn eval_unchecked(e: &FuncExpr, x: Rational) -> Rational {
    match e {
        FuncExpr::Lin(u, v) => u * x + v,
        FuncExpr::Quad(u, v, w) => u * &x * &x + v * x + w,
        FuncExpr::Logistic(a) => a * (Rational::one() - &x * &x) - int(1),
        FuncExpr::Comp(f, g) => eval_unchecked(f, eval_unchecked(g, x)),
        FuncExpr::Pow(f, n) => (0..*n).fold(x, |acc, _| eval_unchecked(f, acc)),
    }
}

/// The logistic map iterated `n` times in binary64 floating point. Rounding
/// errors are amplified at every step, so for large `n` the result has
/// nothing to do with the exact iterate.
pub fn logistic_f64(a: f64, x: f64, n: usize) -> f64 {
    (0..n).fold(x, |x, _| a * (1.0 - x * x) - 1.0)
}

/// Dense polynomial, coefficient of `x^k` at index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    fn trimmed(mut c: Vec<Rational>) -> Poly {
        while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        if c.is_empty() {
            c.push(Rational::zero());
        }
        Poly(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::trimmed(out)
    }

    /// `self o inner`, by Horner's scheme.
    fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly(vec![Rational::zero()]);
        for c in self.0.iter().rev() {
            acc = acc.mul(inner);
            acc.0[0] += c;
        }
        acc
    }

    /// Integral over `[-1, 1]`.
    pub fn integral(&self) -> Rational {
        self.0
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, c)| c * Rational::new(2.into(), (k as i64 + 1).into()))
            .sum()
    }

    /// `sum k |c_k|`, an upper bound of `|p'|` on `I`.
    pub fn lipschitz_bound(&self) -> Rational {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.abs() * int(k as i64))
            .sum()
    }
}

/// Expands `e` into a polynomial of degree at most [`MAX_ORACLE_DEGREE`].
pub fn expand(e: &FuncExpr) -> Result<Poly> {
    if e.degree() > MAX_ORACLE_DEGREE as u128 {
        return Err(CoreError::ResourceLimit(format!(
            "expansion of degree {} exceeds the oracle cap {MAX_ORACLE_DEGREE}",
            e.degree()
        )));
    }
    Ok(expand_unchecked(e))
}

fn expand_unchecked(e: &FuncExpr) -> Poly {
    match e {
        FuncExpr::Lin(u, v) => Poly::trimmed(vec![v.clone(), u.clone()]),
        FuncExpr::Quad(u, v, w) => Poly::trimmed(vec![w.clone(), v.clone(), u.clone()]),
        FuncExpr::Logistic(a) => Poly::trimmed(vec![a - int(1), Rational::zero(), -a.clone()]),
        FuncExpr::Comp(f, g) => expand_unchecked(f).compose(&expand_unchecked(g)),
        FuncExpr::Pow(f, n) => {
            let base = expand_unchecked(f);
            (1..*n).fold(base.clone(), |acc, _| acc.compose(&base))
        }
    }
}

/// Exact integral of `e` over `[-1, 1]`.
pub fn integral_exact(e: &FuncExpr) -> Result<Rational> {
    Ok(expand(e)?.integral())
}

/// A `delta` such that `|x - y| <= delta` implies `|e(x) - e(y)| <= eps`
/// on `I`: `eps / L` for a Lipschitz bound `L`, or `eps` itself when `e` is
/// constant.
pub fn modulus_exact(e: &FuncExpr, eps: &Rational) -> Result<Rational> {
    if !eps.is_positive() {
        return Err(CoreError::domain("eps must be positive"));
    }
    let l = expand(e)?.lipschitz_bound();
    Ok(if l.is_zero() { eps.clone() } else { eps / l })
}

/// Honest [`ModulusEvaluator`] for an expression: approximations are exact
/// values at the centre, the modulus comes from a Lipschitz bound.
#[derive(Debug, Clone)]
pub struct LipschitzEvaluator {
    expr: FuncExpr,
    lipschitz: Rational,
}

impl LipschitzEvaluator {
    pub fn new(expr: FuncExpr) -> Result<LipschitzEvaluator> {
        expr.validate()?;
        let lipschitz = expand(&expr)?.lipschitz_bound();
        Ok(LipschitzEvaluator { expr, lipschitz })
    }
}

impl ModulusEvaluator for LipschitzEvaluator {
    fn approx(&self, center: &Rational, _radius: &Rational) -> Rational {
        eval_unchecked(&self.expr, center.clone())
    }

    fn modulus(&self, eps: &Rational) -> Rational {
        if self.lipschitz.is_zero() {
            eps.clone()
        } else {
            eps / &self.lipschitz
        }
    }
}
