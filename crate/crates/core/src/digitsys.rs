//! Tree builders backed by digital systems: linear affine maps, quadratic
//! polynomials (and the logistic family), iteration by composition, and a
//! generic builder for any function given with a modulus of continuity.

use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ctree::compose;
use crate::error::{CoreError, Result};
use crate::rational::{self, hash_reduced, int, ratio, Rational};
use crate::sdstream::{select_digit, SignedDigit, N, P, Z};
use crate::tree::CTree;

pub use crate::tree::{build_tree, build_tree_shared, DigitalSystem, Step};

/// Whether equal states of a builder share one cached node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sharing {
    /// One node per state: linear maps become finite automata.
    #[default]
    ByState,
    /// One node per tree position.
    None,
}

fn sum_abs(u: &[Rational]) -> Rational {
    u.iter().fold(Rational::zero(), |acc, x| acc + x.abs())
}

/// State of the linear affine system: `x -> u . x + v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinState {
    pub u: Vec<Rational>,
    pub v: Rational,
}

impl Hash for LinState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.u.len().hash(state);
        for c in &self.u {
            hash_reduced(c, state);
        }
        hash_reduced(&self.v, state);
    }
}

impl LinState {
    pub fn new(u: Vec<Rational>, v: Rational) -> Result<LinState> {
        let s = LinState { u, v };
        if s.norm() + s.v.abs() > Rational::one() {
            return Err(CoreError::domain(format!(
                "linear map with |u| + |v| = {} does not map I to I",
                rational::render(&(s.norm() + s.v.abs()))
            )));
        }
        Ok(s)
    }

    /// `|u|_1`.
    pub fn norm(&self) -> Rational {
        sum_abs(&self.u)
    }

    /// The image of `I^n` is `[v - |u|, v + |u|]`.
    pub fn image(&self) -> (Rational, Rational) {
        let r = self.norm();
        (&self.v - &r, &self.v + &r)
    }

    /// The input a read will consume: the smallest `i` with
    /// `|u_i| >= |u| / n` (1-based).
    pub fn read_index(&self) -> usize {
        let n = self.u.len();
        let bound = self.norm() / int(n as i64);
        self.u.iter().position(|x| x.abs() >= bound).map_or(1, |i| i + 1)
    }

    pub fn write(&self, e: SignedDigit) -> LinState {
        LinState {
            u: self.u.iter().map(|x| x * int(2)).collect(),
            v: &self.v * int(2) - e.to_rational(),
        }
    }

    pub fn read(&self, i: usize, d: SignedDigit) -> LinState {
        let mut u = self.u.clone();
        let ui = u[i - 1].clone();
        u[i - 1] = &ui / int(2);
        LinState { u, v: &self.v + ui * d.to_rational() / int(2) }
    }
}

pub struct Linear {
    arity: usize,
}

impl DigitalSystem for Linear {
    type State = LinState;

    fn arity(&self) -> usize {
        self.arity
    }

    fn step(&self, s: &LinState) -> Step<LinState> {
        if s.norm() <= ratio(1, 4) {
            let quarter = ratio(1, 4);
            let e = if s.v < -quarter.clone() {
                N
            } else if s.v > quarter {
                P
            } else {
                Z
            };
            Step::Write(e, s.write(e))
        } else {
            let i = s.read_index();
            Step::Read(i, SignedDigit::ALL.map(|d| s.read(i, d)))
        }
    }

    /// Halvings of `|u|` still needed before a write, capped at 64.
    fn measure(&self, s: &LinState) -> u64 {
        let mut norm = s.norm();
        let mut m = 0;
        while norm > ratio(1, 4) && m < 64 {
            norm /= int(2);
            m += 1;
        }
        m
    }
}

/// Tree of `x -> u . x + v` with one input per coefficient.
pub fn lin_tree(u: Vec<Rational>, v: Rational) -> Result<CTree> {
    lin_tree_with(u, v, Sharing::default())
}

pub fn lin_tree_with(u: Vec<Rational>, v: Rational, sharing: Sharing) -> Result<CTree> {
    let start = LinState::new(u, v)?;
    let sys = Linear { arity: start.u.len() };
    Ok(match sharing {
        Sharing::ByState => build_tree_shared(sys, start),
        Sharing::None => build_tree(sys, start),
    })
}

/// State of the quadratic system: `x -> u x^2 + v x + w`.
///
/// Stored as integer numerators over one positive denominator. Transitions
/// only ever scale by powers of two, so the representation is renormalized
/// by stripping common factors of two and never needs a gcd. States whose
/// integers fit in `i128` use machine arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadState(Coeffs);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Coeffs {
    Small([i128; 3], i128),
    Big([BigInt; 3], BigInt),
}

trait Num: Clone + Ord + Zero + Sized {
    fn from_i64(x: i64) -> Self;
    fn add_(&self, o: &Self) -> Option<Self>;
    fn sub_(&self, o: &Self) -> Option<Self>;
    fn mul_(&self, o: &Self) -> Option<Self>;
    fn neg_(&self) -> Option<Self>;
    fn shr_(&self, s: u64) -> Self;
    fn twos(&self) -> Option<u64>;

    fn mul_i(&self, k: i64) -> Option<Self> {
        self.mul_(&Self::from_i64(k))
    }
    fn abs_(&self) -> Option<Self> {
        if *self < Self::zero() {
            self.neg_()
        } else {
            Some(self.clone())
        }
    }
}

impl Num for i128 {
    fn from_i64(x: i64) -> i128 {
        x.into()
    }
    fn add_(&self, o: &i128) -> Option<i128> {
        self.checked_add(*o)
    }
    fn sub_(&self, o: &i128) -> Option<i128> {
        self.checked_sub(*o)
    }
    fn mul_(&self, o: &i128) -> Option<i128> {
        self.checked_mul(*o)
    }
    fn neg_(&self) -> Option<i128> {
        self.checked_neg()
    }
    fn shr_(&self, s: u64) -> i128 {
        self >> s
    }
    fn twos(&self) -> Option<u64> {
        (*self != 0).then(|| self.trailing_zeros().into())
    }
}

impl Num for BigInt {
    fn from_i64(x: i64) -> BigInt {
        x.into()
    }
    fn add_(&self, o: &BigInt) -> Option<BigInt> {
        Some(self + o)
    }
    fn sub_(&self, o: &BigInt) -> Option<BigInt> {
        Some(self - o)
    }
    fn mul_(&self, o: &BigInt) -> Option<BigInt> {
        Some(self * o)
    }
    fn neg_(&self) -> Option<BigInt> {
        Some(-self)
    }
    fn shr_(&self, s: u64) -> BigInt {
        self >> s
    }
    fn twos(&self) -> Option<u64> {
        self.trailing_zeros()
    }
}

fn normalize<T: Num>(num: [T; 3], den: T) -> ([T; 3], T) {
    let shift = num.iter().chain([&den]).filter_map(Num::twos).min().unwrap_or(0);
    if shift == 0 {
        (num, den)
    } else {
        (num.map(|n| n.shr_(shift)), den.shr_(shift))
    }
}

fn write_coeffs<T: Num>([u, v, w]: &[T; 3], den: &T, e: i64) -> Option<([T; 3], T)> {
    let num = [u.mul_i(2)?, v.mul_i(2)?, w.mul_i(2)?.sub_(&den.mul_i(e)?)?];
    Some(normalize(num, den.clone()))
}

fn read_coeffs<T: Num>([u, v, w]: &[T; 3], den: &T, d: i64) -> Option<([T; 3], T)> {
    let num = [
        u.clone(),
        u.mul_i(d)?.add_(v)?.mul_i(2)?,
        u.mul_i(d * d)?.add_(&v.mul_i(2 * d)?)?.add_(&w.mul_i(4)?)?,
    ];
    Some(normalize(num, den.mul_i(4)?))
}

/// Values at the endpoints and, when it lies in `I`, at the extremal point
/// `-v / 2u`, as fractions with positive denominators.
fn critical_values<T: Num>([u, v, w]: &[T; 3], den: &T) -> Option<Vec<(T, T)>> {
    let mut crit = vec![
        (u.add_(v)?.add_(w)?, den.clone()),
        (u.sub_(v)?.add_(w)?, den.clone()),
    ];
    if !u.is_zero() && v.abs_()? <= u.abs_()?.mul_i(2)? {
        let n = u.mul_(w)?.mul_i(4)?.sub_(&v.mul_(v)?)?;
        let m = u.mul_(den)?.mul_i(4)?;
        crit.push(if m < T::zero() { (n.neg_()?, m.neg_()?) } else { (n, m) });
    }
    Some(crit)
}

/// Whether every critical value `n / m` lies in `[(e - 1) / 2, (e + 1) / 2]`.
fn fits<T: Num>(crit: &[(T, T)], e: SignedDigit) -> Option<bool> {
    let e = e.numeric();
    for (n, m) in crit {
        let twice = n.mul_i(2)?;
        if m.mul_i(e - 1)? > twice || twice > m.mul_i(e + 1)? {
            return Some(false);
        }
    }
    Some(true)
}

fn to_small(b: &BigInt) -> Option<i128> {
    i128::try_from(b).ok()
}

impl QuadState {
    pub fn new(u: Rational, v: Rational, w: Rational) -> Result<QuadState> {
        let den = u.denom().lcm(v.denom()).lcm(w.denom());
        let scale = |q: &Rational| q.numer() * (&den / q.denom());
        let s = QuadState::from_big(normalize([scale(&u), scale(&v), scale(&w)], den));
        let (low, high) = s.range();
        if low < int(-1) || high > int(1) {
            return Err(CoreError::domain(format!(
                "quadratic with range [{}, {}] does not map I to I",
                rational::render(&low),
                rational::render(&high)
            )));
        }
        Ok(s)
    }

    fn from_big((num, den): ([BigInt; 3], BigInt)) -> QuadState {
        let small = (|| Some(([to_small(&num[0])?, to_small(&num[1])?, to_small(&num[2])?], to_small(&den)?)))();
        QuadState(match small {
            Some((n, d)) => Coeffs::Small(n, d),
            None => Coeffs::Big(num, den),
        })
    }

    fn big(&self) -> ([BigInt; 3], BigInt) {
        match &self.0 {
            Coeffs::Small(n, d) => (n.map(BigInt::from), BigInt::from(*d)),
            Coeffs::Big(n, d) => (n.clone(), d.clone()),
        }
    }

    /// Applies a coefficient transition, in machine integers when possible.
    fn map(
        &self,
        small: impl Fn(&[i128; 3], &i128) -> Option<([i128; 3], i128)>,
        big: impl Fn(&[BigInt; 3], &BigInt) -> Option<([BigInt; 3], BigInt)>,
    ) -> QuadState {
        if let Coeffs::Small(n, d) = &self.0 {
            if let Some((n, d)) = small(n, d) {
                return QuadState(Coeffs::Small(n, d));
            }
        }
        let (n, d) = self.big();
        QuadState::from_big(big(&n, &d).expect("bignum arithmetic is total"))
    }

    /// `[u, v, w]`
    pub fn coefficients(&self) -> [Rational; 3] {
        let (num, den) = self.big();
        num.map(|n| Rational::new(n, den.clone()))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let [u, v, w] = self.coefficients();
        u * x * x + v * x + w
    }

    /// Minimum and maximum over `I`, taken over the endpoints and, when it
    /// lies in `I`, the extremal point `-v / 2u`.
    pub fn range(&self) -> (Rational, Rational) {
        let (num, den) = self.big();
        let crit: Vec<Rational> = critical_values(&num, &den)
            .expect("bignum arithmetic is total")
            .into_iter()
            .map(|(n, m)| Rational::new(n, m))
            .collect();
        let low = crit.iter().min().cloned().expect("non-empty");
        let high = crit.iter().max().cloned().expect("non-empty");
        (low, high)
    }

    /// Whether the image of `I` lies in `I_e`.
    pub fn test(&self, e: SignedDigit) -> bool {
        self.first_fit(&[e]).is_some()
    }

    /// The first digit among `candidates` whose half interval holds the image of `I`.
    fn first_fit(&self, candidates: &[SignedDigit]) -> Option<SignedDigit> {
        if let Coeffs::Small(n, d) = &self.0 {
            if let Some(crit) = critical_values(n, d) {
                let found: Option<Vec<bool>> = candidates.iter().map(|&e| fits(&crit, e)).collect();
                if let Some(found) = found {
                    return candidates.iter().zip(found).find(|(_, ok)| *ok).map(|(&e, _)| e);
                }
            }
        }
        let (n, d) = self.big();
        let crit = critical_values(&n, &d).expect("bignum arithmetic is total");
        candidates.iter().copied().find(|&e| fits(&crit, e) == Some(true))
    }

    /// Coefficients of `2f - e`.
    pub fn write(&self, e: SignedDigit) -> QuadState {
        let e = e.numeric();
        self.map(|n, d| write_coeffs(n, d, e), |n, d| write_coeffs(n, d, e))
    }

    /// Coefficients of `x -> f((x + d) / 2)`.
    pub fn read(&self, d: SignedDigit) -> QuadState {
        let d = d.numeric();
        self.map(|n, den| read_coeffs(n, den, d), |n, den| read_coeffs(n, den, d))
    }
}

pub struct Quadratic;

impl DigitalSystem for Quadratic {
    type State = QuadState;

    fn arity(&self) -> usize {
        1
    }

    fn step(&self, s: &QuadState) -> Step<QuadState> {
        match s.first_fit(&SignedDigit::ALL) {
            Some(e) => Step::Write(e, s.write(e)),
            None => Step::Read(1, SignedDigit::ALL.map(|d| s.read(d))),
        }
    }

    /// Halvings of the range width still needed to fit a half interval.
    fn measure(&self, s: &QuadState) -> u64 {
        let (low, high) = s.range();
        let mut width = high - low;
        let mut m = 0;
        while width > ratio(1, 2) && m < 64 {
            width /= int(2);
            m += 1;
        }
        m
    }
}

/// Tree of `x -> u x^2 + v x + w`, which must map `I` into `I`.
pub fn quad_tree(u: Rational, v: Rational, w: Rational) -> Result<CTree> {
    quad_tree_with(u, v, w, Sharing::default())
}

pub fn quad_tree_with(u: Rational, v: Rational, w: Rational, sharing: Sharing) -> Result<CTree> {
    let start = QuadState::new(u, v, w)?;
    Ok(match sharing {
        Sharing::ByState => build_tree_shared(Quadratic, start),
        Sharing::None => build_tree(Quadratic, start),
    })
}

/// Tree of the logistic map `x -> a (1 - x^2) - 1` for `a` in `[0, 2]`.
pub fn logistic_tree(a: Rational) -> Result<CTree> {
    logistic_tree_with(a, Sharing::default())
}

pub fn logistic_tree_with(a: Rational, sharing: Sharing) -> Result<CTree> {
    if a.is_negative() || a > int(2) {
        return Err(CoreError::domain(format!(
            "logistic parameter {} outside [0, 2]",
            rational::render(&a)
        )));
    }
    quad_tree_with(-a.clone(), Rational::zero(), a - int(1), sharing)
}

/// `t` composed with itself `n` times, nested to the left:
/// `t^(k+1) = t^k o t`.
pub fn iterate_tree(t: &CTree, n: usize) -> Result<CTree> {
    if n == 0 {
        return Err(CoreError::domain("iteration count must be at least 1"));
    }
    if t.arity() != 1 {
        return Err(CoreError::Arity { expected: 1, got: t.arity() });
    }
    let mut acc = t.clone();
    for _ in 1..n {
        acc = compose(&acc, std::slice::from_ref(t))?;
    }
    Ok(acc)
}

/// A function `f: I -> I` given by approximations and a modulus of
/// uniform continuity.
///
/// Contract: whenever `delta <= modulus(eps)` and `[p - delta, p + delta]`
/// lies in `I`, every value of `f` on that interval is within `eps` of
/// `approx(p, delta)`. The builder trusts this.
pub trait ModulusEvaluator: Send + Sync + 'static {
    fn approx(&self, center: &Rational, radius: &Rational) -> Rational;
    fn modulus(&self, eps: &Rational) -> Rational;
}

/// State of the modulus system: the function `x -> 2^j f(c + r x) - t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModState {
    pub center: Rational,
    pub radius: Rational,
    pub scale: u32,
    pub shift: BigInt,
}

impl Hash for ModState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        hash_reduced(&self.center, state);
        hash_reduced(&self.radius, state);
        self.scale.hash(state);
        self.shift.hash(state);
    }
}

struct FromModulus<E>(E);

impl<E: ModulusEvaluator> DigitalSystem for FromModulus<E> {
    type State = ModState;

    fn arity(&self) -> usize {
        1
    }

    fn step(&self, s: &ModState) -> Step<ModState> {
        let eps = rational::pow2_rat(-(s.scale as i64) - 2);
        if s.radius <= self.0.modulus(&eps) {
            let q = self.0.approx(&s.center, &s.radius);
            let scaled = q * Rational::from_integer(rational::pow2(s.scale as u64))
                - Rational::from_integer(s.shift.clone());
            let d = select_digit(&scaled);
            Step::Write(
                d,
                ModState {
                    center: s.center.clone(),
                    radius: s.radius.clone(),
                    scale: s.scale + 1,
                    shift: (&s.shift << 1u32) + d.numeric(),
                },
            )
        } else {
            let half = &s.radius / int(2);
            Step::Read(
                1,
                SignedDigit::ALL.map(|d| ModState {
                    center: &s.center + &half * d.to_rational(),
                    radius: half.clone(),
                    scale: s.scale,
                    shift: s.shift.clone(),
                }),
            )
        }
    }
}

/// Tree of the function described by `ev`. Reads narrow the input interval
/// until the modulus certifies a digit; writes rescale the output.
pub fn tree_from_modulus(ev: impl ModulusEvaluator) -> CTree {
    let start = ModState {
        center: Rational::zero(),
        radius: Rational::one(),
        scale: 0,
        shift: BigInt::zero(),
    };
    build_tree_shared(FromModulus(ev), start)
}
