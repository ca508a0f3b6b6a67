#![allow(dead_code)]

use rand::Rng;
use sdreal_core::digitsys::{LinState, QuadState};
use sdreal_core::oracle::{expand, FuncExpr};
use sdreal_core::rational::{int, ratio, Rational};

/// Largest composite degree generated, so that exact evaluation stays cheap.
pub const MAX_DEGREE: u128 = 1 << 12;

/// `-1, -3/4, ..., 1`
pub fn grid() -> Vec<Rational> {
    (-4..=4).map(|k| ratio(k, 4)).collect()
}

fn coeff(rng: &mut impl Rng, den: i64) -> Rational {
    ratio(rng.gen_range(-den..=den), den)
}

pub fn random_atom(rng: &mut impl Rng) -> FuncExpr {
    loop {
        let e = match rng.gen_range(0..3) {
            0 => FuncExpr::Lin(coeff(rng, 8), coeff(rng, 8)),
            1 => FuncExpr::Quad(coeff(rng, 8), coeff(rng, 8), coeff(rng, 8)),
            _ => FuncExpr::Logistic(ratio(rng.gen_range(0..=8), 4)),
        };
        if e.validate().is_ok() {
            return e;
        }
    }
}

/// A random valid expression of nesting depth at most `depth`.
pub fn random_expr(rng: &mut impl Rng, depth: usize) -> FuncExpr {
    loop {
        let e = random_expr_unbounded(rng, depth);
        if work_degree(&e) <= MAX_DEGREE {
            return e;
        }
    }
}

/// Degree as if no atom were constant; bounds the size of exact
/// intermediate values even when an outer constant hides inner growth.
pub fn work_degree(e: &FuncExpr) -> u128 {
    match e {
        FuncExpr::Comp(f, g) => work_degree(f).saturating_mul(work_degree(g)),
        FuncExpr::Pow(f, n) => {
            let d = work_degree(f);
            (0..*n).fold(1u128, |acc, _| acc.saturating_mul(d))
        }
        atom => atom.degree().max(1),
    }
}

fn random_expr_unbounded(rng: &mut impl Rng, depth: usize) -> FuncExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_atom(rng);
    }
    if rng.gen_bool(0.5) {
        FuncExpr::comp(random_expr_unbounded(rng, depth - 1), random_expr_unbounded(rng, depth - 1))
    } else {
        FuncExpr::Pow(Box::new(random_expr_unbounded(rng, depth - 1)), rng.gen_range(1..=6))
    }
}

/// A random expression whose derivative is bounded by `max_slope` on `I`.
pub fn random_gentle_expr(rng: &mut impl Rng, depth: usize, max_slope: i64) -> FuncExpr {
    loop {
        let e = random_expr(rng, depth);
        if let Ok(p) = expand(&e) {
            if p.lipschitz_bound() <= int(max_slope) {
                return e;
            }
        }
    }
}

pub fn lin_state(rng: &mut impl Rng, n: usize) -> LinState {
    loop {
        let u = (0..n).map(|_| coeff(rng, 16)).collect();
        if let Ok(s) = LinState::new(u, coeff(rng, 16)) {
            return s;
        }
    }
}

pub fn quad_state(rng: &mut impl Rng) -> QuadState {
    loop {
        if let Ok(s) = QuadState::new(coeff(rng, 8), coeff(rng, 8), coeff(rng, 8)) {
            return s;
        }
    }
}

pub fn in_unit(q: &Rational) -> bool {
    *q >= int(-1) && *q <= int(1)
}
