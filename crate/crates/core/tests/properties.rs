//! Randomized properties of streams, trees and the exact oracle.

mod support;

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdreal_core::ctree::{apply, compose, eval_at, modulus, precision};
use sdreal_core::digitsys::QuadState;
use sdreal_core::dsl::{parse, to_tree};
use sdreal_core::oracle::{eval_exact, FuncExpr};
use sdreal_core::rational::{int, ratio, Rational};
use sdreal_core::sdstream::{parse_digits, rational_stream, render_digits, sigma_approx, DigitStream};
use sdreal_core::SignedDigit;

fn digit() -> impl Strategy<Value = SignedDigit> {
    prop::sample::select(SignedDigit::ALL.to_vec())
}

fn point() -> impl Strategy<Value = Rational> {
    (-64i64..=64).prop_map(|k| ratio(k, 64))
}

fn rng() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

fn close(a: &Rational, b: &Rational, n: usize) -> bool {
    (a - b).abs() <= precision(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn digit_text_round_trips(ds in prop::collection::vec(digit(), 0..40)) {
        prop_assert_eq!(parse_digits(&render_digits(&ds)), Some(ds));
    }

    #[test]
    fn prefixes_extend(prefix in prop::collection::vec(digit(), 0..8),
                       cycle in prop::collection::vec(digit(), 1..5),
                       n in 0usize..30, extra in 0usize..30) {
        let s = DigitStream::eventually_periodic(&prefix, &cycle);
        let short = s.prefix(n);
        let long = s.prefix(n + extra);
        prop_assert_eq!(&long[..n], &short[..]);
    }

    #[test]
    fn partial_sums_converge(prefix in prop::collection::vec(digit(), 0..8),
                             cycle in prop::collection::vec(digit(), 1..5),
                             n in 1usize..40) {
        let s = DigitStream::eventually_periodic(&prefix, &cycle);
        let a = sigma_approx(&s, n);
        let b = sigma_approx(&s, n + 20);
        prop_assert!(close(&a, &b, n));
    }

    #[test]
    fn rational_round_trip(q in point(), n in 1usize..80) {
        let s = rational_stream(&q).unwrap();
        prop_assert!(close(&sigma_approx(&s, n), &q, n));
    }

    #[test]
    fn trees_agree_with_oracle(mut rng in rng(), x in point()) {
        let e = support::random_expr(&mut rng, 2);
        let t = to_tree(&e).unwrap();
        let got = eval_at(&t, &x, 30).unwrap();
        let want = eval_exact(&e, &x).unwrap();
        prop_assert!(close(&got, &want, 30), "{} at {}", e, x);
    }

    #[test]
    fn composition_is_associative(mut rng in rng(), x in point()) {
        let es: Vec<FuncExpr> = (0..3).map(|_| support::random_expr(&mut rng, 1)).collect();
        let ts: Vec<_> = es.iter().map(|e| to_tree(e).unwrap()).collect();
        let one = |t: &sdreal_core::CTree| std::slice::from_ref(t).to_vec();
        let left = compose(&compose(&ts[0], &one(&ts[1])).unwrap(), &one(&ts[2])).unwrap();
        let right = compose(&ts[0], &one(&compose(&ts[1], &one(&ts[2])).unwrap())).unwrap();
        let want = eval_exact(&es[0], &eval_exact(&es[1], &eval_exact(&es[2], &x).unwrap()).unwrap()).unwrap();
        for t in [&left, &right] {
            prop_assert!(close(&eval_at(t, &x, 24).unwrap(), &want, 24));
        }
    }

    #[test]
    fn display_round_trips(mut rng in rng()) {
        let e = support::random_expr(&mut rng, 3);
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn modulus_bounds_dependence(mut rng in rng(), k in 1usize..8,
                                 tails in prop::collection::vec(digit(), 6)) {
        let e = support::random_atom(&mut rng);
        let t = to_tree(&e).unwrap();
        let m = modulus(&t, k);
        let prefix: Vec<_> = (0..m).map(|i| tails[i % tails.len()]).collect();
        let outs: Vec<_> = SignedDigit::ALL
            .iter()
            .zip([&tails[..2], &tails[2..4], &tails[4..]])
            .map(|(&d, tail)| {
                let mut input = prefix.clone();
                input.push(d);
                apply(&t, &[DigitStream::eventually_periodic(&input, tail)]).unwrap().prefix(k)
            })
            .collect();
        prop_assert!(outs.iter().all(|o| *o == outs[0]), "{} k = {} m = {}", e, k, m);
    }

    #[test]
    fn quadratic_steps_stay_in_range(mut rng in rng(), path in prop::collection::vec(digit(), 0..24)) {
        let mut s: QuadState = support::quad_state(&mut rng);
        for d in path {
            let (lo, hi) = s.range();
            prop_assert!(support::in_unit(&lo) && support::in_unit(&hi));
            // a node writes when some digit fits, otherwise it reads
            s = match SignedDigit::ALL.into_iter().find(|&e| s.test(e)) {
                Some(e) => s.write(e),
                None => s.read(d),
            };
        }
        let (lo, hi) = s.range();
        prop_assert!(support::in_unit(&lo) && support::in_unit(&hi));
    }

    #[test]
    fn quadratic_read_restricts(mut rng in rng(), d in digit(), x in point()) {
        let s = support::quad_state(&mut rng);
        let arg = (&x + d.to_rational()) / int(2);
        prop_assert_eq!(s.read(d).eval(&x), s.eval(&arg));
    }

    #[test]
    fn linear_writes_are_sound(mut rng in rng(), n in 1usize..4) {
        let s = support::lin_state(&mut rng, n);
        let (lo, hi) = s.image();
        for e in SignedDigit::ALL {
            if e.interval_contains(&lo) && e.interval_contains(&hi) {
                let w = s.write(e);
                prop_assert!(w.norm() + w.v.abs() <= int(1));
            }
        }
    }

    #[test]
    fn linear_reads_contract(mut rng in rng(), n in 1usize..4, d in digit()) {
        let s = support::lin_state(&mut rng, n);
        let i = s.read_index();
        let r = s.read(i, d);
        prop_assert_eq!(r.norm(), s.norm() - s.u[i - 1].abs() / int(2));
        let ((lo, hi), (rlo, rhi)) = (s.image(), r.image());
        prop_assert!(lo <= rlo && rhi <= hi);
        if !s.u[i - 1].is_zero() {
            prop_assert!(r.norm() < s.norm());
        }
    }
}
