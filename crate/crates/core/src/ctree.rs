//! Operations on continuity trees: running a tree on digit streams, feeding
//! a digit into one input, composition, and bounded structural analyses.

use rustc_hash::FxHashMap as HashMap;

use crate::error::{CoreError, Result};
use crate::rational::{self, Rational};
use crate::sdstream::{rational_stream, sigma_approx, DigitStream, SignedDigit};
use crate::tree::{unfold, ByNode, Child, Coalgebra, CTree, NodeKey, Step};

pub use crate::tree::{build_tree, build_tree_shared, thread_expansions, DigitalSystem, Node};

/// Runs `t` on `inputs`: at a writing node emit its digit, at a reading node
/// pop the head of the addressed input and follow that branch. The output is
/// itself a persistent stream.
pub fn apply(t: &CTree, inputs: &[DigitStream]) -> Result<DigitStream> {
    if inputs.len() != t.arity() {
        return Err(CoreError::Arity { expected: t.arity(), got: inputs.len() });
    }
    let gs = inputs.iter().map(|s| ByNode(s.as_tree().clone())).collect();
    let out = unfold(Compose { arity: 0 }, (ByNode(t.clone()), gs));
    DigitStream::from_tree(out)
}

/// `t` applied to the digit stream of `q`, read back to precision `2^-n`.
pub fn eval_at(t: &CTree, q: &Rational, n: usize) -> Result<Rational> {
    if t.arity() != 1 {
        return Err(CoreError::Arity { expected: 1, got: t.arity() });
    }
    let input = rational_stream(q)?;
    let out = apply(t, &[input])?;
    Ok(sigma_approx(&out, n))
}

/// Like [`eval_at`], also returning how many nodes of `t` (including the
/// trees it was composed from) this call expanded. The input and output
/// streams built for the call are not counted. Zero means the answer was
/// served entirely from the memo.
pub fn eval_at_counted(t: &CTree, q: &Rational, n: usize) -> Result<(Rational, u64)> {
    if t.arity() != 1 {
        return Err(CoreError::Arity { expected: 1, got: t.arity() });
    }
    let before = thread_expansions();
    let input = rational_stream(q)?;
    let out = apply(t, std::slice::from_ref(&input))?;
    let value = sigma_approx(&out, n);
    let fresh = input.as_tree().expansion_count() + out.as_tree().expansion_count();
    Ok((value, thread_expansions() - before - fresh))
}

/// The tree of `f` with input `i` pre-composed with `x -> (x + d) / 2`.
pub fn feed_digit(t: &CTree, i: usize, d: SignedDigit) -> Result<CTree> {
    check_index(i, t.arity())?;
    if let Step::Read(j, br) = t.node() {
        if j == i {
            return Ok(br[d.branch()].clone());
        }
    }
    Ok(unfold(Feed { arity: t.arity(), index: i, digit: d }, ByNode(t.clone())))
}

fn check_index(i: usize, arity: usize) -> Result<()> {
    if (1..=arity).contains(&i) {
        Ok(())
    } else {
        Err(CoreError::IndexOutOfRange { index: i, arity })
    }
}

struct Feed {
    arity: usize,
    index: usize,
    digit: SignedDigit,
}

impl Coalgebra for Feed {
    type State = ByNode;

    fn arity(&self) -> usize {
        self.arity
    }

    fn step(&self, t: &ByNode) -> Step<Child<ByNode>> {
        match t.0.node() {
            Step::Write(e, next) => Step::Write(e, Child::State(ByNode(next))),
            Step::Read(j, br) if j == self.index => {
                // the digit is consumed here; the rest of this path is br[d] as is
                br[self.digit.branch()].node().map(Child::Tree)
            }
            Step::Read(j, br) => Step::Read(j, br.map(|b| Child::State(ByNode(b)))),
        }
    }
}

/// The tree of `f o (g_1, ..., g_n)`. All `gs` must share one arity, which
/// becomes the arity of the result.
pub fn compose(f: &CTree, gs: &[CTree]) -> Result<CTree> {
    if gs.len() != f.arity() {
        return Err(CoreError::Arity { expected: f.arity(), got: gs.len() });
    }
    let arity = match gs.first() {
        Some(g) => g.arity(),
        None => 0,
    };
    if let Some(g) = gs.iter().find(|g| g.arity() != arity) {
        return Err(CoreError::Arity { expected: arity, got: g.arity() });
    }
    let gs = gs.iter().cloned().map(ByNode).collect();
    Ok(unfold(Compose { arity }, (ByNode(f.clone()), gs)))
}

struct Compose {
    arity: usize,
}

impl Coalgebra for Compose {
    type State = (ByNode, Vec<ByNode>);

    fn arity(&self) -> usize {
        self.arity
    }

    fn step(&self, state: &(ByNode, Vec<ByNode>)) -> Step<Child<(ByNode, Vec<ByNode>)>> {
        let (ByNode(mut f), gs) = state.clone();
        let mut gs: Vec<CTree> = gs.into_iter().map(|g| g.0).collect();
        loop {
            match f.node() {
                Step::Write(d, f_next) => {
                    let gs = gs.into_iter().map(ByNode).collect();
                    return Step::Write(d, Child::State((ByNode(f_next), gs)));
                }
                Step::Read(i, f_br) => match gs[i - 1].node() {
                    Step::Write(e, g_next) => {
                        f = f_br[e.branch()].clone();
                        gs[i - 1] = g_next;
                    }
                    Step::Read(j, g_br) => {
                        let branch = |e: SignedDigit| {
                            let gs_e = gs
                                .iter()
                                .enumerate()
                                .map(|(k, g)| {
                                    ByNode(if k == i - 1 {
                                        g_br[e.branch()].clone()
                                    } else {
                                        feed_digit(g, j, e).expect("index checked by the inner tree")
                                    })
                                })
                                .collect();
                            Child::State((ByNode(f.clone()), gs_e))
                        };
                        return Step::Read(j, SignedDigit::ALL.map(branch));
                    }
                },
            }
        }
    }
}

/// Number of nodes expanded so far in the arena backing `t`.
pub fn expansion_count(t: &CTree) -> u64 {
    t.expansion_count()
}

/// The largest number of reading nodes on any path of `t` before its
/// `k`-th writing node. Inputs that agree on that many digits give outputs
/// that agree on `k` digits. Diverges on non-productive trees.
pub fn modulus(t: &CTree, k: usize) -> usize {
    let mut memo = HashMap::default();
    reads_before(t, k, &mut memo)
}

fn reads_before(t: &CTree, k: usize, memo: &mut HashMap<(NodeKey, usize), usize>) -> usize {
    if k == 0 {
        return 0;
    }
    if let Some(&m) = memo.get(&(t.key(), k)) {
        return m;
    }
    let m = match t.node() {
        Step::Write(_, next) => reads_before(&next, k - 1, memo),
        Step::Read(_, br) => 1 + br.iter().map(|b| reads_before(b, k, memo)).max().unwrap_or(0),
    };
    memo.insert((t.key(), k), m);
    m
}

/// Whether, along every path, each of the first `k_writes` writing nodes is
/// reached after at most `max_reads` consecutive reading nodes. Exploration
/// stops at the bound, so this never diverges.
pub fn check_productive(t: &CTree, k_writes: usize, max_reads: usize) -> bool {
    let mut memo = HashMap::default();
    productive(t, k_writes, 0, max_reads, &mut memo)
}

fn productive(
    t: &CTree,
    writes: usize,
    run: usize,
    max_reads: usize,
    memo: &mut HashMap<(NodeKey, usize, usize), bool>,
) -> bool {
    if writes == 0 {
        return true;
    }
    let key = (t.key(), writes, run);
    if let Some(&ok) = memo.get(&key) {
        return ok;
    }
    let ok = match t.node() {
        Step::Write(_, next) => productive(&next, writes - 1, 0, max_reads, memo),
        Step::Read(..) if run == max_reads => false,
        Step::Read(_, br) => br.iter().all(|b| productive(b, writes, run + 1, max_reads, memo)),
    };
    memo.insert(key, ok);
    ok
}

/// `2^-n` as used for error bounds.
pub fn precision(n: usize) -> Rational {
    rational::pow2_rat(-(n as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::sdstream::{render_digits, N, P, Z};
    use num_traits::{Signed, Zero};

    struct Stuck;

    impl DigitalSystem for Stuck {
        type State = ();
        fn arity(&self) -> usize {
            1
        }
        fn step(&self, _: &()) -> Step<()> {
            Step::Read(1, [(), (), ()])
        }
    }

    /// Reads input 1 then writes the digit it read, forever.
    struct Echo;

    impl DigitalSystem for Echo {
        type State = Option<SignedDigit>;
        fn arity(&self) -> usize {
            1
        }
        fn step(&self, s: &Option<SignedDigit>) -> Step<Option<SignedDigit>> {
            match s {
                None => Step::Read(1, SignedDigit::ALL.map(Some)),
                Some(d) => Step::Write(*d, None),
            }
        }
    }

    fn echo() -> CTree {
        build_tree_shared(Echo, None)
    }

    #[test]
    fn constant_tree_ignores_input() {
        let t = CTree::constant(1, Z);
        let out = apply(&t, &[DigitStream::constant(P)]).unwrap();
        assert_eq!(render_digits(&out.prefix(8)), "ZZZZZZZZ");
        assert_eq!(eval_at(&t, &ratio(1, 3), 30).unwrap(), Rational::zero());
    }

    #[test]
    fn apply_checks_arity() {
        let t = CTree::constant(2, Z);
        assert!(matches!(
            apply(&t, &[DigitStream::constant(Z)]),
            Err(CoreError::Arity { expected: 2, got: 1 })
        ));
        assert!(eval_at(&t, &ratio(1, 2), 4).is_err());
        assert!(eval_at(&echo(), &ratio(3, 2), 4).is_err());
    }

    #[test]
    fn echo_is_identity() {
        let s = DigitStream::eventually_periodic(&[P, N], &[Z, P]);
        let out = apply(&echo(), std::slice::from_ref(&s)).unwrap();
        assert_eq!(out.prefix(30), s.prefix(30));
    }

    #[test]
    fn arity_zero_apply_is_the_stream() {
        let s = DigitStream::eventually_periodic(&[N, P], &[Z, N, P]);
        let out = apply(s.as_tree(), &[]).unwrap();
        assert_eq!(out.prefix(40), s.prefix(40));
    }

    #[test]
    fn feed_digit_on_read_root_returns_branch() {
        let t = echo();
        let Step::Read(1, br) = t.node() else { panic!() };
        for d in SignedDigit::ALL {
            assert!(feed_digit(&t, 1, d).unwrap().same_node(&br[d.branch()]));
        }
        assert!(matches!(feed_digit(&t, 2, Z), Err(CoreError::IndexOutOfRange { .. })));
        assert!(matches!(feed_digit(&t, 0, Z), Err(CoreError::IndexOutOfRange { .. })));
    }

    #[test]
    fn feed_digit_prepends_input_digit() {
        let fed = feed_digit(&echo(), 1, P).unwrap();
        let out = apply(&fed, &[DigitStream::constant(N)]).unwrap();
        assert_eq!(render_digits(&out.prefix(5)), "PNNNN");
        let c = feed_digit(&CTree::constant(1, N), 1, P).unwrap();
        assert_eq!(eval_at(&c, &ratio(1, 2), 10).unwrap(), rational::int(-1) + precision(10));
    }

    #[test]
    fn compose_echo_twice_is_echo() {
        let e = echo();
        let ee = compose(&e, std::slice::from_ref(&e)).unwrap();
        let s = DigitStream::eventually_periodic(&[N, Z, P, P], &[N]);
        let out = apply(&ee, std::slice::from_ref(&s)).unwrap();
        assert_eq!(out.prefix(20), s.prefix(20));
    }

    #[test]
    fn compose_checks_arity() {
        let e = echo();
        assert!(compose(&e, &[]).is_err());
        let two = CTree::constant(2, Z);
        assert!(compose(&CTree::constant(2, Z), &[e.clone(), two]).is_err());
    }

    #[test]
    fn compose_binary_over_unary() {
        // f(x, y) reads x then y and writes both, g = echo for both slots
        struct Pair;
        impl DigitalSystem for Pair {
            type State = (u8, Vec<SignedDigit>);
            fn arity(&self) -> usize {
                2
            }
            fn step(&self, (phase, seen): &Self::State) -> Step<Self::State> {
                match phase {
                    0 | 1 => Step::Read(
                        (*phase + 1) as usize,
                        SignedDigit::ALL.map(|d| {
                            let mut s = seen.clone();
                            s.push(d);
                            (phase + 1, s)
                        }),
                    ),
                    _ => {
                        let mut rest = seen.clone();
                        let d = rest.remove(0);
                        let phase = if rest.is_empty() { 0 } else { 2 };
                        Step::Write(d, (phase, rest))
                    }
                }
            }
        }
        let f = build_tree(Pair, (0, vec![]));
        let h = compose(&f, &[echo(), echo()]).unwrap();
        assert_eq!(h.arity(), 1);
        // both slots see the same input, so every digit arrives twice
        let out = apply(&h, &[DigitStream::eventually_periodic(&[P, N], &[Z])]).unwrap();
        assert_eq!(render_digits(&out.prefix(8)), "PPNNZZZZ");
    }

    #[test]
    fn modulus_of_constant_is_zero() {
        let t = CTree::constant(1, P);
        for k in 0..10 {
            assert_eq!(modulus(&t, k), 0);
        }
        assert_eq!(modulus(&echo(), 5), 5);
    }

    #[test]
    fn productivity_checks() {
        assert!(check_productive(&CTree::constant(1, Z), 10, 0));
        assert!(!check_productive(&build_tree_shared(Stuck, ()), 1, 100));
        assert!(check_productive(&echo(), 20, 1));
        assert!(!check_productive(&echo(), 20, 0));
        assert!(check_productive(&build_tree_shared(Stuck, ()), 0, 0));
    }

    #[test]
    fn precision_is_dyadic() {
        assert_eq!(precision(3), ratio(1, 8));
        assert!(precision(0).is_positive());
    }
}
