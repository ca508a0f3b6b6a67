//! Continuity trees: lazily unfolded, memoized trees of writing and reading
//! nodes.
//!
//! A tree is produced by a state machine (a [`DigitalSystem`]). Every tree
//! owns an arena of slots; a slot holds the state it was created from and,
//! once demanded, the expanded node. Children inside the same arena are
//! referenced by index, so a state machine that revisits a state (when
//! sharing is enabled) yields a finite cyclic graph without reference
//! cycles. Children may also point into other trees, which is how
//! composition and digit feeding reuse already built structure.
//!
//! Reading nodes carry a 1-based input index and three branches in the
//! order `N`, `Z`, `P`.

use std::cell::Cell;
use rustc_hash::FxHashMap as HashMap;
use std::fmt;
use std::hash::Hash;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use parking_lot::{Mutex, RwLock};

use crate::sdstream::SignedDigit;

/// One transition of a state machine, or one node of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Step<S> {
    /// Emit a digit and continue with the successor.
    Write(SignedDigit, S),
    /// Consume a digit of input `index` (1-based) and branch on it.
    Read(usize, [S; 3]),
}

impl<S> Step<S> {
    pub fn map<T>(self, mut f: impl FnMut(S) -> T) -> Step<T> {
        match self {
            Step::Write(d, s) => Step::Write(d, f(s)),
            Step::Read(i, [n, z, p]) => Step::Read(i, [f(n), f(z), f(p)]),
        }
    }

    pub fn is_write(&self) -> bool {
        matches!(self, Step::Write(..))
    }
}

/// An expanded tree node.
pub type Node = Step<CTree>;

/// A state machine whose states denote functions `I^n -> I`.
///
/// Each state either writes a digit `d` (the state's image lies in `I_d`,
/// the successor denotes `2f - d`) or reads input `i` (the three successors
/// denote `f` with `x_i` replaced by `(x_i + d) / 2`). Reads must decrease
/// some wellfounded measure until a write is enabled, otherwise the tree is
/// not productive.
pub trait DigitalSystem: Send + Sync + 'static {
    type State: Send + Sync + 'static;

    fn arity(&self) -> usize;

    fn step(&self, state: &Self::State) -> Step<Self::State>;

    /// Wellfoundedness witness for diagnostics; reads should decrease it.
    fn measure(&self, _state: &Self::State) -> u64 {
        0
    }
}

/// Successor of an internal transition: a state of the same machine or an
/// existing tree to splice in.
pub(crate) enum Child<S> {
    State(S),
    Tree(CTree),
}

pub(crate) trait Coalgebra: Send + Sync + 'static {
    type State: Send + Sync + 'static;
    fn arity(&self) -> usize;
    fn step(&self, state: &Self::State) -> Step<Child<Self::State>>;
}

struct Plain<D>(D);

impl<D: DigitalSystem> Coalgebra for Plain<D> {
    type State = D::State;

    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn step(&self, state: &D::State) -> Step<Child<D::State>> {
        self.0.step(state).map(Child::State)
    }
}

thread_local! {
    static THREAD_EXPANSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Nodes expanded by the calling thread so far, across all trees.
pub fn thread_expansions() -> u64 {
    THREAD_EXPANSIONS.with(Cell::get)
}

#[derive(Clone)]
enum Link {
    Local(u32),
    Foreign(CTree),
}

struct Slot<S> {
    state: S,
    node: OnceLock<Step<Link>>,
}

trait Interner<S>: Send + Sync + 'static {
    fn find(&self, state: &S) -> Option<u32>;
    fn remember(&self, state: &S, id: u32);
}

struct NoSharing;

impl<S> Interner<S> for NoSharing {
    fn find(&self, _: &S) -> Option<u32> {
        None
    }
    fn remember(&self, _: &S, _: u32) {}
}

struct ShareByState<S>(Mutex<HashMap<S, u32>>);

impl<S: Clone + Hash + Eq + Send + Sync + 'static> Interner<S> for ShareByState<S> {
    fn find(&self, state: &S) -> Option<u32> {
        self.0.lock().get(state).copied()
    }
    fn remember(&self, state: &S, id: u32) {
        self.0.lock().entry(state.clone()).or_insert(id);
    }
}

struct Arena<C: Coalgebra, I> {
    system: C,
    slots: RwLock<Vec<Arc<Slot<C::State>>>>,
    interner: I,
    expanded: AtomicU64,
}

impl<C: Coalgebra, I: Interner<C::State>> Arena<C, I> {
    fn alloc(&self, state: C::State) -> u32 {
        if let Some(id) = self.interner.find(&state) {
            return id;
        }
        let id = {
            let mut slots = self.slots.write();
            let id = u32::try_from(slots.len()).expect("tree arena exceeds u32 nodes");
            slots.push(Arc::new(Slot { state, node: OnceLock::new() }));
            id
        };
        let slots = self.slots.read();
        self.interner.remember(&slots[id as usize].state, id);
        id
    }
}

trait Forest: Send + Sync {
    fn arity(&self) -> usize;
    fn expand(&self, id: u32) -> Step<Link>;
    fn expanded(&self) -> u64;
    fn measure(&self, _id: u32) -> u64 {
        0
    }
}

impl<C: Coalgebra, I: Interner<C::State>> Forest for Arena<C, I> {
    fn arity(&self) -> usize {
        self.system.arity()
    }

    fn expand(&self, id: u32) -> Step<Link> {
        let slot = self.slots.read()[id as usize].clone();
        slot.node
            .get_or_init(|| {
                self.expanded.fetch_add(1, Ordering::Relaxed);
                THREAD_EXPANSIONS.with(|n| n.set(n.get() + 1));
                let step = self.system.step(&slot.state);
                if let Step::Read(i, _) = step {
                    assert!(
                        (1..=self.system.arity()).contains(&i),
                        "read index {i} out of range for arity {}",
                        self.system.arity()
                    );
                }
                step.map(|child| match child {
                    Child::State(s) => Link::Local(self.alloc(s)),
                    Child::Tree(t) => Link::Foreign(t),
                })
            })
            .clone()
    }

    fn expanded(&self) -> u64 {
        self.expanded.load(Ordering::Relaxed)
    }
}

struct Measured<D: DigitalSystem, I> {
    arena: Arena<Plain<D>, I>,
}

impl<D: DigitalSystem, I: Interner<D::State>> Forest for Measured<D, I> {
    fn arity(&self) -> usize {
        self.arena.arity()
    }
    fn expand(&self, id: u32) -> Step<Link> {
        self.arena.expand(id)
    }
    fn expanded(&self) -> u64 {
        self.arena.expanded()
    }
    fn measure(&self, id: u32) -> u64 {
        let slot = self.arena.slots.read()[id as usize].clone();
        self.arena.system.0.measure(&slot.state)
    }
}

/// Identity of a tree node, usable as a memo key. Only meaningful while the
/// tree it was taken from is alive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeKey(usize, u32);

/// A handle to a node of a lazily expanded continuity tree.
///
/// Cloning is cheap and clones share the expansion cache.
#[derive(Clone)]
pub struct CTree {
    forest: Arc<dyn Forest>,
    id: u32,
}

impl CTree {
    fn root_of(forest: Arc<dyn Forest>, id: u32) -> CTree {
        CTree { forest, id }
    }

    pub fn arity(&self) -> usize {
        self.forest.arity()
    }

    /// Expands this node (at most once) and returns it.
    pub fn node(&self) -> Node {
        self.forest.expand(self.id).map(|link| match link {
            Link::Local(id) => CTree { forest: self.forest.clone(), id },
            Link::Foreign(t) => t,
        })
    }

    /// Number of nodes expanded so far in the arena this node belongs to.
    pub fn expansion_count(&self) -> u64 {
        self.forest.expanded()
    }

    /// Diagnostic measure of the state behind this node, if the tree was
    /// built from a [`DigitalSystem`] that declares one.
    pub fn measure(&self) -> u64 {
        self.forest.measure(self.id)
    }

    pub fn key(&self) -> NodeKey {
        NodeKey(Arc::as_ptr(&self.forest) as *const () as usize, self.id)
    }

    /// Whether both handles denote the same node of the same arena.
    pub fn same_node(&self, other: &CTree) -> bool {
        self.key() == other.key()
    }

    /// The tree that writes `digit` forever.
    pub fn constant(arity: usize, digit: SignedDigit) -> CTree {
        build_tree_shared(Constant { arity, digit }, ())
    }
}

impl fmt::Debug for CTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CTree")
            .field("arity", &self.arity())
            .field("node", &self.id)
            .finish()
    }
}

struct Constant {
    arity: usize,
    digit: SignedDigit,
}

impl DigitalSystem for Constant {
    type State = ();
    fn arity(&self) -> usize {
        self.arity
    }
    fn step(&self, _: &()) -> Step<()> {
        Step::Write(self.digit, ())
    }
}

fn new_arena<C: Coalgebra, I: Interner<C::State>>(system: C, interner: I) -> Arena<C, I> {
    Arena {
        system,
        slots: RwLock::new(Vec::new()),
        interner,
        expanded: AtomicU64::new(0),
    }
}

/// Builds the tree of `start` without identifying equal states: every
/// position in the tree gets its own cache entry.
pub fn build_tree<D: DigitalSystem>(system: D, start: D::State) -> CTree {
    let forest = Arc::new(Measured { arena: new_arena(Plain(system), NoSharing) });
    let root = forest.arena.alloc(start);
    CTree::root_of(forest, root)
}

/// Builds the tree of `start`, sharing one cached node between all
/// occurrences of equal states. Machines with finitely many reachable
/// states produce finite graphs.
pub fn build_tree_shared<D>(system: D, start: D::State) -> CTree
where
    D: DigitalSystem,
    D::State: Clone + Hash + Eq,
{
    let forest = Arc::new(Measured {
        arena: new_arena(Plain(system), ShareByState(Mutex::new(HashMap::default()))),
    });
    let root = forest.arena.alloc(start);
    CTree::root_of(forest, root)
}

/// Like [`build_tree_shared`], for internal machines whose transitions may
/// splice in existing trees.
pub(crate) fn unfold<C>(system: C, start: C::State) -> CTree
where
    C: Coalgebra,
    C::State: Clone + Hash + Eq,
{
    let arena = Arc::new(new_arena(system, ShareByState(Mutex::new(HashMap::default()))));
    let root = arena.alloc(start);
    CTree::root_of(arena, root)
}

/// A tree handle compared and hashed by node identity.
#[derive(Clone)]
pub(crate) struct ByNode(pub CTree);

impl PartialEq for ByNode {
    fn eq(&self, other: &ByNode) -> bool {
        self.0.same_node(&other.0)
    }
}

impl Eq for ByNode {}

impl Hash for ByNode {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.key().hash(state);
    }
}
