//! The weighted transducer data model.
//!
//! A [`Transducer`] is a set of states with per-state transition lists,
//! weighted initial states and weighted final states. Input and output
//! labels are non-negative integers with `0` reserved for epsilon on both
//! tapes. Weights live in a commutative [`Semiring`].
//!
//! Machines are mutable while being built; once construction is done a
//! shared reference is the frozen, read-only view and may be used from any
//! number of threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::semiring::Semiring;

/// Transition label; `0` is epsilon.
pub type Label = u32;

/// The epsilon label.
pub const EPSILON: Label = 0;

/// State identifier.
pub type StateId = usize;

/// A single weighted transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<W> {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: W,
    pub nextstate: StateId,
}

impl<W> Transition<W> {
    pub fn new(ilabel: Label, olabel: Label, weight: W, nextstate: StateId) -> Self {
        Transition { ilabel, olabel, weight, nextstate }
    }
}

/// Size statistics: state count, transition count, maximum out-degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransducerStats {
    pub num_states: usize,
    pub num_transitions: usize,
    pub max_out_degree: usize,
}

/// A weighted finite-state transducer over the semiring `W`.
#[derive(Debug, Clone)]
pub struct Transducer<W: Semiring> {
    states: Vec<Vec<Transition<W>>>,
    initials: BTreeMap<StateId, W>,
    finals: BTreeMap<StateId, W>,
    num_transitions: usize,
    max_out_degree: usize,
}

impl<W: Semiring> Default for Transducer<W> {
    fn default() -> Self {
        Self::new()
    }
}

impl<W: Semiring> Transducer<W> {
    pub fn new() -> Self {
        Transducer {
            states: Vec::new(),
            initials: BTreeMap::new(),
            finals: BTreeMap::new(),
            num_transitions: 0,
            max_out_degree: 0,
        }
    }

    /// Adds a fresh state and returns its id.
    pub fn add_state(&mut self) -> StateId {
        self.states.push(Vec::new());
        self.states.len() - 1
    }

    /// Adds `n` fresh states, returning the id of the first.
    pub fn add_states(&mut self, n: usize) -> StateId {
        let first = self.states.len();
        for _ in 0..n {
            self.states.push(Vec::new());
        }
        first
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    fn check_state(&self, q: StateId) -> Result<()> {
        if q < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(q))
        }
    }

    /// Appends a transition to `src`'s list. Zero weights are rejected, as
    /// are unknown source or target states.
    pub fn add_transition(&mut self, src: StateId, t: Transition<W>) -> Result<()> {
        self.check_state(src)?;
        self.check_state(t.nextstate)?;
        if t.weight.is_zero() {
            return Err(Error::ZeroWeight);
        }
        self.states[src].push(t);
        self.num_transitions += 1;
        self.max_out_degree = self.max_out_degree.max(self.states[src].len());
        Ok(())
    }

    /// Marks `q` initial with weight `w` (the λ map of the machine).
    pub fn set_initial(&mut self, q: StateId, w: W) -> Result<()> {
        self.check_state(q)?;
        if w.is_zero() {
            return Err(Error::ZeroWeight);
        }
        self.initials.insert(q, w);
        Ok(())
    }

    /// Marks `q` final with weight `w` (the ρ map).
    pub fn set_final(&mut self, q: StateId, w: W) -> Result<()> {
        self.check_state(q)?;
        if w.is_zero() {
            return Err(Error::ZeroWeight);
        }
        self.finals.insert(q, w);
        Ok(())
    }

    pub fn transitions(&self, q: StateId) -> &[Transition<W>] {
        &self.states[q]
    }

    pub fn initial_states(&self) -> impl Iterator<Item = (StateId, W)> + '_ {
        self.initials.iter().map(|(&q, &w)| (q, w))
    }

    pub fn final_states(&self) -> impl Iterator<Item = (StateId, W)> + '_ {
        self.finals.iter().map(|(&q, &w)| (q, w))
    }

    pub fn initial_weight(&self, q: StateId) -> Option<W> {
        self.initials.get(&q).copied()
    }

    pub fn final_weight(&self, q: StateId) -> Option<W> {
        self.finals.get(&q).copied()
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.contains_key(&q)
    }

    /// Incrementally maintained statistics; O(1).
    pub fn stats(&self) -> TransducerStats {
        TransducerStats {
            num_states: self.states.len(),
            num_transitions: self.num_transitions,
            max_out_degree: self.max_out_degree,
        }
    }

    /// Statistics recomputed by a full scan; equals [`Transducer::stats`]
    /// after any mutation sequence.
    pub fn recompute_stats(&self) -> TransducerStats {
        TransducerStats {
            num_states: self.states.len(),
            num_transitions: self.states.iter().map(Vec::len).sum(),
            max_out_degree: self.states.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    /// All non-epsilon labels appearing on either tape.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut set = BTreeSet::new();
        for ts in &self.states {
            for t in ts {
                if t.ilabel != EPSILON {
                    set.insert(t.ilabel);
                }
                if t.olabel != EPSILON {
                    set.insert(t.olabel);
                }
            }
        }
        set
    }

    /// The same machine with input and output labels swapped.
    pub fn inverted(&self) -> Transducer<W> {
        let mut inv = self.clone();
        for ts in &mut inv.states {
            for t in ts {
                std::mem::swap(&mut t.ilabel, &mut t.olabel);
            }
        }
        inv
    }

    /// True when the machine has no cycle consisting solely of
    /// epsilon:epsilon transitions. This is the sufficient condition used
    /// throughout the crate for path sums to be well-defined; the broader
    /// semantic condition (convergence of arbitrary epsilon-cycle sums) is
    /// deliberately not tested for.
    pub fn is_regulated(&self) -> bool {
        // Colors: 0 unvisited, 1 on stack, 2 done. Iterative DFS over the
        // subgraph of eps:eps transitions.
        let n = self.states.len();
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack: Vec<(StateId, usize)> = vec![(start, 0)];
            color[start] = 1;
            while let Some(&(q, idx)) = stack.last() {
                if idx >= self.states[q].len() {
                    color[q] = 2;
                    stack.pop();
                    continue;
                }
                stack.last_mut().unwrap().1 += 1;
                let t = &self.states[q][idx];
                if t.ilabel != EPSILON || t.olabel != EPSILON {
                    continue;
                }
                match color[t.nextstate] {
                    1 => return false,
                    0 => {
                        color[t.nextstate] = 1;
                        stack.push((t.nextstate, 0));
                    }
                    _ => {}
                }
            }
        }
        true
    }

    /// The weight the machine assigns to the string pair `(x, y)`: the
    /// ⊕-sum over all accepting paths labeled `(x, y)` of
    /// `λ(start) ⊗ path weight ⊗ ρ(end)`. Returns the semiring zero when
    /// no such path exists.
    ///
    /// Fails with [`Error::EpsilonCycle`] when the machine is not
    /// regulated, since the sum could then be infinite.
    pub fn evaluate(&self, x: &[Label], y: &[Label]) -> Result<W> {
        if !self.is_regulated() {
            return Err(Error::EpsilonCycle);
        }
        let mut memo: HashMap<(StateId, usize, usize), W> = HashMap::new();
        let mut total = W::zero();
        for (&q, &lambda) in &self.initials {
            let v = self.eval_rec(q, 0, 0, x, y, &mut memo);
            total = total.plus(&lambda.times(&v));
        }
        Ok(total)
    }

    fn eval_rec(
        &self,
        q: StateId,
        i: usize,
        j: usize,
        x: &[Label],
        y: &[Label],
        memo: &mut HashMap<(StateId, usize, usize), W>,
    ) -> W {
        if let Some(v) = memo.get(&(q, i, j)) {
            return *v;
        }
        let mut acc = if i == x.len() && j == y.len() {
            self.finals.get(&q).copied().unwrap_or_else(W::zero)
        } else {
            W::zero()
        };
        for t in &self.states[q] {
            let i2 = if t.ilabel == EPSILON {
                i
            } else if i < x.len() && x[i] == t.ilabel {
                i + 1
            } else {
                continue;
            };
            let j2 = if t.olabel == EPSILON {
                j
            } else if j < y.len() && y[j] == t.olabel {
                j + 1
            } else {
                continue;
            };
            let tail = self.eval_rec(t.nextstate, i2, j2, x, y, memo);
            acc = acc.plus(&t.weight.times(&tail));
        }
        memo.insert((q, i, j), acc);
        acc
    }
}

/// The identity transducer over labels `1..=alphabet_size`: one state,
/// initial and final with weight one, a `x:x` self-loop per symbol.
pub fn identity<W: Semiring>(alphabet_size: usize) -> Transducer<W> {
    assert!(alphabet_size >= 1);
    let mut t = Transducer::new();
    let q = t.add_state();
    t.set_initial(q, W::one()).unwrap();
    t.set_final(q, W::one()).unwrap();
    for a in 1..=alphabet_size as Label {
        t.add_transition(q, Transition::new(a, a, W::one(), q)).unwrap();
    }
    t
}

/// A chain acceptor for one string, weight one throughout.
pub fn linear_acceptor<W: Semiring>(labels: &[Label]) -> Transducer<W> {
    let mut t = Transducer::new();
    let mut q = t.add_state();
    t.set_initial(q, W::one()).unwrap();
    for &a in labels {
        assert_ne!(a, EPSILON, "linear_acceptor takes non-epsilon labels");
        let next = t.add_state();
        t.add_transition(q, Transition::new(a, a, W::one(), next)).unwrap();
        q = next;
    }
    t.set_final(q, W::one()).unwrap();
    t
}

/// A seeded random acyclic transducer.
///
/// States are topologically ordered. A backbone edge `i → i+1` keeps the
/// machine connected; every other forward pair gets an edge with
/// probability `density`. Each tape label is epsilon with probability
/// `eps_prob`, otherwise uniform over `1..=alphabet_size`. State 0 is
/// initial with weight one; the last state is always final, others with
/// probability 0.25. Identical arguments produce identical machines.
pub fn random_acyclic<W: Semiring>(
    num_states: usize,
    alphabet_size: usize,
    eps_prob: f64,
    density: f64,
    seed: u64,
) -> Transducer<W> {
    assert!(num_states >= 1 && alphabet_size >= 1);
    assert!((0.0..=1.0).contains(&eps_prob) && (0.0..=1.0).contains(&density));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Transducer::new();
    t.add_states(num_states);
    t.set_initial(0, W::one()).unwrap();
    let pick_label = |rng: &mut ChaCha8Rng| -> Label {
        if rng.gen_bool(eps_prob) {
            EPSILON
        } else {
            rng.gen_range(1..=alphabet_size as Label)
        }
    };
    for i in 0..num_states {
        for j in (i + 1)..num_states {
            if j != i + 1 && !rng.gen_bool(density) {
                continue;
            }
            let ilabel = pick_label(&mut rng);
            let olabel = pick_label(&mut rng);
            let weight = W::from_value(rng.gen_range(0.1..0.9));
            t.add_transition(i, Transition::new(ilabel, olabel, weight, j)).unwrap();
        }
    }
    for q in 1..num_states {
        if q == num_states - 1 || rng.gen_bool(0.25) {
            let w = W::from_value(rng.gen_range(0.1..0.9));
            t.set_final(q, w).unwrap();
        }
    }
    if num_states == 1 {
        t.set_final(0, W::one()).unwrap();
    }
    t
}

/// A seeded random acyclic epsilon-free acceptor with weight one on every
/// transition, for use as an unweighted language.
pub fn random_acyclic_acceptor<W: Semiring>(
    num_states: usize,
    alphabet_size: usize,
    density: f64,
    seed: u64,
) -> Transducer<W> {
    assert!(num_states >= 1 && alphabet_size >= 1);
    assert!((0.0..=1.0).contains(&density));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Transducer::new();
    t.add_states(num_states);
    t.set_initial(0, W::one()).unwrap();
    for i in 0..num_states {
        for j in (i + 1)..num_states {
            if j != i + 1 && !rng.gen_bool(density) {
                continue;
            }
            let a = rng.gen_range(1..=alphabet_size as Label);
            t.add_transition(i, Transition::new(a, a, W::one(), j)).unwrap();
        }
    }
    for q in 1..num_states {
        if q == num_states - 1 || rng.gen_bool(0.15) {
            t.set_final(q, W::one()).unwrap();
        }
    }
    if num_states == 1 {
        t.set_final(0, W::one()).unwrap();
    }
    t
}
