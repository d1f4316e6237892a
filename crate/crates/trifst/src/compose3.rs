//! 3-way composition: `T1 ∘ T2 ∘ T3` in a single pass.
//!
//! Composing three machines through an intermediate `T1 ∘ T2` can
//! materialize a large number of transitions that never match anything in
//! `T3`. The 3-way algorithm avoids the intermediate entirely: states are
//! triples `(q1, q2, q3)` and every emitted transition pairs a `T1`
//! transition with a matching `T2` transition *and* a matching `T3`
//! transition at once, so only matches that survive all the way through
//! are ever created.
//!
//! Matching is driven in one of two ways. The *lateral* strategy walks
//! the transition pairs of the outer machines and probes an index of the
//! middle machine keyed by label pairs; it costs about
//! `d(T1)·d(T3)` probes per state. The *central* strategy walks the middle
//! machine's transitions and probes label indexes of the outer machines,
//! costing about `d(T2)` probes per state. The *combined* strategy picks,
//! at every state, whichever is cheaper by comparing
//! `|E[q1]|·|E[q3]|` against `|E[q2]|`.
//!
//! Epsilon handling augments the state with a filter component so every
//! family of equivalent epsilon interleavings contributes exactly once:
//! either a pair of 2-way filter states `(f1, f2)` gating the two
//! interfaces separately, or a single state of the symmetric 3-way filter
//! over move triplets. Both modes produce evaluation-equivalent results.
//!
//! Expansion is on demand: [`LazyCompose3`] memoizes expanded states, and
//! the eager [`compose3`] is just a full expansion driven FIFO.

use std::collections::{HashMap, VecDeque};

use crate::compose::{build_label_index, LabelIndex, Side};
use crate::filters::{Move3, PairLabel, Step};
use crate::fst::{Label, StateId, Transducer, Transition, EPSILON};
use crate::semiring::Semiring;
use crate::{Error, Result};

/// Match-driving strategy. `Auto` resolves to `Combined`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Lateral,
    Central,
    Combined,
    Auto,
}

impl Strategy {
    fn resolved(self) -> Strategy {
        match self {
            Strategy::Auto => Strategy::Combined,
            s => s,
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lateral" => Ok(Strategy::Lateral),
            "central" => Ok(Strategy::Central),
            "combined" => Ok(Strategy::Combined),
            "auto" => Ok(Strategy::Auto),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// Epsilon bookkeeping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Two 2-way filter states, one per interface.
    Pair,
    /// One state of the symmetric 3-way filter.
    Single,
}

impl std::str::FromStr for FilterMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pair" => Ok(FilterMode::Pair),
            "single" => Ok(FilterMode::Single),
            other => Err(format!("unknown filter mode `{other}`")),
        }
    }
}

/// Instrumentation counters for one composition run.
///
/// `match_probes` counts match-driving steps: per expanded state, one per
/// outer-transition option pair under the lateral strategy (including the
/// hold option used for epsilon simulation) and one per middle-transition
/// option under the central strategy. `transitions_emitted` equals the
/// result's transition count after an eager run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComposeCounters {
    pub states_expanded: u64,
    pub match_probes: u64,
    pub transitions_emitted: u64,
    pub queue_peak: u64,
}

/// Filter component of a composed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EpsState {
    Pair(u8, u8),
    Single(u8),
}

/// One allowed move out of a composed state: the triplet, the indices of
/// the participating transitions in their source states' lists (`None`
/// for a machine that holds), and the emitted result transition.
#[derive(Debug, Clone)]
pub struct ExpandedMove<W> {
    pub mv: Move3,
    pub e1: Option<u32>,
    pub e2: Option<u32>,
    pub e3: Option<u32>,
    pub transition: Transition<W>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct StateKey {
    q1: StateId,
    q2: StateId,
    q3: StateId,
    eps: EpsState,
}

/// The hold/advance pattern of a move maps to one marked label pair per
/// interface; the pair filters gate those, the single filter gates the
/// triplet itself.
fn pair_labels(mv: Move3) -> (PairLabel, PairLabel) {
    use PairLabel::*;
    use Step::{Eps as E, Hold as H, Match as X};
    match (mv.0[0], mv.0[1], mv.0[2]) {
        (X, X, X) => (XX, XX),
        (X, X, H) => (XX, E2E2),
        (X, X, E) => (XX, E2E1),
        (H, X, X) => (E1E1, XX),
        (E, X, X) => (E2E1, XX),
        (E, E, E) => (E2E1, E2E1),
        (E, E, H) => (E2E1, E2E2),
        (E, H, E) => (E2E2, E0E1),
        (E, H, H) => (E2E2, E0E2),
        (H, E, E) => (E1E1, E2E1),
        (H, E, H) => (E1E1, E2E2),
        (H, H, E) => (E1E0, E1E1),
        _ => unreachable!("illegal move triplet"),
    }
}

/// Move gate: advances the filter component, or blocks the move.
#[derive(Debug, Clone)]
struct Gate {
    m1: crate::filters::FilterAutomaton<PairLabel>,
    m2: crate::filters::FilterAutomaton<PairLabel>,
    w: crate::filters::FilterAutomaton<Move3>,
}

impl Gate {
    fn new() -> Self {
        Gate {
            m1: crate::filters::filter_m1(),
            m2: crate::filters::filter_m2(),
            w: crate::filters::filter_w(),
        }
    }

    fn start(&self, mode: FilterMode) -> EpsState {
        match mode {
            FilterMode::Pair => EpsState::Pair(0, 0),
            FilterMode::Single => EpsState::Single(0),
        }
    }

    fn advance(&self, eps: EpsState, mv: Move3) -> Option<EpsState> {
        match eps {
            EpsState::Pair(f1, f2) => {
                let (l1, l2) = pair_labels(mv);
                let g1 = self.m1.next(f1 as u32, l1)?;
                let g2 = self.m2.next(f2 as u32, l2)?;
                Some(EpsState::Pair(g1 as u8, g2 as u8))
            }
            EpsState::Single(r) => Some(EpsState::Single(self.w.next(r as u32, mv)? as u8)),
        }
    }
}

/// On-demand 3-way composition.
///
/// States are discovered and numbered in expansion order; expanding a
/// state memoizes its full move list, so repeated expansion is free and
/// states never probed are never constructed.
pub struct LazyCompose3<'a, W: Semiring> {
    t1: &'a Transducer<W>,
    t2: &'a Transducer<W>,
    t3: &'a Transducer<W>,
    strategy: Strategy,
    filter_mode: FilterMode,
    gate: Gate,
    t2_pairs: Option<PairIndex>,
    t1_out: Option<LabelIndex>,
    t3_in: Option<LabelIndex>,
    keys: Vec<StateKey>,
    ids: HashMap<StateKey, StateId>,
    expanded: Vec<Option<Box<[ExpandedMove<W>]>>>,
    initials: Vec<(StateId, W)>,
    counters: ComposeCounters,
}

/// Per-state index of the middle machine keyed by (input, output) label
/// pairs; epsilon participates as an ordinary label.
#[derive(Debug)]
struct PairIndex {
    buckets: Vec<HashMap<(Label, Label), Vec<u32>>>,
}

impl PairIndex {
    fn build<W: Semiring>(t: &Transducer<W>) -> Self {
        let mut buckets = vec![HashMap::new(); t.num_states()];
        for q in 0..t.num_states() {
            for (i, tr) in t.transitions(q).iter().enumerate() {
                buckets[q]
                    .entry((tr.ilabel, tr.olabel))
                    .or_insert_with(Vec::new)
                    .push(i as u32);
            }
        }
        PairIndex { buckets }
    }

    fn lookup(&self, q: StateId, pair: (Label, Label)) -> &[u32] {
        self.buckets[q].get(&pair).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Creates a lazy 3-way composition handle.
pub fn lazy_compose3<'a, W: Semiring>(
    t1: &'a Transducer<W>,
    t2: &'a Transducer<W>,
    t3: &'a Transducer<W>,
    strategy: Strategy,
    filter_mode: FilterMode,
) -> LazyCompose3<'a, W> {
    LazyCompose3::new(t1, t2, t3, strategy, filter_mode)
}

/// Eager 3-way composition: fully expands the lazy construction FIFO and
/// materializes the result.
pub fn compose3<W: Semiring>(
    t1: &Transducer<W>,
    t2: &Transducer<W>,
    t3: &Transducer<W>,
    strategy: Strategy,
    filter_mode: FilterMode,
) -> (Transducer<W>, ComposeCounters) {
    LazyCompose3::new(t1, t2, t3, strategy, filter_mode).force()
}

impl<'a, W: Semiring> LazyCompose3<'a, W> {
    pub fn new(
        t1: &'a Transducer<W>,
        t2: &'a Transducer<W>,
        t3: &'a Transducer<W>,
        strategy: Strategy,
        filter_mode: FilterMode,
    ) -> Self {
        let strategy = strategy.resolved();
        let lateral = strategy != Strategy::Central;
        let central = strategy != Strategy::Lateral;
        let mut this = LazyCompose3 {
            t1,
            t2,
            t3,
            strategy,
            filter_mode,
            gate: Gate::new(),
            t2_pairs: lateral.then(|| PairIndex::build(t2)),
            t1_out: central.then(|| build_label_index(t1, Side::Output)),
            t3_in: central.then(|| build_label_index(t3, Side::Input)),
            keys: Vec::new(),
            ids: HashMap::new(),
            expanded: Vec::new(),
            initials: Vec::new(),
            counters: ComposeCounters::default(),
        };
        let start = this.gate.start(filter_mode);
        for (q1, l1) in t1.initial_states() {
            for (q2, l2) in t2.initial_states() {
                for (q3, l3) in t3.initial_states() {
                    let id = this.intern(StateKey { q1, q2, q3, eps: start });
                    this.initials.push((id, l1.times(&l2).times(&l3)));
                }
            }
        }
        this
    }

    /// Initial states of the result with their weights.
    pub fn initial_states(&self) -> &[(StateId, W)] {
        &self.initials
    }

    /// Final weight of a discovered state, without expanding anything.
    pub fn final_weight(&self, id: StateId) -> Option<W> {
        let k = &self.keys[id];
        match (
            self.t1.final_weight(k.q1),
            self.t2.final_weight(k.q2),
            self.t3.final_weight(k.q3),
        ) {
            (Some(r1), Some(r2), Some(r3)) => Some(r1.times(&r2).times(&r3)),
            _ => None,
        }
    }

    /// Number of states discovered so far.
    pub fn num_states_discovered(&self) -> usize {
        self.keys.len()
    }

    /// The machine-state triple behind a discovered state.
    pub fn state_triple(&self, id: StateId) -> (StateId, StateId, StateId) {
        let k = &self.keys[id];
        (k.q1, k.q2, k.q3)
    }

    pub fn counters(&self) -> ComposeCounters {
        self.counters
    }

    pub fn filter_mode(&self) -> FilterMode {
        self.filter_mode
    }

    fn intern(&mut self, key: StateKey) -> StateId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.keys.len();
        self.keys.push(key);
        self.ids.insert(key, id);
        self.expanded.push(None);
        id
    }

    /// Expands a state (memoized): every filter-allowed combination of
    /// advancing or holding the three machines, with the emitted result
    /// transition. The move list is sorted by participating transition
    /// indices, so all strategies produce identical output.
    pub fn expand_state(&mut self, id: StateId) -> &[ExpandedMove<W>] {
        assert!(id < self.keys.len(), "state {id} not discovered yet");
        if self.expanded[id].is_none() {
            let moves = self.compute_moves(id);
            self.counters.states_expanded += 1;
            self.counters.transitions_emitted += moves.len() as u64;
            self.expanded[id] = Some(moves.into_boxed_slice());
        }
        self.expanded[id].as_deref().unwrap()
    }

    fn lateral_at(&self, key: &StateKey) -> bool {
        match self.strategy {
            Strategy::Lateral => true,
            Strategy::Central => false,
            _ => {
                self.t1.transitions(key.q1).len() * self.t3.transitions(key.q3).len()
                    <= self.t2.transitions(key.q2).len()
            }
        }
    }

    fn compute_moves(&mut self, id: StateId) -> Vec<ExpandedMove<W>> {
        let key = self.keys[id];
        let mut raw: Vec<(Move3, Option<u32>, Option<u32>, Option<u32>)> = Vec::new();
        if self.lateral_at(&key) {
            self.candidates_lateral(&key, &mut raw);
        } else {
            self.candidates_central(&key, &mut raw);
        }

        // Sort before interning so target discovery order (and hence
        // state numbering) is independent of the strategy that produced
        // the candidates.
        raw.sort_by_key(|&(mv, e1, e2, e3)| {
            (
                e1.map_or(u32::MAX, |i| i),
                e2.map_or(u32::MAX, |i| i),
                e3.map_or(u32::MAX, |i| i),
                mv,
            )
        });
        let mut out = Vec::with_capacity(raw.len());
        for (mv, i1, i2, i3) in raw {
            let Some(eps) = self.gate.advance(key.eps, mv) else {
                continue;
            };
            let e1 = i1.map(|i| self.t1.transitions(key.q1)[i as usize]);
            let e2 = i2.map(|i| self.t2.transitions(key.q2)[i as usize]);
            let e3 = i3.map(|i| self.t3.transitions(key.q3)[i as usize]);
            let next = StateKey {
                q1: e1.map_or(key.q1, |e| e.nextstate),
                q2: e2.map_or(key.q2, |e| e.nextstate),
                q3: e3.map_or(key.q3, |e| e.nextstate),
                eps,
            };
            let target = self.intern(next);
            let mut w = e1.map_or_else(W::one, |e| e.weight);
            if let Some(e) = e2 {
                w = w.times(&e.weight);
            }
            if let Some(e) = e3 {
                w = w.times(&e.weight);
            }
            out.push(ExpandedMove {
                mv,
                e1: i1,
                e2: i2,
                e3: i3,
                transition: Transition::new(
                    e1.map_or(EPSILON, |e| e.ilabel),
                    e3.map_or(EPSILON, |e| e.olabel),
                    w,
                    target,
                ),
            });
        }
        out
    }

    /// Lateral match driving: one probe per pair of outer options (each
    /// outer transition, plus holding), consulting the middle machine's
    /// pair index.
    fn candidates_lateral(
        &mut self,
        key: &StateKey,
        raw: &mut Vec<(Move3, Option<u32>, Option<u32>, Option<u32>)>,
    ) {
        use Step::{Eps as E, Hold as H, Match as X};
        let pairs = self.t2_pairs.as_ref().expect("lateral index");
        let e1s = self.t1.transitions(key.q1);
        let e3s = self.t3.transitions(key.q3);
        for i1 in (0..e1s.len()).map(Some).chain([None]) {
            for i3 in (0..e3s.len()).map(Some).chain([None]) {
                self.counters.match_probes += 1;
                let u1 = i1.map(|i| i as u32);
                let u3 = i3.map(|i| i as u32);
                let o1 = i1.map(|i| e1s[i].olabel);
                let i3l = i3.map(|i| e3s[i].ilabel);
                let push2 = |mv: Move3, pair: (Label, Label), a1: Option<u32>, a3: Option<u32>, raw: &mut Vec<(Move3, Option<u32>, Option<u32>, Option<u32>)>| {
                    for &i2 in pairs.lookup(key.q2, pair) {
                        raw.push((mv, a1, Some(i2), a3));
                    }
                };
                match (o1, i3l) {
                    (Some(a), Some(b)) if a != EPSILON && b != EPSILON => {
                        push2(Move3::new(X, X, X), (a, b), u1, u3, raw);
                    }
                    (Some(a), Some(_)) if a != EPSILON => {
                        push2(Move3::new(X, X, E), (a, EPSILON), u1, u3, raw);
                    }
                    (Some(a), None) if a != EPSILON => {
                        push2(Move3::new(X, X, H), (a, EPSILON), u1, None, raw);
                    }
                    (Some(_), Some(b)) if b != EPSILON => {
                        push2(Move3::new(E, X, X), (EPSILON, b), u1, u3, raw);
                    }
                    (Some(_), Some(_)) => {
                        push2(Move3::new(E, E, E), (EPSILON, EPSILON), u1, u3, raw);
                        raw.push((Move3::new(E, H, E), u1, None, u3));
                    }
                    (Some(_), None) => {
                        push2(Move3::new(E, E, H), (EPSILON, EPSILON), u1, None, raw);
                        raw.push((Move3::new(E, H, H), u1, None, None));
                    }
                    (None, Some(b)) if b != EPSILON => {
                        push2(Move3::new(H, X, X), (EPSILON, b), None, u3, raw);
                    }
                    (None, Some(_)) => {
                        push2(Move3::new(H, E, E), (EPSILON, EPSILON), None, u3, raw);
                        raw.push((Move3::new(H, H, E), None, None, u3));
                    }
                    (None, None) => {
                        push2(Move3::new(H, E, H), (EPSILON, EPSILON), None, None, raw);
                    }
                }
            }
        }
    }

    /// Central match driving: one probe per middle option (each middle
    /// transition, plus holding), consulting the outer machines' label
    /// indexes.
    fn candidates_central(
        &mut self,
        key: &StateKey,
        raw: &mut Vec<(Move3, Option<u32>, Option<u32>, Option<u32>)>,
    ) {
        use Step::{Eps as E, Hold as H, Match as X};
        let t1_out = self.t1_out.as_ref().expect("central index");
        let t3_in = self.t3_in.as_ref().expect("central index");
        let e2s = self.t2.transitions(key.q2);
        let eps_out1 = t1_out.lookup(key.q1, EPSILON);
        let eps_in3 = t3_in.lookup(key.q3, EPSILON);
        for i2 in (0..e2s.len()).map(Some).chain([None]) {
            self.counters.match_probes += 1;
            match i2 {
                Some(i) => {
                    let e2 = &e2s[i];
                    let i2 = Some(i as u32);
                    match (e2.ilabel, e2.olabel) {
                        (a, b) if a != EPSILON && b != EPSILON => {
                            for &i1 in t1_out.lookup(key.q1, a) {
                                for &i3 in t3_in.lookup(key.q3, b) {
                                    raw.push((Move3::new(X, X, X), Some(i1), i2, Some(i3)));
                                }
                            }
                        }
                        (a, _) if a != EPSILON => {
                            for &i1 in t1_out.lookup(key.q1, a) {
                                raw.push((Move3::new(X, X, H), Some(i1), i2, None));
                                for &i3 in eps_in3 {
                                    raw.push((Move3::new(X, X, E), Some(i1), i2, Some(i3)));
                                }
                            }
                        }
                        (_, b) if b != EPSILON => {
                            for &i3 in t3_in.lookup(key.q3, b) {
                                raw.push((Move3::new(H, X, X), None, i2, Some(i3)));
                                for &i1 in eps_out1 {
                                    raw.push((Move3::new(E, X, X), Some(i1), i2, Some(i3)));
                                }
                            }
                        }
                        _ => {
                            raw.push((Move3::new(H, E, H), None, i2, None));
                            for &i3 in eps_in3 {
                                raw.push((Move3::new(H, E, E), None, i2, Some(i3)));
                            }
                            for &i1 in eps_out1 {
                                raw.push((Move3::new(E, E, H), Some(i1), i2, None));
                                for &i3 in eps_in3 {
                                    raw.push((Move3::new(E, E, E), Some(i1), i2, Some(i3)));
                                }
                            }
                        }
                    }
                }
                None => {
                    for &i1 in eps_out1 {
                        raw.push((Move3::new(E, H, H), Some(i1), None, None));
                        for &i3 in eps_in3 {
                            raw.push((Move3::new(E, H, E), Some(i1), None, Some(i3)));
                        }
                    }
                    for &i3 in eps_in3 {
                        raw.push((Move3::new(H, H, E), None, None, Some(i3)));
                    }
                }
            }
        }
    }

    /// Fully expands every reachable state (FIFO order) and materializes
    /// the result transducer.
    pub fn force(mut self) -> (Transducer<W>, ComposeCounters) {
        let mut processed = 0;
        while processed < self.keys.len() {
            self.expand_state(processed);
            processed += 1;
            let pending = (self.keys.len() - processed) as u64;
            self.counters.queue_peak = self.counters.queue_peak.max(pending);
        }
        let mut t = Transducer::new();
        t.add_states(self.keys.len());
        for &(id, w) in &self.initials {
            t.set_initial(id, w).unwrap();
        }
        for id in 0..self.keys.len() {
            if let Some(rho) = self.final_weight(id) {
                t.set_final(id, rho).unwrap();
            }
            for m in self.expanded[id].as_deref().unwrap() {
                t.add_transition(id, m.transition).unwrap();
            }
        }
        (t, self.counters)
    }
}

/// Direct transcription of the epsilon-free 3-way composition: a FIFO
/// queue of state triples; per popped triple the initial and final
/// weights are the componentwise products, and every `(e1, e3)` pair is
/// matched against the middle transitions with `i[e2] = o[e1]` and
/// `o[e2] = i[e3]`, emitting `(i[e1], o[e3], w1⊗w2⊗w3)`.
///
/// Fails if any epsilon occurs on `T1`'s output tape, either of `T2`'s
/// tapes, or `T3`'s input tape; those need [`compose3`].
pub fn compose3_eps_free<W: Semiring>(
    t1: &Transducer<W>,
    t2: &Transducer<W>,
    t3: &Transducer<W>,
    strategy: Strategy,
) -> Result<(Transducer<W>, ComposeCounters)> {
    let eps_on = |t: &Transducer<W>, side: Side| {
        (0..t.num_states()).any(|q| {
            t.transitions(q).iter().any(|tr| match side {
                Side::Input => tr.ilabel == EPSILON,
                Side::Output => tr.olabel == EPSILON,
            })
        })
    };
    if eps_on(t1, Side::Output)
        || eps_on(t2, Side::Input)
        || eps_on(t2, Side::Output)
        || eps_on(t3, Side::Input)
    {
        return Err(Error::EpsilonInEpsFree);
    }
    let strategy = strategy.resolved();

    let t2_pairs = PairIndex::build(t2);
    let t1_out = build_label_index(t1, Side::Output);
    let t3_in = build_label_index(t3, Side::Input);

    let mut counters = ComposeCounters::default();
    let mut result = Transducer::new();
    let mut ids: HashMap<(StateId, StateId, StateId), StateId> = HashMap::new();
    let mut keys: Vec<(StateId, StateId, StateId)> = Vec::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();

    macro_rules! intern {
        ($key:expr) => {{
            let key = $key;
            match ids.get(&key) {
                Some(&id) => id,
                None => {
                    let id = result.add_state();
                    ids.insert(key, id);
                    keys.push(key);
                    queue.push_back(id);
                    id
                }
            }
        }};
    }

    for (q1, l1) in t1.initial_states() {
        for (q2, l2) in t2.initial_states() {
            for (q3, l3) in t3.initial_states() {
                let id = intern!((q1, q2, q3));
                result.set_initial(id, l1.times(&l2).times(&l3)).unwrap();
            }
        }
    }

    while let Some(id) = queue.pop_front() {
        counters.queue_peak = counters.queue_peak.max(queue.len() as u64 + 1);
        counters.states_expanded += 1;
        let (q1, q2, q3) = keys[id];
        if let (Some(r1), Some(r2), Some(r3)) =
            (t1.final_weight(q1), t2.final_weight(q2), t3.final_weight(q3))
        {
            result.set_final(id, r1.times(&r2).times(&r3)).unwrap();
        }

        let e1s = t1.transitions(q1);
        let e2s = t2.transitions(q2);
        let e3s = t3.transitions(q3);
        let lateral = match strategy {
            Strategy::Lateral => true,
            Strategy::Central => false,
            _ => e1s.len() * e3s.len() <= e2s.len(),
        };

        let mut matches: Vec<(u32, u32, u32)> = Vec::new();
        if lateral {
            for (i1, e1) in e1s.iter().enumerate() {
                for (i3, e3) in e3s.iter().enumerate() {
                    counters.match_probes += 1;
                    for &i2 in t2_pairs.lookup(q2, (e1.olabel, e3.ilabel)) {
                        matches.push((i1 as u32, i2, i3 as u32));
                    }
                }
            }
        } else {
            for (i2, e2) in e2s.iter().enumerate() {
                counters.match_probes += 1;
                for &i1 in t1_out.lookup(q1, e2.ilabel) {
                    for &i3 in t3_in.lookup(q3, e2.olabel) {
                        matches.push((i1, i2 as u32, i3));
                    }
                }
            }
        }
        matches.sort_unstable();
        for (i1, i2, i3) in matches {
            let (e1, e2, e3) = (&e1s[i1 as usize], &e2s[i2 as usize], &e3s[i3 as usize]);
            let target = intern!((e1.nextstate, e2.nextstate, e3.nextstate));
            let w = e1.weight.times(&e2.weight).times(&e3.weight);
            result
                .add_transition(id, Transition::new(e1.ilabel, e3.olabel, w, target))
                .unwrap();
            counters.transitions_emitted += 1;
        }
    }

    Ok((result, counters))
}
