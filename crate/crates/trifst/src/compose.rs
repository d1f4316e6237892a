//! Pairwise weighted composition.
//!
//! `compose(T1, T2)` matches the output tape of `T1` against the input
//! tape of `T2`: a `T1` transition `(q1, a, b, w1, q1')` and a `T2`
//! transition `(q2, b, c, w2, q2')` combine into
//! `((q1,q2), a, c, w1⊗w2, (q1',q2'))`. Epsilons on the matched tapes are
//! handled by simulating marked self-loops and gating the moves with the
//! 2-way filter, so each set of equivalent epsilon interleavings
//! contributes exactly once.
//!
//! Matching uses a hash index on the machine with the larger maximum
//! out-degree, giving expected `O(1)` bucket lookups after an expected
//! linear pre-processing pass. (A perfect hash would make the same bound
//! worst-case; the expected-case variant is kept for simplicity.)

use std::collections::{HashMap, VecDeque};

use crate::compose3::ComposeCounters;
use crate::filters::{filter_m, PairLabel};
use crate::fst::{Label, StateId, Transducer, Transition, EPSILON};
use crate::semiring::Semiring;

/// Which tape of a machine an index covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Input,
    Output,
}

/// Per-state hash buckets from a label to the transitions carrying it on
/// the chosen side. Lookup of an absent label yields an empty slice.
#[derive(Debug, Clone)]
pub struct LabelIndex {
    side: Side,
    buckets: Vec<HashMap<Label, Vec<u32>>>,
}

/// Builds a [`LabelIndex`] in one pass over the transitions.
pub fn build_label_index<W: Semiring>(t: &Transducer<W>, side: Side) -> LabelIndex {
    let mut buckets = vec![HashMap::new(); t.num_states()];
    for q in 0..t.num_states() {
        for (i, tr) in t.transitions(q).iter().enumerate() {
            let label = match side {
                Side::Input => tr.ilabel,
                Side::Output => tr.olabel,
            };
            buckets[q]
                .entry(label)
                .or_insert_with(Vec::new)
                .push(i as u32);
        }
    }
    LabelIndex { side, buckets }
}

impl LabelIndex {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn lookup(&self, state: StateId, label: Label) -> &[u32] {
        self.buckets[state]
            .get(&label)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Composes two transducers over the same semiring, gating epsilon moves
/// with the 2-way filter. Only states reachable from the initial pairs are
/// constructed; dead ends are kept (see `algorithms::trim`).
pub fn compose<W: Semiring>(t1: &Transducer<W>, t2: &Transducer<W>) -> Transducer<W> {
    compose_counted(t1, t2).0
}

/// [`compose`] plus instrumentation counters.
pub fn compose_counted<W: Semiring>(
    t1: &Transducer<W>,
    t2: &Transducer<W>,
) -> (Transducer<W>, ComposeCounters) {
    compose_impl(t1, t2, true)
}

/// Composition without the epsilon filter.
///
/// With parallel epsilon paths this multiplies weights by the number of
/// redundant interleavings and is therefore wrong in non-idempotent
/// semirings; it exists to demonstrate and test exactly that failure.
pub fn compose_unfiltered<W: Semiring>(t1: &Transducer<W>, t2: &Transducer<W>) -> Transducer<W> {
    compose_impl(t1, t2, false).0
}

/// Filter states: 0 = free, 1 = committed to the right machine advancing
/// alone, 2 = committed to the left machine advancing alone. A real match
/// resets to 0.
fn filter_allows(f: u8, mv: PairLabel) -> bool {
    use PairLabel::*;
    matches!(
        (f, mv),
        (_, XX) | (0, E2E1) | (0, E1E1) | (0, E2E2) | (1, E1E1) | (2, E2E2)
    )
}

fn filter_next(mv: PairLabel) -> u8 {
    match mv {
        PairLabel::XX | PairLabel::E2E1 => 0,
        PairLabel::E1E1 => 1,
        PairLabel::E2E2 => 2,
        _ => unreachable!("2-way composition uses only the base moves"),
    }
}

fn compose_impl<W: Semiring>(
    t1: &Transducer<W>,
    t2: &Transducer<W>,
    filtered: bool,
) -> (Transducer<W>, ComposeCounters) {
    // Consistency check against the filter table; debug builds only.
    debug_assert!({
        let m = filter_m();
        (0..3u8).all(|f| {
            [PairLabel::E1E1, PairLabel::E2E2, PairLabel::E2E1, PairLabel::XX]
                .into_iter()
                .all(|mv| {
                    m.next(f.into(), mv).map(|t| t as u8)
                        == filter_allows(f, mv).then(|| filter_next(mv))
                })
        })
    });

    let index_t1 = t1.stats().max_out_degree > t2.stats().max_out_degree;
    let index = if index_t1 {
        build_label_index(t1, Side::Output)
    } else {
        build_label_index(t2, Side::Input)
    };

    let mut counters = ComposeCounters::default();
    let mut result = Transducer::new();
    let mut ids: HashMap<(StateId, StateId, u8), StateId> = HashMap::new();
    let mut keys: Vec<(StateId, StateId, u8)> = Vec::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();

    fn intern<W: Semiring>(
        key: (StateId, StateId, u8),
        ids: &mut HashMap<(StateId, StateId, u8), StateId>,
        result: &mut Transducer<W>,
        keys: &mut Vec<(StateId, StateId, u8)>,
        queue: &mut VecDeque<StateId>,
    ) -> StateId {
        if let Some(&id) = ids.get(&key) {
            return id;
        }
        let id = result.add_state();
        ids.insert(key, id);
        keys.push(key);
        queue.push_back(id);
        id
    }

    for (q1, lam1) in t1.initial_states() {
        for (q2, lam2) in t2.initial_states() {
            let id = intern((q1, q2, 0), &mut ids, &mut result, &mut keys, &mut queue);
            result.set_initial(id, lam1.times(&lam2)).unwrap();
        }
    }

    while let Some(id) = queue.pop_front() {
        counters.queue_peak = counters.queue_peak.max(queue.len() as u64 + 1);
        counters.states_expanded += 1;
        let (q1, q2, f) = keys[id];

        if let (Some(r1), Some(r2)) = (t1.final_weight(q1), t2.final_weight(q2)) {
            if result.final_weight(id).is_none() {
                result.set_final(id, r1.times(&r2)).unwrap();
            }
        }

        let allows = |mv: PairLabel| !filtered || filter_allows(f, mv);
        let next_f = |mv: PairLabel| if filtered { filter_next(mv) } else { 0 };

        macro_rules! emit {
            ($e1:expr, $e2:expr, $mv:expr) => {{
                let e1: Option<&Transition<W>> = $e1;
                let e2: Option<&Transition<W>> = $e2;
                let n1 = e1.map_or(q1, |e| e.nextstate);
                let n2 = e2.map_or(q2, |e| e.nextstate);
                let target =
                    intern((n1, n2, next_f($mv)), &mut ids, &mut result, &mut keys, &mut queue);
                let ilabel = e1.map_or(EPSILON, |e| e.ilabel);
                let olabel = e2.map_or(EPSILON, |e| e.olabel);
                let mut w = e1.map_or_else(W::one, |e| e.weight);
                if let Some(e) = e2 {
                    w = w.times(&e.weight);
                }
                result
                    .add_transition(id, Transition::new(ilabel, olabel, w, target))
                    .unwrap();
                counters.transitions_emitted += 1;
            }};
        }

        // Real-symbol matches, then the diagonal epsilon match, then the
        // two one-sided epsilon moves.
        if index_t1 {
            for e2 in t2.transitions(q2) {
                if e2.ilabel == EPSILON {
                    continue;
                }
                counters.match_probes += 1;
                for &i1 in index.lookup(q1, e2.ilabel) {
                    emit!(Some(&t1.transitions(q1)[i1 as usize]), Some(e2), PairLabel::XX);
                }
            }
        } else {
            for e1 in t1.transitions(q1) {
                if e1.olabel == EPSILON {
                    continue;
                }
                counters.match_probes += 1;
                for &i2 in index.lookup(q2, e1.olabel) {
                    emit!(Some(e1), Some(&t2.transitions(q2)[i2 as usize]), PairLabel::XX);
                }
            }
        }

        if allows(PairLabel::E2E1) {
            for e1 in t1.transitions(q1) {
                if e1.olabel != EPSILON {
                    continue;
                }
                counters.match_probes += 1;
                for e2 in t2.transitions(q2) {
                    if e2.ilabel == EPSILON {
                        emit!(Some(e1), Some(e2), PairLabel::E2E1);
                    }
                }
            }
        }

        if allows(PairLabel::E1E1) {
            counters.match_probes += 1;
            for e2 in t2.transitions(q2) {
                if e2.ilabel == EPSILON {
                    emit!(None, Some(e2), PairLabel::E1E1);
                }
            }
        }

        if allows(PairLabel::E2E2) {
            counters.match_probes += 1;
            for e1 in t1.transitions(q1) {
                if e1.olabel == EPSILON {
                    emit!(Some(e1), None, PairLabel::E2E2);
                }
            }
        }
    }

    (result, counters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::{identity, random_acyclic};
    use crate::semiring::ProbabilityWeight;

    type P = ProbabilityWeight;

    fn all_strings(alphabet: Label, max_len: usize) -> Vec<Vec<Label>> {
        let mut out = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &layer {
                for a in 1..=alphabet {
                    let mut s2 = s.clone();
                    s2.push(a);
                    next.push(s2);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn label_index_lookups() {
        let id3 = identity::<P>(3);
        let idx = build_label_index(&id3, Side::Output);
        for a in 1..=3 {
            assert_eq!(idx.lookup(0, a).len(), 1);
        }

        let mut t = Transducer::<P>::new();
        t.add_state();
        t.add_transition(0, Transition::new(1, 2, P::new(0.5), 0)).unwrap();
        t.add_transition(0, Transition::new(1, 3, P::new(0.5), 0)).unwrap();
        let out = build_label_index(&t, Side::Output);
        assert_eq!(out.lookup(0, 2).len(), 1);
        assert_eq!(out.lookup(0, 3).len(), 1);
        let inp = build_label_index(&t, Side::Input);
        assert_eq!(inp.side(), Side::Input);
        assert_eq!(inp.lookup(0, 1).len(), 2);
        assert_eq!(inp.lookup(0, 7), &[] as &[u32]);
    }

    #[test]
    fn identity_is_left_neutral() {
        for seed in 0..10 {
            let t = random_acyclic::<P>(6, 2, 0.2, 0.5, seed);
            let c = compose(&identity(2), &t);
            for x in all_strings(2, 3) {
                for y in all_strings(2, 3) {
                    let a = c.evaluate(&x, &y).unwrap();
                    let b = t.evaluate(&x, &y).unwrap();
                    assert!(a.approx_eq(&b, 1e-9), "seed {seed} {x:?} {y:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn matches_middle_sum_oracle() {
        for seed in 0..20 {
            let t1 = random_acyclic::<P>(6, 2, 0.2, 0.5, 1000 + seed);
            let t2 = random_acyclic::<P>(6, 2, 0.2, 0.5, 2000 + seed);
            let c = compose(&t1, &t2);
            let zs = all_strings(2, 6);
            for x in all_strings(2, 3) {
                for y in all_strings(2, 3) {
                    let direct = c.evaluate(&x, &y).unwrap();
                    let mut oracle = P::zero();
                    for z in &zs {
                        let w1 = t1.evaluate(&x, z).unwrap();
                        if w1.is_zero() {
                            continue;
                        }
                        oracle = oracle.plus(&w1.times(&t2.evaluate(z, &y).unwrap()));
                    }
                    assert!(
                        direct.approx_eq(&oracle, 1e-9),
                        "seed {seed} {x:?} {y:?}: {direct} vs {oracle}"
                    );
                }
            }
        }
    }

    /// Two epsilon chains compose to a single path of weight 0.0625; the
    /// 13 grid interleavings must not each contribute.
    #[test]
    fn epsilon_multiplicity_controlled() {
        let (t1, t2) = eps_chain_pair();
        let filtered = compose(&t1, &t2);
        let got = filtered.evaluate(&[1, 2], &[1, 2]).unwrap();
        assert!(got.approx_eq(&P::new(0.0625), 1e-12), "filtered: {got}");

        let unfiltered = compose_unfiltered(&t1, &t2);
        let bad = unfiltered.evaluate(&[1, 2], &[1, 2]).unwrap();
        assert!(
            bad.approx_eq(&P::new(13.0 * 0.0625), 1e-12),
            "unfiltered: {bad}"
        );
        assert!(bad.probability() > got.probability());
    }

    pub(crate) fn eps_chain_pair() -> (Transducer<P>, Transducer<P>) {
        let mut t1 = Transducer::<P>::new();
        t1.add_states(3);
        t1.set_initial(0, P::one()).unwrap();
        t1.set_final(2, P::one()).unwrap();
        t1.add_transition(0, Transition::new(1, EPSILON, P::new(0.5), 1)).unwrap();
        t1.add_transition(1, Transition::new(2, EPSILON, P::new(0.5), 2)).unwrap();
        let mut t2 = Transducer::<P>::new();
        t2.add_states(3);
        t2.set_initial(0, P::one()).unwrap();
        t2.set_final(2, P::one()).unwrap();
        t2.add_transition(0, Transition::new(EPSILON, 1, P::new(0.5), 1)).unwrap();
        t2.add_transition(1, Transition::new(EPSILON, 2, P::new(0.5), 2)).unwrap();
        (t1, t2)
    }

    #[test]
    fn state_bound_and_reachability() {
        for seed in 0..10 {
            let t1 = random_acyclic::<P>(5, 2, 0.3, 0.5, 3000 + seed);
            let t2 = random_acyclic::<P>(5, 2, 0.3, 0.5, 4000 + seed);
            let (c, counters) = compose_counted(&t1, &t2);
            assert!(c.num_states() <= t1.num_states() * t2.num_states() * 3);
            assert_eq!(counters.transitions_emitted as usize, c.stats().num_transitions);

            // Every constructed state is reachable from an initial state.
            let mut seen = vec![false; c.num_states()];
            let mut stack: Vec<StateId> = c.initial_states().map(|(q, _)| q).collect();
            for &q in &stack {
                seen[q] = true;
            }
            while let Some(q) = stack.pop() {
                for tr in c.transitions(q) {
                    if !seen[tr.nextstate] {
                        seen[tr.nextstate] = true;
                        stack.push(tr.nextstate);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "unreachable state in result");
        }
    }
}
