//! Epsilon filters for composition.
//!
//! When composed machines carry epsilon labels, a naive product construction
//! reaches the same target state along many interleavings of the individual
//! epsilon moves, and in non-idempotent semirings the shared weight is then
//! counted once per interleaving. The fix is a small deterministic automaton
//! over *move symbols* that admits exactly one interleaving per equivalence
//! class; composition consults it as a gate and never materializes it.
//!
//! Three filters are built here:
//!
//! - [`filter_m`]: the 2-way filter over the four pair moves
//!   ([`PairLabel`]); it keeps the diagonal epsilon match first.
//! - [`filter_m1`] / [`filter_m2`]: the left-to-right pair used for 3-way
//!   composition, obtained from `M` by adding the hold bookkeeping for the
//!   third machine (`e0`-marked labels).
//! - [`filter_w`]: the single symmetric 3-way filter over move triplets
//!   ([`Move3`]). Each triplet coordinate says what the corresponding
//!   machine does in one step: `0` hold, `1` advance on an epsilon
//!   transition, `x` advance on a real-symbol match.
//!
//! Every filter is also re-derivable from its forbidden-factor
//! characterization through [`derive_filter`] (subset construction,
//! complementation, trimming, minimization), and the hard-coded tables are
//! tested isomorphic to the derived automata.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Symbol type usable as a filter move.
pub trait MoveSymbol: Copy + Ord + Eq + Hash + fmt::Debug + fmt::Display {}

impl<T: Copy + Ord + Eq + Hash + fmt::Debug + fmt::Display> MoveSymbol for T {}

/// A small deterministic automaton over move symbols.
///
/// State 0 is initial, every state is accepting, and a blocked move is
/// simply an absent transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterAutomaton<S: MoveSymbol> {
    transitions: Vec<BTreeMap<S, u32>>,
}

impl<S: MoveSymbol> FilterAutomaton<S> {
    pub fn with_states(num_states: usize) -> Self {
        FilterAutomaton { transitions: vec![BTreeMap::new(); num_states] }
    }

    pub fn add_transition(&mut self, from: u32, sym: S, to: u32) {
        let prev = self.transitions[from as usize].insert(sym, to);
        debug_assert!(prev.is_none(), "filter must stay deterministic");
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn total_transitions(&self) -> usize {
        self.transitions.iter().map(BTreeMap::len).sum()
    }

    /// The successor of `state` on `sym`, or `None` when the move is blocked.
    pub fn next(&self, state: u32, sym: S) -> Option<u32> {
        self.transitions[state as usize].get(&sym).copied()
    }

    pub fn transitions_from(&self, state: u32) -> impl Iterator<Item = (S, u32)> + '_ {
        self.transitions[state as usize].iter().map(|(&s, &t)| (s, t))
    }

    /// Runs the automaton from state 0; true when never blocked.
    pub fn accepts<I: IntoIterator<Item = S>>(&self, seq: I) -> bool {
        let mut q = 0u32;
        for sym in seq {
            match self.next(q, sym) {
                Some(r) => q = r,
                None => return false,
            }
        }
        true
    }

    /// Renumbers states by breadth-first order over sorted symbols. Two
    /// filters accepting the same language in the same shape compare equal
    /// after canonicalization.
    pub fn canonical_form(&self) -> FilterAutomaton<S> {
        let mut order: Vec<Option<u32>> = vec![None; self.num_states()];
        let mut queue = VecDeque::from([0u32]);
        order[0] = Some(0);
        let mut next_id = 1u32;
        let mut visit = Vec::new();
        while let Some(q) = queue.pop_front() {
            visit.push(q);
            for (_, to) in self.transitions_from(q) {
                if order[to as usize].is_none() {
                    order[to as usize] = Some(next_id);
                    next_id += 1;
                    queue.push_back(to);
                }
            }
        }
        let mut out = FilterAutomaton::with_states(next_id as usize);
        for &q in &visit {
            let nq = order[q as usize].unwrap();
            for (s, to) in self.transitions_from(q) {
                out.add_transition(nq, s, order[to as usize].unwrap());
            }
        }
        out
    }

    pub fn is_isomorphic_to(&self, other: &FilterAutomaton<S>) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    /// GraphViz rendering for documentation.
    pub fn dot(&self, name: &str) -> String {
        let mut s = String::new();
        s.push_str(&format!("digraph {name} {{\n  rankdir = LR;\n  node [shape = doublecircle];\n"));
        for q in 0..self.num_states() {
            s.push_str(&format!("  {q};\n"));
        }
        for q in 0..self.num_states() as u32 {
            for (sym, to) in self.transitions_from(q) {
                s.push_str(&format!("  {q} -> {to} [label = \"{sym}\"];\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}

// ---------------------------------------------------------------------------
// 2-way move symbols and filters
// ---------------------------------------------------------------------------

/// Label pairs at one composition interface, written `left:right` with the
/// marked epsilons `e1` (consumed by the right machine), `e2` (produced by
/// the left machine) and `e0` (hold marker for 3-way bookkeeping).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairLabel {
    /// `e1:e1` — left machine holds, right advances on an input epsilon.
    E1E1,
    /// `e2:e2` — left advances on an output epsilon, right holds.
    E2E2,
    /// `e2:e1` — both advance, the diagonal epsilon match.
    E2E1,
    /// `x:x` — both advance on a matched real symbol.
    XX,
    /// `e1:e0` — both hold; the move happens further right.
    E1E0,
    /// `e0:e2` — middle machine held at the previous interface, right holds.
    E0E2,
    /// `e0:e1` — middle machine held, right advances on an input epsilon.
    E0E1,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairLabel::E1E1 => "e1:e1",
            PairLabel::E2E2 => "e2:e2",
            PairLabel::E2E1 => "e2:e1",
            PairLabel::XX => "x:x",
            PairLabel::E1E0 => "e1:e0",
            PairLabel::E0E2 => "e0:e2",
            PairLabel::E0E1 => "e0:e1",
        };
        f.write_str(s)
    }
}

/// The 3-state 2-way epsilon filter.
///
/// Forbidding the factors `(e1:e1)(e2:e2)`, `(e2:e2)(e1:e1)`,
/// `(e1:e1)(e2:e1)` and `(e2:e2)(e2:e1)` leaves exactly one path between
/// any two grid points, the one taking diagonal matches first.
pub fn filter_m() -> FilterAutomaton<PairLabel> {
    use PairLabel::*;
    let mut f = FilterAutomaton::with_states(3);
    for (from, sym, to) in [
        (0, E1E1, 1),
        (0, E2E2, 2),
        (0, E2E1, 0),
        (0, XX, 0),
        (1, E1E1, 1),
        (1, XX, 0),
        (2, E2E2, 2),
        (2, XX, 0),
    ] {
        f.add_transition(from, sym, to);
    }
    f
}

/// `M` plus an `e1:e0` self-loop at every state: the left pair of the
/// 3-way filter chain, letting the two left machines hold while the third
/// one moves.
pub fn filter_m1() -> FilterAutomaton<PairLabel> {
    let mut f = filter_m();
    for q in 0..f.num_states() as u32 {
        f.add_transition(q, PairLabel::E1E0, q);
    }
    f
}

/// `M` plus, wherever an `e2:e2` transition exists, a parallel `e0:e2`,
/// and wherever an `e2:e1` exists, a parallel `e0:e1`: the right pair of
/// the 3-way filter chain, accepting the hold marker of the middle
/// machine.
pub fn filter_m2() -> FilterAutomaton<PairLabel> {
    let base = filter_m();
    let mut f = base.clone();
    for q in 0..base.num_states() as u32 {
        for (sym, to) in base.transitions_from(q) {
            match sym {
                PairLabel::E2E2 => f.add_transition(q, PairLabel::E0E2, to),
                PairLabel::E2E1 => f.add_transition(q, PairLabel::E0E1, to),
                _ => {}
            }
        }
    }
    f
}

/// The move alphabet of `M` with the forbidden factors characterizing it.
pub fn m_forbidden_factors() -> (Vec<PairLabel>, Vec<Vec<PairLabel>>) {
    use PairLabel::*;
    let alphabet = vec![E1E1, E2E2, E2E1, XX];
    let factors = vec![
        vec![E1E1, E2E2],
        vec![E2E2, E1E1],
        vec![E1E1, E2E1],
        vec![E2E2, E2E1],
    ];
    (alphabet, factors)
}

// ---------------------------------------------------------------------------
// 3-way move symbols and filter
// ---------------------------------------------------------------------------

/// What one machine does during one 3-way composition step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// `0`: stay at the current state.
    Hold,
    /// `1`: advance on an epsilon transition.
    Eps,
    /// `x`: advance on a real-symbol match with the adjacent machine.
    Match,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::Hold => "0",
            Step::Eps => "1",
            Step::Match => "x",
        })
    }
}

/// A simultaneous move of the three machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move3(pub [Step; 3]);

impl Move3 {
    pub const fn new(a: Step, b: Step, c: Step) -> Self {
        Move3([a, b, c])
    }

    pub fn is_pure_eps(&self) -> bool {
        self.0.iter().all(|s| *s != Step::Match)
    }
}

impl fmt::Display for Move3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

use Step::{Eps as E, Hold as H, Match as X};

/// The full-match move that ends an epsilon block and resets the filter.
pub const FULL_MATCH: Move3 = Move3::new(X, X, X);

/// The twelve legal move triplets: the seven hold/epsilon combinations
/// that move at least one machine, the four partial matches, and the full
/// match.
pub fn move3_alphabet() -> Vec<Move3> {
    let mut v = pure_eps_moves();
    v.extend([
        Move3::new(X, X, H),
        Move3::new(X, X, E),
        Move3::new(H, X, X),
        Move3::new(E, X, X),
        FULL_MATCH,
    ]);
    v
}

/// The seven hold/epsilon triplets other than (0,0,0).
pub fn pure_eps_moves() -> Vec<Move3> {
    let mut v = Vec::new();
    for a in [H, E] {
        for b in [H, E] {
            for c in [H, E] {
                if (a, b, c) != (H, H, H) {
                    v.push(Move3::new(a, b, c));
                }
            }
        }
    }
    v
}

/// The 3-way filter: a 7-state automaton over [`Move3`] admitting exactly
/// one move sequence between any two points of the 3-dimensional epsilon
/// grid, the one taking epsilon moves and matches as early as possible.
///
/// Every state has a full-match transition back to state 0.
pub fn filter_w() -> FilterAutomaton<Move3> {
    let mut f = FilterAutomaton::with_states(7);
    let table: &[(u32, Move3, u32)] = &[
        (0, Move3::new(E, E, E), 0),
        (0, Move3::new(H, E, E), 1),
        (0, Move3::new(E, H, E), 2),
        (0, Move3::new(E, E, H), 3),
        (0, Move3::new(H, H, E), 4),
        (0, Move3::new(H, E, H), 5),
        (0, Move3::new(E, H, H), 6),
        (0, Move3::new(X, X, E), 0),
        (0, Move3::new(X, X, H), 3),
        (0, Move3::new(H, X, X), 1),
        (0, Move3::new(E, X, X), 0),
        (0, FULL_MATCH, 0),
        (1, Move3::new(H, E, E), 1),
        (1, Move3::new(H, H, E), 4),
        (1, Move3::new(H, E, H), 5),
        (1, Move3::new(X, X, E), 0),
        (1, Move3::new(X, X, H), 3),
        (1, Move3::new(H, X, X), 1),
        (1, FULL_MATCH, 0),
        (2, Move3::new(E, H, E), 2),
        (2, Move3::new(H, H, E), 4),
        (2, Move3::new(E, H, H), 6),
        (2, Move3::new(X, X, E), 0),
        (2, Move3::new(X, X, H), 3),
        (2, Move3::new(H, X, X), 1),
        (2, Move3::new(E, X, X), 0),
        (2, FULL_MATCH, 0),
        (3, Move3::new(E, E, H), 3),
        (3, Move3::new(H, E, H), 5),
        (3, Move3::new(E, H, H), 6),
        (3, Move3::new(X, X, H), 3),
        (3, Move3::new(H, X, X), 1),
        (3, Move3::new(E, X, X), 0),
        (3, FULL_MATCH, 0),
        (4, Move3::new(H, H, E), 4),
        (4, Move3::new(H, X, X), 1),
        (4, FULL_MATCH, 0),
        (5, Move3::new(H, E, H), 5),
        (5, Move3::new(X, X, H), 3),
        (5, Move3::new(H, X, X), 1),
        (5, FULL_MATCH, 0),
        (6, Move3::new(E, H, H), 6),
        (6, Move3::new(X, X, H), 3),
        (6, FULL_MATCH, 0),
    ];
    for &(from, sym, to) in table {
        f.add_transition(from, sym, to);
    }
    f
}

/// The derivation alphabet and forbidden factors characterizing
/// [`filter_w`]:
///
/// 1. per coordinate, a hold cannot be followed by an epsilon advance
///    (`0` then `1`);
/// 2. two holds in adjacent machines cannot both turn into partial
///    matches (full matches are exempt);
/// 3. the all-hold triplet is forbidden outright.
pub fn w_forbidden_factors() -> (Vec<Move3>, Vec<Vec<Move3>>) {
    let all_hold = Move3::new(H, H, H);
    let mut alphabet = move3_alphabet();
    alphabet.push(all_hold);
    alphabet.sort();

    let mut factors: BTreeSet<Vec<Move3>> = BTreeSet::new();
    factors.insert(vec![all_hold]);
    for &u in &alphabet {
        for &v in &alphabet {
            let rule1 = (0..3).any(|i| u.0[i] == H && v.0[i] == E);
            let rule2_left = u.0[0] == H
                && u.0[1] == H
                && matches!(v, Move3([X, X, H]) | Move3([X, X, E]));
            let rule2_right = u.0[1] == H
                && u.0[2] == H
                && matches!(v, Move3([H, X, X]) | Move3([E, X, X]));
            if rule1 || rule2_left || rule2_right {
                factors.insert(vec![u, v]);
            }
        }
    }
    (alphabet, factors.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Filter derivation: factor NFA -> determinize -> complement -> minimize
// ---------------------------------------------------------------------------

/// Builds the trimmed minimal DFA accepting exactly the sequences that
/// contain none of the forbidden factors. All states accept; blocked moves
/// are absent transitions. Factors must have length 1 or 2.
pub fn derive_filter<S: MoveSymbol>(
    alphabet: &[S],
    forbidden_factors: &[Vec<S>],
) -> Result<FilterAutomaton<S>> {
    if alphabet.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    if forbidden_factors.iter().any(|f| f.is_empty() || f.len() > 2) {
        return Err(Error::BadFactorLength);
    }

    // NFA for "some factor occurs as a substring": state 0 loops on
    // everything, the accept state loops on everything, factors chain from
    // 0 into the accept state.
    let nfa_start = 0u32;
    let nfa_accept = 1u32;
    let mut nfa_next = 2u32;
    let mut nfa: HashMap<(u32, S), Vec<u32>> = HashMap::new();
    for &a in alphabet {
        nfa.entry((nfa_start, a)).or_default().push(nfa_start);
        nfa.entry((nfa_accept, a)).or_default().push(nfa_accept);
    }
    for factor in forbidden_factors {
        match factor.as_slice() {
            [a] => nfa.entry((nfa_start, *a)).or_default().push(nfa_accept),
            [a, b] => {
                let mid = nfa_next;
                nfa_next += 1;
                nfa.entry((nfa_start, *a)).or_default().push(mid);
                nfa.entry((mid, *b)).or_default().push(nfa_accept);
            }
            _ => unreachable!(),
        }
    }

    // Subset construction. Every reachable subset contains the NFA start
    // state, so the transition function is total. A subset containing the
    // accept state recognizes "factor seen"; such subsets are absorbing
    // and become dead states of the complement, so they are dropped on
    // the spot, which also trims non-coaccessible states.
    let mut subsets: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut worklist = VecDeque::new();
    let start = vec![nfa_start];
    subsets.insert(start.clone(), 0);
    worklist.push_back(start);
    let mut table: Vec<BTreeMap<S, u32>> = vec![BTreeMap::new()];
    while let Some(cur) = worklist.pop_front() {
        let cur_id = subsets[&cur];
        for &a in alphabet {
            let mut next: BTreeSet<u32> = BTreeSet::new();
            for &q in &cur {
                if let Some(ts) = nfa.get(&(q, a)) {
                    next.extend(ts.iter().copied());
                }
            }
            if next.contains(&nfa_accept) {
                continue;
            }
            let key: Vec<u32> = next.into_iter().collect();
            let id = match subsets.get(&key) {
                Some(&id) => id,
                None => {
                    let id = table.len() as u32;
                    subsets.insert(key.clone(), id);
                    table.push(BTreeMap::new());
                    worklist.push_back(key);
                    id
                }
            };
            table[cur_id as usize].insert(a, id);
        }
    }

    // Moore minimization over the partial DFA: all states accepting, so
    // the initial partition is a single block; refine by successor-block
    // signatures until stable.
    let n = table.len();
    let mut block = vec![0u32; n];
    loop {
        let mut sig_to_block: HashMap<(u32, Vec<(S, Option<u32>)>), u32> = HashMap::new();
        let mut new_block = vec![0u32; n];
        for q in 0..n {
            let sig: Vec<(S, Option<u32>)> = alphabet
                .iter()
                .map(|&a| (a, table[q].get(&a).map(|&t| block[t as usize])))
                .collect();
            let next_id = sig_to_block.len() as u32;
            let id = *sig_to_block.entry((block[q], sig)).or_insert(next_id);
            new_block[q] = id;
        }
        if new_block == block {
            break;
        }
        block = new_block;
    }

    let num_blocks = block.iter().max().map(|&b| b as usize + 1).unwrap_or(0);
    let mut merged = FilterAutomaton::with_states(num_blocks);
    let mut seen = vec![false; num_blocks];
    // Make block of the start state block 0 by swapping ids.
    let start_block = block[0];
    let rename = |b: u32| -> u32 {
        if b == start_block {
            0
        } else if b == 0 {
            start_block
        } else {
            b
        }
    };
    for q in 0..n {
        let b = rename(block[q]) as usize;
        if seen[b] {
            continue;
        }
        seen[b] = true;
        for (&a, &t) in &table[q] {
            merged.add_transition(b as u32, a, rename(block[t as usize]));
        }
    }
    Ok(merged.canonical_form())
}

// ---------------------------------------------------------------------------
// Canonical move sequences
// ---------------------------------------------------------------------------

/// Rewrites a move sequence into the unique equivalent form accepted by
/// [`filter_w`]: epsilon advances and matches are taken as early as
/// possible. Two sequences are equivalent when each machine consumes the
/// same transitions in the same order under both.
///
/// Full matches are synchronization barriers — no move may cross one — so
/// the sequence is canonicalized segment by segment between them.
pub fn canonicalize_move_sequence(moves: &[Move3]) -> Result<Vec<Move3>> {
    let legal = move3_alphabet();
    for m in moves {
        if !legal.contains(m) {
            return Err(Error::IllegalMove(m.to_string()));
        }
    }
    let mut out = Vec::with_capacity(moves.len());
    for (i, segment) in moves.split(|m| *m == FULL_MATCH).enumerate() {
        if i > 0 {
            out.push(FULL_MATCH);
        }
        out.extend(canonicalize_segment(segment.to_vec()));
    }
    Ok(out)
}

fn canonicalize_segment(segment: Vec<Move3>) -> Vec<Move3> {
    // Locate the first partial match; a segment without one is a pure
    // hold/epsilon block handled by the staircase form.
    let first_x = segment.iter().position(|m| !m.is_pure_eps());
    let Some(k) = first_x else {
        let counts = eps_counts(&segment);
        return staircase(counts);
    };
    let chi = segment[k];
    if chi.0[0] == X {
        canonicalize_left_match(&segment[..k], chi, &segment[k + 1..])
    } else {
        // A right-side match (m,x,x): mirror machine order, canonicalize,
        // mirror back. The forbidden-factor rules are symmetric under the
        // mirror, and it maps (m,x,x) onto (x,x,m).
        let mirrored: Vec<Move3> = segment.iter().map(mirror).collect();
        canonicalize_segment(mirrored).iter().map(mirror).collect()
    }
}

fn mirror(m: &Move3) -> Move3 {
    Move3::new(m.0[2], m.0[1], m.0[0])
}

fn eps_counts(moves: &[Move3]) -> [usize; 3] {
    let mut n = [0usize; 3];
    for m in moves {
        for (i, s) in m.0.iter().enumerate() {
            if *s == E {
                n[i] += 1;
            }
        }
    }
    n
}

/// The canonical pure-epsilon block with the given per-machine advance
/// counts: in coordinate order sorted by count, `(1,1,1)^min`
/// `(0,1,1)^(mid-min)` `(0,0,1)^(max-mid)`, permuted back.
fn staircase(counts: [usize; 3]) -> Vec<Move3> {
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| counts[i]);
    let sorted = [counts[order[0]], counts[order[1]], counts[order[2]]];
    let mut out = Vec::with_capacity(sorted[2]);
    for step in 0..sorted[2] {
        // A lane keeps advancing until its count is exhausted, so step s
        // carries an epsilon advance exactly in the lanes with count > s.
        let mut triple = [H; 3];
        for lane in 0..3 {
            if step < sorted[lane] {
                triple[order[lane]] = E;
            }
        }
        out.push(Move3(triple));
    }
    out
}

/// Canonicalizes `prefix (x,x,m) rest`.
///
/// The third machine's epsilon advances before its own next match can
/// float freely across the interface-1 match: as many as possible are
/// merged into the staircase before the match (capped by the larger of
/// the other two machines' advance counts), one more rides on the match
/// itself, and the remainder trail after it, where the recursion may pull
/// them further forward.
fn canonicalize_left_match(prefix: &[Move3], chi: Move3, rest: &[Move3]) -> Vec<Move3> {
    let n = eps_counts(prefix);
    let cap = n[0].max(n[1]);

    // Floatable pool: third-coordinate epsilon advances in the match and
    // the tail, up to the third machine's own next match. Everything from
    // that match on stays put.
    let mut pool = n[2] + usize::from(chi.0[2] == E);
    let mut stripped = Vec::with_capacity(rest.len());
    let mut idx = 0;
    while idx < rest.len() {
        let m = rest[idx];
        if m.0[2] == X {
            break;
        }
        if m.0[2] == E {
            pool += 1;
            let reduced = Move3::new(m.0[0], m.0[1], H);
            if reduced.0 != [H, H, H] {
                stripped.push(reduced);
            }
        } else {
            stripped.push(m);
        }
        idx += 1;
    }
    stripped.extend_from_slice(&rest[idx..]);

    let into_stairs = pool.min(cap);
    let on_match = pool > into_stairs;
    let trailing = pool - into_stairs - usize::from(on_match);

    let mut out = staircase([n[0], n[1], into_stairs]);
    out.push(Move3::new(X, X, if on_match { E } else { H }));
    let mut rest2: Vec<Move3> = Vec::with_capacity(trailing + stripped.len());
    rest2.extend(std::iter::repeat(Move3::new(H, H, E)).take(trailing));
    rest2.extend(stripped);
    out.extend(canonicalize_segment(rest2));
    out
}

// ---------------------------------------------------------------------------
// Grid uniqueness checks
// ---------------------------------------------------------------------------

const MAX_GRID_DIM: usize = 5;

/// Counts the monotone 2-grid paths covering `delta` using steps
/// `e1:e1 = (0,1)`, `e2:e2 = (1,0)`, `e2:e1 = (1,1)`, and how many of
/// them the filter accepts from its start state. Returns
/// `(total, accepted)`.
pub fn grid_path_counts_2way(
    filter: &FilterAutomaton<PairLabel>,
    delta: (usize, usize),
) -> (u64, u64) {
    const STEPS: [(PairLabel, (usize, usize)); 3] = [
        (PairLabel::E1E1, (0, 1)),
        (PairLabel::E2E2, (1, 0)),
        (PairLabel::E2E1, (1, 1)),
    ];
    fn rec(
        filter: &FilterAutomaton<PairLabel>,
        state: Option<u32>,
        rem: (usize, usize),
        total: &mut u64,
        accepted: &mut u64,
    ) {
        if rem == (0, 0) {
            *total += 1;
            if state.is_some() {
                *accepted += 1;
            }
            return;
        }
        for (sym, (dx, dy)) in STEPS {
            if dx > rem.0 || dy > rem.1 {
                continue;
            }
            let next = state.and_then(|q| filter.next(q, sym));
            rec(filter, next, (rem.0 - dx, rem.1 - dy), total, accepted);
        }
    }
    let mut total = 0;
    let mut accepted = 0;
    rec(filter, Some(0), delta, &mut total, &mut accepted);
    (total, accepted)
}

/// True when, for every pair of comparable points on a grid of the given
/// dimensions, the filter accepts exactly one monotone path between them.
pub fn grid_unique_path_check_2way(
    filter: &FilterAutomaton<PairLabel>,
    dims: (usize, usize),
) -> Result<bool> {
    if dims.0 > MAX_GRID_DIM || dims.1 > MAX_GRID_DIM {
        return Err(Error::GridTooLarge);
    }
    for dx in 0..=dims.0 {
        for dy in 0..=dims.1 {
            let (_, accepted) = grid_path_counts_2way(filter, (dx, dy));
            if accepted != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// 3-grid analogue of [`grid_path_counts_2way`]: steps are the seven
/// hold/epsilon triplets, each advancing the machines marked `1`.
pub fn grid_path_counts_3way(
    filter: &FilterAutomaton<Move3>,
    delta: (usize, usize, usize),
) -> (u64, u64) {
    fn rec(
        filter: &FilterAutomaton<Move3>,
        steps: &[Move3],
        state: Option<u32>,
        rem: (usize, usize, usize),
        total: &mut u64,
        accepted: &mut u64,
    ) {
        if rem == (0, 0, 0) {
            *total += 1;
            if state.is_some() {
                *accepted += 1;
            }
            return;
        }
        for &mv in steps {
            let d = |i: usize| usize::from(mv.0[i] == E);
            if d(0) > rem.0 || d(1) > rem.1 || d(2) > rem.2 {
                continue;
            }
            let next = state.and_then(|q| filter.next(q, mv));
            rec(
                filter,
                steps,
                next,
                (rem.0 - d(0), rem.1 - d(1), rem.2 - d(2)),
                total,
                accepted,
            );
        }
    }
    let steps = pure_eps_moves();
    let mut total = 0;
    let mut accepted = 0;
    rec(filter, &steps, Some(0), delta, &mut total, &mut accepted);
    (total, accepted)
}

/// True when the filter accepts exactly one pure-epsilon move sequence
/// between every comparable pair of points of the 3-dimensional grid.
pub fn grid_unique_path_check_3way(
    filter: &FilterAutomaton<Move3>,
    dims: (usize, usize, usize),
) -> Result<bool> {
    if dims.0 > MAX_GRID_DIM || dims.1 > MAX_GRID_DIM || dims.2 > MAX_GRID_DIM {
        return Err(Error::GridTooLarge);
    }
    for d1 in 0..=dims.0 {
        for d2 in 0..=dims.1 {
            for d3 in 0..=dims.2 {
                let (_, accepted) = grid_path_counts_3way(filter, (d1, d2, d3));
                if accepted != 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(a: u8, b: u8, c: u8) -> Move3 {
        let step = |v: u8| match v {
            0 => H,
            1 => E,
            _ => X,
        };
        Move3::new(step(a), step(b), step(c))
    }

    #[test]
    fn derive_reproduces_m_exactly() {
        let (alphabet, factors) = m_forbidden_factors();
        let derived = derive_filter(&alphabet, &factors).unwrap();
        assert_eq!(derived.num_states(), 3);
        // Canonical numbering puts the post-hold states at 1 and 2, so the
        // derived table can be compared entry for entry.
        let expect = filter_m();
        assert_eq!(derived.canonical_form(), expect.canonical_form());
        use PairLabel::*;
        let d = derived.canonical_form();
        assert_eq!(d.next(0, E1E1), Some(1));
        assert_eq!(d.next(0, E2E2), Some(2));
        assert_eq!(d.next(0, E2E1), Some(0));
        assert_eq!(d.next(0, XX), Some(0));
        assert_eq!(d.next(1, E1E1), Some(1));
        assert_eq!(d.next(1, XX), Some(0));
        assert_eq!(d.next(1, E2E2), None);
        assert_eq!(d.next(1, E2E1), None);
        assert_eq!(d.next(2, E2E2), Some(2));
        assert_eq!(d.next(2, XX), Some(0));
        assert_eq!(d.next(2, E1E1), None);
    }

    #[test]
    fn derive_trivial_and_two_letter_cases() {
        let single = derive_filter(&[PairLabel::XX], &[]).unwrap();
        assert_eq!(single.num_states(), 1);
        assert_eq!(single.next(0, PairLabel::XX), Some(0));

        // Forbidding ab and ba leaves exactly a* + b*.
        use PairLabel::{E1E1 as A, E2E2 as B};
        let f = derive_filter(&[A, B], &[vec![A, B], vec![B, A]]).unwrap();
        let mut words = vec![vec![]];
        for _ in 0..5 {
            let mut next = Vec::new();
            for w in &words {
                for s in [A, B] {
                    let mut w2 = w.clone();
                    w2.push(s);
                    next.push(w2);
                }
            }
            words.extend(next.iter().cloned());
            words.sort();
            words.dedup();
        }
        for w in words.iter().filter(|w| w.len() <= 5) {
            let uniform = w.iter().all(|s| *s == A) || w.iter().all(|s| *s == B);
            assert_eq!(f.accepts(w.iter().copied()), uniform, "word {w:?}");
        }

        assert!(matches!(
            derive_filter::<PairLabel>(&[], &[]),
            Err(Error::EmptyAlphabet)
        ));
        assert!(matches!(
            derive_filter(&[A, B], &[vec![A, B, A]]),
            Err(Error::BadFactorLength)
        ));
    }

    #[test]
    fn m_accepts_and_rejects() {
        use PairLabel::*;
        let m = filter_m();
        assert!(m.accepts([E2E1, E2E1, XX]));
        assert!(!m.accepts([XX, E1E1, E2E2]));
        assert!(m.accepts([E1E1, E1E1, XX]));
    }

    #[test]
    fn m1_and_m2_construction() {
        use PairLabel::*;
        let m = filter_m();
        let m1 = filter_m1();
        let m2 = filter_m2();
        assert_eq!(m1.total_transitions(), m.total_transitions() + 3);
        for q in 0..3 {
            assert_eq!(m1.next(q, E1E0), Some(q));
        }
        assert_eq!(m2.next(0, E0E2), Some(2));
        assert_eq!(m2.next(0, E0E1), Some(0));
        assert_eq!(m2.next(2, E0E2), Some(2));
        assert_eq!(m2.next(1, E0E2), None);
        assert_eq!(m2.next(1, E0E1), None);
        assert_eq!(m2.total_transitions(), m.total_transitions() + 3);
    }

    #[test]
    fn w_examples() {
        let w = filter_w();
        assert_eq!(w.num_states(), 7);
        assert!(!w.accepts([mv(0, 0, 1), mv(2, 2, 1)]));
        assert!(!w.accepts([mv(0, 0, 1), mv(2, 2, 0)]));
        assert!(w.accepts([mv(1, 1, 1), mv(0, 1, 1), mv(0, 0, 1)]));
        for q in 0..w.num_states() as u32 {
            assert_eq!(w.next(q, FULL_MATCH), Some(0), "state {q}");
        }
    }

    #[test]
    fn w_isomorphic_to_derived() {
        let (alphabet, factors) = w_forbidden_factors();
        let derived = derive_filter(&alphabet, &factors).unwrap();
        assert_eq!(derived.num_states(), 7);
        assert!(derived.is_isomorphic_to(&filter_w()));
    }

    #[test]
    fn canonicalize_examples() {
        let canon = |s: &[Move3]| canonicalize_move_sequence(s).unwrap();
        assert_eq!(canon(&[mv(0, 0, 1), mv(1, 1, 1)]), vec![mv(1, 1, 1), mv(0, 0, 1)]);
        assert_eq!(canon(&[mv(1, 1, 1)]), vec![mv(1, 1, 1)]);
        assert_eq!(canon(&[mv(0, 1, 0), mv(1, 0, 0), mv(0, 0, 1)]), vec![mv(1, 1, 1)]);
        assert!(matches!(
            canonicalize_move_sequence(&[Move3::new(H, H, H)]),
            Err(Error::IllegalMove(_))
        ));
    }

    /// Per-machine consumption streams; two sequences are equivalent iff
    /// these agree. The middle machine's matches are tagged by which side
    /// they pair with.
    fn signature(seq: &[Move3]) -> [Vec<&'static str>; 3] {
        let mut sig: [Vec<&'static str>; 3] = Default::default();
        for m in seq {
            match m.0[0] {
                E => sig[0].push("e"),
                X => sig[0].push("x"),
                H => {}
            }
            match (m.0[0], m.0[1], m.0[2]) {
                (_, E, _) => sig[1].push("e"),
                (X, X, X) => sig[1].push("xb"),
                (X, X, _) => sig[1].push("xl"),
                (_, X, X) => sig[1].push("xr"),
                _ => {}
            }
            match m.0[2] {
                E => sig[2].push("e"),
                X => sig[2].push("x"),
                H => {}
            }
        }
        sig
    }

    fn all_sequences(alphabet: &[Move3], max_len: usize) -> Vec<Vec<Move3>> {
        let mut out: Vec<Vec<Move3>> = vec![vec![]];
        let mut layer: Vec<Vec<Move3>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &layer {
                for &m in alphabet {
                    let mut s2 = s.clone();
                    s2.push(m);
                    next.push(s2);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn canonical_is_fixpoint_of_acceptance_pure_eps() {
        let w = filter_w();
        for seq in all_sequences(&pure_eps_moves(), 4) {
            let canon = canonicalize_move_sequence(&seq).unwrap();
            assert!(w.accepts(canon.iter().copied()), "canon rejected: {seq:?} -> {canon:?}");
            assert_eq!(signature(&seq), signature(&canon), "not equivalent: {seq:?}");
            let again = canonicalize_move_sequence(&canon).unwrap();
            assert_eq!(canon, again, "not idempotent: {seq:?}");
            let accepted = w.accepts(seq.iter().copied());
            assert_eq!(accepted, seq == canon, "fixpoint mismatch on {seq:?}");
        }
    }

    #[test]
    fn canonical_is_fixpoint_of_acceptance_full_alphabet() {
        let w = filter_w();
        for seq in all_sequences(&move3_alphabet(), 3) {
            let canon = canonicalize_move_sequence(&seq).unwrap();
            assert!(w.accepts(canon.iter().copied()), "canon rejected: {seq:?} -> {canon:?}");
            assert_eq!(signature(&seq), signature(&canon), "not equivalent: {seq:?}");
            assert_eq!(
                canonicalize_move_sequence(&canon).unwrap(),
                canon,
                "not idempotent: {seq:?}"
            );
            let accepted = w.accepts(seq.iter().copied());
            assert_eq!(accepted, seq == canon, "fixpoint mismatch on {seq:?}");
        }
    }

    #[test]
    fn grid_2way() {
        let m = filter_m();
        let (total, accepted) = grid_path_counts_2way(&m, (2, 2));
        assert_eq!(total, 13);
        assert_eq!(accepted, 1);
        // The surviving path is the all-diagonal one.
        use PairLabel::*;
        assert!(m.accepts([E2E1, E2E1]));
        let (t0, a0) = grid_path_counts_2way(&m, (0, 0));
        assert_eq!((t0, a0), (1, 1));
        assert!(grid_unique_path_check_2way(&m, (4, 4)).unwrap());
        assert!(matches!(
            grid_unique_path_check_2way(&m, (6, 2)),
            Err(Error::GridTooLarge)
        ));
    }

    #[test]
    fn grid_3way_small() {
        let w = filter_w();
        assert!(grid_unique_path_check_3way(&w, (2, 2, 2)).unwrap());
        // Unfiltered count sanity: the 13 two-dimensional interleavings
        // reappear on the (1,1,1) delta.
        let (total, accepted) = grid_path_counts_3way(&w, (1, 1, 1));
        assert_eq!(total, 13);
        assert_eq!(accepted, 1);
    }

    #[test]
    fn staircase_matches_grid_representative() {
        let w = filter_w();
        for d1 in 0..=2usize {
            for d2 in 0..=2usize {
                for d3 in 0..=2usize {
                    let stair = staircase([d1, d2, d3]);
                    assert!(w.accepts(stair.iter().copied()), "stair {d1},{d2},{d3}");
                    let n = eps_counts(&stair);
                    assert_eq!(n, [d1, d2, d3]);
                }
            }
        }
    }

    #[test]
    fn dot_output_mentions_every_state() {
        let dot = filter_m().dot("m");
        assert!(dot.contains("digraph m"));
        assert!(dot.contains("0 -> 1"));
        assert!(dot.contains("e2:e1"));
    }
}

