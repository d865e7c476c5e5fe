//! Range-labeled finite automata over the solver alphabet.
//!
//! Automata are nondeterministic, epsilon-free, and label every transition
//! with an inclusive code-point interval `[lo, hi]`. All stored automata are
//! kept *trimmed* (every state lies on some path from an initial to an
//! accepting state, with one non-accepting placeholder state for the empty
//! language) and in a canonical breadth-first state numbering, which is what
//! makes hash-consing in [`db::AutomatonDb`] effective.
//!
//! Constructions that need epsilon transitions (regex compilation, image
//! computations) go through [`NfaBuilder`], which eliminates them on
//! `finish`.

mod db;

pub use db::{AutomatonDb, AutomatonRef};

use crate::strings::{SmtString, MAX_CHAR};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Automaton state index.
pub type StateId = u32;

/// One transition: consume a code point in `[lo, hi]` moving `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: StateId,
    pub lo: u32,
    pub hi: u32,
    pub to: StateId,
}

/// Raised when a construction would exceed the configured state budget.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("automaton construction exceeded the state cap ({cap} states)")]
pub struct StateBlowup {
    pub cap: usize,
}

/// An epsilon-free NFA with interval-labeled transitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automaton {
    num_states: u32,
    initial: Vec<StateId>,
    accepting: Vec<StateId>,
    transitions: Vec<Transition>,
}

impl Automaton {
    /// Builds an automaton from parts. States must be `< num_states` and
    /// intervals non-empty within the alphabet; violations are programming
    /// errors.
    pub fn new(
        num_states: u32,
        initial: Vec<StateId>,
        accepting: Vec<StateId>,
        transitions: Vec<Transition>,
    ) -> Self {
        debug_assert!(initial.iter().all(|&s| s < num_states));
        debug_assert!(accepting.iter().all(|&s| s < num_states));
        debug_assert!(transitions
            .iter()
            .all(|t| t.from < num_states && t.to < num_states && t.lo <= t.hi && t.hi <= MAX_CHAR));
        let mut a = Automaton {
            num_states,
            initial,
            accepting,
            transitions,
        };
        a.initial.sort_unstable();
        a.initial.dedup();
        a.accepting.sort_unstable();
        a.accepting.dedup();
        a.transitions.sort_unstable();
        a.transitions.dedup();
        a
    }

    /// The canonical automaton for the empty language.
    pub fn empty() -> Self {
        Automaton::new(1, vec![0], vec![], vec![])
    }

    /// Accepts exactly the empty string.
    pub fn epsilon() -> Self {
        Automaton::new(1, vec![0], vec![0], vec![])
    }

    /// Accepts every string over the alphabet.
    pub fn sigma_star() -> Self {
        Automaton::new(
            1,
            vec![0],
            vec![0],
            vec![Transition {
                from: 0,
                lo: 0,
                hi: MAX_CHAR,
                to: 0,
            }],
        )
    }

    /// Accepts exactly the word `w`.
    pub fn singleton(w: &SmtString) -> Self {
        let n = w.len() as u32;
        let transitions = w
            .code_points()
            .iter()
            .enumerate()
            .map(|(i, &c)| Transition {
                from: i as StateId,
                lo: c,
                hi: c,
                to: i as StateId + 1,
            })
            .collect();
        Automaton::new(n + 1, vec![0], vec![n], transitions)
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn accepting(&self) -> &[StateId] {
        &self.accepting
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting.binary_search(&s).is_ok()
    }

    /// True iff no transition interval contains `c`.
    pub fn char_absent(&self, c: u32) -> bool {
        !self.transitions.iter().any(|t| t.lo <= c && c <= t.hi)
    }

    fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_states as usize];
        for (i, t) in self.transitions.iter().enumerate() {
            adj[t.from as usize].push(i);
        }
        adj
    }

    fn in_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_states as usize];
        for (i, t) in self.transitions.iter().enumerate() {
            adj[t.to as usize].push(i);
        }
        adj
    }

    /// Removes states that are not on any initial-to-accepting path, then
    /// renumbers the remainder in breadth-first discovery order and sorts
    /// the transition list. This is the canonical stored form.
    pub fn trim(&self) -> Automaton {
        let n = self.num_states as usize;
        // Forward reachability.
        let mut fwd = vec![false; n];
        let mut queue: VecDeque<StateId> = self.initial.iter().copied().collect();
        for &s in &self.initial {
            fwd[s as usize] = true;
        }
        let out = self.out_adjacency();
        while let Some(s) = queue.pop_front() {
            for &ti in &out[s as usize] {
                let to = self.transitions[ti].to;
                if !fwd[to as usize] {
                    fwd[to as usize] = true;
                    queue.push_back(to);
                }
            }
        }
        // Backward reachability from accepting states.
        let mut bwd = vec![false; n];
        let mut queue: VecDeque<StateId> = self.accepting.iter().copied().collect();
        for &s in &self.accepting {
            bwd[s as usize] = true;
        }
        let inade = self.in_adjacency();
        while let Some(s) = queue.pop_front() {
            for &ti in &inade[s as usize] {
                let from = self.transitions[ti].from;
                if !bwd[from as usize] {
                    bwd[from as usize] = true;
                    queue.push_back(from);
                }
            }
        }
        let useful: Vec<bool> = (0..n).map(|i| fwd[i] && bwd[i]).collect();
        if !useful.iter().any(|&u| u) {
            return Automaton::empty();
        }

        // BFS renumbering over useful states only. Neighbor order is the
        // sorted transition order, so equal structures renumber equally.
        let mut order: Vec<Option<StateId>> = vec![None; n];
        let mut next: StateId = 0;
        let mut queue = VecDeque::new();
        for &s in &self.initial {
            if useful[s as usize] && order[s as usize].is_none() {
                order[s as usize] = Some(next);
                next += 1;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &ti in &out[s as usize] {
                let to = self.transitions[ti].to;
                if useful[to as usize] && order[to as usize].is_none() {
                    order[to as usize] = Some(next);
                    next += 1;
                    queue.push_back(to);
                }
            }
        }

        let renum = |s: StateId| order[s as usize];
        let initial = self.initial.iter().filter_map(|&s| renum(s)).collect();
        let accepting = self.accepting.iter().filter_map(|&s| renum(s)).collect();
        let transitions = self
            .transitions
            .iter()
            .filter_map(|t| match (renum(t.from), renum(t.to)) {
                (Some(from), Some(to)) => Some(Transition {
                    from,
                    lo: t.lo,
                    hi: t.hi,
                    to,
                }),
                _ => None,
            })
            .collect();
        Automaton::new(next, initial, accepting, transitions)
    }

    /// True iff the language is empty. Works on untrimmed automata.
    pub fn is_empty(&self) -> bool {
        self.shortest_accepting_distance().is_none()
    }

    /// Length of a shortest accepted word, if any.
    fn shortest_accepting_distance(&self) -> Option<u64> {
        let n = self.num_states as usize;
        let mut dist = vec![u64::MAX; n];
        let mut queue = VecDeque::new();
        for &s in &self.initial {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
        let out = self.out_adjacency();
        let mut best = None;
        while let Some(s) = queue.pop_front() {
            if self.is_accepting(s) {
                best = Some(dist[s as usize]);
                break;
            }
            for &ti in &out[s as usize] {
                let to = self.transitions[ti].to as usize;
                if dist[to] == u64::MAX {
                    dist[to] = dist[s as usize] + 1;
                    queue.push_back(to as StateId);
                }
            }
        }
        best
    }

    /// Distance from each state to the nearest accepting state, `u64::MAX`
    /// when none is reachable.
    fn distance_to_accept(&self) -> Vec<u64> {
        let n = self.num_states as usize;
        let mut dist = vec![u64::MAX; n];
        let mut queue = VecDeque::new();
        for &s in &self.accepting {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
        let inade = self.in_adjacency();
        while let Some(s) = queue.pop_front() {
            for &ti in &inade[s as usize] {
                let from = self.transitions[ti].from as usize;
                if dist[from] == u64::MAX {
                    dist[from] = dist[s as usize] + 1;
                    queue.push_back(from as StateId);
                }
            }
        }
        dist
    }

    /// The shortest accepted word, with ties broken toward the smallest
    /// code point at the earliest position. `None` iff the language is
    /// empty.
    pub fn shortest_lex_witness(&self) -> Option<SmtString> {
        let dist = self.distance_to_accept();
        let mut remaining = self
            .initial
            .iter()
            .map(|&s| dist[s as usize])
            .min()
            .unwrap_or(u64::MAX);
        if remaining == u64::MAX {
            return None;
        }
        let out = self.out_adjacency();
        let mut current: BTreeSet<StateId> = self
            .initial
            .iter()
            .copied()
            .filter(|&s| dist[s as usize] == remaining)
            .collect();
        let mut word = SmtString::empty();
        while remaining > 0 {
            // Smallest code point that still admits a shortest completion.
            let mut best: Option<u32> = None;
            for &s in &current {
                for &ti in &out[s as usize] {
                    let t = &self.transitions[ti];
                    if dist[t.to as usize] == remaining - 1 {
                        best = Some(best.map_or(t.lo, |b: u32| b.min(t.lo)));
                    }
                }
            }
            let c = best.expect("distance bookkeeping guarantees a successor");
            let mut next = BTreeSet::new();
            for &s in &current {
                for &ti in &out[s as usize] {
                    let t = &self.transitions[ti];
                    if t.lo <= c && c <= t.hi && dist[t.to as usize] == remaining - 1 {
                        next.insert(t.to);
                    }
                }
            }
            word.push(c);
            current = next;
            remaining -= 1;
        }
        Some(word)
    }

    /// Shortest and longest accepted word lengths; `(None, _)` for the
    /// empty language, longest `None` meaning unbounded.
    pub fn length_range(&self) -> (Option<u64>, Option<u64>) {
        let trimmed = self.trim();
        let Some(shortest) = trimmed.shortest_accepting_distance() else {
            return (None, None);
        };
        // In a trimmed automaton every state is useful, so any cycle makes
        // accepted lengths unbounded.
        let n = trimmed.num_states as usize;
        let out = trimmed.out_adjacency();
        // Iterative DFS cycle check + longest-path DP over the DAG case.
        let mut color = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        let mut longest = vec![0u64; n]; // longest path from state to an accepting state
        let mut has_cycle = false;
        for root in 0..n {
            if color[root] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            color[root] = 1;
            while let Some(&mut (s, ref mut idx)) = stack.last_mut() {
                if *idx < out[s].len() {
                    let ti = out[s][*idx];
                    *idx += 1;
                    let to = trimmed.transitions[ti].to as usize;
                    match color[to] {
                        0 => {
                            color[to] = 1;
                            stack.push((to, 0));
                        }
                        1 => has_cycle = true,
                        _ => {}
                    }
                } else {
                    color[s] = 2;
                    let mut best = if trimmed.is_accepting(s as StateId) {
                        Some(0)
                    } else {
                        None
                    };
                    for &ti in &out[s] {
                        let to = trimmed.transitions[ti].to as usize;
                        if color[to] == 2 {
                            best = Some(best.unwrap_or(0).max(longest[to] + 1));
                        }
                    }
                    longest[s] = best.unwrap_or(0);
                    stack.pop();
                }
            }
            if has_cycle {
                return (Some(shortest), None);
            }
        }
        let max = trimmed
            .initial
            .iter()
            .map(|&s| longest[s as usize])
            .max()
            .unwrap_or(0);
        (Some(shortest), Some(max))
    }

    /// Language reversal: swap initial and accepting, flip every edge.
    pub fn reversed(&self) -> Automaton {
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                from: t.to,
                lo: t.lo,
                hi: t.hi,
                to: t.from,
            })
            .collect();
        Automaton::new(
            self.num_states,
            self.accepting.clone(),
            self.initial.clone(),
            transitions,
        )
        .trim()
    }

    /// Product automaton for the intersection, restricted to reachable
    /// state pairs. `cap` bounds the number of product states.
    pub fn intersect(&self, other: &Automaton, cap: Option<usize>) -> Result<Automaton, StateBlowup> {
        let mut index: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let mut initial = Vec::new();
        for &a in &self.initial {
            for &b in &other.initial {
                let next = index.len() as StateId;
                let id = *index.entry((a, b)).or_insert_with(|| {
                    queue.push_back((a, b));
                    next
                });
                initial.push(id);
            }
        }
        let out_a = self.out_adjacency();
        let out_b = other.out_adjacency();
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        while let Some((a, b)) = queue.pop_front() {
            let id = index[&(a, b)];
            if self.is_accepting(a) && other.is_accepting(b) {
                accepting.push(id);
            }
            for &ta in &out_a[a as usize] {
                let ta = &self.transitions[ta];
                for &tb in &out_b[b as usize] {
                    let tb = &other.transitions[tb];
                    let lo = ta.lo.max(tb.lo);
                    let hi = ta.hi.min(tb.hi);
                    if lo > hi {
                        continue;
                    }
                    let key = (ta.to, tb.to);
                    let next = index.len() as StateId;
                    let to = *index.entry(key).or_insert_with(|| {
                        queue.push_back(key);
                        next
                    });
                    if let Some(cap) = cap {
                        if index.len() > cap {
                            return Err(StateBlowup { cap });
                        }
                    }
                    transitions.push(Transition {
                        from: id,
                        lo,
                        hi,
                        to,
                    });
                }
            }
        }
        Ok(Automaton::new(index.len() as u32, initial, accepting, transitions).trim())
    }

    /// Concatenation by epsilon-free gluing: transitions leaving `other`'s
    /// initial states are copied onto `self`'s accepting states.
    pub fn concat(&self, other: &Automaton) -> Automaton {
        let offset = self.num_states;
        let mut transitions = self.transitions.clone();
        for t in &other.transitions {
            transitions.push(Transition {
                from: t.from + offset,
                lo: t.lo,
                hi: t.hi,
                to: t.to + offset,
            });
        }
        let other_accepts_epsilon = other.initial.iter().any(|&s| other.is_accepting(s));
        for t in &other.transitions {
            if other.initial.binary_search(&t.from).is_ok() {
                for &f in &self.accepting {
                    transitions.push(Transition {
                        from: f,
                        lo: t.lo,
                        hi: t.hi,
                        to: t.to + offset,
                    });
                }
            }
        }
        let mut accepting: Vec<StateId> = other.accepting.iter().map(|&s| s + offset).collect();
        if other_accepts_epsilon {
            accepting.extend_from_slice(&self.accepting);
        }
        Automaton::new(
            self.num_states + other.num_states,
            self.initial.clone(),
            accepting,
            transitions,
        )
        .trim()
    }

    /// For each state `q`, the pair (prefix automaton accepting at `q`,
    /// suffix automaton starting at `q`). On trimmed input every pair is
    /// non-empty, and state order is breadth-first from the initial states
    /// so short prefixes come first.
    pub fn split_at_states(&self) -> Vec<(Automaton, Automaton)> {
        (0..self.num_states)
            .map(|q| {
                let prefix = Automaton::new(
                    self.num_states,
                    self.initial.clone(),
                    vec![q],
                    self.transitions.clone(),
                )
                .trim();
                let suffix = Automaton::new(
                    self.num_states,
                    vec![q],
                    self.accepting.clone(),
                    self.transitions.clone(),
                )
                .trim();
                (prefix, suffix)
            })
            .collect()
    }

    /// Deterministic, complete automaton over refined interval boundaries.
    /// Always materializes a sink state for uncovered intervals; the sink
    /// is trimmed away later if useless.
    fn determinize_complete(&self, cap: usize) -> Result<Automaton, StateBlowup> {
        let out = self.out_adjacency();
        let mut index: BTreeMap<Vec<StateId>, StateId> = BTreeMap::new();
        let start: Vec<StateId> = self.initial.clone();
        index.insert(start.clone(), 0);
        let sink: StateId = 1;
        index.insert(Vec::new(), sink);
        let mut transitions = vec![Transition {
            from: sink,
            lo: 0,
            hi: MAX_CHAR,
            to: sink,
        }];
        let mut accepting = Vec::new();
        let mut queue = VecDeque::new();
        queue.push_back(start);
        if self.initial.iter().any(|&s| self.is_accepting(s)) {
            accepting.push(0);
        }
        while let Some(subset) = queue.pop_front() {
            let id = index[&subset];
            // Interval refinement: cut points at every lo and hi+1.
            let mut cuts: BTreeSet<u32> = BTreeSet::new();
            cuts.insert(0);
            cuts.insert(MAX_CHAR + 1);
            for &s in &subset {
                for &ti in &out[s as usize] {
                    let t = &self.transitions[ti];
                    cuts.insert(t.lo);
                    cuts.insert(t.hi + 1);
                }
            }
            let cuts: Vec<u32> = cuts.into_iter().collect();
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1] - 1);
                if lo > MAX_CHAR {
                    continue;
                }
                let mut targets: Vec<StateId> = Vec::new();
                for &s in &subset {
                    for &ti in &out[s as usize] {
                        let t = &self.transitions[ti];
                        if t.lo <= lo && hi <= t.hi {
                            targets.push(t.to);
                        }
                    }
                }
                targets.sort_unstable();
                targets.dedup();
                let to = if targets.is_empty() {
                    sink
                } else {
                    let next = index.len() as StateId;
                    match index.get(&targets) {
                        Some(&id) => id,
                        None => {
                            if index.len() >= cap {
                                return Err(StateBlowup { cap });
                            }
                            index.insert(targets.clone(), next);
                            if targets.iter().any(|&s| self.is_accepting(s)) {
                                accepting.push(next);
                            }
                            queue.push_back(targets);
                            next
                        }
                    }
                };
                transitions.push(Transition {
                    from: id,
                    lo,
                    hi,
                    to,
                });
            }
        }
        Ok(Automaton::new(
            index.len() as u32,
            vec![0],
            accepting,
            transitions,
        ))
    }

    /// Complement via subset construction and acceptance flip. `cap` bounds
    /// the determinized state count.
    pub fn complement(&self, cap: usize) -> Result<Automaton, StateBlowup> {
        let det = self.determinize_complete(cap)?;
        let accepting: Vec<StateId> = (0..det.num_states)
            .filter(|&s| !det.is_accepting(s))
            .collect();
        Ok(Automaton::new(det.num_states, det.initial, accepting, det.transitions).trim())
    }

    /// Words of length `lo ..= hi` (`hi = None` for unbounded).
    pub fn length_window(lo: u64, hi: Option<u64>) -> Automaton {
        match hi {
            Some(hi) if hi < lo => Automaton::empty(),
            Some(hi) => {
                let n = hi as u32 + 1;
                let transitions = (0..hi as u32)
                    .map(|i| Transition {
                        from: i,
                        lo: 0,
                        hi: MAX_CHAR,
                        to: i + 1,
                    })
                    .collect();
                let accepting = (lo as u32..=hi as u32).collect();
                Automaton::new(n, vec![0], accepting, transitions)
            }
            None => {
                let n = lo as u32 + 1;
                let mut transitions: Vec<Transition> = (0..lo as u32)
                    .map(|i| Transition {
                        from: i,
                        lo: 0,
                        hi: MAX_CHAR,
                        to: i + 1,
                    })
                    .collect();
                transitions.push(Transition {
                    from: lo as u32,
                    lo: 0,
                    hi: MAX_CHAR,
                    to: lo as u32,
                });
                Automaton::new(n, vec![0], vec![lo as u32], transitions)
            }
        }
    }

    /// Union without epsilon transitions: disjoint states, both initial
    /// sets kept.
    pub fn union(&self, other: &Automaton) -> Automaton {
        let offset = self.num_states;
        let mut transitions = self.transitions.clone();
        transitions.extend(other.transitions.iter().map(|t| Transition {
            from: t.from + offset,
            lo: t.lo,
            hi: t.hi,
            to: t.to + offset,
        }));
        let mut initial = self.initial.clone();
        initial.extend(other.initial.iter().map(|&s| s + offset));
        let mut accepting = self.accepting.clone();
        accepting.extend(other.accepting.iter().map(|&s| s + offset));
        Automaton::new(self.num_states + other.num_states, initial, accepting, transitions).trim()
    }

    /// Kleene star: a fresh initial+accepting state that can start a pass,
    /// and restart edges from every accepting state.
    pub fn star(&self) -> Automaton {
        let s0 = self.num_states;
        let mut transitions = self.transitions.clone();
        let initial_outs: Vec<Transition> = self
            .transitions
            .iter()
            .filter(|t| self.initial.binary_search(&t.from).is_ok())
            .copied()
            .collect();
        for t in &initial_outs {
            transitions.push(Transition {
                from: s0,
                lo: t.lo,
                hi: t.hi,
                to: t.to,
            });
            for &f in &self.accepting {
                transitions.push(Transition {
                    from: f,
                    lo: t.lo,
                    hi: t.hi,
                    to: t.to,
                });
            }
        }
        let mut accepting = self.accepting.clone();
        accepting.push(s0);
        Automaton::new(self.num_states + 1, vec![s0], accepting, transitions).trim()
    }

    /// GraphViz rendering for debugging dumps.
    pub fn to_dot(&self, name: &str) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{name}\" {{");
        let _ = writeln!(s, "  rankdir=LR; node [shape=circle];");
        for &q in &self.accepting {
            let _ = writeln!(s, "  s{q} [shape=doublecircle];");
        }
        for &q in &self.initial {
            let _ = writeln!(s, "  init{q} [shape=point]; init{q} -> s{q};");
        }
        for t in &self.transitions {
            let label = if t.lo == t.hi {
                format!("{:#x}", t.lo)
            } else {
                format!("{:#x}-{:#x}", t.lo, t.hi)
            };
            let _ = writeln!(s, "  s{} -> s{} [label=\"{label}\"];", t.from, t.to);
        }
        s.push_str("}\n");
        s
    }
}

/// Builder for constructions that are naturally expressed with epsilon
/// transitions (image computations, gluing with output chains). `finish`
/// eliminates the epsilons and trims.
pub struct NfaBuilder {
    num_states: u32,
    initial: Vec<StateId>,
    accepting: Vec<StateId>,
    transitions: Vec<Transition>,
    epsilons: Vec<(StateId, StateId)>,
}

impl NfaBuilder {
    pub fn new() -> Self {
        NfaBuilder {
            num_states: 0,
            initial: Vec::new(),
            accepting: Vec::new(),
            transitions: Vec::new(),
            epsilons: Vec::new(),
        }
    }

    pub fn add_state(&mut self) -> StateId {
        let s = self.num_states;
        self.num_states += 1;
        s
    }

    pub fn mark_initial(&mut self, s: StateId) {
        self.initial.push(s);
    }

    pub fn mark_accepting(&mut self, s: StateId) {
        self.accepting.push(s);
    }

    pub fn add_transition(&mut self, from: StateId, lo: u32, hi: u32, to: StateId) {
        debug_assert!(lo <= hi && hi <= MAX_CHAR);
        self.transitions.push(Transition { from, lo, hi, to });
    }

    pub fn add_epsilon(&mut self, from: StateId, to: StateId) {
        self.epsilons.push((from, to));
    }

    /// Adds a chain consuming exactly `w` between two fresh endpoints,
    /// returning `(entry, exit)`.
    pub fn add_word_chain(&mut self, w: &SmtString) -> (StateId, StateId) {
        let entry = self.add_state();
        let mut cur = entry;
        for &c in w.code_points() {
            let next = self.add_state();
            self.add_transition(cur, c, c, next);
            cur = next;
        }
        (entry, cur)
    }

    /// Epsilon elimination: each state inherits the outgoing interval
    /// transitions and acceptance of its epsilon closure.
    pub fn finish(self) -> Automaton {
        let n = self.num_states as usize;
        let mut eps_adj = vec![Vec::new(); n];
        for &(a, b) in &self.epsilons {
            eps_adj[a as usize].push(b);
        }
        let mut accepting_set = vec![false; n];
        for &s in &self.accepting {
            accepting_set[s as usize] = true;
        }
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        for s in 0..n as StateId {
            // Closure of s.
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s as usize] = true;
            let mut accept = false;
            while let Some(q) = stack.pop() {
                if accepting_set[q as usize] {
                    accept = true;
                }
                for &r in &eps_adj[q as usize] {
                    if !seen[r as usize] {
                        seen[r as usize] = true;
                        stack.push(r);
                    }
                }
            }
            if accept {
                accepting.push(s);
            }
            for t in &self.transitions {
                if seen[t.from as usize] {
                    transitions.push(Transition {
                        from: s,
                        lo: t.lo,
                        hi: t.hi,
                        to: t.to,
                    });
                }
            }
        }
        Automaton::new(self.num_states, self.initial, accepting, transitions).trim()
    }
}

impl Default for NfaBuilder {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests;
