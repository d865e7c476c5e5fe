//! Hash-consed automaton storage with memoized operations.
//!
//! Every automaton is trimmed and canonically numbered before interning, so
//! structurally equal results of different construction paths collapse to
//! one handle and operation memo tables get real hit rates. Handles are
//! plain indices; all mutation goes through `&mut AutomatonDb`, which
//! serializes writers by construction.

use super::{Automaton, StateBlowup, StateId};
use crate::strings::SmtString;
use std::collections::HashMap;

/// Handle to an interned automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AutomatonRef(u32);

impl AutomatonRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interning store plus memo tables for the automata operations the solver
/// applies repeatedly to the same operands.
pub struct AutomatonDb {
    autos: Vec<Automaton>,
    index: HashMap<Automaton, AutomatonRef>,
    empty: AutomatonRef,
    epsilon: AutomatonRef,
    sigma_star: AutomatonRef,
    memo_intersect: HashMap<(AutomatonRef, AutomatonRef), Result<AutomatonRef, StateBlowup>>,
    memo_complement: HashMap<(AutomatonRef, usize), Result<AutomatonRef, StateBlowup>>,
    memo_concat: HashMap<(AutomatonRef, AutomatonRef), AutomatonRef>,
    memo_reverse: HashMap<AutomatonRef, AutomatonRef>,
    memo_splits: HashMap<AutomatonRef, Vec<(AutomatonRef, AutomatonRef)>>,
    memo_window: HashMap<(u64, Option<u64>), AutomatonRef>,
    memo_length_range: HashMap<AutomatonRef, (Option<u64>, Option<u64>)>,
    memo_singleton: HashMap<AutomatonRef, Option<SmtString>>,
}

impl AutomatonDb {
    pub fn new() -> Self {
        let mut db = AutomatonDb {
            autos: Vec::new(),
            index: HashMap::new(),
            empty: AutomatonRef(0),
            epsilon: AutomatonRef(0),
            sigma_star: AutomatonRef(0),
            memo_intersect: HashMap::new(),
            memo_complement: HashMap::new(),
            memo_concat: HashMap::new(),
            memo_reverse: HashMap::new(),
            memo_splits: HashMap::new(),
            memo_window: HashMap::new(),
            memo_length_range: HashMap::new(),
            memo_singleton: HashMap::new(),
        };
        db.empty = db.intern(Automaton::empty());
        db.epsilon = db.intern(Automaton::epsilon());
        db.sigma_star = db.intern(Automaton::sigma_star());
        db
    }

    /// Trims, canonicalizes, and interns; equal canonical forms share a
    /// handle.
    pub fn intern(&mut self, a: Automaton) -> AutomatonRef {
        let canonical = a.trim();
        if let Some(&r) = self.index.get(&canonical) {
            return r;
        }
        let r = AutomatonRef(self.autos.len() as u32);
        self.index.insert(canonical.clone(), r);
        self.autos.push(canonical);
        r
    }

    pub fn get(&self, r: AutomatonRef) -> &Automaton {
        &self.autos[r.index()]
    }

    pub fn empty(&self) -> AutomatonRef {
        self.empty
    }

    pub fn epsilon(&self) -> AutomatonRef {
        self.epsilon
    }

    pub fn sigma_star(&self) -> AutomatonRef {
        self.sigma_star
    }

    pub fn is_universal_handle(&self, r: AutomatonRef) -> bool {
        r == self.sigma_star
    }

    pub fn is_empty_lang(&self, r: AutomatonRef) -> bool {
        // Stored automata are trimmed, so emptiness is "no accepting state".
        self.get(r).accepting().is_empty()
    }

    pub fn singleton(&mut self, w: &SmtString) -> AutomatonRef {
        let r = self.intern(Automaton::singleton(w));
        self.memo_singleton.insert(r, Some(w.clone()));
        r
    }

    /// If the language is exactly one word, returns it. Detected
    /// structurally on the trimmed form, so products of singletons are
    /// recognized too.
    pub fn singleton_word(&mut self, r: AutomatonRef) -> Option<SmtString> {
        if let Some(w) = self.memo_singleton.get(&r) {
            return w.clone();
        }
        let a = self.get(r);
        let word = singleton_of(a);
        self.memo_singleton.insert(r, word.clone());
        word
    }

    pub fn intersect(
        &mut self,
        a: AutomatonRef,
        b: AutomatonRef,
        cap: usize,
    ) -> Result<AutomatonRef, StateBlowup> {
        if a == b {
            return Ok(a);
        }
        if a == self.sigma_star {
            return Ok(b);
        }
        if b == self.sigma_star {
            return Ok(a);
        }
        if a == self.empty || b == self.empty {
            return Ok(self.empty);
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(r) = self.memo_intersect.get(&key) {
            return r.clone();
        }
        let result = self
            .get(key.0)
            .intersect(self.get(key.1), Some(cap))
            .map(|auto| self.intern(auto));
        self.memo_intersect.insert(key, result.clone());
        result
    }

    /// Intersection of several constraints, left-folded.
    pub fn intersect_all(
        &mut self,
        refs: &[AutomatonRef],
        cap: usize,
    ) -> Result<AutomatonRef, StateBlowup> {
        let mut acc = self.sigma_star;
        for &r in refs {
            acc = self.intersect(acc, r, cap)?;
            if self.is_empty_lang(acc) {
                return Ok(self.empty);
            }
        }
        Ok(acc)
    }

    pub fn complement(
        &mut self,
        a: AutomatonRef,
        cap: usize,
    ) -> Result<AutomatonRef, StateBlowup> {
        let key = (a, cap);
        if let Some(r) = self.memo_complement.get(&key) {
            return r.clone();
        }
        let result = self
            .get(a)
            .complement(cap)
            .map(|auto| self.intern(auto));
        self.memo_complement.insert(key, result.clone());
        result
    }

    pub fn concat(&mut self, a: AutomatonRef, b: AutomatonRef) -> AutomatonRef {
        if a == self.empty || b == self.empty {
            return self.empty;
        }
        if a == self.epsilon {
            return b;
        }
        if b == self.epsilon {
            return a;
        }
        if let Some(&r) = self.memo_concat.get(&(a, b)) {
            return r;
        }
        let auto = self.get(a).concat(self.get(b));
        let r = self.intern(auto);
        self.memo_concat.insert((a, b), r);
        r
    }

    pub fn reverse(&mut self, a: AutomatonRef) -> AutomatonRef {
        if let Some(&r) = self.memo_reverse.get(&a) {
            return r;
        }
        let auto = self.get(a).reversed();
        let r = self.intern(auto);
        self.memo_reverse.insert(a, r);
        // Reversal is an involution on trimmed forms' languages; seed the
        // inverse direction so round trips stay O(1).
        self.memo_reverse.entry(r).or_insert(a);
        r
    }

    /// Prefix/suffix split pairs, one per state of `a`, in the stored
    /// breadth-first state order (short prefixes first).
    pub fn split_at_states(&mut self, a: AutomatonRef) -> Vec<(AutomatonRef, AutomatonRef)> {
        if let Some(pairs) = self.memo_splits.get(&a) {
            return pairs.clone();
        }
        let splits = self.get(a).split_at_states();
        let pairs: Vec<(AutomatonRef, AutomatonRef)> = splits
            .into_iter()
            .map(|(p, s)| (self.intern(p), self.intern(s)))
            .collect();
        self.memo_splits.insert(a, pairs.clone());
        pairs
    }

    pub fn length_window(&mut self, lo: u64, hi: Option<u64>) -> AutomatonRef {
        if let Some(&r) = self.memo_window.get(&(lo, hi)) {
            return r;
        }
        let r = self.intern(Automaton::length_window(lo, hi));
        self.memo_window.insert((lo, hi), r);
        r
    }

    /// Shortest/longest accepted lengths, memoized per handle.
    pub fn length_range(&mut self, a: AutomatonRef) -> (Option<u64>, Option<u64>) {
        if let Some(&r) = self.memo_length_range.get(&a) {
            return r;
        }
        let range = self.get(a).length_range();
        self.memo_length_range.insert(a, range);
        range
    }

    /// Shortest-lex witness of non-emptiness.
    pub fn witness(&self, a: AutomatonRef) -> Option<SmtString> {
        self.get(a).shortest_lex_witness()
    }

    pub fn num_states(&self, a: AutomatonRef) -> usize {
        self.get(a).num_states() as usize
    }
}

impl Default for AutomatonDb {
    fn default() -> Self {
        Self::new()
    }
}

/// Structural singleton check on a trimmed automaton: a single chain of
/// width-1 intervals with acceptance only at its end.
fn singleton_of(a: &Automaton) -> Option<SmtString> {
    if a.initial().len() != 1 || a.accepting().len() != 1 {
        return None;
    }
    let mut word = SmtString::empty();
    let mut state: StateId = a.initial()[0];
    let mut steps = 0u32;
    loop {
        let outs: Vec<_> = a.transitions().iter().filter(|t| t.from == state).collect();
        let at_accept = a.is_accepting(state);
        match outs.len() {
            0 => return if at_accept { Some(word) } else { None },
            1 if !at_accept => {
                let t = outs[0];
                if t.lo != t.hi {
                    return None;
                }
                word.push(t.lo);
                state = t.to;
                steps += 1;
                if steps > a.num_states() {
                    return None; // cycle
                }
            }
            _ => return None,
        }
    }
}
