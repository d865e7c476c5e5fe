//! Functional rational transducers for constant-pattern replacement.
//!
//! A [`Transducer`] reads one code point per step and emits an output
//! template: a sequence of literal words and at most one `Copy` marker,
//! which stands for the consumed code point itself. Each state is total
//! and deterministic over the alphabet, so applying a transducer to a
//! concrete word yields exactly one output.
//!
//! The constructions here cover `replace` and `replace_all` with a
//! constant, nonempty search pattern, built on the pattern's
//! prefix-function (failure) automaton so every input is scanned once.
//! Both the pre-image and the post-image of a regular language under a
//! transducer are computed exactly as product automata.

use std::collections::HashMap;

use crate::automata::{Automaton, NfaBuilder, StateBlowup, StateId, Transition};
use crate::strings::{SmtString, MAX_CHAR};

/// One piece of an output template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    /// Emit this word.
    Lit(SmtString),
    /// Emit the code point consumed by the transition.
    Copy,
}

/// A transducer transition over an input code-point interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransducerEdge {
    pub from: StateId,
    pub lo: u32,
    pub hi: u32,
    pub to: StateId,
    pub output: Vec<Piece>,
}

/// A deterministic, total, functional transducer. Every state is
/// accepting; `final_output[q]` is appended when input ends in state `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transducer {
    num_states: u32,
    initial: StateId,
    edges: Vec<TransducerEdge>,
    final_output: Vec<SmtString>,
}

impl Transducer {
    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn edges(&self) -> &[TransducerEdge] {
        &self.edges
    }

    /// The identity transducer: copies its input unchanged.
    pub fn identity() -> Transducer {
        Transducer {
            num_states: 1,
            initial: 0,
            edges: vec![TransducerEdge {
                from: 0,
                lo: 0,
                hi: MAX_CHAR,
                to: 0,
                output: vec![Piece::Copy],
            }],
            final_output: vec![SmtString::empty()],
        }
    }

    /// Run the transducer on a concrete word.
    pub fn apply(&self, w: &SmtString) -> SmtString {
        let mut state = self.initial;
        let mut out = SmtString::empty();
        for &c in w.code_points() {
            let edge = self
                .edges
                .iter()
                .find(|e| e.from == state && e.lo <= c && c <= e.hi)
                .expect("transducer states are total over the alphabet");
            for piece in &edge.output {
                match piece {
                    Piece::Lit(word) => out = out.concat(word),
                    Piece::Copy => out.push(c),
                }
            }
            state = edge.to;
        }
        out.concat(&self.final_output[state as usize])
    }

    /// `{ w | apply(w) ∈ L(out) }`, exactly.
    ///
    /// Product states pair a transducer state with an `out` state; a
    /// transition's template advances the `out` component: literal pieces
    /// step it by a fixed word, `Copy` steps it by the consumed code
    /// point, further constraining the input interval.
    pub fn pre_image(&self, out: &Automaton, cap: usize) -> Result<Automaton, StateBlowup> {
        let t_states = self.num_states as usize;
        let o_states = out.num_states() as usize;
        if t_states.saturating_mul(o_states) > cap {
            return Err(StateBlowup { cap });
        }
        let id = |p: StateId, s: StateId| -> StateId { p * o_states as u32 + s };
        let num = (t_states * o_states) as u32;

        let mut transitions = Vec::new();
        for e in &self.edges {
            for s in 0..o_states as u32 {
                // Carrier: (out state, input interval) pairs after the
                // pieces processed so far.
                let mut carrier: Vec<(StateId, u32, u32)> = vec![(s, e.lo, e.hi)];
                for piece in &e.output {
                    let mut next = Vec::new();
                    match piece {
                        Piece::Lit(word) => {
                            for (u, lo, hi) in carrier {
                                for v in step_states(out, u, word) {
                                    next.push((v, lo, hi));
                                }
                            }
                        }
                        Piece::Copy => {
                            for (u, lo, hi) in carrier {
                                for tr in out.transitions() {
                                    if tr.from != u {
                                        continue;
                                    }
                                    let l = lo.max(tr.lo);
                                    let h = hi.min(tr.hi);
                                    if l <= h {
                                        next.push((tr.to, l, h));
                                    }
                                }
                            }
                        }
                    }
                    carrier = next;
                    carrier.sort_unstable();
                    carrier.dedup();
                }
                for (u, lo, hi) in carrier {
                    transitions.push(Transition {
                        from: id(e.from, s),
                        lo,
                        hi,
                        to: id(e.to, u),
                    });
                }
            }
        }

        let mut accepting = Vec::new();
        for q in 0..t_states as u32 {
            for s in 0..o_states as u32 {
                let landed = step_states(out, s, &self.final_output[q as usize]);
                if landed.iter().any(|v| out.is_accepting(*v)) {
                    accepting.push(id(q, s));
                }
            }
        }
        let initial: Vec<StateId> = out
            .initial()
            .iter()
            .map(|&s| id(self.initial, s))
            .collect();
        Ok(Automaton::new(num, initial, accepting, transitions).trim())
    }

    /// `{ apply(w) | w ∈ L(inp) }`, exactly (templates here contain at
    /// most one `Copy`, so the emitted code point stays correlated with
    /// the consumed one).
    pub fn post_image(&self, inp: &Automaton, cap: usize) -> Result<Automaton, StateBlowup> {
        let t_states = self.num_states as usize;
        let i_states = inp.num_states() as usize;
        if t_states.saturating_mul(i_states) > cap {
            return Err(StateBlowup { cap });
        }
        let mut b = NfaBuilder::new();
        let mut pair_ids: HashMap<(StateId, StateId), u32> = HashMap::new();
        let mut node = |b: &mut NfaBuilder, p: StateId, s: StateId| -> u32 {
            *pair_ids.entry((p, s)).or_insert_with(|| b.add_state())
        };

        for tr in inp.transitions() {
            for e in &self.edges {
                debug_assert!(
                    e.output.iter().filter(|p| matches!(p, Piece::Copy)).count() <= 1,
                    "post-image requires at most one Copy per template"
                );
                let lo = tr.lo.max(e.lo);
                let hi = tr.hi.min(e.hi);
                if lo > hi {
                    continue;
                }
                let src = node(&mut b, e.from, tr.from);
                let dst = node(&mut b, e.to, tr.to);
                // Thread the emitted pieces between src and dst.
                let mut cur = src;
                for piece in &e.output {
                    match piece {
                        Piece::Lit(word) => {
                            for &c in word.code_points() {
                                let nxt = b.add_state();
                                b.add_transition(cur, c, c, nxt);
                                cur = nxt;
                            }
                        }
                        Piece::Copy => {
                            let nxt = b.add_state();
                            b.add_transition(cur, lo, hi, nxt);
                            cur = nxt;
                        }
                    }
                }
                b.add_epsilon(cur, dst);
            }
        }
        for s in inp.initial() {
            let n = node(&mut b, self.initial, *s);
            b.mark_initial(n);
        }
        for q in 0..self.num_states {
            for s in inp.accepting() {
                let n = node(&mut b, q, *s);
                let fin = &self.final_output[q as usize];
                let mut cur = n;
                for &c in fin.code_points() {
                    let nxt = b.add_state();
                    b.add_transition(cur, c, c, nxt);
                    cur = nxt;
                }
                b.mark_accepting(cur);
            }
        }
        Ok(b.finish().trim())
    }
}

/// All states reachable in `a` from `from` by reading exactly `word`.
fn step_states(a: &Automaton, from: StateId, word: &SmtString) -> Vec<StateId> {
    let mut cur = vec![from];
    for &c in word.code_points() {
        let mut next = Vec::new();
        for &u in &cur {
            for tr in a.transitions() {
                if tr.from == u && tr.lo <= c && c <= tr.hi {
                    next.push(tr.to);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        cur = next;
        if cur.is_empty() {
            break;
        }
    }
    cur
}

/// Constant-pattern replacement specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplaceSpec {
    pub pattern: SmtString,
    pub replacement: SmtString,
}

/// Longest proper prefix of `pattern` that is also a suffix of
/// `pattern[..q] + c`, via the classic prefix-function walk.
fn kmp_next(pattern: &[u32], fail: &[usize], q: usize, c: u32) -> usize {
    let mut k = q;
    loop {
        if pattern[k] == c {
            return k + 1;
        }
        if k == 0 {
            return 0;
        }
        // Border of the length-k prefix; strictly decreases k.
        k = fail[k - 1];
    }
}

/// `fail[q]` = length of the longest proper prefix of `pattern[..q]`
/// that is also a suffix of it.
fn prefix_function(pattern: &[u32]) -> Vec<usize> {
    let m = pattern.len();
    let mut fail = vec![0usize; m];
    let mut k = 0;
    for q in 1..m {
        while k > 0 && pattern[q] != pattern[k] {
            k = fail[k - 1];
        }
        if pattern[q] == pattern[k] {
            k += 1;
        }
        fail[q] = k;
    }
    fail
}

fn prefix_word(pattern: &[u32], len: usize) -> SmtString {
    SmtString::from_code_points(pattern[..len].to_vec())
}

/// Shared body of the two replace builders. `stop_after_first` routes a
/// completed match into a copy-everything state instead of restarting
/// the scan.
fn build_replace(spec: &ReplaceSpec, stop_after_first: bool) -> Transducer {
    let pattern = spec.pattern.code_points();
    let m = pattern.len();
    assert!(m >= 1, "empty patterns are rewritten before construction");
    let fail = prefix_function(pattern);
    let copy_state = m as u32; // only used when stop_after_first
    let num_states = if stop_after_first { m as u32 + 1 } else { m as u32 };

    let mut edges = Vec::new();
    for q in 0..m {
        // Behavior differs only between the distinct code points that
        // occur in the pattern; everything else fails straight to 0.
        let mut specials: Vec<u32> = pattern.to_vec();
        specials.sort_unstable();
        specials.dedup();
        for &c in &specials {
            let (to, output) = if c == pattern[q] {
                if q + 1 == m {
                    let to = if stop_after_first { copy_state } else { 0 };
                    (to, vec![Piece::Lit(spec.replacement.clone())])
                } else {
                    (q as u32 + 1, vec![])
                }
            } else {
                let next = kmp_next(pattern, &fail, q, c);
                debug_assert!(next <= q);
                if next == 0 {
                    (0, vec![Piece::Lit(prefix_word(pattern, q)), Piece::Copy])
                } else {
                    (next as u32, vec![Piece::Lit(prefix_word(pattern, q + 1 - next))])
                }
            };
            edges.push(TransducerEdge {
                from: q as u32,
                lo: c,
                hi: c,
                to,
                output: simplify(output),
            });
        }
        // Complement intervals of the special set.
        let mut lo = 0u32;
        for &c in specials.iter().chain(std::iter::once(&(MAX_CHAR + 1))) {
            if lo < c {
                edges.push(TransducerEdge {
                    from: q as u32,
                    lo,
                    hi: c - 1,
                    to: 0,
                    output: simplify(vec![
                        Piece::Lit(prefix_word(pattern, q)),
                        Piece::Copy,
                    ]),
                });
            }
            lo = c.saturating_add(1);
            if lo > MAX_CHAR {
                break;
            }
        }
    }
    if stop_after_first {
        edges.push(TransducerEdge {
            from: copy_state,
            lo: 0,
            hi: MAX_CHAR,
            to: copy_state,
            output: vec![Piece::Copy],
        });
    }

    let mut final_output: Vec<SmtString> =
        (0..m).map(|q| prefix_word(pattern, q)).collect();
    if stop_after_first {
        final_output.push(SmtString::empty());
    }
    Transducer {
        num_states,
        initial: 0,
        edges,
        final_output,
    }
}

fn simplify(pieces: Vec<Piece>) -> Vec<Piece> {
    pieces
        .into_iter()
        .filter(|p| !matches!(p, Piece::Lit(w) if w.is_empty()))
        .collect()
}

/// Transducer replacing every leftmost, non-overlapping occurrence.
pub fn build_replace_all(spec: &ReplaceSpec) -> Transducer {
    build_replace(spec, false)
}

/// Transducer replacing only the leftmost occurrence.
pub fn build_replace_first(spec: &ReplaceSpec) -> Transducer {
    build_replace(spec, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn s(x: &str) -> SmtString {
        SmtString::from(x)
    }

    fn spec(p: &str, r: &str) -> ReplaceSpec {
        ReplaceSpec {
            pattern: s(p),
            replacement: s(r),
        }
    }

    #[test]
    fn replace_all_matches_reference_scan() {
        let cases = [
            (("&", "&amp;"), "a&b&", "a&amp;b&amp;"),
            (("x", "y"), "abc", "abc"),
            (("aa", "b"), "aaa", "ba"),
            (("ab", ""), "xabab", "x"),
            (("aba", "c"), "ababa", "cba"),
        ];
        for ((p, r), input, expected) in cases {
            let t = build_replace_all(&spec(p, r));
            assert_eq!(t.apply(&s(input)), s(expected), "replace_all {p}->{r} on {input}");
            assert_eq!(
                oracle::replace_all(&s(input), &s(p), &s(r)),
                s(expected),
                "oracle agrees"
            );
        }
    }

    #[test]
    fn replace_first_matches_reference_scan() {
        let cases = [
            (("a", "b"), "aa", "ba"),
            (("ab", ""), "xabab", "xab"),
            (("z", "q"), "abc", "abc"),
        ];
        for ((p, r), input, expected) in cases {
            let t = build_replace_first(&spec(p, r));
            assert_eq!(t.apply(&s(input)), s(expected));
            assert_eq!(oracle::replace(&s(input), &s(p), &s(r)), s(expected));
        }
    }

    /// Exhaustive agreement with the scan-based reference over all words
    /// up to length 5 of a small alphabet.
    #[test]
    fn transducers_agree_with_oracle_exhaustively() {
        let alphabet = [b'a' as u32, b'b' as u32, b'&' as u32];
        let specs = [
            spec("a", "bb"),
            spec("ab", "a"),
            spec("aa", "b"),
            spec("&", "&amp;"),
            spec("aba", ""),
        ];
        for sp in &specs {
            let all = build_replace_all(sp);
            let first = build_replace_first(sp);
            for w in all_words(&alphabet, 5) {
                assert_eq!(
                    all.apply(&w),
                    oracle::replace_all(&w, &sp.pattern, &sp.replacement),
                    "replace_all on {w:?}"
                );
                assert_eq!(
                    first.apply(&w),
                    oracle::replace(&w, &sp.pattern, &sp.replacement),
                    "replace_first on {w:?}"
                );
            }
        }
    }

    fn all_words(alphabet: &[u32], max_len: usize) -> Vec<SmtString> {
        let mut out = vec![SmtString::empty()];
        let mut layer = vec![SmtString::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for &c in alphabet {
                    let mut v = w.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn pre_image_agrees_with_apply_then_test() {
        // Alphabet of the worked entity-escaping example.
        let alphabet: Vec<u32> = "&amp;".chars().map(|c| c as u32).collect();
        let mut alphabet = alphabet;
        alphabet.sort_unstable();
        alphabet.dedup();

        let t = build_replace_all(&spec("&", "&amp;"));
        let out = Automaton::singleton(&s("&amp;"));
        let pre = t.pre_image(&out, 10_000).unwrap();
        for w in all_words(&alphabet, 5) {
            let expected = oracle::membership(&out, &t.apply(&w));
            assert_eq!(
                oracle::membership(&pre, &w),
                expected,
                "pre-image membership for {w:?}"
            );
        }
        // Spot checks: "&" maps to "&amp;"; "&amp;" itself maps to
        // "&amp;amp;" (its ampersand is escaped again), so it is not in
        // the pre-image; "&&" maps to "&amp;&amp;".
        assert!(oracle::membership(&pre, &s("&")));
        assert!(!oracle::membership(&pre, &s("&amp;")));
        assert!(!oracle::membership(&pre, &s("&&")));
    }

    #[test]
    fn pre_image_identity_and_empty() {
        let idt = Transducer::identity();
        let out = Automaton::singleton(&s("ab"));
        let pre = idt.pre_image(&out, 1000).unwrap();
        assert!(oracle::membership(&pre, &s("ab")));
        assert!(!oracle::membership(&pre, &s("a")));

        let empty = Automaton::empty();
        let pre = idt.pre_image(&empty, 1000).unwrap();
        assert!(pre.is_empty());
    }

    #[test]
    fn post_image_collects_exact_outputs() {
        // {a, aa} under a->bb gives {bb, bbbb}.
        let t = build_replace_all(&spec("a", "bb"));
        let inp = Automaton::singleton(&s("a")).union(&Automaton::singleton(&s("aa")));
        let post = t.post_image(&inp, 10_000).unwrap();
        assert!(oracle::membership(&post, &s("bb")));
        assert!(oracle::membership(&post, &s("bbbb")));
        assert!(!oracle::membership(&post, &s("bbb")));
        assert!(!oracle::membership(&post, &s("a")));

        let empty_post = t.post_image(&Automaton::empty(), 1000).unwrap();
        assert!(empty_post.is_empty());
    }

    /// Each output-language member must be hit by some bounded input, and
    /// each bounded input's output must be in the language.
    #[test]
    fn post_image_soundness_and_tightness() {
        let alphabet = [b'a' as u32, b'b' as u32, b'c' as u32];
        let specs = [spec("ab", "c"), spec("aa", "b"), spec("c", "aa")];
        for sp in &specs {
            let t = build_replace_all(sp);
            // Input language: all words over {a,b} up to length 4 whose
            // automaton is the length window.
            let inp = Automaton::length_window(0, Some(4));
            let post = t.post_image(&inp, 100_000).unwrap();
            let mut outputs = std::collections::BTreeSet::new();
            for w in all_words(&alphabet, 4) {
                let o = t.apply(&w);
                assert!(
                    oracle::membership(&post, &o),
                    "output {o:?} of {w:?} missing from post-image"
                );
                outputs.insert(o);
            }
            // Tightness on short members: every short word accepted by the
            // post-image automaton over this alphabet arises as an output.
            // (Inputs of length ≤ 4 can only produce outputs of length
            // ≤ 4·max(1,|repl|), so the enumeration above is exhaustive
            // for members of length ≤ 4.)
            for w in all_words(&alphabet, 4) {
                if oracle::membership(&post, &w) {
                    assert!(
                        outputs.contains(&w),
                        "post-image member {w:?} has no bounded origin"
                    );
                }
            }
        }
    }

    #[test]
    fn identity_post_image_preserves_language() {
        let idt = Transducer::identity();
        let inp = Automaton::singleton(&s("ab")).union(&Automaton::singleton(&s("ba")));
        let post = idt.post_image(&inp, 1000).unwrap();
        for w in all_words(&[97, 98], 3) {
            assert_eq!(
                oracle::membership(&post, &w),
                oracle::membership(&inp, &w)
            );
        }
    }

    #[test]
    fn determinism_every_state_total() {
        for sp in [spec("ab", "x"), spec("aab", ""), spec("&", "&amp;")] {
            for t in [build_replace_all(&sp), build_replace_first(&sp)] {
                for q in 0..t.num_states() {
                    // The intervals leaving q must partition the alphabet.
                    let mut ivs: Vec<(u32, u32)> = t
                        .edges()
                        .iter()
                        .filter(|e| e.from == q)
                        .map(|e| (e.lo, e.hi))
                        .collect();
                    ivs.sort_unstable();
                    let mut expect = 0u64;
                    for (lo, hi) in ivs {
                        assert_eq!(lo as u64, expect, "gap or overlap at state {q}");
                        expect = hi as u64 + 1;
                    }
                    assert_eq!(expect, MAX_CHAR as u64 + 1, "state {q} not total");
                }
            }
        }
    }
}
