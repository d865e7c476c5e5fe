//! Regular-expression terms compiled to interval automata, and the inline
//! automaton-literal format.
//!
//! # Automaton literal grammar
//!
//! An automaton literal is a string of the form
//!
//! ```text
//! automaton NAME {
//!     init STATE;
//!     STATE -> STATE [LO, HI];   (any number of transition items)
//!     accepting STATE (, STATE)*;
//! };
//! ```
//!
//! where `NAME` and `STATE` are identifiers (`[A-Za-z_][A-Za-z0-9_]*`),
//! `LO`/`HI` are decimal code points with `0 <= LO <= HI <= 0x2FFFF`, and
//! whitespace between tokens is free-form (`s1 ->s1[0,65535]` is fine).
//! Exactly one `init` item and exactly one `accepting` item (listing one or
//! more states) are required; items may appear in any order; states are
//! declared implicitly by use. The trailing `;` after `}` is optional.

use crate::automata::{Automaton, AutomatonDb, AutomatonRef, StateBlowup, StateId, Transition};
use crate::frontend::ast::Term;
use crate::strings::{SmtString, MAX_CHAR};
use std::collections::HashMap;
use thiserror::Error;

/// Hard cap on `re.loop` unfolding.
pub const LOOP_UNFOLD_CAP: u32 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    /// `str.to_re` (or `re.range`) applied to something other than a string
    /// literal. Only constant regexes are compilable.
    #[error("regex operand must be a string literal")]
    NonConstantRegex,
    /// `re.loop` bounds exceed the unfold cap.
    #[error("re.loop bound {bound} exceeds the unfold cap {cap}")]
    UnfoldCap { bound: u32, cap: u32 },
    /// Complement or intersection inside the regex blew the state budget.
    #[error(transparent)]
    Blowup(#[from] StateBlowup),
    /// The term is not of sort RegLan.
    #[error("expected a regular-expression term")]
    NotARegex,
}

/// Compiles a RegLan term to an interned automaton. `state_cap` bounds
/// determinization inside `re.comp` and product construction in `re.inter`.
pub fn compile_regex(
    db: &mut AutomatonDb,
    term: &Term,
    state_cap: usize,
) -> Result<AutomatonRef, RegexError> {
    match term {
        Term::ReNone => Ok(db.empty()),
        Term::ReAll => Ok(db.sigma_star()),
        Term::ReAllChar => {
            let a = Automaton::new(
                2,
                vec![0],
                vec![1],
                vec![Transition {
                    from: 0,
                    lo: 0,
                    hi: MAX_CHAR,
                    to: 1,
                }],
            );
            Ok(db.intern(a))
        }
        Term::ToRe(inner) => match inner.as_ref() {
            Term::StrLit(w) => Ok(db.singleton(w)),
            _ => Err(RegexError::NonConstantRegex),
        },
        Term::ReConcat(parts) => {
            let mut acc = db.epsilon();
            for p in parts {
                let r = compile_regex(db, p, state_cap)?;
                acc = db.concat(acc, r);
            }
            Ok(acc)
        }
        Term::ReUnion(parts) => {
            let mut acc = db.empty();
            for p in parts {
                let r = compile_regex(db, p, state_cap)?;
                let u = db.get(acc).union(db.get(r));
                acc = db.intern(u);
            }
            Ok(acc)
        }
        Term::ReInter(parts) => {
            let mut acc = db.sigma_star();
            for p in parts {
                let r = compile_regex(db, p, state_cap)?;
                acc = db.intersect(acc, r, state_cap)?;
            }
            Ok(acc)
        }
        Term::ReStar(inner) => {
            let r = compile_regex(db, inner, state_cap)?;
            let s = db.get(r).star();
            Ok(db.intern(s))
        }
        Term::RePlus(inner) => {
            let r = compile_regex(db, inner, state_cap)?;
            let s = db.get(r).star();
            let star = db.intern(s);
            Ok(db.concat(r, star))
        }
        Term::ReOpt(inner) => {
            let r = compile_regex(db, inner, state_cap)?;
            let eps = db.epsilon();
            let u = db.get(r).union(db.get(eps));
            Ok(db.intern(u))
        }
        Term::ReRange(a, b) => match (a.as_ref(), b.as_ref()) {
            (Term::StrLit(wa), Term::StrLit(wb)) => {
                if wa.len() == 1 && wb.len() == 1 {
                    let lo = wa.code_points()[0];
                    let hi = wb.code_points()[0];
                    if lo <= hi {
                        let auto = Automaton::new(
                            2,
                            vec![0],
                            vec![1],
                            vec![Transition {
                                from: 0,
                                lo,
                                hi,
                                to: 1,
                            }],
                        );
                        return Ok(db.intern(auto));
                    }
                }
                // Non-single-char endpoints or a reversed range denote the
                // empty language.
                Ok(db.empty())
            }
            _ => Err(RegexError::NonConstantRegex),
        },
        Term::ReComp(inner) => {
            let r = compile_regex(db, inner, state_cap)?;
            Ok(db.complement(r, state_cap)?)
        }
        Term::ReLoop(lo, hi, inner) => {
            if hi < lo {
                return Ok(db.empty());
            }
            if *hi > LOOP_UNFOLD_CAP {
                return Err(RegexError::UnfoldCap {
                    bound: *hi,
                    cap: LOOP_UNFOLD_CAP,
                });
            }
            let r = compile_regex(db, inner, state_cap)?;
            let eps = db.epsilon();
            let opt = {
                let u = db.get(r).union(db.get(eps));
                db.intern(u)
            };
            let mut acc = db.epsilon();
            for _ in 0..*lo {
                acc = db.concat(acc, r);
            }
            for _ in *lo..*hi {
                acc = db.concat(acc, opt);
            }
            Ok(acc)
        }
        Term::ReAutomaton { auto, .. } => Ok(db.intern(auto.as_ref().clone())),
        _ => Err(RegexError::NotARegex),
    }
}

/// The automaton for exactly one word.
pub fn singleton(db: &mut AutomatonDb, w: &SmtString) -> AutomatonRef {
    db.singleton(w)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    /// Syntax error in an automaton literal; `pos` is a character offset
    /// into the literal text.
    #[error("automaton literal syntax error at offset {pos}: {msg}")]
    FormatError { pos: usize, msg: String },
    /// Interval endpoints out of order or outside the alphabet.
    #[error("automaton literal range error at offset {pos}: [{lo}, {hi}]")]
    RangeError { pos: usize, lo: u64, hi: u64 },
}

struct LitParser<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl<'a> LitParser<'a> {
    fn new(text: &'a str) -> Self {
        LitParser {
            chars: text.chars().collect(),
            pos: 0,
            text,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LiteralError> {
        Err(LiteralError::FormatError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> Result<(), LiteralError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> Result<String, LiteralError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.pos += 1,
            _ => return self.err("expected an identifier"),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn number(&mut self) -> Result<u64, LiteralError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a decimal number");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse()
            .map_err(|_| LiteralError::FormatError {
                pos: start,
                msg: "number too large".into(),
            })
    }
}

/// Parses the automaton literal format described in the module docs.
pub fn parse_automaton_literal(text: &str) -> Result<(String, Automaton), LiteralError> {
    let mut p = LitParser::new(text);
    let kw = p.ident()?;
    if kw != "automaton" {
        return Err(LiteralError::FormatError {
            pos: 0,
            msg: "expected 'automaton'".into(),
        });
    }
    let name = p.ident()?;
    p.eat('{')?;

    let mut states: HashMap<String, StateId> = HashMap::new();
    let state_id = |states: &mut HashMap<String, StateId>, name: String| -> StateId {
        let next = states.len() as StateId;
        *states.entry(name).or_insert(next)
    };
    let mut init: Option<StateId> = None;
    let mut accepting: Option<Vec<StateId>> = None;
    let mut transitions: Vec<Transition> = Vec::new();

    loop {
        p.skip_ws();
        if p.peek() == Some('}') {
            p.pos += 1;
            break;
        }
        let item_pos = p.pos;
        let word = p.ident()?;
        match word.as_str() {
            "init" => {
                if init.is_some() {
                    return Err(LiteralError::FormatError {
                        pos: item_pos,
                        msg: "duplicate init item".into(),
                    });
                }
                let s = p.ident()?;
                init = Some(state_id(&mut states, s));
                p.eat(';')?;
            }
            "accepting" => {
                if accepting.is_some() {
                    return Err(LiteralError::FormatError {
                        pos: item_pos,
                        msg: "duplicate accepting item".into(),
                    });
                }
                let mut list = vec![state_id(&mut states, p.ident()?)];
                loop {
                    p.skip_ws();
                    if p.peek() == Some(',') {
                        p.pos += 1;
                        list.push(state_id(&mut states, p.ident()?));
                    } else {
                        break;
                    }
                }
                accepting = Some(list);
                p.eat(';')?;
            }
            _ => {
                // Transition item: STATE -> STATE [LO, HI];
                let from = state_id(&mut states, word);
                p.eat('-')?;
                p.eat('>')?;
                let to = state_id(&mut states, p.ident()?);
                p.eat('[')?;
                let num_pos = p.pos;
                let lo = p.number()?;
                p.eat(',')?;
                let hi = p.number()?;
                p.eat(']')?;
                p.eat(';')?;
                if lo > hi || hi > MAX_CHAR as u64 {
                    return Err(LiteralError::RangeError {
                        pos: num_pos,
                        lo,
                        hi,
                    });
                }
                transitions.push(Transition {
                    from,
                    lo: lo as u32,
                    hi: hi as u32,
                    to,
                });
            }
        }
    }
    // Optional trailing semicolon after the closing brace.
    p.skip_ws();
    if p.peek() == Some(';') {
        p.pos += 1;
    }
    p.skip_ws();
    if p.pos != p.chars.len() {
        return p.err("trailing characters after automaton literal");
    }

    let Some(init) = init else {
        return Err(LiteralError::FormatError {
            pos: p.text.len(),
            msg: "missing init item".into(),
        });
    };
    let Some(mut accepting) = accepting else {
        return Err(LiteralError::FormatError {
            pos: p.text.len(),
            msg: "missing accepting item".into(),
        });
    };

    // State ids were assigned in order of first use. When the source names
    // are literally `s0 .. s{n-1}` we renumber to match the digits, so that
    // rendering an automaton and reparsing the result reproduces identical
    // state ids regardless of the order transitions were listed in.
    let mut init = init;
    if let Some(remap) = numeric_state_map(&states) {
        init = remap[init as usize];
        for q in &mut accepting {
            *q = remap[*q as usize];
        }
        for t in &mut transitions {
            t.from = remap[t.from as usize];
            t.to = remap[t.to as usize];
        }
    }
    Ok((
        name,
        Automaton::new(states.len() as u32, vec![init], accepting, transitions),
    ))
}

/// If the state names are exactly `s0 .. s{n-1}`, returns the map from
/// first-use id to the id named by the digits; otherwise `None`.
fn numeric_state_map(states: &HashMap<String, StateId>) -> Option<Vec<StateId>> {
    let n = states.len();
    let mut remap = vec![u32::MAX; n];
    for (name, &first_use_id) in states {
        let digits = name.strip_prefix('s')?;
        if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        if k >= n || remap[first_use_id as usize] != u32::MAX {
            return None;
        }
        remap[first_use_id as usize] = k as StateId;
    }
    Some(remap)
}

/// Renders an automaton back into literal syntax (inverse of
/// [`parse_automaton_literal`] up to state naming).
pub fn automaton_to_literal(name: &str, a: &Automaton) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "automaton {name} {{");
    // The literal grammar requires one init and a non-empty accepting list.
    // An automaton missing either denotes the empty language; fresh dead
    // states express that while keeping the rendering parseable.
    match a.initial().first() {
        Some(&init) => {
            let _ = write!(s, "init s{init}; ");
        }
        None => {
            let _ = write!(s, "init s{}; ", a.num_states());
        }
    }
    for t in a.transitions() {
        let _ = write!(s, "s{} -> s{} [{}, {}]; ", t.from, t.to, t.lo, t.hi);
    }
    if a.accepting().is_empty() {
        let dead = a.num_states() + if a.initial().is_empty() { 1 } else { 0 };
        let _ = write!(s, "accepting s{dead};");
    } else {
        let accepting: Vec<String> = a.accepting().iter().map(|q| format!("s{q}")).collect();
        let _ = write!(s, "accepting {};", accepting.join(", "));
    }
    s.push_str("};");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    // Inline literal from a script exercising the documented free-form
    // whitespace.
    const EXAMPLE: &str =
        "automaton value_0 {init s0; s0 -> s1 [0, 100]; s1 ->s1[0,65535]; accepting s1;};";

    #[test]
    fn parses_example_literal() {
        let (name, auto) = parse_automaton_literal(EXAMPLE).unwrap();
        assert_eq!(name, "value_0");
        assert_eq!(auto.num_states(), 2);
        assert_eq!(auto.initial(), &[0]);
        assert_eq!(auto.accepting(), &[1]);
        assert_eq!(auto.transitions().len(), 2);
    }

    #[test]
    fn literal_roundtrips_through_printer() {
        let (name, auto) = parse_automaton_literal(EXAMPLE).unwrap();
        let text = automaton_to_literal(&name, &auto);
        let (name2, auto2) = parse_automaton_literal(&text).unwrap();
        assert_eq!(name, name2);
        assert_eq!(auto, auto2);
    }

    #[test]
    fn numeric_names_override_first_use_order() {
        // `s2` is used before `s1`, but the digits win, so rendering and
        // reparsing reproduces identical ids even though the printer sorts
        // transitions.
        let src = "automaton a { init s0; s0 -> s2 [7, 7]; s0 -> s1 [3, 3]; accepting s1, s2; }";
        let (name, auto) = parse_automaton_literal(src).unwrap();
        assert_eq!(auto.num_states(), 3);
        let tr = auto.transitions();
        assert_eq!((tr[0].lo, tr[0].to), (3, 1));
        assert_eq!((tr[1].lo, tr[1].to), (7, 2));
        let text = automaton_to_literal(&name, &auto);
        let (_, auto2) = parse_automaton_literal(&text).unwrap();
        assert_eq!(auto, auto2);
    }

    #[test]
    fn non_numeric_names_get_first_use_ids_and_stabilize() {
        let src = "automaton a { init start; start -> late [7, 7]; start -> early [3, 3]; \
                   accepting early, late; }";
        let (name, auto) = parse_automaton_literal(src).unwrap();
        // First use: start=0, late=1, early=2.
        let tr = auto.transitions();
        assert_eq!((tr[0].lo, tr[0].to), (3, 2));
        assert_eq!((tr[1].lo, tr[1].to), (7, 1));
        // One print/parse round converts to numeric names; after that the
        // rendering is a fixed point.
        let text = automaton_to_literal(&name, &auto);
        let (_, auto2) = parse_automaton_literal(&text).unwrap();
        let text2 = automaton_to_literal(&name, &auto2);
        let (_, auto3) = parse_automaton_literal(&text2).unwrap();
        assert_eq!(auto2, auto3);
    }

    #[test]
    fn empty_accepting_rendering_is_parseable() {
        let a = Automaton::empty();
        let text = automaton_to_literal("nothing", &a);
        let (_, back) = parse_automaton_literal(&text).unwrap();
        assert!(back.trim().is_empty());
    }

    #[test]
    fn rejects_malformed_literals() {
        assert!(matches!(
            parse_automaton_literal("automaton a { s0 -> s1 [5, 2]; init s0; accepting s1; }"),
            Err(LiteralError::RangeError { lo: 5, hi: 2, .. })
        ));
        assert!(matches!(
            parse_automaton_literal("automaton a { init s0; accepting s0; } garbage"),
            Err(LiteralError::FormatError { .. })
        ));
        assert!(matches!(
            parse_automaton_literal("automaton a { accepting s0; }"),
            Err(LiteralError::FormatError { .. })
        ));
        // Endpoint beyond the alphabet.
        assert!(matches!(
            parse_automaton_literal(
                "automaton a { init s0; s0 -> s1 [0, 196608]; accepting s1; }"
            ),
            Err(LiteralError::RangeError { .. })
        ));
    }

    #[test]
    fn missing_init_is_reported() {
        let err =
            parse_automaton_literal("automaton empty { accepting s9; };").unwrap_err();
        assert!(matches!(err, LiteralError::FormatError { .. }));
    }
}
