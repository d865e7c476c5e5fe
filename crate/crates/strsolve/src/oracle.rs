//! Reference semantics, implemented independently of the solving machinery.
//!
//! Everything in this module evaluates by direct recursion over syntax and
//! brute-force search over strings: surface terms are evaluated under an
//! environment, regular-expression matching is a memoized recursion over the
//! expression tree (not a compiled automaton), and automaton membership is
//! plain subset stepping over the transition list. The solver is tested
//! against these definitions; none of its constructions are reused here.

use crate::automata::{Automaton, AutomatonDb, StateId};
use crate::frontend::ast::{CmpOp, Sort, Term};
use crate::ir::{Assignment, Atom, Formula, FunSym, Literal, PredSym, Value};
use crate::strings::SmtString;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

// ---------------------------------------------------------------------------
// Automaton membership by subset stepping.

/// Whether `w` is accepted, by stepping the set of live states through the
/// raw transition list.
pub fn membership(a: &Automaton, w: &SmtString) -> bool {
    let mut cur: BTreeSet<StateId> = a.initial().iter().copied().collect();
    for &c in w.code_points() {
        let mut next = BTreeSet::new();
        for t in a.transitions() {
            if t.lo <= c && c <= t.hi && cur.contains(&t.from) {
                next.insert(t.to);
            }
        }
        if next.is_empty() {
            return false;
        }
        cur = next;
    }
    cur.iter().any(|q| a.accepting().contains(q))
}

// ---------------------------------------------------------------------------
// Ground string operations (the definitions everything is checked against).

pub fn substr(s: &SmtString, i: i64, n: i64) -> SmtString {
    let len = s.len() as i64;
    if i < 0 || i >= len || n <= 0 {
        return SmtString::empty();
    }
    let end = (i + n).min(len);
    s.slice(i as usize, end as usize)
}

pub fn at(s: &SmtString, i: i64) -> SmtString {
    substr(s, i, 1)
}

pub fn indexof(s: &SmtString, p: &SmtString, i: i64) -> i64 {
    let len = s.len() as i64;
    if i < 0 || i > len {
        return -1;
    }
    match s.find_from(p, i as usize) {
        Some(j) => j as i64,
        None => -1,
    }
}

pub fn replace(s: &SmtString, p: &SmtString, r: &SmtString) -> SmtString {
    if p.is_empty() {
        return r.concat(s);
    }
    match s.find_from(p, 0) {
        Some(j) => {
            let mut out = s.slice(0, j);
            out = out.concat(r);
            out.concat(&s.slice(j + p.len(), s.len()))
        }
        None => s.clone(),
    }
}

pub fn replace_all(s: &SmtString, p: &SmtString, r: &SmtString) -> SmtString {
    if p.is_empty() {
        return s.clone();
    }
    let mut out = SmtString::empty();
    let mut pos = 0usize;
    while let Some(j) = s.find_from(p, pos) {
        out = out.concat(&s.slice(pos, j));
        out = out.concat(r);
        pos = j + p.len();
    }
    out.concat(&s.slice(pos, s.len()))
}

pub fn to_int(s: &SmtString) -> i64 {
    if s.is_empty() {
        return -1;
    }
    let mut acc: i64 = 0;
    for &c in s.code_points() {
        if !(0x30..=0x39).contains(&c) {
            return -1;
        }
        acc = match acc
            .checked_mul(10)
            .and_then(|a| a.checked_add((c - 0x30) as i64))
        {
            Some(v) => v,
            None => return -1, // value exceeds what we can represent
        };
    }
    acc
}

pub fn from_int(n: i64) -> SmtString {
    if n < 0 {
        return SmtString::empty();
    }
    SmtString::from_code_points(n.to_string().chars().map(|c| c as u32).collect())
}

/// Replaces the leftmost-then-shortest factor of `s` in the language decided
/// by `in_lang` (empty factors allowed); `s` unchanged when no factor
/// matches.
pub fn replace_lang(
    s: &SmtString,
    in_lang: &mut impl FnMut(&SmtString) -> bool,
    r: &SmtString,
) -> SmtString {
    let n = s.len();
    for i in 0..=n {
        for l in 0..=(n - i) {
            if in_lang(&s.slice(i, i + l)) {
                let mut out = s.slice(0, i);
                out = out.concat(r);
                return out.concat(&s.slice(i + l, n));
            }
        }
    }
    s.clone()
}

/// Replaces every leftmost-then-shortest **non-empty** factor in the
/// language, scanning left to right without overlap.
pub fn replace_lang_all(
    s: &SmtString,
    in_lang: &mut impl FnMut(&SmtString) -> bool,
    r: &SmtString,
) -> SmtString {
    let n = s.len();
    let mut out = SmtString::empty();
    let mut i = 0usize;
    while i < n {
        let mut matched = None;
        for l in 1..=(n - i) {
            if in_lang(&s.slice(i, i + l)) {
                matched = Some(l);
                break;
            }
        }
        match matched {
            Some(l) => {
                out = out.concat(r);
                i += l;
            }
            None => {
                out = out.concat(&s.slice(i, i + 1));
                i += 1;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Regular-expression matching by recursion over the expression tree.

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for variable '{0}'")]
    MissingVar(String),
    #[error("sort mismatch at {0}")]
    SortMismatch(String),
    #[error("regular expression is not constant: {0}")]
    NonConstantRegex(String),
}

/// Matcher for one string against constant regular-expression terms, with
/// memoization keyed by subterm identity and span.
struct ReMatcher<'t> {
    s: &'t SmtString,
    ids: HashMap<*const Term, u32>,
    memo: HashMap<(u32, usize, usize), bool>,
    rep_memo: HashMap<(u32, u32, usize, usize), bool>,
}

impl<'t> ReMatcher<'t> {
    fn new(s: &'t SmtString) -> Self {
        ReMatcher {
            s,
            ids: HashMap::new(),
            memo: HashMap::new(),
            rep_memo: HashMap::new(),
        }
    }

    fn id(&mut self, t: &Term) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(t as *const Term).or_insert(next)
    }

    /// Whether `s[i..j)` belongs to the language of `re`.
    fn matches(&mut self, re: &Term, i: usize, j: usize) -> Result<bool, EvalError> {
        let id = self.id(re);
        if let Some(&v) = self.memo.get(&(id, i, j)) {
            return Ok(v);
        }
        let v = self.compute(re, i, j)?;
        self.memo.insert((id, i, j), v);
        Ok(v)
    }

    fn compute(&mut self, re: &Term, i: usize, j: usize) -> Result<bool, EvalError> {
        Ok(match re {
            Term::ToRe(inner) => match inner.as_ref() {
                Term::StrLit(w) => {
                    j - i == w.len() && &self.s.slice(i, j) == w
                }
                other => {
                    return Err(EvalError::NonConstantRegex(other.head_name().to_string()))
                }
            },
            Term::ReNone => false,
            Term::ReAll => true,
            Term::ReAllChar => j == i + 1,
            Term::ReConcat(parts) => self.seq_matches(parts, i, j)?,
            Term::ReUnion(parts) => {
                let mut any = false;
                for p in parts {
                    if self.matches(p, i, j)? {
                        any = true;
                        break;
                    }
                }
                any
            }
            Term::ReInter(parts) => {
                let mut all = true;
                for p in parts {
                    if !self.matches(p, i, j)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Term::ReStar(inner) => self.star_matches(inner, i, j)?,
            Term::RePlus(inner) => {
                // one-or-more = one, then zero-or-more
                let mut any = false;
                for k in i..=j {
                    if self.matches(inner, i, k)? && self.star_matches(inner, k, j)? {
                        any = true;
                        break;
                    }
                }
                any
            }
            Term::ReOpt(inner) => i == j || self.matches(inner, i, j)?,
            Term::ReRange(a, b) => match (a.as_ref(), b.as_ref()) {
                (Term::StrLit(wa), Term::StrLit(wb)) => {
                    if wa.len() == 1 && wb.len() == 1 && j == i + 1 {
                        let c = self.s.code_points()[i];
                        wa.code_points()[0] <= c && c <= wb.code_points()[0]
                    } else {
                        false
                    }
                }
                (other, _) => {
                    return Err(EvalError::NonConstantRegex(other.head_name().to_string()))
                }
            },
            Term::ReComp(inner) => !self.matches(inner, i, j)?,
            Term::ReLoop(lo, hi, inner) => {
                if hi < lo {
                    false
                } else {
                    let mut any = false;
                    for c in *lo..=*hi {
                        if self.rep_matches(inner, c, i, j)? {
                            any = true;
                            break;
                        }
                        // With an exhausted span only ε-iterations remain;
                        // more copies cannot start matching later.
                        if c as usize > j - i && !any {
                            break;
                        }
                    }
                    any
                }
            }
            Term::ReAutomaton { auto, .. } => membership(auto, &self.s.slice(i, j)),
            other => {
                return Err(EvalError::SortMismatch(format!(
                    "{} used as a regular expression",
                    other.head_name()
                )))
            }
        })
    }

    fn seq_matches(&mut self, parts: &[Term], i: usize, j: usize) -> Result<bool, EvalError> {
        match parts {
            [] => Ok(i == j),
            [one] => self.matches(one, i, j),
            [head, rest @ ..] => {
                for k in i..=j {
                    if self.matches(head, i, k)? && self.seq_matches(rest, k, j)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn star_matches(&mut self, inner: &Term, i: usize, j: usize) -> Result<bool, EvalError> {
        let id = self.id(inner);
        // Reuse rep_memo with the copy count u32::MAX standing for "star".
        if let Some(&v) = self.rep_memo.get(&(id, u32::MAX, i, j)) {
            return Ok(v);
        }
        // Seed to false to cut cycles; strictly shrinking spans terminate.
        self.rep_memo.insert((id, u32::MAX, i, j), false);
        let mut v = i == j;
        if !v {
            for k in (i + 1)..=j {
                if self.matches(inner, i, k)? && self.star_matches(inner, k, j)? {
                    v = true;
                    break;
                }
            }
        }
        self.rep_memo.insert((id, u32::MAX, i, j), v);
        Ok(v)
    }

    fn rep_matches(
        &mut self,
        inner: &Term,
        copies: u32,
        i: usize,
        j: usize,
    ) -> Result<bool, EvalError> {
        if copies == 0 {
            return Ok(i == j);
        }
        let id = self.id(inner);
        if let Some(&v) = self.rep_memo.get(&(id, copies, i, j)) {
            return Ok(v);
        }
        let mut v = false;
        for k in i..=j {
            if self.matches(inner, i, k)? && self.rep_matches(inner, copies - 1, k, j)? {
                v = true;
                break;
            }
        }
        self.rep_memo.insert((id, copies, i, j), v);
        Ok(v)
    }
}

/// Whether a whole string matches a constant regular-expression term.
pub fn re_matches(re: &Term, s: &SmtString) -> Result<bool, EvalError> {
    ReMatcher::new(s).matches(re, 0, s.len())
}

// ---------------------------------------------------------------------------
// Term evaluation under an environment.

pub type Env = BTreeMap<String, Value>;

/// Evaluates a `String`- or `Int`-sorted term.
pub fn eval_value(term: &Term, env: &Env) -> Result<Value, EvalError> {
    Ok(match term {
        Term::Var(name) => env
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::MissingVar(name.clone()))?,
        Term::StrLit(w) => Value::Str(w.clone()),
        Term::IntLit(k) => Value::Int(*k),
        Term::Concat(parts) => {
            let mut out = SmtString::empty();
            for p in parts {
                out = out.concat(eval_str(p, env)?.as_str().unwrap());
            }
            Value::Str(out)
        }
        Term::At(s, i) => Value::Str(at(&eval_to_str(s, env)?, eval_to_int(i, env)?)),
        Term::Substr(s, i, n) => Value::Str(substr(
            &eval_to_str(s, env)?,
            eval_to_int(i, env)?,
            eval_to_int(n, env)?,
        )),
        Term::Replace(s, p, r) => Value::Str(replace(
            &eval_to_str(s, env)?,
            &eval_to_str(p, env)?,
            &eval_to_str(r, env)?,
        )),
        Term::ReplaceAll(s, p, r) => Value::Str(replace_all(
            &eval_to_str(s, env)?,
            &eval_to_str(p, env)?,
            &eval_to_str(r, env)?,
        )),
        Term::ReplaceRe(s, re, r) => {
            let sv = eval_to_str(s, env)?;
            let rv = eval_to_str(r, env)?;
            let mut err = None;
            let result = replace_lang(
                &sv,
                &mut |w| match re_matches(re, w) {
                    Ok(b) => b,
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                },
                &rv,
            );
            if let Some(e) = err {
                return Err(e);
            }
            Value::Str(result)
        }
        Term::ReplaceReAll(s, re, r) => {
            let sv = eval_to_str(s, env)?;
            let rv = eval_to_str(r, env)?;
            let mut err = None;
            let result = replace_lang_all(
                &sv,
                &mut |w| match re_matches(re, w) {
                    Ok(b) => b,
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                },
                &rv,
            );
            if let Some(e) = err {
                return Err(e);
            }
            Value::Str(result)
        }
        Term::Reverse(s) => Value::Str(eval_to_str(s, env)?.reversed()),
        Term::FromInt(n) => Value::Str(from_int(eval_to_int(n, env)?)),
        Term::StrLen(s) => Value::Int(eval_to_str(s, env)?.len() as i64),
        Term::IndexOf(s, p, i) => Value::Int(indexof(
            &eval_to_str(s, env)?,
            &eval_to_str(p, env)?,
            eval_to_int(i, env)?,
        )),
        Term::ToInt(s) => Value::Int(to_int(&eval_to_str(s, env)?)),
        Term::Add(parts) => {
            let mut acc: i64 = 0;
            for p in parts {
                acc = acc.saturating_add(eval_to_int(p, env)?);
            }
            Value::Int(acc)
        }
        Term::Sub(a, b) => {
            Value::Int(eval_to_int(a, env)?.saturating_sub(eval_to_int(b, env)?))
        }
        Term::Neg(t) => Value::Int(eval_to_int(t, env)?.saturating_neg()),
        other => {
            return Err(EvalError::SortMismatch(format!(
                "{} is not a value term",
                other.head_name()
            )))
        }
    })
}

fn eval_str(term: &Term, env: &Env) -> Result<Value, EvalError> {
    let v = eval_value(term, env)?;
    if v.as_str().is_none() {
        return Err(EvalError::SortMismatch(format!(
            "{} evaluated to an integer where a string was needed",
            term.head_name()
        )));
    }
    Ok(v)
}

fn eval_to_str(term: &Term, env: &Env) -> Result<SmtString, EvalError> {
    Ok(eval_str(term, env)?.as_str().unwrap().clone())
}

fn eval_to_int(term: &Term, env: &Env) -> Result<i64, EvalError> {
    match eval_value(term, env)? {
        Value::Int(n) => Ok(n),
        Value::Str(_) => Err(EvalError::SortMismatch(format!(
            "{} evaluated to a string where an integer was needed",
            term.head_name()
        ))),
    }
}

/// Evaluates a `Bool`-sorted term.
pub fn eval_bool(term: &Term, env: &Env) -> Result<bool, EvalError> {
    Ok(match term {
        Term::True => true,
        Term::False => false,
        Term::Not(t) => !eval_bool(t, env)?,
        Term::And(ts) => {
            let mut all = true;
            for t in ts {
                if !eval_bool(t, env)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Term::Or(ts) => {
            let mut any = false;
            for t in ts {
                if eval_bool(t, env)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Term::Eq(a, b) => {
            let va = eval_value(a, env)?;
            let vb = eval_value(b, env)?;
            match (&va, &vb) {
                (Value::Str(_), Value::Int(_)) | (Value::Int(_), Value::Str(_)) => {
                    return Err(EvalError::SortMismatch("= across sorts".into()))
                }
                _ => va == vb,
            }
        }
        Term::Cmp(op, a, b) => {
            let x = eval_to_int(a, env)?;
            let y = eval_to_int(b, env)?;
            match op {
                CmpOp::Le => x <= y,
                CmpOp::Lt => x < y,
                CmpOp::Ge => x >= y,
                CmpOp::Gt => x > y,
            }
        }
        Term::Prefixof(a, b) => {
            let p = eval_to_str(a, env)?;
            let s = eval_to_str(b, env)?;
            p.len() <= s.len() && s.slice(0, p.len()) == p
        }
        Term::Suffixof(a, b) => {
            let p = eval_to_str(a, env)?;
            let s = eval_to_str(b, env)?;
            p.len() <= s.len() && s.slice(s.len() - p.len(), s.len()) == p
        }
        Term::Contains(a, b) => {
            let s = eval_to_str(a, env)?;
            let p = eval_to_str(b, env)?;
            s.find_from(&p, 0).is_some()
        }
        Term::InRe(s, re) => re_matches(re, &eval_to_str(s, env)?)?,
        other => {
            return Err(EvalError::SortMismatch(format!(
                "{} is not a Bool term",
                other.head_name()
            )))
        }
    })
}

// ---------------------------------------------------------------------------
// Evaluation of normal-form constraints under an assignment.

/// Applies a string-function symbol to ground arguments. `None` when the
/// argument list does not fit the symbol.
pub fn apply_fun(fun: &FunSym, args: &[Value], db: &AutomatonDb) -> Option<Value> {
    Some(match fun {
        FunSym::Concat => {
            let x = args.first()?.as_str()?;
            let y = args.get(1)?.as_str()?;
            Value::Str(x.concat(y))
        }
        FunSym::Substr => Value::Str(substr(
            args.first()?.as_str()?,
            args.get(1)?.as_int()?,
            args.get(2)?.as_int()?,
        )),
        FunSym::Replace => Value::Str(replace(
            args.first()?.as_str()?,
            args.get(1)?.as_str()?,
            args.get(2)?.as_str()?,
        )),
        FunSym::ReplaceAll => Value::Str(replace_all(
            args.first()?.as_str()?,
            args.get(1)?.as_str()?,
            args.get(2)?.as_str()?,
        )),
        FunSym::ReplaceRe(lang) => {
            let auto = db.get(*lang);
            Value::Str(replace_lang(
                args.first()?.as_str()?,
                &mut |w| membership(auto, w),
                args.get(1)?.as_str()?,
            ))
        }
        FunSym::ReplaceReAll(lang) => {
            let auto = db.get(*lang);
            Value::Str(replace_lang_all(
                args.first()?.as_str()?,
                &mut |w| membership(auto, w),
                args.get(1)?.as_str()?,
            ))
        }
        FunSym::IndexOf => Value::Int(indexof(
            args.first()?.as_str()?,
            args.get(1)?.as_str()?,
            args.get(2)?.as_int()?,
        )),
        FunSym::ToInt => Value::Int(to_int(args.first()?.as_str()?)),
        FunSym::FromInt => Value::Str(from_int(args.first()?.as_int()?)),
        FunSym::Reverse => Value::Str(args.first()?.as_str()?.reversed()),
    })
}

/// Evaluates a predicate symbol on ground string arguments.
pub fn apply_pred(p: PredSym, args: &[&SmtString]) -> Option<bool> {
    Some(match p {
        PredSym::Prefixof => {
            let (a, b) = (args.first()?, args.get(1)?);
            a.len() <= b.len() && b.slice(0, a.len()) == **a
        }
        PredSym::Suffixof => {
            let (a, b) = (args.first()?, args.get(1)?);
            a.len() <= b.len() && b.slice(b.len() - a.len(), b.len()) == **a
        }
        PredSym::Contains => {
            let (a, b) = (args.first()?, args.get(1)?);
            a.find_from(b, 0).is_some()
        }
        PredSym::StrEq => args.first()? == args.get(1)?,
    })
}

/// Evaluates an atom under a (possibly partial) assignment. `None` when a
/// needed variable has no value.
pub fn eval_atom(atom: &Atom, asg: &Assignment, db: &AutomatonDb) -> Option<bool> {
    match atom {
        Atom::Pred(p, vs) => {
            let vals: Option<Vec<&SmtString>> =
                vs.iter().map(|v| asg.get(v)?.as_str()).collect();
            apply_pred(*p, &vals?)
        }
        Atom::FunEq { out, fun, args } => {
            let vals: Option<Vec<Value>> = args.iter().map(|v| asg.get(v).cloned()).collect();
            let result = apply_fun(fun, &vals?, db)?;
            Some(*asg.get(out)? == result)
        }
        Atom::InRe { var, lang } => {
            Some(membership(db.get(*lang), asg.get(var)?.as_str()?))
        }
        Atom::LinEq(e) => Some(e.eval(&|v| asg.get(&v)?.as_int())? == 0),
        Atom::Ineq(e) => Some(e.eval(&|v| asg.get(&v)?.as_int())? >= 0),
    }
}

pub fn eval_literal(lit: &Literal, asg: &Assignment, db: &AutomatonDb) -> Option<bool> {
    eval_atom(&lit.atom, asg, db).map(|b| b == lit.positive)
}

pub fn eval_formula(f: &Formula, asg: &Assignment, db: &AutomatonDb) -> Option<bool> {
    match f {
        Formula::True => Some(true),
        Formula::False => Some(false),
        Formula::Lit(l) => eval_literal(l, asg, db),
        Formula::And(parts) => {
            let mut all = true;
            for p in parts {
                match eval_formula(p, asg, db) {
                    Some(true) => {}
                    Some(false) => {
                        all = false;
                        break;
                    }
                    None => return None,
                }
            }
            Some(all)
        }
        Formula::Or(parts) => {
            let mut any = false;
            let mut unknown = false;
            for p in parts {
                match eval_formula(p, asg, db) {
                    Some(true) => {
                        any = true;
                        break;
                    }
                    Some(false) => {}
                    None => unknown = true,
                }
            }
            if any {
                Some(true)
            } else if unknown {
                None
            } else {
                Some(false)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Bounded model enumeration over surface scripts.

/// Search bounds for [`enumerate_verdict`].
#[derive(Debug, Clone)]
pub struct EnumBounds {
    /// Code points candidate strings are built from.
    pub alphabet: Vec<u32>,
    /// Maximum candidate string length.
    pub max_len: usize,
    /// Inclusive integer candidate range.
    pub int_lo: i64,
    pub int_hi: i64,
    /// Maximum number of candidate assignments to try.
    pub budget: u64,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds {
            alphabet: vec!['a' as u32, 'b' as u32, 'c' as u32, 'd' as u32],
            max_len: 5,
            int_lo: -8,
            int_hi: 8,
            budget: 4_000_000,
        }
    }
}

/// Result of a bounded search for a model of `asserts`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnumVerdict {
    /// A witness within the bounds (includes computed values for defined
    /// variables).
    Sat(Env),
    /// No witness exists within the bounds. This refutes nothing outside
    /// them, but agreeing bounds make it a strong differential check.
    UnsatWithinBounds,
    /// The candidate space exceeds the budget.
    BudgetExceeded,
}

/// Splits the declared variables into enumerated and computed ones.
///
/// An assert of the shape `(= x rhs)` (or flattened from a top-level `and`)
/// lets `x` be computed from `rhs` instead of enumerated, provided the
/// definitions stay acyclic. Every assert is still checked on the completed
/// environment, so extra constraints on computed variables are honored.
fn definitional_split<'t>(
    decls: &[(String, Sort)],
    asserts: &'t [Term],
) -> (Vec<(String, Sort)>, Vec<(String, &'t Term)>) {
    let declared: BTreeMap<&str, Sort> = decls
        .iter()
        .map(|(n, s)| (n.as_str(), *s))
        .collect();
    let mut defs: BTreeMap<String, &Term> = BTreeMap::new();

    let mut conjuncts: Vec<&Term> = Vec::new();
    fn flatten<'t>(t: &'t Term, out: &mut Vec<&'t Term>) {
        match t {
            Term::And(parts) => {
                for p in parts {
                    flatten(p, out);
                }
            }
            other => out.push(other),
        }
    }
    for a in asserts {
        flatten(a, &mut conjuncts);
    }

    for c in &conjuncts {
        if let Term::Eq(lhs, rhs) = c {
            for (x, e) in [(lhs, rhs), (rhs, lhs)] {
                if let Term::Var(name) = x.as_ref() {
                    if declared.contains_key(name.as_str()) && !defs.contains_key(name) {
                        // The defining term must not mention the variable.
                        let mut self_ref = false;
                        free_vars(e, &mut |n| {
                            if n == name {
                                self_ref = true;
                            }
                        });
                        if !self_ref {
                            defs.insert(name.clone(), e.as_ref());
                            break;
                        }
                    }
                }
            }
        }
    }

    // Keep only definitions whose dependencies are acyclic; order them.
    let mut ordered: Vec<(String, &Term)> = Vec::new();
    let mut placed: BTreeSet<String> = BTreeSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for (name, rhs) in &defs {
            if placed.contains(name) {
                continue;
            }
            let mut ready = true;
            free_vars(rhs, &mut |n| {
                if defs.contains_key(n) && !placed.contains(n) {
                    ready = false;
                }
            });
            if ready {
                ordered.push((name.clone(), *rhs));
                placed.insert(name.clone());
                changed = true;
            }
        }
    }

    let enumerated = decls
        .iter()
        .filter(|(n, _)| !placed.contains(n))
        .cloned()
        .collect();
    (enumerated, ordered)
}

fn free_vars(t: &Term, f: &mut impl FnMut(&str)) {
    use Term::*;
    match t {
        Var(name) => f(name),
        True | False | IntLit(_) | StrLit(_) | ReNone | ReAll | ReAllChar => {}
        Not(a) | Neg(a) | StrLen(a) | ToInt(a) | Reverse(a) | FromInt(a) | ToRe(a)
        | ReStar(a) | RePlus(a) | ReOpt(a) | ReComp(a) | ReLoop(_, _, a) => free_vars(a, f),
        And(ts) | Or(ts) | Add(ts) | Concat(ts) | ReConcat(ts) | ReUnion(ts) | ReInter(ts) => {
            for x in ts {
                free_vars(x, f);
            }
        }
        Eq(a, b) | Cmp(_, a, b) | Prefixof(a, b) | Suffixof(a, b) | Contains(a, b)
        | InRe(a, b) | Sub(a, b) | At(a, b) | ReRange(a, b) => {
            free_vars(a, f);
            free_vars(b, f);
        }
        IndexOf(a, b, c) | Substr(a, b, c) | Replace(a, b, c) | ReplaceAll(a, b, c)
        | ReplaceRe(a, b, c) | ReplaceReAll(a, b, c) => {
            free_vars(a, f);
            free_vars(b, f);
            free_vars(c, f);
        }
        ReAutomaton { .. } => {}
    }
}

/// All strings over `alphabet` of length at most `max_len`, shortest first.
fn string_candidates(alphabet: &[u32], max_len: usize) -> Vec<SmtString> {
    let mut out = vec![SmtString::empty()];
    let mut frontier = vec![SmtString::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &c in alphabet {
                let mut v = w.clone();
                v.push(c);
                out.push(v.clone());
                next.push(v);
            }
        }
        frontier = next;
    }
    out
}

/// Exhaustively searches for a model within the bounds.
pub fn enumerate_verdict(
    decls: &[(String, Sort)],
    asserts: &[Term],
    bounds: &EnumBounds,
) -> EnumVerdict {
    let (enumerated, computed) = definitional_split(decls, asserts);

    let strings = string_candidates(&bounds.alphabet, bounds.max_len);
    let ints: Vec<i64> = (bounds.int_lo..=bounds.int_hi).collect();

    // Count the candidate space.
    let mut total: u64 = 1;
    for (_, sort) in &enumerated {
        let n = match sort {
            Sort::Str => strings.len() as u64,
            Sort::Int => ints.len() as u64,
            _ => return EnumVerdict::BudgetExceeded,
        };
        total = match total.checked_mul(n) {
            Some(t) if t <= bounds.budget => t,
            _ => return EnumVerdict::BudgetExceeded,
        };
    }

    let mut env: Env = BTreeMap::new();
    let mut counters = vec![0usize; enumerated.len()];
    loop {
        env.clear();
        for (ix, (name, sort)) in enumerated.iter().enumerate() {
            let v = match sort {
                Sort::Str => Value::Str(strings[counters[ix]].clone()),
                Sort::Int => Value::Int(ints[counters[ix]]),
                _ => unreachable!(),
            };
            env.insert(name.clone(), v);
        }
        // Compute defined variables in dependency order; failures (e.g. a
        // non-constant regex) disqualify the shortcut for this candidate.
        let mut ok = true;
        for (name, rhs) in &computed {
            match eval_value(rhs, &env) {
                Ok(v) => {
                    env.insert(name.clone(), v);
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut all = true;
            for a in asserts {
                match eval_bool(a, &env) {
                    Ok(true) => {}
                    _ => {
                        all = false;
                        break;
                    }
                }
            }
            if all {
                return EnumVerdict::Sat(env);
            }
        }
        // Advance the odometer.
        let mut ix = 0;
        loop {
            if ix == enumerated.len() {
                return EnumVerdict::UnsatWithinBounds;
            }
            counters[ix] += 1;
            let limit = match enumerated[ix].1 {
                Sort::Str => strings.len(),
                Sort::Int => ints.len(),
                _ => unreachable!(),
            };
            if counters[ix] < limit {
                break;
            }
            counters[ix] = 0;
            ix += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> SmtString {
        SmtString::from(x)
    }

    #[test]
    fn substr_edge_cases() {
        assert_eq!(substr(&s("abcde"), 1, 3), s("bcd"));
        assert_eq!(substr(&s("abcde"), -1, 3), s(""));
        assert_eq!(substr(&s("abcde"), 5, 1), s(""));
        assert_eq!(substr(&s("abcde"), 4, 10), s("e"));
        assert_eq!(substr(&s("abcde"), 2, 0), s(""));
        assert_eq!(substr(&s("abcde"), 2, -1), s(""));
        assert_eq!(substr(&s(""), 0, 1), s(""));
    }

    #[test]
    fn at_edge_cases() {
        assert_eq!(at(&s("abc"), 0), s("a"));
        assert_eq!(at(&s("abc"), 2), s("c"));
        assert_eq!(at(&s("abc"), 3), s(""));
        assert_eq!(at(&s("abc"), -1), s(""));
    }

    #[test]
    fn indexof_edge_cases() {
        assert_eq!(indexof(&s("abcab"), &s("ab"), 0), 0);
        assert_eq!(indexof(&s("abcab"), &s("ab"), 1), 3);
        assert_eq!(indexof(&s("abcab"), &s("ab"), 4), -1);
        assert_eq!(indexof(&s("abc"), &s(""), 2), 2);
        assert_eq!(indexof(&s("abc"), &s(""), 3), 3);
        assert_eq!(indexof(&s("abc"), &s(""), 4), -1);
        assert_eq!(indexof(&s("abc"), &s("x"), -1), -1);
        assert_eq!(indexof(&s(""), &s(""), 0), 0);
    }

    #[test]
    fn replace_edge_cases() {
        assert_eq!(replace(&s("abab"), &s("ab"), &s("x")), s("xab"));
        assert_eq!(replace(&s("abab"), &s("ba"), &s("")), s("ab"));
        assert_eq!(replace(&s("abc"), &s(""), &s("x")), s("xabc"));
        assert_eq!(replace(&s("abc"), &s("zz"), &s("x")), s("abc"));
    }

    #[test]
    fn replace_all_edge_cases() {
        assert_eq!(replace_all(&s("aaa"), &s("aa"), &s("b")), s("ba"));
        assert_eq!(replace_all(&s("abab"), &s("ab"), &s("c")), s("cc"));
        assert_eq!(replace_all(&s("abc"), &s(""), &s("x")), s("abc"));
        assert_eq!(replace_all(&s("aaaa"), &s("a"), &s("")), s(""));
    }

    #[test]
    fn to_int_edge_cases() {
        assert_eq!(to_int(&s("0")), 0);
        assert_eq!(to_int(&s("042")), 42);
        assert_eq!(to_int(&s("")), -1);
        assert_eq!(to_int(&s("-3")), -1);
        assert_eq!(to_int(&s("1a")), -1);
        assert_eq!(to_int(&s("99999999999999999999")), -1);
    }

    #[test]
    fn from_int_edge_cases() {
        assert_eq!(from_int(0), s("0"));
        assert_eq!(from_int(120), s("120"));
        assert_eq!(from_int(-5), s(""));
    }

    #[test]
    fn to_int_from_int_agree_on_canonical_decimals() {
        for n in 0..200 {
            assert_eq!(to_int(&from_int(n)), n);
        }
    }

    #[test]
    fn replace_lang_prefers_leftmost_then_shortest() {
        // Language {"a", "aa"}: at position 0 the shortest match "a" wins.
        let lang = |w: &SmtString| *w == s("a") || *w == s("aa");
        assert_eq!(replace_lang(&s("baa"), &mut &lang, &s("x")), s("bxa"));
        // Empty-word language matches before position 0.
        let eps = |w: &SmtString| w.is_empty();
        assert_eq!(replace_lang(&s("ab"), &mut &eps, &s("x")), s("xab"));
        // No match leaves the string alone.
        let none = |_: &SmtString| false;
        assert_eq!(replace_lang(&s("ab"), &mut &none, &s("x")), s("ab"));
    }

    #[test]
    fn replace_lang_all_skips_empty_matches() {
        let eps = |w: &SmtString| w.is_empty();
        assert_eq!(replace_lang_all(&s("ab"), &mut &eps, &s("x")), s("ab"));
        let lang = |w: &SmtString| *w == s("a") || *w == s("aa");
        assert_eq!(replace_lang_all(&s("aaa"), &mut &lang, &s("b")), s("bbb"));
    }

    #[test]
    fn regex_matching_basics() {
        let a = Term::ToRe(Box::new(Term::StrLit(s("a"))));
        let b = Term::ToRe(Box::new(Term::StrLit(s("b"))));
        // (a | b)+
        let re = Term::RePlus(Box::new(Term::ReUnion(vec![a.clone(), b.clone()])));
        assert!(re_matches(&re, &s("abba")).unwrap());
        assert!(!re_matches(&re, &s("")).unwrap());
        assert!(!re_matches(&re, &s("abc")).unwrap());
        // a* b
        let re2 = Term::ReConcat(vec![Term::ReStar(Box::new(a.clone())), b.clone()]);
        assert!(re_matches(&re2, &s("aaab")).unwrap());
        assert!(re_matches(&re2, &s("b")).unwrap());
        assert!(!re_matches(&re2, &s("aaa")).unwrap());
        // complement
        let re3 = Term::ReComp(Box::new(re2));
        assert!(!re_matches(&re3, &s("b")).unwrap());
        assert!(re_matches(&re3, &s("aba")).unwrap());
        // loop
        let re4 = Term::ReLoop(2, 3, Box::new(a.clone()));
        assert!(!re_matches(&re4, &s("a")).unwrap());
        assert!(re_matches(&re4, &s("aa")).unwrap());
        assert!(re_matches(&re4, &s("aaa")).unwrap());
        assert!(!re_matches(&re4, &s("aaaa")).unwrap());
        // range
        let re5 = Term::ReRange(
            Box::new(Term::StrLit(s("a"))),
            Box::new(Term::StrLit(s("c"))),
        );
        assert!(re_matches(&re5, &s("b")).unwrap());
        assert!(!re_matches(&re5, &s("d")).unwrap());
        assert!(!re_matches(&re5, &s("ab")).unwrap());
        // star with nullable inner terminates and matches everything the
        // inner's non-empty part reaches
        let re6 = Term::ReStar(Box::new(Term::ReOpt(Box::new(a))));
        assert!(re_matches(&re6, &s("aaa")).unwrap());
        assert!(re_matches(&re6, &s("")).unwrap());
        assert!(!re_matches(&re6, &s("ab")).unwrap());
    }

    #[test]
    fn eval_bool_over_env() {
        let mut env = Env::new();
        env.insert("x".into(), Value::Str(s("ab")));
        env.insert("n".into(), Value::Int(2));
        let t = Term::Eq(
            Box::new(Term::StrLen(Box::new(Term::Var("x".into())))),
            Box::new(Term::Var("n".into())),
        );
        assert!(eval_bool(&t, &env).unwrap());
        let t2 = Term::Prefixof(
            Box::new(Term::Var("x".into())),
            Box::new(Term::Concat(vec![
                Term::Var("x".into()),
                Term::StrLit(s("c")),
            ])),
        );
        assert!(eval_bool(&t2, &env).unwrap());
    }

    #[test]
    fn enumeration_finds_simple_model() {
        let decls = vec![("x".to_string(), Sort::Str)];
        let asserts = vec![Term::Eq(
            Box::new(Term::StrLen(Box::new(Term::Var("x".into())))),
            Box::new(Term::IntLit(2)),
        )];
        match enumerate_verdict(&decls, &asserts, &EnumBounds::default()) {
            EnumVerdict::Sat(env) => {
                assert_eq!(env["x"].as_str().unwrap().len(), 2);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_reports_unsat_within_bounds() {
        let decls = vec![("x".to_string(), Sort::Str)];
        let asserts = vec![
            Term::Prefixof(
                Box::new(Term::StrLit(s("a"))),
                Box::new(Term::Var("x".into())),
            ),
            Term::Prefixof(
                Box::new(Term::StrLit(s("b"))),
                Box::new(Term::Var("x".into())),
            ),
        ];
        assert_eq!(
            enumerate_verdict(&decls, &asserts, &EnumBounds::default()),
            EnumVerdict::UnsatWithinBounds
        );
    }

    #[test]
    fn enumeration_computes_defined_variables() {
        // y is defined by an equation, so only x is enumerated; with three
        // string variables enumerated this would blow the budget.
        let decls = vec![
            ("x".to_string(), Sort::Str),
            ("y".to_string(), Sort::Str),
            ("z".to_string(), Sort::Str),
        ];
        let asserts = vec![
            Term::Eq(
                Box::new(Term::Var("y".into())),
                Box::new(Term::Concat(vec![
                    Term::Var("x".into()),
                    Term::StrLit(s("b")),
                ])),
            ),
            Term::Eq(
                Box::new(Term::Var("z".into())),
                Box::new(Term::Reverse(Box::new(Term::Var("y".into())))),
            ),
            Term::Eq(
                Box::new(Term::Var("z".into())),
                Box::new(Term::StrLit(s("baa"))),
            ),
        ];
        match enumerate_verdict(&decls, &asserts, &EnumBounds::default()) {
            EnumVerdict::Sat(env) => {
                assert_eq!(env["x"], Value::Str(s("aa")));
                assert_eq!(env["y"], Value::Str(s("aab")));
                assert_eq!(env["z"], Value::Str(s("baa")));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn budget_exceeded_on_many_free_strings() {
        let decls = vec![
            ("a".to_string(), Sort::Str),
            ("b".to_string(), Sort::Str),
            ("c".to_string(), Sort::Str),
            ("d".to_string(), Sort::Str),
        ];
        let asserts = vec![Term::True];
        assert_eq!(
            enumerate_verdict(&decls, &asserts, &EnumBounds::default()),
            EnumVerdict::BudgetExceeded
        );
    }

    #[test]
    fn membership_steps_intervals() {
        use crate::automata::Transition;
        // Language: one character in [b, d], then any number of 'a'.
        let auto = Automaton::new(
            2,
            vec![0],
            vec![1],
            vec![
                Transition {
                    from: 0,
                    lo: 'b' as u32,
                    hi: 'd' as u32,
                    to: 1,
                },
                Transition {
                    from: 1,
                    lo: 'a' as u32,
                    hi: 'a' as u32,
                    to: 1,
                },
            ],
        );
        assert!(membership(&auto, &s("c")));
        assert!(membership(&auto, &s("baaa")));
        assert!(!membership(&auto, &s("a")));
        assert!(!membership(&auto, &s("")));
        assert!(!membership(&auto, &s("be")));
    }
}
