//! Satisfiability-preserving rewrites that run between lowering and the
//! search loop.
//!
//! Three families:
//!
//! * **Polarity-aware predicate elimination** — prefix/suffix/containment
//!   atoms with a known needle become regular memberships (complemented
//!   under negation); positive atoms with a symbolic needle become
//!   concatenation equations with fresh witness variables; negative ones
//!   with a symbolic needle wait until a later binding makes the needle
//!   known, at which point the same rewrite is re-applied.
//! * **Extraction expansion** — a substring-extraction equation is replaced
//!   by an exhaustive guarded case split (out-of-range start or width gives
//!   the empty string; otherwise the string is cut at the start index, and
//!   the width is either the requested one or everything to the end).
//!   First-occurrence index equations keep their defining atom and *gain*
//!   implied facts: a range bound, and — when the needle is known — a
//!   positional witness with an occurrence-absence membership.
//! * **Length abstraction** — linear length facts read off concatenations,
//!   reversals, constant-pattern replacements, and memberships.
//!
//! Every rewrite here either replaces an atom by an equivalent formula or
//! conjoins implied facts, so the rewritten goal is equisatisfiable with
//! the input; the correctness tests check this against direct evaluation.

use crate::ir::{
    Atom, Formula, FunSym, LinExpr, Literal, NormalizeCx, NormalizeError, PredSym, VarId, VarSort,
};
use crate::oracle;
use crate::strings::SmtString;

/// Runs all preprocessing rewrites over a normalized formula.
pub fn preprocess(f: &Formula, cx: &mut NormalizeCx) -> Result<Formula, NormalizeError> {
    let mut failure: Option<NormalizeError> = None;
    let expanded = f.map_literals(&mut |lit| {
        if failure.is_some() {
            return Formula::True;
        }
        match rewrite_literal(lit, cx) {
            Ok(Some(g)) => g,
            Ok(None) => Formula::Lit(lit.clone()),
            Err(e) => {
                failure = Some(e);
                Formula::True
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let with_lengths = expanded.map_literals(&mut |lit| match length_facts(lit, cx) {
        Some(g) => g,
        None => Formula::Lit(lit.clone()),
    });
    let mut parts = cx.drain_global();
    parts.push(with_lengths);
    Ok(Formula::and(parts))
}

/// Single-literal dispatch for the expansion pass. `None` = unchanged.
fn rewrite_literal(
    lit: &Literal,
    cx: &mut NormalizeCx,
) -> Result<Option<Formula>, NormalizeError> {
    match &lit.atom {
        Atom::Pred(..) => simplify_pred_literal(lit, cx),
        Atom::FunEq {
            out,
            fun: FunSym::Substr,
            args,
        } => Ok(Some(expand_substr(*out, args[0], args[1], args[2], cx))),
        Atom::FunEq {
            out,
            fun: FunSym::IndexOf,
            args,
        } => augment_indexof(lit, *out, args[0], args[1], args[2], cx).map(Some),
        _ => Ok(None),
    }
}

fn lin(atom: Atom) -> Formula {
    Formula::Lit(Literal::pos(atom))
}

fn len_of(cx: &mut NormalizeCx, v: VarId) -> LinExpr {
    LinExpr::var(cx.intern.len_var(v))
}

/// Rewrites one prefix/suffix/containment (or trivial equality) literal.
///
/// Also used during search: once a binding turns the needle into a known
/// string, the deferred negative cases become rewritable.
pub fn simplify_pred_literal(
    lit: &Literal,
    cx: &mut NormalizeCx,
) -> Result<Option<Formula>, NormalizeError> {
    let Atom::Pred(_, vs) = &lit.atom else {
        return Ok(None);
    };
    let va = cx.intern.const_str_value(vs[0]).cloned();
    let vb = cx.intern.const_str_value(vs[1]).cloned();
    simplify_pred_resolved(lit, va, vb, cx)
}

/// Same rewrite, but with the argument values supplied by the caller, so the
/// solver can resolve through its own bindings rather than only through
/// interned constants.
pub(crate) fn simplify_pred_resolved(
    lit: &Literal,
    va: Option<SmtString>,
    vb: Option<SmtString>,
    cx: &mut NormalizeCx,
) -> Result<Option<Formula>, NormalizeError> {
    let Atom::Pred(p, vs) = &lit.atom else {
        return Ok(None);
    };
    let (a, b) = (vs[0], vs[1]);
    if a == b {
        // All four predicates are reflexive.
        return Ok(Some(if lit.positive {
            Formula::True
        } else {
            Formula::False
        }));
    }
    if let (Some(wa), Some(wb)) = (&va, &vb) {
        let truth = oracle::apply_pred(*p, &[wa, wb]).unwrap_or(false);
        return Ok(Some(if truth == lit.positive {
            Formula::True
        } else {
            Formula::False
        }));
    }
    // For prefix/suffix the needle is the first argument; containment takes
    // the haystack first.
    let (needle, needle_val, hay) = match p {
        PredSym::Prefixof | PredSym::Suffixof => (a, va, b),
        PredSym::Contains => (b, vb, a),
        PredSym::StrEq => return Ok(None),
    };
    if let Some(w) = needle_val {
        let base = cx.db.singleton(&w);
        let sig = cx.db.sigma_star();
        let lang = match p {
            PredSym::Prefixof => cx.db.concat(base, sig),
            PredSym::Suffixof => cx.db.concat(sig, base),
            PredSym::Contains => {
                let left = cx.db.concat(sig, base);
                cx.db.concat(left, sig)
            }
            PredSym::StrEq => unreachable!("equality has no needle"),
        };
        let lang = if lit.positive {
            lang
        } else {
            cx.db.complement(lang, cx.state_cap)?
        };
        return Ok(Some(Formula::Lit(Literal::pos(Atom::InRe {
            var: hay,
            lang,
        }))));
    }
    if !lit.positive {
        // Deferred: revisited when a binding grounds the needle.
        return Ok(None);
    }
    // Positive with a symbolic needle: introduce the witness split.
    Ok(Some(match p {
        PredSym::Prefixof => {
            let rest = cx.intern.fresh("wit", VarSort::Str);
            lin(Atom::FunEq {
                out: hay,
                fun: FunSym::Concat,
                args: vec![needle, rest],
            })
        }
        PredSym::Suffixof => {
            let rest = cx.intern.fresh("wit", VarSort::Str);
            lin(Atom::FunEq {
                out: hay,
                fun: FunSym::Concat,
                args: vec![rest, needle],
            })
        }
        PredSym::Contains => {
            let left = cx.intern.fresh("wit", VarSort::Str);
            let mid = cx.intern.fresh("wit", VarSort::Str);
            let right = cx.intern.fresh("wit", VarSort::Str);
            Formula::and(vec![
                lin(Atom::FunEq {
                    out: hay,
                    fun: FunSym::Concat,
                    args: vec![left, mid],
                }),
                lin(Atom::FunEq {
                    out: mid,
                    fun: FunSym::Concat,
                    args: vec![needle, right],
                }),
            ])
        }
        PredSym::StrEq => unreachable!("handled above"),
    }))
}

/// Replaces `r = extract(s, i, n)` by its exhaustive case split. The fresh
/// cut variables are shared across the in-range branches.
fn expand_substr(r: VarId, s: VarId, i: VarId, n: VarId, cx: &mut NormalizeCx) -> Formula {
    let lr = len_of(cx, r);
    let ls = len_of(cx, s);
    let iv = LinExpr::var(i);
    let nv = LinExpr::var(n);

    let pre = cx.intern.fresh("cut", VarSort::Str);
    let mid = cx.intern.fresh("cut", VarSort::Str);
    let post = cx.intern.fresh("cut", VarSort::Str);
    let lpre = len_of(cx, pre);
    let decomp = vec![
        lin(Atom::FunEq {
            out: s,
            fun: FunSym::Concat,
            args: vec![pre, mid],
        }),
        lin(Atom::FunEq {
            out: mid,
            fun: FunSym::Concat,
            args: vec![r, post],
        }),
        lin(Atom::LinEq(lpre.sub(&iv))),
    ];

    // 0 ≤ i, 1 ≤ n, i + n ≤ |s|  ⇒  |r| = n.
    let mut inside = decomp.clone();
    inside.extend([
        lin(Atom::Ineq(iv.clone())),
        lin(Atom::Ineq(nv.offset(-1))),
        lin(Atom::Ineq(ls.sub(&iv).sub(&nv))),
        lin(Atom::LinEq(lr.sub(&nv))),
    ]);

    // 0 ≤ i < |s|, 1 ≤ n, i + n > |s|  ⇒  |r| = |s| − i.
    let mut tail = decomp;
    tail.extend([
        lin(Atom::Ineq(iv.clone())),
        lin(Atom::Ineq(ls.sub(&iv).offset(-1))),
        lin(Atom::Ineq(nv.offset(-1))),
        lin(Atom::Ineq(iv.add(&nv).sub(&ls).offset(-1))),
        lin(Atom::LinEq(lr.sub(&ls).add(&iv))),
    ]);

    let empty_out = lin(Atom::LinEq(lr));
    let neg_start = Formula::and(vec![
        lin(Atom::Ineq(iv.scale(-1).offset(-1))),
        empty_out.clone(),
    ]);
    let no_width = Formula::and(vec![lin(Atom::Ineq(nv.scale(-1))), empty_out.clone()]);
    let past_end = Formula::and(vec![lin(Atom::Ineq(iv.sub(&ls))), empty_out]);

    Formula::or(vec![
        Formula::and(inside),
        Formula::and(tail),
        neg_start,
        no_width,
        past_end,
    ])
}

/// Conjoins implied facts to `k = first_occurrence(x, y, i)`. The defining
/// atom stays; the facts only narrow the search.
fn augment_indexof(
    lit: &Literal,
    k: VarId,
    x: VarId,
    y: VarId,
    i: VarId,
    cx: &mut NormalizeCx,
) -> Result<Formula, NormalizeError> {
    let kv = LinExpr::var(k);
    let lx = len_of(cx, x);
    let iv = LinExpr::var(i);
    let mut parts = vec![
        Formula::Lit(lit.clone()),
        lin(Atom::Ineq(kv.offset(1))),
        lin(Atom::Ineq(lx.sub(&kv))),
    ];
    let Some(w) = cx.intern.const_str_value(y).cloned() else {
        return Ok(Formula::and(parts));
    };
    if w.is_empty() {
        // The empty needle occurs everywhere: the answer is the start
        // index whenever it is in range.
        let hit = Formula::and(vec![
            lin(Atom::LinEq(kv.sub(&iv))),
            lin(Atom::Ineq(iv.clone())),
            lin(Atom::Ineq(lx.sub(&iv))),
        ]);
        let miss_low = Formula::and(vec![
            lin(Atom::LinEq(kv.offset(1))),
            lin(Atom::Ineq(iv.scale(-1).offset(-1))),
        ]);
        let miss_high = Formula::and(vec![
            lin(Atom::LinEq(kv.offset(1))),
            lin(Atom::Ineq(iv.sub(&lx).offset(-1))),
        ]);
        parts.push(Formula::or(vec![hit, miss_low, miss_high]));
        return Ok(Formula::and(parts));
    }

    let base = cx.db.singleton(&w);
    let sig = cx.db.sigma_star();
    let left = cx.db.concat(sig, base);
    let occurs = cx.db.concat(left, sig);
    let absent = cx.db.complement(occurs, cx.state_cap)?;

    // Found at k ≥ i ≥ 0: x = pre·y·post with |pre| = k, and the slice of
    // pre from position i on holds no occurrence (occurrences straddling
    // into y are not excludable this way, so this stays an implied fact
    // rather than a definition).
    let pre = cx.intern.fresh("occ_pre", VarSort::Str);
    let mid = cx.intern.fresh("occ_mid", VarSort::Str);
    let post = cx.intern.fresh("occ_post", VarSort::Str);
    let lpre = len_of(cx, pre);
    let mut found = vec![
        lin(Atom::FunEq {
            out: x,
            fun: FunSym::Concat,
            args: vec![pre, mid],
        }),
        lin(Atom::FunEq {
            out: mid,
            fun: FunSym::Concat,
            args: vec![y, post],
        }),
        lin(Atom::LinEq(lpre.sub(&kv))),
        lin(Atom::Ineq(kv.sub(&iv))),
        lin(Atom::Ineq(iv.clone())),
        lin(Atom::Ineq(lx.sub(&iv))),
    ];
    match cx.intern.const_int_value(i) {
        Some(0) => {
            found.push(lin(Atom::InRe {
                var: pre,
                lang: absent,
            }));
        }
        _ => {
            // Only the part of `pre` at or past the start index must be
            // occurrence-free.
            let skipped = cx.intern.fresh("occ_skip", VarSort::Str);
            let scanned = cx.intern.fresh("occ_scan", VarSort::Str);
            let lskip = len_of(cx, skipped);
            found.extend([
                lin(Atom::FunEq {
                    out: pre,
                    fun: FunSym::Concat,
                    args: vec![skipped, scanned],
                }),
                lin(Atom::LinEq(lskip.sub(&iv))),
                lin(Atom::InRe {
                    var: scanned,
                    lang: absent,
                }),
            ]);
        }
    }

    // Missed: with a known start index this is exact — either the string
    // is too short to reach it, or the suffix from it on is
    // occurrence-free.
    let missed = match cx.intern.const_int_value(i) {
        Some(c) if c >= 0 => {
            let c = c as u64;
            let exact_c = cx.db.length_window(c, Some(c));
            let tail_free = cx.db.concat(exact_c, absent);
            let lang = if c == 0 {
                tail_free
            } else {
                let short = cx.db.length_window(0, Some(c - 1));
                let merged = {
                    let a = cx.db.get(short);
                    let b = cx.db.get(tail_free);
                    a.union(b)
                };
                cx.db.intern(merged)
            };
            Formula::and(vec![
                lin(Atom::LinEq(kv.offset(1))),
                lin(Atom::InRe { var: x, lang }),
            ])
        }
        _ => lin(Atom::LinEq(kv.offset(1))),
    };

    parts.push(Formula::or(vec![Formula::and(found), missed]));
    Ok(Formula::and(parts))
}

/// Linear length facts implied by one positive literal. `None` = nothing
/// to add.
pub(crate) fn length_facts(lit: &Literal, cx: &mut NormalizeCx) -> Option<Formula> {
    if !lit.positive {
        return None;
    }
    let keep = Formula::Lit(lit.clone());
    match &lit.atom {
        Atom::FunEq {
            out,
            fun: FunSym::Concat,
            args,
        } => {
            let mut e = len_of(cx, *out);
            for &a in args {
                e = e.sub(&len_of(cx, a));
            }
            Some(Formula::and(vec![keep, lin(Atom::LinEq(e))]))
        }
        Atom::FunEq {
            out,
            fun: FunSym::Reverse,
            args,
        } => {
            let e = len_of(cx, *out).sub(&len_of(cx, args[0]));
            Some(Formula::and(vec![keep, lin(Atom::LinEq(e))]))
        }
        Atom::FunEq { out, fun, args }
            if matches!(fun, FunSym::Replace | FunSym::ReplaceAll) =>
        {
            let pat = cx.intern.const_str_value(args[1])?.clone();
            let rep = cx.intern.const_str_value(args[2])?.clone();
            let delta = rep.len() as i64 - pat.len() as i64;
            let diff = len_of(cx, *out).sub(&len_of(cx, args[0]));
            if delta == 0 {
                return Some(Formula::and(vec![keep, lin(Atom::LinEq(diff))]));
            }
            // |out| = |in| + hits·delta with 0 ≤ hits (≤ 1 for the
            // first-occurrence form).
            let hits = cx.intern.fresh("hits", VarSort::Int);
            let hv = LinExpr::var(hits);
            let mut facts = vec![
                keep,
                lin(Atom::LinEq(diff.sub(&hv.scale(delta)))),
                lin(Atom::Ineq(hv.clone())),
            ];
            if matches!(fun, FunSym::Replace) {
                facts.push(lin(Atom::Ineq(hv.scale(-1).offset(1))));
            }
            Some(Formula::and(facts))
        }
        Atom::InRe { var, lang } => {
            let (lo, hi) = cx.db.length_range(*lang);
            let lo = lo?;
            let lv = len_of(cx, *var);
            let mut facts = vec![keep];
            if let Ok(lo) = i64::try_from(lo) {
                if lo > 0 {
                    facts.push(lin(Atom::Ineq(lv.offset(-lo))));
                }
            }
            if let Some(Ok(hi)) = hi.map(i64::try_from) {
                facts.push(lin(Atom::Ineq(lv.scale(-1).offset(hi))));
            }
            if facts.len() == 1 {
                None
            } else {
                Some(Formula::and(facts))
            }
        }
        _ => None,
    }
}
