//! Scheduled inference rules: identity, priority scoring, and application.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::automata::{Automaton, AutomatonRef, StateId};
use crate::ir::{Atom, Formula, FunSym, LinExpr, Literal, VarId};
use crate::lia;
use crate::oracle;
use crate::strings::SmtString;

use super::goal::{ProofGoal, SolveEnv, Tracer};
use super::{SolverConfig, Weights};

/// A schedulable rule application, identified by what it acts on so that
/// the same opportunity is not queued twice against unchanged state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum RuleApp {
    /// Emptiness check of everything known about one variable.
    Close(VarId),
    /// Merge a variable's memberships into a single automaton.
    Intersect(VarId),
    /// Push argument languages through a definition onto its output.
    Forward(Atom),
    /// Pull the output language of a definition back onto its arguments.
    Backward(Atom),
    /// Break a cyclic concatenation system.
    BreakCycles,
    /// Split a concatenation of a known string at a known length.
    EqDecompose(Atom),
    /// Align two concatenations of the same string with equal head lengths.
    EqPair(Atom, Atom),
    /// Reflect interval bounds on a length into a membership.
    LengthWindow(VarId),
    /// Head-alignment split for two concatenations of the same string.
    Nielsen(Atom, Atom),
    /// Digit-string reasoning for integer/string conversions.
    StrInt(Atom),
    /// Occurrence reasoning for first-index equations over known strings.
    IndexOf(Atom),
}

impl RuleApp {
    pub fn tag(&self) -> &'static str {
        match self {
            RuleApp::Close(_) => "close",
            RuleApp::Intersect(_) => "intersect",
            RuleApp::Forward(_) => "forward",
            RuleApp::Backward(_) => "backward",
            RuleApp::BreakCycles => "break_cycles",
            RuleApp::EqDecompose(_) => "eq_decompose",
            RuleApp::EqPair(..) => "eq_pair",
            RuleApp::LengthWindow(_) => "length_window",
            RuleApp::Nielsen(..) => "nielsen",
            RuleApp::StrInt(_) => "str_int",
            RuleApp::IndexOf(_) => "indexof",
        }
    }

    pub fn target(&self, intern: &crate::ir::Interner) -> String {
        match self {
            RuleApp::Close(v) | RuleApp::Intersect(v) | RuleApp::LengthWindow(v) => {
                intern.name(*v).to_string()
            }
            RuleApp::Forward(a)
            | RuleApp::Backward(a)
            | RuleApp::EqDecompose(a)
            | RuleApp::StrInt(a)
            | RuleApp::IndexOf(a) => a.render(intern),
            RuleApp::EqPair(a, b) | RuleApp::Nielsen(a, b) => {
                format!("{} | {}", a.render(intern), b.render(intern))
            }
            RuleApp::BreakCycles => "concat cycle".to_string(),
        }
    }
}

/// Queue entry. `key` bakes the aging credit in at enqueue time: among equal
/// static scores an older entry always outranks newer ones, and the gap
/// grows as the goal ages, so no enqueued rule starves.
#[derive(Debug, Clone)]
pub(crate) struct Queued {
    pub key: i64,
    pub seq: u64,
    pub priority: i64,
    pub app: RuleApp,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.seq == other.seq
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn hash_refs(h: &mut DefaultHasher, refs: Option<&Vec<AutomatonRef>>) {
    if let Some(refs) = refs {
        let mut sorted: Vec<AutomatonRef> = refs.clone();
        sorted.sort();
        sorted.hash(h);
    }
}

fn hash_var_state(h: &mut DefaultHasher, g: &ProofGoal, env: &SolveEnv, v: VarId) {
    g.resolve_str(env.intern, v).hash(h);
    g.resolve_int(env.intern, v).hash(h);
    hash_refs(h, g.regex.get(&v));
    let iv = g.len_interval(env.intern, v);
    (iv.lo, iv.hi).hash(h);
    match env.intern.sort(v) {
        crate::ir::VarSort::Int => {
            let ivv = g.ints.interval(v);
            (ivv.lo, ivv.hi).hash(h);
        }
        crate::ir::VarSort::Str => {}
    }
}

/// Fingerprint of the state a rule application would read; re-queuing is
/// allowed only when this changes.
pub(crate) fn stamp(app: &RuleApp, g: &ProofGoal, env: &SolveEnv) -> u64 {
    let mut h = DefaultHasher::new();
    match app {
        RuleApp::Close(v) | RuleApp::Intersect(v) | RuleApp::LengthWindow(v) => {
            hash_var_state(&mut h, g, env, *v);
        }
        RuleApp::Forward(a) => {
            if let Atom::FunEq { out, args, .. } = a {
                for &x in args {
                    hash_var_state(&mut h, g, env, x);
                }
                g.resolve_str(env.intern, *out).hash(&mut h);
            }
        }
        RuleApp::Backward(a) => {
            if let Atom::FunEq { out, args, .. } = a {
                hash_var_state(&mut h, g, env, *out);
                for &x in args {
                    g.resolve_str(env.intern, x).hash(&mut h);
                }
            }
        }
        RuleApp::EqDecompose(a) => {
            if let Atom::FunEq { out, args, .. } = a {
                hash_var_state(&mut h, g, env, *out);
                for &x in args {
                    hash_var_state(&mut h, g, env, x);
                }
            }
        }
        RuleApp::StrInt(a) | RuleApp::IndexOf(a) => {
            if let Atom::FunEq { out, args, .. } = a {
                hash_var_state(&mut h, g, env, *out);
                for &x in args {
                    hash_var_state(&mut h, g, env, x);
                }
            }
        }
        // One-shot per atom pair / per goal lineage.
        RuleApp::EqPair(..) | RuleApp::Nielsen(..) | RuleApp::BreakCycles => {}
    }
    h.finish()
}

fn states_of(g: &ProofGoal, env: &SolveEnv, v: VarId) -> i64 {
    match g.regex.get(&v) {
        Some(refs) => refs.iter().map(|&r| env.db.num_states(r) as i64).sum(),
        None => 1,
    }
}

fn any_universal(g: &ProofGoal, env: &SolveEnv, v: VarId) -> bool {
    if g.resolve_str(env.intern, v).is_some() {
        return false;
    }
    match g.regex.get(&v) {
        Some(refs) => refs.is_empty(),
        None => true,
    }
}

fn inexact_image(g: &ProofGoal, env: &SolveEnv, a: &Atom) -> bool {
    let Atom::FunEq { fun, args, .. } = a else {
        return false;
    };
    match fun {
        FunSym::Replace | FunSym::ReplaceAll => {
            g.resolve_str(env.intern, args[1]).is_none()
                || g.resolve_str(env.intern, args[2]).is_none()
        }
        FunSym::ReplaceRe(_) | FunSym::ReplaceReAll(_) => true, // refined at apply time
        _ => false,
    }
}

/// Static score: reward resolved operands, penalize unguided backward and
/// inexact forward images, and charge for automaton size.
pub(crate) fn static_priority(app: &RuleApp, g: &ProofGoal, env: &SolveEnv, w: &Weights) -> i64 {
    let mut s: i64 = 0;
    match app {
        RuleApp::Close(v) | RuleApp::Intersect(v) => {
            if g.resolve_str(env.intern, *v).is_some() {
                s += w.ground;
            }
            s -= w.automata_cost.saturating_mul(2 * states_of(g, env, *v));
        }
        RuleApp::LengthWindow(_) => {
            s -= w.automata_cost * 8;
        }
        RuleApp::Forward(a) => {
            if let Atom::FunEq { out, args, .. } = a {
                let any_ground = args
                    .iter()
                    .chain([out])
                    .any(|&x| g.resolve_str(env.intern, x).is_some());
                if any_ground {
                    s += w.ground;
                }
                if inexact_image(g, env, a) {
                    s -= w.inexact_forward;
                }
                let cost: i64 = args.iter().map(|&x| states_of(g, env, x)).sum();
                s -= w.automata_cost.saturating_mul(2 * cost);
            }
        }
        RuleApp::Backward(a) => {
            if let Atom::FunEq { out, .. } = a {
                if g.resolve_str(env.intern, *out).is_some() {
                    s += w.ground;
                }
                if any_universal(g, env, *out) {
                    s -= w.universal_backward;
                }
                s -= w.automata_cost.saturating_mul(2 * states_of(g, env, *out));
            }
        }
        RuleApp::EqDecompose(_) | RuleApp::EqPair(..) => {
            s += w.ground;
        }
        RuleApp::Nielsen(a, _) => {
            if let Atom::FunEq { out, .. } = a {
                if any_universal(g, env, *out) {
                    s -= w.universal_backward;
                }
            }
        }
        RuleApp::StrInt(a) => {
            if let Atom::FunEq { out, args, .. } = a {
                let pivot = match fun_of(a) {
                    Some(FunSym::ToInt) => *out,
                    _ => args[0],
                };
                if g.resolve_int(env.intern, pivot).is_some() {
                    s += w.ground;
                }
            }
        }
        RuleApp::IndexOf(_) => {
            s += w.ground;
        }
        RuleApp::BreakCycles => {}
    }
    s
}

fn fun_of(a: &Atom) -> Option<FunSym> {
    match a {
        Atom::FunEq { fun, .. } => Some(fun.clone()),
        _ => None,
    }
}

/// Result of applying one rule.
pub(crate) enum Applied {
    /// State changed in place.
    Progress,
    /// Nothing to do against current state.
    NoChange,
    /// The branch splits into the given children, in exploration order.
    Children(Vec<ProofGoal>),
    /// Rule could not run; `mark` poisons closure-based verdicts.
    Skipped { mark: bool },
    /// The branch is closed.
    Closed,
}

pub(crate) fn apply(
    app: &RuleApp,
    g: &mut ProofGoal,
    env: &mut SolveEnv,
    cfg: &SolverConfig,
    tr: &mut Tracer,
) -> Applied {
    match app {
        RuleApp::Close(v) => rule_close(*v, g, env),
        RuleApp::Intersect(v) => rule_intersect(*v, g, env),
        RuleApp::Forward(a) => rule_forward(a, g, env),
        RuleApp::Backward(a) => rule_backward(a, g, env),
        RuleApp::BreakCycles => rule_break_cycles(g, env, tr),
        RuleApp::EqDecompose(a) => rule_eq_decompose(a, g, env),
        RuleApp::EqPair(a, b) => rule_eq_pair(a, b, g, env),
        RuleApp::LengthWindow(v) => rule_length_window(*v, g, env),
        RuleApp::Nielsen(a, b) => rule_nielsen(a, b, g, env, cfg),
        RuleApp::StrInt(a) => rule_str_int(a, g, env),
        RuleApp::IndexOf(a) => rule_indexof(a, g, env),
    }
}

fn live(g: &ProofGoal, a: &Atom) -> bool {
    g.has_atom(&Literal::pos(a.clone()))
}

/// Sets a string variable to a computed value, treating an already-resolved
/// variable (including an interned constant) as a check rather than a bind.
fn set_str(g: &mut ProofGoal, env: &mut SolveEnv, v: VarId, w: SmtString) {
    match g.resolve_str(env.intern, v) {
        Some(have) => {
            if have != w {
                g.close();
            }
        }
        None => g.bind_str(v, w, env),
    }
}

/// Integer counterpart of [`set_str`].
fn set_int(g: &mut ProofGoal, env: &mut SolveEnv, v: VarId, k: i64) {
    match g.resolve_int(env.intern, v) {
        Some(have) => {
            if have != k {
                g.close();
            }
        }
        None => g.bind_int(v, k, env),
    }
}

/// Emptiness of the conjunction of memberships and length window on one
/// variable; also pins the variable when only one word remains.
fn rule_close(v: VarId, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if g.resolve_str(env.intern, v).is_some() {
        return Applied::NoChange;
    }
    let acc = match g.effective(v, env) {
        Ok(acc) => acc,
        Err(()) => return Applied::Skipped { mark: false },
    };
    let iv = g.len_interval(env.intern, v);
    let lo = iv.lo.unwrap_or(0).max(0) as u64;
    let hi = match iv.hi {
        Some(h) if h < lo as i64 => {
            return Applied::Closed;
        }
        Some(h) => Some(h as u64),
        None => None,
    };
    let mut acc = acc;
    if lo > 0 || hi.is_some() {
        let win = env.db.length_window(lo, hi);
        acc = Some(match acc {
            None => win,
            Some(a) => match env.db.intersect(a, win, env.state_cap) {
                Ok(i) => i,
                Err(_) => return Applied::Skipped { mark: false },
            },
        });
    }
    let Some(a) = acc else {
        return Applied::NoChange;
    };
    if env.db.is_empty_lang(a) {
        return Applied::Closed;
    }
    if let Some(w) = env.db.singleton_word(a) {
        g.bind_str(v, w, env);
        return Applied::Progress;
    }
    Applied::NoChange
}

/// Replaces a variable's membership list by their single intersection.
fn rule_intersect(v: VarId, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    let Some(refs) = g.regex.get(&v) else {
        return Applied::NoChange;
    };
    if refs.len() < 2 {
        return Applied::NoChange;
    }
    let refs = refs.clone();
    let mut acc = refs[0];
    for &r in &refs[1..] {
        match env.db.intersect(acc, r, env.state_cap) {
            Ok(i) => acc = i,
            // Too big to merge: keep the list as is.
            Err(_) => return Applied::Skipped { mark: false },
        }
    }
    if env.db.is_empty_lang(acc) {
        return Applied::Closed;
    }
    g.regex.insert(v, vec![acc]);
    Applied::Progress
}

/// Effective automaton of each argument, for image computation.
fn eff_or_sigma(
    g: &ProofGoal,
    env: &mut SolveEnv,
    v: VarId,
) -> Result<(AutomatonRef, bool), ()> {
    match g.effective(v, env)? {
        Some(r) => Ok((r, false)),
        None => Ok((env.db.sigma_star(), true)),
    }
}

/// Pushes what is known about a definition's arguments onto its output.
fn rule_forward(a: &Atom, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if !live(g, a) {
        return Applied::NoChange;
    }
    let Atom::FunEq { out, fun, args } = a else {
        return Applied::NoChange;
    };
    let post: AutomatonRef = match fun {
        FunSym::Concat => {
            let mut acc: Option<AutomatonRef> = None;
            for &x in args {
                let (r, _) = match eff_or_sigma(g, env, x) {
                    Ok(p) => p,
                    Err(()) => return Applied::Skipped { mark: true },
                };
                acc = Some(match acc {
                    None => r,
                    Some(l) => env.db.concat(l, r),
                });
            }
            match acc {
                Some(r) => r,
                None => return Applied::NoChange,
            }
        }
        FunSym::Reverse => {
            let (r, _) = match eff_or_sigma(g, env, args[0]) {
                Ok(p) => p,
                Err(()) => return Applied::Skipped { mark: true },
            };
            env.db.reverse(r)
        }
        FunSym::Replace | FunSym::ReplaceAll | FunSym::ReplaceRe(_) | FunSym::ReplaceReAll(_) => {
            let all = matches!(fun, FunSym::ReplaceAll | FunSym::ReplaceReAll(_));
            let Some((pat, rep)) = replace_word_args(a, g, env) else {
                // Image not computable exactly: over-approximate by leaving
                // the output unconstrained and remember we did.
                g.taint = true;
                return Applied::Progress;
            };
            let (sr, _) = match eff_or_sigma(g, env, args[0]) {
                Ok(p) => p,
                Err(()) => return Applied::Skipped { mark: true },
            };
            if pat.is_empty() {
                if all {
                    // Replacing the empty pattern everywhere is the identity.
                    sr
                } else {
                    // Replacing the first empty match prepends the
                    // replacement.
                    let rsing = env.db.singleton(&rep);
                    env.db.concat(rsing, sr)
                }
            } else {
                let td = env.transducer(&pat, &rep, all);
                let sa = env.db.get(sr).clone();
                match td.post_image(&sa, env.state_cap) {
                    Ok(img) => env.db.intern(img),
                    Err(_) => return Applied::Skipped { mark: true },
                }
            }
        }
        _ => return Applied::NoChange,
    };
    if let Some(w) = g.resolve_str(env.intern, *out) {
        // The output is already concrete: the image is a sound
        // over-approximation of its possible values, so exclusion refutes.
        if !oracle::membership(env.db.get(post), &w) {
            return Applied::Closed;
        }
        return Applied::NoChange;
    }
    let before = g.regex.get(out).map(Vec::len).unwrap_or(0);
    g.add_membership(*out, post, env);
    if g.closed {
        return Applied::Closed;
    }
    let after = g.regex.get(out).map(Vec::len).unwrap_or(0);
    if after > before {
        Applied::Progress
    } else {
        Applied::NoChange
    }
}

/// Ground pattern/replacement of a replacement definition, when the rule
/// can treat the pattern as a single word.
fn replace_word_args(
    a: &Atom,
    g: &ProofGoal,
    env: &mut SolveEnv,
) -> Option<(SmtString, SmtString)> {
    let Atom::FunEq { fun, args, .. } = a else {
        return None;
    };
    match fun {
        FunSym::Replace | FunSym::ReplaceAll => {
            let pat = g.resolve_str(env.intern, args[1])?;
            let rep = g.resolve_str(env.intern, args[2])?;
            Some((pat, rep))
        }
        FunSym::ReplaceRe(lang) | FunSym::ReplaceReAll(lang) => {
            // Exact only when the pattern language is one nonempty word.
            let w = env.db.singleton_word(*lang)?;
            if w.is_empty() {
                return None;
            }
            let rep = g.resolve_str(env.intern, args[1])?;
            Some((w, rep))
        }
        _ => None,
    }
}

/// Pulls the output language of a definition back onto its arguments,
/// splitting concatenations at automaton states.
fn rule_backward(a: &Atom, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if !live(g, a) {
        return Applied::NoChange;
    }
    let Atom::FunEq { out, fun, args } = a else {
        return Applied::NoChange;
    };
    let acc = match g.effective(*out, env) {
        Ok(acc) => acc,
        Err(()) => return Applied::Skipped { mark: true },
    };
    let Some(aref) = acc else {
        // Universal output carries no information backwards.
        return Applied::NoChange;
    };
    match fun {
        FunSym::Concat if args.len() == 2 => {
            let pairs = env.db.split_at_states(aref);
            let order = bfs_state_order(env.db.get(aref));
            let mut children = Vec::new();
            for q in order {
                let (p, s) = pairs[q as usize];
                let mut c = g.clone();
                c.add_membership(args[0], p, env);
                c.add_membership(args[1], s, env);
                if !c.closed {
                    children.push(c);
                }
            }
            if children.is_empty() {
                return Applied::Closed;
            }
            Applied::Children(children)
        }
        FunSym::Reverse => {
            let r = env.db.reverse(aref);
            let before = g.regex.get(&args[0]).map(Vec::len).unwrap_or(0);
            g.add_membership(args[0], r, env);
            if g.closed {
                return Applied::Closed;
            }
            if g.regex.get(&args[0]).map(Vec::len).unwrap_or(0) > before {
                Applied::Progress
            } else {
                Applied::NoChange
            }
        }
        FunSym::Replace | FunSym::ReplaceAll | FunSym::ReplaceRe(_) | FunSym::ReplaceReAll(_) => {
            let all = matches!(fun, FunSym::ReplaceAll | FunSym::ReplaceReAll(_));
            let Some((pat, rep)) = replace_word_args(a, g, env) else {
                return Applied::Skipped { mark: false };
            };
            let pre: AutomatonRef = if pat.is_empty() {
                if all {
                    aref
                } else {
                    // Output is rep·input: the input language is the left
                    // quotient of the output by the replacement.
                    left_quotient(env, aref, &rep)
                }
            } else {
                let td = env.transducer(&pat, &rep, all);
                let oa = env.db.get(aref).clone();
                match td.pre_image(&oa, env.state_cap) {
                    Ok(img) => env.db.intern(img),
                    Err(_) => return Applied::Skipped { mark: true },
                }
            };
            let before = g.regex.get(&args[0]).map(Vec::len).unwrap_or(0);
            g.add_membership(args[0], pre, env);
            if g.closed {
                return Applied::Closed;
            }
            if g.regex.get(&args[0]).map(Vec::len).unwrap_or(0) > before {
                Applied::Progress
            } else {
                Applied::NoChange
            }
        }
        _ => Applied::NoChange,
    }
}

/// States in breadth-first order from the initial states, then any
/// unreached ones; used to explore small prefixes first.
fn bfs_state_order(a: &Automaton) -> Vec<StateId> {
    let n = a.num_states() as usize;
    let mut order: Vec<StateId> = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut frontier: Vec<StateId> = a.initial().to_vec();
    frontier.sort_unstable();
    for &s in &frontier {
        if !seen[s as usize] {
            seen[s as usize] = true;
            order.push(s);
        }
    }
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        i += 1;
        let mut nexts: Vec<StateId> = a
            .transitions()
            .iter()
            .filter(|t| t.from == q)
            .map(|t| t.to)
            .collect();
        nexts.sort_unstable();
        for t in nexts {
            if !seen[t as usize] {
                seen[t as usize] = true;
                order.push(t);
            }
        }
    }
    for s in 0..n as u32 {
        if !seen[s as usize] {
            order.push(s);
        }
    }
    order
}

/// `{ u : w·u ∈ L }`, assembled from the state splits of `L`.
fn left_quotient(env: &mut SolveEnv, lang: AutomatonRef, w: &SmtString) -> AutomatonRef {
    let pairs = env.db.split_at_states(lang);
    let mut acc: Option<Automaton> = None;
    for (p, s) in pairs {
        if oracle::membership(env.db.get(p), w) {
            let su = env.db.get(s).clone();
            acc = Some(match acc {
                None => su,
                Some(a) => a.union(&su),
            });
        }
    }
    match acc {
        Some(a) => env.db.intern(a),
        None => env.db.empty(),
    }
}

/// Drops one equation of a concatenation cycle and branches over which side
/// of each remaining cyclic equation is forced empty.
fn rule_break_cycles(g: &mut ProofGoal, env: &mut SolveEnv, tr: &mut Tracer) -> Applied {
    let concat: Vec<Literal> = g
        .atoms
        .iter()
        .filter(|l| {
            l.positive
                && matches!(&l.atom, Atom::FunEq { fun: FunSym::Concat, args, .. } if args.len() == 2)
        })
        .cloned()
        .collect();
    let atom_refs: Vec<&Atom> = concat.iter().map(|l| &l.atom).collect();
    let sccs = crate::ir::dependency_sccs(&atom_refs);
    let mut cyclic_vars: std::collections::BTreeSet<VarId> = std::collections::BTreeSet::new();
    for scc in &sccs {
        if scc.len() >= 2 {
            cyclic_vars.extend(scc.iter().copied());
        }
    }
    for l in &concat {
        if let Atom::FunEq { out, args, .. } = &l.atom {
            if args.contains(out) {
                cyclic_vars.insert(*out);
            }
        }
    }
    let cycle_eqs: Vec<Literal> = concat
        .iter()
        .filter(|l| {
            if let Atom::FunEq { out, args, .. } = &l.atom {
                cyclic_vars.contains(out) && args.iter().any(|v| cyclic_vars.contains(v))
            } else {
                false
            }
        })
        .cloned()
        .collect();
    let Some(dropped) = cycle_eqs.first() else {
        return Applied::NoChange;
    };
    tr.emit("break_cycles_drop", g.branch, 0, || {
        dropped.render(env.intern)
    });
    // Any assignment solving the remaining acyclic system keeps the length
    // balance of the dropped equation; model verification re-checks it, and
    // removal only weakens the system, which is sound for closure.
    let dropped = dropped.clone();
    remove_literal(g, &dropped);
    for eq in &cycle_eqs[1..] {
        let Atom::FunEq { args, .. } = &eq.atom else {
            continue;
        };
        let lu = env.intern.len_var(args[0]);
        let lt = env.intern.len_var(args[1]);
        let left = Formula::Lit(Literal::pos(Atom::LinEq(LinExpr::var(lu))));
        let right = Formula::Lit(Literal::pos(Atom::LinEq(LinExpr::var(lt))));
        let or = Formula::or(vec![left, right]);
        g.pending.push(or);
    }
    Applied::Progress
}

fn remove_literal(g: &mut ProofGoal, lit: &Literal) {
    // ProofGoal keeps its own dedup set in sync through this helper.
    g.remove_atom(lit);
}

/// Splits a concatenation of a known word once an argument's length (or
/// value) is known.
fn rule_eq_decompose(a: &Atom, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if !live(g, a) {
        return Applied::NoChange;
    }
    let Atom::FunEq { out, fun, args } = a else {
        return Applied::NoChange;
    };
    if *fun != FunSym::Concat || args.len() != 2 {
        return Applied::NoChange;
    }
    let Some(w) = g.resolve_str(env.intern, *out) else {
        return Applied::NoChange;
    };
    let n = w.len() as i64;
    let head_len = g
        .resolve_str(env.intern, args[0])
        .map(|h| h.len() as i64)
        .or_else(|| {
            let lv = env.intern.len_var(args[0]);
            g.resolve_int(env.intern, lv)
        })
        .or_else(|| {
            // Tail length known instead.
            let lv = env.intern.len_var(args[1]);
            g.resolve_int(env.intern, lv).map(|t| n - t)
        });
    let Some(k) = head_len else {
        return Applied::NoChange;
    };
    if k < 0 || k > n {
        return Applied::Closed;
    }
    let k = k as usize;
    let head = w.slice(0, k);
    let tail = w.slice(k, w.len());
    set_str(g, env, args[0], head);
    if g.closed {
        return Applied::Closed;
    }
    set_str(g, env, args[1], tail);
    if g.closed {
        return Applied::Closed;
    }
    Applied::Progress
}

/// Two concatenations of the same string whose heads have equal length
/// must agree component-wise.
fn rule_eq_pair(a: &Atom, b: &Atom, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if !live(g, a) || !live(g, b) {
        return Applied::NoChange;
    }
    let (Atom::FunEq { args: x, .. }, Atom::FunEq { args: y, .. }) = (a, b) else {
        return Applied::NoChange;
    };
    let mut changed = false;
    for (xa, ya) in [(x[0], y[0]), (x[1], y[1])] {
        if xa == ya {
            continue;
        }
        let lit = Literal::pos(Atom::str_eq(xa, ya));
        if !g.has_atom(&lit) {
            g.install_formula(&Formula::Lit(lit), env, false);
            changed = true;
        }
    }
    if g.closed {
        Applied::Closed
    } else if changed {
        Applied::Progress
    } else {
        Applied::NoChange
    }
}

/// Interval bounds on a length become a window membership.
fn rule_length_window(v: VarId, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if g.resolve_str(env.intern, v).is_some() {
        return Applied::NoChange;
    }
    let iv = g.len_interval(env.intern, v);
    let lo = iv.lo.unwrap_or(0).max(0) as u64;
    let hi = match iv.hi {
        Some(h) if h < lo as i64 => return Applied::Closed,
        Some(h) => Some(h as u64),
        None => None,
    };
    if lo == 0 && hi.is_none() {
        return Applied::NoChange;
    }
    let win = env.db.length_window(lo, hi);
    let before = g.regex.get(&v).map(Vec::len).unwrap_or(0);
    g.add_membership(v, win, env);
    if g.closed {
        return Applied::Closed;
    }
    if g.regex.get(&v).map(Vec::len).unwrap_or(0) > before {
        Applied::Progress
    } else {
        Applied::NoChange
    }
}

/// Head-alignment split: for two concatenations of one string the head of
/// one side is a prefix of the other's head (with a fresh remainder), both
/// ways.
fn rule_nielsen(
    a: &Atom,
    b: &Atom,
    g: &mut ProofGoal,
    env: &mut SolveEnv,
    _cfg: &SolverConfig,
) -> Applied {
    if !live(g, a) || !live(g, b) {
        return Applied::NoChange;
    }
    let (Atom::FunEq { args: x, .. }, Atom::FunEq { args: y, .. }) = (a, b) else {
        return Applied::NoChange;
    };
    let (x1, x2, y1, y2) = (x[0], x[1], y[0], y[1]);
    if x1 == y1 {
        return Applied::NoChange;
    }
    let mut children = Vec::new();
    for flip in [false, true] {
        let (a1, a2, b1, b2) = if flip {
            (y1, y2, x1, x2)
        } else {
            (x1, x2, y1, y2)
        };
        // Here |a1| ≥ |b1|: a1 = b1·w and b2 = w·a2.
        let wv = env.intern.fresh("nw", crate::ir::VarSort::Str);
        let la1 = env.intern.len_var(a1);
        let lb1 = env.intern.len_var(b1);
        let lw = env.intern.len_var(wv);
        let mut c = g.clone();
        let ge = LinExpr::var(la1).sub(&LinExpr::var(lb1));
        c.install_formula(&Formula::Lit(Literal::pos(Atom::Ineq(ge.clone()))), env, false);
        c.install_formula(
            &Formula::Lit(Literal::pos(Atom::LinEq(ge.sub(&LinExpr::var(lw))))),
            env,
            false,
        );
        c.install_formula(
            &Formula::Lit(Literal::pos(Atom::FunEq {
                out: a1,
                fun: FunSym::Concat,
                args: vec![b1, wv],
            })),
            env,
            true,
        );
        c.install_formula(
            &Formula::Lit(Literal::pos(Atom::FunEq {
                out: b2,
                fun: FunSym::Concat,
                args: vec![wv, a2],
            })),
            env,
            true,
        );
        if !c.closed {
            children.push(c);
        }
    }
    if children.is_empty() {
        return Applied::Closed;
    }
    Applied::Children(children)
}

/// Digit-language reasoning for conversions between strings and integers.
fn rule_str_int(a: &Atom, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if !live(g, a) {
        return Applied::NoChange;
    }
    let Atom::FunEq { out, fun, args } = a else {
        return Applied::NoChange;
    };
    match fun {
        FunSym::ToInt => {
            let s = args[0];
            if g.resolve_str(env.intern, s).is_some() {
                // Sweep evaluation handles fully resolved arguments.
                return Applied::NoChange;
            }
            if let Some(k) = g.resolve_int(env.intern, *out) {
                // n = to_int(s) with n known pins s's language exactly.
                if k <= -2 {
                    return Applied::Closed;
                }
                let lang = if k == -1 {
                    let digits = env.digits_plus();
                    match env.db.complement(digits, env.state_cap) {
                        Ok(c) => c,
                        Err(_) => return Applied::Skipped { mark: true },
                    }
                } else {
                    let dec = SmtString::from(k.to_string().as_str());
                    let zs = env.zero_star();
                    let ds = env.db.singleton(&dec);
                    env.db.concat(zs, ds)
                };
                let lit = Literal::pos(a.clone());
                g.remove_atom(&lit);
                g.add_membership(s, lang, env);
                if g.closed {
                    return Applied::Closed;
                }
                return Applied::Progress;
            }
            subdivide_on(*out, g)
        }
        FunSym::FromInt => {
            let n = args[0];
            if let Some(k) = g.resolve_int(env.intern, n) {
                let w = oracle::from_int(k);
                let lit = Literal::pos(a.clone());
                g.remove_atom(&lit);
                set_str(g, env, *out, w);
                if g.closed {
                    return Applied::Closed;
                }
                return Applied::Progress;
            }
            if let Some(w) = g.resolve_str(env.intern, *out) {
                // s known: n is its unique reading, or any negative when
                // s is empty.
                if w.is_empty() {
                    let lit = Literal::pos(a.clone());
                    g.remove_atom(&lit);
                    let e = LinExpr::var(n).scale(-1).offset(-1); // −n − 1 ≥ 0
                    g.install_formula(&Formula::Lit(Literal::pos(Atom::Ineq(e))), env, false);
                    if g.closed {
                        return Applied::Closed;
                    }
                    return Applied::Progress;
                }
                let txt = w.to_string_lossy();
                let canonical = txt.chars().all(|c| c.is_ascii_digit())
                    && (txt == "0" || !txt.starts_with('0'));
                let Some(k) = canonical.then(|| txt.parse::<i64>().ok()).flatten() else {
                    return Applied::Closed;
                };
                let lit = Literal::pos(a.clone());
                g.remove_atom(&lit);
                set_int(g, env, n, k);
                if g.closed {
                    return Applied::Closed;
                }
                return Applied::Progress;
            }
            subdivide_on(n, g)
        }
        _ => Applied::NoChange,
    }
}

fn subdivide_on(v: VarId, g: &mut ProofGoal) -> Applied {
    let iv = g.ints.interval(v);
    if iv.singleton().is_some() || iv.is_empty() {
        return Applied::NoChange;
    }
    let (a, b) = lia::subdivide(v, &g.ints);
    let mut c1 = g.clone();
    c1.ints = a;
    c1.mark_ints_dirty();
    let mut c2 = g.clone();
    c2.ints = b;
    c2.mark_ints_dirty();
    Applied::Children(vec![c1, c2])
}

/// For `k = indexof(s, p, i)` with `s`, `p` known: evaluate once `i` is
/// concrete; otherwise split `i` into the two out-of-range regimes and the
/// finite in-range window.
fn rule_indexof(a: &Atom, g: &mut ProofGoal, env: &mut SolveEnv) -> Applied {
    if !live(g, a) {
        return Applied::NoChange;
    }
    let Atom::FunEq { out, fun, args } = a else {
        return Applied::NoChange;
    };
    if *fun != FunSym::IndexOf {
        return Applied::NoChange;
    }
    let (Some(s), Some(p)) = (
        g.resolve_str(env.intern, args[0]),
        g.resolve_str(env.intern, args[1]),
    ) else {
        return Applied::NoChange;
    };
    let iv = args[2];
    if let Some(i) = g.resolve_int(env.intern, iv) {
        let k = oracle::indexof(&s, &p, i);
        let lit = Literal::pos(a.clone());
        g.remove_atom(&lit);
        set_int(g, env, *out, k);
        if g.closed {
            return Applied::Closed;
        }
        return Applied::Progress;
    }
    let n = s.len() as i64;
    let minus_one = LinExpr::var(*out).offset(1); // k + 1 = 0
    let low = Formula::and(vec![
        Formula::Lit(Literal::pos(Atom::Ineq(
            LinExpr::var(iv).scale(-1).offset(-1),
        ))), // −i − 1 ≥ 0, i.e. i < 0
        Formula::Lit(Literal::pos(Atom::LinEq(minus_one.clone()))),
    ]);
    let high = Formula::and(vec![
        Formula::Lit(Literal::pos(Atom::Ineq(LinExpr::var(iv).offset(-(n + 1))))), // i ≥ n+1
        Formula::Lit(Literal::pos(Atom::LinEq(minus_one))),
    ]);
    let inside = Formula::and(vec![
        Formula::Lit(Literal::pos(Atom::Ineq(LinExpr::var(iv)))), // i ≥ 0
        Formula::Lit(Literal::pos(Atom::Ineq(LinExpr::var(iv).scale(-1).offset(n)))), // i ≤ n
    ]);
    // The finite window goes first so depth-first search grounds the start
    // position before wandering in the unbounded out-of-range regimes.
    let or = Formula::or(vec![inside, low, high]);
    g.pending.push(or);
    Applied::Progress
}
