//! Per-branch proof state: the constraint store a single search branch works
//! on, plus the cheap saturation sweep that runs between scheduled rules.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::rc::Rc;

use crate::automata::{AutomatonDb, AutomatonRef};
use crate::ir::{
    Assignment, Atom, Formula, FunSym, Interner, LinExpr, Literal, NormalizeCx, PredSym, Value,
    VarId, VarSort,
};
use crate::lia::{self, Con, Iv};
use crate::oracle;
use crate::rewriter;
use crate::strings::SmtString;
use crate::xform::{self, ReplaceSpec, Transducer};

use super::rules::{Queued, RuleApp};
use super::{Model, SolverConfig, TraceEvent};

/// Shared mutable context for one `solve` call: the variable table, the
/// automaton store, and caches that outlive individual branches.
pub(crate) struct SolveEnv<'a> {
    pub intern: &'a mut Interner,
    pub db: &'a mut AutomatonDb,
    pub state_cap: usize,
    xforms: HashMap<(SmtString, SmtString, bool), Rc<Transducer>>,
    digits_plus: Option<AutomatonRef>,
    zero_star: Option<AutomatonRef>,
}

impl<'a> SolveEnv<'a> {
    pub fn new(intern: &'a mut Interner, db: &'a mut AutomatonDb, state_cap: usize) -> Self {
        SolveEnv {
            intern,
            db,
            state_cap,
            xforms: HashMap::new(),
            digits_plus: None,
            zero_star: None,
        }
    }

    pub fn cx(&mut self) -> NormalizeCx<'_> {
        NormalizeCx::new(self.intern, self.db, self.state_cap)
    }

    /// Replacement transducer for a known nonempty pattern, cached per
    /// (pattern, replacement, replace-all) triple.
    pub fn transducer(&mut self, pat: &SmtString, rep: &SmtString, all: bool) -> Rc<Transducer> {
        let key = (pat.clone(), rep.clone(), all);
        if let Some(t) = self.xforms.get(&key) {
            return Rc::clone(t);
        }
        let spec = ReplaceSpec {
            pattern: pat.clone(),
            replacement: rep.clone(),
        };
        let td = Rc::new(if all {
            xform::build_replace_all(&spec)
        } else {
            xform::build_replace_first(&spec)
        });
        self.xforms.insert(key, Rc::clone(&td));
        td
    }

    /// Language of strings made of one or more decimal digits.
    pub fn digits_plus(&mut self) -> AutomatonRef {
        if let Some(r) = self.digits_plus {
            return r;
        }
        let mut b = crate::automata::NfaBuilder::new();
        let s0 = b.add_state();
        let s1 = b.add_state();
        b.mark_initial(s0);
        b.mark_accepting(s1);
        b.add_transition(s0, '0' as u32, '9' as u32, s1);
        b.add_transition(s1, '0' as u32, '9' as u32, s1);
        let r = self.db.intern(b.finish());
        self.digits_plus = Some(r);
        r
    }

    /// Language of arbitrarily many leading zeros.
    pub fn zero_star(&mut self) -> AutomatonRef {
        if let Some(r) = self.zero_star {
            return r;
        }
        let mut b = crate::automata::NfaBuilder::new();
        let s0 = b.add_state();
        b.mark_initial(s0);
        b.mark_accepting(s0);
        b.add_transition(s0, '0' as u32, '0' as u32, s0);
        let r = self.db.intern(b.finish());
        self.zero_star = Some(r);
        r
    }
}

/// Structured log of rule applications, collected only when enabled.
pub(crate) struct Tracer {
    pub on: bool,
    pub events: Vec<TraceEvent>,
}

impl Tracer {
    pub fn new(on: bool) -> Self {
        Tracer {
            on,
            events: Vec::new(),
        }
    }

    pub fn emit(
        &mut self,
        rule: &'static str,
        branch: u64,
        priority: i64,
        target: impl FnOnce() -> String,
    ) {
        if self.on {
            self.events.push(TraceEvent {
                rule,
                target: target(),
                priority,
                branch,
            });
        }
    }
}

/// What a fully ground branch evaluates to.
pub(crate) enum Ground {
    NotGround,
    Sat(Model),
    Refuted,
    /// Every branch-local constraint held but the input formula did not:
    /// the candidate is discarded and the run can no longer claim
    /// unsatisfiability.
    VerifyFailed,
}

/// Outcome of asking a quiescent branch for its next case split.
pub(crate) enum Split {
    Children(Vec<ProofGoal>),
    ClosedNow,
    Stuck,
}

/// One branch of the search tree: a set of literals, per-variable automata,
/// concrete bindings, integer intervals, deferred disjunctions, and the
/// rule queue that drives refinement.
#[derive(Clone)]
pub(crate) struct ProofGoal {
    pub branch: u64,
    pub closed: bool,
    /// Set once any over-approximate image step touched this branch; a
    /// tainted branch may still find models but its closure no longer
    /// supports an unsatisfiability verdict.
    pub taint: bool,
    pub atoms: Vec<Literal>,
    atom_set: HashSet<Literal>,
    pub regex: BTreeMap<VarId, Vec<AutomatonRef>>,
    pub bindings: Assignment,
    pub ints: lia::IntervalStore,
    pub lincons: Vec<Con>,
    pub pending: Vec<Formula>,
    queue: BinaryHeap<Queued>,
    seen: HashSet<(RuleApp, u64)>,
    stuck: HashSet<Literal>,
    pub vars: BTreeSet<VarId>,
    pub age: u64,
    seq: u64,
    dirty_lin: bool,
}

impl ProofGoal {
    pub fn new(branch: u64) -> Self {
        ProofGoal {
            branch,
            closed: false,
            taint: false,
            atoms: Vec::new(),
            atom_set: HashSet::new(),
            regex: BTreeMap::new(),
            bindings: BTreeMap::new(),
            ints: lia::IntervalStore::new(),
            lincons: Vec::new(),
            pending: Vec::new(),
            queue: BinaryHeap::new(),
            seen: HashSet::new(),
            stuck: HashSet::new(),
            vars: BTreeSet::new(),
            age: 0,
            seq: 0,
            dirty_lin: false,
        }
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn has_atom(&self, lit: &Literal) -> bool {
        self.atom_set.contains(lit)
    }

    pub(crate) fn remove_atom(&mut self, lit: &Literal) {
        if self.atom_set.remove(lit) {
            self.atoms.retain(|a| a != lit);
        }
    }

    /// Forces interval propagation on the next sweep.
    pub(crate) fn mark_ints_dirty(&mut self) {
        self.dirty_lin = true;
    }

    /// Resolves a string variable to a concrete word, through bindings or
    /// interned constants.
    pub fn resolve_str(&self, intern: &Interner, v: VarId) -> Option<SmtString> {
        if let Some(val) = self.bindings.get(&v) {
            return val.as_str().cloned();
        }
        intern.const_str_value(v).cloned()
    }

    /// Resolves an integer variable, falling back to a pinned interval or —
    /// for a length variable — the length of its owner's value.
    pub fn resolve_int(&self, intern: &Interner, v: VarId) -> Option<i64> {
        if let Some(val) = self.bindings.get(&v) {
            return val.as_int();
        }
        if let Some(k) = intern.const_int_value(v) {
            return Some(k);
        }
        if let Some(k) = self.ints.concrete_value(v) {
            return Some(k);
        }
        if let Some(owner) = intern.len_owner(v) {
            return self.resolve_str(intern, owner).map(|w| w.len() as i64);
        }
        None
    }

    fn add_var(&mut self, v: VarId, env: &mut SolveEnv) {
        let is_const =
            env.intern.const_str_value(v).is_some() || env.intern.const_int_value(v).is_some();
        if is_const {
            return;
        }
        if !self.vars.insert(v) {
            return;
        }
        match env.intern.sort(v) {
            VarSort::Str => {
                let lv = env.intern.len_var(v);
                self.add_var(lv, env);
            }
            VarSort::Int => {
                if let Some(owner) = env.intern.len_owner(v) {
                    // The length of an interned constant is known outright;
                    // any other length is at least zero.
                    let seeded = match env.intern.const_str_value(owner) {
                        Some(w) => {
                            let n = w.len() as i64;
                            self.ints.bind(v, n).map(|_| true)
                        }
                        None => self.ints.tighten_lo(v, 0),
                    };
                    if seeded.is_err() {
                        self.close();
                    }
                    self.dirty_lin = true;
                    // A constraint on a length constrains its string: the
                    // string joins the branch so grounding reaches it.
                    self.add_var(owner, env);
                }
            }
        }
    }

    fn add_vars_of(&mut self, f: &Formula, env: &mut SolveEnv) {
        let mut vs = Vec::new();
        f.for_each_literal(&mut |lit| vs.extend(lit.atom.vars()));
        for v in vs {
            self.add_var(v, env);
        }
    }

    /// Records `v ∈ L(r)`, closing on an empty language and skipping the
    /// universal one. A resolved variable is checked immediately instead.
    pub fn add_membership(&mut self, v: VarId, r: AutomatonRef, env: &mut SolveEnv) {
        self.add_var(v, env);
        if let Some(w) = self.resolve_str(env.intern, v) {
            if !oracle::membership(env.db.get(r), &w) {
                self.close();
            }
            return;
        }
        if env.db.is_universal_handle(r) {
            return;
        }
        if env.db.is_empty_lang(r) {
            self.close();
            return;
        }
        let refs = self.regex.entry(v).or_default();
        if !refs.contains(&r) {
            refs.push(r);
        }
        // Length bounds implied by the automaton feed the interval store.
        let (lo, hi) = env.db.length_range(r);
        if let (Some(lo), lv) = (lo, env.intern.len_var(v)) {
            if lo > 0 {
                if let Ok(lo) = i64::try_from(lo) {
                    self.push_con(Con::Ge(LinExpr::var(lv).offset(-lo)));
                }
            }
            if let Some(hi) = hi {
                if let Ok(hi) = i64::try_from(hi) {
                    self.push_con(Con::Ge(LinExpr::var(lv).scale(-1).offset(hi)));
                }
            }
        }
    }

    fn push_con(&mut self, con: Con) {
        if !self.lincons.contains(&con) {
            self.lincons.push(con);
            self.dirty_lin = true;
        }
    }

    /// Installs a formula as committed constraints; disjunctions are parked
    /// for later case splits. With `with_facts`, newly added definitions
    /// also contribute their linear length consequences (used for equations
    /// invented during search; the preprocessed input carries its facts
    /// already).
    pub fn install_formula(&mut self, f: &Formula, env: &mut SolveEnv, with_facts: bool) {
        if self.closed {
            return;
        }
        match f {
            Formula::True => {}
            Formula::False => self.close(),
            Formula::And(parts) => {
                for p in parts {
                    self.install_formula(p, env, with_facts);
                }
            }
            Formula::Or(_) => {
                self.add_vars_of(f, env);
                self.pending.push(f.clone());
            }
            Formula::Lit(l) => self.install_literal(l, env, with_facts),
        }
    }

    fn install_literal(&mut self, l: &Literal, env: &mut SolveEnv, with_facts: bool) {
        if self.closed {
            return;
        }
        for v in l.atom.vars() {
            self.add_var(v, env);
        }
        match &l.atom {
            Atom::InRe { var, lang } => {
                if l.positive {
                    self.add_membership(*var, *lang, env);
                } else {
                    // Rare path: an explicit negative membership becomes a
                    // positive one over the complement when affordable.
                    match env.db.complement(*lang, env.state_cap) {
                        Ok(c) => self.add_membership(*var, c, env),
                        Err(_) => {
                            if self.atom_set.insert(l.clone()) {
                                self.atoms.push(l.clone());
                            }
                        }
                    }
                }
            }
            Atom::LinEq(e) => {
                if l.positive {
                    self.push_con(Con::Eq(e.clone()));
                } else {
                    // e ≠ 0 splits into e ≥ 1 or −e ≥ 1.
                    let lo = Formula::Lit(Literal::pos(Atom::Ineq(e.offset(-1))));
                    let hi = Formula::Lit(Literal::pos(Atom::Ineq(e.scale(-1).offset(-1))));
                    let or = Formula::or(vec![lo, hi]);
                    self.add_vars_of(&or, env);
                    self.pending.push(or);
                }
            }
            Atom::Ineq(e) => {
                if l.positive {
                    self.push_con(Con::Ge(e.clone()));
                } else {
                    self.push_con(Con::Ge(e.scale(-1).offset(-1)));
                }
            }
            Atom::Pred(..) | Atom::FunEq { .. } => {
                if self.atom_set.insert(l.clone()) {
                    self.atoms.push(l.clone());
                }
                if let Atom::Pred(PredSym::StrEq, vs) = &l.atom {
                    if l.positive {
                        // Equal strings have equal lengths.
                        let la = env.intern.len_var(vs[0]);
                        let lb = env.intern.len_var(vs[1]);
                        self.add_var(la, env);
                        self.add_var(lb, env);
                        self.push_con(Con::Eq(LinExpr::var(la).sub(&LinExpr::var(lb))));
                    }
                }
                if let Atom::FunEq { out, fun, .. } = &l.atom {
                    if l.positive && *fun == FunSym::ToInt {
                        // The first-class integer image is always ≥ −1.
                        self.push_con(Con::Ge(LinExpr::var(*out).offset(1)));
                    }
                    if l.positive && with_facts {
                        let mut cx = env.cx();
                        let fact = rewriter::length_facts(l, &mut cx);
                        let extra = cx.drain_global();
                        if let Some(fact) = fact {
                            self.install_formula(&fact, env, false);
                        }
                        for g in extra {
                            self.install_formula(&g, env, false);
                        }
                    }
                }
            }
        }
    }

    /// Binds a string variable, closing on any conflict with prior
    /// bindings, lengths, or memberships.
    pub fn bind_str(&mut self, v: VarId, w: SmtString, env: &mut SolveEnv) {
        if self.closed {
            return;
        }
        if let Some(old) = self.bindings.get(&v) {
            if old.as_str() != Some(&w) {
                self.close();
            }
            return;
        }
        self.add_var(v, env);
        let lv = env.intern.len_var(v);
        if self.ints.bind(lv, w.len() as i64).is_err() {
            self.close();
            return;
        }
        self.dirty_lin = true;
        if let Some(refs) = self.regex.remove(&v) {
            for r in refs {
                if !oracle::membership(env.db.get(r), &w) {
                    self.close();
                    return;
                }
            }
        }
        self.bindings.insert(v, Value::Str(w));
    }

    /// Binds an integer variable, closing on conflicts.
    pub fn bind_int(&mut self, v: VarId, k: i64, env: &mut SolveEnv) {
        if self.closed {
            return;
        }
        if let Some(old) = self.bindings.get(&v) {
            if old.as_int() != Some(k) {
                self.close();
            }
            return;
        }
        self.add_var(v, env);
        if self.ints.bind(v, k).is_err() {
            self.close();
            return;
        }
        self.dirty_lin = true;
        self.bindings.insert(v, Value::Int(k));
    }

    /// Cheap saturation: interval propagation, ground evaluation of
    /// evaluable atoms, one-sided equality bindings, and re-simplification
    /// of predicates whose needle a binding has grounded. Runs to fixpoint,
    /// then refreshes the rule queue.
    pub fn sweep(&mut self, env: &mut SolveEnv, cfg: &SolverConfig, tr: &mut Tracer) {
        loop {
            if self.closed {
                return;
            }
            let mut changed = false;
            if self.dirty_lin {
                self.dirty_lin = false;
                if lia::propagate(&self.lincons, &mut self.ints).is_err() {
                    self.close();
                    return;
                }
                // Intervals pinned to a point become bindings so equality
                // reasoning and model extraction can see them.
                let pinned: Vec<(VarId, i64)> = self
                    .ints
                    .vars()
                    .filter(|v| !self.bindings.contains_key(v))
                    .filter_map(|v| self.ints.concrete_value(v).map(|k| (v, k)))
                    .collect();
                for (v, k) in pinned {
                    self.bindings.insert(v, Value::Int(k));
                    changed = true;
                }
            }
            if let Some(act) = self.first_sweep_action(env) {
                self.run_sweep_action(act, env, tr);
                changed = true;
            }
            if !changed {
                break;
            }
        }
        self.rescan(env, cfg);
    }

    fn first_sweep_action(&self, env: &SolveEnv) -> Option<SweepAction> {
        for lit in &self.atoms {
            if self.stuck.contains(lit) {
                continue;
            }
            match &lit.atom {
                Atom::FunEq { out, fun, args } => {
                    let vals: Option<Vec<Value>> = args
                        .iter()
                        .map(|&a| self.resolve_value(env.intern, a))
                        .collect();
                    if let Some(vals) = vals {
                        if let Some(got) = oracle::apply_fun(fun, &vals, env.db) {
                            return Some(SweepAction::Computed(lit.clone(), *out, got));
                        }
                    }
                }
                Atom::Pred(p, vs) => {
                    let va = self.resolve_str(env.intern, vs[0]);
                    let vb = self.resolve_str(env.intern, vs[1]);
                    if let (Some(wa), Some(wb)) = (&va, &vb) {
                        let truth = oracle::apply_pred(*p, &[wa, wb]).unwrap_or(false);
                        return Some(SweepAction::Evaluated(lit.clone(), truth == lit.positive));
                    }
                    if *p == PredSym::StrEq {
                        if let Some(w) = va {
                            return Some(SweepAction::EqBind(lit.clone(), vs[1], w));
                        }
                        if let Some(w) = vb {
                            return Some(SweepAction::EqBind(lit.clone(), vs[0], w));
                        }
                        continue;
                    }
                    let needle_known = match p {
                        PredSym::Prefixof | PredSym::Suffixof => va.is_some(),
                        PredSym::Contains => vb.is_some(),
                        PredSym::StrEq => unreachable!("handled above"),
                    };
                    if needle_known || vs[0] == vs[1] {
                        return Some(SweepAction::Simplify(lit.clone(), va, vb));
                    }
                }
                Atom::InRe { var, lang } => {
                    // Only kept here when negative and too big to complement.
                    if let Some(w) = self.resolve_str(env.intern, *var) {
                        let inside = oracle::membership(env.db.get(*lang), &w);
                        return Some(SweepAction::Evaluated(lit.clone(), inside == lit.positive));
                    }
                }
                Atom::LinEq(_) | Atom::Ineq(_) => {}
            }
        }
        None
    }

    fn run_sweep_action(&mut self, act: SweepAction, env: &mut SolveEnv, tr: &mut Tracer) {
        match act {
            SweepAction::Computed(lit, out, got) => {
                match self.resolve_value(env.intern, out) {
                    Some(existing) => {
                        self.remove_atom(&lit);
                        let holds = existing == got;
                        if holds != lit.positive {
                            self.close();
                        }
                    }
                    None => {
                        tr.emit("bind", self.branch, 0, || lit.render(env.intern));
                        if lit.positive {
                            match got {
                                Value::Str(w) => self.bind_str(out, w, env),
                                Value::Int(k) => self.bind_int(out, k, env),
                            }
                            self.remove_atom(&lit);
                        } else {
                            // A negated definition excludes exactly one value.
                            self.remove_atom(&lit);
                            match got {
                                Value::Str(w) => {
                                    let s = env.db.singleton(&w);
                                    match env.db.complement(s, env.state_cap) {
                                        Ok(c) => self.add_membership(out, c, env),
                                        Err(_) => self.taint = true,
                                    }
                                }
                                Value::Int(k) => {
                                    let e = LinExpr::var(out).offset(-k);
                                    let lo = Formula::Lit(Literal::pos(Atom::Ineq(e.offset(-1))));
                                    let hi = Formula::Lit(Literal::pos(Atom::Ineq(
                                        e.scale(-1).offset(-1),
                                    )));
                                    let or = Formula::or(vec![lo, hi]);
                                    self.pending.push(or);
                                }
                            }
                        }
                    }
                }
            }
            SweepAction::Evaluated(lit, ok) => {
                tr.emit("eval", self.branch, 0, || lit.render(env.intern));
                self.remove_atom(&lit);
                if !ok {
                    self.close();
                }
            }
            SweepAction::EqBind(lit, v, w) => {
                if lit.positive {
                    tr.emit("bind", self.branch, 0, || lit.render(env.intern));
                    self.remove_atom(&lit);
                    self.bind_str(v, w, env);
                } else {
                    // v ≠ w is exactly membership in the complement.
                    let s = env.db.singleton(&w);
                    match env.db.complement(s, env.state_cap) {
                        Ok(c) => {
                            self.remove_atom(&lit);
                            self.add_membership(v, c, env);
                        }
                        Err(_) => {
                            self.taint = true;
                            self.stuck.insert(lit);
                        }
                    }
                }
            }
            SweepAction::Simplify(lit, va, vb) => {
                let mut cx = env.cx();
                let rewritten = rewriter::simplify_pred_resolved(&lit, va, vb, &mut cx);
                let extra = cx.drain_global();
                match rewritten {
                    Ok(Some(f)) => {
                        tr.emit("simplify", self.branch, 0, || lit.render(env.intern));
                        self.remove_atom(&lit);
                        self.install_formula(&f, env, true);
                    }
                    Ok(None) => {
                        self.stuck.insert(lit);
                    }
                    Err(_) => {
                        self.taint = true;
                        self.stuck.insert(lit);
                    }
                }
                for g in extra {
                    self.install_formula(&g, env, true);
                }
            }
        }
    }

    fn resolve_value(&self, intern: &Interner, v: VarId) -> Option<Value> {
        match intern.sort(v) {
            VarSort::Str => self.resolve_str(intern, v).map(Value::Str),
            VarSort::Int => self.resolve_int(intern, v).map(Value::Int),
        }
    }

    /// Intersection of everything known about `v` as one automaton:
    /// `Ok(None)` means unconstrained.
    pub fn effective(&self, v: VarId, env: &mut SolveEnv) -> Result<Option<AutomatonRef>, ()> {
        if let Some(w) = self.resolve_str(env.intern, v) {
            return Ok(Some(env.db.singleton(&w)));
        }
        let Some(refs) = self.regex.get(&v) else {
            return Ok(None);
        };
        let mut acc: Option<AutomatonRef> = None;
        for &r in refs {
            acc = Some(match acc {
                None => r,
                Some(a) => env.db.intersect(a, r, env.state_cap).map_err(|_| ())?,
            });
        }
        Ok(acc)
    }

    /// The length interval for `v`'s length variable, if known.
    pub fn len_interval(&self, intern: &Interner, v: VarId) -> Iv {
        match intern.len_var_opt(v) {
            Some(lv) => self.ints.interval(lv),
            None => Iv::FULL,
        }
    }

    fn enqueue(&mut self, app: RuleApp, env: &SolveEnv, cfg: &SolverConfig) {
        let st = super::rules::stamp(&app, self, env);
        if !self.seen.insert((app.clone(), st)) {
            return;
        }
        let priority = super::rules::static_priority(&app, self, env, &cfg.weights);
        let key = priority - cfg.weights.aging.saturating_mul(self.age as i64);
        self.seq += 1;
        self.queue.push(Queued {
            key,
            seq: self.seq,
            priority,
            app,
        });
    }

    pub fn pop_rule(&mut self) -> Option<Queued> {
        self.queue.pop()
    }

    /// Scans current state for rule applications not yet tried against this
    /// state and schedules them.
    pub fn rescan(&mut self, env: &mut SolveEnv, cfg: &SolverConfig) {
        if self.closed {
            return;
        }
        // Memberships flow across committed equalities: both sides of an
        // equality satisfy the union of both membership lists.
        let eq_pairs: Vec<(VarId, VarId)> = self
            .atoms
            .iter()
            .filter_map(|l| match &l.atom {
                Atom::Pred(PredSym::StrEq, vs) if l.positive => Some((vs[0], vs[1])),
                _ => None,
            })
            .collect();
        for (a, b) in eq_pairs {
            let ra = self.regex.get(&a).cloned().unwrap_or_default();
            let rb = self.regex.get(&b).cloned().unwrap_or_default();
            for r in rb {
                self.add_membership(a, r, env);
            }
            for r in ra {
                self.add_membership(b, r, env);
            }
            if self.closed {
                return;
            }
        }
        let mut cands: Vec<RuleApp> = Vec::new();
        for (&v, refs) in &self.regex {
            if refs.is_empty() {
                continue;
            }
            cands.push(RuleApp::Close(v));
            if cfg.eager && refs.len() >= 2 {
                cands.push(RuleApp::Intersect(v));
            }
        }
        for &v in &self.vars {
            if env.intern.sort(v) != VarSort::Str || self.resolve_str(env.intern, v).is_some() {
                continue;
            }
            let iv = self.len_interval(env.intern, v);
            if iv.lo.unwrap_or(0) > 0 || iv.hi.is_some() {
                cands.push(RuleApp::LengthWindow(v));
            }
        }
        let mut concat_eqs: Vec<Literal> = Vec::new();
        for lit in &self.atoms {
            if !lit.positive {
                continue;
            }
            let Atom::FunEq { out, fun, args } = &lit.atom else {
                continue;
            };
            match fun {
                FunSym::Concat
                | FunSym::Reverse
                | FunSym::Replace
                | FunSym::ReplaceAll
                | FunSym::ReplaceRe(_)
                | FunSym::ReplaceReAll(_) => {
                    if cfg.forward {
                        cands.push(RuleApp::Forward(lit.atom.clone()));
                    }
                    let backward_ok = matches!(fun, FunSym::Reverse)
                        || (*fun == FunSym::Concat && args.len() == 2)
                        || matches!(
                            fun,
                            FunSym::Replace
                                | FunSym::ReplaceAll
                                | FunSym::ReplaceRe(_)
                                | FunSym::ReplaceReAll(_)
                        );
                    if cfg.backward && backward_ok {
                        cands.push(RuleApp::Backward(lit.atom.clone()));
                    }
                    if *fun == FunSym::Concat && args.len() == 2 {
                        concat_eqs.push(lit.clone());
                        if self.resolve_str(env.intern, *out).is_some() {
                            let splittable = args.iter().any(|&a| {
                                self.resolve_str(env.intern, a).is_some()
                                    || self.len_interval(env.intern, a).singleton().is_some()
                            });
                            if splittable {
                                cands.push(RuleApp::EqDecompose(lit.atom.clone()));
                            }
                        }
                    }
                }
                FunSym::ToInt | FunSym::FromInt => {
                    cands.push(RuleApp::StrInt(lit.atom.clone()));
                }
                FunSym::IndexOf => {
                    let s = self.resolve_str(env.intern, args[0]);
                    let p = self.resolve_str(env.intern, args[1]);
                    if s.is_some() && p.is_some() {
                        cands.push(RuleApp::IndexOf(lit.atom.clone()));
                    }
                }
                FunSym::Substr => {}
            }
        }
        // Pairs of concatenation definitions of the same string (directly or
        // through committed equalities) admit alignment splits.
        let canon = self.eq_classes();
        let rep = |v: VarId| *canon.get(&v).unwrap_or(&v);
        for i in 0..concat_eqs.len() {
            for j in (i + 1)..concat_eqs.len() {
                let (a1, a2) = (&concat_eqs[i].atom, &concat_eqs[j].atom);
                let (Atom::FunEq { out: o1, args: x, .. }, Atom::FunEq { out: o2, args: y, .. }) =
                    (a1, a2)
                else {
                    continue;
                };
                if rep(*o1) != rep(*o2) || a1 == a2 {
                    continue;
                }
                let lx = env.intern.len_var_opt(x[0]);
                let ly = env.intern.len_var_opt(y[0]);
                let aligned = match (lx, ly) {
                    (Some(lx), Some(ly)) => {
                        x[0] == y[0]
                            || self
                                .ints
                                .entails_eq0(&LinExpr::var(lx).sub(&LinExpr::var(ly)))
                    }
                    _ => x[0] == y[0],
                };
                if aligned {
                    cands.push(RuleApp::EqPair(a1.clone(), a2.clone()));
                } else if cfg.nielsen {
                    cands.push(RuleApp::Nielsen(a1.clone(), a2.clone()));
                }
            }
        }
        // Cyclic concatenation systems get a cycle-breaking split.
        let concat_atoms: Vec<&Atom> = concat_eqs.iter().map(|l| &l.atom).collect();
        if has_concat_cycle(&concat_atoms) {
            cands.push(RuleApp::BreakCycles);
        }
        for app in cands {
            self.enqueue(app, env, cfg);
        }
    }

    /// Representative map for variables made equal by committed positive
    /// equality atoms.
    fn eq_classes(&self) -> BTreeMap<VarId, VarId> {
        let mut parent: BTreeMap<VarId, VarId> = BTreeMap::new();
        fn find(parent: &mut BTreeMap<VarId, VarId>, v: VarId) -> VarId {
            let p = *parent.get(&v).unwrap_or(&v);
            if p == v {
                return v;
            }
            let r = find(parent, p);
            parent.insert(v, r);
            r
        }
        for lit in &self.atoms {
            if !lit.positive {
                continue;
            }
            if let Atom::Pred(PredSym::StrEq, vs) = &lit.atom {
                let (a, b) = (find(&mut parent, vs[0]), find(&mut parent, vs[1]));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent.insert(hi, lo);
                }
            }
        }
        let keys: Vec<VarId> = parent.keys().copied().collect();
        for v in keys {
            find(&mut parent, v);
        }
        parent
    }

    /// If every variable is resolved, evaluates the branch: all branch
    /// constraints must hold, and the resulting assignment must satisfy the
    /// formula the caller asked about.
    pub fn evaluate_if_ground(&self, original: &Formula, env: &SolveEnv) -> Ground {
        let mut asg: Assignment = BTreeMap::new();
        for &v in &self.vars {
            match self.resolve_value(env.intern, v) {
                Some(val) => {
                    asg.insert(v, val);
                }
                None => return Ground::NotGround,
            }
        }
        // Constants referenced by constraints must be visible to evaluation.
        let mut referenced: Vec<VarId> = Vec::new();
        for lit in &self.atoms {
            referenced.extend(lit.atom.vars());
        }
        for f in &self.pending {
            f.for_each_literal(&mut |l| referenced.extend(l.atom.vars()));
        }
        original.for_each_literal(&mut |l| referenced.extend(l.atom.vars()));
        let put = |asg: &mut Assignment, intern: &Interner, v: VarId, val: Value| {
            if let (Value::Str(w), Some(lv)) = (&val, intern.len_var_opt(v)) {
                asg.entry(lv).or_insert(Value::Int(w.len() as i64));
            }
            asg.insert(v, val);
        };
        for &v in &referenced {
            if asg.contains_key(&v) {
                continue;
            }
            if let Some(val) = self.resolve_value(env.intern, v) {
                put(&mut asg, env.intern, v, val);
            }
        }
        // Auxiliary outputs the worked formula no longer mentions (for
        // example after duplicate applications were merged) are recomputed
        // from their definitions in the caller's formula before defaulting
        // anything.
        let mut defs: Vec<(VarId, FunSym, Vec<VarId>)> = Vec::new();
        original.for_each_literal(&mut |l| {
            if l.positive {
                if let Atom::FunEq { out, fun, args } = &l.atom {
                    defs.push((*out, fun.clone(), args.clone()));
                }
            }
        });
        loop {
            let mut progressed = false;
            for (out, fun, args) in &defs {
                if asg.contains_key(out) {
                    continue;
                }
                let vals: Option<Vec<Value>> =
                    args.iter().map(|a| asg.get(a).cloned()).collect();
                let Some(vals) = vals else { continue };
                if let Some(v) = oracle::apply_fun(fun, &vals, env.db) {
                    put(&mut asg, env.intern, *out, v);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
        for &v in &referenced {
            if asg.contains_key(&v) {
                continue;
            }
            // Unconstrained in this branch: any value works; pick the
            // least one.
            let d = match env.intern.sort(v) {
                VarSort::Str => Value::Str(SmtString::empty()),
                VarSort::Int => Value::Int(0),
            };
            put(&mut asg, env.intern, v, d);
        }
        let lookup = |v: VarId| asg.get(&v).and_then(Value::as_int);
        for lit in &self.atoms {
            if oracle::eval_literal(lit, &asg, env.db) != Some(true) {
                return Ground::Refuted;
            }
        }
        for (&v, refs) in &self.regex {
            let Some(w) = asg.get(&v).and_then(Value::as_str) else {
                return Ground::NotGround;
            };
            for &r in refs {
                if !oracle::membership(env.db.get(r), w) {
                    return Ground::Refuted;
                }
            }
        }
        for con in &self.lincons {
            let Some(val) = con.expr().eval(&lookup) else {
                return Ground::NotGround;
            };
            let ok = match con {
                Con::Eq(_) => val == 0,
                Con::Ge(_) => val >= 0,
            };
            if !ok {
                return Ground::Refuted;
            }
        }
        for f in &self.pending {
            if oracle::eval_formula(f, &asg, env.db) != Some(true) {
                return Ground::Refuted;
            }
        }
        if oracle::eval_formula(original, &asg, env.db) != Some(true) {
            return Ground::VerifyFailed;
        }
        let values: BTreeMap<VarId, Value> = asg
            .iter()
            .filter(|(v, _)| env.intern.is_user(**v))
            .map(|(v, val)| (*v, val.clone()))
            .collect();
        Ground::Sat(Model { values })
    }

    /// Chooses the next case split for a branch whose rule queue has gone
    /// quiet: a parked disjunction, a concrete/complement split on an
    /// unresolved string, or an interval split on an unresolved integer.
    pub fn next_split(&mut self, env: &mut SolveEnv, tr: &mut Tracer) -> Split {
        if !self.pending.is_empty() {
            let or = self.pending.remove(0);
            tr.emit("split", self.branch, 0, || or.render(env.intern));
            let parts = match or {
                Formula::Or(parts) => parts,
                other => {
                    self.install_formula(&other, env, false);
                    return Split::Children(vec![self.clone()]);
                }
            };
            let children = parts
                .iter()
                .map(|p| {
                    let mut c = self.clone();
                    c.install_formula(p, env, false);
                    c
                })
                .collect();
            return Split::Children(children);
        }
        let target = self
            .vars
            .iter()
            .copied()
            .filter(|&v| {
                env.intern.sort(v) == VarSort::Str && self.resolve_str(env.intern, v).is_none()
            })
            .min_by_key(|&v| (!env.intern.is_user(v), v));
        if let Some(x) = target {
            return self.cut(x, env, tr);
        }
        let int_target = self
            .vars
            .iter()
            .copied()
            .find(|&v| {
                env.intern.sort(v) == VarSort::Int && self.resolve_int(env.intern, v).is_none()
            });
        if let Some(n) = int_target {
            tr.emit("subdivide", self.branch, 0, || {
                env.intern.name(n).to_string()
            });
            let (a, b) = lia::subdivide(n, &self.ints);
            let mut c1 = self.clone();
            c1.ints = a;
            c1.dirty_lin = true;
            let mut c2 = self.clone();
            c2.ints = b;
            c2.dirty_lin = true;
            return Split::Children(vec![c1, c2]);
        }
        Split::Stuck
    }

    /// Last-resort split on a string variable: commit to the least witness
    /// of everything known about it, or exclude that witness.
    fn cut(&mut self, x: VarId, env: &mut SolveEnv, tr: &mut Tracer) -> Split {
        let mut acc: Option<AutomatonRef> = None;
        let mut widened = false;
        if let Some(refs) = self.regex.get(&x) {
            for &r in refs {
                acc = Some(match acc {
                    None => r,
                    Some(a) => match env.db.intersect(a, r, env.state_cap) {
                        Ok(i) => i,
                        Err(_) => {
                            widened = true;
                            a
                        }
                    },
                });
            }
        }
        let iv = self.len_interval(env.intern, x);
        let lo = iv.lo.unwrap_or(0).max(0) as u64;
        let hi = iv.hi.and_then(|h| u64::try_from(h).ok());
        if iv.hi.map(|h| h < iv.lo.unwrap_or(0).max(0)).unwrap_or(false) {
            self.close();
            return Split::ClosedNow;
        }
        if lo > 0 || hi.is_some() {
            let win = env.db.length_window(lo, hi);
            acc = Some(match acc {
                None => win,
                Some(a) => match env.db.intersect(a, win, env.state_cap) {
                    Ok(i) => i,
                    Err(_) => {
                        widened = true;
                        a
                    }
                },
            });
        }
        let lang = acc.unwrap_or_else(|| env.db.sigma_star());
        let Some(wit) = env.db.witness(lang) else {
            // Even a widened intersection being empty proves the branch
            // closed: dropping conjuncts only grows the language.
            tr.emit("cut", self.branch, 0, || env.intern.name(x).to_string());
            self.close();
            return Split::ClosedNow;
        };
        let _ = widened; // A witness from a widened language still splits soundly.
        tr.emit("cut", self.branch, 0, || {
            format!("{}:={}", env.intern.name(x), wit.to_string_lossy())
        });
        let mut c1 = self.clone();
        c1.bind_str(x, wit.clone(), env);
        let singleton = env.db.singleton(&wit);
        match env.db.complement(singleton, env.state_cap) {
            Ok(comp) => {
                let mut c2 = self.clone();
                c2.add_membership(x, comp, env);
                Split::Children(vec![c1, c2])
            }
            Err(_) => {
                // Cannot represent the exclusion: keep only the concrete
                // branch and give up on closure-based verdicts.
                c1.taint = true;
                Split::Children(vec![c1])
            }
        }
    }
}

enum SweepAction {
    /// A definition whose arguments are all resolved, with its computed value.
    Computed(Literal, VarId, Value),
    /// A fully resolved literal and whether it holds.
    Evaluated(Literal, bool),
    /// An equality with one side resolved.
    EqBind(Literal, VarId, SmtString),
    /// A predicate that can be rewritten now that its needle is known.
    Simplify(Literal, Option<SmtString>, Option<SmtString>),
}

/// Whether the concatenation dependency graph has a cycle (including a
/// definition that mentions its own output).
pub(crate) fn has_concat_cycle(atoms: &[&Atom]) -> bool {
    for a in atoms {
        if let Atom::FunEq { out, args, .. } = a {
            if args.contains(out) {
                return true;
            }
        }
    }
    crate::ir::dependency_sccs(atoms).iter().any(|scc| scc.len() >= 2)
}
