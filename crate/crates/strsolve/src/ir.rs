//! Normal-form representation of constraints.
//!
//! Scripts are lowered from the surface syntax into a flat constraint
//! language: every function application is a *definition* `out = f(args)`
//! over variables, every regular-language membership names an interned
//! automaton, and integer reasoning is linear expressions over integer
//! variables. Boolean structure is negation normal form with negation
//! pushed into the literals; negated memberships are complemented away
//! eagerly, so downstream code only ever sees positive memberships.

use crate::automata::{AutomatonDb, AutomatonRef, StateBlowup};
use crate::frontend::ast::{CmpOp, Sort, Term};
use crate::strings::SmtString;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// A solver variable (string or integer; the sort lives in the [`Interner`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarSort {
    Str,
    Int,
}

/// A concrete value assigned to a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Str(SmtString),
    Int(i64),
}

impl Value {
    pub fn as_str(&self) -> Option<&SmtString> {
        match self {
            Value::Str(s) => Some(s),
            Value::Int(_) => None,
        }
    }
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Str(_) => None,
        }
    }
}

/// Variable assignment, e.g. a candidate model.
pub type Assignment = BTreeMap<VarId, Value>;

/// String function symbols appearing on the right-hand side of definitions.
///
/// Argument conventions (`out = f(args)`):
/// - `Concat`: `args = [x, y]`, both strings; n-ary surface concatenation is
///   right-nested into binary applications.
/// - `Substr`: `args = [s, i, n]` with `i`, `n` integer variables.
/// - `Replace`/`ReplaceAll`: `args = [s, p, r]`, all strings.
/// - `ReplaceRe`/`ReplaceReAll`: `args = [s, r]`; the pattern language is the
///   embedded automaton.
/// - `IndexOf`: integer out, `args = [s, p, i]`.
/// - `ToInt`: integer out, `args = [s]`. `FromInt`: string out, `args = [n]`.
/// - `Reverse`: `args = [s]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FunSym {
    Concat,
    Substr,
    Replace,
    ReplaceAll,
    ReplaceRe(AutomatonRef),
    ReplaceReAll(AutomatonRef),
    IndexOf,
    ToInt,
    FromInt,
    Reverse,
}

impl FunSym {
    /// Whether the definition's output is an integer variable.
    pub fn int_output(&self) -> bool {
        matches!(self, FunSym::IndexOf | FunSym::ToInt)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FunSym::Concat => "str.++",
            FunSym::Substr => "str.substr",
            FunSym::Replace => "str.replace",
            FunSym::ReplaceAll => "str.replace_all",
            FunSym::ReplaceRe(_) => "str.replace_re",
            FunSym::ReplaceReAll(_) => "str.replace_re_all",
            FunSym::IndexOf => "str.indexof",
            FunSym::ToInt => "str.to_int",
            FunSym::FromInt => "str.from_int",
            FunSym::Reverse => "str.rev",
        }
    }
}

/// String predicate symbols (all over string variables).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredSym {
    Prefixof,
    Suffixof,
    Contains,
    StrEq,
}

impl PredSym {
    pub fn name(&self) -> &'static str {
        match self {
            PredSym::Prefixof => "str.prefixof",
            PredSym::Suffixof => "str.suffixof",
            PredSym::Contains => "str.contains",
            PredSym::StrEq => "=",
        }
    }
}

/// A linear integer expression `constant + Σ coeff·var`, with `terms`
/// sorted by variable and free of zero coefficients and duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinExpr {
    pub constant: i64,
    pub terms: Vec<(i64, VarId)>,
}

impl LinExpr {
    pub fn constant(k: i64) -> Self {
        LinExpr {
            constant: k,
            terms: Vec::new(),
        }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr {
            constant: 0,
            terms: vec![(1, v)],
        }
    }

    pub fn is_constant(&self) -> Option<i64> {
        if self.terms.is_empty() {
            Some(self.constant)
        } else {
            None
        }
    }

    fn normalized(constant: i64, mut terms: Vec<(i64, VarId)>) -> Self {
        terms.sort_by_key(|&(_, v)| v);
        let mut out: Vec<(i64, VarId)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match out.last_mut() {
                Some((c0, v0)) if *v0 == v => *c0 = c0.saturating_add(c),
                _ => out.push((c, v)),
            }
        }
        out.retain(|&(c, _)| c != 0);
        LinExpr {
            constant,
            terms: out,
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        LinExpr::normalized(self.constant.saturating_add(other.constant), terms)
    }

    pub fn scale(&self, k: i64) -> LinExpr {
        LinExpr::normalized(
            self.constant.saturating_mul(k),
            self.terms
                .iter()
                .map(|&(c, v)| (c.saturating_mul(k), v))
                .collect(),
        )
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(-1))
    }

    pub fn offset(&self, k: i64) -> LinExpr {
        LinExpr {
            constant: self.constant.saturating_add(k),
            terms: self.terms.clone(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.iter().map(|&(_, v)| v)
    }

    pub fn eval(&self, f: &impl Fn(VarId) -> Option<i64>) -> Option<i64> {
        let mut acc = self.constant as i128;
        for &(c, v) in &self.terms {
            acc += c as i128 * f(v)? as i128;
        }
        i64::try_from(acc).ok()
    }

    pub fn render(&self, intern: &Interner) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.constant != 0 || self.terms.is_empty() {
            parts.push(self.constant.to_string());
        }
        for &(c, v) in &self.terms {
            let name = intern.name(v);
            match c {
                1 => parts.push(name.to_string()),
                -1 => parts.push(format!("(- {name})")),
                _ => parts.push(format!("(* {c} {name})")),
            }
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(+ {})", parts.join(" "))
        }
    }
}

/// Atomic constraints of the normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// String predicate over string variables.
    Pred(PredSym, Vec<VarId>),
    /// Definition `out = fun(args)`.
    FunEq {
        out: VarId,
        fun: FunSym,
        args: Vec<VarId>,
    },
    /// Regular membership `var ∈ L(lang)`.
    InRe { var: VarId, lang: AutomatonRef },
    /// Linear equality `expr = 0`.
    LinEq(LinExpr),
    /// Linear inequality `expr >= 0`.
    Ineq(LinExpr),
}

impl Atom {
    pub fn str_eq(x: VarId, y: VarId) -> Atom {
        Atom::Pred(PredSym::StrEq, vec![x, y])
    }

    /// Variables mentioned by the atom (including the defined output).
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Atom::Pred(_, vs) => vs.clone(),
            Atom::FunEq { out, args, .. } => {
                let mut v = vec![*out];
                v.extend_from_slice(args);
                v
            }
            Atom::InRe { var, .. } => vec![*var],
            Atom::LinEq(e) | Atom::Ineq(e) => e.vars().collect(),
        }
    }

    pub fn render(&self, intern: &Interner) -> String {
        match self {
            Atom::Pred(p, vs) => {
                let args: Vec<&str> = vs.iter().map(|&v| intern.name(v)).collect();
                format!("({} {})", p.name(), args.join(" "))
            }
            Atom::FunEq { out, fun, args } => {
                let args: Vec<&str> = args.iter().map(|&v| intern.name(v)).collect();
                format!("(= {} ({} {}))", intern.name(*out), fun.name(), args.join(" "))
            }
            Atom::InRe { var, lang } => {
                format!("(str.in_re {} auto#{})", intern.name(*var), lang.index())
            }
            Atom::LinEq(e) => format!("(= {} 0)", e.render(intern)),
            Atom::Ineq(e) => format!("(>= {} 0)", e.render(intern)),
        }
    }
}

/// An atom with polarity. Negated memberships never occur (complemented at
/// build time), and definitions only occur positively.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal {
            positive: true,
            atom,
        }
    }
    pub fn neg(atom: Atom) -> Literal {
        Literal {
            positive: false,
            atom,
        }
    }

    pub fn render(&self, intern: &Interner) -> String {
        if self.positive {
            self.atom.render(intern)
        } else {
            format!("(not {})", self.atom.render(intern))
        }
    }
}

/// Negation normal form with literals at the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Lit(Literal),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts.drain(..) {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    pub fn or(mut parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts.drain(..) {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    /// The conjuncts of the top-level conjunction.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(parts) => parts.iter().collect(),
            other => vec![other],
        }
    }

    /// Applies `f` to every literal, rebuilding the tree.
    pub fn map_literals(&self, f: &mut impl FnMut(&Literal) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Lit(l) => f(l),
            Formula::And(parts) => {
                Formula::and(parts.iter().map(|p| p.map_literals(f)).collect())
            }
            Formula::Or(parts) => Formula::or(parts.iter().map(|p| p.map_literals(f)).collect()),
        }
    }

    pub fn for_each_literal(&self, f: &mut impl FnMut(&Literal)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Lit(l) => f(l),
            Formula::And(parts) | Formula::Or(parts) => {
                for p in parts {
                    p.for_each_literal(f);
                }
            }
        }
    }

    /// Replaces every occurrence of variable `from` with `to`.
    pub fn subst_var(&self, from: VarId, to: VarId) -> Formula {
        let sub = |v: VarId| if v == from { to } else { v };
        self.map_literals(&mut |lit| {
            let atom = match &lit.atom {
                Atom::Pred(p, vs) => Atom::Pred(*p, vs.iter().map(|&v| sub(v)).collect()),
                Atom::FunEq { out, fun, args } => Atom::FunEq {
                    out: sub(*out),
                    fun: fun.clone(),
                    args: args.iter().map(|&v| sub(v)).collect(),
                },
                Atom::InRe { var, lang } => Atom::InRe {
                    var: sub(*var),
                    lang: *lang,
                },
                Atom::LinEq(e) => Atom::LinEq(LinExpr::normalized(
                    e.constant,
                    e.terms.iter().map(|&(c, v)| (c, sub(v))).collect(),
                )),
                Atom::Ineq(e) => Atom::Ineq(LinExpr::normalized(
                    e.constant,
                    e.terms.iter().map(|&(c, v)| (c, sub(v))).collect(),
                )),
            };
            Formula::Lit(Literal {
                positive: lit.positive,
                atom,
            })
        })
    }

    pub fn render(&self, intern: &Interner) -> String {
        match self {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Lit(l) => l.render(intern),
            Formula::And(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.render(intern)).collect();
                format!("(and {})", inner.join(" "))
            }
            Formula::Or(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.render(intern)).collect();
                format!("(or {})", inner.join(" "))
            }
        }
    }
}

/// Variable table: names, sorts, length-variable coupling, and canonical
/// variables for constants.
#[derive(Debug, Default, Clone)]
pub struct Interner {
    names: Vec<String>,
    sorts: Vec<VarSort>,
    user: Vec<bool>,
    by_name: HashMap<String, VarId>,
    len_vars: BTreeMap<VarId, VarId>,
    len_owner: BTreeMap<VarId, VarId>,
    const_strs: HashMap<SmtString, VarId>,
    const_ints: HashMap<i64, VarId>,
    const_str_of: BTreeMap<VarId, SmtString>,
    const_int_of: BTreeMap<VarId, i64>,
    fresh_counter: u32,
}

impl Interner {
    pub fn new() -> Self {
        Interner::default()
    }

    fn add(&mut self, name: String, sort: VarSort, user: bool) -> VarId {
        let id = VarId(self.names.len() as u32);
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.sorts.push(sort);
        self.user.push(user);
        id
    }

    /// Declares a script-level variable. Returns `None` if the name is taken.
    pub fn declare(&mut self, name: &str, sort: VarSort) -> Option<VarId> {
        if self.by_name.contains_key(name) {
            return None;
        }
        Some(self.add(name.to_string(), sort, true))
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn fresh(&mut self, prefix: &str, sort: VarSort) -> VarId {
        loop {
            let name = format!("{}!{}", prefix, self.fresh_counter);
            self.fresh_counter += 1;
            if !self.by_name.contains_key(&name) {
                return self.add(name, sort, false);
            }
        }
    }

    pub fn sort(&self, v: VarId) -> VarSort {
        self.sorts[v.0 as usize]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn is_user(&self, v: VarId) -> bool {
        self.user[v.0 as usize]
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn all_vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }

    pub fn user_vars(&self) -> Vec<VarId> {
        self.all_vars().filter(|&v| self.is_user(v)).collect()
    }

    /// The integer variable tracking `(str.len v)`, created on first use.
    pub fn len_var(&mut self, v: VarId) -> VarId {
        debug_assert_eq!(self.sort(v), VarSort::Str);
        if let Some(&lv) = self.len_vars.get(&v) {
            return lv;
        }
        let name = format!("len!{}", self.name(v));
        let lv = if self.by_name.contains_key(&name) {
            self.fresh("len", VarSort::Int)
        } else {
            self.add(name, VarSort::Int, false)
        };
        self.len_vars.insert(v, lv);
        self.len_owner.insert(lv, v);
        lv
    }

    /// The length variable of `v`, if one was ever created.
    pub fn len_var_opt(&self, v: VarId) -> Option<VarId> {
        self.len_vars.get(&v).copied()
    }

    /// The string variable whose length `lv` tracks, if any.
    pub fn len_owner(&self, lv: VarId) -> Option<VarId> {
        self.len_owner.get(&lv).copied()
    }

    pub fn len_pairs(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.len_vars.iter().map(|(&a, &b)| (a, b))
    }

    /// Canonical variable for a string constant. The definitional membership
    /// atom is the caller's to emit (exactly once, on creation).
    pub fn const_str(&mut self, w: &SmtString) -> (VarId, bool) {
        if let Some(&v) = self.const_strs.get(w) {
            return (v, false);
        }
        let v = self.fresh("cst", VarSort::Str);
        self.const_strs.insert(w.clone(), v);
        self.const_str_of.insert(v, w.clone());
        (v, true)
    }

    pub fn const_int(&mut self, k: i64) -> (VarId, bool) {
        if let Some(&v) = self.const_ints.get(&k) {
            return (v, false);
        }
        let v = self.fresh("cint", VarSort::Int);
        self.const_ints.insert(k, v);
        self.const_int_of.insert(v, k);
        (v, true)
    }

    /// The constant a canonical constant variable denotes, if `v` is one.
    pub fn const_str_value(&self, v: VarId) -> Option<&SmtString> {
        self.const_str_of.get(&v)
    }

    pub fn const_int_value(&self, v: VarId) -> Option<i64> {
        self.const_int_of.get(&v).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("undeclared variable '{0}'")]
    UndeclaredVar(String),
    #[error("sort error: {0}")]
    SortError(String),
    #[error("regular expressions must be constant: {0}")]
    NonConstantRegex(String),
    #[error("automaton construction exceeded the state budget")]
    Blowup(#[from] StateBlowup),
    #[error("integer literal out of range")]
    IntOutOfRange,
}

impl From<crate::regexc::RegexError> for NormalizeError {
    fn from(e: crate::regexc::RegexError) -> Self {
        match e {
            crate::regexc::RegexError::Blowup(b) => NormalizeError::Blowup(b),
            other => NormalizeError::NonConstantRegex(other.to_string()),
        }
    }
}

/// Context threaded through lowering: variable table, automaton store, and
/// the state budget for eager regex complementation.
///
/// `global` collects constant-variable definitions. They are emitted exactly
/// once per constant but may be referenced from several places — including
/// from inside disjunction branches — so they must always surface at the top
/// level of the conjunction.
pub struct NormalizeCx<'a> {
    pub intern: &'a mut Interner,
    pub db: &'a mut AutomatonDb,
    pub state_cap: usize,
    global: Vec<Formula>,
}

impl<'a> NormalizeCx<'a> {
    pub fn new(intern: &'a mut Interner, db: &'a mut AutomatonDb, state_cap: usize) -> Self {
        NormalizeCx {
            intern,
            db,
            state_cap,
            global: Vec::new(),
        }
    }

    /// Constant-definition formulas accumulated since the last drain. The
    /// caller must conjoin them at the top level of whatever it is building.
    pub(crate) fn drain_global(&mut self) -> Vec<Formula> {
        std::mem::take(&mut self.global)
    }

    pub(crate) fn const_str_var(&mut self, w: &SmtString) -> VarId {
        let (v, new) = self.intern.const_str(w);
        if new {
            let lang = self.db.singleton(w);
            self.global
                .push(Formula::Lit(Literal::pos(Atom::InRe { var: v, lang })));
            let lv = self.intern.len_var(v);
            self.global.push(Formula::Lit(Literal::pos(Atom::LinEq(
                LinExpr::var(lv).offset(-(w.len() as i64)),
            ))));
        }
        v
    }

    pub(crate) fn const_int_var(&mut self, k: i64) -> VarId {
        let (v, new) = self.intern.const_int(k);
        if new {
            self.global.push(Formula::Lit(Literal::pos(Atom::LinEq(
                LinExpr::var(v).offset(-k),
            ))));
        }
        v
    }
}

/// Lowers a Boolean term into negation normal form, emitting definitional
/// side constraints into the same conjunction.
pub fn normalize(term: &Term, cx: &mut NormalizeCx) -> Result<Formula, NormalizeError> {
    let mut side = Vec::new();
    let body = lower_bool(term, true, cx, &mut side)?;
    let mut parts = std::mem::take(&mut cx.global);
    parts.extend(side);
    parts.push(body);
    Ok(Formula::and(parts))
}

fn lower_bool(
    term: &Term,
    polarity: bool,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<Formula, NormalizeError> {
    Ok(match term {
        Term::True => {
            if polarity {
                Formula::True
            } else {
                Formula::False
            }
        }
        Term::False => {
            if polarity {
                Formula::False
            } else {
                Formula::True
            }
        }
        Term::Not(t) => lower_bool(t, !polarity, cx, side)?,
        Term::And(ts) => {
            let parts = ts
                .iter()
                .map(|t| lower_bool(t, polarity, cx, side))
                .collect::<Result<Vec<_>, _>>()?;
            if polarity {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        Term::Or(ts) => {
            let parts = ts
                .iter()
                .map(|t| lower_bool(t, polarity, cx, side))
                .collect::<Result<Vec<_>, _>>()?;
            if polarity {
                Formula::or(parts)
            } else {
                Formula::and(parts)
            }
        }
        Term::Eq(a, b) => lower_eq(a, b, polarity, cx, side)?,
        Term::Cmp(op, a, b) => {
            let ea = lower_int(a, cx, side)?;
            let eb = lower_int(b, cx, side)?;
            // Express as expr >= 0.
            let expr = match op {
                CmpOp::Le => eb.sub(&ea),
                CmpOp::Lt => eb.sub(&ea).offset(-1),
                CmpOp::Ge => ea.sub(&eb),
                CmpOp::Gt => ea.sub(&eb).offset(-1),
            };
            let expr = if polarity {
                expr
            } else {
                // not (e >= 0)  ==  -e - 1 >= 0
                expr.scale(-1).offset(-1)
            };
            match expr.is_constant() {
                Some(k) if k >= 0 => Formula::True,
                Some(_) => Formula::False,
                None => Formula::Lit(Literal::pos(Atom::Ineq(expr))),
            }
        }
        Term::Prefixof(a, b) => lower_pred(PredSym::Prefixof, &[a, b], polarity, cx, side)?,
        Term::Suffixof(a, b) => lower_pred(PredSym::Suffixof, &[a, b], polarity, cx, side)?,
        Term::Contains(a, b) => lower_pred(PredSym::Contains, &[a, b], polarity, cx, side)?,
        Term::InRe(s, re) => {
            let v = lower_str(s, cx, side)?;
            let lang = crate::regexc::compile_regex(cx.db, re, cx.state_cap)?;
            let lang = if polarity {
                lang
            } else {
                cx.db.complement(lang, cx.state_cap)?
            };
            Formula::Lit(Literal::pos(Atom::InRe { var: v, lang }))
        }
        other => {
            return Err(NormalizeError::SortError(format!(
                "expected a Bool term, found {}",
                other.head_name()
            )))
        }
    })
}

fn term_sort(term: &Term, cx: &NormalizeCx) -> Sort {
    let intern = &cx.intern;
    term.sort(&|name| {
        intern.lookup(name).map(|v| match intern.sort(v) {
            VarSort::Str => Sort::Str,
            VarSort::Int => Sort::Int,
        })
    })
}

fn lower_eq(
    a: &Term,
    b: &Term,
    polarity: bool,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<Formula, NormalizeError> {
    let sa = term_sort(a, cx);
    let sb = term_sort(b, cx);
    if sa != sb {
        return Err(NormalizeError::SortError(format!(
            "= applied to {} and {}",
            sa.smtlib_name(),
            sb.smtlib_name()
        )));
    }
    match sa {
        Sort::Int => {
            let ea = lower_int(a, cx, side)?;
            let eb = lower_int(b, cx, side)?;
            let d = ea.sub(&eb);
            if let Some(k) = d.is_constant() {
                return Ok(if (k == 0) == polarity {
                    Formula::True
                } else {
                    Formula::False
                });
            }
            Ok(if polarity {
                Formula::Lit(Literal::pos(Atom::LinEq(d)))
            } else {
                // d != 0  ==  d - 1 >= 0  or  -d - 1 >= 0
                Formula::or(vec![
                    Formula::Lit(Literal::pos(Atom::Ineq(d.offset(-1)))),
                    Formula::Lit(Literal::pos(Atom::Ineq(d.scale(-1).offset(-1)))),
                ])
            })
        }
        Sort::Str => {
            // Constant-vs-constant folds; a constant side becomes a
            // membership so the regular machinery sees it immediately.
            match (a, b) {
                (Term::StrLit(wa), Term::StrLit(wb)) => {
                    return Ok(if (wa == wb) == polarity {
                        Formula::True
                    } else {
                        Formula::False
                    });
                }
                (Term::StrLit(w), other) | (other, Term::StrLit(w)) => {
                    let v = lower_str(other, cx, side)?;
                    let lang = cx.db.singleton(w);
                    let lang = if polarity {
                        lang
                    } else {
                        cx.db.complement(lang, cx.state_cap)?
                    };
                    return Ok(Formula::Lit(Literal::pos(Atom::InRe { var: v, lang })));
                }
                _ => {}
            }
            if polarity {
                // Share one output variable between both sides when both are
                // applications, so `f(..) = g(..)` becomes two definitions of
                // the same variable; an application equated with a plain
                // variable is lowered straight into that variable. The
                // defining atoms are genuine constraints (not conservative
                // definitions), so they stay at this position in the tree
                // rather than floating to the top.
                match (is_str_app(a), is_str_app(b)) {
                    (true, true) => {
                        let o = cx.intern.fresh("eq", VarSort::Str);
                        let mut local = Vec::new();
                        lower_str_into(a, o, cx, &mut local)?;
                        lower_str_into(b, o, cx, &mut local)?;
                        Ok(Formula::and(local))
                    }
                    (true, false) | (false, true) => {
                        let (app, var) = if is_str_app(a) { (a, b) } else { (b, a) };
                        let o = lower_str(var, cx, side)?;
                        let mut local = Vec::new();
                        lower_str_into(app, o, cx, &mut local)?;
                        Ok(Formula::and(local))
                    }
                    (false, false) => {
                        let va = lower_str(a, cx, side)?;
                        let vb = lower_str(b, cx, side)?;
                        if va == vb {
                            Ok(Formula::True)
                        } else {
                            Ok(Formula::Lit(Literal::pos(Atom::str_eq(va, vb))))
                        }
                    }
                }
            } else {
                let va = lower_str(a, cx, side)?;
                let vb = lower_str(b, cx, side)?;
                if va == vb {
                    Ok(Formula::False)
                } else {
                    Ok(Formula::Lit(Literal::neg(Atom::str_eq(va, vb))))
                }
            }
        }
        other => Err(NormalizeError::SortError(format!(
            "= is not supported at sort {}",
            other.smtlib_name()
        ))),
    }
}

fn is_str_app(t: &Term) -> bool {
    !matches!(t, Term::Var(_) | Term::StrLit(_))
}

fn lower_pred(
    p: PredSym,
    args: &[&Term],
    polarity: bool,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<Formula, NormalizeError> {
    let vs = args
        .iter()
        .map(|t| lower_str(t, cx, side))
        .collect::<Result<Vec<_>, _>>()?;
    if vs.len() == 2 && vs[0] == vs[1] {
        // prefixof/suffixof/contains are reflexive.
        return Ok(if polarity {
            Formula::True
        } else {
            Formula::False
        });
    }
    Ok(Formula::Lit(Literal {
        positive: polarity,
        atom: Atom::Pred(p, vs),
    }))
}

/// Lowers a string term to a variable, emitting definitions as needed.
fn lower_str(
    term: &Term,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<VarId, NormalizeError> {
    match term {
        Term::Var(name) => match cx.intern.lookup(name) {
            Some(v) if cx.intern.sort(v) == VarSort::Str => Ok(v),
            Some(_) => Err(NormalizeError::SortError(format!(
                "variable '{name}' is not a String"
            ))),
            None => Err(NormalizeError::UndeclaredVar(name.clone())),
        },
        Term::StrLit(w) => Ok(cx.const_str_var(w)),
        _ => {
            let out = cx.intern.fresh("t", VarSort::Str);
            lower_str_into(term, out, cx, side)?;
            Ok(out)
        }
    }
}

/// Lowers a string application, defining `out` as its value.
fn lower_str_into(
    term: &Term,
    out: VarId,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<(), NormalizeError> {
    let atom = match term {
        Term::Var(_) | Term::StrLit(_) => {
            let v = lower_str(term, cx, side)?;
            side.push(Formula::Lit(Literal::pos(Atom::str_eq(out, v))));
            return Ok(());
        }
        Term::Concat(_) => {
            let mut parts = Vec::new();
            flatten_concat(term, &mut parts);
            match parts.len() {
                0 => {
                    let v = cx.const_str_var(&SmtString::empty());
                    side.push(Formula::Lit(Literal::pos(Atom::str_eq(out, v))));
                    return Ok(());
                }
                1 => {
                    return lower_str_into_or_alias(parts[0], out, cx, side);
                }
                _ => {
                    // Right-nested binary chain: out = p0 ++ (p1 ++ (...)).
                    let vars = parts
                        .iter()
                        .map(|p| lower_str(p, cx, side))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut rest = *vars.last().unwrap();
                    for i in (1..vars.len() - 1).rev() {
                        let o = cx.intern.fresh("cat", VarSort::Str);
                        side.push(Formula::Lit(Literal::pos(Atom::FunEq {
                            out: o,
                            fun: FunSym::Concat,
                            args: vec![vars[i], rest],
                        })));
                        rest = o;
                    }
                    Atom::FunEq {
                        out,
                        fun: FunSym::Concat,
                        args: vec![vars[0], rest],
                    }
                }
            }
        }
        Term::At(s, i) => {
            // str.at is the width-1 substring.
            let sv = lower_str(s, cx, side)?;
            let iv = lower_int_var(i, cx, side)?;
            let one = cx.const_int_var(1);
            Atom::FunEq {
                out,
                fun: FunSym::Substr,
                args: vec![sv, iv, one],
            }
        }
        Term::Substr(s, i, n) => {
            let sv = lower_str(s, cx, side)?;
            let iv = lower_int_var(i, cx, side)?;
            let nv = lower_int_var(n, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::Substr,
                args: vec![sv, iv, nv],
            }
        }
        Term::Replace(s, p, r) => {
            let sv = lower_str(s, cx, side)?;
            let pv = lower_str(p, cx, side)?;
            let rv = lower_str(r, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::Replace,
                args: vec![sv, pv, rv],
            }
        }
        Term::ReplaceAll(s, p, r) => {
            let sv = lower_str(s, cx, side)?;
            let pv = lower_str(p, cx, side)?;
            let rv = lower_str(r, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::ReplaceAll,
                args: vec![sv, pv, rv],
            }
        }
        Term::ReplaceRe(s, re, r) => {
            let sv = lower_str(s, cx, side)?;
            let lang = crate::regexc::compile_regex(cx.db, re, cx.state_cap)?;
            let rv = lower_str(r, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::ReplaceRe(lang),
                args: vec![sv, rv],
            }
        }
        Term::ReplaceReAll(s, re, r) => {
            let sv = lower_str(s, cx, side)?;
            let lang = crate::regexc::compile_regex(cx.db, re, cx.state_cap)?;
            let rv = lower_str(r, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::ReplaceReAll(lang),
                args: vec![sv, rv],
            }
        }
        Term::Reverse(s) => {
            let sv = lower_str(s, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::Reverse,
                args: vec![sv],
            }
        }
        Term::FromInt(n) => {
            let nv = lower_int_var(n, cx, side)?;
            Atom::FunEq {
                out,
                fun: FunSym::FromInt,
                args: vec![nv],
            }
        }
        other => {
            return Err(NormalizeError::SortError(format!(
                "expected a String term, found {}",
                other.head_name()
            )))
        }
    };
    side.push(Formula::Lit(Literal::pos(atom)));
    Ok(())
}

fn lower_str_into_or_alias(
    term: &Term,
    out: VarId,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<(), NormalizeError> {
    match term {
        Term::Var(_) | Term::StrLit(_) => {
            let v = lower_str(term, cx, side)?;
            side.push(Formula::Lit(Literal::pos(Atom::str_eq(out, v))));
            Ok(())
        }
        _ => lower_str_into(term, out, cx, side),
    }
}

/// Collects the leaves of nested concatenations, left to right.
fn flatten_concat<'t>(term: &'t Term, out: &mut Vec<&'t Term>) {
    match term {
        Term::Concat(parts) => {
            for p in parts {
                flatten_concat(p, out);
            }
        }
        other => out.push(other),
    }
}

/// Lowers an integer term to a linear expression.
fn lower_int(
    term: &Term,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<LinExpr, NormalizeError> {
    Ok(match term {
        Term::IntLit(k) => LinExpr::constant(*k),
        Term::Var(name) => match cx.intern.lookup(name) {
            Some(v) if cx.intern.sort(v) == VarSort::Int => LinExpr::var(v),
            Some(_) => {
                return Err(NormalizeError::SortError(format!(
                    "variable '{name}' is not an Int"
                )))
            }
            None => return Err(NormalizeError::UndeclaredVar(name.clone())),
        },
        Term::Add(ts) => {
            let mut acc = LinExpr::constant(0);
            for t in ts {
                acc = acc.add(&lower_int(t, cx, side)?);
            }
            acc
        }
        Term::Sub(a, b) => {
            let ea = lower_int(a, cx, side)?;
            let eb = lower_int(b, cx, side)?;
            ea.sub(&eb)
        }
        Term::Neg(t) => lower_int(t, cx, side)?.scale(-1),
        Term::StrLen(s) => {
            let sv = lower_str(s, cx, side)?;
            LinExpr::var(cx.intern.len_var(sv))
        }
        Term::IndexOf(s, p, i) => {
            let sv = lower_str(s, cx, side)?;
            let pv = lower_str(p, cx, side)?;
            let iv = lower_int_var(i, cx, side)?;
            let k = cx.intern.fresh("idx", VarSort::Int);
            side.push(Formula::Lit(Literal::pos(Atom::FunEq {
                out: k,
                fun: FunSym::IndexOf,
                args: vec![sv, pv, iv],
            })));
            LinExpr::var(k)
        }
        Term::ToInt(s) => {
            let sv = lower_str(s, cx, side)?;
            let n = cx.intern.fresh("toi", VarSort::Int);
            side.push(Formula::Lit(Literal::pos(Atom::FunEq {
                out: n,
                fun: FunSym::ToInt,
                args: vec![sv],
            })));
            LinExpr::var(n)
        }
        other => {
            return Err(NormalizeError::SortError(format!(
                "expected an Int term, found {}",
                other.head_name()
            )))
        }
    })
}

/// Lowers an integer term to a single variable (for function arguments).
fn lower_int_var(
    term: &Term,
    cx: &mut NormalizeCx,
    side: &mut Vec<Formula>,
) -> Result<VarId, NormalizeError> {
    match term {
        Term::IntLit(k) => Ok(cx.const_int_var(*k)),
        Term::Var(name) => match cx.intern.lookup(name) {
            Some(v) if cx.intern.sort(v) == VarSort::Int => Ok(v),
            Some(_) => Err(NormalizeError::SortError(format!(
                "variable '{name}' is not an Int"
            ))),
            None => Err(NormalizeError::UndeclaredVar(name.clone())),
        },
        _ => {
            let e = lower_int(term, cx, side)?;
            let v = cx.intern.fresh("i", VarSort::Int);
            side.push(Formula::Lit(Literal::pos(Atom::LinEq(
                LinExpr::var(v).sub(&e),
            ))));
            Ok(v)
        }
    }
}

/// Deduplicates repeated applications of the opaque string operations at the
/// top level of the conjunction.
///
/// Two definitions `o1 = f(args)` and `o2 = f(args)` with the same symbol
/// and arguments collapse: if either output is solver-introduced it is
/// substituted away; two user-visible outputs are linked by an equality.
/// Only `IndexOf`, `Substr`, `Replace`, `ReplaceAll`, `ToInt`, and `FromInt`
/// participate — concatenations are cheap and equation splitting wants them
/// untouched.
pub fn cse(formula: &Formula, intern: &Interner) -> Formula {
    let mut canonical: HashMap<(FunSym, Vec<VarId>), VarId> = HashMap::new();
    let mut subst: BTreeMap<VarId, VarId> = BTreeMap::new();
    let mut parts: Vec<Formula> = Vec::new();

    let dedupable = |f: &FunSym| {
        matches!(
            f,
            FunSym::IndexOf
                | FunSym::Substr
                | FunSym::Replace
                | FunSym::ReplaceAll
                | FunSym::ToInt
                | FunSym::FromInt
        )
    };

    for part in formula.conjuncts() {
        if let Formula::Lit(Literal {
            positive: true,
            atom: Atom::FunEq { out, fun, args },
        }) = part
        {
            if dedupable(fun) {
                let key = (fun.clone(), args.clone());
                match canonical.get(&key) {
                    None => {
                        canonical.insert(key, *out);
                        parts.push((*part).clone());
                    }
                    Some(&prev) if prev == *out => {
                        // Exact duplicate; drop it.
                    }
                    Some(&prev) => {
                        if !intern.is_user(*out) {
                            subst.insert(*out, prev);
                        } else if !intern.is_user(prev) {
                            // Keep the user-visible name as canonical.
                            subst.insert(prev, *out);
                            canonical.insert((fun.clone(), args.clone()), *out);
                            parts.push((*part).clone());
                        } else {
                            let link = if fun.int_output() {
                                Atom::LinEq(LinExpr::var(*out).sub(&LinExpr::var(prev)))
                            } else {
                                Atom::str_eq(*out, prev)
                            };
                            parts.push(Formula::Lit(Literal::pos(link)));
                        }
                    }
                }
                continue;
            }
        }
        parts.push((*part).clone());
    }

    let mut out = Formula::and(parts);
    for (&from, &to) in &subst {
        let mut to = to;
        // Follow chains created by later substitutions.
        while let Some(&next) = subst.get(&to) {
            if next == from {
                break;
            }
            to = next;
        }
        out = out.subst_var(from, to);
    }
    out
}

/// Variable dependency graph over definitions: an edge `arg -> out` for each
/// `out = f(args)`. Returns the strongly connected components in reverse
/// topological order, as produced by Tarjan's algorithm.
pub fn dependency_sccs(atoms: &[&Atom]) -> Vec<Vec<VarId>> {
    use petgraph::graph::DiGraph;
    let mut graph: DiGraph<VarId, ()> = DiGraph::new();
    let mut nodes: BTreeMap<VarId, petgraph::graph::NodeIndex> = BTreeMap::new();
    let node = |g: &mut DiGraph<VarId, ()>,
                    nodes: &mut BTreeMap<VarId, petgraph::graph::NodeIndex>,
                    v: VarId| {
        *nodes.entry(v).or_insert_with(|| g.add_node(v))
    };
    for atom in atoms {
        if let Atom::FunEq { out, args, .. } = atom {
            let o = node(&mut graph, &mut nodes, *out);
            for &a in args {
                let an = node(&mut graph, &mut nodes, a);
                graph.add_edge(an, o, ());
            }
        }
    }
    petgraph::algo::tarjan_scc(&graph)
        .into_iter()
        .map(|comp| comp.into_iter().map(|ix| graph[ix]).collect())
        .collect()
}

/// Whether the definitions form a straight-line (acyclic) program: no
/// variable transitively depends on itself.
pub fn is_straight_line(atoms: &[&Atom]) -> bool {
    let mut outs: BTreeSet<VarId> = BTreeSet::new();
    for atom in atoms {
        if let Atom::FunEq { out, .. } = atom {
            if !outs.insert(*out) {
                return false; // multiple definitions of one variable
            }
        }
    }
    dependency_sccs(atoms).iter().all(|scc| {
        scc.len() == 1 && {
            // A singleton component may still have a self-loop.
            let v = scc[0];
            !atoms.iter().any(|a| match a {
                Atom::FunEq { out, args, .. } => *out == v && args.contains(&v),
                _ => false,
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::Term;

    fn setup() -> (Interner, AutomatonDb) {
        (Interner::new(), AutomatonDb::new())
    }

    fn declare_str(intern: &mut Interner, name: &str) -> VarId {
        intern.declare(name, VarSort::Str).unwrap()
    }

    #[test]
    fn lin_expr_arithmetic_normalizes() {
        let x = VarId(0);
        let y = VarId(1);
        let e = LinExpr::var(x).add(&LinExpr::var(y)).add(&LinExpr::var(x));
        assert_eq!(e.terms, vec![(2, x), (1, y)]);
        let z = e.sub(&LinExpr::var(x).scale(2));
        assert_eq!(z.terms, vec![(1, y)]);
        assert_eq!(z.constant, 0);
    }

    #[test]
    fn equality_with_literal_becomes_membership() {
        let (mut intern, mut db) = setup();
        declare_str(&mut intern, "x");
        let term = Term::Eq(
            Box::new(Term::Var("x".into())),
            Box::new(Term::StrLit(SmtString::from("ab"))),
        );
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        let mut memberships = 0;
        f.for_each_literal(&mut |lit| {
            if matches!(lit.atom, Atom::InRe { .. }) {
                assert!(lit.positive);
                memberships += 1;
            }
        });
        assert_eq!(memberships, 1);
    }

    #[test]
    fn nary_concat_right_nests() {
        let (mut intern, mut db) = setup();
        for n in ["a", "b", "c", "d"] {
            declare_str(&mut intern, n);
        }
        let term = Term::Eq(
            Box::new(Term::Var("a".into())),
            Box::new(Term::Concat(vec![
                Term::Var("b".into()),
                Term::Var("c".into()),
                Term::Var("d".into()),
            ])),
        );
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        let mut concats = Vec::new();
        f.for_each_literal(&mut |lit| {
            if let Atom::FunEq {
                fun: FunSym::Concat,
                args,
                ..
            } = &lit.atom
            {
                concats.push(args.clone());
            }
        });
        // b ++ c ++ d  =>  out = b ++ t, t = c ++ d.
        assert_eq!(concats.len(), 2);
        assert!(concats.iter().all(|args| args.len() == 2));
    }

    #[test]
    fn nested_concat_flattens_before_nesting() {
        let (mut intern, mut db) = setup();
        for n in ["a", "b", "c", "d", "e"] {
            declare_str(&mut intern, n);
        }
        // ((b ++ c) ++ (d ++ e)) has the same shape as (b ++ c ++ d ++ e).
        let nested = Term::Concat(vec![
            Term::Concat(vec![Term::Var("b".into()), Term::Var("c".into())]),
            Term::Concat(vec![Term::Var("d".into()), Term::Var("e".into())]),
        ]);
        let term = Term::Eq(Box::new(Term::Var("a".into())), Box::new(nested));
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        let mut count = 0;
        f.for_each_literal(&mut |lit| {
            if matches!(
                lit.atom,
                Atom::FunEq {
                    fun: FunSym::Concat,
                    ..
                }
            ) {
                count += 1;
            }
        });
        assert_eq!(count, 3); // 4 leaves => 3 binary concatenations
    }

    #[test]
    fn negated_membership_complements() {
        let (mut intern, mut db) = setup();
        declare_str(&mut intern, "x");
        let term = Term::Not(Box::new(Term::InRe(
            Box::new(Term::Var("x".into())),
            Box::new(Term::ToRe(Box::new(Term::StrLit(SmtString::from("a"))))),
        )));
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        let mut found = None;
        f.for_each_literal(&mut |lit| {
            if let Atom::InRe { lang, .. } = lit.atom {
                assert!(lit.positive);
                found = Some(lang);
            }
        });
        let lang = found.expect("one membership literal");
        // The complement of {"a"} contains "" and "b" but not "a".
        let auto = db.get(lang).clone();
        assert!(crate::oracle::membership(&auto, &SmtString::empty()));
        assert!(crate::oracle::membership(&auto, &SmtString::from("b")));
        assert!(!crate::oracle::membership(&auto, &SmtString::from("a")));
    }

    #[test]
    fn int_disequality_splits() {
        let (mut intern, mut db) = setup();
        intern.declare("n", VarSort::Int).unwrap();
        let term = Term::Not(Box::new(Term::Eq(
            Box::new(Term::Var("n".into())),
            Box::new(Term::IntLit(3)),
        )));
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        match f {
            Formula::Or(parts) => assert_eq!(parts.len(), 2),
            other => panic!("expected a disjunction, got {other:?}"),
        }
    }

    #[test]
    fn app_eq_app_shares_output() {
        let (mut intern, mut db) = setup();
        for n in ["x", "y", "z", "w"] {
            declare_str(&mut intern, n);
        }
        let term = Term::Eq(
            Box::new(Term::Concat(vec![
                Term::Var("x".into()),
                Term::Var("y".into()),
            ])),
            Box::new(Term::Concat(vec![
                Term::Var("z".into()),
                Term::Var("w".into()),
            ])),
        );
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        let mut outs = Vec::new();
        f.for_each_literal(&mut |lit| {
            if let Atom::FunEq { out, .. } = lit.atom {
                outs.push(out);
            }
        });
        assert_eq!(outs.len(), 2);
        assert_eq!(outs[0], outs[1]);
    }

    #[test]
    fn cse_merges_duplicate_applications() {
        let (mut intern, mut db) = setup();
        let s = declare_str(&mut intern, "s");
        intern.declare("i", VarSort::Int).unwrap();
        intern.declare("n", VarSort::Int).unwrap();
        // Two separate substr applications with identical arguments.
        let sub = Term::Substr(
            Box::new(Term::Var("s".into())),
            Box::new(Term::Var("i".into())),
            Box::new(Term::Var("n".into())),
        );
        let term = Term::And(vec![
            Term::Eq(Box::new(Term::Var("a".into())), Box::new(sub.clone())),
            Term::Eq(Box::new(Term::Var("b".into())), Box::new(sub)),
        ]);
        declare_str(&mut intern, "a");
        declare_str(&mut intern, "b");
        let mut cx = NormalizeCx::new(&mut intern, &mut db, 10_000);
        let f = normalize(&term, &mut cx).unwrap();
        let deduped = cse(&f, &intern);
        let mut substr_count = 0;
        let mut eq_count = 0;
        deduped.for_each_literal(&mut |lit| match &lit.atom {
            Atom::FunEq {
                fun: FunSym::Substr,
                ..
            } => substr_count += 1,
            Atom::Pred(PredSym::StrEq, _) => eq_count += 1,
            _ => {}
        });
        assert_eq!(substr_count, 1, "duplicate substr applications must merge");
        assert!(eq_count >= 1, "user outputs a and b must stay linked");
        let _ = s;
    }

    #[test]
    fn straight_line_detection() {
        let x = VarId(0);
        let y = VarId(1);
        let z = VarId(2);
        let a1 = Atom::FunEq {
            out: z,
            fun: FunSym::Concat,
            args: vec![x, y],
        };
        assert!(is_straight_line(&[&a1]));
        let cyc = Atom::FunEq {
            out: x,
            fun: FunSym::Concat,
            args: vec![z, y],
        };
        assert!(!is_straight_line(&[&a1, &cyc]));
        let selfdep = Atom::FunEq {
            out: x,
            fun: FunSym::Concat,
            args: vec![x, y],
        };
        assert!(!is_straight_line(&[&selfdep]));
    }
}
