//! Abstract syntax for the accepted command and term language.
//!
//! Terms are kept close to the surface syntax: n-ary operators stay n-ary
//! (normalization flattens them later) and variables are referenced by
//! name, with sorts resolved against the declaration environment.

use crate::automata::Automaton;
use crate::strings::SmtString;

/// Sorts of the accepted fragment. `Bool` and `RegLan` occur only inside
/// terms; declared variables are `Str` or `Int`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Str,
    Int,
    RegLan,
}

impl Sort {
    pub fn smtlib_name(self) -> &'static str {
        match self {
            Sort::Bool => "Bool",
            Sort::Str => "String",
            Sort::Int => "Int",
            Sort::RegLan => "RegLan",
        }
    }
}

/// Integer comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
}

/// One term of the input language.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    // -- Bool ------------------------------------------------------------
    True,
    False,
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    /// Equality over `String` or `Int` (child sorts agree by construction).
    Eq(Box<Term>, Box<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    Prefixof(Box<Term>, Box<Term>),
    Suffixof(Box<Term>, Box<Term>),
    Contains(Box<Term>, Box<Term>),
    InRe(Box<Term>, Box<Term>),

    // -- Int -------------------------------------------------------------
    IntLit(i64),
    Add(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    StrLen(Box<Term>),
    IndexOf(Box<Term>, Box<Term>, Box<Term>),
    ToInt(Box<Term>),

    // -- String ----------------------------------------------------------
    StrLit(SmtString),
    /// Declared variable (`Str` or `Int`); sort comes from the environment.
    Var(String),
    Concat(Vec<Term>),
    At(Box<Term>, Box<Term>),
    Substr(Box<Term>, Box<Term>, Box<Term>),
    Replace(Box<Term>, Box<Term>, Box<Term>),
    ReplaceAll(Box<Term>, Box<Term>, Box<Term>),
    ReplaceRe(Box<Term>, Box<Term>, Box<Term>),
    ReplaceReAll(Box<Term>, Box<Term>, Box<Term>),
    Reverse(Box<Term>),
    FromInt(Box<Term>),

    // -- RegLan ----------------------------------------------------------
    ToRe(Box<Term>),
    ReNone,
    ReAll,
    ReAllChar,
    ReConcat(Vec<Term>),
    ReUnion(Vec<Term>),
    ReInter(Vec<Term>),
    ReStar(Box<Term>),
    RePlus(Box<Term>),
    ReOpt(Box<Term>),
    ReRange(Box<Term>, Box<Term>),
    ReComp(Box<Term>),
    ReLoop(u32, u32, Box<Term>),
    /// An inline automaton literal, already parsed into its automaton.
    ReAutomaton { name: String, auto: Box<Automaton> },
}

impl Term {
    /// The operator name, for error messages.
    pub fn head_name(&self) -> &'static str {
        use Term::*;
        match self {
            True => "true",
            False => "false",
            Not(_) => "not",
            And(_) => "and",
            Or(_) => "or",
            Eq(..) => "=",
            Cmp(..) => "comparison",
            Prefixof(..) => "str.prefixof",
            Suffixof(..) => "str.suffixof",
            Contains(..) => "str.contains",
            InRe(..) => "str.in_re",
            IntLit(_) => "integer literal",
            Add(_) => "+",
            Sub(..) => "-",
            Neg(_) => "-",
            StrLen(_) => "str.len",
            IndexOf(..) => "str.indexof",
            ToInt(_) => "str.to_int",
            StrLit(_) => "string literal",
            Var(_) => "variable",
            Concat(_) => "str.++",
            At(..) => "str.at",
            Substr(..) => "str.substr",
            Replace(..) => "str.replace",
            ReplaceAll(..) => "str.replace_all",
            ReplaceRe(..) => "str.replace_re",
            ReplaceReAll(..) => "str.replace_re_all",
            Reverse(_) => "str.reverse",
            FromInt(_) => "str.from_int",
            ToRe(_) => "str.to_re",
            ReNone => "re.none",
            ReAll => "re.all",
            ReAllChar => "re.allchar",
            ReConcat(_) => "re.++",
            ReUnion(_) => "re.union",
            ReInter(_) => "re.inter",
            ReStar(_) => "re.*",
            RePlus(_) => "re.+",
            ReOpt(_) => "re.opt",
            ReRange(..) => "re.range",
            ReComp(_) => "re.comp",
            ReLoop(..) => "re.loop",
            ReAutomaton { .. } => "automaton literal",
        }
    }

    /// The sort of this term, given a resolver for variable sorts.
    /// Well-sortedness is established at parse time, so this only needs to
    /// look at the head symbol (and variables).
    pub fn sort(&self, var_sort: &impl Fn(&str) -> Option<Sort>) -> Sort {
        use Term::*;
        match self {
            True | False | Not(_) | And(_) | Or(_) | Eq(..) | Cmp(..) | Prefixof(..)
            | Suffixof(..) | Contains(..) | InRe(..) => Sort::Bool,
            IntLit(_) | Add(_) | Sub(..) | Neg(_) | StrLen(_) | IndexOf(..) | ToInt(_) => {
                Sort::Int
            }
            StrLit(_) | Concat(_) | At(..) | Substr(..) | Replace(..) | ReplaceAll(..)
            | ReplaceRe(..) | ReplaceReAll(..) | Reverse(_) | FromInt(_) => Sort::Str,
            Var(name) => var_sort(name).unwrap_or(Sort::Str),
            ToRe(_) | ReNone | ReAll | ReAllChar | ReConcat(_) | ReUnion(_) | ReInter(_)
            | ReStar(_) | RePlus(_) | ReOpt(_) | ReRange(..) | ReComp(_) | ReLoop(..)
            | ReAutomaton { .. } => Sort::RegLan,
        }
    }
}

/// One script command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    SetLogic(String),
    SetOption(String, String),
    DeclareFun(String, Sort),
    Assert(Term),
    CheckSat,
    GetModel,
    Exit,
}

/// A parsed script: the command list in source order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub commands: Vec<Command>,
}
