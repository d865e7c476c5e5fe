//! Rendering of terms, scripts, and models back into SMT-LIB text.
//!
//! The contract is a fixpoint: parsing the printed form of any accepted
//! script yields the same AST. String literals re-escape `"` by doubling
//! and non-printable or non-ASCII code points as `\u{...}`.

use std::fmt::Write;

use super::ast::{CmpOp, Command, Script, Sort, Term};
use crate::regexc::automaton_to_literal;
use crate::strings::SmtString;

/// Escape a string value into a double-quoted SMT-LIB literal.
pub fn string_literal(s: &SmtString) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for &cp in s.code_points() {
        match cp {
            0x22 => out.push_str("\"\""),
            // Backslash could start an escape on re-parse, so it is always
            // written in escaped form itself.
            0x5C => out.push_str("\\u{5c}"),
            0x20..=0x7E => out.push(cp as u8 as char),
            _ => {
                let _ = write!(out, "\\u{{{cp:x}}}");
            }
        }
    }
    out.push('"');
    out
}

/// Render an integer in SMT-LIB form: negatives as `(- n)`.
pub fn int_literal(n: i64) -> String {
    if n < 0 {
        // i64::MIN magnitude still renders correctly through i128.
        format!("(- {})", -(n as i128))
    } else {
        n.to_string()
    }
}

fn cmp_name(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Le => "<=",
        CmpOp::Lt => "<",
        CmpOp::Ge => ">=",
        CmpOp::Gt => ">",
    }
}

/// Render one term.
pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn write_app(out: &mut String, head: &str, args: &[&Term]) {
    out.push('(');
    out.push_str(head);
    for a in args {
        out.push(' ');
        write_term(out, a);
    }
    out.push(')');
}

fn write_term(out: &mut String, t: &Term) {
    use Term::*;
    match t {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Not(a) => write_app(out, "not", &[a]),
        And(xs) => write_app(out, "and", &xs.iter().collect::<Vec<_>>()),
        Or(xs) => write_app(out, "or", &xs.iter().collect::<Vec<_>>()),
        Eq(a, b) => write_app(out, "=", &[a, b]),
        Cmp(op, a, b) => write_app(out, cmp_name(*op), &[a, b]),
        Prefixof(a, b) => write_app(out, "str.prefixof", &[a, b]),
        Suffixof(a, b) => write_app(out, "str.suffixof", &[a, b]),
        Contains(a, b) => write_app(out, "str.contains", &[a, b]),
        InRe(a, b) => write_app(out, "str.in_re", &[a, b]),
        IntLit(n) => out.push_str(&int_literal(*n)),
        Add(xs) => write_app(out, "+", &xs.iter().collect::<Vec<_>>()),
        Sub(a, b) => write_app(out, "-", &[a, b]),
        Neg(a) => write_app(out, "-", &[a]),
        StrLen(a) => write_app(out, "str.len", &[a]),
        IndexOf(a, b, c) => write_app(out, "str.indexof", &[a, b, c]),
        ToInt(a) => write_app(out, "str.to_int", &[a]),
        StrLit(s) => out.push_str(&string_literal(s)),
        Var(name) => out.push_str(name),
        Concat(xs) => write_app(out, "str.++", &xs.iter().collect::<Vec<_>>()),
        At(a, b) => write_app(out, "str.at", &[a, b]),
        Substr(a, b, c) => write_app(out, "str.substr", &[a, b, c]),
        Replace(a, b, c) => write_app(out, "str.replace", &[a, b, c]),
        ReplaceAll(a, b, c) => write_app(out, "str.replace_all", &[a, b, c]),
        ReplaceRe(a, b, c) => write_app(out, "str.replace_re", &[a, b, c]),
        ReplaceReAll(a, b, c) => write_app(out, "str.replace_re_all", &[a, b, c]),
        Reverse(a) => write_app(out, "str.reverse", &[a]),
        FromInt(a) => write_app(out, "str.from_int", &[a]),
        ToRe(a) => write_app(out, "str.to_re", &[a]),
        ReNone => out.push_str("re.none"),
        ReAll => out.push_str("re.all"),
        ReAllChar => out.push_str("re.allchar"),
        ReConcat(xs) => write_app(out, "re.++", &xs.iter().collect::<Vec<_>>()),
        ReUnion(xs) => write_app(out, "re.union", &xs.iter().collect::<Vec<_>>()),
        ReInter(xs) => write_app(out, "re.inter", &xs.iter().collect::<Vec<_>>()),
        ReStar(a) => write_app(out, "re.*", &[a]),
        RePlus(a) => write_app(out, "re.+", &[a]),
        ReOpt(a) => write_app(out, "re.opt", &[a]),
        ReRange(a, b) => write_app(out, "re.range", &[a, b]),
        ReComp(a) => write_app(out, "re.comp", &[a]),
        ReLoop(lo, hi, a) => {
            let _ = write!(out, "((_ re.loop {lo} {hi}) ");
            write_term(out, a);
            out.push(')');
        }
        ReAutomaton { name, auto } => {
            out.push_str("(re.from_automaton ");
            let literal = automaton_to_literal(name, auto);
            out.push_str(&string_literal(&SmtString::from(literal.as_str())));
            out.push(')');
        }
    }
}

fn sort_text(s: Sort) -> &'static str {
    match s {
        Sort::Str => "String",
        Sort::Int => "Int",
        Sort::Bool => "Bool",
        Sort::RegLan => "RegLan",
    }
}

/// Render one command on one line.
pub fn command_to_string(c: &Command) -> String {
    match c {
        Command::SetLogic(name) => format!("(set-logic {name})"),
        Command::SetOption(key, value) => format!("(set-option :{key} {value})"),
        Command::DeclareFun(name, sort) => {
            format!("(declare-fun {name} () {})", sort_text(*sort))
        }
        Command::Assert(t) => format!("(assert {})", term_to_string(t)),
        Command::CheckSat => "(check-sat)".to_string(),
        Command::GetModel => "(get-model)".to_string(),
        Command::Exit => "(exit)".to_string(),
    }
}

/// Render a whole script, one command per line.
pub fn script_to_string(s: &Script) -> String {
    let mut out = String::new();
    for c in &s.commands {
        out.push_str(&command_to_string(c));
        out.push('\n');
    }
    out
}

/// One `(define-fun ...)` line for a model binding.
pub fn define_fun_line(name: &str, value: &ModelValue) -> String {
    match value {
        ModelValue::Str(s) => {
            format!("(define-fun {name} () String {})", string_literal(s))
        }
        ModelValue::Int(n) => format!("(define-fun {name} () Int {})", int_literal(*n)),
    }
}

/// A model binding: each declared constant maps to a string or integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelValue {
    Str(SmtString),
    Int(i64),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_script;

    #[test]
    fn model_lines_match_contract() {
        assert_eq!(
            define_fun_line("x", &ModelValue::Str(SmtString::from("ab"))),
            r#"(define-fun x () String "ab")"#
        );
        assert_eq!(
            define_fun_line("k", &ModelValue::Int(-1)),
            "(define-fun k () Int (- 1))"
        );
        assert_eq!(
            define_fun_line("n", &ModelValue::Int(7)),
            "(define-fun n () Int 7)"
        );
    }

    #[test]
    fn quote_escaping_roundtrips() {
        let tricky = SmtString::from_code_points(vec![0x22, 97, 0x5C, 0x2FFFF, 9]);
        let line = format!("(assert (= x {}))", string_literal(&tricky));
        let script = format!("(declare-fun x () String){line}");
        let parsed = parse_script(&script).unwrap();
        match &parsed.commands[1] {
            Command::Assert(Term::Eq(_, rhs)) => {
                assert_eq!(**rhs, Term::StrLit(tricky));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn print_parse_fixpoint_on_intro_script() {
        let src = r#"
(set-logic QF_SLIA)
(set-option :produce-models true)
(declare-fun x () String)
(declare-fun k () Int)
(assert (= (str.len x) (+ k 1)))
(assert (str.in_re x (re.+ (re.union (str.to_re "a") (str.to_re "b")))))
(assert (str.in_re x (re.from_automaton
  "automaton v {init s0; s0 -> s1 [97, 98]; s1 -> s1 [97, 98]; accepting s1;};")))
(assert (str.in_re x ((_ re.loop 1 3) (str.to_re "a"))))
(check-sat)
"#;
        let first = parse_script(src).unwrap();
        let printed = script_to_string(&first);
        let second = parse_script(&printed).unwrap();
        assert_eq!(first, second, "printed form:\n{printed}");
        // And printing is stable from then on.
        assert_eq!(printed, script_to_string(&second));
    }

    #[test]
    fn negative_literal_form_reparses() {
        let script = "(declare-fun k () Int)(assert (= k (- 1)))";
        let parsed = parse_script(script).unwrap();
        let printed = script_to_string(&parsed);
        assert!(printed.contains("(- 1)"));
        assert_eq!(parse_script(&printed).unwrap(), parsed);
    }
}
