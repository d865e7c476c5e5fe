//! Recursive-descent parser for the SMT-LIB 2.6 input language.
//!
//! Producing a [`Script`] involves three layers of checking:
//! scope (every identifier in an assert was declared earlier), arity
//! (each operator takes its fixed argument count), and sorts (every
//! assert is a well-sorted `Bool` term).

use std::collections::HashMap;

use super::ast::{CmpOp, Command, Script, Sort, Term};
use super::lexer::{self, LexError, Pos, Tok, Token};
use crate::regexc::{parse_automaton_literal, LiteralError};

/// Why a script was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    /// Malformed input: bad token, bad s-expression shape, wrong arity,
    /// duplicate declaration, malformed automaton literal.
    Syntax { line: u32, col: u32, msg: String },
    /// A well-formed term that is ill-sorted, or a string literal outside
    /// the supported alphabet.
    Sort { msg: String },
    /// An identifier that was never declared and is not a theory symbol.
    UnknownSymbol { line: u32, col: u32, name: String },
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Syntax { line, col, msg } => {
                write!(f, "syntax error at {line}:{col}: {msg}")
            }
            ParseError::Sort { msg } => write!(f, "sort error: {msg}"),
            ParseError::UnknownSymbol { line, col, name } => {
                write!(f, "unknown symbol `{name}` at {line}:{col}")
            }
        }
    }
}

impl std::error::Error for ParseError {}

/// Parse a complete script, checking scope and sorts along the way.
pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    let tokens = lexer::tokenize(text).map_err(|e| match e {
        LexError::Syntax { pos, msg } => ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg,
        },
        LexError::CharOutOfRange { pos, code_point } => ParseError::Sort {
            msg: format!(
                "string literal at {pos} denotes code point {code_point:#x}, \
                 outside the supported alphabet [0, 0x2FFFF]"
            ),
        },
    })?;
    Parser::new(tokens).script()
}

/// Parse a single term against a fixed variable environment and return it
/// with its sort. Used by tests and by tooling that evaluates standalone
/// expressions.
pub fn parse_term_with_env(
    text: &str,
    env: &HashMap<String, Sort>,
) -> Result<(Term, Sort), ParseError> {
    let tokens = lexer::tokenize(text).map_err(|e| match e {
        LexError::Syntax { pos, msg } => ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg,
        },
        LexError::CharOutOfRange { pos, code_point } => ParseError::Sort {
            msg: format!(
                "string literal at {pos} denotes code point {code_point:#x}, \
                 outside the supported alphabet [0, 0x2FFFF]"
            ),
        },
    })?;
    let mut p = Parser::new(tokens);
    p.vars = env.clone();
    let t = p.term()?;
    if p.i != p.toks.len() {
        let pos = p.toks[p.i].pos;
        return Err(ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: "trailing tokens after term".into(),
        });
    }
    let sort = p.sort_of(&t)?;
    Ok((t, sort))
}

/// Operator names and theory constants that cannot be shadowed by
/// declarations.
fn is_reserved(name: &str) -> bool {
    matches!(
        name,
        "true"
            | "false"
            | "and"
            | "or"
            | "not"
            | "="
            | "<="
            | "<"
            | ">="
            | ">"
            | "+"
            | "-"
            | "_"
            | "assert"
            | "check-sat"
            | "get-model"
            | "exit"
            | "declare-fun"
            | "declare-const"
            | "set-logic"
            | "set-option"
    ) || name.starts_with("str.")
        || name.starts_with("re.")
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    vars: HashMap<String, Sort>,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            i: 0,
            vars: HashMap::new(),
        }
    }

    fn eof_pos(&self) -> Pos {
        self.toks
            .last()
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn syntax<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.i)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.i).cloned();
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn expect_lparen(&mut self, what: &str) -> Result<Pos, ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::LParen,
                pos,
            }) => Ok(pos),
            Some(t) => self.syntax(t.pos, format!("expected `(` {what}")),
            None => self.syntax(self.eof_pos(), format!("expected `(` {what}, found end of input")),
        }
    }

    fn expect_rparen(&mut self, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::RParen, ..
            }) => Ok(()),
            Some(t) => self.syntax(t.pos, format!("expected `)` {what}")),
            None => self.syntax(self.eof_pos(), format!("expected `)` {what}, found end of input")),
        }
    }

    fn expect_symbol(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Symbol(s),
                pos,
            }) => Ok((s, pos)),
            Some(t) => self.syntax(t.pos, format!("expected {what}")),
            None => self.syntax(self.eof_pos(), format!("expected {what}, found end of input")),
        }
    }

    fn script(mut self) -> Result<Script, ParseError> {
        let mut commands = Vec::new();
        while self.peek().is_some() {
            commands.push(self.command()?);
        }
        Ok(Script { commands })
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        self.expect_lparen("to start a command")?;
        let (head, head_pos) = self.expect_symbol("a command name")?;
        let cmd = match head.as_str() {
            "set-logic" => {
                let (name, _) = self.expect_symbol("a logic name")?;
                Command::SetLogic(name)
            }
            "set-option" => {
                let key = match self.next() {
                    Some(Token {
                        tok: Tok::Keyword(k),
                        ..
                    }) => k,
                    Some(t) => return self.syntax(t.pos, "expected an option keyword (`:name`)"),
                    None => {
                        return self.syntax(self.eof_pos(), "expected an option keyword")
                    }
                };
                let value = match self.next() {
                    Some(Token {
                        tok: Tok::Symbol(s),
                        ..
                    }) => s,
                    Some(Token {
                        tok: Tok::Int(n), ..
                    }) => n.to_string(),
                    Some(Token {
                        tok: Tok::Str(s), ..
                    }) => s.to_string_lossy(),
                    Some(t) => return self.syntax(t.pos, "expected an atomic option value"),
                    None => return self.syntax(self.eof_pos(), "expected an option value"),
                };
                Command::SetOption(key, value)
            }
            "declare-fun" => {
                let (name, name_pos) = self.expect_symbol("a constant name")?;
                self.expect_lparen("for the (empty) argument list")?;
                match self.peek() {
                    Some(Token {
                        tok: Tok::RParen, ..
                    }) => {
                        self.next();
                    }
                    Some(t) => {
                        let pos = t.pos;
                        return self.syntax(
                            pos,
                            "only zero-argument declarations are supported \
                             (uninterpreted functions are out of scope)",
                        );
                    }
                    None => return self.syntax(self.eof_pos(), "unterminated argument list"),
                }
                let sort = self.sort_name()?;
                self.declare(name, name_pos, sort)?
            }
            "declare-const" => {
                let (name, name_pos) = self.expect_symbol("a constant name")?;
                let sort = self.sort_name()?;
                self.declare(name, name_pos, sort)?
            }
            "assert" => {
                let t = self.term()?;
                let sort = self.sort_of(&t)?;
                if sort != Sort::Bool {
                    return Err(ParseError::Sort {
                        msg: format!(
                            "assert requires a Bool term, but `{}` has sort {}",
                            t.head_name(),
                            sort.smtlib_name()
                        ),
                    });
                }
                Command::Assert(t)
            }
            "check-sat" => Command::CheckSat,
            "get-model" => Command::GetModel,
            "exit" => Command::Exit,
            other => {
                return self.syntax(head_pos, format!("unknown command `{other}`"));
            }
        };
        self.expect_rparen("to close the command")?;
        Ok(cmd)
    }

    fn declare(&mut self, name: String, pos: Pos, sort: Sort) -> Result<Command, ParseError> {
        if is_reserved(&name) {
            return self.syntax(pos, format!("`{name}` is a reserved symbol"));
        }
        if self.vars.contains_key(&name) {
            return self.syntax(pos, format!("duplicate declaration of `{name}`"));
        }
        self.vars.insert(name.clone(), sort);
        Ok(Command::DeclareFun(name, sort))
    }

    fn sort_name(&mut self) -> Result<Sort, ParseError> {
        let (s, _) = self.expect_symbol("a sort name")?;
        match s.as_str() {
            "String" => Ok(Sort::Str),
            "Int" => Ok(Sort::Int),
            other => Err(ParseError::Sort {
                msg: format!("declarations must have sort String or Int, got `{other}`"),
            }),
        }
    }

    // ---------------------------------------------------------------- terms

    fn term(&mut self) -> Result<Term, ParseError> {
        let Some(Token { tok, pos }) = self.next() else {
            return self.syntax(self.eof_pos(), "expected a term, found end of input");
        };
        match tok {
            Tok::Int(n) => Ok(Term::IntLit(n)),
            Tok::Str(s) => Ok(Term::StrLit(s)),
            Tok::Symbol(s) => self.atom(s, pos),
            Tok::LParen => self.compound(pos),
            Tok::RParen => self.syntax(pos, "unexpected `)`"),
            Tok::Keyword(k) => self.syntax(pos, format!("unexpected keyword `:{k}`")),
        }
    }

    fn atom(&mut self, s: String, pos: Pos) -> Result<Term, ParseError> {
        match s.as_str() {
            "true" => Ok(Term::True),
            "false" => Ok(Term::False),
            "re.none" => Ok(Term::ReNone),
            "re.all" => Ok(Term::ReAll),
            "re.allchar" => Ok(Term::ReAllChar),
            _ => {
                if self.vars.contains_key(&s) {
                    Ok(Term::Var(s))
                } else {
                    Err(ParseError::UnknownSymbol {
                        line: pos.line,
                        col: pos.col,
                        name: s,
                    })
                }
            }
        }
    }

    /// A parenthesized term; the opening `(` is consumed.
    fn compound(&mut self, open: Pos) -> Result<Term, ParseError> {
        // `((_ re.loop lo hi) r)` — the only indexed operator.
        if matches!(
            self.peek(),
            Some(Token {
                tok: Tok::LParen,
                ..
            })
        ) {
            return self.indexed(open);
        }
        let (head, head_pos) = self.expect_symbol("an operator")?;

        // The automaton literal operator takes a raw string literal, kept
        // separate so its parse errors can point at the literal itself.
        if head == "re.from_automaton" {
            let (text, lit_pos) = match self.next() {
                Some(Token {
                    tok: Tok::Str(s),
                    pos,
                }) => (s, pos),
                Some(t) => {
                    return self.syntax(
                        t.pos,
                        "re.from_automaton takes one string literal argument",
                    )
                }
                None => return self.syntax(self.eof_pos(), "unterminated re.from_automaton"),
            };
            self.expect_rparen("to close re.from_automaton")?;
            let mut literal = String::new();
            for cp in text.code_points() {
                match char::from_u32(*cp) {
                    Some(c) => literal.push(c),
                    None => {
                        return self.syntax(
                            lit_pos,
                            "automaton literal contains unrepresentable code points",
                        )
                    }
                }
            }
            let (name, auto) = parse_automaton_literal(&literal).map_err(|e| {
                let msg = match e {
                    LiteralError::FormatError { pos, msg } => {
                        format!("malformed automaton literal (offset {pos}): {msg}")
                    }
                    LiteralError::RangeError { pos, lo, hi } => format!(
                        "bad range [{lo}, {hi}] in automaton literal (offset {pos})"
                    ),
                };
                ParseError::Syntax {
                    line: lit_pos.line,
                    col: lit_pos.col,
                    msg,
                }
            })?;
            return Ok(Term::ReAutomaton {
                name,
                auto: Box::new(auto),
            });
        }

        let mut args = Vec::new();
        loop {
            match self.peek() {
                Some(Token {
                    tok: Tok::RParen, ..
                }) => {
                    self.next();
                    break;
                }
                Some(_) => args.push(self.term()?),
                None => {
                    return self.syntax(open, "unterminated s-expression");
                }
            }
        }
        self.apply(head, head_pos, args)
    }

    fn indexed(&mut self, open: Pos) -> Result<Term, ParseError> {
        self.expect_lparen("to start an indexed operator")?;
        let (underscore, upos) = self.expect_symbol("`_`")?;
        if underscore != "_" {
            return self.syntax(upos, "expected `_` in indexed operator");
        }
        let (name, name_pos) = self.expect_symbol("an indexed operator name")?;
        if name != "re.loop" {
            return self.syntax(name_pos, format!("unknown indexed operator `{name}`"));
        }
        let lo = self.loop_bound()?;
        let hi = self.loop_bound()?;
        self.expect_rparen("to close the indexed operator")?;
        let arg = self.term()?;
        self.expect_rparen("to close the re.loop application")?;
        let _ = open;
        Ok(Term::ReLoop(lo, hi, Box::new(arg)))
    }

    fn loop_bound(&mut self) -> Result<u32, ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Int(n),
                pos,
            }) => u32::try_from(n)
                .map_err(|_| ParseError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("loop bound {n} does not fit in 32 bits"),
                }),
            Some(t) => self.syntax(t.pos, "expected a numeral loop bound"),
            None => self.syntax(self.eof_pos(), "expected a loop bound"),
        }
    }

    /// Build the node for `(head args..)`, enforcing arity.
    fn apply(&mut self, head: String, pos: Pos, args: Vec<Term>) -> Result<Term, ParseError> {
        let n = args.len();
        let arity = |want: usize| -> Result<(), ParseError> {
            if n == want {
                Ok(())
            } else {
                Err(ParseError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("`{head}` takes {want} argument(s), got {n}"),
                })
            }
        };
        let at_least = |want: usize| -> Result<(), ParseError> {
            if n >= want {
                Ok(())
            } else {
                Err(ParseError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("`{head}` needs at least {want} argument(s), got {n}"),
                })
            }
        };
        let mut args = args;
        let mut take1 = || args.remove(0);

        Ok(match head.as_str() {
            "and" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::And(args)
                }
            }
            "or" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::Or(args)
                }
            }
            "not" => {
                arity(1)?;
                Term::Not(Box::new(take1()))
            }
            "=" => {
                at_least(2)?;
                chain(args, |a, b| Term::Eq(Box::new(a), Box::new(b)))
            }
            "<=" | "<" | ">=" | ">" => {
                at_least(2)?;
                let op = match head.as_str() {
                    "<=" => CmpOp::Le,
                    "<" => CmpOp::Lt,
                    ">=" => CmpOp::Ge,
                    _ => CmpOp::Gt,
                };
                chain(args, |a, b| Term::Cmp(op, Box::new(a), Box::new(b)))
            }
            "+" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::Add(args)
                }
            }
            "-" => {
                at_least(1)?;
                if n == 1 {
                    Term::Neg(Box::new(take1()))
                } else {
                    let mut it = args.into_iter();
                    let mut acc = it.next().unwrap();
                    for rhs in it {
                        acc = Term::Sub(Box::new(acc), Box::new(rhs));
                    }
                    acc
                }
            }
            "str.++" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::Concat(args)
                }
            }
            "str.len" => {
                arity(1)?;
                Term::StrLen(Box::new(take1()))
            }
            "str.at" => {
                arity(2)?;
                two(args, |a, b| Term::At(Box::new(a), Box::new(b)))
            }
            "str.substr" => {
                arity(3)?;
                three(args, |a, b, c| {
                    Term::Substr(Box::new(a), Box::new(b), Box::new(c))
                })
            }
            "str.indexof" => {
                arity(3)?;
                three(args, |a, b, c| {
                    Term::IndexOf(Box::new(a), Box::new(b), Box::new(c))
                })
            }
            "str.prefixof" => {
                arity(2)?;
                two(args, |a, b| Term::Prefixof(Box::new(a), Box::new(b)))
            }
            "str.suffixof" => {
                arity(2)?;
                two(args, |a, b| Term::Suffixof(Box::new(a), Box::new(b)))
            }
            "str.contains" => {
                arity(2)?;
                two(args, |a, b| Term::Contains(Box::new(a), Box::new(b)))
            }
            "str.replace" => {
                arity(3)?;
                three(args, |a, b, c| {
                    Term::Replace(Box::new(a), Box::new(b), Box::new(c))
                })
            }
            "str.replace_all" => {
                arity(3)?;
                three(args, |a, b, c| {
                    Term::ReplaceAll(Box::new(a), Box::new(b), Box::new(c))
                })
            }
            "str.replace_re" => {
                arity(3)?;
                three(args, |a, b, c| {
                    Term::ReplaceRe(Box::new(a), Box::new(b), Box::new(c))
                })
            }
            "str.replace_re_all" => {
                arity(3)?;
                three(args, |a, b, c| {
                    Term::ReplaceReAll(Box::new(a), Box::new(b), Box::new(c))
                })
            }
            "str.reverse" => {
                arity(1)?;
                Term::Reverse(Box::new(take1()))
            }
            "str.to_int" => {
                arity(1)?;
                Term::ToInt(Box::new(take1()))
            }
            "str.from_int" => {
                arity(1)?;
                Term::FromInt(Box::new(take1()))
            }
            "str.in_re" => {
                arity(2)?;
                two(args, |a, b| Term::InRe(Box::new(a), Box::new(b)))
            }
            "str.to_re" => {
                arity(1)?;
                Term::ToRe(Box::new(take1()))
            }
            "re.++" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::ReConcat(args)
                }
            }
            "re.union" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::ReUnion(args)
                }
            }
            "re.inter" => {
                at_least(1)?;
                if n == 1 {
                    take1()
                } else {
                    Term::ReInter(args)
                }
            }
            "re.*" => {
                arity(1)?;
                Term::ReStar(Box::new(take1()))
            }
            "re.+" => {
                arity(1)?;
                Term::RePlus(Box::new(take1()))
            }
            "re.opt" => {
                arity(1)?;
                Term::ReOpt(Box::new(take1()))
            }
            "re.range" => {
                arity(2)?;
                two(args, |a, b| Term::ReRange(Box::new(a), Box::new(b)))
            }
            "re.comp" => {
                arity(1)?;
                Term::ReComp(Box::new(take1()))
            }
            other => {
                return Err(ParseError::UnknownSymbol {
                    line: pos.line,
                    col: pos.col,
                    name: other.to_string(),
                });
            }
        })
    }

    // ---------------------------------------------------------------- sorts

    /// Compute the sort of a term, verifying every operator signature.
    pub(crate) fn sort_of(&self, t: &Term) -> Result<Sort, ParseError> {
        use Term::*;
        let want = |arg: &Term, idx: usize, parent: &Term, expected: Sort| -> Result<(), ParseError> {
            let got = self.sort_of(arg)?;
            if got == expected {
                Ok(())
            } else {
                Err(ParseError::Sort {
                    msg: format!(
                        "argument {idx} of `{}` must have sort {}, but `{}` has sort {}",
                        parent.head_name(),
                        expected.smtlib_name(),
                        arg.head_name(),
                        got.smtlib_name()
                    ),
                })
            }
        };
        Ok(match t {
            True | False => Sort::Bool,
            Not(a) => {
                want(a, 1, t, Sort::Bool)?;
                Sort::Bool
            }
            And(xs) | Or(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    want(x, i + 1, t, Sort::Bool)?;
                }
                Sort::Bool
            }
            Eq(a, b) => {
                let sa = self.sort_of(a)?;
                let sb = self.sort_of(b)?;
                if sa != sb {
                    return Err(ParseError::Sort {
                        msg: format!(
                            "`=` compares a {} with a {}",
                            sa.smtlib_name(),
                            sb.smtlib_name()
                        ),
                    });
                }
                if sa != Sort::Str && sa != Sort::Int {
                    return Err(ParseError::Sort {
                        msg: format!("`=` over {} terms is not supported", sa.smtlib_name()),
                    });
                }
                Sort::Bool
            }
            Cmp(_, a, b) => {
                want(a, 1, t, Sort::Int)?;
                want(b, 2, t, Sort::Int)?;
                Sort::Bool
            }
            Prefixof(a, b) | Suffixof(a, b) | Contains(a, b) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::Str)?;
                Sort::Bool
            }
            InRe(a, b) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::RegLan)?;
                Sort::Bool
            }
            IntLit(_) => Sort::Int,
            Add(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    want(x, i + 1, t, Sort::Int)?;
                }
                Sort::Int
            }
            Sub(a, b) => {
                want(a, 1, t, Sort::Int)?;
                want(b, 2, t, Sort::Int)?;
                Sort::Int
            }
            Neg(a) => {
                want(a, 1, t, Sort::Int)?;
                Sort::Int
            }
            StrLen(a) => {
                want(a, 1, t, Sort::Str)?;
                Sort::Int
            }
            IndexOf(a, b, c) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::Str)?;
                want(c, 3, t, Sort::Int)?;
                Sort::Int
            }
            ToInt(a) => {
                want(a, 1, t, Sort::Str)?;
                Sort::Int
            }
            StrLit(_) => Sort::Str,
            Var(name) => match self.vars.get(name) {
                Some(s) => *s,
                None => {
                    return Err(ParseError::Sort {
                        msg: format!("variable `{name}` has no declared sort"),
                    })
                }
            },
            Concat(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    want(x, i + 1, t, Sort::Str)?;
                }
                Sort::Str
            }
            At(a, b) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::Int)?;
                Sort::Str
            }
            Substr(a, b, c) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::Int)?;
                want(c, 3, t, Sort::Int)?;
                Sort::Str
            }
            Replace(a, b, c) | ReplaceAll(a, b, c) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::Str)?;
                want(c, 3, t, Sort::Str)?;
                Sort::Str
            }
            ReplaceRe(a, b, c) | ReplaceReAll(a, b, c) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::RegLan)?;
                want(c, 3, t, Sort::Str)?;
                Sort::Str
            }
            Reverse(a) => {
                want(a, 1, t, Sort::Str)?;
                Sort::Str
            }
            FromInt(a) => {
                want(a, 1, t, Sort::Int)?;
                Sort::Str
            }
            ToRe(a) => {
                want(a, 1, t, Sort::Str)?;
                Sort::RegLan
            }
            ReNone | ReAll | ReAllChar | ReAutomaton { .. } => Sort::RegLan,
            ReConcat(xs) | ReUnion(xs) | ReInter(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    want(x, i + 1, t, Sort::RegLan)?;
                }
                Sort::RegLan
            }
            ReStar(a) | RePlus(a) | ReOpt(a) | ReComp(a) | ReLoop(_, _, a) => {
                want(a, 1, t, Sort::RegLan)?;
                Sort::RegLan
            }
            ReRange(a, b) => {
                want(a, 1, t, Sort::Str)?;
                want(b, 2, t, Sort::Str)?;
                Sort::RegLan
            }
        })
    }
}

/// Left-to-right chaining for `=` and comparisons: `(op a b c)` means
/// `(and (op a b) (op b c))`.
fn chain(args: Vec<Term>, mk: impl Fn(Term, Term) -> Term) -> Term {
    if args.len() == 2 {
        let mut it = args.into_iter();
        let a = it.next().unwrap();
        let b = it.next().unwrap();
        return mk(a, b);
    }
    let mut out = Vec::new();
    for w in args.windows(2) {
        out.push(mk(w[0].clone(), w[1].clone()));
    }
    Term::And(out)
}

fn two(args: Vec<Term>, mk: impl FnOnce(Term, Term) -> Term) -> Term {
    let mut it = args.into_iter();
    let a = it.next().unwrap();
    let b = it.next().unwrap();
    mk(a, b)
}

fn three(args: Vec<Term>, mk: impl FnOnce(Term, Term, Term) -> Term) -> Term {
    let mut it = args.into_iter();
    let a = it.next().unwrap();
    let b = it.next().unwrap();
    let c = it.next().unwrap();
    mk(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strings::SmtString;

    const INTRO_SCRIPT: &str = r#"
(set-logic QF_SLIA)
(declare-fun x () String)
(declare-fun y () String)
(declare-fun z () String)
(declare-fun k () Int)
(assert (= (str.len x) (+ k 1)))
(assert (= x (str.++ y z)))
(assert (str.in_re x (re.+ (re.union (str.to_re "a") (str.to_re "b")))))
(check-sat)
(get-model)
"#;

    #[test]
    fn intro_script_parses() {
        let s = parse_script(INTRO_SCRIPT).unwrap();
        assert_eq!(s.commands.len(), 10);
        // Without the logic/model plumbing the core is 8 commands.
        let core: Vec<_> = s
            .commands
            .iter()
            .filter(|c| {
                matches!(
                    c,
                    Command::DeclareFun(..) | Command::Assert(_) | Command::CheckSat
                )
            })
            .collect();
        assert_eq!(core.len(), 8);
        assert!(matches!(
            &s.commands[1],
            Command::DeclareFun(n, Sort::Str) if n == "x"
        ));
        assert!(matches!(
            &s.commands[5],
            Command::Assert(Term::Eq(a, b))
                if matches!(**a, Term::StrLen(_)) && matches!(**b, Term::Add(_))
        ));
    }

    #[test]
    fn undeclared_identifier_is_unknown_symbol() {
        let err = parse_script("(assert (= x x))").unwrap_err();
        assert!(
            matches!(err, ParseError::UnknownSymbol { ref name, .. } if name == "x"),
            "got {err:?}"
        );
    }

    #[test]
    fn ground_membership_is_well_sorted() {
        let s = parse_script(r#"(assert (str.in_re "ab" (re.* (str.to_re "ab"))))"#).unwrap();
        assert_eq!(s.commands.len(), 1);
    }

    #[test]
    fn sort_errors_are_reported() {
        let err = parse_script(
            "(declare-fun x () String)(declare-fun k () Int)(assert (= x k))",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Sort { .. }), "got {err:?}");

        let err = parse_script("(declare-fun x () String)(assert (<= x 1))").unwrap_err();
        assert!(matches!(err, ParseError::Sort { .. }), "got {err:?}");

        let err = parse_script("(declare-fun b () Bool)").unwrap_err();
        assert!(matches!(err, ParseError::Sort { .. }), "got {err:?}");

        // Asserting a non-Bool term.
        let err = parse_script("(declare-fun x () String)(assert x)").unwrap_err();
        assert!(matches!(err, ParseError::Sort { .. }), "got {err:?}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_script("(assert (and true true)").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "got {err:?}");
        let err = parse_script("\n  (frobnicate)").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!((line, col), (2, 4));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_declarations_rejected() {
        let err =
            parse_script("(declare-fun x () String)(declare-fun x () Int)").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
        let err = parse_script("(declare-fun str.len () Int)").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn declare_const_sugar() {
        let s = parse_script("(declare-const x String)(assert (= x x))").unwrap();
        assert!(matches!(
            &s.commands[0],
            Command::DeclareFun(n, Sort::Str) if n == "x"
        ));
    }

    #[test]
    fn arity_enforced() {
        assert!(parse_script("(assert (str.prefixof \"a\"))").is_err());
        assert!(parse_script("(assert (not true false))").is_err());
        assert!(parse_script(r#"(assert (str.in_re "a" (re.* )))"#).is_err());
    }

    #[test]
    fn minus_forms() {
        let env = HashMap::new();
        let (t, sort) = parse_term_with_env("(- 1)", &env).unwrap();
        assert_eq!(sort, Sort::Int);
        assert_eq!(t, Term::Neg(Box::new(Term::IntLit(1))));
        let (t, _) = parse_term_with_env("(- 5 2 1)", &env).unwrap();
        assert_eq!(
            t,
            Term::Sub(
                Box::new(Term::Sub(
                    Box::new(Term::IntLit(5)),
                    Box::new(Term::IntLit(2))
                )),
                Box::new(Term::IntLit(1))
            )
        );
    }

    #[test]
    fn chained_comparison() {
        let env = HashMap::new();
        let (t, _) = parse_term_with_env("(<= 1 2 3)", &env).unwrap();
        assert_eq!(
            t,
            Term::And(vec![
                Term::Cmp(CmpOp::Le, Box::new(Term::IntLit(1)), Box::new(Term::IntLit(2))),
                Term::Cmp(CmpOp::Le, Box::new(Term::IntLit(2)), Box::new(Term::IntLit(3))),
            ])
        );
    }

    #[test]
    fn re_loop_indexed_form() {
        let env = HashMap::new();
        let (t, sort) = parse_term_with_env(r#"((_ re.loop 2 4) (str.to_re "ab"))"#, &env).unwrap();
        assert_eq!(sort, Sort::RegLan);
        assert!(matches!(t, Term::ReLoop(2, 4, _)));
    }

    #[test]
    fn automaton_literal_operator() {
        let env = HashMap::new();
        let src = r#"(str.in_re "abc"
            (re.from_automaton
              "automaton value_0 {init s0; s0 -> s1 [0, 100]; s1 ->s1[0,65535]; accepting s1;};"))"#;
        let (t, sort) = parse_term_with_env(src, &env).unwrap();
        assert_eq!(sort, Sort::Bool);
        match t {
            Term::InRe(_, re) => match *re {
                Term::ReAutomaton { name, auto } => {
                    assert_eq!(name, "value_0");
                    assert_eq!(auto.num_states(), 2);
                }
                other => panic!("expected automaton literal, got {other:?}"),
            },
            other => panic!("expected membership, got {other:?}"),
        }
        // Malformed literals are syntax errors with the literal's position.
        let err = parse_term_with_env(r#"(re.from_automaton "automaton a {}")"#, &env).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn string_escapes_decode() {
        let env = HashMap::new();
        let (t, _) = parse_term_with_env(r#""a""b\u{2FFFF}A""#, &env).unwrap();
        assert_eq!(
            t,
            Term::StrLit(SmtString::from_code_points(vec![
                97, 34, 98, 0x2FFFF, 65
            ]))
        );
    }

    #[test]
    fn out_of_alphabet_literal_is_sort_error() {
        let err = parse_script(r#"(assert (= "\u{30000}" "x"))"#).unwrap_err();
        assert!(matches!(err, ParseError::Sort { .. }), "got {err:?}");
    }
}
