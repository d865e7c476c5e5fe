//! Tokenizer for the SMT-LIB 2.6 input language.
//!
//! Produces a flat token stream with line/column positions (both 1-based).
//! String literals are decoded here: `""` doubling, `\u{H..HHHHH}` and
//! `\uHHHH` escapes become code points; any other backslash stays a literal
//! backslash, as SMT-LIB 2.6 prescribes.

use crate::strings::{SmtString, MAX_CHAR};

/// A source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Token payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    LParen,
    RParen,
    /// A simple symbol, e.g. `str.++`, `check-sat`, `x`.
    Symbol(String),
    /// A keyword, e.g. `:produce-models`.
    Keyword(String),
    /// A decoded string literal.
    Str(SmtString),
    /// A non-negative integer literal.
    Int(i64),
}

/// A token together with the position of its first character.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Tokenizer failure.
#[derive(Debug, Clone, PartialEq)]
pub enum LexError {
    /// Malformed input at the given position.
    Syntax { pos: Pos, msg: String },
    /// A string literal decoded to a code point outside the supported
    /// alphabet `[0, 0x2FFFF]`.
    CharOutOfRange { pos: Pos, code_point: u64 },
}

impl std::fmt::Display for LexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LexError::Syntax { pos, msg } => write!(f, "{pos}: {msg}"),
            LexError::CharOutOfRange { pos, code_point } => write!(
                f,
                "{pos}: escape denotes code point {code_point:#x}, outside the \
                 supported alphabet [0, 0x2FFFF]"
            ),
        }
    }
}

/// Characters allowed in simple symbols besides ASCII letters and digits.
fn is_symbol_extra(c: char) -> bool {
    matches!(
        c,
        '~' | '!' | '@' | '$' | '%' | '^' | '&' | '*' | '_' | '-' | '+' | '=' | '<' | '>' | '.'
            | '?' | '/'
    )
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || is_symbol_extra(c)
}

struct Lexer<'a> {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().collect(), i: 0, line: 1, col: 1, _src: src }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T, LexError> {
        Err(LexError::Syntax { pos, msg: msg.into() })
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some(';') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// Decode the body of a string literal; the opening quote is consumed.
    fn string_literal(&mut self, start: Pos) -> Result<Tok, LexError> {
        let mut out = SmtString::empty();
        loop {
            let c = match self.bump() {
                Some(c) => c,
                None => return self.err(start, "unterminated string literal"),
            };
            match c {
                '"' => {
                    // `""` inside a literal denotes one quote character.
                    if self.peek() == Some('"') {
                        self.bump();
                        out.push('"' as u32);
                    } else {
                        return Ok(Tok::Str(out));
                    }
                }
                '\\' => {
                    if self.peek() == Some('u') {
                        let escape_pos = self.pos();
                        match self.unicode_escape()? {
                            Some(cp) => {
                                if cp > MAX_CHAR as u64 {
                                    return Err(LexError::CharOutOfRange {
                                        pos: escape_pos,
                                        code_point: cp,
                                    });
                                }
                                out.push(cp as u32);
                            }
                            // Not a well-formed escape: the backslash is a
                            // plain character and scanning continues after it.
                            None => out.push('\\' as u32),
                        }
                    } else {
                        out.push('\\' as u32);
                    }
                }
                c => {
                    let cp = c as u32;
                    if cp > MAX_CHAR {
                        return Err(LexError::CharOutOfRange {
                            pos: start,
                            code_point: cp as u64,
                        });
                    }
                    out.push(cp);
                }
            }
        }
    }

    /// Try to decode `u{H..HHHHH}` or `uHHHH` at the cursor (the `\` is
    /// already consumed, `u` is next). Returns `Ok(None)` if the characters
    /// do not form an escape, in which case nothing is consumed.
    fn unicode_escape(&mut self) -> Result<Option<u64>, LexError> {
        // Tentatively scan without consuming: compute the extent first.
        let rest = &self.chars[self.i..];
        debug_assert_eq!(rest.first(), Some(&'u'));
        if rest.get(1) == Some(&'{') {
            // `\u{H}` .. `\u{HHHHH}`
            let mut j = 2;
            let mut value: u64 = 0;
            let mut digits = 0;
            while let Some(&c) = rest.get(j) {
                if let Some(d) = c.to_digit(16) {
                    value = value * 16 + d as u64;
                    digits += 1;
                    j += 1;
                    if digits > 5 {
                        return Ok(None);
                    }
                } else {
                    break;
                }
            }
            if digits == 0 || rest.get(j) != Some(&'}') {
                return Ok(None);
            }
            for _ in 0..=j {
                self.bump();
            }
            Ok(Some(value))
        } else {
            // `\uHHHH` (exactly four hex digits)
            let mut value: u64 = 0;
            for j in 1..=4 {
                match rest.get(j).and_then(|c| c.to_digit(16)) {
                    Some(d) => value = value * 16 + d as u64,
                    None => return Ok(None),
                }
            }
            for _ in 0..5 {
                self.bump();
            }
            Ok(Some(value))
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        self.skip_trivia();
        let pos = self.pos();
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(None),
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '"' => {
                self.bump();
                self.string_literal(pos)?
            }
            '\'' => {
                return self.err(
                    pos,
                    "single-quoted strings are not supported; use double quotes \
                     (\"...\" with \"\" for an embedded quote)",
                );
            }
            ':' => {
                self.bump();
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    if is_symbol_char(c) {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return self.err(pos, "expected a keyword name after `:`");
                }
                Tok::Keyword(name)
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if text.len() > 1 && text.starts_with('0') {
                    return self.err(pos, format!("numeral `{text}` has a leading zero"));
                }
                match self.peek() {
                    Some(c) if is_symbol_char(c) => {
                        return self.err(
                            pos,
                            format!("malformed token starting with numeral `{text}`"),
                        );
                    }
                    _ => {}
                }
                match text.parse::<i64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => return self.err(pos, format!("numeral `{text}` is too large")),
                }
            }
            c if is_symbol_char(c) => {
                let mut name = String::new();
                while let Some(c) = self.peek() {
                    if is_symbol_char(c) {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Symbol(name)
            }
            other => {
                return self.err(pos, format!("unexpected character `{other}`"));
            }
        };
        Ok(Some(Token { tok, pos }))
    }
}

/// Tokenize a whole source text.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_stream() {
        assert_eq!(
            toks("(assert (= x 12))"),
            vec![
                Tok::LParen,
                Tok::Symbol("assert".into()),
                Tok::LParen,
                Tok::Symbol("=".into()),
                Tok::Symbol("x".into()),
                Tok::Int(12),
                Tok::RParen,
                Tok::RParen,
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let ts = tokenize("; hello\n  (foo)\n").unwrap();
        assert_eq!(ts[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(ts[1].pos, Pos { line: 2, col: 4 });
        assert_eq!(ts[1].tok, Tok::Symbol("foo".into()));
    }

    #[test]
    fn string_doubling_and_escapes() {
        assert_eq!(toks(r#""a""b""#), vec![Tok::Str(SmtString::from("a\"b"))]);
        assert_eq!(
            toks(r#""\u{61}b""#),
            vec![Tok::Str(SmtString::from("ab"))]
        );
        // Lone backslash and malformed escapes stay literal.
        assert_eq!(
            toks(r#""a\b""#),
            vec![Tok::Str(SmtString::from_code_points(vec![97, 92, 98]))]
        );
        assert_eq!(
            toks(r#""\u{}x""#),
            vec![Tok::Str(SmtString::from_code_points(vec![
                92, 117, 123, 125, 120
            ]))]
        );
        // `\u` with only three hex digits is not an escape either.
        assert_eq!(
            toks(r#""\u12g""#),
            vec![Tok::Str(SmtString::from_code_points(vec![
                92, 117, 49, 50, 103
            ]))]
        );
    }

    #[test]
    fn five_hex_digits_cap() {
        // 0x2FFFF is the top of the alphabet; 0x30000 must be rejected.
        assert_eq!(
            toks(r#""\u{2FFFF}""#),
            vec![Tok::Str(SmtString::from_code_points(vec![0x2FFFF]))]
        );
        match tokenize(r#""\u{30000}""#) {
            Err(LexError::CharOutOfRange { code_point, .. }) => {
                assert_eq!(code_point, 0x30000)
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn single_quote_rejected_with_diagnostic() {
        let err = tokenize("(assert (= x 'ab'))").unwrap_err();
        match err {
            LexError::Syntax { msg, .. } => {
                assert!(msg.contains("single-quoted"), "got: {msg}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unterminated_string() {
        assert!(matches!(
            tokenize("\"abc"),
            Err(LexError::Syntax { .. })
        ));
    }

    #[test]
    fn keywords_and_numerals() {
        assert_eq!(
            toks("(set-option :produce-models true)"),
            vec![
                Tok::LParen,
                Tok::Symbol("set-option".into()),
                Tok::Keyword("produce-models".into()),
                Tok::Symbol("true".into()),
                Tok::RParen,
            ]
        );
        assert!(tokenize("123abc").is_err());
        assert!(tokenize("007").is_err());
        assert!(tokenize("99999999999999999999").is_err());
    }
}
