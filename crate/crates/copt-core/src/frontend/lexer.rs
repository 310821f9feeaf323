//! Lexer for the C subset. Maximal-munch over a fixed punctuator table,
//! ASCII only. Comments (`/* */` and `//`) are discarded.

use std::fmt;
use std::sync::Arc;

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    IntLiteral,
    StringLiteral,
    CharLiteral,
    Punct,
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexErrorKind {
    UnterminatedString,
    UnterminatedComment,
    IllegalCharacter(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub kind: LexErrorKind,
    pub span: SourceSpan,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LexErrorKind::UnterminatedString => {
                write!(f, "{}: unterminated string literal", self.span)
            }
            LexErrorKind::UnterminatedComment => write!(f, "{}: unterminated comment", self.span),
            LexErrorKind::IllegalCharacter(c) => {
                write!(f, "{}: illegal character {:?}", self.span, c)
            }
        }
    }
}

impl std::error::Error for LexError {}

/// Words lexed as keywords. Everything the parser supports plus the common
/// C keywords it explicitly rejects, so diagnostics can name the construct.
const KEYWORDS: &[&str] = &[
    "int", "unsigned", "char", "void", "if", "else", "while", "do", "for", "return", "register",
    "static", "sizeof",
    // outside the subset; the parser reports these as unsupported
    "struct", "union", "enum", "switch", "case", "default", "goto", "break", "continue", "typedef",
    "extern", "const", "volatile", "float", "double", "long", "short", "signed", "auto",
];

/// Multi-character punctuators first so maximal munch falls out of ordering.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "&&", "||", "++", "--", "==", "!=", "<=", ">=", "<<", ">>", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "->", "(", ")", "{", "}", "[", "]", ";", ",", "?", ":", "~", "!",
    "=", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", ".",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.bytes.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (u32, u32)) -> SourceSpan {
        // end column is the last consumed character
        let end_col = if self.col > 1 { self.col - 1 } else { 1 };
        SourceSpan::new(self.file.clone(), start.0, start.1, self.line, end_col)
    }
}

/// Tokenize `source` with spans naming `file`.
pub fn tokenize_named(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    let file: Arc<str> = Arc::from(file);
    let mut cur = Cursor {
        bytes: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        file,
    };
    let mut out = Vec::new();

    loop {
        // skip whitespace and comments
        loop {
            match cur.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => {
                    cur.bump();
                }
                Some(b'/') if cur.peek_at(1) == Some(b'/') => {
                    while let Some(b) = cur.peek() {
                        if b == b'\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                Some(b'/') if cur.peek_at(1) == Some(b'*') => {
                    let start = cur.here();
                    cur.bump();
                    cur.bump();
                    let mut closed = false;
                    while let Some(b) = cur.bump() {
                        if b == b'*' && cur.peek() == Some(b'/') {
                            cur.bump();
                            closed = true;
                            break;
                        }
                    }
                    if !closed {
                        return Err(LexError {
                            kind: LexErrorKind::UnterminatedComment,
                            span: SourceSpan::point(cur.file.clone(), start.0, start.1),
                        });
                    }
                }
                _ => break,
            }
        }

        let Some(b) = cur.peek() else { break };
        let start = cur.here();

        if b.is_ascii_alphabetic() || b == b'_' {
            let mut text = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == b'_' {
                    text.push(c as char);
                    cur.bump();
                } else {
                    break;
                }
            }
            let kind = if is_keyword(&text) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            out.push(Token {
                kind,
                text,
                span: cur.span_from(start),
            });
        } else if b.is_ascii_digit() {
            let mut text = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    text.push(c as char);
                    cur.bump();
                } else {
                    break;
                }
            }
            out.push(Token {
                kind: TokenKind::IntLiteral,
                text,
                span: cur.span_from(start),
            });
        } else if b == b'"' {
            cur.bump();
            let mut text = String::from("\"");
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == b'\n' {
                    break;
                }
                text.push(c as char);
                if c == b'\\' {
                    if let Some(n) = cur.bump() {
                        text.push(n as char);
                    }
                    continue;
                }
                if c == b'"' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(LexError {
                    kind: LexErrorKind::UnterminatedString,
                    span: SourceSpan::point(cur.file.clone(), start.0, start.1),
                });
            }
            out.push(Token {
                kind: TokenKind::StringLiteral,
                text,
                span: cur.span_from(start),
            });
        } else if b == b'\'' {
            cur.bump();
            let mut text = String::from("'");
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == b'\n' {
                    break;
                }
                text.push(c as char);
                if c == b'\\' {
                    if let Some(n) = cur.bump() {
                        text.push(n as char);
                    }
                    continue;
                }
                if c == b'\'' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(LexError {
                    kind: LexErrorKind::UnterminatedString,
                    span: SourceSpan::point(cur.file.clone(), start.0, start.1),
                });
            }
            out.push(Token {
                kind: TokenKind::CharLiteral,
                text,
                span: cur.span_from(start),
            });
        } else {
            let rest = &source[cur.pos..];
            let hit = PUNCTS.iter().find(|p| rest.starts_with(**p));
            match hit {
                Some(p) => {
                    for _ in 0..p.len() {
                        cur.bump();
                    }
                    out.push(Token {
                        kind: TokenKind::Punct,
                        text: (*p).to_string(),
                        span: cur.span_from(start),
                    });
                }
                None => {
                    return Err(LexError {
                        kind: LexErrorKind::IllegalCharacter(b as char),
                        span: SourceSpan::point(cur.file.clone(), start.0, start.1),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Tokenize with the default file name.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    tokenize_named(source, "<input>")
}

/// Decode the escapes of a quoted string-literal lexeme into bytes.
pub fn decode_string_literal(lexeme: &str) -> Vec<u8> {
    let inner = &lexeme[1..lexeme.len().saturating_sub(1)];
    decode_escapes(inner)
}

/// Decode a char-literal lexeme to its value; empty literals decode to 0.
pub fn decode_char_literal(lexeme: &str) -> u8 {
    let inner = &lexeme[1..lexeme.len().saturating_sub(1)];
    decode_escapes(inner).first().copied().unwrap_or(0)
}

fn decode_escapes(s: &str) -> Vec<u8> {
    let mut out = Vec::new();
    let mut it = s.bytes();
    while let Some(b) = it.next() {
        if b != b'\\' {
            out.push(b);
            continue;
        }
        match it.next() {
            Some(b'n') => out.push(b'\n'),
            Some(b't') => out.push(b'\t'),
            Some(b'r') => out.push(b'\r'),
            Some(b'0') => out.push(0),
            Some(b'\\') => out.push(b'\\'),
            Some(b'\'') => out.push(b'\''),
            Some(b'"') => out.push(b'"'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

/// Escape bytes back into C source form (inverse of `decode_escapes`).
pub fn encode_escapes(bytes: &[u8], quote: u8) -> String {
    let mut out = String::new();
    for &b in bytes {
        match b {
            b'\n' => out.push_str("\\n"),
            b'\t' => out.push_str("\\t"),
            b'\r' => out.push_str("\\r"),
            0 => out.push_str("\\0"),
            b'\\' => out.push_str("\\\\"),
            _ if b == quote => {
                out.push('\\');
                out.push(quote as char);
            }
            _ => out.push(b as char),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn countdown_loop_header() {
        assert_eq!(
            texts("for (i=n; i!=0; i--)"),
            vec!["for", "(", "i", "=", "n", ";", "i", "!=", "0", ";", "i", "--", ")"]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn maximal_munch_on_ampersands() {
        // checked against a longest-match reference in tests/lexer_reference.rs
        assert_eq!(texts("a &&& b"), vec!["a", "&&", "&", "b"]);
    }

    #[test]
    fn comments_are_dropped() {
        assert_eq!(texts("a /* x */ b // y\nc"), vec!["a", "b", "c"]);
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("ab cd").unwrap();
        assert_eq!((toks[0].span.line_start, toks[0].span.col_start), (1, 1));
        assert_eq!((toks[1].span.col_start, toks[1].span.col_end), (4, 5));
    }

    #[test]
    fn unterminated_comment_is_positioned() {
        let err = tokenize("x /* never").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedComment);
        assert_eq!(err.span.col_start, 3);
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("\"abc").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedString);
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("a $ b").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::IllegalCharacter('$'));
    }

    #[test]
    fn string_escapes_round_trip() {
        let toks = tokenize(r#""%d \n""#).unwrap();
        let bytes = decode_string_literal(&toks[0].text);
        assert_eq!(bytes, b"%d \n");
        assert_eq!(encode_escapes(&bytes, b'"'), "%d \\n");
    }

    #[test]
    fn char_literal_values() {
        let toks = tokenize("'0' '\\n'").unwrap();
        assert_eq!(decode_char_literal(&toks[0].text), b'0');
        assert_eq!(decode_char_literal(&toks[1].text), b'\n');
    }
}
