//! Maximal-munch check: the lexer must agree with a character-by-character
//! longest-match reference over operator soup.

use copt_core::frontend::{tokenize, TokenKind};
use copt_core::testgen::Gen;

/// Reference: at each position take the longest punctuator from the table,
/// or consume one identifier/number/space.
fn reference_lex(src: &str) -> Vec<String> {
    const OPS: &[&str] = &[
        "<<=", ">>=", "&&", "||", "++", "--", "==", "!=", "<=", ">=", "<<", ">>", "+=", "-=", "*=",
        "/=", "%=", "&=", "|=", "^=", "->", "(", ")", "{", "}", "[", "]", ";", ",", "?", ":", "~",
        "!", "=", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", ".",
    ];
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b' ' {
            i += 1;
            continue;
        }
        if b.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push(src[start..i].to_string());
            continue;
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(src[start..i].to_string());
            continue;
        }
        let rest = &src[i..];
        let hit = OPS
            .iter()
            .filter(|op| rest.starts_with(**op))
            .max_by_key(|op| op.len());
        match hit {
            Some(op) => {
                out.push(op.to_string());
                i += op.len();
            }
            None => panic!("reference lexer stuck at {:?}", rest),
        }
    }
    out
}

#[test]
fn ampersand_runs_use_maximal_munch() {
    let toks: Vec<String> = tokenize("a &&& b")
        .unwrap()
        .into_iter()
        .map(|t| t.text)
        .collect();
    assert_eq!(toks, reference_lex("a &&& b"));
    assert_eq!(toks, vec!["a", "&&", "&", "b"]);
}

#[test]
fn random_operator_soup_matches_reference() {
    let pieces = [
        "&", "|", "<", ">", "=", "+", "-", "!", "x", "7", " ", "*", "/", "%",
    ];
    for seed in 0..500u64 {
        let mut g = Gen::new(seed);
        let mut src = String::from("x");
        for _ in 0..(3 + g.below(20)) {
            src.push_str(pieces[g.below(pieces.len() as u64) as usize]);
        }
        src.push('x');
        let ours: Vec<String> = match tokenize(&src) {
            Ok(t) => t.into_iter().map(|t| t.text).collect(),
            Err(_) => continue, // e.g. `//` starts a comment; not operator input
        };
        if src.contains("//") || src.contains("/*") {
            continue;
        }
        assert_eq!(ours, reference_lex(&src), "input {:?}", src);
    }
}

#[test]
fn keywords_are_distinct_from_identifiers() {
    let toks = tokenize("for fortune int integer").unwrap();
    assert_eq!(toks[0].kind, TokenKind::Keyword);
    assert_eq!(toks[1].kind, TokenKind::Identifier);
    assert_eq!(toks[2].kind, TokenKind::Keyword);
    assert_eq!(toks[3].kind, TokenKind::Identifier);
}
