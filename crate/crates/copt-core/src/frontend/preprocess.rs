//! Minimal line-oriented preprocessor: `#define` (object- and function-like),
//! `#ifdef`/`#endif`, and `#include` (dropped; library functions are ambient).
//!
//! Directive lines and inactive conditional regions are removed from the
//! output entirely; the companion line map records where every surviving
//! line came from so diagnostics can point at the original file.

use std::collections::HashMap;
use std::fmt;

use super::lexer::{tokenize_named, Token, TokenKind};

const MAX_EXPANSION_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDef {
    pub name: String,
    /// `None` for object-like macros, `Some` (possibly empty) for function-like.
    pub params: Option<Vec<String>>,
    pub replacement: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreprocessErrorKind {
    UnbalancedConditional,
    RecursiveMacro(String),
    UnknownDirective(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessError {
    pub kind: PreprocessErrorKind,
    pub line: u32,
}

impl fmt::Display for PreprocessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PreprocessErrorKind::UnbalancedConditional => {
                write!(f, "line {}: unbalanced #ifdef/#endif", self.line)
            }
            PreprocessErrorKind::RecursiveMacro(name) => {
                write!(
                    f,
                    "line {}: macro `{}` expands past depth {}",
                    self.line, name, MAX_EXPANSION_DEPTH
                )
            }
            PreprocessErrorKind::UnknownDirective(name) => {
                write!(f, "line {}: unsupported directive #{}", self.line, name)
            }
        }
    }
}

impl std::error::Error for PreprocessError {}

/// Preprocess `source`; names in `predefined` behave as empty object-like
/// macros (they satisfy `#ifdef` and expand to nothing).
pub fn preprocess(
    source: &str,
    predefined: &[&str],
) -> Result<(String, Vec<MacroDef>), PreprocessError> {
    let (text, macros, _) = preprocess_mapped(source, predefined)?;
    Ok((text, macros))
}

/// As [`preprocess`], also returning for each output line (0-based) the
/// 1-based line number it came from in `source`.
pub fn preprocess_mapped(
    source: &str,
    predefined: &[&str],
) -> Result<(String, Vec<MacroDef>, Vec<u32>), PreprocessError> {
    let stripped = strip_comments(source);

    let mut table: HashMap<String, MacroDef> = HashMap::new();
    for name in predefined {
        table.insert(
            name.to_string(),
            MacroDef {
                name: name.to_string(),
                params: None,
                replacement: Vec::new(),
            },
        );
    }

    let mut recorded = Vec::new();
    let mut out_lines: Vec<String> = Vec::new();
    let mut line_map: Vec<u32> = Vec::new();
    // each entry: was the enclosing region active when this #ifdef opened,
    // and is this branch taken
    let mut cond_stack: Vec<bool> = Vec::new();

    for (idx, line) in stripped.lines().enumerate() {
        let lineno = idx as u32 + 1;
        let active = cond_stack.iter().all(|&b| b);
        let trimmed = line.trim_start();

        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim_start();
            let (word, tail) = split_word(rest);
            match word {
                "define" if active => {
                    let def = parse_define(tail, lineno)?;
                    recorded.push(def.clone());
                    table.insert(def.name.clone(), def);
                }
                "define" => {}
                "ifdef" => {
                    let (name, _) = split_word(tail.trim_start());
                    cond_stack.push(active && table.contains_key(name));
                }
                "endif" => {
                    if cond_stack.pop().is_none() {
                        return Err(PreprocessError {
                            kind: PreprocessErrorKind::UnbalancedConditional,
                            line: lineno,
                        });
                    }
                }
                "include" => {}
                other => {
                    if active {
                        return Err(PreprocessError {
                            kind: PreprocessErrorKind::UnknownDirective(other.to_string()),
                            line: lineno,
                        });
                    }
                }
            }
            continue;
        }

        if !active {
            continue;
        }

        out_lines.push(expand_line(line, &table, lineno)?);
        line_map.push(lineno);
    }

    if !cond_stack.is_empty() {
        return Err(PreprocessError {
            kind: PreprocessErrorKind::UnbalancedConditional,
            line: stripped.lines().count() as u32,
        });
    }

    let mut text = out_lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    Ok((text, recorded, line_map))
}

fn split_word(s: &str) -> (&str, &str) {
    let end = s
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(s.len());
    (&s[..end], &s[end..])
}

fn parse_define(tail: &str, lineno: u32) -> Result<MacroDef, PreprocessError> {
    let tail = tail.trim_start();
    let (name, rest) = split_word(tail);
    if name.is_empty() {
        return Err(PreprocessError {
            kind: PreprocessErrorKind::UnknownDirective("define".to_string()),
            line: lineno,
        });
    }
    // a '(' immediately after the name makes the macro function-like
    if let Some(after) = rest.strip_prefix('(') {
        let close = after.find(')').unwrap_or(after.len());
        let params: Vec<String> = after[..close]
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
        let body = if close < after.len() {
            &after[close + 1..]
        } else {
            ""
        };
        let replacement = lex_fragment(body);
        Ok(MacroDef {
            name: name.to_string(),
            params: Some(params),
            replacement,
        })
    } else {
        let replacement = lex_fragment(rest);
        Ok(MacroDef {
            name: name.to_string(),
            params: None,
            replacement,
        })
    }
}

fn lex_fragment(text: &str) -> Vec<Token> {
    tokenize_named(text, "<macro>").unwrap_or_default()
}

fn expand_line(
    line: &str,
    table: &HashMap<String, MacroDef>,
    lineno: u32,
) -> Result<String, PreprocessError> {
    // Lines that do not lex (rare; reported properly at tokenize time) or
    // contain no macro names pass through verbatim.
    let Ok(tokens) = tokenize_named(line, "<line>") else {
        return Ok(line.to_string());
    };
    if !tokens
        .iter()
        .any(|t| t.kind == TokenKind::Identifier && table.contains_key(&t.text))
    {
        return Ok(line.to_string());
    }
    let expanded = expand_tokens(&tokens, table, 0, lineno)?;
    Ok(serialize_tokens(&expanded))
}

fn expand_tokens(
    tokens: &[Token],
    table: &HashMap<String, MacroDef>,
    depth: usize,
    lineno: u32,
) -> Result<Vec<Token>, PreprocessError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let mac = if tok.kind == TokenKind::Identifier {
            table.get(&tok.text)
        } else {
            None
        };
        match mac {
            Some(def) if def.params.is_none() => {
                if depth >= MAX_EXPANSION_DEPTH {
                    return Err(PreprocessError {
                        kind: PreprocessErrorKind::RecursiveMacro(def.name.clone()),
                        line: lineno,
                    });
                }
                let rec = expand_tokens(&def.replacement, table, depth + 1, lineno)?;
                out.extend(rec);
                i += 1;
            }
            Some(def) => {
                let params = def.params.as_ref().unwrap();
                if tokens.get(i + 1).map(|t| t.text.as_str()) != Some("(") {
                    out.push(tok.clone());
                    i += 1;
                    continue;
                }
                if depth >= MAX_EXPANSION_DEPTH {
                    return Err(PreprocessError {
                        kind: PreprocessErrorKind::RecursiveMacro(def.name.clone()),
                        line: lineno,
                    });
                }
                let (args, consumed) = collect_args(&tokens[i + 2..]);
                let mut substituted = Vec::new();
                for t in &def.replacement {
                    if t.kind == TokenKind::Identifier {
                        if let Some(pos) = params.iter().position(|p| p == &t.text) {
                            substituted.extend(args.get(pos).cloned().unwrap_or_default());
                            continue;
                        }
                    }
                    substituted.push(t.clone());
                }
                let rec = expand_tokens(&substituted, table, depth + 1, lineno)?;
                out.extend(rec);
                i += 2 + consumed + 1; // name, '(', args, ')'
            }
            None => {
                out.push(tok.clone());
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Split the tokens of an argument list at top-level commas; returns the
/// argument token groups and the count of tokens before the closing paren.
fn collect_args(tokens: &[Token]) -> (Vec<Vec<Token>>, usize) {
    let mut args: Vec<Vec<Token>> = vec![Vec::new()];
    let mut depth = 0usize;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        match t.text.as_str() {
            "(" | "[" => {
                depth += 1;
                args.last_mut().unwrap().push(t.clone());
            }
            ")" | "]" if depth > 0 => {
                depth -= 1;
                args.last_mut().unwrap().push(t.clone());
            }
            ")" => {
                if args.len() == 1 && args[0].is_empty() {
                    args.clear();
                }
                return (args, i);
            }
            "," if depth == 0 => args.push(Vec::new()),
            _ => args.last_mut().unwrap().push(t.clone()),
        }
        i += 1;
    }
    (args, i)
}

/// Re-serialize a token stream, inserting spaces only where gluing two
/// lexemes would change how they re-lex.
pub fn serialize_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && needs_space(&tokens[i - 1].text, &t.text) {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

fn needs_space(a: &str, b: &str) -> bool {
    let la = a.chars().last().unwrap_or(' ');
    let fb = b.chars().next().unwrap_or(' ');
    let word = |c: char| c.is_ascii_alphanumeric() || c == '_';
    if word(la) && word(fb) {
        return true;
    }
    // avoid forming a longer punctuator across the boundary ("&" + "&" etc.)
    const GLUE_HAZARDS: &[&str] = &[
        "&&", "||", "++", "--", "==", "!=", "<=", ">=", "<<", ">>", "+=", "-=", "*=", "/=", "%=",
        "&=", "|=", "^=", "->", "<<=", ">>=", "//", "/*",
    ];
    let mut joined = String::new();
    joined.push(la);
    joined.push(fb);
    GLUE_HAZARDS.iter().any(|h| h.starts_with(joined.as_str()))
}

/// Remove `/* */` and `//` comments, preserving line structure and string
/// and character literals.
pub fn strip_comments(source: &str) -> String {
    let bytes = source.as_bytes();
    let mut out = String::with_capacity(source.len());
    let mut i = 0;
    #[derive(PartialEq)]
    enum St {
        Code,
        Str,
        Chr,
        Block,
        Line,
    }
    let mut st = St::Code;
    while i < bytes.len() {
        let b = bytes[i];
        match st {
            St::Code => match b {
                b'"' => {
                    st = St::Str;
                    out.push('"');
                }
                b'\'' => {
                    st = St::Chr;
                    out.push('\'');
                }
                b'/' if bytes.get(i + 1) == Some(&b'*') => {
                    st = St::Block;
                    out.push(' ');
                    i += 1;
                }
                b'/' if bytes.get(i + 1) == Some(&b'/') => {
                    st = St::Line;
                    i += 1;
                }
                _ => out.push(b as char),
            },
            St::Str => {
                out.push(b as char);
                if b == b'\\' && i + 1 < bytes.len() {
                    out.push(bytes[i + 1] as char);
                    i += 1;
                } else if b == b'"' || b == b'\n' {
                    st = St::Code;
                }
            }
            St::Chr => {
                out.push(b as char);
                if b == b'\\' && i + 1 < bytes.len() {
                    out.push(bytes[i + 1] as char);
                    i += 1;
                } else if b == b'\'' || b == b'\n' {
                    st = St::Code;
                }
            }
            St::Block => {
                if b == b'*' && bytes.get(i + 1) == Some(&b'/') {
                    st = St::Code;
                    i += 1;
                } else if b == b'\n' {
                    out.push('\n');
                }
            }
            St::Line => {
                if b == b'\n' {
                    st = St::Code;
                    out.push('\n');
                }
            }
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(src: &str, predefined: &[&str]) -> String {
        preprocess(src, predefined).unwrap().0
    }

    #[test]
    fn object_macro_is_recorded_and_expanded() {
        let (text, macros) = preprocess("#define N 100000\nint a[N];\n", &[]).unwrap();
        assert_eq!(text, "int a[100000];\n");
        assert_eq!(macros.len(), 1);
        assert_eq!(macros[0].name, "N");
        assert!(macros[0].params.is_none());
    }

    #[test]
    fn undefined_ifdef_block_vanishes() {
        assert_eq!(pp("#ifdef DEBUG\nX\n#endif\n", &[]), "");
    }

    #[test]
    fn predefined_name_keeps_block() {
        assert_eq!(pp("#ifdef DEBUG\nkept\n#endif\n", &["DEBUG"]), "kept\n");
    }

    #[test]
    fn function_like_macro_substitutes() {
        assert_eq!(pp("#define F(x) ((x)+(x))\nF(2)\n", &[]), "((2)+(2))\n");
    }

    #[test]
    fn later_define_wins() {
        let src = "#define N 100000\n#ifdef SMALL\n#define N 100\n#endif\nint a[N];\n";
        assert_eq!(pp(src, &[]), "int a[100000];\n");
        assert_eq!(pp(src, &["SMALL"]), "int a[100];\n");
    }

    #[test]
    fn include_lines_are_dropped() {
        assert_eq!(pp("#include \"header\"\nint x;\n", &[]), "int x;\n");
    }

    #[test]
    fn nested_conditionals() {
        let src = "#ifdef A\n#ifdef B\nboth\n#endif\nonly_a\n#endif\n";
        assert_eq!(pp(src, &["A"]), "only_a\n");
        assert_eq!(pp(src, &["A", "B"]), "both\nonly_a\n");
        assert_eq!(pp(src, &[]), "");
    }

    #[test]
    fn unbalanced_endif_is_an_error() {
        let err = preprocess("#endif\n", &[]).unwrap_err();
        assert_eq!(err.kind, PreprocessErrorKind::UnbalancedConditional);
    }

    #[test]
    fn unclosed_ifdef_is_an_error() {
        let err = preprocess("#ifdef X\ny\n", &[]).unwrap_err();
        assert_eq!(err.kind, PreprocessErrorKind::UnbalancedConditional);
    }

    #[test]
    fn self_referential_macro_hits_depth_limit() {
        let err = preprocess("#define A A\nA\n", &[]).unwrap_err();
        assert!(matches!(err.kind, PreprocessErrorKind::RecursiveMacro(_)));
    }

    #[test]
    fn line_map_tracks_original_lines() {
        let src = "#define N 4\nint a[N];\n#ifdef X\ngone\n#endif\nint b;\n";
        let (text, _, map) = preprocess_mapped(src, &[]).unwrap();
        assert_eq!(text, "int a[4];\nint b;\n");
        assert_eq!(map, vec![2, 6]);
    }

    #[test]
    fn comments_do_not_hide_directives() {
        let src = "#define N 8 /* size */\nint a[N]; /* uses N */\n";
        assert_eq!(pp(src, &[]), "int a[8];\n");
    }

    #[test]
    fn macros_inside_strings_stay_verbatim() {
        let src = "#define N 8\nchar *s = \"N\";\n";
        assert_eq!(pp(src, &[]), "char *s = \"N\";\n");
    }
}
