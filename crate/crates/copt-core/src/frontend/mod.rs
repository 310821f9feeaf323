//! Frontend: lexing, preprocessing, parsing, printing.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod preprocess;
pub mod pretty;

use std::fmt;

pub use ast::TranslationUnit;
pub use lexer::{tokenize, tokenize_named, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use preprocess::{preprocess, preprocess_mapped, MacroDef, PreprocessError};
pub use pretty::{expr_to_string, pretty_print, stmt_to_string};

#[derive(Debug)]
pub enum FrontendError {
    Preprocess(PreprocessError),
    Lex(LexError),
    Parse(ParseError),
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontendError::Preprocess(e) => write!(f, "{}", e),
            FrontendError::Lex(e) => write!(f, "{}", e),
            FrontendError::Parse(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for FrontendError {}

impl From<PreprocessError> for FrontendError {
    fn from(e: PreprocessError) -> Self {
        FrontendError::Preprocess(e)
    }
}

impl From<LexError> for FrontendError {
    fn from(e: LexError) -> Self {
        FrontendError::Lex(e)
    }
}

impl From<ParseError> for FrontendError {
    fn from(e: ParseError) -> Self {
        FrontendError::Parse(e)
    }
}

/// Full pipeline: preprocess, tokenize, parse. Token spans are remapped
/// through the preprocessor's line map so diagnostics reference lines of the
/// original file (columns are relative to the expanded line).
pub fn load_source(
    source: &str,
    file_name: &str,
    defines: &[&str],
) -> Result<TranslationUnit, FrontendError> {
    let (text, macros, line_map) = preprocess_mapped(source, defines)?;
    let mut tokens = tokenize_named(&text, file_name)?;
    for t in &mut tokens {
        let remap = |line: u32| -> u32 {
            line_map
                .get(line.saturating_sub(1) as usize)
                .copied()
                .unwrap_or(line)
        };
        let ls = remap(t.span.line_start);
        let le = remap(t.span.line_end);
        t.span.line_start = ls;
        t.span.line_end = le.max(ls);
    }
    Ok(parse(tokens, macros)?)
}

/// Parse already-preprocessed text (used for round-trip checks and rewritten
/// output, which contains no directives).
pub fn parse_text(source: &str, file_name: &str) -> Result<TranslationUnit, FrontendError> {
    let tokens = tokenize_named(source, file_name)?;
    Ok(parse(tokens, Vec::new())?)
}
