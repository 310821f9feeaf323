//! Recursive-descent parser for the C subset, followed by a resolution pass
//! that checks every identifier against globals, parameters, locals and the
//! ambient builtins.

use std::collections::HashSet;
use std::fmt;

use super::ast::*;
use super::lexer::{decode_char_literal, decode_string_literal, Token, TokenKind};
use super::preprocess::MacroDef;
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax { expected: String },
    UnresolvedIdentifier { name: String },
    UnsupportedConstruct { what: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

impl ParseError {
    fn syntax(span: SourceSpan, expected: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax {
                expected: expected.into(),
            },
            span,
        }
    }

    fn unsupported(span: SourceSpan, what: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::UnsupportedConstruct { what: what.into() },
            span,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { expected } => {
                write!(f, "{}: expected {}", self.span, expected)
            }
            ParseErrorKind::UnresolvedIdentifier { name } => {
                write!(f, "{}: unresolved identifier `{}`", self.span, name)
            }
            ParseErrorKind::UnsupportedConstruct { what } => {
                write!(f, "{}: unsupported construct: {}", self.span, what)
            }
        }
    }
}

impl std::error::Error for ParseError {}

/// Parse a token stream into a translation unit. `macros` is attached to the
/// result for provenance.
pub fn parse(tokens: Vec<Token>, macros: Vec<MacroDef>) -> Result<TranslationUnit, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let mut tu = TranslationUnit {
        globals: Vec::new(),
        functions: Vec::new(),
        macros,
    };
    let mut prototypes: HashSet<String> = HashSet::new();

    while !p.at_end() {
        p.parse_top_level(&mut tu, &mut prototypes)?;
    }
    resolve(&tu, &prototypes)?;
    Ok(tu)
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "struct", "union", "enum", "switch", "case", "default", "goto", "break", "continue", "typedef",
    "extern", "const", "volatile", "float", "double", "long", "short", "signed", "auto",
];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    fn last_span(&self) -> SourceSpan {
        if self.pos > 0 {
            self.tokens[self.pos - 1].span.clone()
        } else {
            SourceSpan::synthetic()
        }
    }

    fn here_span(&self) -> SourceSpan {
        self.peek()
            .map(|t| t.span.clone())
            .unwrap_or_else(|| self.last_span())
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, text: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Punct && t.text == text)
    }

    fn is_punct_at(&self, n: usize, text: &str) -> bool {
        self.peek_at(n)
            .is_some_and(|t| t.kind == TokenKind::Punct && t.text == text)
    }

    fn is_keyword(&self, word: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && t.text == word)
    }

    fn eat_punct(&mut self, text: &str) -> bool {
        if self.is_punct(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        if self.is_keyword(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, text: &str) -> Result<SourceSpan, ParseError> {
        if self.is_punct(text) {
            Ok(self.bump().unwrap().span)
        } else {
            Err(ParseError::syntax(self.here_span(), format!("`{}`", text)))
        }
    }

    fn expect_identifier(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                let t = self.bump().unwrap();
                Ok((t.text, t.span))
            }
            _ => Err(ParseError::syntax(self.here_span(), "identifier")),
        }
    }

    fn reject_unsupported_keyword(&self) -> Result<(), ParseError> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && UNSUPPORTED_KEYWORDS.contains(&t.text.as_str()) {
                return Err(ParseError::unsupported(
                    t.span.clone(),
                    format!("`{}`", t.text),
                ));
            }
        }
        Ok(())
    }

    /// True when the current token starts a type specifier.
    fn at_type(&self) -> bool {
        self.is_keyword("int")
            || self.is_keyword("unsigned")
            || self.is_keyword("char")
            || self.is_keyword("void")
    }

    /// base-type ('unsigned' ['int'] | 'int' | 'char' | 'void')
    fn parse_base_type(&mut self) -> Result<BaseType, ParseError> {
        if self.eat_keyword("unsigned") {
            self.eat_keyword("int");
            Ok(BaseType::UnsignedInt)
        } else if self.eat_keyword("int") {
            Ok(BaseType::Int)
        } else if self.eat_keyword("char") {
            Ok(BaseType::Char)
        } else if self.eat_keyword("void") {
            Ok(BaseType::Void)
        } else {
            Err(ParseError::syntax(self.here_span(), "type name"))
        }
    }

    fn parse_pointer_depth(&mut self) -> Result<u8, ParseError> {
        let mut depth = 0u8;
        while self.is_punct("*") {
            if depth == 2 {
                return Err(ParseError::unsupported(
                    self.here_span(),
                    "pointer depth beyond **",
                ));
            }
            self.bump();
            depth += 1;
        }
        Ok(depth)
    }

    /// ('[' int-literal ']'){0,2}
    fn parse_dims(&mut self) -> Result<Vec<i64>, ParseError> {
        let mut dims = Vec::new();
        while self.is_punct("[") {
            if dims.len() == 2 {
                return Err(ParseError::unsupported(
                    self.here_span(),
                    "arrays beyond two dimensions",
                ));
            }
            self.bump();
            let t = self
                .bump()
                .ok_or_else(|| ParseError::syntax(self.last_span(), "array size"))?;
            if t.kind != TokenKind::IntLiteral {
                return Err(ParseError::syntax(t.span, "integer array size"));
            }
            let v: i64 = t
                .text
                .parse()
                .map_err(|_| ParseError::syntax(t.span.clone(), "array size in range"))?;
            dims.push(v);
            self.expect_punct("]")?;
        }
        Ok(dims)
    }

    fn parse_top_level(
        &mut self,
        tu: &mut TranslationUnit,
        prototypes: &mut HashSet<String>,
    ) -> Result<(), ParseError> {
        self.reject_unsupported_keyword()?;
        let start = self.here_span();
        let is_static = self.eat_keyword("static");
        if self.is_keyword("register") {
            return Err(ParseError::syntax(
                self.here_span(),
                "type (register is not valid at file scope)",
            ));
        }
        if !self.at_type() {
            return Err(ParseError::syntax(
                self.here_span(),
                "declaration or function definition",
            ));
        }
        let base = self.parse_base_type()?;
        let depth = self.parse_pointer_depth()?;
        let (name, name_span) = self.expect_identifier()?;

        if self.is_punct("(") {
            if is_static {
                return Err(ParseError::unsupported(name_span, "static functions"));
            }
            self.bump();
            let params = self.parse_params()?;
            self.expect_punct(")")?;
            if self.eat_punct(";") {
                prototypes.insert(name);
                return Ok(());
            }
            let body = self.parse_block()?;
            let span = start.merge(&body.span);
            tu.functions.push(FunctionDef {
                name,
                return_type: CType::new(base, depth),
                params,
                body,
                span,
            });
            return Ok(());
        }

        // global variable declarator list
        let mut cur_name = name;
        let mut cur_span = name_span;
        let mut cur_depth = depth;
        loop {
            if base == BaseType::Void && cur_depth == 0 {
                return Err(ParseError::syntax(cur_span, "non-void type for variable"));
            }
            let dims = self.parse_dims()?;
            let init = if self.eat_punct("=") {
                Some(self.parse_const_init()?)
            } else {
                None
            };
            let end = self.last_span();
            tu.globals.push(GlobalDecl {
                name: cur_name,
                ty: CType::new(base, cur_depth),
                dims,
                init,
                is_static,
                span: cur_span.merge(&end),
            });
            if self.eat_punct(",") {
                cur_depth = self.parse_pointer_depth()?;
                let (n, s) = self.expect_identifier()?;
                cur_name = n;
                cur_span = s;
                continue;
            }
            self.expect_punct(";")?;
            break;
        }
        Ok(())
    }

    /// Global initializers are constant literals (optionally negated).
    fn parse_const_init(&mut self) -> Result<Expr, ParseError> {
        let neg = self.eat_punct("-");
        let t = self
            .bump()
            .ok_or_else(|| ParseError::syntax(self.last_span(), "constant initializer"))?;
        match t.kind {
            TokenKind::IntLiteral => {
                let v: i64 = t
                    .text
                    .parse()
                    .map_err(|_| ParseError::syntax(t.span.clone(), "integer in range"))?;
                Ok(Expr::IntLit {
                    value: if neg { -v } else { v },
                    span: t.span,
                })
            }
            TokenKind::CharLiteral if !neg => Ok(Expr::CharLit {
                value: decode_char_literal(&t.text),
                span: t.span,
            }),
            _ => Err(ParseError::syntax(t.span, "constant initializer")),
        }
    }

    fn parse_params(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut params = Vec::new();
        if self.is_punct(")") {
            return Ok(params);
        }
        if self.is_keyword("void") && self.is_punct_at(1, ")") {
            self.bump();
            return Ok(params);
        }
        loop {
            let register = self.eat_keyword("register");
            if !self.at_type() {
                return Err(ParseError::syntax(self.here_span(), "parameter type"));
            }
            let base = self.parse_base_type()?;
            let depth = self.parse_pointer_depth()?;
            let (name, span) = if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
                self.expect_identifier()?
            } else {
                // unnamed parameters appear in prototypes only; the resolver
                // never sees them since prototypes are dropped
                (String::new(), self.here_span())
            };
            if base == BaseType::Void && depth == 0 {
                return Err(ParseError::syntax(span, "non-void parameter type"));
            }
            params.push(Param {
                name,
                ty: CType::new(base, depth).with_register(register),
            });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(params)
    }

    fn parse_block(&mut self) -> Result<Block, ParseError> {
        let open = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.is_punct("}") {
                let close = self.bump().unwrap().span;
                return Ok(Block {
                    stmts,
                    span: open.merge(&close),
                });
            }
            if self.at_end() {
                return Err(ParseError::syntax(self.last_span(), "`}`"));
            }
            self.parse_stmt_into(&mut stmts)?;
        }
    }

    /// Parse one statement; declarations with multiple declarators push
    /// several statements.
    fn parse_stmt_into(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        self.reject_unsupported_keyword()?;

        if self.is_punct("{") {
            let b = self.parse_block()?;
            out.push(Stmt::Block(b));
            return Ok(());
        }
        if self.is_keyword("if") {
            out.push(self.parse_if()?);
            return Ok(());
        }
        if self.is_keyword("while") {
            let start = self.bump().unwrap().span;
            self.expect_punct("(")?;
            let cond = self.parse_expr()?;
            self.expect_punct(")")?;
            let body = self.parse_body_block()?;
            let span = start.merge(&body.span);
            out.push(Stmt::While { cond, body, span });
            return Ok(());
        }
        if self.is_keyword("do") {
            let start = self.bump().unwrap().span;
            let body = self.parse_body_block()?;
            if !self.eat_keyword("while") {
                return Err(ParseError::syntax(self.here_span(), "`while`"));
            }
            self.expect_punct("(")?;
            let cond = self.parse_expr()?;
            self.expect_punct(")")?;
            let end = self.expect_punct(";")?;
            out.push(Stmt::DoWhile {
                body,
                cond,
                span: start.merge(&end),
            });
            return Ok(());
        }
        if self.is_keyword("for") {
            let start = self.bump().unwrap().span;
            self.expect_punct("(")?;
            let init = if self.is_punct(";") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            self.expect_punct(";")?;
            let cond = if self.is_punct(";") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            self.expect_punct(";")?;
            let step = if self.is_punct(")") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            self.expect_punct(")")?;
            let body = self.parse_body_block()?;
            let span = start.merge(&body.span);
            out.push(Stmt::For {
                init,
                cond,
                step,
                body,
                span,
            });
            return Ok(());
        }
        if self.is_keyword("return") {
            let start = self.bump().unwrap().span;
            let value = if self.is_punct(";") {
                None
            } else {
                Some(self.parse_expr()?)
            };
            let end = self.expect_punct(";")?;
            out.push(Stmt::Return {
                value,
                span: start.merge(&end),
            });
            return Ok(());
        }
        if self.is_keyword("register") || self.at_type() {
            self.parse_local_decl(out)?;
            return Ok(());
        }
        if self.is_keyword("static") {
            return Err(ParseError::unsupported(self.here_span(), "static locals"));
        }
        if self.is_punct(";") {
            return Err(ParseError::syntax(self.here_span(), "statement"));
        }

        let expr = self.parse_expr()?;
        let start = expr.span().clone();
        let end = self.expect_punct(";")?;
        out.push(Stmt::Expr {
            expr,
            span: start.merge(&end),
        });
        Ok(())
    }

    fn parse_if(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump().unwrap().span; // `if`
        self.expect_punct("(")?;
        let cond = self.parse_expr()?;
        self.expect_punct(")")?;
        let then_block = self.parse_body_block()?;
        let (else_block, end) = if self.eat_keyword("else") {
            let e = self.parse_body_block()?;
            let sp = e.span.clone();
            (Some(e), sp)
        } else {
            (None, then_block.span.clone())
        };
        Ok(Stmt::If {
            cond,
            then_block,
            else_block,
            span: start.merge(&end),
        })
    }

    /// Control bodies always become blocks; a bare statement is wrapped.
    fn parse_body_block(&mut self) -> Result<Block, ParseError> {
        if self.is_punct("{") {
            return self.parse_block();
        }
        let mut stmts = Vec::new();
        self.parse_stmt_into(&mut stmts)?;
        let span = stmts
            .iter()
            .map(|s| s.span().clone())
            .reduce(|a, b| a.merge(&b))
            .unwrap_or_else(SourceSpan::synthetic);
        Ok(Block { stmts, span })
    }

    fn parse_local_decl(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        let register = self.eat_keyword("register");
        if !self.at_type() {
            return Err(ParseError::syntax(
                self.here_span(),
                "type after `register`",
            ));
        }
        let start = self.here_span();
        let base = self.parse_base_type()?;
        loop {
            let depth = self.parse_pointer_depth()?;
            let (name, name_span) = self.expect_identifier()?;
            if base == BaseType::Void && depth == 0 {
                return Err(ParseError::syntax(name_span, "non-void type for variable"));
            }
            let dims = self.parse_dims()?;
            let init = if self.eat_punct("=") {
                Some(self.parse_assign_expr()?)
            } else {
                None
            };
            let end = self.last_span();
            out.push(Stmt::VarDecl {
                name,
                ty: CType::new(base, depth).with_register(register),
                dims,
                init,
                span: start.merge(&end),
            });
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    // ---- expressions ----------------------------------------------------

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.parse_assign_expr()
    }

    fn parse_assign_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_ternary()?;
        let op = if self.is_punct("=") {
            Some(AssignOp::Assign)
        } else if self.is_punct("+=") {
            Some(AssignOp::AddAssign)
        } else if self.is_punct("-=") {
            Some(AssignOp::SubAssign)
        } else if self.is_punct("*=") {
            Some(AssignOp::MulAssign)
        } else if self.is_punct("/=") {
            Some(AssignOp::DivAssign)
        } else {
            None
        };
        let Some(op) = op else { return Ok(lhs) };
        if !matches!(
            lhs,
            Expr::Var { .. } | Expr::Index { .. } | Expr::Deref { .. }
        ) {
            return Err(ParseError::syntax(
                lhs.span().clone(),
                "assignable expression",
            ));
        }
        self.bump();
        let value = self.parse_assign_expr()?;
        let span = lhs.span().merge(value.span());
        Ok(Expr::Assign {
            op,
            target: Box::new(lhs),
            value: Box::new(value),
            span,
        })
    }

    fn parse_ternary(&mut self) -> Result<Expr, ParseError> {
        let cond = self.parse_binary(0)?;
        if !self.eat_punct("?") {
            return Ok(cond);
        }
        let then_val = self.parse_expr()?;
        self.expect_punct(":")?;
        let else_val = self.parse_ternary()?;
        let span = cond.span().merge(else_val.span());
        Ok(Expr::Ternary {
            cond: Box::new(cond),
            then_val: Box::new(then_val),
            else_val: Box::new(else_val),
            span,
        })
    }

    /// Precedence climbing over the binary operator table.
    fn parse_binary(&mut self, min_level: usize) -> Result<Expr, ParseError> {
        // levels, loosest first
        const LEVELS: &[&[(&str, BinaryOp)]] = &[
            &[("||", BinaryOp::LogOr)],
            &[("&&", BinaryOp::LogAnd)],
            &[("|", BinaryOp::BitOr)],
            &[("&", BinaryOp::BitAnd)],
            &[("==", BinaryOp::Eq), ("!=", BinaryOp::Ne)],
            &[
                ("<", BinaryOp::Lt),
                ("<=", BinaryOp::Le),
                (">", BinaryOp::Gt),
                (">=", BinaryOp::Ge),
            ],
            &[("<<", BinaryOp::Shl), (">>", BinaryOp::Shr)],
            &[("+", BinaryOp::Add), ("-", BinaryOp::Sub)],
            &[
                ("*", BinaryOp::Mul),
                ("/", BinaryOp::Div),
                ("%", BinaryOp::Rem),
            ],
        ];
        if min_level == LEVELS.len() {
            return self.parse_unary();
        }
        let mut lhs = self.parse_binary(min_level + 1)?;
        'outer: loop {
            for (sym, op) in LEVELS[min_level] {
                if self.is_punct(sym) {
                    self.bump();
                    let rhs = self.parse_binary(min_level + 1)?;
                    let span = lhs.span().merge(rhs.span());
                    lhs = Expr::Binary {
                        op: *op,
                        lhs: Box::new(lhs),
                        rhs: Box::new(rhs),
                        span,
                    };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_punct("-") {
            let start = self.bump().unwrap().span;
            let operand = self.parse_unary()?;
            let span = start.merge(operand.span());
            return Ok(Expr::Unary {
                op: UnaryOp::Neg,
                operand: Box::new(operand),
                span,
            });
        }
        if self.is_punct("!") {
            let start = self.bump().unwrap().span;
            let operand = self.parse_unary()?;
            let span = start.merge(operand.span());
            return Ok(Expr::Unary {
                op: UnaryOp::Not,
                operand: Box::new(operand),
                span,
            });
        }
        if self.is_punct("~") {
            let start = self.bump().unwrap().span;
            let operand = self.parse_unary()?;
            let span = start.merge(operand.span());
            return Ok(Expr::Unary {
                op: UnaryOp::BitNot,
                operand: Box::new(operand),
                span,
            });
        }
        if self.is_punct("*") {
            let start = self.bump().unwrap().span;
            let operand = self.parse_unary()?;
            let span = start.merge(operand.span());
            return Ok(Expr::Deref {
                operand: Box::new(operand),
                span,
            });
        }
        if self.is_punct("&") {
            let start = self.bump().unwrap().span;
            let operand = self.parse_unary()?;
            let span = start.merge(operand.span());
            return Ok(Expr::AddrOf {
                operand: Box::new(operand),
                span,
            });
        }
        if self.is_punct("++") || self.is_punct("--") {
            let inc = self.is_punct("++");
            let start = self.bump().unwrap().span;
            let target = self.parse_unary()?;
            if !matches!(
                target,
                Expr::Var { .. } | Expr::Index { .. } | Expr::Deref { .. }
            ) {
                return Err(ParseError::syntax(
                    target.span().clone(),
                    "assignable expression",
                ));
            }
            let span = start.merge(target.span());
            let op = if inc {
                IncDecOp::PreInc
            } else {
                IncDecOp::PreDec
            };
            return Ok(Expr::IncDec {
                op,
                target: Box::new(target),
                span,
            });
        }
        if self.is_keyword("sizeof") {
            let start = self.bump().unwrap().span;
            self.expect_punct("(")?;
            if !self.at_type() {
                return Err(ParseError::syntax(self.here_span(), "type name in sizeof"));
            }
            let base = self.parse_base_type()?;
            let depth = self.parse_pointer_depth()?;
            let end = self.expect_punct(")")?;
            return Ok(Expr::SizeOf {
                ty: CType::new(base, depth),
                span: start.merge(&end),
            });
        }
        // cast: '(' type-name ')' unary
        if self.is_punct("(") {
            if let Some(t) = self.peek_at(1) {
                if t.kind == TokenKind::Keyword
                    && matches!(t.text.as_str(), "int" | "unsigned" | "char" | "void")
                {
                    let start = self.bump().unwrap().span;
                    let base = self.parse_base_type()?;
                    let depth = self.parse_pointer_depth()?;
                    self.expect_punct(")")?;
                    let operand = self.parse_unary()?;
                    let span = start.merge(operand.span());
                    return Ok(Expr::Cast {
                        ty: CType::new(base, depth),
                        operand: Box::new(operand),
                        span,
                    });
                }
            }
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.parse_primary()?;
        loop {
            if self.is_punct("[") {
                self.bump();
                let index = self.parse_expr()?;
                let end = self.expect_punct("]")?;
                let span = expr.span().merge(&end);
                expr = Expr::Index {
                    base: Box::new(expr),
                    index: Box::new(index),
                    span,
                };
            } else if self.is_punct("++") || self.is_punct("--") {
                let inc = self.is_punct("++");
                if !matches!(
                    expr,
                    Expr::Var { .. } | Expr::Index { .. } | Expr::Deref { .. }
                ) {
                    return Err(ParseError::syntax(
                        expr.span().clone(),
                        "assignable expression",
                    ));
                }
                let end = self.bump().unwrap().span;
                let span = expr.span().merge(&end);
                let op = if inc {
                    IncDecOp::PostInc
                } else {
                    IncDecOp::PostDec
                };
                expr = Expr::IncDec {
                    op,
                    target: Box::new(expr),
                    span,
                };
            } else {
                return Ok(expr);
            }
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        self.reject_unsupported_keyword()?;
        let Some(t) = self.peek().cloned() else {
            return Err(ParseError::syntax(self.last_span(), "expression"));
        };
        match t.kind {
            TokenKind::IntLiteral => {
                self.bump();
                let value: i64 = t
                    .text
                    .parse()
                    .map_err(|_| ParseError::syntax(t.span.clone(), "integer literal in range"))?;
                Ok(Expr::IntLit {
                    value,
                    span: t.span,
                })
            }
            TokenKind::StringLiteral => {
                self.bump();
                Ok(Expr::StrLit {
                    value: decode_string_literal(&t.text),
                    span: t.span,
                })
            }
            TokenKind::CharLiteral => {
                self.bump();
                Ok(Expr::CharLit {
                    value: decode_char_literal(&t.text),
                    span: t.span,
                })
            }
            TokenKind::Identifier => {
                self.bump();
                if self.is_punct("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.parse_assign_expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    let end = self.expect_punct(")")?;
                    Ok(Expr::Call {
                        name: t.text,
                        args,
                        span: t.span.merge(&end),
                    })
                } else {
                    Ok(Expr::Var {
                        name: t.text,
                        span: t.span,
                    })
                }
            }
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            _ => Err(ParseError::syntax(t.span, "expression")),
        }
    }
}

// ---- resolution ---------------------------------------------------------

fn resolve(tu: &TranslationUnit, prototypes: &HashSet<String>) -> Result<(), ParseError> {
    let mut global_names: HashSet<&str> = HashSet::new();
    for g in &tu.globals {
        if !global_names.insert(&g.name) {
            return Err(ParseError::syntax(
                g.span.clone(),
                format!("unique global name (`{}` redefined)", g.name),
            ));
        }
    }
    let mut fn_names: HashSet<&str> = HashSet::new();
    for f in &tu.functions {
        if !fn_names.insert(&f.name) {
            return Err(ParseError::syntax(
                f.span.clone(),
                format!("unique function name (`{}` redefined)", f.name),
            ));
        }
        if global_names.contains(f.name.as_str()) {
            return Err(ParseError::syntax(
                f.span.clone(),
                format!("distinct global and function names (`{}`)", f.name),
            ));
        }
    }

    for f in &tu.functions {
        let mut scopes: Vec<HashSet<String>> = Vec::new();
        let mut param_scope = HashSet::new();
        for p in &f.params {
            if p.name.is_empty() {
                return Err(ParseError::syntax(
                    f.span.clone(),
                    "named parameters in function definitions",
                ));
            }
            if !param_scope.insert(p.name.clone()) {
                return Err(ParseError::syntax(
                    f.span.clone(),
                    format!("unique parameter names (`{}` repeated)", p.name),
                ));
            }
        }
        scopes.push(param_scope);
        resolve_block(&f.body, &mut scopes, &global_names, &fn_names, prototypes)?;
    }
    Ok(())
}

fn resolve_block(
    block: &Block,
    scopes: &mut Vec<HashSet<String>>,
    globals: &HashSet<&str>,
    fns: &HashSet<&str>,
    prototypes: &HashSet<String>,
) -> Result<(), ParseError> {
    scopes.push(HashSet::new());
    for stmt in &block.stmts {
        resolve_stmt(stmt, scopes, globals, fns, prototypes)?;
    }
    scopes.pop();
    Ok(())
}

fn resolve_stmt(
    stmt: &Stmt,
    scopes: &mut Vec<HashSet<String>>,
    globals: &HashSet<&str>,
    fns: &HashSet<&str>,
    prototypes: &HashSet<String>,
) -> Result<(), ParseError> {
    match stmt {
        Stmt::VarDecl {
            name, init, span, ..
        } => {
            if let Some(i) = init {
                resolve_expr(i, scopes, globals, fns, prototypes)?;
            }
            // the function's outermost block shares scope with parameters
            let clash_with_params =
                scopes.len() == 2 && scopes.first().is_some_and(|p| p.contains(name));
            if clash_with_params || !scopes.last_mut().unwrap().insert(name.clone()) {
                return Err(ParseError::syntax(
                    span.clone(),
                    format!("unique name in scope (`{}` redeclared)", name),
                ));
            }
            Ok(())
        }
        Stmt::Expr { expr, .. } => resolve_expr(expr, scopes, globals, fns, prototypes),
        Stmt::Block(b) => resolve_block(b, scopes, globals, fns, prototypes),
        Stmt::If {
            cond,
            then_block,
            else_block,
            ..
        } => {
            resolve_expr(cond, scopes, globals, fns, prototypes)?;
            resolve_block(then_block, scopes, globals, fns, prototypes)?;
            if let Some(e) = else_block {
                resolve_block(e, scopes, globals, fns, prototypes)?;
            }
            Ok(())
        }
        Stmt::While { cond, body, .. } | Stmt::DoWhile { cond, body, .. } => {
            resolve_expr(cond, scopes, globals, fns, prototypes)?;
            resolve_block(body, scopes, globals, fns, prototypes)
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
            ..
        } => {
            for e in [init, cond, step].into_iter().flatten() {
                resolve_expr(e, scopes, globals, fns, prototypes)?;
            }
            resolve_block(body, scopes, globals, fns, prototypes)
        }
        Stmt::Return { value, .. } => {
            if let Some(v) = value {
                resolve_expr(v, scopes, globals, fns, prototypes)?;
            }
            Ok(())
        }
    }
}

fn resolve_expr(
    expr: &Expr,
    scopes: &[HashSet<String>],
    globals: &HashSet<&str>,
    fns: &HashSet<&str>,
    prototypes: &HashSet<String>,
) -> Result<(), ParseError> {
    let mut err = None;
    expr.walk(&mut |e| {
        if err.is_some() {
            return;
        }
        match e {
            Expr::Var { name, span } => {
                let found = scopes.iter().any(|s| s.contains(name))
                    || globals.contains(name.as_str())
                    || is_builtin_value(name);
                if !found {
                    err = Some(ParseError {
                        kind: ParseErrorKind::UnresolvedIdentifier { name: name.clone() },
                        span: span.clone(),
                    });
                }
            }
            Expr::Call { name, span, .. } => {
                let found = fns.contains(name.as_str())
                    || prototypes.contains(name)
                    || is_builtin_function(name);
                if !found {
                    err = Some(ParseError {
                        kind: ParseErrorKind::UnresolvedIdentifier { name: name.clone() },
                        span: span.clone(),
                    });
                }
            }
            _ => {}
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
