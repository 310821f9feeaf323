//! AST for the supported C subset. Control-flow bodies are always blocks
//! (the parser wraps bare statements), which keeps printing unambiguous and
//! pattern matching uniform.

use std::sync::Arc;

use super::preprocess::MacroDef;
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseType {
    Int,
    UnsignedInt,
    Char,
    Void,
}

impl BaseType {
    /// Size in bytes, as used by `sizeof` and `memset` byte math.
    pub fn byte_width(self) -> i64 {
        match self {
            BaseType::Char => 1,
            BaseType::Int | BaseType::UnsignedInt => 4,
            BaseType::Void => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CType {
    pub base: BaseType,
    pub pointer_depth: u8,
    pub is_register_hint: bool,
}

impl CType {
    pub fn new(base: BaseType, pointer_depth: u8) -> Self {
        debug_assert!(pointer_depth <= 2);
        CType {
            base,
            pointer_depth,
            is_register_hint: false,
        }
    }

    pub fn with_register(mut self, hint: bool) -> Self {
        self.is_register_hint = hint;
        self
    }

    pub fn is_pointer(&self) -> bool {
        self.pointer_depth > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    LogAnd,
    LogOr,
    BitAnd,
    BitOr,
    Shl,
    Shr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            LogAnd => "&&",
            LogOr => "||",
            BitAnd => "&",
            BitOr => "|",
            Shl => "<<",
            Shr => ">>",
        }
    }

    pub fn is_comparison(self) -> bool {
        use BinaryOp::*;
        matches!(self, Lt | Le | Gt | Ge | Eq | Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::LogAnd | BinaryOp::LogOr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Assign,
    AddAssign,
    SubAssign,
    MulAssign,
    DivAssign,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::AddAssign => "+=",
            AssignOp::SubAssign => "-=",
            AssignOp::MulAssign => "*=",
            AssignOp::DivAssign => "/=",
        }
    }

    /// The arithmetic carried by a compound assignment.
    pub fn binary_op(self) -> Option<BinaryOp> {
        match self {
            AssignOp::Assign => None,
            AssignOp::AddAssign => Some(BinaryOp::Add),
            AssignOp::SubAssign => Some(BinaryOp::Sub),
            AssignOp::MulAssign => Some(BinaryOp::Mul),
            AssignOp::DivAssign => Some(BinaryOp::Div),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IncDecOp {
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl IncDecOp {
    pub fn is_increment(self) -> bool {
        matches!(self, IncDecOp::PreInc | IncDecOp::PostInc)
    }

    pub fn is_prefix(self) -> bool {
        matches!(self, IncDecOp::PreInc | IncDecOp::PreDec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    IntLit {
        value: i64,
        span: SourceSpan,
    },
    StrLit {
        value: Vec<u8>,
        span: SourceSpan,
    },
    CharLit {
        value: u8,
        span: SourceSpan,
    },
    Var {
        name: String,
        span: SourceSpan,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
        span: SourceSpan,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: SourceSpan,
    },
    Assign {
        op: AssignOp,
        target: Box<Expr>,
        value: Box<Expr>,
        span: SourceSpan,
    },
    IncDec {
        op: IncDecOp,
        target: Box<Expr>,
        span: SourceSpan,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
        span: SourceSpan,
    },
    Deref {
        operand: Box<Expr>,
        span: SourceSpan,
    },
    AddrOf {
        operand: Box<Expr>,
        span: SourceSpan,
    },
    Call {
        name: String,
        args: Vec<Expr>,
        span: SourceSpan,
    },
    Ternary {
        cond: Box<Expr>,
        then_val: Box<Expr>,
        else_val: Box<Expr>,
        span: SourceSpan,
    },
    Cast {
        ty: CType,
        operand: Box<Expr>,
        span: SourceSpan,
    },
    SizeOf {
        ty: CType,
        span: SourceSpan,
    },
}

impl Expr {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Expr::IntLit { span, .. }
            | Expr::StrLit { span, .. }
            | Expr::CharLit { span, .. }
            | Expr::Var { span, .. }
            | Expr::Unary { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Assign { span, .. }
            | Expr::IncDec { span, .. }
            | Expr::Index { span, .. }
            | Expr::Deref { span, .. }
            | Expr::AddrOf { span, .. }
            | Expr::Call { span, .. }
            | Expr::Ternary { span, .. }
            | Expr::Cast { span, .. }
            | Expr::SizeOf { span, .. } => span,
        }
    }

    pub fn int(value: i64) -> Expr {
        Expr::IntLit {
            value,
            span: SourceSpan::synthetic(),
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var {
            name: name.to_string(),
            span: SourceSpan::synthetic(),
        }
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            span: SourceSpan::synthetic(),
        }
    }

    pub fn as_int_literal(&self) -> Option<i64> {
        match self {
            Expr::IntLit { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Apply `f` to this node and every sub-expression.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::IntLit { .. }
            | Expr::StrLit { .. }
            | Expr::CharLit { .. }
            | Expr::Var { .. }
            | Expr::SizeOf { .. } => {}
            Expr::Unary { operand, .. }
            | Expr::Deref { operand, .. }
            | Expr::AddrOf { operand, .. }
            | Expr::Cast { operand, .. } => operand.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Assign { target, value, .. } => {
                target.walk(f);
                value.walk(f);
            }
            Expr::IncDec { target, .. } => target.walk(f),
            Expr::Index { base, index, .. } => {
                base.walk(f);
                index.walk(f);
            }
            Expr::Call { args, .. } => {
                for a in args {
                    a.walk(f);
                }
            }
            Expr::Ternary {
                cond,
                then_val,
                else_val,
                ..
            } => {
                cond.walk(f);
                then_val.walk(f);
                else_val.walk(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: SourceSpan,
}

impl Block {
    pub fn synthetic(stmts: Vec<Stmt>) -> Block {
        Block {
            stmts,
            span: SourceSpan::synthetic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Expr {
        expr: Expr,
        span: SourceSpan,
    },
    Block(Block),
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
        span: SourceSpan,
    },
    While {
        cond: Expr,
        body: Block,
        span: SourceSpan,
    },
    DoWhile {
        body: Block,
        cond: Expr,
        span: SourceSpan,
    },
    For {
        init: Option<Expr>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Block,
        span: SourceSpan,
    },
    Return {
        value: Option<Expr>,
        span: SourceSpan,
    },
    VarDecl {
        name: String,
        ty: CType,
        dims: Vec<i64>,
        init: Option<Expr>,
        span: SourceSpan,
    },
}

impl Stmt {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Stmt::Expr { span, .. }
            | Stmt::If { span, .. }
            | Stmt::While { span, .. }
            | Stmt::DoWhile { span, .. }
            | Stmt::For { span, .. }
            | Stmt::Return { span, .. }
            | Stmt::VarDecl { span, .. } => span,
            Stmt::Block(b) => &b.span,
        }
    }

    /// Apply `f` to this statement and all nested statements, outer first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match self {
            Stmt::Block(b) => {
                for s in &b.stmts {
                    s.walk(f);
                }
            }
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                for s in &then_block.stmts {
                    s.walk(f);
                }
                if let Some(e) = else_block {
                    for s in &e.stmts {
                        s.walk(f);
                    }
                }
            }
            Stmt::While { body, .. } | Stmt::DoWhile { body, .. } | Stmt::For { body, .. } => {
                for s in &body.stmts {
                    s.walk(f);
                }
            }
            _ => {}
        }
    }

    /// Apply `f` to every expression in this statement (including nested
    /// statements' expressions).
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        self.walk(&mut |s| match s {
            Stmt::Expr { expr, .. } => expr.walk(f),
            Stmt::If { cond, .. } => cond.walk(f),
            Stmt::While { cond, .. } => cond.walk(f),
            Stmt::DoWhile { cond, .. } => cond.walk(f),
            Stmt::For {
                init, cond, step, ..
            } => {
                for e in [init, cond, step].into_iter().flatten() {
                    e.walk(f);
                }
            }
            Stmt::Return { value: Some(v), .. } => v.walk(f),
            Stmt::VarDecl { init: Some(i), .. } => i.walk(f),
            _ => {}
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: CType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub return_type: CType,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: SourceSpan,
}

impl FunctionDef {
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        for s in &self.body.stmts {
            s.walk_exprs(f);
        }
    }

    pub fn walk_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for s in &self.body.stmts {
            s.walk(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDecl {
    pub name: String,
    pub ty: CType,
    pub dims: Vec<i64>,
    pub init: Option<Expr>,
    pub is_static: bool,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TranslationUnit {
    pub globals: Vec<GlobalDecl>,
    pub functions: Vec<FunctionDef>,
    /// Macro definitions seen during preprocessing, kept for provenance.
    pub macros: Vec<MacroDef>,
}

impl TranslationUnit {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&GlobalDecl> {
        self.globals.iter().find(|g| g.name == name)
    }

    /// Structural copy with all spans zeroed and provenance macros cleared;
    /// two units that print identically normalize identically.
    pub fn normalized(&self) -> TranslationUnit {
        let mut out = self.clone();
        out.macros.clear();
        for g in &mut out.globals {
            g.span = SourceSpan::synthetic();
            if let Some(i) = &mut g.init {
                zero_expr_spans(i);
            }
        }
        for f in &mut out.functions {
            f.span = SourceSpan::synthetic();
            zero_block_spans(&mut f.body);
        }
        out
    }

    /// Every identifier (function, global, param, local) in the unit; used by
    /// the fresh-name generator to avoid capture.
    pub fn all_identifiers(&self) -> std::collections::HashSet<String> {
        let mut names = std::collections::HashSet::new();
        for g in &self.globals {
            names.insert(g.name.clone());
        }
        for f in &self.functions {
            names.insert(f.name.clone());
            for p in &f.params {
                names.insert(p.name.clone());
            }
            f.walk_stmts(&mut |s| {
                if let Stmt::VarDecl { name, .. } = s {
                    names.insert(name.clone());
                }
            });
            f.walk_exprs(&mut |e| {
                if let Expr::Var { name, .. } = e {
                    names.insert(name.clone());
                }
            });
        }
        names
    }
}

fn zero_block_spans(b: &mut Block) {
    b.span = SourceSpan::synthetic();
    for s in &mut b.stmts {
        zero_stmt_spans(s);
    }
}

fn zero_stmt_spans(s: &mut Stmt) {
    match s {
        Stmt::Expr { expr, span } => {
            *span = SourceSpan::synthetic();
            zero_expr_spans(expr);
        }
        Stmt::Block(b) => zero_block_spans(b),
        Stmt::If {
            cond,
            then_block,
            else_block,
            span,
        } => {
            *span = SourceSpan::synthetic();
            zero_expr_spans(cond);
            zero_block_spans(then_block);
            if let Some(e) = else_block {
                zero_block_spans(e);
            }
        }
        Stmt::While { cond, body, span } | Stmt::DoWhile { cond, body, span } => {
            *span = SourceSpan::synthetic();
            zero_expr_spans(cond);
            zero_block_spans(body);
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
            span,
        } => {
            *span = SourceSpan::synthetic();
            for e in [init, cond, step].into_iter().flatten() {
                zero_expr_spans(e);
            }
            zero_block_spans(body);
        }
        Stmt::Return { value, span } => {
            *span = SourceSpan::synthetic();
            if let Some(v) = value {
                zero_expr_spans(v);
            }
        }
        Stmt::VarDecl { init, span, .. } => {
            *span = SourceSpan::synthetic();
            if let Some(i) = init {
                zero_expr_spans(i);
            }
        }
    }
}

fn zero_expr_spans(e: &mut Expr) {
    let span = match e {
        Expr::IntLit { span, .. }
        | Expr::StrLit { span, .. }
        | Expr::CharLit { span, .. }
        | Expr::Var { span, .. }
        | Expr::SizeOf { span, .. } => span,
        Expr::Unary { operand, span, .. }
        | Expr::Deref { operand, span, .. }
        | Expr::AddrOf { operand, span, .. }
        | Expr::Cast { operand, span, .. } => {
            zero_expr_spans(operand);
            span
        }
        Expr::Binary { lhs, rhs, span, .. } => {
            zero_expr_spans(lhs);
            zero_expr_spans(rhs);
            span
        }
        Expr::Assign {
            target,
            value,
            span,
            ..
        } => {
            zero_expr_spans(target);
            zero_expr_spans(value);
            span
        }
        Expr::IncDec { target, span, .. } => {
            zero_expr_spans(target);
            span
        }
        Expr::Index { base, index, span } => {
            zero_expr_spans(base);
            zero_expr_spans(index);
            span
        }
        Expr::Call { args, span, .. } => {
            for a in args {
                zero_expr_spans(a);
            }
            span
        }
        Expr::Ternary {
            cond,
            then_val,
            else_val,
            span,
        } => {
            zero_expr_spans(cond);
            zero_expr_spans(then_val);
            zero_expr_spans(else_val);
            span
        }
    };
    *span = SourceSpan::synthetic();
}

/// Names callable (or referenceable) without a definition in the unit.
pub const BUILTIN_FUNCTIONS: &[&str] = &[
    "printf", "sprintf", "putchar", "fflush", "malloc", "free", "memset", "strlen", "rand",
    "srand", "time",
];

/// Ambient value identifiers (e.g. the `stdout` handle passed to `fflush`).
pub const BUILTIN_VALUES: &[&str] = &["stdout"];

pub fn is_builtin_function(name: &str) -> bool {
    BUILTIN_FUNCTIONS.contains(&name)
}

pub fn is_builtin_value(name: &str) -> bool {
    BUILTIN_VALUES.contains(&name)
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<TranslationUnit>();
    check::<Arc<str>>();
}
