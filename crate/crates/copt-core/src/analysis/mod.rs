//! Optimization-opportunity detection. Each rule produces findings with a
//! safety verdict; the rewrite module consumes them.

pub mod globals;
pub mod loops;
pub mod purity;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::frontend::ast::*;
use crate::span::SourceSpan;

pub use globals::{global_hot_uses, is_recursive};
pub use loops::{loop_shape, CanonicalLoop, LoopDir};
pub use purity::{contains_memory_read, is_boolean_valued, side_effect_free};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    LoopCountdown,
    FnInline,
    GlobalRegAlias,
    BitwiseConv,
    NestedIfMerge,
    MemsetInit,
    UnsignedPromote,
    AdvRecursion,
    AdvMultidimArray,
    AdvStaticLinkage,
    AdvTinyFnMacro,
    AdvWordSize,
}

pub const ALL_RULES: [RuleId; 12] = [
    RuleId::LoopCountdown,
    RuleId::FnInline,
    RuleId::GlobalRegAlias,
    RuleId::BitwiseConv,
    RuleId::NestedIfMerge,
    RuleId::MemsetInit,
    RuleId::UnsignedPromote,
    RuleId::AdvRecursion,
    RuleId::AdvMultidimArray,
    RuleId::AdvStaticLinkage,
    RuleId::AdvTinyFnMacro,
    RuleId::AdvWordSize,
];

/// Rules with an automatic rewrite; the `ADV_*` rules are advisory-only.
pub const REWRITABLE_RULES: [RuleId; 7] = [
    RuleId::LoopCountdown,
    RuleId::FnInline,
    RuleId::GlobalRegAlias,
    RuleId::BitwiseConv,
    RuleId::NestedIfMerge,
    RuleId::MemsetInit,
    RuleId::UnsignedPromote,
];

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::LoopCountdown => "LOOP_COUNTDOWN",
            RuleId::FnInline => "FN_INLINE",
            RuleId::GlobalRegAlias => "GLOBAL_REG_ALIAS",
            RuleId::BitwiseConv => "BITWISE_CONV",
            RuleId::NestedIfMerge => "NESTED_IF_MERGE",
            RuleId::MemsetInit => "MEMSET_INIT",
            RuleId::UnsignedPromote => "UNSIGNED_PROMOTE",
            RuleId::AdvRecursion => "ADV_RECURSION",
            RuleId::AdvMultidimArray => "ADV_MULTIDIM_ARRAY",
            RuleId::AdvStaticLinkage => "ADV_STATIC_LINKAGE",
            RuleId::AdvTinyFnMacro => "ADV_TINY_FN_MACRO",
            RuleId::AdvWordSize => "ADV_WORD_SIZE",
        }
    }

    pub fn is_advisory(self) -> bool {
        matches!(
            self,
            RuleId::AdvRecursion
                | RuleId::AdvMultidimArray
                | RuleId::AdvStaticLinkage
                | RuleId::AdvTinyFnMacro
                | RuleId::AdvWordSize
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_RULES
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule `{}`", s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Safety {
    Safe,
    UnsafeNeedsOverride,
    Advisory,
}

impl fmt::Display for Safety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Safety::Safe => "SAFE",
            Safety::UnsafeNeedsOverride => "UNSAFE_NEEDS_OVERRIDE",
            Safety::Advisory => "ADVISORY",
        })
    }
}

/// Rule-specific data carried by a finding.
#[derive(Debug, Clone, PartialEq)]
pub enum FindingPayload {
    Countdown {
        var: String,
    },
    Inline {
        callee: String,
    },
    GlobalAlias {
        global: String,
        use_count: u32,
        calls_in_region: bool,
    },
    Bitwise {
        op: BinaryOp,
    },
    NestedIf,
    Memset {
        array: String,
        lo: i64,
        hi: i64,
    },
    Unsigned {
        var: String,
    },
    Advisory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub rule: RuleId,
    pub span: SourceSpan,
    /// Enclosing function, or `<global>` for file-scope findings.
    pub function: String,
    pub safety: Safety,
    pub rationale: String,
    pub payload: FindingPayload,
}

/// Detection thresholds; the defaults match the tool's calibration against
/// its bundled corpus.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    /// Maximum executable (non-declaration) statements for a tiny function.
    pub inline_stmt_budget: usize,
    /// Maximum parameters for a tiny function.
    pub inline_param_budget: usize,
    /// Minimum uses before a global is worth a register alias.
    pub alias_min_uses: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            inline_stmt_budget: 3,
            inline_param_budget: 2,
            alias_min_uses: 2,
        }
    }
}

/// Detect all findings for `rules`, ordered by (file, line, column, rule).
pub fn detect(tu: &TranslationUnit, rules: &[RuleId]) -> Vec<Finding> {
    detect_with_config(tu, rules, &AnalysisConfig::default())
}

pub fn detect_with_config(
    tu: &TranslationUnit,
    rules: &[RuleId],
    config: &AnalysisConfig,
) -> Vec<Finding> {
    let want: HashSet<RuleId> = rules.iter().copied().collect();
    let mut out = Vec::new();

    if want.contains(&RuleId::LoopCountdown) {
        detect_countdown(tu, &mut out);
    }
    if want.contains(&RuleId::FnInline) {
        detect_inline(tu, config, &mut out);
    }
    if want.contains(&RuleId::GlobalRegAlias) {
        detect_global_alias(tu, config, &mut out);
    }
    if want.contains(&RuleId::BitwiseConv) {
        detect_bitwise(tu, &mut out);
    }
    if want.contains(&RuleId::NestedIfMerge) {
        detect_nested_if(tu, &mut out);
    }
    if want.contains(&RuleId::MemsetInit) {
        detect_memset(tu, &mut out);
    }
    if want.contains(&RuleId::UnsignedPromote) {
        detect_unsigned(tu, &mut out);
    }
    if want.contains(&RuleId::AdvRecursion) {
        detect_adv_recursion(tu, &mut out);
    }
    if want.contains(&RuleId::AdvMultidimArray) {
        detect_adv_multidim(tu, &mut out);
    }
    if want.contains(&RuleId::AdvStaticLinkage) {
        detect_adv_static(tu, &mut out);
    }
    if want.contains(&RuleId::AdvTinyFnMacro) {
        detect_adv_tiny_fn(tu, config, &mut out);
    }
    if want.contains(&RuleId::AdvWordSize) {
        detect_adv_word_size(tu, &mut out);
    }

    out.sort_by(|a, b| {
        (
            a.span.file.as_ref(),
            a.span.line_start,
            a.span.col_start,
            a.rule,
        )
            .cmp(&(
                b.span.file.as_ref(),
                b.span.line_start,
                b.span.col_start,
                b.rule,
            ))
    });
    out
}

// ---- individual detectors -------------------------------------------------

/// Canonical loop eligible for count-down conversion, if `s` is one.
/// The rewrite re-evaluates the bound inside the body, so every variable in
/// it must also be immune to indirect writes (address-taken locals, globals
/// next to calls or pointer stores).
pub fn countdown_candidate(
    tu: &TranslationUnit,
    f: &FunctionDef,
    s: &Stmt,
) -> Option<CanonicalLoop> {
    let c = loop_shape(s)?;
    if c.dir != LoopDir::Up
        || !c.step1
        || c.var_written_in_body
        || !c.bound_loop_invariant
        || c.init.as_int_literal().is_none()
    {
        return None;
    }
    let Stmt::For { body, .. } = s else {
        return None;
    };
    let addr_taken = purity::address_taken(f);
    let global_names: HashSet<&str> = tu.globals.iter().map(|g| g.name.as_str()).collect();
    let ws = purity::write_set(&body.stmts, &|n| is_declared_array(tu, f, n));
    for v in purity::expr_vars(&c.bound) {
        if addr_taken.contains(&v) {
            return None;
        }
        if global_names.contains(v.as_str()) && (ws.user_calls || ws.pointer_writes) {
            return None;
        }
    }
    Some(c)
}

fn detect_countdown(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        f.walk_stmts(&mut |s| {
            let Some(c) = countdown_candidate(tu, f, s) else {
                return;
            };
            out.push(Finding {
                rule: RuleId::LoopCountdown,
                span: s.span().clone(),
                function: f.name.clone(),
                safety: Safety::Safe,
                rationale: format!(
                    "up-counting loop over `{}` can run as a count-down-to-zero loop",
                    c.var
                ),
                payload: FindingPayload::Countdown { var: c.var },
            });
        });
    }
}

fn is_declared_array(tu: &TranslationUnit, f: &FunctionDef, name: &str) -> bool {
    if tu.global(name).is_some_and(|g| !g.dims.is_empty()) {
        return true;
    }
    let mut is_array = false;
    f.walk_stmts(&mut |s| {
        if let Stmt::VarDecl { name: n, dims, .. } = s {
            if n == name && !dims.is_empty() {
                is_array = true;
            }
        }
    });
    is_array
}

/// Count executable statements (everything except declarations; blocks count
/// their contents, not themselves).
pub fn executable_stmt_count(b: &Block) -> usize {
    let mut n = 0;
    for s in &b.stmts {
        s.walk(&mut |st| {
            if !matches!(st, Stmt::VarDecl { .. } | Stmt::Block(_)) {
                n += 1;
            }
        });
    }
    n
}

fn contains_return(b: &Block) -> bool {
    let mut found = false;
    for s in &b.stmts {
        s.walk(&mut |st| {
            if matches!(st, Stmt::Return { .. }) {
                found = true;
            }
        });
    }
    found
}

/// True iff `f` fits the tiny-function budget.
fn is_tiny(f: &FunctionDef, config: &AnalysisConfig) -> bool {
    executable_stmt_count(&f.body) <= config.inline_stmt_budget
        && f.params.len() <= config.inline_param_budget
}

fn detect_inline(tu: &TranslationUnit, config: &AnalysisConfig, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        walk_with_loop_depth(&f.body, 0, &mut |s, loop_depth| {
            let Stmt::Expr {
                expr: Expr::Call { name, args, .. },
                span,
            } = s
            else {
                return;
            };
            if loop_depth == 0 {
                return;
            }
            let Some(callee) = tu.function(name) else {
                return;
            };
            if is_recursive(tu, name) {
                return; // covered by the recursion advisory
            }
            if !is_tiny(callee, config)
                || contains_return(&callee.body)
                || args.len() != callee.params.len()
            {
                return;
            }
            out.push(Finding {
                rule: RuleId::FnInline,
                span: span.clone(),
                function: f.name.clone(),
                safety: Safety::Safe,
                rationale: format!(
                    "call to tiny function `{}` inside a loop; inlining removes the call overhead",
                    name
                ),
                payload: FindingPayload::Inline {
                    callee: name.clone(),
                },
            });
        });
    }
}

fn walk_with_loop_depth<'a>(b: &'a Block, depth: usize, f: &mut impl FnMut(&'a Stmt, usize)) {
    for s in &b.stmts {
        f(s, depth);
        match s {
            Stmt::Block(inner) => walk_with_loop_depth(inner, depth, f),
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                walk_with_loop_depth(then_block, depth, f);
                if let Some(e) = else_block {
                    walk_with_loop_depth(e, depth, f);
                }
            }
            Stmt::While { body, .. } | Stmt::DoWhile { body, .. } | Stmt::For { body, .. } => {
                walk_with_loop_depth(body, depth + 1, f);
            }
            _ => {}
        }
    }
}

fn detect_global_alias(tu: &TranslationUnit, config: &AnalysisConfig, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        let ws = purity::write_set(&f.body.stmts, &|n| is_declared_array(tu, f, n));
        // globals that already have a register-hinted local alias in this
        // function (hand-written or from an earlier rewrite)
        let mut aliased: HashSet<String> = HashSet::new();
        f.walk_stmts(&mut |s| {
            if let Stmt::VarDecl {
                ty,
                init: Some(Expr::Var { name, .. }),
                ..
            } = s
            {
                if ty.is_register_hint && tu.global(name).is_some() {
                    aliased.insert(name.clone());
                }
            }
        });
        for (global, uses, calls_in_region) in global_hot_uses(tu, f) {
            if uses < config.alias_min_uses || aliased.contains(&global) {
                continue;
            }
            let safe = !calls_in_region && !ws.pointer_writes;
            out.push(Finding {
                rule: RuleId::GlobalRegAlias,
                span: f.span.clone(),
                function: f.name.clone(),
                safety: if safe { Safety::Safe } else { Safety::UnsafeNeedsOverride },
                rationale: if safe {
                    format!(
                        "global `{}` used {} times in `{}`; a register-local alias avoids repeated global accesses",
                        global, uses, f.name
                    )
                } else if calls_in_region {
                    format!(
                        "global `{}` is also used by functions called from `{}`; aliasing would desynchronize it",
                        global, f.name
                    )
                } else {
                    format!(
                        "`{}` stores through pointers, which may alias global `{}`",
                        f.name, global
                    )
                },
                payload: FindingPayload::GlobalAlias { global, use_count: uses, calls_in_region },
            });
        }
    }
}

fn detect_bitwise(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        f.walk_exprs(&mut |e| {
            let Expr::Binary { op, lhs, rhs, span } = e else { return };
            if !op.is_logical() {
                return;
            }
            let effect_free = side_effect_free(lhs, tu) && side_effect_free(rhs, tu);
            let rhs_reads_memory = contains_memory_read(rhs);
            let safe = effect_free && !rhs_reads_memory;
            let bitwise = if *op == BinaryOp::LogAnd { "&" } else { "|" };
            out.push(Finding {
                rule: RuleId::BitwiseConv,
                span: span.clone(),
                function: f.name.clone(),
                safety: if safe { Safety::Safe } else { Safety::UnsafeNeedsOverride },
                rationale: if safe {
                    format!("`{}` over effect-free operands can use bitwise `{}`", op.symbol(), bitwise)
                } else if !effect_free {
                    format!("`{}` has side-effecting operands; removing the short-circuit changes behavior", op.symbol())
                } else {
                    format!(
                        "right operand of `{}` reads memory; without the short-circuit that read may be out of bounds",
                        op.symbol()
                    )
                },
                payload: FindingPayload::Bitwise { op: *op },
            });
        });
    }
}

fn detect_nested_if(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        f.walk_stmts(&mut |s| {
            let Stmt::If { cond: c1, then_block, else_block: None, span } = s else { return };
            let [Stmt::If { cond: c2, else_block: None, .. }] = then_block.stmts.as_slice() else {
                return;
            };
            let effect_free = side_effect_free(c1, tu) && side_effect_free(c2, tu);
            let safe = effect_free && !contains_memory_read(c2);
            out.push(Finding {
                rule: RuleId::NestedIfMerge,
                span: span.clone(),
                function: f.name.clone(),
                safety: if safe { Safety::Safe } else { Safety::UnsafeNeedsOverride },
                rationale: if safe {
                    "nested if conditions can merge into one bitwise-and test".to_string()
                } else {
                    "inner condition reads memory or has effects; merging would evaluate it unconditionally"
                        .to_string()
                },
                payload: FindingPayload::NestedIf,
            });
        });
    }
}

/// The shape behind a memset finding.
#[derive(Debug, Clone, PartialEq)]
pub struct MemsetShape {
    pub array: String,
    pub lo: i64,
    /// exclusive upper element index
    pub hi: i64,
    pub elem: BaseType,
    /// loop variable is dead after the loop (memset leaves it unset)
    pub var_dead_after: bool,
}

/// Zero-fill loop shape eligible for a memset call, if `s` is one.
pub fn memset_candidate(tu: &TranslationUnit, f: &FunctionDef, s: &Stmt) -> Option<MemsetShape> {
    let c = loop_shape(s)?;
    let Stmt::For { body, .. } = s else {
        return None;
    };
    if c.dir != LoopDir::Up || !c.step1 {
        return None;
    }
    let lo = c.init.as_int_literal()?;
    let bound = c.bound.as_int_literal()?;
    let hi = if c.inclusive { bound + 1 } else { bound };
    let [Stmt::Expr {
        expr:
            Expr::Assign {
                op: AssignOp::Assign,
                target,
                value,
                ..
            },
        ..
    }] = body.stmts.as_slice()
    else {
        return None;
    };
    if value.as_int_literal() != Some(0) {
        return None;
    }
    let Expr::Index { base, index, .. } = target.as_ref() else {
        return None;
    };
    let (Expr::Var { name: arr, .. }, Expr::Var { name: idx, .. }) =
        (base.as_ref(), index.as_ref())
    else {
        return None;
    };
    if *idx != c.var {
        return None;
    }
    let (elem, len) = array_decl(tu, f, arr)?;
    if !matches!(elem, BaseType::Int | BaseType::Char) {
        return None;
    }
    if lo < 0 || lo > hi || hi > len {
        return None;
    }
    let uses_outside = count_var_uses(f, &c.var) - count_var_uses_in_stmt(s, &c.var);
    Some(MemsetShape {
        array: arr.clone(),
        lo,
        hi,
        elem,
        var_dead_after: uses_outside == 0,
    })
}

fn detect_memset(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        f.walk_stmts(&mut |s| {
            let Some(shape) = memset_candidate(tu, f, s) else { return };
            let safe = shape.var_dead_after;
            out.push(Finding {
                rule: RuleId::MemsetInit,
                span: s.span().clone(),
                function: f.name.clone(),
                safety: if safe { Safety::Safe } else { Safety::UnsafeNeedsOverride },
                rationale: if safe {
                    format!("zero-fill loop over `{}[{}..{}]` can call memset", shape.array, shape.lo, shape.hi)
                } else {
                    format!(
                        "zero-fill loop over `{}` could call memset, but the loop variable is read after the loop",
                        shape.array
                    )
                },
                payload: FindingPayload::Memset { array: shape.array.clone(), lo: shape.lo, hi: shape.hi },
            });
        });
    }
}

fn array_decl(tu: &TranslationUnit, f: &FunctionDef, name: &str) -> Option<(BaseType, i64)> {
    if let Some(g) = tu.global(name) {
        if g.dims.len() == 1 && g.ty.pointer_depth == 0 {
            return Some((g.ty.base, g.dims[0]));
        }
        return None;
    }
    let mut found = None;
    f.walk_stmts(&mut |s| {
        if let Stmt::VarDecl {
            name: n, ty, dims, ..
        } = s
        {
            if n == name && dims.len() == 1 && ty.pointer_depth == 0 {
                found = Some((ty.base, dims[0]));
            }
        }
    });
    found
}

fn count_var_uses(f: &FunctionDef, var: &str) -> usize {
    let mut n = 0;
    f.walk_exprs(&mut |e| {
        if let Expr::Var { name, .. } = e {
            if name == var {
                n += 1;
            }
        }
    });
    n
}

fn count_var_uses_in_stmt(s: &Stmt, var: &str) -> usize {
    let mut n = 0;
    s.walk_exprs(&mut |e| {
        if let Expr::Var { name, .. } = e {
            if name == var {
                n += 1;
            }
        }
    });
    n
}

/// Locals of type `int` whose every write provably keeps them non-negative
/// (non-negative literal or `rand()` initializers, increments, copies of
/// other qualifying variables). Decrements and address-taking disqualify.
pub fn unsigned_qualified(_tu: &TranslationUnit, f: &FunctionDef) -> HashSet<String> {
    let addr_taken = purity::address_taken(f);
    // candidates: plain int scalars declared in this function
    let mut decls: Vec<(String, SourceSpan, Option<Expr>)> = Vec::new();
    f.walk_stmts(&mut |s| {
        if let Stmt::VarDecl {
            name,
            ty,
            dims,
            init,
            span,
        } = s
        {
            if ty.base == BaseType::Int && ty.pointer_depth == 0 && dims.is_empty() {
                decls.push((name.clone(), span.clone(), init.clone()));
            }
        }
    });

    let mut qualified: HashSet<String> = decls.iter().map(|(n, _, _)| n.clone()).collect();
    qualified.retain(|n| !addr_taken.contains(n));

    // writes[i] = (var, value-shape) for every assignment in the function
    #[derive(Debug)]
    enum Write {
        NonNegLiteral,
        RandCall,
        CopyOf(String),
        Increment,
        Other,
    }
    let mut writes: Vec<(String, Write)> = Vec::new();
    for (name, _, init) in &decls {
        if let Some(init) = init {
            writes.push((name.clone(), classify_value(init)));
        }
    }
    f.walk_exprs(&mut |e| match e {
        Expr::Assign {
            op, target, value, ..
        } => {
            if let Expr::Var { name, .. } = target.as_ref() {
                let w = match op {
                    AssignOp::Assign => classify_value(value),
                    AssignOp::AddAssign => match classify_value(value) {
                        Write::NonNegLiteral | Write::CopyOf(_) | Write::RandCall => {
                            Write::Increment
                        }
                        _ => Write::Other,
                    },
                    _ => Write::Other,
                };
                writes.push((name.clone(), w));
            }
        }
        Expr::IncDec { op, target, .. } => {
            if let Expr::Var { name, .. } = target.as_ref() {
                let w = if op.is_increment() {
                    Write::Increment
                } else {
                    Write::Other
                };
                writes.push((name.clone(), w));
            }
        }
        _ => {}
    });

    fn classify_value(e: &Expr) -> Write {
        match e {
            Expr::IntLit { value, .. } if *value >= 0 => Write::NonNegLiteral,
            Expr::CharLit { .. } => Write::NonNegLiteral,
            Expr::Call { name, .. } if name == "rand" => Write::RandCall,
            Expr::Var { name, .. } => Write::CopyOf(name.clone()),
            // v = v + <nonneg literal> is an increment
            Expr::Binary {
                op: BinaryOp::Add,
                lhs,
                rhs,
                ..
            } => match (lhs.as_ref(), rhs.as_ref()) {
                (Expr::Var { name, .. }, Expr::IntLit { value, .. }) if *value >= 0 => {
                    Write::CopyOf(name.clone())
                }
                _ => Write::Other,
            },
            _ => Write::Other,
        }
    }

    // fixpoint: drop variables with disqualifying writes or copies from
    // non-qualifying sources
    loop {
        let snapshot = qualified.clone();
        qualified.retain(|name| {
            writes
                .iter()
                .filter(|(n, _)| n == name)
                .all(|(_, w)| match w {
                    Write::NonNegLiteral | Write::RandCall | Write::Increment => true,
                    Write::CopyOf(src) => snapshot.contains(src),
                    Write::Other => false,
                })
        });
        if qualified.len() == snapshot.len() {
            break;
        }
    }

    qualified
}

fn detect_unsigned(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        let qualified = unsigned_qualified(tu, f);
        f.walk_stmts(&mut |s| {
            let Stmt::VarDecl { name, ty, dims, span, .. } = s else { return };
            if ty.base != BaseType::Int || ty.pointer_depth != 0 || !dims.is_empty() {
                return;
            }
            if !qualified.contains(name) {
                return;
            }
            out.push(Finding {
                rule: RuleId::UnsignedPromote,
                span: span.clone(),
                function: f.name.clone(),
                safety: Safety::Safe,
                rationale: format!(
                    "`{}` is provably non-negative; unsigned arithmetic is cheaper on most processors",
                    name
                ),
                payload: FindingPayload::Unsigned { var: name.clone() },
            });
        });
    }
}

fn detect_adv_recursion(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        if is_recursive(tu, &f.name) {
            out.push(Finding {
                rule: RuleId::AdvRecursion,
                span: f.span.clone(),
                function: f.name.clone(),
                safety: Safety::Advisory,
                rationale: format!(
                    "`{}` is recursive; each level pays full call overhead — consider an iterative form",
                    f.name
                ),
                payload: FindingPayload::Advisory,
            });
        }
    }
}

fn detect_adv_multidim(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for g in &tu.globals {
        if g.dims.len() >= 2 {
            out.push(Finding {
                rule: RuleId::AdvMultidimArray,
                span: g.span.clone(),
                function: "<global>".to_string(),
                safety: Safety::Advisory,
                rationale: format!(
                    "`{}` is multi-dimensional; a flat array with manual indexing is faster",
                    g.name
                ),
                payload: FindingPayload::Advisory,
            });
        }
    }
    for f in &tu.functions {
        f.walk_stmts(&mut |s| {
            if let Stmt::VarDecl { name, dims, span, .. } = s {
                if dims.len() >= 2 {
                    out.push(Finding {
                        rule: RuleId::AdvMultidimArray,
                        span: span.clone(),
                        function: f.name.clone(),
                        safety: Safety::Advisory,
                        rationale: format!(
                            "`{}` is multi-dimensional; a flat array with manual indexing is faster",
                            name
                        ),
                        payload: FindingPayload::Advisory,
                    });
                }
            }
        });
    }
}

fn detect_adv_static(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for g in &tu.globals {
        if !g.is_static {
            out.push(Finding {
                rule: RuleId::AdvStaticLinkage,
                span: g.span.clone(),
                function: "<global>".to_string(),
                safety: Safety::Advisory,
                rationale: format!(
                    "file-scope `{}` is externally visible; declare it static unless it is meant to be global",
                    g.name
                ),
                payload: FindingPayload::Advisory,
            });
        }
    }
}

fn detect_adv_tiny_fn(tu: &TranslationUnit, config: &AnalysisConfig, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        if f.name == "main" || !is_tiny(f, config) || is_recursive(tu, &f.name) {
            continue;
        }
        let mut total_sites = 0usize;
        let mut loop_sites = 0usize;
        for caller in &tu.functions {
            walk_with_loop_depth(&caller.body, 0, &mut |s, depth| {
                let mut count_in = |e: &Expr| {
                    e.walk(&mut |n| {
                        if let Expr::Call { name, .. } = n {
                            if *name == f.name {
                                total_sites += 1;
                                if depth > 0 {
                                    loop_sites += 1;
                                }
                            }
                        }
                    })
                };
                match s {
                    Stmt::Expr { expr, .. } => count_in(expr),
                    Stmt::If { cond, .. } => count_in(cond),
                    Stmt::While { cond, .. } | Stmt::DoWhile { cond, .. } => count_in(cond),
                    Stmt::For {
                        init, cond, step, ..
                    } => {
                        for e in [init, cond, step].into_iter().flatten() {
                            count_in(e);
                        }
                    }
                    Stmt::Return { value: Some(v), .. } => count_in(v),
                    Stmt::VarDecl { init: Some(i), .. } => count_in(i),
                    _ => {}
                }
            });
        }
        if loop_sites >= 1 || total_sites >= 2 {
            out.push(Finding {
                rule: RuleId::AdvTinyFnMacro,
                span: f.span.clone(),
                function: f.name.clone(),
                safety: Safety::Advisory,
                rationale: format!(
                    "tiny function `{}` is called often; a #define macro would avoid the call entirely",
                    f.name
                ),
                payload: FindingPayload::Advisory,
            });
        }
    }
}

fn detect_adv_word_size(tu: &TranslationUnit, out: &mut Vec<Finding>) {
    for f in &tu.functions {
        // char scalars participating in arithmetic or comparisons inside loops
        let mut char_locals: Vec<(String, SourceSpan)> = Vec::new();
        f.walk_stmts(&mut |s| {
            if let Stmt::VarDecl {
                name,
                ty,
                dims,
                span,
                ..
            } = s
            {
                if ty.base == BaseType::Char && ty.pointer_depth == 0 && dims.is_empty() {
                    char_locals.push((name.clone(), span.clone()));
                }
            }
        });
        if char_locals.is_empty() {
            continue;
        }
        let mut hot: HashSet<String> = HashSet::new();
        f.walk_stmts(&mut |s| {
            if let Stmt::While { body, .. } | Stmt::DoWhile { body, .. } | Stmt::For { body, .. } =
                s
            {
                for st in &body.stmts {
                    st.walk_exprs(&mut |e| {
                        if let Expr::Binary { lhs, rhs, .. } = e {
                            for side in [lhs.as_ref(), rhs.as_ref()] {
                                if let Expr::Var { name, .. } = side {
                                    hot.insert(name.clone());
                                }
                            }
                        }
                        if let Expr::IncDec { target, .. } = e {
                            if let Expr::Var { name, .. } = target.as_ref() {
                                hot.insert(name.clone());
                            }
                        }
                    });
                }
            }
        });
        for (name, span) in char_locals {
            if hot.contains(&name) {
                out.push(Finding {
                    rule: RuleId::AdvWordSize,
                    span,
                    function: f.name.clone(),
                    safety: Safety::Advisory,
                    rationale: format!(
                        "`{}` is a char used in loop arithmetic; a word-size (int) variable avoids partial-register work",
                        name
                    ),
                    payload: FindingPayload::Advisory,
                });
            }
        }
    }
}

// ---- rendering --------------------------------------------------------------

/// Fixed column order: rule, file:line, function, safety, rationale.
pub fn findings_to_tsv(findings: &[Finding]) -> String {
    let mut out = String::new();
    for f in findings {
        out.push_str(&format!(
            "{}\t{}:{}\t{}\t{}\t{}\n",
            f.rule,
            f.span.file,
            f.span.line_start,
            f.function,
            f.safety,
            f.rationale.replace('\t', " "),
        ));
    }
    out
}

pub fn findings_to_text(findings: &[Finding]) -> String {
    findings_to_text_marked(findings, &[])
}

/// Text rendering; functions listed in `cold` get a `[cold]` marker.
pub fn findings_to_text_marked(findings: &[Finding], cold: &[String]) -> String {
    let mut out = String::new();
    for f in findings {
        let loc = format!("{}:{}", f.span.file, f.span.line_start);
        let marker = if cold.contains(&f.function) {
            " [cold]"
        } else {
            ""
        };
        out.push_str(&format!(
            "{:<20} {:<16} {:<12} {:<22} {}{}\n",
            f.rule.to_string(),
            loc,
            f.function,
            f.safety.to_string(),
            f.rationale,
            marker,
        ));
    }
    out
}
