//! Applies findings to a translation unit. Findings are located by source
//! span; anything invalidated by an earlier rewrite in the same plan is
//! skipped rather than misapplied, and every precondition is re-checked
//! against the current tree right before its rewrite runs.

mod diff;
mod ops;

use std::collections::BTreeSet;
use std::fmt;

use crate::analysis::{
    countdown_candidate, memset_candidate, unsigned_qualified, Finding, FindingPayload, RuleId,
    Safety,
};
use crate::frontend::ast::*;
use crate::frontend::{expr_to_string, stmt_to_string};
use crate::span::SourceSpan;

pub use diff::unified_diff;
pub use ops::{
    rewrite_bitwise, rewrite_countdown, rewrite_global_alias, rewrite_inline, rewrite_memset,
    rewrite_nested_if_merge, rewrite_unsigned,
};

#[derive(Debug, Clone, PartialEq)]
pub enum RewriteError {
    SpanMismatch(SourceSpan),
    PreconditionViolated(String),
    EarlyReturnUnsupported,
    NameCollision(String),
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::SpanMismatch(span) => {
                write!(
                    f,
                    "finding references {} which is not in the source tree",
                    span
                )
            }
            RewriteError::PreconditionViolated(msg) => write!(f, "precondition violated: {}", msg),
            RewriteError::EarlyReturnUnsupported => {
                write!(f, "inlining bodies with return statements is unsupported")
            }
            RewriteError::NameCollision(name) => write!(f, "fresh name `{}` collides", name),
        }
    }
}

impl std::error::Error for RewriteError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// UNSAFE_NEEDS_OVERRIDE without the override flag.
    NeedsOverride,
    /// The finding's span no longer exists (consumed by an earlier rewrite).
    StaleSpan,
    /// Advisory rules have no automatic rewrite.
    Advisory,
    /// The node still exists but an earlier rewrite broke a precondition.
    PreconditionChanged,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::NeedsOverride => "NEEDS_OVERRIDE",
            SkipReason::StaleSpan => "STALE_SPAN",
            SkipReason::Advisory => "ADVISORY",
            SkipReason::PreconditionChanged => "PRECONDITION_CHANGED",
        })
    }
}

#[derive(Debug, Clone)]
pub struct AppliedChange {
    pub finding: Finding,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default)]
pub struct ChangeReport {
    pub applied: Vec<AppliedChange>,
    pub skipped: Vec<(Finding, SkipReason)>,
    pub functions_touched: BTreeSet<String>,
}

/// Order in which the auto-planner applies rules: memset first (aliasing a
/// fill loop's array base would hide the pattern), then aliasing and
/// inlining so later passes see the spliced bodies, count-down late because
/// its index remap obscures other patterns.
pub const PLAN_ORDER: [RuleId; 7] = [
    RuleId::MemsetInit,
    RuleId::GlobalRegAlias,
    RuleId::FnInline,
    RuleId::NestedIfMerge,
    RuleId::BitwiseConv,
    RuleId::LoopCountdown,
    RuleId::UnsignedPromote,
];

fn plan_rank(rule: RuleId) -> usize {
    PLAN_ORDER
        .iter()
        .position(|r| *r == rule)
        .unwrap_or(PLAN_ORDER.len())
}

/// Sort findings into auto-plan application order.
pub fn sort_findings_for_plan(findings: &mut [Finding]) {
    findings.sort_by(|a, b| {
        (
            plan_rank(a.rule),
            a.span.file.as_ref(),
            a.span.line_start,
            a.span.col_start,
        )
            .cmp(&(
                plan_rank(b.rule),
                b.span.file.as_ref(),
                b.span.line_start,
                b.span.col_start,
            ))
    });
}

/// Apply `findings` (produced by `detect` on `tu`) in order. Findings whose
/// span is gone are skipped as stale; UNSAFE ones are skipped unless
/// `allow_unsafe`. A finding whose span never existed in `tu` is a caller
/// bug and reported as `SpanMismatch`.
pub fn apply_plan(
    tu: &TranslationUnit,
    findings: &[Finding],
    allow_unsafe: bool,
) -> Result<(TranslationUnit, ChangeReport), RewriteError> {
    for f in findings {
        if !span_exists(tu, f) {
            return Err(RewriteError::SpanMismatch(f.span.clone()));
        }
    }

    let mut current = tu.clone();
    let mut report = ChangeReport::default();

    for finding in findings {
        if finding.rule.is_advisory() {
            report.skipped.push((finding.clone(), SkipReason::Advisory));
            continue;
        }
        if finding.safety == Safety::UnsafeNeedsOverride && !allow_unsafe {
            report
                .skipped
                .push((finding.clone(), SkipReason::NeedsOverride));
            continue;
        }
        match apply_one(&mut current, finding)? {
            Ok(change) => {
                report
                    .functions_touched
                    .insert(change.finding.function.clone());
                report.applied.push(change);
            }
            Err(reason) => report.skipped.push((finding.clone(), reason)),
        }
    }
    Ok((current, report))
}

/// Outer error: hard failure. Inner error: skip with reason.
fn apply_one(
    tu: &mut TranslationUnit,
    finding: &Finding,
) -> Result<Result<AppliedChange, SkipReason>, RewriteError> {
    let change = |before: String, after: String| AppliedChange {
        finding: finding.clone(),
        before,
        after,
    };

    match finding.rule {
        RuleId::LoopCountdown => {
            let Some((fn_name, stmt)) = find_stmt(tu, &finding.span, &is_for) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let f = tu.function(&fn_name).unwrap();
            let Some(canonical) = countdown_candidate(tu, f, &stmt) else {
                return Ok(Err(SkipReason::PreconditionChanged));
            };
            let new = match rewrite_countdown(&stmt, &canonical) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_)) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = stmt_to_string(&stmt);
            let after = stmt_to_string(&new);
            replace_stmt(tu, &finding.span, &is_for, new);
            Ok(Ok(change(before, after)))
        }
        RuleId::MemsetInit => {
            let Some((fn_name, stmt)) = find_stmt(tu, &finding.span, &is_for) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let f = tu.function(&fn_name).unwrap();
            let Some(shape) = memset_candidate(tu, f, &stmt) else {
                return Ok(Err(SkipReason::PreconditionChanged));
            };
            let new = match rewrite_memset(&stmt, &shape) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_)) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = stmt_to_string(&stmt);
            let after = stmt_to_string(&new);
            replace_stmt(tu, &finding.span, &is_for, new);
            Ok(Ok(change(before, after)))
        }
        RuleId::FnInline => {
            let Some((_, stmt)) = find_stmt(tu, &finding.span, &is_call_stmt) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let FindingPayload::Inline { callee } = &finding.payload else {
                return Err(RewriteError::PreconditionViolated(
                    "inline finding without callee".into(),
                ));
            };
            let Some(callee_def) = tu.function(callee).cloned() else {
                return Ok(Err(SkipReason::PreconditionChanged));
            };
            let new = match rewrite_inline(tu, &stmt, &callee_def) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_))
                | Err(RewriteError::EarlyReturnUnsupported) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = stmt_to_string(&stmt);
            let after = stmt_to_string(&new);
            replace_stmt(tu, &finding.span, &is_call_stmt, new);
            Ok(Ok(change(before, after)))
        }
        RuleId::NestedIfMerge => {
            let Some((_, stmt)) = find_stmt(tu, &finding.span, &is_if) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let new = match rewrite_nested_if_merge(&stmt) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_)) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = stmt_to_string(&stmt);
            let after = stmt_to_string(&new);
            replace_stmt(tu, &finding.span, &is_if, new);
            Ok(Ok(change(before, after)))
        }
        RuleId::BitwiseConv => {
            let Some(expr) = find_expr(tu, &finding.span, &is_logical) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let new = match rewrite_bitwise(&expr) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_)) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = expr_to_string(&expr);
            let after = expr_to_string(&new);
            replace_expr(tu, &finding.span, &is_logical, new);
            Ok(Ok(change(before, after)))
        }
        RuleId::GlobalRegAlias => {
            let FindingPayload::GlobalAlias { global, .. } = &finding.payload else {
                return Err(RewriteError::PreconditionViolated(
                    "alias finding without global".into(),
                ));
            };
            let (Some(f), Some(g)) = (tu.function(&finding.function), tu.global(global)) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let new_fn = match rewrite_global_alias(tu, f, g) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_)) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = format!("direct uses of `{}` in {}()", global, finding.function);
            let after = stmt_to_string(&new_fn.body.stmts[0]);
            let idx = tu
                .functions
                .iter()
                .position(|x| x.name == finding.function)
                .unwrap();
            tu.functions[idx] = new_fn;
            Ok(Ok(change(before, after.trim_end().to_string())))
        }
        RuleId::UnsignedPromote => {
            let FindingPayload::Unsigned { var } = &finding.payload else {
                return Err(RewriteError::PreconditionViolated(
                    "promotion finding without variable".into(),
                ));
            };
            let Some((fn_name, decl)) = find_stmt(tu, &finding.span, &is_var_decl) else {
                return Ok(Err(SkipReason::StaleSpan));
            };
            let f = tu.function(&fn_name).unwrap();
            if !unsigned_qualified(tu, f).contains(var) {
                return Ok(Err(SkipReason::PreconditionChanged));
            }
            let new_fn = match rewrite_unsigned(f, var) {
                Ok(n) => n,
                Err(RewriteError::PreconditionViolated(_)) => {
                    return Ok(Err(SkipReason::PreconditionChanged))
                }
                Err(e) => return Err(e),
            };
            let before = stmt_to_string(&decl);
            let mut after_decl = decl.clone();
            if let Stmt::VarDecl { ty, .. } = &mut after_decl {
                ty.base = BaseType::UnsignedInt;
            }
            let after = stmt_to_string(&after_decl);
            let idx = tu.functions.iter().position(|x| x.name == fn_name).unwrap();
            tu.functions[idx] = new_fn;
            Ok(Ok(change(
                before.trim_end().to_string(),
                after.trim_end().to_string(),
            )))
        }
        _ => Ok(Err(SkipReason::Advisory)),
    }
}

// ---- span location ----------------------------------------------------------

fn is_for(s: &Stmt) -> bool {
    matches!(s, Stmt::For { .. })
}

fn is_if(s: &Stmt) -> bool {
    matches!(s, Stmt::If { .. })
}

fn is_call_stmt(s: &Stmt) -> bool {
    matches!(
        s,
        Stmt::Expr {
            expr: Expr::Call { .. },
            ..
        }
    )
}

fn is_var_decl(s: &Stmt) -> bool {
    matches!(s, Stmt::VarDecl { .. })
}

fn is_logical(e: &Expr) -> bool {
    matches!(e, Expr::Binary { op, .. } if op.is_logical())
}

fn span_exists(tu: &TranslationUnit, finding: &Finding) -> bool {
    match finding.rule {
        RuleId::LoopCountdown | RuleId::MemsetInit => {
            find_stmt(tu, &finding.span, &is_for).is_some()
        }
        RuleId::FnInline => find_stmt(tu, &finding.span, &is_call_stmt).is_some(),
        RuleId::NestedIfMerge => find_stmt(tu, &finding.span, &is_if).is_some(),
        RuleId::BitwiseConv => find_expr(tu, &finding.span, &is_logical).is_some(),
        RuleId::GlobalRegAlias => tu.function(&finding.function).is_some(),
        RuleId::UnsignedPromote => find_stmt(tu, &finding.span, &is_var_decl).is_some(),
        // advisory findings carry spans of declarations/functions
        _ => true,
    }
}

fn find_stmt(
    tu: &TranslationUnit,
    span: &SourceSpan,
    pred: &dyn Fn(&Stmt) -> bool,
) -> Option<(String, Stmt)> {
    for f in &tu.functions {
        let mut hit: Option<Stmt> = None;
        f.walk_stmts(&mut |s| {
            if hit.is_none() && s.span() == span && pred(s) {
                hit = Some(s.clone());
            }
        });
        if let Some(s) = hit {
            return Some((f.name.clone(), s));
        }
    }
    None
}

fn replace_stmt(
    tu: &mut TranslationUnit,
    span: &SourceSpan,
    pred: &dyn Fn(&Stmt) -> bool,
    new: Stmt,
) -> bool {
    fn in_block(
        b: &mut Block,
        span: &SourceSpan,
        pred: &dyn Fn(&Stmt) -> bool,
        new: &Stmt,
    ) -> bool {
        for s in &mut b.stmts {
            if s.span() == span && pred(s) {
                *s = new.clone();
                return true;
            }
            let done = match s {
                Stmt::Block(inner) => in_block(inner, span, pred, new),
                Stmt::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    in_block(then_block, span, pred, new)
                        || else_block
                            .as_mut()
                            .is_some_and(|e| in_block(e, span, pred, new))
                }
                Stmt::While { body, .. } | Stmt::DoWhile { body, .. } | Stmt::For { body, .. } => {
                    in_block(body, span, pred, new)
                }
                _ => false,
            };
            if done {
                return true;
            }
        }
        false
    }
    for f in &mut tu.functions {
        if in_block(&mut f.body, span, pred, &new) {
            return true;
        }
    }
    false
}

fn find_expr(
    tu: &TranslationUnit,
    span: &SourceSpan,
    pred: &dyn Fn(&Expr) -> bool,
) -> Option<Expr> {
    let mut hit: Option<Expr> = None;
    for f in &tu.functions {
        f.walk_exprs(&mut |e| {
            if hit.is_none() && e.span() == span && pred(e) {
                hit = Some(e.clone());
            }
        });
        if hit.is_some() {
            break;
        }
    }
    hit
}

fn replace_expr(
    tu: &mut TranslationUnit,
    span: &SourceSpan,
    pred: &dyn Fn(&Expr) -> bool,
    new: Expr,
) -> bool {
    fn in_expr(e: &mut Expr, span: &SourceSpan, pred: &dyn Fn(&Expr) -> bool, new: &Expr) -> bool {
        if e.span() == span && pred(e) {
            *e = new.clone();
            return true;
        }
        match e {
            Expr::Unary { operand, .. }
            | Expr::Deref { operand, .. }
            | Expr::AddrOf { operand, .. }
            | Expr::Cast { operand, .. } => in_expr(operand, span, pred, new),
            Expr::Binary { lhs, rhs, .. } => {
                in_expr(lhs, span, pred, new) || in_expr(rhs, span, pred, new)
            }
            Expr::Assign { target, value, .. } => {
                in_expr(target, span, pred, new) || in_expr(value, span, pred, new)
            }
            Expr::IncDec { target, .. } => in_expr(target, span, pred, new),
            Expr::Index { base, index, .. } => {
                in_expr(base, span, pred, new) || in_expr(index, span, pred, new)
            }
            Expr::Call { args, .. } => args.iter_mut().any(|a| in_expr(a, span, pred, new)),
            Expr::Ternary {
                cond,
                then_val,
                else_val,
                ..
            } => {
                in_expr(cond, span, pred, new)
                    || in_expr(then_val, span, pred, new)
                    || in_expr(else_val, span, pred, new)
            }
            _ => false,
        }
    }
    fn in_stmt(s: &mut Stmt, span: &SourceSpan, pred: &dyn Fn(&Expr) -> bool, new: &Expr) -> bool {
        match s {
            Stmt::Expr { expr, .. } => in_expr(expr, span, pred, new),
            Stmt::Block(b) => b.stmts.iter_mut().any(|x| in_stmt(x, span, pred, new)),
            Stmt::If {
                cond,
                then_block,
                else_block,
                ..
            } => {
                in_expr(cond, span, pred, new)
                    || then_block
                        .stmts
                        .iter_mut()
                        .any(|x| in_stmt(x, span, pred, new))
                    || else_block
                        .as_mut()
                        .is_some_and(|e| e.stmts.iter_mut().any(|x| in_stmt(x, span, pred, new)))
            }
            Stmt::While { cond, body, .. } | Stmt::DoWhile { cond, body, .. } => {
                in_expr(cond, span, pred, new)
                    || body.stmts.iter_mut().any(|x| in_stmt(x, span, pred, new))
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
                ..
            } => {
                [init, cond, step]
                    .into_iter()
                    .flatten()
                    .any(|e| in_expr(e, span, pred, new))
                    || body.stmts.iter_mut().any(|x| in_stmt(x, span, pred, new))
            }
            Stmt::Return { value: Some(v), .. } => in_expr(v, span, pred, new),
            Stmt::VarDecl { init: Some(i), .. } => in_expr(i, span, pred, new),
            _ => false,
        }
    }
    for f in &mut tu.functions {
        if f.body
            .stmts
            .iter_mut()
            .any(|s| in_stmt(s, span, pred, &new))
        {
            return true;
        }
    }
    false
}

// ---- report rendering ---------------------------------------------------------

/// Human-readable change report: applied findings with snippets, skip
/// reasons, and a unified diff of the canonical source.
pub fn render_change_report(report: &ChangeReport, before_src: &str, after_src: &str) -> String {
    let mut out = String::new();
    if report.applied.is_empty() {
        out.push_str("nothing applied\n");
    } else {
        out.push_str(&format!("applied {} rewrite(s):\n", report.applied.len()));
        for c in &report.applied {
            out.push_str(&format!(
                "  {} at {}:{} in {}\n",
                c.finding.rule, c.finding.span.file, c.finding.span.line_start, c.finding.function
            ));
            for line in c.before.trim_end().lines() {
                out.push_str(&format!("    - {}\n", line));
            }
            for line in c.after.trim_end().lines() {
                out.push_str(&format!("    + {}\n", line));
            }
        }
    }
    if !report.skipped.is_empty() {
        out.push_str(&format!("skipped {} finding(s):\n", report.skipped.len()));
        for (f, reason) in &report.skipped {
            out.push_str(&format!(
                "  {} at {}:{} ({})\n",
                f.rule, f.span.file, f.span.line_start, reason
            ));
        }
    }
    if !report.functions_touched.is_empty() {
        let names: Vec<&str> = report
            .functions_touched
            .iter()
            .map(|s| s.as_str())
            .collect();
        out.push_str(&format!("functions touched: {}\n", names.join(", ")));
    }
    let d = unified_diff(before_src, after_src);
    if !d.is_empty() {
        out.push('\n');
        out.push_str(&d);
    }
    out
}
