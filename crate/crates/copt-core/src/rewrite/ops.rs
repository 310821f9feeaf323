//! The individual rewrites. Each function takes the node a finding points
//! at (plus whatever context it needs) and returns the replacement; all
//! precondition failures surface as `PreconditionViolated`.

use std::collections::{HashMap, HashSet};

use super::RewriteError;
use crate::analysis::{is_boolean_valued, CanonicalLoop, LoopDir, MemsetShape};
use crate::frontend::ast::*;
use crate::span::SourceSpan;

fn sp() -> SourceSpan {
    SourceSpan::synthetic()
}

fn precondition(msg: &str) -> RewriteError {
    RewriteError::PreconditionViolated(msg.to_string())
}

// ---- count-down loop conversion -------------------------------------------

/// `for (v = a; v <= B; v++) body` becomes
/// `for (v = B; v != a-1; v--) body[v := B - v + a]`, with `<` bounds
/// normalized to `<=` first and literal-only arithmetic folded. The
/// iteration values seen by the body are unchanged.
pub fn rewrite_countdown(
    loop_stmt: &Stmt,
    canonical: &CanonicalLoop,
) -> Result<Stmt, RewriteError> {
    let Stmt::For { body, span, .. } = loop_stmt else {
        return Err(precondition("count-down conversion needs a for loop"));
    };
    if canonical.dir != LoopDir::Up || !canonical.step1 {
        return Err(precondition("loop must count up by one"));
    }
    if canonical.var_written_in_body {
        return Err(precondition("loop variable is written in the body"));
    }
    if !canonical.bound_loop_invariant {
        return Err(precondition("loop bound is not loop-invariant"));
    }
    let Some(init) = canonical.init.as_int_literal() else {
        return Err(precondition("loop start must be an integer literal"));
    };
    let var = canonical.var.clone();

    // normalize `v < B` to `v <= B-1`
    let bound = if canonical.inclusive {
        canonical.bound.clone()
    } else {
        match canonical.bound.as_int_literal() {
            Some(b) => Expr::int(b - 1),
            None => Expr::binary(BinaryOp::Sub, canonical.bound.clone(), Expr::int(1)),
        }
    };

    // body remap v := bound - v + init, with literal terms collected
    let remap = additive_remap(&bound, &var, init);
    let mut new_body = body.clone();
    for s in &mut new_body.stmts {
        substitute_var_expr(s, &var, &remap);
    }

    let header_init = Expr::Assign {
        op: AssignOp::Assign,
        target: Box::new(Expr::var(&var)),
        value: Box::new(bound),
        span: sp(),
    };
    let cond = Expr::binary(BinaryOp::Ne, Expr::var(&var), Expr::int(init - 1));
    let step = Expr::IncDec {
        op: IncDecOp::PostDec,
        target: Box::new(Expr::var(&var)),
        span: sp(),
    };

    Ok(Stmt::For {
        init: Some(header_init),
        cond: Some(cond),
        step: Some(step),
        body: new_body,
        span: span.clone(),
    })
}

/// Build `bound - v + init` as an additive chain with the literal parts
/// folded: a literal bound collapses to `(bound+init) - v`, and the `-1`
/// from `<` normalization cancels against `+init` where possible.
fn additive_remap(bound: &Expr, var: &str, init: i64) -> Expr {
    // collect bound into symbolic part + literal offset
    let (symbolic, mut lit) = match bound {
        Expr::IntLit { value, .. } => (None, *value),
        Expr::Binary {
            op: BinaryOp::Sub,
            lhs,
            rhs,
            ..
        } => match (lhs.as_ref(), rhs.as_int_literal()) {
            (l, Some(k)) => (Some(l.clone()), -k),
            _ => (Some(bound.clone()), 0),
        },
        other => (Some(other.clone()), 0),
    };
    lit += init;

    match symbolic {
        None => Expr::binary(BinaryOp::Sub, Expr::int(lit), Expr::var(var)),
        Some(sym) => {
            let head = Expr::binary(BinaryOp::Sub, sym, Expr::var(var));
            match lit.cmp(&0) {
                std::cmp::Ordering::Equal => head,
                std::cmp::Ordering::Greater => Expr::binary(BinaryOp::Add, head, Expr::int(lit)),
                std::cmp::Ordering::Less => Expr::binary(BinaryOp::Sub, head, Expr::int(-lit)),
            }
        }
    }
}

// ---- function inlining ------------------------------------------------------

/// Replace a void-style call statement with a block that evaluates each
/// argument once into a fresh temporary and splices the callee body with
/// parameters renamed to the temporaries.
pub fn rewrite_inline(
    tu: &TranslationUnit,
    call_stmt: &Stmt,
    callee: &FunctionDef,
) -> Result<Stmt, RewriteError> {
    let Stmt::Expr {
        expr: Expr::Call { name, args, .. },
        span,
    } = call_stmt
    else {
        return Err(precondition("inline target must be a call statement"));
    };
    if name != &callee.name {
        return Err(precondition("call does not invoke the given callee"));
    }
    if args.len() != callee.params.len() {
        return Err(precondition("argument count does not match the callee"));
    }
    let mut has_return = false;
    for s in &callee.body.stmts {
        s.walk(&mut |st| {
            if matches!(st, Stmt::Return { .. }) {
                has_return = true;
            }
        });
    }
    if has_return {
        return Err(RewriteError::EarlyReturnUnsupported);
    }

    let taken = tu.all_identifiers();
    let mut fresh = FreshNames::new(taken);

    let mut stmts: Vec<Stmt> = Vec::new();
    let mut renames: HashMap<String, String> = HashMap::new();
    for (param, arg) in callee.params.iter().zip(args) {
        let temp = fresh.next_temp()?;
        renames.insert(param.name.clone(), temp.clone());
        stmts.push(Stmt::VarDecl {
            name: temp,
            ty: param.ty,
            dims: vec![],
            init: Some(arg.clone()),
            span: sp(),
        });
    }

    for s in &callee.body.stmts {
        let mut cloned = strip_stmt_spans(s.clone());
        substitute_renames(&mut cloned, &renames);
        stmts.push(cloned);
    }

    Ok(Stmt::Block(Block {
        stmts,
        span: span.clone(),
    }))
}

struct FreshNames {
    taken: HashSet<String>,
    counter: usize,
}

impl FreshNames {
    fn new(taken: HashSet<String>) -> FreshNames {
        FreshNames { taken, counter: 0 }
    }

    fn next_temp(&mut self) -> Result<String, RewriteError> {
        for _ in 0..10_000 {
            let candidate = format!("__t{}", self.counter);
            self.counter += 1;
            if !self.taken.contains(&candidate) {
                self.taken.insert(candidate.clone());
                return Ok(candidate);
            }
        }
        Err(RewriteError::NameCollision("__t".to_string()))
    }
}

// ---- global register aliasing ----------------------------------------------

/// Alias `global` through a register-hinted local for the whole body of
/// `f`: declare the alias at entry, rewrite every use, and write the value
/// back before every return and at the fall-off end when `f` writes the
/// global itself.
pub fn rewrite_global_alias(
    tu: &TranslationUnit,
    f: &FunctionDef,
    global: &GlobalDecl,
) -> Result<FunctionDef, RewriteError> {
    let mut uses = 0usize;
    f.walk_exprs(&mut |e| {
        if let Expr::Var { name, .. } = e {
            if name == &global.name {
                uses += 1;
            }
        }
    });
    if uses == 0 {
        return Err(precondition("function does not reference the global"));
    }

    let mut taken = tu.all_identifiers();
    let mut local = format!("__local_{}", global.name);
    while taken.contains(&local) {
        local.push('_');
        if local.len() > 128 {
            return Err(RewriteError::NameCollision(local));
        }
    }
    taken.insert(local.clone());

    // alias type: arrays decay to a pointer to their elements
    let alias_ty = if global.dims.is_empty() {
        global.ty.with_register(true)
    } else {
        CType::new(global.ty.base, global.ty.pointer_depth + 1).with_register(true)
    };

    // does f write the global itself (not its elements)?
    let mut writes_global = false;
    f.walk_exprs(&mut |e| match e {
        Expr::Assign { target, .. } | Expr::IncDec { target, .. } => {
            if let Expr::Var { name, .. } = target.as_ref() {
                if name == &global.name {
                    writes_global = true;
                }
            }
        }
        _ => {}
    });

    let mut body = f.body.clone();
    let replacement = Expr::var(&local);
    for s in &mut body.stmts {
        substitute_var_expr(s, &global.name, &replacement);
    }

    let write_back = || Stmt::Expr {
        expr: Expr::Assign {
            op: AssignOp::Assign,
            target: Box::new(Expr::var(&global.name)),
            value: Box::new(Expr::var(&local)),
            span: sp(),
        },
        span: sp(),
    };
    if writes_global {
        insert_before_returns(&mut body, &write_back);
        let falls_off_end = !matches!(body.stmts.last(), Some(Stmt::Return { .. }));
        if falls_off_end {
            body.stmts.push(write_back());
        }
    }

    body.stmts.insert(
        0,
        Stmt::VarDecl {
            name: local,
            ty: alias_ty,
            dims: vec![],
            init: Some(Expr::var(&global.name)),
            span: sp(),
        },
    );

    Ok(FunctionDef { body, ..f.clone() })
}

fn insert_before_returns(block: &mut Block, make: &dyn Fn() -> Stmt) {
    let mut i = 0;
    while i < block.stmts.len() {
        let is_return = matches!(block.stmts[i], Stmt::Return { .. });
        if is_return {
            block.stmts.insert(i, make());
            i += 2;
            continue;
        }
        match &mut block.stmts[i] {
            Stmt::Block(b) => insert_before_returns(b, make),
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                insert_before_returns(then_block, make);
                if let Some(e) = else_block {
                    insert_before_returns(e, make);
                }
            }
            Stmt::While { body, .. } | Stmt::DoWhile { body, .. } | Stmt::For { body, .. } => {
                insert_before_returns(body, make);
            }
            _ => {}
        }
        i += 1;
    }
}

// ---- logical-to-bitwise conversion -------------------------------------------

/// `a && b` -> `a & b`, `a || b` -> `a | b`; operands that are not already
/// 0/1-valued are wrapped as `(x) != 0` so the bitwise form agrees with the
/// logical one on every input.
pub fn rewrite_bitwise(e: &Expr) -> Result<Expr, RewriteError> {
    let Expr::Binary { op, lhs, rhs, span } = e else {
        return Err(precondition("bitwise conversion needs a logical operator"));
    };
    let new_op = match op {
        BinaryOp::LogAnd => BinaryOp::BitAnd,
        BinaryOp::LogOr => BinaryOp::BitOr,
        _ => return Err(precondition("bitwise conversion needs && or ||")),
    };
    Ok(Expr::Binary {
        op: new_op,
        lhs: Box::new(booleanize(lhs.as_ref().clone())),
        rhs: Box::new(booleanize(rhs.as_ref().clone())),
        span: span.clone(),
    })
}

/// `if (c1) if (c2) S;` (no elses) -> `if ((c1) & (c2)) S;`
pub fn rewrite_nested_if_merge(s: &Stmt) -> Result<Stmt, RewriteError> {
    let Stmt::If {
        cond: c1,
        then_block,
        else_block: None,
        span,
    } = s
    else {
        return Err(precondition("merge target must be an if without else"));
    };
    let [Stmt::If {
        cond: c2,
        then_block: inner,
        else_block: None,
        ..
    }] = then_block.stmts.as_slice()
    else {
        return Err(precondition("then-branch must be exactly one else-less if"));
    };
    let merged = Expr::binary(
        BinaryOp::BitAnd,
        booleanize(c1.clone()),
        booleanize(c2.clone()),
    );
    Ok(Stmt::If {
        cond: merged,
        then_block: inner.clone(),
        else_block: None,
        span: span.clone(),
    })
}

fn booleanize(e: Expr) -> Expr {
    if is_boolean_valued(&e) {
        e
    } else {
        Expr::binary(BinaryOp::Ne, e, Expr::int(0))
    }
}

// ---- zero-fill loop to memset ------------------------------------------------

/// `for (v = lo; v < hi; v++) arr[v] = 0;` becomes
/// `memset(arr + lo, 0, (hi - lo) * sizeof(elem));`
pub fn rewrite_memset(loop_stmt: &Stmt, shape: &MemsetShape) -> Result<Stmt, RewriteError> {
    let Stmt::For { span, .. } = loop_stmt else {
        return Err(precondition("memset conversion needs a for loop"));
    };
    if !shape.var_dead_after {
        return Err(precondition("loop variable is read after the loop"));
    }
    let call = Expr::Call {
        name: "memset".to_string(),
        args: vec![
            Expr::binary(BinaryOp::Add, Expr::var(&shape.array), Expr::int(shape.lo)),
            Expr::int(0),
            Expr::binary(
                BinaryOp::Mul,
                Expr::binary(BinaryOp::Sub, Expr::int(shape.hi), Expr::int(shape.lo)),
                Expr::SizeOf {
                    ty: CType::new(shape.elem, 0),
                    span: sp(),
                },
            ),
        ],
        span: sp(),
    };
    Ok(Stmt::Expr {
        expr: call,
        span: span.clone(),
    })
}

// ---- unsigned promotion --------------------------------------------------------

/// Change the declared base type of `var` to `unsigned int`; nothing else.
pub fn rewrite_unsigned(f: &FunctionDef, var: &str) -> Result<FunctionDef, RewriteError> {
    let mut out = f.clone();
    let mut changed = false;
    fn patch(block: &mut Block, var: &str, changed: &mut bool) {
        for s in &mut block.stmts {
            match s {
                Stmt::VarDecl { name, ty, dims, .. }
                    if name == var
                        && ty.base == BaseType::Int
                        && ty.pointer_depth == 0
                        && dims.is_empty() =>
                {
                    ty.base = BaseType::UnsignedInt;
                    *changed = true;
                }
                Stmt::Block(b) => patch(b, var, changed),
                Stmt::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    patch(then_block, var, changed);
                    if let Some(e) = else_block {
                        patch(e, var, changed);
                    }
                }
                Stmt::While { body, .. } | Stmt::DoWhile { body, .. } | Stmt::For { body, .. } => {
                    patch(body, var, changed)
                }
                _ => {}
            }
        }
    }
    patch(&mut out.body, var, &mut changed);
    if !changed {
        return Err(precondition("no matching int declaration to promote"));
    }
    Ok(out)
}

// ---- scope-aware variable substitution -----------------------------------------

/// Replace reads and writes of `var` with `replacement` inside a statement,
/// respecting shadowing: a nested declaration of the same name ends the
/// substitution for the rest of that block.
pub fn substitute_var_expr(s: &mut Stmt, var: &str, replacement: &Expr) {
    let mut renames = HashMap::new();
    renames.insert(var.to_string(), replacement.clone());
    subst_stmt(s, &renames);
}

/// Rename parameters to temporaries (same shadowing rules).
fn substitute_renames(s: &mut Stmt, renames: &HashMap<String, String>) {
    let map: HashMap<String, Expr> = renames
        .iter()
        .map(|(k, v)| (k.clone(), Expr::var(v)))
        .collect();
    subst_stmt(s, &map);
}

fn subst_stmt(s: &mut Stmt, map: &HashMap<String, Expr>) {
    if map.is_empty() {
        return;
    }
    match s {
        Stmt::Expr { expr, .. } => subst_expr(expr, map),
        Stmt::Block(b) => subst_block(b, map.clone()),
        Stmt::If {
            cond,
            then_block,
            else_block,
            ..
        } => {
            subst_expr(cond, map);
            subst_block(then_block, map.clone());
            if let Some(e) = else_block {
                subst_block(e, map.clone());
            }
        }
        Stmt::While { cond, body, .. } | Stmt::DoWhile { cond, body, .. } => {
            subst_expr(cond, map);
            subst_block(body, map.clone());
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
            ..
        } => {
            for e in [init, cond, step].into_iter().flatten() {
                subst_expr(e, map);
            }
            subst_block(body, map.clone());
        }
        Stmt::Return { value, .. } => {
            if let Some(v) = value {
                subst_expr(v, map);
            }
        }
        Stmt::VarDecl { init, .. } => {
            if let Some(i) = init {
                subst_expr(i, map);
            }
        }
    }
}

fn subst_block(b: &mut Block, mut map: HashMap<String, Expr>) {
    for s in &mut b.stmts {
        subst_stmt(s, &map);
        if let Stmt::VarDecl { name, .. } = s {
            map.remove(name); // shadowed from here on
        }
    }
}

fn subst_expr(e: &mut Expr, map: &HashMap<String, Expr>) {
    if let Expr::Var { name, .. } = e {
        if let Some(r) = map.get(name) {
            *e = r.clone();
        }
        return;
    }
    match e {
        Expr::Unary { operand, .. }
        | Expr::Deref { operand, .. }
        | Expr::AddrOf { operand, .. }
        | Expr::Cast { operand, .. } => subst_expr(operand, map),
        Expr::Binary { lhs, rhs, .. } => {
            subst_expr(lhs, map);
            subst_expr(rhs, map);
        }
        Expr::Assign { target, value, .. } => {
            subst_expr(target, map);
            subst_expr(value, map);
        }
        Expr::IncDec { target, .. } => subst_expr(target, map),
        Expr::Index { base, index, .. } => {
            subst_expr(base, map);
            subst_expr(index, map);
        }
        Expr::Call { args, .. } => {
            for a in args {
                subst_expr(a, map);
            }
        }
        Expr::Ternary {
            cond,
            then_val,
            else_val,
            ..
        } => {
            subst_expr(cond, map);
            subst_expr(then_val, map);
            subst_expr(else_val, map);
        }
        _ => {}
    }
}

fn strip_stmt_spans(mut s: Stmt) -> Stmt {
    // reuse the normalizer by round-tripping through a throwaway unit
    let mut tu = TranslationUnit::default();
    tu.functions.push(FunctionDef {
        name: String::new(),
        return_type: CType::new(BaseType::Void, 0),
        params: vec![],
        body: Block::synthetic(vec![std::mem::replace(
            &mut s,
            Stmt::Return {
                value: None,
                span: sp(),
            },
        )]),
        span: sp(),
    });
    let normalized = tu.normalized();
    normalized
        .functions
        .into_iter()
        .next()
        .unwrap()
        .body
        .stmts
        .into_iter()
        .next()
        .unwrap()
}
