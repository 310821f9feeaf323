//! Effect and shape predicates used by the safety gates.

use crate::frontend::ast::*;

/// True iff `e` contains no assignment, no increment/decrement and no call
/// (builtin or user). Reads through arrays and pointers are permitted.
pub fn side_effect_free(e: &Expr, _tu: &TranslationUnit) -> bool {
    let mut pure = true;
    e.walk(&mut |n| {
        if matches!(
            n,
            Expr::Assign { .. } | Expr::IncDec { .. } | Expr::Call { .. }
        ) {
            pure = false;
        }
    });
    pure
}

/// True iff the root of `e` always evaluates to 0 or 1: a comparison, a
/// logical operator, or `!`. Conservative `false` otherwise.
pub fn is_boolean_valued(e: &Expr) -> bool {
    match e {
        Expr::Binary { op, .. } => op.is_comparison() || op.is_logical(),
        Expr::Unary {
            op: UnaryOp::Not, ..
        } => true,
        _ => false,
    }
}

/// True iff `e` reads memory through an index or dereference. Evaluating
/// such an expression where it was previously skipped can fault, so the
/// short-circuit removal gates use this.
pub fn contains_memory_read(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |n| {
        if matches!(n, Expr::Index { .. } | Expr::Deref { .. }) {
            found = true;
        }
    });
    found
}

/// Summary of what a statement sequence can write.
#[derive(Debug, Default, Clone)]
pub struct WriteSet {
    /// Variables assigned or incremented by name.
    pub named: std::collections::HashSet<String>,
    /// Whether anything is stored through a pointer (deref, or indexing a
    /// non-array base).
    pub pointer_writes: bool,
    /// Whether any user function is called.
    pub user_calls: bool,
    /// Whether any builtin function is called.
    pub builtin_calls: bool,
}

/// Collect the writes performed by `stmts` (without following calls).
/// `is_declared_array` classifies an index base name as a direct array.
pub fn write_set(stmts: &[Stmt], is_declared_array: &dyn Fn(&str) -> bool) -> WriteSet {
    let mut ws = WriteSet::default();
    for s in stmts {
        s.walk_exprs(&mut |e| match e {
            Expr::Assign { target, .. } | Expr::IncDec { target, .. } => {
                record_write(target, is_declared_array, &mut ws)
            }
            Expr::Call { name, .. } => {
                if is_builtin_function(name) {
                    ws.builtin_calls = true;
                } else {
                    ws.user_calls = true;
                }
            }
            _ => {}
        });
    }
    ws
}

fn record_write(target: &Expr, is_declared_array: &dyn Fn(&str) -> bool, ws: &mut WriteSet) {
    match target {
        Expr::Var { name, .. } => {
            ws.named.insert(name.clone());
        }
        Expr::Index { base, .. } => match base.as_ref() {
            Expr::Var { name, .. } if is_declared_array(name) => {
                ws.named.insert(name.clone());
            }
            _ => ws.pointer_writes = true,
        },
        Expr::Deref { .. } => ws.pointer_writes = true,
        _ => ws.pointer_writes = true,
    }
}

/// Names whose address is taken anywhere in the function.
pub fn address_taken(f: &FunctionDef) -> std::collections::HashSet<String> {
    let mut out = std::collections::HashSet::new();
    f.walk_exprs(&mut |e| {
        if let Expr::AddrOf { operand, .. } = e {
            if let Expr::Var { name, .. } = operand.as_ref() {
                out.insert(name.clone());
            }
        }
    });
    out
}

/// Free variable names of an expression.
pub fn expr_vars(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    e.walk(&mut |n| {
        if let Expr::Var { name, .. } = n {
            out.push(name.clone());
        }
    });
    out
}

/// True iff `e` contains any call.
pub fn contains_call(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |n| {
        if matches!(n, Expr::Call { .. }) {
            found = true;
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_text;

    fn body_expr(src: &str) -> (TranslationUnit, Expr) {
        let tu = parse_text(src, "t.c").unwrap();
        let f = &tu.functions[0];
        let mut expr = None;
        for s in &f.body.stmts {
            if let Stmt::Expr { expr: e, .. } = s {
                expr = Some(e.clone());
            }
            if let Stmt::While { cond, .. } = s {
                expr = Some(cond.clone());
            }
        }
        (tu.clone(), expr.unwrap())
    }

    #[test]
    fn array_reads_are_effect_free() {
        let (tu, e) = body_expr(
            "int f(int *a, int j, int n) { while (a[j] < a[j + 1]) { j = j + 1; } return j; }",
        );
        assert!(side_effect_free(&e, &tu));
    }

    #[test]
    fn assignment_is_an_effect() {
        let (tu, e) = body_expr("int f(int j) { j = j + 1; return j; }");
        assert!(!side_effect_free(&e, &tu));
    }

    #[test]
    fn call_is_an_effect() {
        let (tu, e) = body_expr("int f(int x) { rand() + 1; return x; }");
        assert!(!side_effect_free(&e, &tu));
    }

    #[test]
    fn boolean_shapes() {
        let (_, e) = body_expr("int f(int j, int n) { while (j < n) { j = j + 1; } return j; }");
        assert!(is_boolean_valued(&e));
        let (_, e) = body_expr("int f(int carry) { while (carry) { carry = 0; } return 0; }");
        assert!(!is_boolean_valued(&e));
        let (_, e) = body_expr("int f(int done) { while (!done) { done = 1; } return 0; }");
        assert!(is_boolean_valued(&e));
    }

    #[test]
    fn memory_reads_are_detected() {
        let (_, e) =
            body_expr("int f(int *a, int j) { while (a[j] < 3) { j = j + 1; } return j; }");
        assert!(contains_memory_read(&e));
        let (_, e) = body_expr("int f(int j, int n) { while (j < n) { j = j + 1; } return j; }");
        assert!(!contains_memory_read(&e));
    }
}
