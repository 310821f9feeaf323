//! Canonical loop recognition for the count-down and memset rewrites.

use super::purity::{contains_call, expr_vars, write_set};
use crate::frontend::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopDir {
    Up,
    Down,
}

/// A `for (v = A; v <op> B; v±1)` loop in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalLoop {
    pub var: String,
    pub init: Expr,
    pub bound: Expr,
    pub dir: LoopDir,
    /// `<=`/`>=` rather than `<`/`>`
    pub inclusive: bool,
    pub step1: bool,
    pub var_written_in_body: bool,
    pub bound_loop_invariant: bool,
}

/// Recognize the canonical shape of a `for` statement; `None` for anything
/// else (non-`for` statements included).
pub fn loop_shape(s: &Stmt) -> Option<CanonicalLoop> {
    let Stmt::For {
        init,
        cond,
        step,
        body,
        ..
    } = s
    else {
        return None;
    };
    let init = init.as_ref()?;
    let cond = cond.as_ref()?;
    let step = step.as_ref()?;

    // v = A
    let Expr::Assign {
        op: AssignOp::Assign,
        target,
        value,
        ..
    } = init
    else {
        return None;
    };
    let Expr::Var { name: var, .. } = target.as_ref() else {
        return None;
    };

    // v <op> B with v on the left
    let Expr::Binary { op, lhs, rhs, .. } = cond else {
        return None;
    };
    let Expr::Var { name: cond_var, .. } = lhs.as_ref() else {
        return None;
    };
    if cond_var != var {
        return None;
    }
    let (dir, inclusive) = match op {
        BinaryOp::Le => (LoopDir::Up, true),
        BinaryOp::Lt => (LoopDir::Up, false),
        BinaryOp::Ge => (LoopDir::Down, true),
        BinaryOp::Gt => (LoopDir::Down, false),
        BinaryOp::Ne => (LoopDir::Down, false),
        _ => return None,
    };

    let step1 = step_is_unit(step, var, dir);
    if !step1 {
        return None;
    }

    let ws = write_set(&body.stmts, &|_| true);
    let var_written_in_body = ws.named.contains(var);

    let bound = rhs.as_ref().clone();
    let bound_vars = expr_vars(&bound);
    let bound_loop_invariant =
        !contains_call(&bound) && bound_vars.iter().all(|u| u != var && !ws.named.contains(u));

    Some(CanonicalLoop {
        var: var.clone(),
        init: value.as_ref().clone(),
        bound,
        dir,
        inclusive,
        step1,
        var_written_in_body,
        bound_loop_invariant,
    })
}

fn step_is_unit(step: &Expr, var: &str, dir: LoopDir) -> bool {
    let want_inc = dir == LoopDir::Up;
    match step {
        Expr::IncDec { op, target, .. } => {
            matches!(target.as_ref(), Expr::Var { name, .. } if name == var)
                && op.is_increment() == want_inc
        }
        // v += 1 / v -= 1
        Expr::Assign {
            op: AssignOp::AddAssign,
            target,
            value,
            ..
        } if want_inc => {
            matches!(target.as_ref(), Expr::Var { name, .. } if name == var)
                && value.as_int_literal() == Some(1)
        }
        Expr::Assign {
            op: AssignOp::SubAssign,
            target,
            value,
            ..
        } if !want_inc => {
            matches!(target.as_ref(), Expr::Var { name, .. } if name == var)
                && value.as_int_literal() == Some(1)
        }
        // v = v + 1 / v = v - 1
        Expr::Assign {
            op: AssignOp::Assign,
            target,
            value,
            ..
        } => {
            let Expr::Var { name, .. } = target.as_ref() else {
                return false;
            };
            if name != var {
                return false;
            }
            let Expr::Binary { op, lhs, rhs, .. } = value.as_ref() else {
                return false;
            };
            let op_ok = (*op == BinaryOp::Add && want_inc) || (*op == BinaryOp::Sub && !want_inc);
            op_ok
                && matches!(lhs.as_ref(), Expr::Var { name: n, .. } if n == var)
                && rhs.as_int_literal() == Some(1)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_text;

    fn first_for(src: &str) -> Stmt {
        let tu = parse_text(src, "t.c").unwrap();
        let mut found = None;
        for s in &tu.functions[0].body.stmts {
            s.walk(&mut |n| {
                if matches!(n, Stmt::For { .. }) && found.is_none() {
                    found = Some(n.clone());
                }
            });
        }
        found.expect("no for loop in source")
    }

    #[test]
    fn recognizes_inclusive_up_loop() {
        let s = first_for("void f(int n) { int i; for (i = 1; i <= n; i++) { rand(); } }");
        let c = loop_shape(&s).unwrap();
        assert_eq!(c.var, "i");
        assert_eq!(c.init.as_int_literal(), Some(1));
        assert_eq!(c.dir, LoopDir::Up);
        assert!(c.inclusive && c.step1);
        assert!(!c.var_written_in_body);
        assert!(c.bound_loop_invariant);
    }

    #[test]
    fn down_loops_are_reported_as_down() {
        let s = first_for("void f(int n) { int i; for (i = n / 2; i >= 1; i--) { rand(); } }");
        let c = loop_shape(&s).unwrap();
        assert_eq!(c.dir, LoopDir::Down);
    }

    #[test]
    fn non_unit_step_is_out_of_pattern() {
        let s = first_for("void f(int n) { int i; for (i = 0; i < n; i += 2) { rand(); } }");
        assert!(loop_shape(&s).is_none());
    }

    #[test]
    fn body_writes_to_var_are_flagged() {
        let s = first_for("void f(int n) { int i; for (i = 1; i <= n; i++) { i = i + 1; } }");
        let c = loop_shape(&s).unwrap();
        assert!(c.var_written_in_body);
    }

    #[test]
    fn bound_assigned_in_body_is_not_invariant() {
        let s = first_for("void f(int n) { int i; for (i = 1; i <= n; i++) { n = n - 1; } }");
        let c = loop_shape(&s).unwrap();
        assert!(!c.bound_loop_invariant);
    }

    #[test]
    fn bound_with_call_is_not_invariant() {
        let s =
            first_for("void f(char *s) { int i; for (i = 1; i <= strlen(s); i++) { rand(); } }");
        let c = loop_shape(&s).unwrap();
        assert!(!c.bound_loop_invariant);
    }
}
