//! Canonical pretty-printer: 4-space indent, one statement per line,
//! prototypes ahead of definitions. Parenthesization is conservative —
//! mixed bitwise/logical/comparison operands are always bracketed — and the
//! output re-parses to the same tree (checked by the round-trip suite).

use super::ast::*;

/// Render a translation unit as compilable C-subset text.
pub fn pretty_print(tu: &TranslationUnit) -> String {
    let mut out = String::new();
    for g in &tu.globals {
        out.push_str(&global_decl(g));
        out.push('\n');
    }
    let protos: Vec<&FunctionDef> = tu.functions.iter().filter(|f| f.name != "main").collect();
    if !tu.globals.is_empty() && !tu.functions.is_empty() {
        out.push('\n');
    }
    if !protos.is_empty() {
        for f in &protos {
            out.push_str(&signature(f));
            out.push_str(";\n");
        }
        out.push('\n');
    }
    for (i, f) in tu.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&signature(f));
        out.push_str(" {\n");
        print_block_body(&f.body, 1, &mut out);
        out.push_str("}\n");
    }
    out
}

fn signature(f: &FunctionDef) -> String {
    let params = if f.params.is_empty() {
        String::new()
    } else {
        f.params.iter().map(param).collect::<Vec<_>>().join(", ")
    };
    format!(
        "{} {}({})",
        type_prefix(&f.return_type),
        decorate(&f.return_type, &f.name),
        params
    )
    .trim_start()
    .to_string()
    .replace("  ", " ")
}

fn param(p: &Param) -> String {
    let mut s = String::new();
    if p.ty.is_register_hint {
        s.push_str("register ");
    }
    s.push_str(type_prefix(&p.ty));
    s.push(' ');
    s.push_str(&decorate(&p.ty, &p.name));
    s
}

fn type_prefix(ty: &CType) -> &'static str {
    match ty.base {
        BaseType::Int => "int",
        BaseType::UnsignedInt => "unsigned int",
        BaseType::Char => "char",
        BaseType::Void => "void",
    }
}

/// `name` with its pointer stars: `**a`, `*p`, `x`.
fn decorate(ty: &CType, name: &str) -> String {
    format!("{}{}", "*".repeat(ty.pointer_depth as usize), name)
}

fn global_decl(g: &GlobalDecl) -> String {
    let mut s = String::new();
    if g.is_static {
        s.push_str("static ");
    }
    s.push_str(type_prefix(&g.ty));
    s.push(' ');
    s.push_str(&decorate(&g.ty, &g.name));
    for d in &g.dims {
        s.push_str(&format!("[{}]", d));
    }
    if let Some(init) = &g.init {
        s.push_str(" = ");
        s.push_str(&expr_to_string(init));
    }
    s.push(';');
    s
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block_body(b: &Block, level: usize, out: &mut String) {
    for s in &b.stmts {
        print_stmt(s, level, out);
    }
}

fn print_stmt(s: &Stmt, level: usize, out: &mut String) {
    match s {
        Stmt::Expr { expr, .. } => {
            indent(level, out);
            out.push_str(&expr_to_string(expr));
            out.push_str(";\n");
        }
        Stmt::Block(b) => {
            indent(level, out);
            out.push_str("{\n");
            print_block_body(b, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        Stmt::If {
            cond,
            then_block,
            else_block,
            ..
        } => {
            indent(level, out);
            out.push_str(&format!("if ({}) {{\n", expr_to_string(cond)));
            print_block_body(then_block, level + 1, out);
            indent(level, out);
            match else_block {
                Some(e) => {
                    out.push_str("} else {\n");
                    print_block_body(e, level + 1, out);
                    indent(level, out);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        Stmt::While { cond, body, .. } => {
            indent(level, out);
            out.push_str(&format!("while ({}) {{\n", expr_to_string(cond)));
            print_block_body(body, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        Stmt::DoWhile { body, cond, .. } => {
            indent(level, out);
            out.push_str("do {\n");
            print_block_body(body, level + 1, out);
            indent(level, out);
            out.push_str(&format!("}} while ({});\n", expr_to_string(cond)));
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
            ..
        } => {
            indent(level, out);
            let mut header = String::from("for (");
            if let Some(i) = init {
                header.push_str(&expr_to_string(i));
            }
            header.push(';');
            if let Some(c) = cond {
                header.push(' ');
                header.push_str(&expr_to_string(c));
            }
            header.push(';');
            if let Some(st) = step {
                header.push(' ');
                header.push_str(&expr_to_string(st));
            }
            header.push(')');
            out.push_str(&header);
            out.push_str(" {\n");
            print_block_body(body, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        Stmt::Return { value, .. } => {
            indent(level, out);
            match value {
                Some(v) => out.push_str(&format!("return {};\n", expr_to_string(v))),
                None => out.push_str("return;\n"),
            }
        }
        Stmt::VarDecl {
            name,
            ty,
            dims,
            init,
            ..
        } => {
            indent(level, out);
            if ty.is_register_hint {
                out.push_str("register ");
            }
            out.push_str(type_prefix(ty));
            out.push(' ');
            out.push_str(&decorate(ty, name));
            for d in dims {
                out.push_str(&format!("[{}]", d));
            }
            if let Some(i) = init {
                out.push_str(" = ");
                out.push_str(&expr_to_string(i));
            }
            out.push_str(";\n");
        }
    }
}

/// Render a single statement (with nested blocks) at indent level 0;
/// used for change-report snippets.
pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    print_stmt(s, 0, &mut out);
    out
}

// precedence for printing decisions; higher binds tighter
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Assign { .. } => 2,
        Expr::Ternary { .. } => 3,
        Expr::Binary { op, .. } => match op {
            BinaryOp::LogOr => 4,
            BinaryOp::LogAnd => 5,
            BinaryOp::BitOr => 6,
            BinaryOp::BitAnd => 8,
            BinaryOp::Eq | BinaryOp::Ne => 9,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 10,
            BinaryOp::Shl | BinaryOp::Shr => 11,
            BinaryOp::Add | BinaryOp::Sub => 12,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 13,
        },
        Expr::Unary { .. } | Expr::Deref { .. } | Expr::AddrOf { .. } | Expr::Cast { .. } => 14,
        Expr::IncDec { op, .. } => {
            if op.is_prefix() {
                14
            } else {
                15
            }
        }
        Expr::Index { .. } | Expr::Call { .. } | Expr::SizeOf { .. } => 15,
        _ => 16,
    }
}

fn child(e: &Expr, needs_parens: bool) -> String {
    let s = expr_to_string(e);
    if needs_parens {
        format!("({})", s)
    } else {
        s
    }
}

/// Render one expression in canonical spacing.
pub fn expr_to_string(e: &Expr) -> String {
    match e {
        Expr::IntLit { value, .. } => value.to_string(),
        Expr::StrLit { value, .. } => format!("\"{}\"", super::lexer::encode_escapes(value, b'"')),
        Expr::CharLit { value, .. } => {
            format!("'{}'", super::lexer::encode_escapes(&[*value], b'\''))
        }
        Expr::Var { name, .. } => name.clone(),
        Expr::Unary { op, operand, .. } => {
            let sym = match op {
                UnaryOp::Neg => "-",
                UnaryOp::Not => "!",
                UnaryOp::BitNot => "~",
            };
            let mut inner = child(operand, prec(operand) < 14);
            // avoid gluing "- -x" into "--x" (and "&&" for address-of)
            if inner.starts_with(sym) {
                inner = format!("({})", expr_to_string(operand));
            }
            format!("{}{}", sym, inner)
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let p = prec(e);
            let mixed = |c: &Expr| -> bool {
                match (op, c) {
                    // always bracket bitwise operands of logical operators and
                    // comparison/shift operands of bitwise operators
                    (BinaryOp::LogAnd | BinaryOp::LogOr, Expr::Binary { op: co, .. }) => {
                        matches!(co, BinaryOp::BitAnd | BinaryOp::BitOr)
                    }
                    (BinaryOp::BitAnd | BinaryOp::BitOr, Expr::Binary { op: co, .. }) => !matches!(
                        co,
                        BinaryOp::Mul
                            | BinaryOp::Div
                            | BinaryOp::Rem
                            | BinaryOp::Add
                            | BinaryOp::Sub
                    ),
                    _ => false,
                }
            };
            let l = child(lhs, prec(lhs) < p || mixed(lhs));
            let r = child(rhs, prec(rhs) <= p || mixed(rhs));
            format!("{} {} {}", l, op.symbol(), r)
        }
        Expr::Assign {
            op, target, value, ..
        } => {
            let t = child(target, prec(target) < 14);
            let v = child(value, prec(value) < 2);
            format!("{} {} {}", t, op.symbol(), v)
        }
        Expr::IncDec { op, target, .. } => {
            let sym = if op.is_increment() { "++" } else { "--" };
            if op.is_prefix() {
                format!("{}{}", sym, child(target, prec(target) < 14))
            } else {
                format!("{}{}", child(target, prec(target) < 15), sym)
            }
        }
        Expr::Index { base, index, .. } => {
            format!(
                "{}[{}]",
                child(base, prec(base) < 15),
                expr_to_string(index)
            )
        }
        Expr::Deref { operand, .. } => {
            let mut inner = child(operand, prec(operand) < 14);
            if inner.starts_with('*') {
                inner = format!("({})", expr_to_string(operand));
            }
            format!("*{}", inner)
        }
        Expr::AddrOf { operand, .. } => {
            let mut inner = child(operand, prec(operand) < 14);
            if inner.starts_with('&') {
                inner = format!("({})", expr_to_string(operand));
            }
            format!("&{}", inner)
        }
        Expr::Call { name, args, .. } => {
            let rendered: Vec<String> = args.iter().map(expr_to_string).collect();
            format!("{}({})", name, rendered.join(", "))
        }
        Expr::Ternary {
            cond,
            then_val,
            else_val,
            ..
        } => {
            format!(
                "{} ? {} : {}",
                child(cond, prec(cond) <= 3),
                expr_to_string(then_val),
                child(else_val, prec(else_val) < 3)
            )
        }
        Expr::Cast { ty, operand, .. } => format!(
            "({} {}){}",
            type_prefix(ty),
            "*".repeat(ty.pointer_depth as usize),
            child(operand, prec(operand) < 14)
        )
        .replace(" )", ")"),
        Expr::SizeOf { ty, .. } => format!(
            "sizeof({} {})",
            type_prefix(ty),
            "*".repeat(ty.pointer_depth as usize)
        )
        .replace(" )", ")"),
    }
}
