//! Test-only support: deterministic random program generation and an
//! independent reference evaluator for precedence checks. Lives in the
//! library so both unit tests and the acceptance suite can drive it, but it
//! is not part of the public API surface.

use crate::frontend::ast::*;
use crate::span::SourceSpan;

/// SplitMix64; tiny and deterministic.
pub struct Gen {
    state: u64,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            state: seed.wrapping_add(0x9e3779b97f4a7c15),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n.max(1)
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.below(100) < percent
    }
}

fn sp() -> SourceSpan {
    SourceSpan::synthetic()
}

/// Generate a structurally valid translation unit with nesting depth at most
/// `max_depth`; every identifier resolves.
pub fn gen_translation_unit(seed: u64, max_depth: usize) -> TranslationUnit {
    let mut g = Gen::new(seed);
    let mut tu = TranslationUnit::default();

    tu.globals.push(GlobalDecl {
        name: "g0".into(),
        ty: CType::new(BaseType::Int, 0),
        dims: vec![],
        init: if g.chance(50) {
            Some(Expr::int(g.below(100) as i64))
        } else {
            None
        },
        is_static: g.chance(30),
        span: sp(),
    });
    tu.globals.push(GlobalDecl {
        name: "g1".into(),
        ty: CType::new(BaseType::Int, 0),
        dims: vec![8],
        init: None,
        is_static: false,
        span: sp(),
    });
    if g.chance(30) {
        tu.globals.push(GlobalDecl {
            name: "g2".into(),
            ty: CType::new(BaseType::Char, 0),
            dims: vec![3, 4],
            init: None,
            is_static: true,
            span: sp(),
        });
    }

    let helper_params = vec![
        Param {
            name: "a".into(),
            ty: CType::new(BaseType::Int, 0),
        },
        Param {
            name: "b".into(),
            ty: CType::new(BaseType::Int, 0).with_register(g.chance(40)),
        },
    ];
    let mut ctx = Ctx {
        g: &mut g,
        vars: vec!["g0".into(), "a".into(), "b".into()],
        arrays: vec!["g1".into()],
        fns: vec![],
        next_var: 0,
    };
    let helper_body = ctx.gen_block(max_depth.min(3));
    tu.functions.push(FunctionDef {
        name: "f0".into(),
        return_type: CType::new(BaseType::Int, 0),
        params: helper_params,
        body: helper_body,
        span: sp(),
    });

    let mut ctx = Ctx {
        g: &mut g,
        vars: vec!["g0".into()],
        arrays: vec!["g1".into()],
        fns: vec!["f0".into()],
        next_var: 100,
    };
    let main_body = ctx.gen_block(max_depth);
    tu.functions.push(FunctionDef {
        name: "main".into(),
        return_type: CType::new(BaseType::Int, 0),
        params: vec![],
        body: main_body,
        span: sp(),
    });
    tu
}

struct Ctx<'a> {
    g: &'a mut Gen,
    vars: Vec<String>,
    arrays: Vec<String>,
    fns: Vec<String>,
    next_var: usize,
}

impl<'a> Ctx<'a> {
    fn gen_block(&mut self, depth: usize) -> Block {
        let n = 1 + self.g.below(4) as usize;
        let outer_vars = self.vars.len();
        let outer_arrays = self.arrays.len();
        let mut stmts = Vec::new();
        for _ in 0..n {
            stmts.push(self.gen_stmt(depth));
        }
        self.vars.truncate(outer_vars);
        self.arrays.truncate(outer_arrays);
        Block::synthetic(stmts)
    }

    fn gen_stmt(&mut self, depth: usize) -> Stmt {
        let choice = if depth == 0 {
            self.g.below(4)
        } else {
            self.g.below(10)
        };
        match choice {
            0 => {
                let name = format!("v{}", self.next_var);
                self.next_var += 1;
                let base = match self.g.below(3) {
                    0 => BaseType::Int,
                    1 => BaseType::UnsignedInt,
                    _ => BaseType::Char,
                };
                let ty = CType::new(base, 0).with_register(self.g.chance(20));
                let init = if self.g.chance(60) {
                    Some(self.gen_expr(depth))
                } else {
                    None
                };
                self.vars.push(name.clone());
                Stmt::VarDecl {
                    name,
                    ty,
                    dims: vec![],
                    init,
                    span: sp(),
                }
            }
            1 => {
                let target = Expr::var(&self.pick_var());
                let value = self.gen_expr(depth);
                let op = match self.g.below(4) {
                    0 => AssignOp::AddAssign,
                    1 => AssignOp::SubAssign,
                    _ => AssignOp::Assign,
                };
                Stmt::Expr {
                    expr: Expr::Assign {
                        op,
                        target: Box::new(target),
                        value: Box::new(value),
                        span: sp(),
                    },
                    span: sp(),
                }
            }
            2 => Stmt::Expr {
                expr: Expr::IncDec {
                    op: if self.g.chance(50) {
                        IncDecOp::PostInc
                    } else {
                        IncDecOp::PostDec
                    },
                    target: Box::new(Expr::var(&self.pick_var())),
                    span: sp(),
                },
                span: sp(),
            },
            3 => Stmt::Return {
                value: Some(self.gen_expr(depth)),
                span: sp(),
            },
            4 => Stmt::If {
                cond: self.gen_expr(depth - 1),
                then_block: self.gen_block(depth - 1),
                else_block: if self.g.chance(40) {
                    Some(self.gen_block(depth - 1))
                } else {
                    None
                },
                span: sp(),
            },
            5 => Stmt::While {
                cond: self.gen_expr(depth - 1),
                body: self.gen_block(depth - 1),
                span: sp(),
            },
            6 => {
                let v = self.pick_var();
                Stmt::For {
                    init: Some(Expr::Assign {
                        op: AssignOp::Assign,
                        target: Box::new(Expr::var(&v)),
                        value: Box::new(Expr::int(self.g.below(5) as i64)),
                        span: sp(),
                    }),
                    cond: Some(Expr::binary(
                        BinaryOp::Le,
                        Expr::var(&v),
                        Expr::int(self.g.below(9) as i64),
                    )),
                    step: Some(Expr::IncDec {
                        op: IncDecOp::PostInc,
                        target: Box::new(Expr::var(&v)),
                        span: sp(),
                    }),
                    body: self.gen_block(depth - 1),
                    span: sp(),
                }
            }
            7 => Stmt::DoWhile {
                body: self.gen_block(depth - 1),
                cond: self.gen_expr(depth - 1),
                span: sp(),
            },
            8 => Stmt::Block(self.gen_block(depth - 1)),
            _ => {
                let name = format!("v{}", self.next_var);
                self.next_var += 1;
                self.arrays.push(name.clone());
                Stmt::VarDecl {
                    name,
                    ty: CType::new(BaseType::Int, 0),
                    dims: vec![1 + self.g.below(8) as i64],
                    init: None,
                    span: sp(),
                }
            }
        }
    }

    fn pick_var(&mut self) -> String {
        let i = self.g.below(self.vars.len() as u64) as usize;
        self.vars[i].clone()
    }

    fn gen_expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.g.chance(25) {
            return match self.g.below(3) {
                0 => Expr::int(self.g.below(100) as i64),
                1 => Expr::var(&self.pick_var()),
                _ => Expr::CharLit {
                    value: b'a' + self.g.below(26) as u8,
                    span: sp(),
                },
            };
        }
        match self.g.below(12) {
            0..=4 => {
                let ops = [
                    BinaryOp::Add,
                    BinaryOp::Sub,
                    BinaryOp::Mul,
                    BinaryOp::Div,
                    BinaryOp::Rem,
                    BinaryOp::Lt,
                    BinaryOp::Le,
                    BinaryOp::Gt,
                    BinaryOp::Ge,
                    BinaryOp::Eq,
                    BinaryOp::Ne,
                    BinaryOp::LogAnd,
                    BinaryOp::LogOr,
                    BinaryOp::BitAnd,
                    BinaryOp::BitOr,
                    BinaryOp::Shl,
                    BinaryOp::Shr,
                ];
                let op = ops[self.g.below(ops.len() as u64) as usize];
                Expr::binary(op, self.gen_expr(depth - 1), self.gen_expr(depth - 1))
            }
            5 => {
                let op = match self.g.below(3) {
                    0 => UnaryOp::Neg,
                    1 => UnaryOp::Not,
                    _ => UnaryOp::BitNot,
                };
                Expr::Unary {
                    op,
                    operand: Box::new(self.gen_expr(depth - 1)),
                    span: sp(),
                }
            }
            6 => Expr::Index {
                base: Box::new(Expr::var(&self.arrays[0].clone())),
                index: Box::new(self.gen_expr(depth - 1)),
                span: sp(),
            },
            7 if !self.fns.is_empty() => Expr::Call {
                name: self.fns[0].clone(),
                args: vec![self.gen_expr(depth - 1), self.gen_expr(depth - 1)],
                span: sp(),
            },
            7 => Expr::Call {
                name: "rand".into(),
                args: vec![],
                span: sp(),
            },
            8 => Expr::Ternary {
                cond: Box::new(self.gen_expr(depth - 1)),
                then_val: Box::new(self.gen_expr(depth - 1)),
                else_val: Box::new(self.gen_expr(depth - 1)),
                span: sp(),
            },
            9 => {
                let base = match self.g.below(3) {
                    0 => BaseType::Int,
                    1 => BaseType::UnsignedInt,
                    _ => BaseType::Char,
                };
                Expr::Cast {
                    ty: CType::new(base, 0),
                    operand: Box::new(self.gen_expr(depth - 1)),
                    span: sp(),
                }
            }
            10 => Expr::SizeOf {
                ty: CType::new(
                    if self.g.chance(50) {
                        BaseType::Int
                    } else {
                        BaseType::Char
                    },
                    self.g.below(2) as u8,
                ),
                span: sp(),
            },
            _ => Expr::AddrOf {
                operand: Box::new(Expr::var(&self.pick_var())),
                span: sp(),
            },
        }
    }
}

// ---- flat precedence expressions and the reference evaluator ---------------

pub const FLAT_OPS: [&str; 7] = ["&&", "||", "&", "|", "<", "+", "*"];

/// Random parenthesis-free expression text over [`FLAT_OPS`] with small
/// integer leaves, e.g. `3 && 5 | 2 < 7 * 0`.
pub fn gen_flat_expr(seed: u64) -> String {
    let mut g = Gen::new(seed);
    let terms = 2 + g.below(10);
    let mut out = String::new();
    for i in 0..terms {
        if i > 0 {
            out.push(' ');
            out.push_str(FLAT_OPS[g.below(FLAT_OPS.len() as u64) as usize]);
            out.push(' ');
        }
        out.push_str(&g.below(10).to_string());
    }
    out
}

/// Independent reference evaluator for flat expressions, written directly
/// from the C precedence table (|| < && < | < & < relational < additive <
/// multiplicative). Arithmetic wraps in 64 bits; the result is reinterpreted
/// as a 32-bit int like a value returned from `int main`.
pub fn reference_eval(src: &str) -> i32 {
    let tokens: Vec<&str> = src.split_whitespace().collect();
    let mut pos = 0usize;
    let v = eval_level(&tokens, &mut pos, 0);
    v as i32
}

fn eval_level(tokens: &[&str], pos: &mut usize, level: usize) -> i64 {
    // loosest first
    const LEVELS: [&[&str]; 7] = [&["||"], &["&&"], &["|"], &["&"], &["<"], &["+"], &["*"]];
    if level == LEVELS.len() {
        let t = tokens[*pos];
        *pos += 1;
        return t.parse().expect("integer leaf");
    }
    let mut acc = eval_level(tokens, pos, level + 1);
    while *pos < tokens.len() && LEVELS[level].contains(&tokens[*pos]) {
        let op = tokens[*pos];
        *pos += 1;
        let rhs = eval_level(tokens, pos, level + 1);
        acc = match op {
            "||" => i64::from(acc != 0 || rhs != 0),
            "&&" => i64::from(acc != 0 && rhs != 0),
            "|" => acc | rhs,
            "&" => acc & rhs,
            "<" => i64::from(acc < rhs),
            "+" => acc.wrapping_add(rhs),
            "*" => acc.wrapping_mul(rhs),
            _ => unreachable!(),
        };
    }
    acc
}
