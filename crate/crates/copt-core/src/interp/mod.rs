//! Deterministic tree-walking interpreter for the C subset.
//!
//! Programs run with a seeded linear-congruential `rand`, a configurable
//! `time` value and an abstract cost model, so two runs with the same
//! configuration produce byte-identical results. Out-of-bounds accesses,
//! use-after-free and division by zero are runtime errors instead of
//! undefined behavior.

pub mod cost;
pub mod memory;

use std::collections::HashMap;
use std::sync::Arc;

use crate::frontend::ast::*;
use crate::span::SourceSpan;

pub use cost::{
    cost_attribution, AttributionRow, CostCategory, CostModel, CostReport, GroupBy,
    COST_CATEGORIES, COST_MODEL_VERSION,
};
pub use memory::{ElemKind, Memory, RuntimeError, RuntimeErrorKind, Value};

// one interpreter frame costs a few hundred bytes of host stack, so this
// also keeps deep recursion within a 2 MiB thread stack
const RECURSION_LIMIT: usize = 1000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Initial LCG state; programs reseed via `srand`.
    pub seed: u32,
    /// Value returned by the `time` builtin.
    pub time_value: i64,
    pub argv: Vec<String>,
    pub step_limit: u64,
    pub cost_model: CostModel,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::with_seed(1)
    }
}

impl RunConfig {
    /// Seed both the RNG state and the `time` value, so the idiom
    /// `srand(time(0))` reseeds to the configured seed.
    pub fn with_seed(seed: u32) -> RunConfig {
        RunConfig {
            seed,
            time_value: seed as i64,
            argv: Vec::new(),
            step_limit: 50_000_000,
            cost_model: CostModel::default(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecResult {
    pub stdout: Vec<u8>,
    pub exit_code: i32,
    pub cost: CostReport,
    /// Statements executed (loop back-edges count as one step each).
    pub steps: u64,
    /// Function entry/exit trace lines (TSV), when enabled.
    pub trace: Vec<String>,
}

/// Execute `entry` in `tu` under `config`.
pub fn run(
    tu: &TranslationUnit,
    entry: &str,
    config: &RunConfig,
) -> Result<ExecResult, RuntimeError> {
    let mut interp = Interp::new(tu, config);
    interp.setup_globals()?;
    let entry_fn = tu
        .function(entry)
        .ok_or_else(|| RuntimeError::new(RuntimeErrorKind::UnknownEntry(entry.to_string())))?;
    let args = interp.entry_args(entry_fn)?;
    let span = entry_fn.span.clone();
    let result = interp.call_user(entry_fn, args, &span)?;
    Ok(interp.finish(result))
}

enum Flow {
    Normal,
    Return(Value),
}

#[derive(Debug, Clone, Copy)]
struct Binding {
    seg: u32,
    /// register-hinted variables cost nothing to access
    free_access: bool,
    is_array: bool,
    /// element step for the pointer produced by referencing an array
    stride: u32,
}

struct Frame {
    scopes: Vec<HashMap<String, Binding>>,
}

struct Interp<'a> {
    tu: &'a TranslationUnit,
    fns: HashMap<&'a str, &'a FunctionDef>,
    globals: HashMap<String, Binding>,
    mem: Memory,
    frames: Vec<Frame>,
    rng_state: u32,
    stdout: Vec<u8>,
    steps: u64,
    config: &'a RunConfig,
    counts: [u64; COST_CATEGORIES.len()],
    fn_costs: HashMap<String, u64>,
    loc_costs: HashMap<(Arc<str>, u32), u64>,
    cur_fn: String,
    pending_fn: u64,
    cur_loc: (Arc<str>, u32),
    pending_loc: u64,
    str_cache: HashMap<usize, u32>,
    trace: Vec<String>,
    weighted_total: u64,
}

impl<'a> Interp<'a> {
    fn new(tu: &'a TranslationUnit, config: &'a RunConfig) -> Interp<'a> {
        let mut fns = HashMap::new();
        for f in &tu.functions {
            fns.insert(f.name.as_str(), f);
        }
        Interp {
            tu,
            fns,
            globals: HashMap::new(),
            mem: Memory::new(),
            frames: Vec::new(),
            rng_state: config.seed,
            stdout: Vec::new(),
            steps: 0,
            config,
            counts: [0; COST_CATEGORIES.len()],
            fn_costs: HashMap::new(),
            loc_costs: HashMap::new(),
            cur_fn: "<startup>".to_string(),
            pending_fn: 0,
            cur_loc: (Arc::from(""), 0),
            pending_loc: 0,
            str_cache: HashMap::new(),
            trace: Vec::new(),
            weighted_total: 0,
        }
    }

    // ---- cost accounting -------------------------------------------------

    fn charge(&mut self, cat: CostCategory, n: u64) {
        let idx = COST_CATEGORIES.iter().position(|c| *c == cat).unwrap();
        self.counts[idx] += n;
        let w = self.config.cost_model.weight(cat) * n;
        self.pending_fn += w;
        self.pending_loc += w;
        self.weighted_total += w;
    }

    fn flush_fn(&mut self) {
        if self.pending_fn > 0 {
            *self.fn_costs.entry(self.cur_fn.clone()).or_insert(0) += self.pending_fn;
            self.pending_fn = 0;
        }
    }

    fn flush_loc(&mut self) {
        if self.pending_loc > 0 {
            *self.loc_costs.entry(self.cur_loc.clone()).or_insert(0) += self.pending_loc;
            self.pending_loc = 0;
        }
    }

    fn set_loc(&mut self, span: &SourceSpan) {
        if self.cur_loc.1 != span.line_start || self.cur_loc.0 != span.file {
            self.flush_loc();
            self.cur_loc = (span.file.clone(), span.line_start);
        }
    }

    fn switch_fn(&mut self, name: &str) -> String {
        self.flush_fn();
        std::mem::replace(&mut self.cur_fn, name.to_string())
    }

    fn restore_fn(&mut self, prev: String) {
        self.flush_fn();
        self.cur_fn = prev;
    }

    fn step(&mut self, span: &SourceSpan) -> Result<(), RuntimeError> {
        self.steps += 1;
        if self.steps > self.config.step_limit {
            return Err(RuntimeError::at(RuntimeErrorKind::StepLimitExceeded, span));
        }
        Ok(())
    }

    // ---- setup -----------------------------------------------------------

    fn elem_kind(ty: &CType, dims: usize) -> ElemKind {
        if ty.pointer_depth > 0 {
            ElemKind::Ptr
        } else {
            match ty.base {
                BaseType::Char => ElemKind::Char,
                BaseType::UnsignedInt => ElemKind::UInt,
                _ => {
                    let _ = dims;
                    ElemKind::Int
                }
            }
        }
    }

    fn setup_globals(&mut self) -> Result<(), RuntimeError> {
        for g in &self.tu.globals {
            let kind = Self::elem_kind(&g.ty, g.dims.len());
            let (len, stride) = match g.dims.as_slice() {
                [] => (1usize, 1u32),
                [n] => (*n as usize, 1),
                [a, b] => ((*a as usize) * (*b as usize), *b as u32),
                _ => unreachable!("parser caps dimensions at 2"),
            };
            let seg = self
                .mem
                .alloc(kind, len.max(if g.dims.is_empty() { 1 } else { len }));
            if let Some(init) = &g.init {
                let v = match init {
                    Expr::IntLit { value, .. } => Value::Int(*value),
                    Expr::CharLit { value, .. } => Value::Int(*value as i64),
                    Expr::Unary {
                        op: UnaryOp::Neg,
                        operand,
                        ..
                    } => Value::Int(-operand.as_int_literal().unwrap_or(0)),
                    _ => Value::Int(0),
                };
                self.mem.store(seg, 0, v, &g.span)?;
            }
            self.globals.insert(
                g.name.clone(),
                Binding {
                    seg,
                    free_access: false,
                    is_array: !g.dims.is_empty(),
                    stride,
                },
            );
        }
        Ok(())
    }

    fn entry_args(&mut self, f: &FunctionDef) -> Result<Vec<Value>, RuntimeError> {
        let mut args = Vec::new();
        if !f.params.is_empty() {
            let all: Vec<String> = std::iter::once("program".to_string())
                .chain(self.config.argv.iter().cloned())
                .collect();
            args.push(Value::Int(all.len() as i64));
            if f.params.len() >= 2 {
                let mut ptrs = Vec::new();
                for s in &all {
                    let seg = self.mem.alloc(ElemKind::Char, s.len() + 1);
                    for (i, b) in s.bytes().enumerate() {
                        self.mem.store(
                            seg,
                            i as i64,
                            Value::Int(b as i64),
                            &SourceSpan::synthetic(),
                        )?;
                    }
                    ptrs.push(Value::ptr(seg, 0));
                }
                let argv_seg = self.mem.alloc(ElemKind::Ptr, ptrs.len() + 1);
                for (i, p) in ptrs.iter().enumerate() {
                    self.mem
                        .store(argv_seg, i as i64, *p, &SourceSpan::synthetic())?;
                }
                args.push(Value::ptr(argv_seg, 0));
            }
        }
        Ok(args)
    }

    fn finish(mut self, result: Value) -> ExecResult {
        self.flush_fn();
        self.flush_loc();
        let per_function: std::collections::BTreeMap<String, u64> =
            self.fn_costs.into_iter().collect();
        let per_location: std::collections::BTreeMap<String, u64> = self
            .loc_costs
            .into_iter()
            .map(|((file, line), v)| (format!("{}:{}", file, line), v))
            .collect();
        let cost = CostReport::from_tallies(
            self.counts,
            per_function,
            per_location,
            &self.config.cost_model,
        );
        let exit_code = match result {
            Value::Int(v) => v as i32,
            Value::Ptr { .. } => 0,
        };
        ExecResult {
            stdout: self.stdout,
            exit_code,
            cost,
            steps: self.steps,
            trace: self.trace,
        }
    }

    // ---- calls -----------------------------------------------------------

    fn call_user(
        &mut self,
        f: &'a FunctionDef,
        args: Vec<Value>,
        span: &SourceSpan,
    ) -> Result<Value, RuntimeError> {
        if self.frames.len() >= RECURSION_LIMIT {
            return Err(RuntimeError::at(RuntimeErrorKind::RecursionLimit, span));
        }
        let prev = self.switch_fn(&f.name);
        self.charge(CostCategory::CallOverhead, 1);
        if self.config.trace {
            self.trace
                .push(format!("enter\t{}\t{}", f.name, self.weighted_total));
        }

        let mut scope = HashMap::new();
        for (i, p) in f.params.iter().enumerate() {
            let kind = Self::elem_kind(&p.ty, 0);
            let seg = self.mem.alloc(kind, 1);
            let v = args.get(i).copied().unwrap_or(Value::Int(0));
            self.mem.store(seg, 0, v, span)?;
            scope.insert(
                p.name.clone(),
                Binding {
                    seg,
                    free_access: p.ty.is_register_hint,
                    is_array: false,
                    stride: 1,
                },
            );
        }
        self.frames.push(Frame {
            scopes: vec![scope],
        });

        let flow = self.exec_block_scoped(&f.body);
        self.frames.pop();
        if self.config.trace {
            self.trace
                .push(format!("exit\t{}\t{}", f.name, self.weighted_total));
        }
        let flow = flow?;
        self.restore_fn(prev);

        let v = match flow {
            Flow::Return(v) => v,
            Flow::Normal => Value::Int(0),
        };
        // scalar returns reinterpret per the declared return type
        Ok(match (v, f.return_type.pointer_depth, f.return_type.base) {
            (Value::Int(raw), 0, BaseType::Int) => Value::Int(raw as i32 as i64),
            (Value::Int(raw), 0, BaseType::UnsignedInt) => Value::Int(raw as u32 as i64),
            (Value::Int(raw), 0, BaseType::Char) => Value::Int(raw as i8 as i64),
            (other, _, _) => other,
        })
    }

    fn lookup(&self, name: &str) -> Option<Binding> {
        if let Some(frame) = self.frames.last() {
            for scope in frame.scopes.iter().rev() {
                if let Some(b) = scope.get(name) {
                    return Some(*b);
                }
            }
        }
        self.globals.get(name).copied()
    }

    // ---- statements ------------------------------------------------------

    fn exec_block_scoped(&mut self, b: &'a Block) -> Result<Flow, RuntimeError> {
        if let Some(frame) = self.frames.last_mut() {
            frame.scopes.push(HashMap::new());
        }
        let mut flow = Flow::Normal;
        for s in &b.stmts {
            flow = self.exec_stmt(s)?;
            if matches!(flow, Flow::Return(_)) {
                break;
            }
        }
        if let Some(frame) = self.frames.last_mut() {
            frame.scopes.pop();
        }
        Ok(flow)
    }

    fn exec_stmt(&mut self, s: &'a Stmt) -> Result<Flow, RuntimeError> {
        self.step(s.span())?;
        self.set_loc(s.span());
        match s {
            Stmt::Expr { expr, .. } => {
                self.eval(expr)?;
                Ok(Flow::Normal)
            }
            Stmt::Block(b) => self.exec_block_scoped(b),
            Stmt::If {
                cond,
                then_block,
                else_block,
                ..
            } => {
                let c = self.eval(cond)?;
                self.charge(CostCategory::Branch, 1);
                if c.truthy() {
                    self.exec_block_scoped(then_block)
                } else if let Some(e) = else_block {
                    self.exec_block_scoped(e)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Stmt::While { cond, body, span } => loop {
                self.set_loc(span);
                let c = self.eval(cond)?;
                self.charge(CostCategory::Branch, 1);
                if !c.truthy() {
                    return Ok(Flow::Normal);
                }
                if let Flow::Return(v) = self.exec_block_scoped(body)? {
                    return Ok(Flow::Return(v));
                }
                self.charge(CostCategory::LoopBackEdge, 1);
                self.step(span)?;
            },
            Stmt::DoWhile { body, cond, span } => loop {
                if let Flow::Return(v) = self.exec_block_scoped(body)? {
                    return Ok(Flow::Return(v));
                }
                self.set_loc(span);
                let c = self.eval(cond)?;
                self.charge(CostCategory::Branch, 1);
                if !c.truthy() {
                    return Ok(Flow::Normal);
                }
                self.charge(CostCategory::LoopBackEdge, 1);
                self.step(span)?;
            },
            Stmt::For {
                init,
                cond,
                step,
                body,
                span,
            } => {
                if let Some(i) = init {
                    self.eval(i)?;
                }
                loop {
                    self.set_loc(span);
                    if let Some(c) = cond {
                        let v = self.eval(c)?;
                        self.charge(CostCategory::Branch, 1);
                        if !v.truthy() {
                            return Ok(Flow::Normal);
                        }
                    }
                    if let Flow::Return(v) = self.exec_block_scoped(body)? {
                        return Ok(Flow::Return(v));
                    }
                    self.set_loc(span);
                    if let Some(st) = step {
                        self.eval(st)?;
                    }
                    self.charge(CostCategory::LoopBackEdge, 1);
                    self.step(span)?;
                }
            }
            Stmt::Return { value, .. } => {
                let v = match value {
                    Some(e) => self.eval(e)?,
                    None => Value::Int(0),
                };
                Ok(Flow::Return(v))
            }
            Stmt::VarDecl {
                name,
                ty,
                dims,
                init,
                span,
            } => {
                let kind = Self::elem_kind(ty, dims.len());
                let (len, stride) = match dims.as_slice() {
                    [] => (1usize, 1u32),
                    [n] => (*n as usize, 1),
                    [a, b] => ((*a as usize) * (*b as usize), *b as u32),
                    _ => unreachable!(),
                };
                let seg = self.mem.alloc(kind, len);
                let binding = Binding {
                    seg,
                    free_access: ty.is_register_hint,
                    is_array: !dims.is_empty(),
                    stride,
                };
                if let Some(init) = init {
                    if !dims.is_empty() {
                        let Expr::StrLit { value, .. } = init else {
                            return Err(RuntimeError::at(
                                RuntimeErrorKind::TypeMismatch(
                                    "array initializer must be a string".into(),
                                ),
                                span,
                            ));
                        };
                        if value.len() + 1 > len {
                            return Err(RuntimeError::at(
                                RuntimeErrorKind::OutOfBounds {
                                    segment: seg,
                                    offset: value.len() as i64,
                                },
                                span,
                            ));
                        }
                        for (i, b) in value.iter().enumerate() {
                            self.mem.store(seg, i as i64, Value::Int(*b as i64), span)?;
                        }
                        self.charge(CostCategory::Store, 1);
                    } else {
                        let v = self.eval(init)?;
                        self.mem.store(seg, 0, v, span)?;
                        if !binding.free_access {
                            self.charge(CostCategory::Store, 1);
                        }
                    }
                }
                let frame = self
                    .frames
                    .last_mut()
                    .expect("declaration outside a function");
                frame
                    .scopes
                    .last_mut()
                    .unwrap()
                    .insert(name.clone(), binding);
                Ok(Flow::Normal)
            }
        }
    }

    // ---- expressions -----------------------------------------------------

    fn eval(&mut self, e: &'a Expr) -> Result<Value, RuntimeError> {
        match e {
            Expr::IntLit { value, .. } => Ok(Value::Int(*value)),
            Expr::CharLit { value, .. } => Ok(Value::Int(*value as i64)),
            Expr::StrLit { value, .. } => {
                let key = value.as_ptr() as usize;
                if let Some(seg) = self.str_cache.get(&key) {
                    return Ok(Value::ptr(*seg, 0));
                }
                let seg = self.mem.alloc(ElemKind::Char, value.len() + 1);
                for (i, b) in value.iter().enumerate() {
                    self.mem
                        .store(seg, i as i64, Value::Int(*b as i64), e.span())?;
                }
                self.str_cache.insert(key, seg);
                Ok(Value::ptr(seg, 0))
            }
            Expr::Var { name, span } => {
                if let Some(b) = self.lookup(name) {
                    if !b.free_access {
                        self.charge(CostCategory::Load, 1);
                    }
                    if b.is_array {
                        Ok(Value::Ptr {
                            seg: b.seg,
                            off: 0,
                            stride: b.stride,
                        })
                    } else {
                        self.mem.load(b.seg, 0, span)
                    }
                } else if is_builtin_value(name) {
                    Ok(Value::Int(0))
                } else {
                    Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch(format!("unbound identifier `{}`", name)),
                        span,
                    ))
                }
            }
            Expr::Unary { op, operand, span } => {
                let v = self.eval(operand)?;
                self.charge(CostCategory::Arith, 1);
                match (op, v) {
                    (UnaryOp::Neg, Value::Int(i)) => Ok(Value::Int(i.wrapping_neg())),
                    (UnaryOp::Not, v) => Ok(Value::Int(if v.truthy() { 0 } else { 1 })),
                    (UnaryOp::BitNot, Value::Int(i)) => Ok(Value::Int(!i)),
                    _ => Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("arithmetic on pointer".into()),
                        span,
                    )),
                }
            }
            Expr::Binary { op, lhs, rhs, span } => self.eval_binary(*op, lhs, rhs, span),
            Expr::Assign {
                op,
                target,
                value,
                span,
            } => {
                if let Some(bin) = op.binary_op() {
                    let place = self.eval_place(target)?;
                    if !place.free {
                        self.charge(CostCategory::Load, 1);
                    }
                    let old = self.mem.load(place.seg, place.off, span)?;
                    let rhs = self.eval(value)?;
                    let combined = self.apply_binary(bin, old, rhs, lhs_is_zero(value), span)?;
                    if !place.free {
                        self.charge(CostCategory::Store, 1);
                    }
                    self.store_place(&place, combined, span)
                } else {
                    let v = self.eval(value)?;
                    let place = self.eval_place(target)?;
                    if !place.free {
                        self.charge(CostCategory::Store, 1);
                    }
                    self.store_place(&place, v, span)
                }
            }
            Expr::IncDec { op, target, span } => {
                let place = self.eval_place(target)?;
                if !place.free {
                    self.charge(CostCategory::Load, 1);
                    self.charge(CostCategory::Store, 1);
                }
                self.charge(CostCategory::Arith, 1);
                let old = self.mem.load(place.seg, place.off, span)?;
                let Value::Int(i) = old else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("++/-- on pointer".into()),
                        span,
                    ));
                };
                let delta = if op.is_increment() { 1 } else { -1 };
                let new = self.store_place(&place, Value::Int(i.wrapping_add(delta)), span)?;
                Ok(if op.is_prefix() { new } else { old })
            }
            Expr::Index { base, index, span } => {
                let b = self.eval(base)?;
                let idx = self.eval_int(index)?;
                match b {
                    Value::Ptr { seg, off, stride } if stride > 1 => Ok(Value::Ptr {
                        seg,
                        off: off + idx * stride as i64,
                        stride: 1,
                    }),
                    Value::Ptr { seg, off, .. } => {
                        self.charge(CostCategory::Load, 1);
                        self.mem.load(seg, off + idx, span)
                    }
                    Value::Int(_) => Err(RuntimeError::at(RuntimeErrorKind::NullDeref, span)),
                }
            }
            Expr::Deref { operand, span } => {
                let v = self.eval(operand)?;
                match v {
                    Value::Ptr { seg, off, .. } => {
                        self.charge(CostCategory::Load, 1);
                        self.mem.load(seg, off, span)
                    }
                    Value::Int(_) => Err(RuntimeError::at(RuntimeErrorKind::NullDeref, span)),
                }
            }
            Expr::AddrOf { operand, .. } => {
                let place = self.eval_place(operand)?;
                Ok(Value::ptr(place.seg, place.off))
            }
            Expr::Call { name, args, span } => {
                if let Some(f) = self.fns.get(name.as_str()).copied() {
                    let mut vals = Vec::with_capacity(args.len());
                    for a in args {
                        vals.push(self.eval(a)?);
                    }
                    self.call_user(f, vals, span)
                } else if is_builtin_function(name) {
                    let mut vals = Vec::with_capacity(args.len());
                    for a in args {
                        vals.push(self.eval(a)?);
                    }
                    self.charge(CostCategory::BuiltinCall, 1);
                    self.call_builtin(name, &vals, span)
                } else {
                    Err(RuntimeError::at(
                        RuntimeErrorKind::UndefinedFunction(name.clone()),
                        span,
                    ))
                }
            }
            Expr::Ternary {
                cond,
                then_val,
                else_val,
                ..
            } => {
                let c = self.eval(cond)?;
                self.charge(CostCategory::Branch, 1);
                if c.truthy() {
                    self.eval(then_val)
                } else {
                    self.eval(else_val)
                }
            }
            Expr::Cast { ty, operand, .. } => {
                let v = self.eval(operand)?;
                match v {
                    Value::Ptr { seg, .. } if ty.pointer_depth > 0 => {
                        let kind = match (ty.base, ty.pointer_depth) {
                            (_, d) if d > 1 => ElemKind::Ptr,
                            (BaseType::Char, _) => ElemKind::Char,
                            (BaseType::UnsignedInt, _) => ElemKind::UInt,
                            _ => ElemKind::Int,
                        };
                        self.mem.fix_kind(seg, kind);
                        Ok(v)
                    }
                    Value::Ptr { .. } => Ok(v),
                    Value::Int(raw) if ty.pointer_depth == 0 => {
                        Ok(Value::Int(Self::elem_kind(ty, 0).mask(raw)))
                    }
                    Value::Int(raw) => Ok(Value::Int(raw)),
                }
            }
            Expr::SizeOf { ty, .. } => {
                let bytes = if ty.pointer_depth > 0 {
                    8
                } else {
                    ty.base.byte_width()
                };
                Ok(Value::Int(bytes))
            }
        }
    }

    fn eval_int(&mut self, e: &'a Expr) -> Result<i64, RuntimeError> {
        match self.eval(e)? {
            Value::Int(v) => Ok(v),
            Value::Ptr { .. } => Err(RuntimeError::at(
                RuntimeErrorKind::TypeMismatch("integer expected".into()),
                e.span(),
            )),
        }
    }

    fn eval_binary(
        &mut self,
        op: BinaryOp,
        lhs: &'a Expr,
        rhs: &'a Expr,
        span: &SourceSpan,
    ) -> Result<Value, RuntimeError> {
        match op {
            BinaryOp::LogAnd => {
                self.charge(CostCategory::LogicalBranching, 1);
                let l = self.eval(lhs)?;
                if !l.truthy() {
                    return Ok(Value::Int(0));
                }
                let r = self.eval(rhs)?;
                Ok(Value::Int(if r.truthy() { 1 } else { 0 }))
            }
            BinaryOp::LogOr => {
                self.charge(CostCategory::LogicalBranching, 1);
                let l = self.eval(lhs)?;
                if l.truthy() {
                    return Ok(Value::Int(1));
                }
                let r = self.eval(rhs)?;
                Ok(Value::Int(if r.truthy() { 1 } else { 0 }))
            }
            _ => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                let zero_test = lhs_is_zero(lhs) || lhs_is_zero(rhs);
                self.apply_binary(op, l, r, zero_test, span)
            }
        }
    }

    /// Non-short-circuit binary operation. `zero_test` marks comparisons
    /// against a literal zero, which the cost model treats as free.
    fn apply_binary(
        &mut self,
        op: BinaryOp,
        l: Value,
        r: Value,
        zero_test: bool,
        span: &SourceSpan,
    ) -> Result<Value, RuntimeError> {
        use BinaryOp::*;
        if op.is_comparison() {
            if !zero_test {
                self.charge(CostCategory::Compare, 1);
                self.charge(CostCategory::Arith, 1);
            }
            let b =
                match (l, r, op) {
                    (Value::Int(a), Value::Int(b), _) => match op {
                        Lt => a < b,
                        Le => a <= b,
                        Gt => a > b,
                        Ge => a >= b,
                        Eq => a == b,
                        Ne => a != b,
                        _ => unreachable!(),
                    },
                    (
                        Value::Ptr {
                            seg: s1, off: o1, ..
                        },
                        Value::Ptr {
                            seg: s2, off: o2, ..
                        },
                        Eq,
                    ) => s1 == s2 && o1 == o2,
                    (
                        Value::Ptr {
                            seg: s1, off: o1, ..
                        },
                        Value::Ptr {
                            seg: s2, off: o2, ..
                        },
                        Ne,
                    ) => s1 != s2 || o1 != o2,
                    (Value::Ptr { .. }, Value::Int(_), Eq)
                    | (Value::Int(_), Value::Ptr { .. }, Eq) => false,
                    (Value::Ptr { .. }, Value::Int(_), Ne)
                    | (Value::Int(_), Value::Ptr { .. }, Ne) => true,
                    _ => {
                        return Err(RuntimeError::at(
                            RuntimeErrorKind::TypeMismatch("ordered comparison of pointers".into()),
                            span,
                        ))
                    }
                };
            return Ok(Value::Int(if b { 1 } else { 0 }));
        }
        match op {
            Add | Sub => {
                self.charge(CostCategory::Arith, 1);
                match (l, r) {
                    (Value::Int(a), Value::Int(b)) => Ok(Value::Int(if op == Add {
                        a.wrapping_add(b)
                    } else {
                        a.wrapping_sub(b)
                    })),
                    (Value::Ptr { seg, off, stride }, Value::Int(i)) => {
                        let delta = i * stride as i64;
                        Ok(Value::Ptr {
                            seg,
                            off: if op == Add { off + delta } else { off - delta },
                            stride,
                        })
                    }
                    (Value::Int(i), Value::Ptr { seg, off, stride }) if op == Add => {
                        Ok(Value::Ptr {
                            seg,
                            off: off + i * stride as i64,
                            stride,
                        })
                    }
                    _ => Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("invalid pointer arithmetic".into()),
                        span,
                    )),
                }
            }
            Mul => {
                self.charge(CostCategory::Arith, 1);
                let (a, b) = int_pair(l, r, span)?;
                Ok(Value::Int(a.wrapping_mul(b)))
            }
            Div | Rem => {
                self.charge(CostCategory::DivMod, 1);
                let (a, b) = int_pair(l, r, span)?;
                if b == 0 {
                    return Err(RuntimeError::at(RuntimeErrorKind::DivisionByZero, span));
                }
                Ok(Value::Int(if op == Div {
                    a.wrapping_div(b)
                } else {
                    a.wrapping_rem(b)
                }))
            }
            BitAnd | BitOr | Shl | Shr => {
                self.charge(CostCategory::Bitwise, 1);
                let (a, b) = int_pair(l, r, span)?;
                Ok(Value::Int(match op {
                    BitAnd => a & b,
                    BitOr => a | b,
                    Shl => a.wrapping_shl(b as u32 & 63),
                    Shr => a.wrapping_shr(b as u32 & 63),
                    _ => unreachable!(),
                }))
            }
            LogAnd | LogOr => unreachable!("handled by eval_binary"),
            _ => unreachable!(),
        }
    }

    fn eval_place(&mut self, e: &'a Expr) -> Result<Place, RuntimeError> {
        match e {
            Expr::Var { name, span } => {
                let b = self.lookup(name).ok_or_else(|| {
                    RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch(format!("unbound identifier `{}`", name)),
                        span,
                    )
                })?;
                if b.is_array {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("array is not assignable".into()),
                        span,
                    ));
                }
                Ok(Place {
                    seg: b.seg,
                    off: 0,
                    free: b.free_access,
                })
            }
            Expr::Index { base, index, span } => {
                let b = self.eval(base)?;
                let idx = self.eval_int(index)?;
                match b {
                    Value::Ptr {
                        seg,
                        off,
                        stride: 1,
                    } => Ok(Place {
                        seg,
                        off: off + idx,
                        free: false,
                    }),
                    Value::Ptr { .. } => Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch(
                            "partial array index is not assignable".into(),
                        ),
                        span,
                    )),
                    Value::Int(_) => Err(RuntimeError::at(RuntimeErrorKind::NullDeref, span)),
                }
            }
            Expr::Deref { operand, span } => {
                let v = self.eval(operand)?;
                match v {
                    Value::Ptr { seg, off, .. } => Ok(Place {
                        seg,
                        off,
                        free: false,
                    }),
                    Value::Int(_) => Err(RuntimeError::at(RuntimeErrorKind::NullDeref, span)),
                }
            }
            other => Err(RuntimeError::at(
                RuntimeErrorKind::TypeMismatch("expression is not assignable".into()),
                other.span(),
            )),
        }
    }

    fn store_place(
        &mut self,
        p: &Place,
        v: Value,
        span: &SourceSpan,
    ) -> Result<Value, RuntimeError> {
        self.mem.store(p.seg, p.off, v, span)?;
        self.mem.load(p.seg, p.off, span)
    }

    // ---- builtins ----------------------------------------------------------

    fn call_builtin(
        &mut self,
        name: &str,
        args: &[Value],
        span: &SourceSpan,
    ) -> Result<Value, RuntimeError> {
        match name {
            "printf" => {
                let fmt = self.arg_string(args, 0, span)?;
                let bytes = self.format(&fmt, &args[1..], span)?;
                self.stdout.extend_from_slice(&bytes);
                Ok(Value::Int(bytes.len() as i64))
            }
            "sprintf" => {
                let Some(Value::Ptr { seg, off, .. }) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("sprintf needs a buffer pointer".into()),
                        span,
                    ));
                };
                let fmt = self.arg_string(args, 1, span)?;
                let bytes = self.format(&fmt, &args[2..], span)?;
                for (i, b) in bytes.iter().enumerate() {
                    self.mem
                        .store(seg, off + i as i64, Value::Int(*b as i64), span)?;
                }
                self.mem
                    .store(seg, off + bytes.len() as i64, Value::Int(0), span)?;
                Ok(Value::Int(bytes.len() as i64))
            }
            "putchar" => {
                let Some(Value::Int(c)) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("putchar needs an integer".into()),
                        span,
                    ));
                };
                self.stdout.push((c & 0xff) as u8);
                Ok(Value::Int(c))
            }
            "fflush" => Ok(Value::Int(0)),
            "malloc" => {
                let Some(Value::Int(n)) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("malloc needs a size".into()),
                        span,
                    ));
                };
                if n < 0 {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("negative allocation size".into()),
                        span,
                    ));
                }
                let seg = self.mem.alloc_untyped(n as usize);
                Ok(Value::ptr(seg, 0))
            }
            "free" => {
                let Some(Value::Ptr { seg, off: 0, .. }) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch(
                            "free needs an allocation base pointer".into(),
                        ),
                        span,
                    ));
                };
                self.mem.free(seg, span)?;
                Ok(Value::Int(0))
            }
            "memset" => {
                let Some(Value::Ptr { seg, off, .. }) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("memset needs a pointer".into()),
                        span,
                    ));
                };
                let (Some(Value::Int(fill)), Some(Value::Int(nbytes))) =
                    (args.get(1).copied(), args.get(2).copied())
                else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch(
                            "memset needs fill value and byte count".into(),
                        ),
                        span,
                    ));
                };
                if nbytes < 0 {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("negative byte count".into()),
                        span,
                    ));
                }
                // elements are filled whole; a byte count that is not a
                // multiple of the element width leaves the tail element alone
                self.mem.load(seg, off, span).ok();
                let kind = self.mem.segment(seg).kind.unwrap_or(ElemKind::Int);
                let width = kind.byte_width() as i64;
                let nelems = nbytes / width;
                let byte = (fill & 0xff) as u64;
                let mut raw: u64 = 0;
                for _ in 0..kind.byte_width() {
                    raw = (raw << 8) | byte;
                }
                let len = self.mem.segment(seg).cells.len() as i64;
                if nelems > 0 && off + nelems > len {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::OutOfBounds {
                            segment: seg,
                            offset: off + nelems - 1,
                        },
                        span,
                    ));
                }
                for i in 0..nelems {
                    self.mem.store(seg, off + i, Value::Int(raw as i64), span)?;
                }
                Ok(Value::ptr(seg, off))
            }
            "strlen" => {
                let Some(Value::Ptr { seg, off, .. }) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("strlen needs a pointer".into()),
                        span,
                    ));
                };
                let s = self.mem.read_cstring(seg, off, span)?;
                Ok(Value::Int(s.len() as i64))
            }
            "rand" => {
                self.rng_state = self.rng_state.wrapping_mul(1103515245).wrapping_add(12345);
                Ok(Value::Int(((self.rng_state / 65536) % 32768) as i64))
            }
            "srand" => {
                let Some(Value::Int(s)) = args.first().copied() else {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("srand needs an integer".into()),
                        span,
                    ));
                };
                self.rng_state = s as u32;
                Ok(Value::Int(0))
            }
            "time" => Ok(Value::Int(self.config.time_value)),
            _ => Err(RuntimeError::at(
                RuntimeErrorKind::UndefinedFunction(name.to_string()),
                span,
            )),
        }
    }

    fn arg_string(
        &mut self,
        args: &[Value],
        idx: usize,
        span: &SourceSpan,
    ) -> Result<Vec<u8>, RuntimeError> {
        match args.get(idx) {
            Some(Value::Ptr { seg, off, .. }) => self.mem.read_cstring(*seg, *off, span),
            _ => Err(RuntimeError::at(
                RuntimeErrorKind::TypeMismatch("string pointer expected".into()),
                span,
            )),
        }
    }

    /// `%d` (with optional `0` flag and width), `%s`, `%%` and literal text.
    fn format(
        &mut self,
        fmt: &[u8],
        args: &[Value],
        span: &SourceSpan,
    ) -> Result<Vec<u8>, RuntimeError> {
        let mut out = Vec::new();
        let mut ai = 0usize;
        let mut i = 0usize;
        while i < fmt.len() {
            let b = fmt[i];
            if b != b'%' {
                out.push(b);
                i += 1;
                continue;
            }
            i += 1;
            if i >= fmt.len() {
                return Err(RuntimeError::at(
                    RuntimeErrorKind::BadFormat("dangling %".into()),
                    span,
                ));
            }
            if fmt[i] == b'%' {
                out.push(b'%');
                i += 1;
                continue;
            }
            let mut zero_pad = false;
            while i < fmt.len() && fmt[i] == b'0' {
                zero_pad = true;
                i += 1;
            }
            let mut width = 0usize;
            while i < fmt.len() && fmt[i].is_ascii_digit() {
                width = width * 10 + (fmt[i] - b'0') as usize;
                i += 1;
            }
            let conv = *fmt.get(i).ok_or_else(|| {
                RuntimeError::at(
                    RuntimeErrorKind::BadFormat("truncated conversion".into()),
                    span,
                )
            })?;
            i += 1;
            match conv {
                b'd' => {
                    let Some(Value::Int(v)) = args.get(ai).copied() else {
                        return Err(RuntimeError::at(
                            RuntimeErrorKind::BadFormat("%d expects an integer argument".into()),
                            span,
                        ));
                    };
                    ai += 1;
                    let digits = v.unsigned_abs().to_string();
                    let sign = if v < 0 { "-" } else { "" };
                    let body_len = digits.len() + sign.len();
                    if body_len < width {
                        let pad = width - body_len;
                        if zero_pad {
                            out.extend_from_slice(sign.as_bytes());
                            out.resize(out.len() + pad, b'0');
                            out.extend_from_slice(digits.as_bytes());
                        } else {
                            out.resize(out.len() + pad, b' ');
                            out.extend_from_slice(sign.as_bytes());
                            out.extend_from_slice(digits.as_bytes());
                        }
                    } else {
                        out.extend_from_slice(sign.as_bytes());
                        out.extend_from_slice(digits.as_bytes());
                    }
                }
                b's' => {
                    let Some(Value::Ptr { seg, off, .. }) = args.get(ai).copied() else {
                        return Err(RuntimeError::at(
                            RuntimeErrorKind::BadFormat("%s expects a string argument".into()),
                            span,
                        ));
                    };
                    ai += 1;
                    let s = self.mem.read_cstring(seg, off, span)?;
                    out.extend_from_slice(&s);
                }
                other => {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::BadFormat(format!(
                            "unsupported conversion %{}",
                            other as char
                        )),
                        span,
                    ))
                }
            }
        }
        Ok(out)
    }
}

struct Place {
    seg: u32,
    off: i64,
    free: bool,
}

fn lhs_is_zero(e: &Expr) -> bool {
    matches!(e, Expr::IntLit { value: 0, .. })
}

fn int_pair(l: Value, r: Value, span: &SourceSpan) -> Result<(i64, i64), RuntimeError> {
    match (l, r) {
        (Value::Int(a), Value::Int(b)) => Ok((a, b)),
        _ => Err(RuntimeError::at(
            RuntimeErrorKind::TypeMismatch("integer operands expected".into()),
            span,
        )),
    }
}
