//! Segment-based memory. Every variable, array, string literal and heap
//! allocation is a segment of value cells; pointers are (segment, element
//! offset) pairs, so out-of-bounds and use-after-free are always detected.

use std::fmt;

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemKind {
    Char,
    Int,
    UInt,
    Ptr,
}

impl ElemKind {
    pub fn byte_width(self) -> usize {
        match self {
            ElemKind::Char => 1,
            ElemKind::Int | ElemKind::UInt => 4,
            ElemKind::Ptr => 8,
        }
    }

    /// Reinterpret a raw 64-bit value at a load/store boundary: `int` keeps
    /// the low 32 bits sign-extended, `unsigned int` zero-extended, `char`
    /// the low 8 bits sign-extended.
    pub fn mask(self, raw: i64) -> i64 {
        match self {
            ElemKind::Char => raw as i8 as i64,
            ElemKind::Int => raw as i32 as i64,
            ElemKind::UInt => raw as u32 as i64,
            ElemKind::Ptr => raw,
        }
    }
}

/// A runtime value: a 64-bit integer or a typed pointer. `stride` is the
/// element step used by indexing; it is 1 except for pointers produced by
/// partially indexing a two-dimensional array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Ptr { seg: u32, off: i64, stride: u32 },
}

impl Value {
    pub fn ptr(seg: u32, off: i64) -> Value {
        Value::Ptr {
            seg,
            off,
            stride: 1,
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Int(v) => *v != 0,
            Value::Ptr { .. } => true,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{}", v),
            Value::Ptr { seg, off, .. } => write!(f, "<ptr {}+{}>", seg, off),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuntimeErrorKind {
    OutOfBounds { segment: u32, offset: i64 },
    DivisionByZero,
    StepLimitExceeded,
    NullDeref,
    UnknownEntry(String),
    UndefinedFunction(String),
    UseAfterFree { segment: u32 },
    BadFormat(String),
    TypeMismatch(String),
    RecursionLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub span: Option<SourceSpan>,
}

impl RuntimeError {
    pub fn new(kind: RuntimeErrorKind) -> RuntimeError {
        RuntimeError { kind, span: None }
    }

    pub fn at(kind: RuntimeErrorKind, span: &SourceSpan) -> RuntimeError {
        RuntimeError {
            kind,
            span: Some(span.clone()),
        }
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RuntimeErrorKind::OutOfBounds { segment, offset } => write!(
                f,
                "out-of-bounds access: segment {} offset {}",
                segment, offset
            )?,
            RuntimeErrorKind::DivisionByZero => write!(f, "division by zero")?,
            RuntimeErrorKind::StepLimitExceeded => write!(f, "step limit exceeded")?,
            RuntimeErrorKind::NullDeref => write!(f, "invalid pointer dereference")?,
            RuntimeErrorKind::UnknownEntry(name) => write!(f, "unknown entry function `{}`", name)?,
            RuntimeErrorKind::UndefinedFunction(name) => {
                write!(f, "call to function `{}` with no definition", name)?
            }
            RuntimeErrorKind::UseAfterFree { segment } => {
                write!(f, "use of freed allocation (segment {})", segment)?
            }
            RuntimeErrorKind::BadFormat(msg) => write!(f, "bad format string: {}", msg)?,
            RuntimeErrorKind::TypeMismatch(msg) => write!(f, "type mismatch: {}", msg)?,
            RuntimeErrorKind::RecursionLimit => write!(f, "call depth limit exceeded")?,
        }
        if let Some(span) = &self.span {
            write!(f, " at {}", span)?;
        }
        Ok(())
    }
}

impl std::error::Error for RuntimeError {}

#[derive(Debug)]
pub struct Segment {
    pub cells: Vec<Value>,
    /// `None` for heap allocations whose element type has not been fixed by
    /// a pointer cast yet; such segments track their byte length instead.
    pub kind: Option<ElemKind>,
    pub byte_len: usize,
    pub freed: bool,
}

#[derive(Debug, Default)]
pub struct Memory {
    segments: Vec<Segment>,
}

impl Memory {
    pub fn new() -> Memory {
        Memory::default()
    }

    /// Allocate a typed, zero-initialized segment of `len` elements.
    pub fn alloc(&mut self, kind: ElemKind, len: usize) -> u32 {
        let id = self.segments.len() as u32;
        self.segments.push(Segment {
            cells: vec![Value::Int(0); len],
            kind: Some(kind),
            byte_len: len * kind.byte_width(),
            freed: false,
        });
        id
    }

    /// Allocate an untyped heap block of `bytes` bytes; its element type is
    /// fixed by the first pointer cast (or defaults to `int` at first use).
    pub fn alloc_untyped(&mut self, bytes: usize) -> u32 {
        let id = self.segments.len() as u32;
        self.segments.push(Segment {
            cells: Vec::new(),
            kind: None,
            byte_len: bytes,
            freed: false,
        });
        id
    }

    pub fn segment(&self, seg: u32) -> &Segment {
        &self.segments[seg as usize]
    }

    /// Fix the element type of an untyped allocation; no-op on typed ones.
    pub fn fix_kind(&mut self, seg: u32, kind: ElemKind) {
        let s = &mut self.segments[seg as usize];
        if s.kind.is_none() {
            let len = s.byte_len / kind.byte_width();
            s.kind = Some(kind);
            s.cells = vec![Value::Int(0); len];
        }
    }

    fn check<'s>(
        segments: &'s mut [Segment],
        seg: u32,
        off: i64,
        span: &SourceSpan,
    ) -> Result<&'s mut Segment, RuntimeError> {
        let s = segments
            .get_mut(seg as usize)
            .ok_or_else(|| RuntimeError::at(RuntimeErrorKind::NullDeref, span))?;
        if s.freed {
            return Err(RuntimeError::at(
                RuntimeErrorKind::UseAfterFree { segment: seg },
                span,
            ));
        }
        if s.kind.is_none() {
            // first access without a cast: default to int
            let len = s.byte_len / ElemKind::Int.byte_width();
            s.kind = Some(ElemKind::Int);
            s.cells = vec![Value::Int(0); len];
        }
        if off < 0 || off as usize >= s.cells.len() {
            return Err(RuntimeError::at(
                RuntimeErrorKind::OutOfBounds {
                    segment: seg,
                    offset: off,
                },
                span,
            ));
        }
        Ok(s)
    }

    pub fn load(&mut self, seg: u32, off: i64, span: &SourceSpan) -> Result<Value, RuntimeError> {
        let s = Self::check(&mut self.segments, seg, off, span)?;
        Ok(s.cells[off as usize])
    }

    /// Store with reinterpretation per the segment's element kind.
    pub fn store(
        &mut self,
        seg: u32,
        off: i64,
        value: Value,
        span: &SourceSpan,
    ) -> Result<(), RuntimeError> {
        let s = Self::check(&mut self.segments, seg, off, span)?;
        let kind = s.kind.unwrap();
        let cell = match (kind, value) {
            (ElemKind::Ptr, v) => v,
            (k, Value::Int(raw)) => Value::Int(k.mask(raw)),
            (_, Value::Ptr { .. }) => {
                return Err(RuntimeError::at(
                    RuntimeErrorKind::TypeMismatch("pointer stored into integer cell".into()),
                    span,
                ))
            }
        };
        s.cells[off as usize] = cell;
        Ok(())
    }

    pub fn free(&mut self, seg: u32, span: &SourceSpan) -> Result<(), RuntimeError> {
        let s = self
            .segments
            .get_mut(seg as usize)
            .ok_or_else(|| RuntimeError::at(RuntimeErrorKind::NullDeref, span))?;
        if s.freed {
            return Err(RuntimeError::at(
                RuntimeErrorKind::UseAfterFree { segment: seg },
                span,
            ));
        }
        s.freed = true;
        Ok(())
    }

    /// Read consecutive cells as bytes until a zero cell (C string).
    pub fn read_cstring(
        &mut self,
        seg: u32,
        off: i64,
        span: &SourceSpan,
    ) -> Result<Vec<u8>, RuntimeError> {
        let mut out = Vec::new();
        let mut i = off;
        loop {
            match self.load(seg, i, span)? {
                Value::Int(0) => return Ok(out),
                Value::Int(v) => out.push((v & 0xff) as u8),
                Value::Ptr { .. } => {
                    return Err(RuntimeError::at(
                        RuntimeErrorKind::TypeMismatch("pointer cell in string".into()),
                        span,
                    ))
                }
            }
            i += 1;
        }
    }
}
