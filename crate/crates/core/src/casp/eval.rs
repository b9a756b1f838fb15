//! Big-step evaluator for controller programs.
//!
//! `L ⊢ (S, ia, P) ⟹ (S′, ia′, N)`: [`eval`] is the pure form, and
//! [`eval_in_place`] mutates the state directly, undoing every write if
//! evaluation fails.

use thiserror::Error;

use super::ast::{CaspExpr, CaspProgram, CmpOp, Index, StepOp, Updatable, Value};
use super::codec::LabelCodec;
use super::state::{MachineState, Mode};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaspError {
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("placement for {0} outside interactive mode")]
    PlacementInBatch(Label),
    #[error("placement for {0} nested inside another placement")]
    NestedPlacement(Label),
    #[error("unknown counter {0}")]
    UnknownCounter(String),
    #[error("unknown array {0}")]
    UnknownArray(String),
    #[error("index {index} out of bounds for {array} (capacity {capacity})")]
    OutOfBounds {
        array: String,
        index: i64,
        capacity: usize,
    },
    #[error("condition evaluated to {0}, expected 1 or -1")]
    BadCondition(i64),
}

impl CaspError {
    /// Numeric code carried by ERROR packets.
    pub fn code(&self) -> u16 {
        match self {
            CaspError::UnknownLabel(_) => 2,
            CaspError::PlacementInBatch(_) => 3,
            CaspError::NestedPlacement(_) => 4,
            CaspError::UnknownCounter(_) | CaspError::UnknownArray(_) => 5,
            CaspError::OutOfBounds { .. } => 6,
            CaspError::BadCondition(_) => 8,
        }
    }
}

/// The label a program runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context<'a> {
    /// Not at any extension point; code 0.
    Session,
    At(&'a Label),
}

impl Context<'_> {
    pub fn code(&self, codec: &LabelCodec) -> Result<i64, CaspError> {
        match self {
            Context::Session => Ok(0),
            Context::At(l) => codec
                .label_code(l)
                .map_err(|_| CaspError::UnknownLabel((*l).clone())),
        }
    }
}

pub fn eval(
    codec: &LabelCodec,
    ctx: Context<'_>,
    state: &MachineState,
    mode: Mode,
    p: &CaspProgram,
) -> Result<(MachineState, Mode, i64), CaspError> {
    let mut s = state.clone();
    let (m, n) = eval_in_place(codec, ctx, &mut s, mode, p)?;
    Ok((s, m, n))
}

/// Evaluates `p` against `state`. On error the state is left as it was.
pub fn eval_in_place(
    codec: &LabelCodec,
    ctx: Context<'_>,
    state: &mut MachineState,
    mode: Mode,
    p: &CaspProgram,
) -> Result<(Mode, i64), CaspError> {
    if let Some(l) = p.nested_placement() {
        return Err(CaspError::NestedPlacement(l.clone()));
    }
    let mut ev = Evaluator {
        codec,
        here: ctx.code(codec)?,
        state,
        journal: Vec::new(),
    };
    match ev.prog(mode, p) {
        Ok(r) => Ok(r),
        Err(e) => {
            ev.rollback();
            Err(e)
        }
    }
}

enum Undo {
    Counter(String, i64),
    Cell(String, i64, i64),
    Procedure(Label, Option<CaspProgram>),
}

struct Evaluator<'a> {
    codec: &'a LabelCodec,
    here: i64,
    state: &'a mut MachineState,
    journal: Vec<Undo>,
}

impl Evaluator<'_> {
    fn rollback(&mut self) {
        while let Some(u) = self.journal.pop() {
            match u {
                Undo::Counter(x, v) => {
                    self.state.counters.insert(x, v);
                }
                Undo::Cell(r, i, v) => {
                    if let Some(c) = self.state.arrays.get_mut(&r).and_then(|a| a.get_mut(i)) {
                        *c = v;
                    }
                }
                Undo::Procedure(l, Some(p)) => {
                    self.state.procedures.insert(l, p);
                }
                Undo::Procedure(l, None) => {
                    self.state.procedures.remove(&l);
                }
            }
        }
    }

    fn prog(&mut self, mode: Mode, p: &CaspProgram) -> Result<(Mode, i64), CaspError> {
        match p {
            CaspProgram::Continue => Ok((Mode::Batch, self.here)),
            CaspProgram::Break => Ok((Mode::Interactive, self.here)),
            CaspProgram::Expr(e) => Ok((mode, self.expr(e)?)),
            CaspProgram::Assign(u, e) => {
                let n = self.expr(e)?;
                self.write(u, n)?;
                Ok((mode, n))
            }
            CaspProgram::Step(op, u) => {
                let n = self.value(&Value::from(u.clone()))?;
                let m = match op {
                    StepOp::Inc => n.wrapping_add(1),
                    StepOp::Dec => n.wrapping_sub(1),
                };
                self.write(u, m)?;
                Ok((mode, m))
            }
            CaspProgram::Seq(a, b) => {
                let (m1, n1) = self.prog(mode, a)?;
                if m1 != mode {
                    Ok((m1, n1))
                } else {
                    self.prog(m1, b)
                }
            }
            CaspProgram::If(c, t, e) => match self.expr(c)? {
                1 => self.prog(mode, t),
                -1 => self.prog(mode, e),
                n => Err(CaspError::BadCondition(n)),
            },
            CaspProgram::Place(l, body) => {
                if mode != Mode::Interactive {
                    return Err(CaspError::PlacementInBatch(l.clone()));
                }
                let code = self
                    .codec
                    .label_code(l)
                    .map_err(|_| CaspError::UnknownLabel(l.clone()))?;
                let old = self.state.procedures.insert(l.clone(), (**body).clone());
                self.journal.push(Undo::Procedure(l.clone(), old));
                Ok((Mode::Interactive, code))
            }
        }
    }

    fn expr(&self, e: &CaspExpr) -> Result<i64, CaspError> {
        match e {
            CaspExpr::Value(v) => self.value(v),
            CaspExpr::Neg(v) => Ok(self.value(v)?.wrapping_neg()),
            CaspExpr::Cmp(op, a, b) => {
                let (x, y) = (self.value(a)?, self.value(b)?);
                let holds = match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Lt => x < y,
                };
                Ok(if holds { 1 } else { -1 })
            }
        }
    }

    fn counter(&self, x: &str) -> Result<i64, CaspError> {
        self.state
            .counter(x)
            .ok_or_else(|| CaspError::UnknownCounter(x.to_string()))
    }

    fn index(&self, i: &Index) -> Result<i64, CaspError> {
        match i {
            Index::Num(n) => Ok(*n),
            Index::Counter(x) => self.counter(x),
        }
    }

    fn value(&self, v: &Value) -> Result<i64, CaspError> {
        match v {
            Value::Num(n) => Ok(*n),
            Value::Counter(x) => self.counter(x),
            Value::Cell(r, i) => {
                let idx = self.index(i)?;
                let arr = self
                    .state
                    .array(r)
                    .ok_or_else(|| CaspError::UnknownArray(r.clone()))?;
                arr.get(idx).ok_or(CaspError::OutOfBounds {
                    array: r.clone(),
                    index: idx,
                    capacity: arr.capacity(),
                })
            }
        }
    }

    fn write(&mut self, u: &Updatable, n: i64) -> Result<(), CaspError> {
        match u {
            Updatable::Counter(x) => {
                let slot = self
                    .state
                    .counters
                    .get_mut(x)
                    .ok_or_else(|| CaspError::UnknownCounter(x.clone()))?;
                self.journal.push(Undo::Counter(x.clone(), *slot));
                *slot = n;
            }
            Updatable::Cell(r, i) => {
                let idx = self.index(i)?;
                let arr = self
                    .state
                    .arrays
                    .get_mut(r)
                    .ok_or_else(|| CaspError::UnknownArray(r.clone()))?;
                let capacity = arr.capacity();
                let slot = arr.get_mut(idx).ok_or(CaspError::OutOfBounds {
                    array: r.clone(),
                    index: idx,
                    capacity,
                })?;
                self.journal.push(Undo::Cell(r.clone(), idx, *slot));
                *slot = n;
            }
        }
        Ok(())
    }
}
