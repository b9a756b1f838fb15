//! Tree-walking evaluator for host programs.
//!
//! Global variables live in the attached [`Controller`]'s store, so the
//! controller can read and update them at extension points. Function
//! parameters are frame-local.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{BinOp, Expr, FuncDecl, Program, Stmt};
use crate::label::Label;

pub const DEFAULT_MAX_CALL_DEPTH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{func} expects {expected} argument(s), got {got}")]
    Arity {
        func: String,
        expected: usize,
        got: usize,
    },
    #[error("call depth limit of {0} exceeded")]
    DepthExceeded(usize),
    #[error("controller failure: {0}")]
    Controller(String),
}

/// What the interpreter needs from the embedded controller.
pub trait Controller {
    fn load(&self, var: &str) -> Option<i64>;
    /// Returns false if `var` is not a known global.
    fn store(&mut self, var: &str, value: i64) -> bool;
    /// Called at every `extend{...}`, including unlabeled ones.
    fn extension_point(&mut self, labels: &[Label]) -> Result<(), RunError>;
    /// Called before each non-extend statement executes.
    fn before_statement(&mut self) {}
}

/// A controller with no direction support: a plain global store.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BareStore {
    pub globals: HashMap<String, i64>,
}

impl BareStore {
    pub fn for_program(p: &Program) -> Self {
        BareStore {
            globals: p.globals.iter().map(|g| (g.clone(), 0)).collect(),
        }
    }
}

impl Controller for BareStore {
    fn load(&self, var: &str) -> Option<i64> {
        self.globals.get(var).copied()
    }

    fn store(&mut self, var: &str, value: i64) -> bool {
        match self.globals.get_mut(var) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    fn extension_point(&mut self, _labels: &[Label]) -> Result<(), RunError> {
        Ok(())
    }
}

/// Evaluates the program's entry call and returns its value.
pub fn run<C: Controller + ?Sized>(p: &Program, ctl: &mut C) -> Result<i64, RunError> {
    Interpreter::new(p).run(ctl)
}

pub struct Interpreter<'p> {
    program: &'p Program,
    functions: HashMap<&'p str, &'p FuncDecl>,
    max_depth: usize,
}

struct Frame<'p> {
    locals: Vec<(&'p str, i64)>,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program) -> Self {
        Interpreter {
            program,
            functions: program
                .functions
                .iter()
                .map(|f| (f.name.as_str(), f))
                .collect(),
            max_depth: DEFAULT_MAX_CALL_DEPTH,
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn run<C: Controller + ?Sized>(&self, ctl: &mut C) -> Result<i64, RunError> {
        let entry = &self.program.entry;
        let mut top = Frame { locals: Vec::new() };
        // Arguments are evaluated left to right.
        let args = entry
            .args
            .iter()
            .map(|a| self.eval(a, &mut top, ctl, 0))
            .collect::<Result<Vec<_>, _>>()?;
        self.call(&entry.func, args, ctl, 0)
    }

    fn call<C: Controller + ?Sized>(
        &self,
        name: &str,
        args: Vec<i64>,
        ctl: &mut C,
        depth: usize,
    ) -> Result<i64, RunError> {
        if depth >= self.max_depth {
            return Err(RunError::DepthExceeded(self.max_depth));
        }
        let func = self
            .functions
            .get(name)
            .ok_or_else(|| RunError::UnknownFunction(name.to_string()))?;
        if func.params.len() != args.len() {
            return Err(RunError::Arity {
                func: name.to_string(),
                expected: func.params.len(),
                got: args.len(),
            });
        }
        let mut frame = Frame {
            locals: func.params.iter().map(String::as_str).zip(args).collect(),
        };
        self.exec_block(&func.body, &mut frame, ctl, depth + 1)?;
        self.eval(&func.ret, &mut frame, ctl, depth + 1)
    }

    fn exec_block<C: Controller + ?Sized>(
        &self,
        body: &'p [Stmt],
        frame: &mut Frame<'p>,
        ctl: &mut C,
        depth: usize,
    ) -> Result<(), RunError> {
        for s in body {
            match s {
                Stmt::Extend(labels) => ctl.extension_point(labels)?,
                Stmt::Skip => ctl.before_statement(),
                Stmt::Assign(x, e) => {
                    ctl.before_statement();
                    let v = self.eval(e, frame, ctl, depth)?;
                    if let Some(slot) = frame.locals.iter_mut().find(|(n, _)| n == x) {
                        slot.1 = v;
                    } else if !ctl.store(x, v) {
                        return Err(RunError::UnknownVariable(x.clone()));
                    }
                }
                Stmt::If(c, inner) => {
                    ctl.before_statement();
                    if self.eval(c, frame, ctl, depth)? > 0 {
                        self.exec_block(inner, frame, ctl, depth)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn eval<C: Controller + ?Sized>(
        &self,
        e: &Expr,
        frame: &mut Frame<'p>,
        ctl: &mut C,
        depth: usize,
    ) -> Result<i64, RunError> {
        match e {
            Expr::Num(n) => Ok(*n),
            Expr::Var(x) => frame
                .locals
                .iter()
                .find(|(n, _)| n == x)
                .map(|(_, v)| *v)
                .or_else(|| ctl.load(x))
                .ok_or_else(|| RunError::UnknownVariable(x.clone())),
            Expr::Binary(op, l, r) => {
                let a = self.eval(l, frame, ctl, depth)?;
                let b = self.eval(r, frame, ctl, depth)?;
                Ok(match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Eq => i64::from(a == b),
                    BinOp::Lt => i64::from(a < b),
                })
            }
            Expr::Call(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame, ctl, depth)?);
                }
                self.call(name, vals, ctl, depth)
            }
        }
    }
}
