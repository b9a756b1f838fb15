//! A naive controller-program evaluator written independently of the
//! library's: plain recursion over a cloned, vector-backed state, no undo
//! journal. Used as the oracle in equivalence tests.

use std::rc::Rc;

use phd_core::casp::{
    CaspExpr, CaspProgram, CmpOp, Index, MachineState, Mode, StepOp, Updatable, Value,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefState {
    pub counters: Vec<(Rc<str>, i64)>,
    pub arrays: Vec<(Rc<str>, Vec<i64>)>,
    /// Label name to stored program, sorted by name.
    pub procs: Vec<(Rc<str>, Rc<CaspProgram>)>,
}

impl RefState {
    pub fn of(s: &MachineState) -> RefState {
        RefState {
            counters: s
                .counters
                .iter()
                .map(|(k, v)| (Rc::from(k.as_str()), *v))
                .collect(),
            arrays: s
                .arrays
                .iter()
                .map(|(k, a)| (Rc::from(k.as_str()), a.cells().to_vec()))
                .collect(),
            procs: s
                .procedures
                .iter()
                .map(|(l, p)| (Rc::from(l.as_str()), Rc::new(p.clone())))
                .collect(),
        }
    }

    /// Field-by-field comparison with a library state.
    pub fn matches(&self, s: &MachineState) -> bool {
        self.counters.len() == s.counters.len()
            && self
                .counters
                .iter()
                .all(|(k, v)| s.counters.get(&**k) == Some(v))
            && self.arrays.len() == s.arrays.len()
            && self.arrays.iter().all(|(k, v)| {
                s.arrays
                    .get(&**k)
                    .is_some_and(|a| a.cells() == v.as_slice())
            })
            && self.procs.len() == s.procedures.len()
            && self
                .procs
                .iter()
                .zip(&s.procedures)
                .all(|((k, p), (l, q))| **k == *l.as_str() && **p == *q)
    }

    fn counter(&self, x: &str) -> Result<i64, u16> {
        self.counters
            .iter()
            .find(|(k, _)| **k == *x)
            .map(|(_, v)| *v)
            .ok_or(5)
    }

    fn set_counter(&mut self, x: &str, n: i64) -> Result<(), u16> {
        let slot = self
            .counters
            .iter_mut()
            .find(|(k, _)| **k == *x)
            .ok_or(5u16)?;
        slot.1 = n;
        Ok(())
    }

    fn cell_slot(&self, r: &str, i: i64) -> Result<usize, u16> {
        let (_, cells) = self.arrays.iter().find(|(k, _)| **k == *r).ok_or(5u16)?;
        if i < 0 || i as u64 >= cells.len() as u64 {
            return Err(6);
        }
        Ok(i as usize)
    }
}

pub type RefResult = Result<(RefState, Mode, i64), u16>;

pub struct Reference<'a> {
    /// Known labels; the code of `labels[k]` is `k + 1`.
    pub labels: &'a [String],
    /// Code of the label the program runs under; 0 outside any point.
    pub here: i64,
}

fn has_placement(p: &CaspProgram) -> bool {
    match p {
        CaspProgram::Place(..) => true,
        CaspProgram::Seq(a, b) => has_placement(a) || has_placement(b),
        CaspProgram::If(_, a, b) => has_placement(a) || has_placement(b),
        _ => false,
    }
}

fn nested(p: &CaspProgram) -> bool {
    match p {
        CaspProgram::Place(_, body) => has_placement(body),
        CaspProgram::Seq(a, b) => nested(a) || nested(b),
        CaspProgram::If(_, a, b) => nested(a) || nested(b),
        _ => false,
    }
}

impl Reference<'_> {
    pub fn run(&self, s: &RefState, m: Mode, p: &CaspProgram) -> RefResult {
        if nested(p) {
            return Err(4);
        }
        self.go(s.clone(), m, p)
    }

    fn index(&self, s: &RefState, i: &Index) -> Result<i64, u16> {
        match i {
            Index::Num(n) => Ok(*n),
            Index::Counter(x) => s.counter(x),
        }
    }

    fn val(&self, s: &RefState, v: &Value) -> Result<i64, u16> {
        match v {
            Value::Num(n) => Ok(*n),
            Value::Counter(x) => s.counter(x),
            Value::Cell(r, i) => {
                let i = self.index(s, i)?;
                let k = s.cell_slot(r, i)?;
                Ok(s.arrays.iter().find(|(n, _)| **n == *r).unwrap().1[k])
            }
        }
    }

    fn expr(&self, s: &RefState, e: &CaspExpr) -> Result<i64, u16> {
        Ok(match e {
            CaspExpr::Value(v) => self.val(s, v)?,
            CaspExpr::Neg(v) => 0i64.wrapping_sub(self.val(s, v)?),
            CaspExpr::Cmp(op, a, b) => {
                let (a, b) = (self.val(s, a)?, self.val(s, b)?);
                let t = match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Lt => a < b,
                };
                if t {
                    1
                } else {
                    -1
                }
            }
        })
    }

    fn store(&self, mut s: RefState, u: &Updatable, n: i64) -> Result<RefState, u16> {
        match u {
            Updatable::Counter(x) => s.set_counter(x, n)?,
            Updatable::Cell(r, i) => {
                let i = self.index(&s, i)?;
                let k = s.cell_slot(r, i)?;
                s.arrays.iter_mut().find(|(n, _)| **n == *r).unwrap().1[k] = n;
            }
        }
        Ok(s)
    }

    fn go(&self, s: RefState, m: Mode, p: &CaspProgram) -> RefResult {
        match p {
            CaspProgram::Continue => Ok((s, Mode::Batch, self.here)),
            CaspProgram::Break => Ok((s, Mode::Interactive, self.here)),
            CaspProgram::Expr(e) => {
                let n = self.expr(&s, e)?;
                Ok((s, m, n))
            }
            CaspProgram::Assign(u, e) => {
                let n = self.expr(&s, e)?;
                Ok((self.store(s, u, n)?, m, n))
            }
            CaspProgram::Step(op, u) => {
                let old = self.val(&s, &Value::from(u.clone()))?;
                let n = match op {
                    StepOp::Inc => old.wrapping_add(1),
                    StepOp::Dec => old.wrapping_sub(1),
                };
                Ok((self.store(s, u, n)?, m, n))
            }
            CaspProgram::Seq(a, b) => {
                let (s1, m1, n1) = self.go(s, m, a)?;
                if m1 == m {
                    self.go(s1, m1, b)
                } else {
                    Ok((s1, m1, n1))
                }
            }
            CaspProgram::If(c, a, b) => match self.expr(&s, c)? {
                1 => self.go(s, m, a),
                -1 => self.go(s, m, b),
                _ => Err(8),
            },
            CaspProgram::Place(l, body) => {
                if m == Mode::Batch {
                    return Err(3);
                }
                let k = self
                    .labels
                    .iter()
                    .position(|x| x == l.as_str())
                    .ok_or(2u16)?;
                let mut s = s;
                let body = Rc::new((**body).clone());
                match s.procs.iter_mut().find(|(n, _)| **n == *l.as_str()) {
                    Some(slot) => slot.1 = body,
                    None => {
                        s.procs.push((Rc::from(l.as_str()), body));
                        s.procs.sort_by(|a, b| a.0.cmp(&b.0));
                    }
                }
                Ok((s, Mode::Interactive, k as i64 + 1))
            }
        }
    }
}
