//! Exhaustive enumeration of small controller programs.
//!
//! Height counts every syntax node: numerals and counters are 1, a cell
//! `r[i]` is 2 (its index is a child), `-v` and comparisons add 1 to their
//! operands, and every program constructor adds 1 to its tallest child
//! (conditions included). An expression used as a program has the
//! expression's height.

use phd_core::casp::{CaspExpr, CaspProgram, CmpOp, Index, StepOp, Updatable, Value};
use phd_core::Label;

pub struct Alphabet {
    pub consts: Vec<i64>,
    pub counters: Vec<String>,
    pub arrays: Vec<String>,
    /// Labels used in placements; may include unknown ones.
    pub labels: Vec<Label>,
}

impl Alphabet {
    fn indices(&self) -> Vec<Index> {
        let mut out: Vec<Index> = self.consts.iter().map(|n| Index::Num(*n)).collect();
        out.extend(self.counters.iter().map(|x| Index::Counter(x.clone())));
        out
    }

    /// Values of height at most `h`.
    pub fn values(&self, h: usize) -> Vec<Value> {
        let mut out = Vec::new();
        if h >= 1 {
            out.extend(self.consts.iter().map(|n| Value::Num(*n)));
            out.extend(self.counters.iter().map(|x| Value::Counter(x.clone())));
        }
        if h >= 2 {
            for r in &self.arrays {
                out.extend(
                    self.indices()
                        .into_iter()
                        .map(|i| Value::Cell(r.clone(), i)),
                );
            }
        }
        out
    }

    pub fn updatables(&self, h: usize) -> Vec<Updatable> {
        self.values(h)
            .into_iter()
            .filter_map(|v| match v {
                Value::Counter(x) => Some(Updatable::Counter(x)),
                Value::Cell(r, i) => Some(Updatable::Cell(r, i)),
                Value::Num(_) => None,
            })
            .collect()
    }

    pub fn exprs(&self, h: usize) -> Vec<CaspExpr> {
        let mut out: Vec<CaspExpr> = self.values(h).into_iter().map(CaspExpr::Value).collect();
        if h >= 2 {
            let vs = self.values(h - 1);
            out.extend(vs.iter().cloned().map(CaspExpr::Neg));
            for op in [CmpOp::Eq, CmpOp::Lt] {
                for a in &vs {
                    for b in &vs {
                        out.push(CaspExpr::Cmp(op, a.clone(), b.clone()));
                    }
                }
            }
        }
        out
    }

    /// Programs of height at most `h` that are not sequences, conditionals
    /// or placements.
    fn atoms(&self, h: usize) -> Vec<CaspProgram> {
        let mut out = Vec::new();
        if h == 0 {
            return out;
        }
        out.push(CaspProgram::Continue);
        out.push(CaspProgram::Break);
        out.extend(self.exprs(h).into_iter().map(CaspProgram::Expr));
        if h >= 2 {
            for u in self.updatables(h - 1) {
                for e in self.exprs(h - 1) {
                    out.push(CaspProgram::Assign(u.clone(), e));
                }
                out.push(CaspProgram::Step(StepOp::Inc, u.clone()));
                out.push(CaspProgram::Step(StepOp::Dec, u));
            }
        }
        out
    }

    /// Every program of height at most `h`.
    pub fn programs(&self, h: usize) -> Vec<CaspProgram> {
        let mut out = Vec::new();
        self.each_program(h, |p| out.push(p.clone()));
        out
    }

    /// Calls `f` on every program of height at most `h` without keeping
    /// them all.
    pub fn each_program(&self, h: usize, mut f: impl FnMut(&CaspProgram)) {
        for a in self.atoms(h) {
            f(&a);
        }
        if h < 2 {
            return;
        }
        let sub = self.programs(h - 1);
        let conds = self.exprs(h - 1);
        for a in &sub {
            for b in &sub {
                f(&CaspProgram::seq(a.clone(), b.clone()));
            }
        }
        // Conditions are swapped into one template per branch pair rather
        // than cloned for every program.
        let mut conds = conds;
        for a in &sub {
            for b in &sub {
                let mut p = CaspProgram::ite(conds[0].clone(), a.clone(), b.clone());
                for c in conds.iter_mut() {
                    let CaspProgram::If(slot, ..) = &mut p else {
                        unreachable!()
                    };
                    std::mem::swap(slot, c);
                    f(&p);
                    let CaspProgram::If(slot, ..) = &mut p else {
                        unreachable!()
                    };
                    std::mem::swap(slot, c);
                }
            }
        }
        for l in &self.labels {
            for a in &sub {
                f(&CaspProgram::place(l.clone(), a.clone()));
            }
        }
    }

    /// Number of programs of height at most `h`.
    pub fn count(&self, h: usize) -> u64 {
        let atoms = self.atoms(h).len() as u64;
        if h < 2 {
            return atoms;
        }
        let sub = self.count(h - 1);
        let conds = self.exprs(h - 1).len() as u64;
        atoms + sub * sub + conds * sub * sub + self.labels.len() as u64 * sub
    }
}
