//! Canonical text form of controller programs.

use std::fmt::{self, Display, Formatter};

use super::ast::{CaspExpr, CaspProgram, CmpOp, Index, StepOp, Updatable, Value};

pub fn serialize_casp(p: &CaspProgram) -> String {
    p.to_string()
}

impl Display for Index {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Index::Num(n) => write!(f, "{n}"),
            Index::Counter(x) => f.write_str(x),
        }
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{n}"),
            Value::Counter(x) => f.write_str(x),
            Value::Cell(r, i) => write!(f, "{r}[{i}]"),
        }
    }
}

impl Display for Updatable {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Updatable::Counter(x) => f.write_str(x),
            Updatable::Cell(r, i) => write!(f, "{r}[{i}]"),
        }
    }
}

impl Display for CaspExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            CaspExpr::Value(v) => write!(f, "{v}"),
            // A space keeps `- 3` distinct from the numeral `-3`.
            CaspExpr::Neg(v @ Value::Num(_)) => write!(f, "- {v}"),
            CaspExpr::Neg(v) => write!(f, "-{v}"),
            CaspExpr::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Lt => "<",
                };
                write!(f, "{a} {sym} {b}")
            }
        }
    }
}

impl Display for CaspProgram {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            CaspProgram::Expr(e) => write!(f, "{e}"),
            CaspProgram::Assign(u, e) => write!(f, "{u} := {e}"),
            CaspProgram::Step(StepOp::Inc, u) => write!(f, "inc {u}"),
            CaspProgram::Step(StepOp::Dec, u) => write!(f, "dec {u}"),
            CaspProgram::Seq(a, b) => {
                // `;` nests to the right and an `else` branch is greedy, so a
                // left operand that is itself a sequence or conditional needs
                // grouping.
                if matches!(**a, CaspProgram::Seq(..) | CaspProgram::If(..)) {
                    write!(f, "({a}); {b}")
                } else {
                    write!(f, "{a}; {b}")
                }
            }
            CaspProgram::If(c, t, e) => write!(f, "if {c} then {t} else {e}"),
            CaspProgram::Break => f.write_str("break"),
            CaspProgram::Continue => f.write_str("continue"),
            CaspProgram::Place(l, body) => write!(f, "@{l}:{{{body}}}"),
        }
    }
}
