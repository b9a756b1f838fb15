use crate::label::Label;

/// Array index: a numeral or a counter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Index {
    Num(i64),
    Counter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Num(i64),
    Counter(String),
    Cell(String, Index),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Updatable {
    Counter(String),
    Cell(String, Index),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CaspExpr {
    Value(Value),
    Neg(Value),
    Cmp(CmpOp, Value, Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepOp {
    Inc,
    Dec,
}

/// A controller program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CaspProgram {
    Expr(CaspExpr),
    Assign(Updatable, CaspExpr),
    Step(StepOp, Updatable),
    Seq(Box<CaspProgram>, Box<CaspProgram>),
    If(CaspExpr, Box<CaspProgram>, Box<CaspProgram>),
    Break,
    Continue,
    /// `@L:{P}`: install `P` as the stored procedure for `L`.
    Place(Label, Box<CaspProgram>),
}

impl From<Index> for Value {
    fn from(i: Index) -> Value {
        match i {
            Index::Num(n) => Value::Num(n),
            Index::Counter(x) => Value::Counter(x),
        }
    }
}

impl From<Updatable> for Value {
    fn from(u: Updatable) -> Value {
        match u {
            Updatable::Counter(x) => Value::Counter(x),
            Updatable::Cell(r, i) => Value::Cell(r, i),
        }
    }
}

impl CaspProgram {
    pub fn seq(a: CaspProgram, b: CaspProgram) -> CaspProgram {
        CaspProgram::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence of the given programs. Panics on an empty list.
    pub fn seq_all(items: impl IntoIterator<Item = CaspProgram>) -> CaspProgram {
        let mut items: Vec<_> = items.into_iter().collect();
        let mut acc = items.pop().expect("at least one program");
        while let Some(p) = items.pop() {
            acc = CaspProgram::seq(p, acc);
        }
        acc
    }

    pub fn ite(c: CaspExpr, t: CaspProgram, e: CaspProgram) -> CaspProgram {
        CaspProgram::If(c, Box::new(t), Box::new(e))
    }

    pub fn place(label: Label, body: CaspProgram) -> CaspProgram {
        CaspProgram::Place(label, Box::new(body))
    }

    pub fn counter(name: &str) -> CaspProgram {
        CaspProgram::Expr(CaspExpr::Value(Value::Counter(name.to_string())))
    }

    pub fn contains_placement(&self) -> bool {
        match self {
            CaspProgram::Place(..) => true,
            CaspProgram::Seq(a, b) | CaspProgram::If(_, a, b) => {
                a.contains_placement() || b.contains_placement()
            }
            _ => false,
        }
    }

    /// The first placement nested inside another placement, if any.
    pub fn nested_placement(&self) -> Option<&Label> {
        match self {
            CaspProgram::Place(_, body) => first_placement(body),
            CaspProgram::Seq(a, b) | CaspProgram::If(_, a, b) => {
                a.nested_placement().or_else(|| b.nested_placement())
            }
            _ => None,
        }
    }

    /// True if every control path finishes by executing `break` or
    /// `continue` as its final instruction.
    pub fn ends_in_control(&self) -> bool {
        match self {
            CaspProgram::Break | CaspProgram::Continue => true,
            CaspProgram::Seq(_, b) => b.ends_in_control(),
            CaspProgram::If(_, t, e) => t.ends_in_control() && e.ends_in_control(),
            _ => false,
        }
    }

    /// True if the last instruction along the spine is `continue`.
    pub fn ends_in_continue(&self) -> bool {
        match self {
            CaspProgram::Continue => true,
            CaspProgram::Seq(_, b) => b.ends_in_continue(),
            CaspProgram::If(_, t, e) => t.ends_in_continue() && e.ends_in_continue(),
            _ => false,
        }
    }

    /// True if the last instruction along the spine is `break`.
    pub fn ends_in_break(&self) -> bool {
        match self {
            CaspProgram::Break => true,
            CaspProgram::Seq(_, b) => b.ends_in_break(),
            CaspProgram::If(_, t, e) => t.ends_in_break() && e.ends_in_break(),
            _ => false,
        }
    }
}

fn first_placement(p: &CaspProgram) -> Option<&Label> {
    match p {
        CaspProgram::Place(l, _) => Some(l),
        CaspProgram::Seq(a, b) | CaspProgram::If(_, a, b) => {
            first_placement(a).or_else(|| first_placement(b))
        }
        _ => None,
    }
}
