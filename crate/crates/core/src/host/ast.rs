use std::fmt;

use crate::label::Label;

/// A host program: global integer declarations, function declarations and the
/// entry call `return f(args)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub globals: Vec<String>,
    pub functions: Vec<FuncDecl>,
    pub entry: EntryCall,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntryCall {
    pub func: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub ret: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign(String, Expr),
    /// Body is never empty in a well-formed program.
    If(Expr, Vec<Stmt>),
    /// Extension point; control passes to the controller for each label.
    Extend(Vec<Label>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(i64),
    Var(String),
    Call(String, Vec<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FuncDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }
}

impl Stmt {
    pub fn is_extend(&self) -> bool {
        matches!(self, Stmt::Extend(_))
    }
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// True if `name` occurs as a variable reference anywhere in the expression.
    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => v == name,
            Expr::Call(_, args) => args.iter().any(|a| a.mentions(name)),
            Expr::Binary(_, l, r) => l.mentions(name) || r.mentions(name),
        }
    }
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
        }
    }
}

/// A program position: function index followed by statement indices,
/// outermost first. The last component may equal the length of its list
/// (the slot just past the last statement).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<usize>);

impl Position {
    /// Panics if `path` has fewer than two components.
    pub fn new(path: Vec<usize>) -> Self {
        assert!(
            path.len() >= 2,
            "a position needs a function and a statement index"
        );
        Position(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn function(&self) -> usize {
        self.0[0]
    }

    /// The position just after this one in the same statement list.
    pub fn succ(&self) -> Position {
        let mut path = self.0.clone();
        *path.last_mut().expect("non-empty") += 1;
        Position(path)
    }

    /// The position just before this one, if it is not the first slot.
    pub fn pred(&self) -> Option<Position> {
        let mut path = self.0.clone();
        let last = path.last_mut().expect("non-empty");
        *last = last.checked_sub(1)?;
        Some(Position(path))
    }

    /// Renders as `fname/i/j/...`, substituting the function name.
    pub fn display_in<'a>(&'a self, program: &'a Program) -> impl fmt::Display + 'a {
        DisplayIn(self, program)
    }
}

struct DisplayIn<'a>(&'a Position, &'a Program);

impl fmt::Display for DisplayIn<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = self.0.path();
        match self.1.functions.get(path[0]) {
            Some(func) => f.write_str(&func.name)?,
            None => write!(f, "#{}", path[0])?,
        }
        for i in &path[1..] {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
