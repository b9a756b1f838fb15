//! Concrete syntax for host programs.
//!
//! ```text
//! int v
//! int w
//! int inc_by(int n) { v := v + n; return v }
//! int main() {
//!     w := inc_by(2);
//!     if w == 2 then { extend{L}; v := 0 };
//!     return v
//! }
//! return main()
//! ```
//!
//! The trailing `return f(args)` is optional and defaults to `main()`.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use super::ast::{BinOp, EntryCall, Expr, FuncDecl, Program, Stmt};
use crate::label::Label;
use crate::lex::{parse_int, tokenize, Tok, Token};

/// Words that cannot name host variables or functions. Controller keywords
/// are included so that every host global stays addressable from the
/// controller language.
pub const RESERVED: &[&str] = &[
    "int", "if", "then", "else", "return", "skip", "extend", "inc", "dec", "break", "continue",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("label {0} is used by more than one extension point")]
    DuplicateLabel(Label),
    #[error("{kind} {name} is declared more than once")]
    DuplicateDecl { kind: &'static str, name: String },
    #[error("entry function {0} is not declared")]
    UnknownEntry(String),
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src).map_err(|e| ParseError::Syntax {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        eof: eof_location(src),
    };
    let program = parser.program()?;
    validate(&program)?;
    Ok(program)
}

fn eof_location(src: &str) -> (usize, usize) {
    let line = src.lines().count().max(1);
    let col = src.lines().last().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn validate(p: &Program) -> Result<(), ParseError> {
    let mut seen = HashSet::new();
    for g in &p.globals {
        if !seen.insert(g.as_str()) {
            return Err(ParseError::DuplicateDecl {
                kind: "variable",
                name: g.clone(),
            });
        }
    }
    let mut funcs = HashSet::new();
    for f in &p.functions {
        if !funcs.insert(f.name.as_str()) {
            return Err(ParseError::DuplicateDecl {
                kind: "function",
                name: f.name.clone(),
            });
        }
        let mut params = HashSet::new();
        for x in &f.params {
            if !params.insert(x.as_str()) {
                return Err(ParseError::DuplicateDecl {
                    kind: "parameter",
                    name: format!("{x} of {}", f.name),
                });
            }
        }
    }
    if p.function(&p.entry.func).is_none() {
        return Err(ParseError::UnknownEntry(p.entry.func.clone()));
    }
    let mut labels = BTreeSet::new();
    for f in &p.functions {
        check_labels(&f.body, &mut labels)?;
    }
    Ok(())
}

fn check_labels(body: &[Stmt], seen: &mut BTreeSet<Label>) -> Result<(), ParseError> {
    for s in body {
        match s {
            Stmt::Extend(ls) => {
                for l in ls {
                    if !seen.insert(l.clone()) {
                        return Err(ParseError::DuplicateLabel(l.clone()));
                    }
                }
            }
            Stmt::If(_, inner) => check_labels(inner, seen)?,
            Stmt::Skip | Stmt::Assign(..) => {}
        }
    }
    Ok(())
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + n).map(|t| &t.tok)
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self
            .tokens
            .get(self.pos)
            .map_or(self.eof, |t| (t.line, t.col));
        Err(ParseError::Syntax {
            line,
            col,
            message: message.into(),
        })
    }

    fn found(&self) -> String {
        self.peek()
            .map_or_else(|| "end of input".to_string(), |t| t.to_string())
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", self.found()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.found()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected identifier, found {}", self.found())),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        while self.eat_keyword("int") {
            let name = self.ident()?;
            if matches!(self.peek(), Some(Tok::Sym("("))) {
                functions.push(self.function_rest(name)?);
            } else {
                globals.push(name);
                self.eat_sym(";");
            }
        }
        let entry = if self.eat_keyword("return") {
            let func = self.ident()?;
            self.expect_sym("(")?;
            let args = self.args()?;
            self.eat_sym(";");
            EntryCall { func, args }
        } else {
            EntryCall {
                func: "main".to_string(),
                args: Vec::new(),
            }
        };
        if self.peek().is_some() {
            return self.error(format!(
                "expected `int` or `return`, found {}",
                self.found()
            ));
        }
        Ok(Program {
            globals,
            functions,
            entry,
        })
    }

    fn function_rest(&mut self, name: String) -> PResult<FuncDecl> {
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.eat_sym(")") {
            loop {
                self.eat_keyword("int");
                params.push(self.ident()?);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        self.expect_sym("{")?;
        let mut body = Vec::new();
        while !self.eat_keyword("return") {
            if self.eat_sym(";") {
                continue;
            }
            body.push(self.stmt()?);
            if !self.is_keyword("return") {
                self.expect_sym(";")?;
            }
        }
        let ret = self.expr()?;
        self.eat_sym(";");
        self.expect_sym("}")?;
        Ok(FuncDecl {
            name,
            params,
            body,
            ret,
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.eat_keyword("skip") {
            return Ok(Stmt::Skip);
        }
        if self.eat_keyword("extend") {
            self.expect_sym("{")?;
            let mut labels = Vec::new();
            if !self.eat_sym("}") {
                loop {
                    let name = self.ident()?;
                    labels.push(Label::new(name).expect("identifiers are valid labels"));
                    if self.eat_sym("}") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            return Ok(Stmt::Extend(labels));
        }
        if self.eat_keyword("if") {
            let cond = self.expr()?;
            self.expect_keyword("then")?;
            self.expect_sym("{")?;
            let mut body = Vec::new();
            loop {
                if self.eat_sym("}") {
                    break;
                }
                if self.eat_sym(";") {
                    continue;
                }
                body.push(self.stmt()?);
                if !self.eat_sym(";") {
                    self.expect_sym("}")?;
                    break;
                }
            }
            if body.is_empty() {
                return self.error("if-body must contain at least one statement");
            }
            return Ok(Stmt::If(cond, body));
        }
        let target = self.ident()?;
        self.expect_sym(":=")?;
        Ok(Stmt::Assign(target, self.expr()?))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.sum()?;
        let op = if self.eat_sym("==") {
            BinOp::Eq
        } else if self.eat_sym("<") {
            BinOp::Lt
        } else {
            return Ok(lhs);
        };
        let rhs = self.sum()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut acc = self.atom()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(acc);
            };
            acc = Expr::binary(op, acc, self.atom()?);
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Digits(d)) => self.number(false, &d),
            Some(Tok::Sym("-")) => match self.peek_at(1).cloned() {
                Some(Tok::Digits(d)) => {
                    self.pos += 1;
                    self.number(true, &d)
                }
                _ => self.error("`-` must be followed by a numeral here"),
            },
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident()?;
                if self.eat_sym("(") {
                    Ok(Expr::Call(name, self.args()?))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => self.error(format!("expected expression, found {}", self.found())),
        }
    }

    fn number(&mut self, negative: bool, digits: &str) -> PResult<Expr> {
        match parse_int(negative, digits) {
            Some(n) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            None => self.error("numeral out of 64-bit range"),
        }
    }
}
