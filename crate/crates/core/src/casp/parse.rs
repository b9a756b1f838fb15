//! Text form of controller programs.
//!
//! ```text
//! if v_i < 500 then v_a[v_i] := v; inc v_i; continue else inc v_of; break
//! ```
//!
//! `;` is right-associative and an `else` branch extends as far as possible;
//! parentheses group a sequence. A `-` written directly against digits is
//! part of the numeral, otherwise it negates the following value.

use thiserror::Error;

use super::ast::{CaspExpr, CaspProgram, CmpOp, Index, StepOp, Updatable, Value};
use crate::label::Label;
use crate::lex::{parse_int, tokenize, Tok, Token};

const KEYWORDS: &[&str] = &["if", "then", "else", "inc", "dec", "break", "continue"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaspParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("placement for {0} is nested inside another placement")]
    NestedPlacement(Label),
}

pub fn parse_casp(src: &str) -> Result<CaspProgram, CaspParseError> {
    let tokens = tokenize(src).map_err(|e| CaspParseError::Syntax {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let mut p = Parser { tokens, pos: 0 };
    let prog = p.seq()?;
    if p.pos < p.tokens.len() {
        return p.error(format!("unexpected {}", p.found()));
    }
    if let Some(l) = prog.nested_placement() {
        return Err(CaspParseError::NestedPlacement(l.clone()));
    }
    Ok(prog)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, CaspParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn found(&self) -> String {
        self.peek()
            .map_or_else(|| "end of input".to_string(), |t| t.to_string())
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = match self.tokens.get(self.pos).or(self.tokens.last()) {
            Some(t) if self.pos < self.tokens.len() => (t.line, t.col),
            Some(t) => (t.line, t.col + (t.end - t.start)),
            None => (1, 1),
        };
        Err(CaspParseError::Syntax {
            line,
            col,
            message: message.into(),
        })
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

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected a name, found {}", self.found())),
        }
    }

    fn seq(&mut self) -> PResult<CaspProgram> {
        let first = self.item()?;
        if self.eat_sym(";") {
            Ok(CaspProgram::seq(first, self.seq()?))
        } else {
            Ok(first)
        }
    }

    fn item(&mut self) -> PResult<CaspProgram> {
        if self.eat_keyword("continue") {
            return Ok(CaspProgram::Continue);
        }
        if self.eat_keyword("break") {
            return Ok(CaspProgram::Break);
        }
        if self.eat_keyword("inc") {
            return Ok(CaspProgram::Step(StepOp::Inc, self.updatable()?));
        }
        if self.eat_keyword("dec") {
            return Ok(CaspProgram::Step(StepOp::Dec, self.updatable()?));
        }
        if self.eat_keyword("if") {
            let cond = self.expr()?;
            if !self.eat_keyword("then") {
                return self.error(format!("expected `then`, found {}", self.found()));
            }
            let then = self.seq()?;
            if !self.eat_keyword("else") {
                return self.error(format!("expected `else`, found {}", self.found()));
            }
            let other = self.seq()?;
            return Ok(CaspProgram::ite(cond, then, other));
        }
        if self.eat_sym("@") {
            let name = match self.peek() {
                Some(Tok::Ident(s)) => s.clone(),
                _ => return self.error(format!("expected a label, found {}", self.found())),
            };
            self.pos += 1;
            let label = Label::new(name).expect("identifier tokens are valid labels");
            self.expect_sym(":")?;
            self.expect_sym("{")?;
            let body = self.seq()?;
            self.expect_sym("}")?;
            return Ok(CaspProgram::place(label, body));
        }
        if self.eat_sym("(") {
            let inner = self.seq()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        if self.is_negation() {
            return Ok(CaspProgram::Expr(self.expr()?));
        }
        let first = self.value()?;
        if self.eat_sym(":=") {
            let target = match first {
                Value::Counter(x) => Updatable::Counter(x),
                Value::Cell(r, i) => Updatable::Cell(r, i),
                Value::Num(_) => {
                    self.pos -= 1;
                    return self.error("cannot assign to a numeral");
                }
            };
            return Ok(CaspProgram::Assign(target, self.expr()?));
        }
        Ok(CaspProgram::Expr(self.expr_rest(first)?))
    }

    fn expr(&mut self) -> PResult<CaspExpr> {
        if self.is_negation() {
            self.pos += 1;
            return Ok(CaspExpr::Neg(self.value()?));
        }
        let first = self.value()?;
        self.expr_rest(first)
    }

    fn expr_rest(&mut self, first: Value) -> PResult<CaspExpr> {
        let op = if self.eat_sym("=") || self.eat_sym("==") {
            CmpOp::Eq
        } else if self.eat_sym("<") {
            CmpOp::Lt
        } else {
            return Ok(CaspExpr::Value(first));
        };
        Ok(CaspExpr::Cmp(op, first, self.value()?))
    }

    /// A `-` that is not glued to a following numeral.
    fn is_negation(&self) -> bool {
        match (self.tokens.get(self.pos), self.tokens.get(self.pos + 1)) {
            (Some(m), next) if m.tok == Tok::Sym("-") => !matches!(
                next,
                Some(Token { tok: Tok::Digits(_), start, .. }) if *start == m.end
            ),
            _ => false,
        }
    }

    fn numeral(&mut self) -> PResult<Option<i64>> {
        let negative = match (self.tokens.get(self.pos), self.tokens.get(self.pos + 1)) {
            (
                Some(m),
                Some(Token {
                    tok: Tok::Digits(_),
                    start,
                    ..
                }),
            ) if m.tok == Tok::Sym("-") && *start == m.end => true,
            (
                Some(Token {
                    tok: Tok::Digits(_),
                    ..
                }),
                _,
            ) => false,
            _ => return Ok(None),
        };
        if negative {
            self.pos += 1;
        }
        let Some(Tok::Digits(d)) = self.peek().cloned() else {
            unreachable!("checked above");
        };
        match parse_int(negative, &d) {
            Some(n) => {
                self.pos += 1;
                Ok(Some(n))
            }
            None => self.error("numeral out of 64-bit range"),
        }
    }

    fn index(&mut self) -> PResult<Index> {
        if let Some(n) = self.numeral()? {
            return Ok(Index::Num(n));
        }
        Ok(Index::Counter(self.name()?))
    }

    fn value(&mut self) -> PResult<Value> {
        if let Some(n) = self.numeral()? {
            return Ok(Value::Num(n));
        }
        let name = self.name()?;
        if self.eat_sym("[") {
            let i = self.index()?;
            self.expect_sym("]")?;
            Ok(Value::Cell(name, i))
        } else {
            Ok(Value::Counter(name))
        }
    }

    fn updatable(&mut self) -> PResult<Updatable> {
        match self.value()? {
            Value::Counter(x) => Ok(Updatable::Counter(x)),
            Value::Cell(r, i) => Ok(Updatable::Cell(r, i)),
            Value::Num(_) => {
                self.pos -= 1;
                self.error("expected a counter or array cell")
            }
        }
    }
}
