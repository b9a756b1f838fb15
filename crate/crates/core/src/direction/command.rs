//! Director command lines.
//!
//! ```text
//! print X
//! break F/I [when V=N]        break L [when V=N]
//! unbreak L                   unbreak F/I
//! watch X [when V=N]          unwatch X
//! trace start X [when V=N] max N
//! trace stop|clear|print|full X
//! count reads|writes|calls T [when V=N] max N
//! count stop|clear|print|full [reads|writes|calls] T
//! continue
//! exec <controller program>
//! ```

use std::fmt;

use thiserror::Error;

use crate::casp::{parse_casp, serialize_casp, CaspProgram, Index};
use crate::label::Label;
use crate::lex::{parse_int, tokenize, Tok, Token};

/// `true`, or an equality between two indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    True,
    Eq(Index, Index),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CountKind {
    Reads,
    Writes,
    Calls,
}

impl CountKind {
    pub const ALL: [CountKind; 3] = [CountKind::Reads, CountKind::Writes, CountKind::Calls];

    pub fn as_str(self) -> &'static str {
        match self {
            CountKind::Reads => "reads",
            CountKind::Writes => "writes",
            CountKind::Calls => "calls",
        }
    }

    fn from_word(w: &str) -> Option<CountKind> {
        CountKind::ALL.into_iter().find(|k| k.as_str() == w)
    }
}

impl fmt::Display for CountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Follow-up operations on a running trace or count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ctl {
    Stop,
    Clear,
    Print,
    Full,
}

impl Ctl {
    fn as_str(self) -> &'static str {
        match self {
            Ctl::Stop => "stop",
            Ctl::Clear => "clear",
            Ctl::Print => "print",
            Ctl::Full => "full",
        }
    }

    fn from_word(w: &str) -> Option<Ctl> {
        [Ctl::Stop, Ctl::Clear, Ctl::Print, Ctl::Full]
            .into_iter()
            .find(|c| c.as_str() == w)
    }
}

/// `F/I/...`: a statement path inside function `F` of the normalized program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourcePos {
    pub func: String,
    pub path: Vec<usize>,
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.func)?;
        for i in &self.path {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BreakTarget {
    Label(Label),
    Pos(SourcePos),
}

impl fmt::Display for BreakTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakTarget::Label(l) => write!(f, "{l}"),
            BreakTarget::Pos(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DirectionCommand {
    Print(String),
    Break(BreakTarget, Condition),
    Unbreak(BreakTarget),
    Watch(String, Condition),
    Unwatch(String),
    TraceStart {
        var: String,
        cond: Condition,
        budget: u64,
    },
    Trace(Ctl, String),
    CountStart {
        kind: CountKind,
        target: String,
        cond: Condition,
        budget: u64,
    },
    /// Without a kind, the command applies to the only count running on
    /// the target.
    Count(Ctl, Option<CountKind>, String),
    Resume,
    Exec(CaspProgram),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (usage: {usage})")]
pub struct DirectionParseError {
    pub message: String,
    pub usage: &'static str,
}

const USAGE_BREAK: &str = "break F/I [when V=N] | break L [when V=N]";
const USAGE_TRACE: &str = "trace start X [when V=N] max N | trace stop|clear|print|full X";
const USAGE_COUNT: &str =
    "count reads|writes|calls T [when V=N] max N | count stop|clear|print|full [KIND] T";
const USAGE_ALL: &str = "print X | break F/I | unbreak L | watch X | unwatch X | trace ... | count ... | continue | exec P";

pub fn parse_direction(line: &str) -> Result<DirectionCommand, DirectionParseError> {
    let trimmed = line.trim();
    if let Some(rest) = trimmed.strip_prefix("exec") {
        if rest.is_empty() || rest.starts_with(char::is_whitespace) {
            let usage = "exec <controller program>";
            return parse_casp(rest)
                .map(DirectionCommand::Exec)
                .map_err(|e| DirectionParseError {
                    message: e.to_string(),
                    usage,
                });
        }
    }
    let tokens = tokenize(trimmed).map_err(|e| DirectionParseError {
        message: e.message,
        usage: USAGE_ALL,
    })?;
    let mut c = Cursor {
        tokens,
        pos: 0,
        usage: USAGE_ALL,
    };
    let cmd = c.command()?;
    if c.pos < c.tokens.len() {
        return c.fail(format!("unexpected {}", c.tokens[c.pos].tok));
    }
    Ok(cmd)
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    usage: &'static str,
}

type PResult<T> = Result<T, DirectionParseError>;

impl Cursor {
    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(DirectionParseError {
            message: message.into(),
            usage: self.usage,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn word(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => self.fail(format!("expected {what}, found {t}")),
            None => self.fail(format!("expected {what}")),
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.peek_word() == Some(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Digits(d)) => {
                let n = d.parse::<u64>();
                self.pos += 1;
                n.or_else(|_| self.fail("number out of range"))
            }
            _ => self.fail("expected a number"),
        }
    }

    fn command(&mut self) -> PResult<DirectionCommand> {
        let head = self.word("a command")?;
        match head.as_str() {
            "print" => {
                self.usage = "print X";
                Ok(DirectionCommand::Print(self.word("a variable")?))
            }
            "break" => {
                self.usage = USAGE_BREAK;
                let t = self.break_target()?;
                Ok(DirectionCommand::Break(t, self.condition()?))
            }
            "unbreak" => {
                self.usage = "unbreak L | unbreak F/I";
                Ok(DirectionCommand::Unbreak(self.break_target()?))
            }
            "watch" => {
                self.usage = "watch X [when V=N]";
                let x = self.word("a variable")?;
                Ok(DirectionCommand::Watch(x, self.condition()?))
            }
            "unwatch" => {
                self.usage = "unwatch X";
                Ok(DirectionCommand::Unwatch(self.word("a variable")?))
            }
            "trace" => {
                self.usage = USAGE_TRACE;
                let sub = self.word("a trace subcommand")?;
                if sub == "start" {
                    let var = self.word("a variable")?;
                    let cond = self.condition()?;
                    let budget = self.budget()?;
                    return Ok(DirectionCommand::TraceStart { var, cond, budget });
                }
                match Ctl::from_word(&sub) {
                    Some(ctl) => Ok(DirectionCommand::Trace(ctl, self.word("a variable")?)),
                    None => self.fail(format!("unknown trace subcommand `{sub}`")),
                }
            }
            "count" => {
                self.usage = USAGE_COUNT;
                let sub = self.word("a count subcommand")?;
                if let Some(kind) = CountKind::from_word(&sub) {
                    let target = self.word("a target")?;
                    let cond = self.condition()?;
                    let budget = self.budget()?;
                    return Ok(DirectionCommand::CountStart {
                        kind,
                        target,
                        cond,
                        budget,
                    });
                }
                let Some(ctl) = Ctl::from_word(&sub) else {
                    return self.fail(format!("unknown count subcommand `{sub}`"));
                };
                let first = self.word("a target")?;
                match (CountKind::from_word(&first), self.peek_word()) {
                    (Some(kind), Some(_)) => {
                        let target = self.word("a target")?;
                        Ok(DirectionCommand::Count(ctl, Some(kind), target))
                    }
                    _ => Ok(DirectionCommand::Count(ctl, None, first)),
                }
            }
            "continue" => Ok(DirectionCommand::Resume),
            other => self.fail(format!("unknown command `{other}`")),
        }
    }

    fn break_target(&mut self) -> PResult<BreakTarget> {
        let name = self.word("a label or F/I position")?;
        if !self.eat_sym("/") {
            return Ok(BreakTarget::Label(
                Label::new(name).expect("identifier tokens are valid labels"),
            ));
        }
        let mut path = vec![self.index()?];
        while self.eat_sym("/") {
            path.push(self.index()?);
        }
        Ok(BreakTarget::Pos(SourcePos { func: name, path }))
    }

    fn index(&mut self) -> PResult<usize> {
        let n = self.number()?;
        usize::try_from(n).or_else(|_| self.fail("index out of range"))
    }

    fn condition(&mut self) -> PResult<Condition> {
        if !self.eat_word("when") {
            return Ok(Condition::True);
        }
        let a = self.operand()?;
        if !(self.eat_sym("=") || self.eat_sym("==")) {
            return self.fail("expected `=` in condition");
        }
        let b = self.operand()?;
        Ok(Condition::Eq(a, b))
    }

    fn operand(&mut self) -> PResult<Index> {
        let negative = self.eat_sym("-");
        match self.peek().cloned() {
            Some(Tok::Digits(d)) => {
                self.pos += 1;
                parse_int(negative, &d)
                    .map(Index::Num)
                    .map_or_else(|| self.fail("number out of range"), Ok)
            }
            Some(Tok::Ident(x)) if !negative => {
                self.pos += 1;
                Ok(Index::Counter(x))
            }
            _ => self.fail("expected a number or variable in condition"),
        }
    }

    fn budget(&mut self) -> PResult<u64> {
        if !self.eat_word("max") {
            return self.fail("expected `max N`");
        }
        match self.number()? {
            0 => self.fail("budget must be positive"),
            n => Ok(n),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::True => Ok(()),
            Condition::Eq(a, b) => write!(f, " when {a}={b}"),
        }
    }
}

impl fmt::Display for DirectionCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DirectionCommand as D;
        match self {
            D::Print(x) => write!(f, "print {x}"),
            D::Break(t, c) => write!(f, "break {t}{c}"),
            D::Unbreak(t) => write!(f, "unbreak {t}"),
            D::Watch(x, c) => write!(f, "watch {x}{c}"),
            D::Unwatch(x) => write!(f, "unwatch {x}"),
            D::TraceStart { var, cond, budget } => {
                write!(f, "trace start {var}{cond} max {budget}")
            }
            D::Trace(ctl, x) => write!(f, "trace {} {x}", ctl.as_str()),
            D::CountStart {
                kind,
                target,
                cond,
                budget,
            } => write!(f, "count {kind} {target}{cond} max {budget}"),
            D::Count(ctl, Some(k), t) => write!(f, "count {} {k} {t}", ctl.as_str()),
            D::Count(ctl, None, t) => write!(f, "count {} {t}", ctl.as_str()),
            D::Resume => f.write_str("continue"),
            D::Exec(p) => write!(f, "exec {}", serialize_casp(p)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> DirectionCommand {
        parse_direction(s).unwrap()
    }

    #[test]
    fn trace_start_with_condition() {
        assert_eq!(
            parse("trace start v when v=5 max 10"),
            DirectionCommand::TraceStart {
                var: "v".into(),
                cond: Condition::Eq(Index::Counter("v".into()), Index::Num(5)),
                budget: 10,
            }
        );
    }

    #[test]
    fn break_at_position() {
        assert_eq!(
            parse("break main/1"),
            DirectionCommand::Break(
                BreakTarget::Pos(SourcePos {
                    func: "main".into(),
                    path: vec![1]
                }),
                Condition::True
            )
        );
        assert!(matches!(
            parse("unbreak main/3/1"),
            DirectionCommand::Unbreak(BreakTarget::Pos(SourcePos { ref path, .. })) if path == &[3, 1]
        ));
        assert!(matches!(
            parse("break L when x == -2"),
            DirectionCommand::Break(BreakTarget::Label(_), Condition::Eq(_, Index::Num(-2)))
        ));
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in [
            "trace banana v",
            "",
            "print",
            "trace start v",
            "trace start v max 0",
            "count writes v",
            "watch v when v",
            "break main/",
            "exec if",
            "continue now",
        ] {
            assert!(parse_direction(bad).is_err(), "{bad:?} parsed");
        }
        let e = parse_direction("trace banana v").unwrap_err();
        assert!(e.to_string().contains("usage: trace start"));
    }

    #[test]
    fn count_forms() {
        assert_eq!(
            parse("count print v"),
            DirectionCommand::Count(Ctl::Print, None, "v".into())
        );
        assert_eq!(
            parse("count clear reads v"),
            DirectionCommand::Count(Ctl::Clear, Some(CountKind::Reads), "v".into())
        );
        // A target may itself be named like a kind.
        assert_eq!(
            parse("count full reads"),
            DirectionCommand::Count(Ctl::Full, None, "reads".into())
        );
    }

    #[test]
    fn display_reparses() {
        for line in [
            "print v",
            "break main/1 when v=5",
            "break L",
            "unbreak main/0",
            "watch v when v=5",
            "unwatch v",
            "trace start w max 500",
            "trace print w",
            "count reads v when x=-1 max 5000",
            "count stop writes u",
            "count full u",
            "continue",
            "exec inc v; continue",
        ] {
            let c = parse(line);
            assert_eq!(c.to_string(), line);
            assert_eq!(parse(&c.to_string()), c);
        }
    }
}
