//! The director: keeps the fact ledger, turns direction commands into
//! controller exchanges, and renders their results.

mod link;
mod service;

use std::fmt;

use thiserror::Error;

pub use link::{DirectorLink, EventHandler, Exchange, LinkError, LinkEvent, DEFAULT_TIMEOUT};
pub use service::{DirectorHandle, ServiceError, ServiceEvent};

use crate::casp::{CaspExpr, CaspProgram, Index, Value};
use crate::direction::{
    parse_direction, CompileError, DirectionCommand, DirectionParseError, DirectorFact,
    DirectorScript, FactSet,
};
use crate::label::Label;
use crate::session::{PlanError, Session};
use crate::wire::ErrorCode;

#[derive(Debug, Error)]
pub enum DirectorError {
    #[error(transparent)]
    Syntax(#[from] DirectionParseError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("placing {label}: expected reply {expected}, got {got}")]
    UnexpectedReply {
        label: Label,
        expected: i64,
        got: i64,
    },
}

impl DirectorError {
    /// True when the command itself was at fault rather than the controller
    /// or the connection.
    pub fn is_command_error(&self) -> bool {
        matches!(self, DirectorError::Syntax(_) | DirectorError::Plan(_))
    }

    pub fn controller_code(&self) -> Option<ErrorCode> {
        match self {
            DirectorError::Link(LinkError::Controller(c)) => Some(*c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Value(i64),
    Values(Vec<i64>),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Done => Ok(()),
            Outcome::Value(n) => write!(f, "{n}"),
            Outcome::Values(ns) => {
                for (i, n) in ns.iter().enumerate() {
                    if i > 0 {
                        f.write_str("\n")?;
                    }
                    write!(f, "{n}")?;
                }
                Ok(())
            }
        }
    }
}

/// One fact per line: `tag subject bit`.
pub fn render_facts(facts: &FactSet) -> String {
    facts
        .facts()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// `break at <label> (code N)`, or `break at start (code 0)`.
pub fn render_break(session: &Session, code: i64) -> String {
    match session.codec.code_label(code) {
        Ok(l) => format!("break at {l} (code {code})"),
        Err(_) if code == 0 => "break at start (code 0)".to_string(),
        Err(_) => format!("break at unknown label (code {code})"),
    }
}

pub struct Director<E: Exchange = DirectorLink> {
    session: Session,
    facts: FactSet,
    link: E,
}

impl<E: Exchange> Director<E> {
    pub fn new(session: Session, link: E) -> Self {
        Director {
            session,
            facts: FactSet::new(),
            link,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn facts(&self) -> &FactSet {
        &self.facts
    }

    pub fn link(&self) -> &E {
        &self.link
    }

    pub fn link_mut(&mut self) -> &mut E {
        &mut self.link
    }

    pub fn issue_line(&mut self, line: &str) -> Result<Outcome, DirectorError> {
        let cmd = parse_direction(line)?;
        self.issue(&cmd)
    }

    pub fn issue(&mut self, cmd: &DirectionCommand) -> Result<Outcome, DirectorError> {
        let script = self.session.plan(&self.facts, cmd)?;
        self.run_script(&script)
    }

    /// Runs `f` with the controller interactive. A running controller is
    /// interrupted first and resumed afterwards, unless it hit a breakpoint
    /// of its own in the meantime.
    fn paused<T>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<T, DirectorError>,
    ) -> Result<T, DirectorError> {
        if self.link.is_paused() {
            return f(self);
        }
        let breaks = self.link.break_count();
        self.link.exchange(&CaspProgram::Break)?;
        self.link.set_paused();
        let r = f(self);
        if self.link.break_count() == breaks {
            match self.link.exchange(&CaspProgram::Continue) {
                Ok(_) => self.link.set_resumed(breaks),
                Err(e) if r.is_ok() => return Err(e.into()),
                Err(e) => log::warn!("resuming after a failed command: {e}"),
            }
        }
        r
    }

    pub fn run_script(&mut self, script: &DirectorScript) -> Result<Outcome, DirectorError> {
        match script {
            DirectorScript::Nothing => Ok(Outcome::Done),
            DirectorScript::Switch {
                tag,
                subject,
                to,
                placements,
            } => {
                if self.facts.get(*tag, subject) == Some(*to)
                    || (!to && !self.facts.contains(*tag, subject))
                {
                    return Ok(Outcome::Done);
                }
                self.paused(|d| {
                    for (l, body) in placements {
                        let expected =
                            d.session.codec.label_code(l).map_err(|_| {
                                PlanError::from(CompileError::UnknownLabel(l.clone()))
                            })?;
                        let got = d
                            .link
                            .exchange(&CaspProgram::place(l.clone(), body.clone()))?;
                        if got != expected {
                            return Err(DirectorError::UnexpectedReply {
                                label: l.clone(),
                                expected,
                                got,
                            });
                        }
                    }
                    Ok(())
                })?;
                self.facts.set(*tag, subject, *to);
                Ok(Outcome::Done)
            }
            DirectorScript::Query(p) => Ok(Outcome::Value(self.link.exchange(p)?)),
            DirectorScript::Clear(p) => {
                self.link.exchange(p)?;
                Ok(Outcome::Done)
            }
            DirectorScript::TracePrint { index, buffer } => {
                let n = self.link.exchange(&CaspProgram::counter(index))?;
                let mut values = Vec::new();
                for i in 0..n.max(0) {
                    let cell = CaspProgram::Expr(CaspExpr::Value(Value::Cell(
                        buffer.clone(),
                        Index::Num(i),
                    )));
                    values.push(self.link.exchange(&cell)?);
                }
                Ok(Outcome::Values(values))
            }
            DirectorScript::Resume => {
                let breaks = self.link.break_count();
                self.link.exchange(&CaspProgram::Continue)?;
                self.link.set_resumed(breaks);
                Ok(Outcome::Done)
            }
            DirectorScript::Exec(p) => {
                let breaks = self.link.break_count();
                let n = self.link.exchange(p)?;
                if p.ends_in_break() {
                    self.link.set_paused();
                } else if p.ends_in_continue() {
                    self.link.set_resumed(breaks);
                }
                Ok(Outcome::Value(n))
            }
        }
    }

    pub fn fact_list(&self) -> Vec<DirectorFact> {
        self.facts.facts().collect()
    }
}
