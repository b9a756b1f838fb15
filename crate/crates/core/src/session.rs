//! Loading a program for directing.
//!
//! Labels cannot be added to a running program, so the commands a session
//! wants to use later are listed up front (the predirect list). Loading
//! inserts their labels and allocates their counters and arrays, with every
//! stored procedure set to `continue`. Issuing such a command at runtime then
//! only has to place its procedures. Controller and director load the same
//! source and list, so they agree on the program image and label codes.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::casp::{Array, CaspProgram, LabelCodec, MachineState};
use crate::direction::{
    compile, compile_condition, compile_count_ctl, compile_print, compile_trace_ctl, compile_unset,
    count_body, count_subject, parse_direction, resolve_break_position, trace_body, BreakTarget,
    Capacities, CompileError, CountKind, DirectionCommand, DirectionParseError, DirectorScript,
    FactSet, FactTag, LabelAllocator,
};
use crate::host::{
    insert_labels, labels_in_order, normalize, parse_program, stmt_at, ParseError, Position,
    Program, Stmt,
};
use crate::label::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionConfig {
    pub caps: Capacities,
    /// Require an issued breakpoint before `print`.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReservationKey {
    Break(Position),
    Watch(String),
    Trace(String),
    Count(CountKind, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reservation {
    pub command: DirectionCommand,
    pub labels: Vec<Label>,
    /// Trace buffer size, for traces.
    pub capacity: Option<u64>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("program: {0}")]
    Program(#[from] ParseError),
    #[error("predirect line {line}: {source}")]
    PredirectSyntax {
        line: usize,
        source: DirectionParseError,
    },
    #[error("predirect line {line}: `{command}` cannot be reserved")]
    NotReservable { line: usize, command: String },
    #[error("predirect line {line}: `{command}` is listed twice")]
    Duplicate { line: usize, command: String },
    #[error("predirect line {line}: {source}")]
    Compile { line: usize, source: CompileError },
    #[error("predirect line {line}: {name} is already in use")]
    NameCollision { line: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("`{0}` was not reserved at load; add it to the predirect list")]
    NotReserved(String),
    #[error("budget {budget} exceeds the {reserved} slots reserved at load")]
    BudgetExceedsReservation { budget: u64, reserved: u64 },
    #[error("label {0} belongs to another command")]
    LabelInUse(Label),
}

#[derive(Debug, Clone)]
pub struct Session {
    /// Normalized program with all reserved labels.
    pub program: Program,
    pub codec: LabelCodec,
    /// Controller state at program start.
    pub initial: MachineState,
    pub reservations: BTreeMap<ReservationKey, Reservation>,
    pub config: SessionConfig,
}

/// Parses a predirect list: one command per line, blank lines and lines
/// starting with `#` or `//` ignored. Returns (line number, command).
pub fn parse_predirect(text: &str) -> Result<Vec<(usize, DirectionCommand)>, SessionError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("//") {
            continue;
        }
        let cmd = parse_direction(line).map_err(|source| SessionError::PredirectSyntax {
            line: i + 1,
            source,
        })?;
        out.push((i + 1, cmd));
    }
    Ok(out)
}

impl Session {
    pub fn load(
        source: &str,
        predirect: &str,
        config: SessionConfig,
    ) -> Result<Self, SessionError> {
        let program = parse_program(source)?;
        let list = parse_predirect(predirect)?;
        Session::from_program(&program, &list, config)
    }

    pub fn from_program(
        program: &Program,
        predirect: &[(usize, DirectionCommand)],
        config: SessionConfig,
    ) -> Result<Self, SessionError> {
        let mut p = normalize(program);
        let mut state = MachineState::new();
        for g in &p.globals {
            state.counters.insert(g.clone(), 0);
        }
        let mut alloc = LabelAllocator::new();
        let mut reservations = BTreeMap::new();
        let facts = FactSet::new();
        for (line, cmd) in predirect {
            let line = *line;
            let (key, capacity) = match cmd {
                DirectionCommand::Break(BreakTarget::Pos(at), _) => {
                    let pos = resolve_break_position(&p, at)
                        .map_err(|source| SessionError::Compile { line, source })?;
                    (ReservationKey::Break(pos), None)
                }
                DirectionCommand::Watch(x, _) => (ReservationKey::Watch(x.clone()), None),
                DirectionCommand::TraceStart { var, budget, .. } => {
                    (ReservationKey::Trace(var.clone()), Some(*budget))
                }
                DirectionCommand::CountStart { kind, target, .. } => {
                    (ReservationKey::Count(*kind, target.clone()), None)
                }
                _ => {
                    return Err(SessionError::NotReservable {
                        line,
                        command: cmd.to_string(),
                    })
                }
            };
            if reservations.contains_key(&key) {
                return Err(SessionError::Duplicate {
                    line,
                    command: cmd.to_string(),
                });
            }
            let delta = compile(&p, &facts, &mut alloc, config.caps, false, cmd)
                .map_err(|source| SessionError::Compile { line, source })?;
            p = insert_labels(&p, &delta.program_edit).map_err(|e| SessionError::Compile {
                line,
                source: match e {
                    crate::host::TransformError::LabelExists(l) => CompileError::LabelExists(l),
                    crate::host::TransformError::PositionNotExtend(pos) => {
                        CompileError::PositionNotExtend(pos.to_string())
                    }
                },
            })?;
            let c = &delta.controller;
            for name in c.counters.keys().chain(c.arrays.keys()) {
                if state.has_name(name) {
                    return Err(SessionError::NameCollision {
                        line,
                        name: name.clone(),
                    });
                }
            }
            state
                .counters
                .extend(c.counters.iter().map(|(k, v)| (k.clone(), *v)));
            state.arrays.extend(
                c.arrays
                    .iter()
                    .map(|(k, cap)| (k.clone(), Array::new(*cap))),
            );
            let labels = match &delta.script {
                DirectorScript::Switch { placements, .. } => {
                    placements.iter().map(|(l, _)| l.clone()).collect()
                }
                _ => Vec::new(),
            };
            reservations.insert(
                key,
                Reservation {
                    command: cmd.clone(),
                    labels,
                    capacity,
                },
            );
        }
        let mut codec = LabelCodec::new();
        for l in labels_in_order(&p) {
            codec.register(&l);
            state.procedures.insert(l, CaspProgram::Continue);
        }
        Ok(Session {
            program: p,
            codec,
            initial: state,
            reservations,
            config,
        })
    }

    pub fn reservation(&self, key: &ReservationKey) -> Option<&Reservation> {
        self.reservations.get(key)
    }

    fn reserved_labels(&self) -> impl Iterator<Item = (&ReservationKey, &Label)> {
        self.reservations
            .iter()
            .flat_map(|(k, r)| r.labels.iter().map(move |l| (k, l)))
    }

    /// The label a breakpoint at `target` uses: the reserved breakpoint label
    /// at that extension point, or else a source label there.
    pub fn break_label(&self, target: &BreakTarget) -> Result<Label, PlanError> {
        let owner = |l: &Label| {
            self.reserved_labels()
                .find(|(_, x)| *x == l)
                .map(|(k, _)| k)
        };
        match target {
            BreakTarget::Label(l) => {
                if !self.codec.contains(l) {
                    return Err(CompileError::UnknownLabel(l.clone()).into());
                }
                match owner(l) {
                    None | Some(ReservationKey::Break(_)) => Ok(l.clone()),
                    Some(_) => Err(PlanError::LabelInUse(l.clone())),
                }
            }
            BreakTarget::Pos(at) => {
                let pos = resolve_break_position(&self.program, at)?;
                if let Some(r) = self.reservation(&ReservationKey::Break(pos.clone())) {
                    return Ok(r.labels[0].clone());
                }
                let Ok(Stmt::Extend(labels)) = stmt_at(&self.program, &pos) else {
                    unreachable!("resolved to an extension point");
                };
                labels
                    .iter()
                    .find(|l| owner(l).is_none())
                    .cloned()
                    .ok_or_else(|| PlanError::NotReserved(format!("break {at}")))
            }
        }
    }

    fn reserved(
        &self,
        key: ReservationKey,
        cmd: &DirectionCommand,
    ) -> Result<&Reservation, PlanError> {
        self.reservation(&key)
            .ok_or_else(|| PlanError::NotReserved(cmd.to_string()))
    }

    /// The director script for issuing `cmd` against the ledger `facts`.
    pub fn plan(
        &self,
        facts: &FactSet,
        cmd: &DirectionCommand,
    ) -> Result<DirectorScript, PlanError> {
        use DirectionCommand as D;
        let p = &self.program;
        let switch_on = |tag: FactTag, subject: String, labels: &[Label], body: CaspProgram| {
            DirectorScript::Switch {
                tag,
                subject,
                to: true,
                placements: labels.iter().map(|l| (l.clone(), body.clone())).collect(),
            }
        };
        Ok(match cmd {
            D::Print(x) => compile_print(p, facts, x, self.config.strict)?.script,
            D::Break(target, cond) => {
                let l = self.break_label(target)?;
                switch_on(
                    FactTag::Break,
                    l.to_string(),
                    std::slice::from_ref(&l),
                    compile_condition(cond, CaspProgram::Break),
                )
            }
            D::Unbreak(BreakTarget::Pos(_)) | D::Unbreak(BreakTarget::Label(_)) => {
                compile_unset(p, facts, cmd)?.script
            }
            D::Watch(x, cond) => {
                let r = self.reserved(ReservationKey::Watch(x.clone()), cmd)?;
                switch_on(
                    FactTag::Watch,
                    x.clone(),
                    &r.labels,
                    compile_condition(cond, CaspProgram::Break),
                )
            }
            D::Unwatch(_) => compile_unset(p, facts, cmd)?.script,
            D::TraceStart { var, cond, budget } => {
                let r = self.reserved(ReservationKey::Trace(var.clone()), cmd)?;
                let reserved = r.capacity.unwrap_or(0);
                if *budget > reserved {
                    return Err(PlanError::BudgetExceedsReservation {
                        budget: *budget,
                        reserved,
                    });
                }
                switch_on(
                    FactTag::Trace,
                    var.clone(),
                    &r.labels,
                    compile_condition(cond, trace_body(var, *budget)),
                )
            }
            D::Trace(ctl, x) => compile_trace_ctl(p, facts, *ctl, x)?.script,
            D::CountStart {
                kind,
                target,
                cond,
                budget,
            } => {
                if *budget > self.config.caps.count {
                    return Err(CompileError::BudgetExceedsCapacity {
                        budget: *budget,
                        capacity: self.config.caps.count,
                    }
                    .into());
                }
                let r = self.reserved(ReservationKey::Count(*kind, target.clone()), cmd)?;
                switch_on(
                    FactTag::Count,
                    count_subject(*kind, target),
                    &r.labels,
                    compile_condition(cond, count_body(*kind, target, *budget)),
                )
            }
            D::Count(ctl, kind, t) => compile_count_ctl(p, facts, *ctl, *kind, t)?.script,
            D::Resume => DirectorScript::Resume,
            D::Exec(prog) => DirectorScript::Exec(prog.clone()),
        })
    }
}
