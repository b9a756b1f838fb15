//! Translation of direction commands into directability deltas: the labels
//! a command adds to the program, the state it adds to the controller, the
//! fact it records for the director, and the exchanges the director runs.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::command::{BreakTarget, Condition, CountKind, Ctl, DirectionCommand, SourcePos};
use crate::casp::{CaspExpr, CaspProgram, CmpOp, Index, StepOp, Updatable, Value};
use crate::host::{
    contains_label, placement_positions, stmt_at, PlacementKind, Position, Program, Stmt,
};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("label {0} already occurs in the program")]
    LabelExists(Label),
    #[error("fresh label {0} collides with a label already in the program")]
    FreshLabelCollision(Label),
    #[error("{0} is not a statement position")]
    InvalidPosition(String),
    #[error("{0} is not preceded by an extension point")]
    PositionNotExtend(String),
    #[error("budget {budget} exceeds the capacity of {capacity}")]
    BudgetExceedsCapacity { budget: u64, capacity: u64 },
    #[error("`{0}` needs a command that has not been issued")]
    MissingCapability(String),
    #[error("name {0} is already in use")]
    NameCollision(String),
    #[error("{0} has counts of more than one kind; name the kind")]
    AmbiguousCount(String),
}

/// The token identifying what a fact is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactTag {
    Break,
    Trace,
    Watch,
    Count,
}

impl FactTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FactTag::Break => "<<bp>>",
            FactTag::Trace => "<<t>>",
            FactTag::Watch => "<<w>>",
            FactTag::Count => "<<c>>",
        }
    }
}

impl fmt::Display for FactTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectorFact {
    pub tag: FactTag,
    pub subject: String,
    pub bit: bool,
}

impl fmt::Display for DirectorFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.tag, self.subject, u8::from(self.bit))
    }
}

/// The director's ledger: at most one bit per (tag, subject).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FactSet {
    bits: BTreeMap<(FactTag, String), bool>,
}

impl FactSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, tag: FactTag, subject: &str) -> Option<bool> {
        self.bits.get(&(tag, subject.to_string())).copied()
    }

    pub fn set(&mut self, tag: FactTag, subject: &str, bit: bool) {
        self.bits.insert((tag, subject.to_string()), bit);
    }

    pub fn contains(&self, tag: FactTag, subject: &str) -> bool {
        self.get(tag, subject).is_some()
    }

    pub fn any_with_tag(&self, tag: FactTag) -> bool {
        self.bits.keys().any(|(t, _)| *t == tag)
    }

    pub fn facts(&self) -> impl Iterator<Item = DirectorFact> + '_ {
        self.bits.iter().map(|((tag, subject), bit)| DirectorFact {
            tag: *tag,
            subject: subject.clone(),
            bit: *bit,
        })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Fact subject used for counts: `<kind>:<target>`.
pub fn count_subject(kind: CountKind, target: &str) -> String {
    format!("{kind}:{target}")
}

/// Controller state a command introduces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControllerDelta {
    pub counters: BTreeMap<String, i64>,
    /// Array name to capacity.
    pub arrays: BTreeMap<String, usize>,
    pub procedures: BTreeMap<Label, CaspProgram>,
}

impl ControllerDelta {
    pub fn is_empty(&self) -> bool {
        self.counters.is_empty() && self.arrays.is_empty() && self.procedures.is_empty()
    }
}

/// What the director does when a command is issued.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DirectorScript {
    Nothing,
    /// Unless the fact already holds `to`, place each program (each
    /// exchange answered by the label's code) and then set the fact.
    Switch {
        tag: FactTag,
        subject: String,
        to: bool,
        placements: Vec<(Label, CaspProgram)>,
    },
    /// Send a query and display the numeral.
    Query(CaspProgram),
    /// Send a reset expected to answer 0.
    Clear(CaspProgram),
    /// Read the buffer index, then cells `0..index`.
    TracePrint {
        index: String,
        buffer: String,
    },
    Resume,
    Exec(CaspProgram),
}

impl DirectorScript {
    /// The programs sent when no fact short-circuits the script and, for
    /// trace printing, the buffer is empty.
    pub fn fixed_programs(&self) -> Vec<CaspProgram> {
        match self {
            DirectorScript::Nothing => Vec::new(),
            DirectorScript::Switch { placements, .. } => placements
                .iter()
                .map(|(l, p)| CaspProgram::place(l.clone(), p.clone()))
                .collect(),
            DirectorScript::Query(p) | DirectorScript::Clear(p) | DirectorScript::Exec(p) => {
                vec![p.clone()]
            }
            DirectorScript::TracePrint { index, .. } => vec![CaspProgram::counter(index)],
            DirectorScript::Resume => vec![CaspProgram::Continue],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectabilityDelta {
    pub program_edit: BTreeMap<Label, Position>,
    pub controller: ControllerDelta,
    pub fact: Option<DirectorFact>,
    pub script: DirectorScript,
}

impl DirectabilityDelta {
    fn script_only(script: DirectorScript) -> Self {
        DirectabilityDelta {
            program_edit: BTreeMap::new(),
            controller: ControllerDelta::default(),
            fact: None,
            script,
        }
    }
}

/// Per-resource upper bounds on budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacities {
    pub trace: u64,
    pub count: u64,
}

impl Default for Capacities {
    fn default() -> Self {
        Capacities {
            trace: 4096,
            count: 1 << 20,
        }
    }
}

/// State names for a trace of `X`: `X_i`, `X_of`, `X_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNames {
    pub index: String,
    pub overflow: String,
    pub buffer: String,
}

impl TraceNames {
    pub fn of(var: &str) -> Self {
        TraceNames {
            index: format!("{var}_i"),
            overflow: format!("{var}_of"),
            buffer: format!("{var}_a"),
        }
    }
}

/// State names for a count: `T_count_<kind>` and `T_count_<kind>_of`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountNames {
    pub count: String,
    pub overflow: String,
}

impl CountNames {
    pub fn of(kind: CountKind, target: &str) -> Self {
        let count = format!("{target}_count_{kind}");
        CountNames {
            overflow: format!("{count}_of"),
            count,
        }
    }
}

/// Label tags used when generating fresh labels.
pub fn label_tag(cmd_tag: FactTag, kind: Option<CountKind>) -> &'static str {
    match (cmd_tag, kind) {
        (FactTag::Break, _) => "bp",
        (FactTag::Trace, _) => "t",
        (FactTag::Watch, _) => "w",
        (FactTag::Count, Some(CountKind::Reads)) => "cr",
        (FactTag::Count, Some(CountKind::Writes)) => "cw",
        (FactTag::Count, Some(CountKind::Calls) | None) => "cc",
    }
}

/// Hands out `<subject>__<tag><k>` with `k` counting up per subject and tag.
#[derive(Debug, Clone, Default)]
pub struct LabelAllocator {
    next: BTreeMap<String, usize>,
}

impl LabelAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, p: &Program, subject: &str, tag: &str) -> Result<Label, CompileError> {
        let stem = format!("{subject}__{tag}");
        let k = self.next.entry(stem.clone()).or_insert(0);
        let label = Label::new(format!("{stem}{k}")).expect("built from identifiers");
        *k += 1;
        if contains_label(p, &label) {
            return Err(CompileError::FreshLabelCollision(label));
        }
        Ok(label)
    }
}

/// Labels in `p` of the form `<subject>__<tag><k>`, in traversal order.
pub fn owned_labels(p: &Program, subject: &str, tag: &str) -> Vec<Label> {
    let stem = format!("{subject}__{tag}");
    crate::host::labels_in_order(p)
        .into_iter()
        .filter(|l| {
            l.as_str()
                .strip_prefix(&stem)
                .is_some_and(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
        })
        .collect()
}

pub fn compile_condition(cond: &Condition, t: CaspProgram) -> CaspProgram {
    match cond {
        Condition::True => t,
        Condition::Eq(a, b) => CaspProgram::ite(
            CaspExpr::Cmp(CmpOp::Eq, Value::from(a.clone()), Value::from(b.clone())),
            t,
            CaspProgram::Continue,
        ),
    }
}

/// `if X_i < $ then X_a[X_i] := X; inc X_i; continue else inc X_of; break`
pub fn trace_body(var: &str, budget: u64) -> CaspProgram {
    let n = TraceNames::of(var);
    CaspProgram::ite(
        CaspExpr::Cmp(
            CmpOp::Lt,
            Value::Counter(n.index.clone()),
            Value::Num(budget as i64),
        ),
        CaspProgram::seq_all([
            CaspProgram::Assign(
                Updatable::Cell(n.buffer, Index::Counter(n.index.clone())),
                CaspExpr::Value(Value::Counter(var.to_string())),
            ),
            CaspProgram::Step(StepOp::Inc, Updatable::Counter(n.index)),
            CaspProgram::Continue,
        ]),
        CaspProgram::seq(
            CaspProgram::Step(StepOp::Inc, Updatable::Counter(n.overflow)),
            CaspProgram::Break,
        ),
    )
}

/// `if C < $ then inc C; continue else inc C_of; break`
pub fn count_body(kind: CountKind, target: &str, budget: u64) -> CaspProgram {
    let n = CountNames::of(kind, target);
    CaspProgram::ite(
        CaspExpr::Cmp(
            CmpOp::Lt,
            Value::Counter(n.count.clone()),
            Value::Num(budget as i64),
        ),
        CaspProgram::seq(
            CaspProgram::Step(StepOp::Inc, Updatable::Counter(n.count)),
            CaspProgram::Continue,
        ),
        CaspProgram::seq(
            CaspProgram::Step(StepOp::Inc, Updatable::Counter(n.overflow)),
            CaspProgram::Break,
        ),
    )
}

fn count_placement(kind: CountKind) -> PlacementKind {
    match kind {
        CountKind::Reads => PlacementKind::PostRead,
        CountKind::Writes => PlacementKind::PostUpdate,
        CountKind::Calls => PlacementKind::CallEntry,
    }
}

/// The extension point for a breakpoint at `F/I/...`: the statement itself
/// if it is an extension point, otherwise the one just before it.
pub fn resolve_break_position(p: &Program, at: &SourcePos) -> Result<Position, CompileError> {
    let fi = p
        .function_index(&at.func)
        .ok_or_else(|| CompileError::UnknownFunction(at.func.clone()))?;
    if at.path.is_empty() {
        return Err(CompileError::InvalidPosition(at.to_string()));
    }
    let mut path = vec![fi];
    path.extend(&at.path);
    let pos = Position::new(path);
    let target = match stmt_at(p, &pos) {
        Ok(Stmt::Extend(_)) => pos,
        Ok(_) => pos
            .pred()
            .ok_or_else(|| CompileError::PositionNotExtend(at.to_string()))?,
        // The one-past-end slot is not a statement.
        Err(_) => return Err(CompileError::InvalidPosition(at.to_string())),
    };
    match stmt_at(p, &target) {
        Ok(Stmt::Extend(_)) => Ok(target),
        _ => Err(CompileError::PositionNotExtend(at.to_string())),
    }
}

fn check_var(p: &Program, x: &str) -> Result<(), CompileError> {
    if p.globals.iter().any(|g| g == x) {
        Ok(())
    } else {
        Err(CompileError::UnknownVariable(x.to_string()))
    }
}

fn check_budget(budget: u64, capacity: u64) -> Result<(), CompileError> {
    if budget > capacity {
        Err(CompileError::BudgetExceedsCapacity { budget, capacity })
    } else {
        Ok(())
    }
}

fn check_fresh_names<'a>(
    p: &Program,
    names: impl IntoIterator<Item = &'a String>,
) -> Result<(), CompileError> {
    for n in names {
        if p.globals.contains(n) {
            return Err(CompileError::NameCollision(n.clone()));
        }
    }
    Ok(())
}

fn switch_on(
    tag: FactTag,
    subject: &str,
    procedures: &BTreeMap<Label, CaspProgram>,
    order: &[Label],
) -> DirectorScript {
    DirectorScript::Switch {
        tag,
        subject: subject.to_string(),
        to: true,
        placements: order
            .iter()
            .map(|l| (l.clone(), procedures[l].clone()))
            .collect(),
    }
}

pub fn compile_break(
    p: &Program,
    label: &Label,
    pos: &Position,
    cond: &Condition,
) -> Result<DirectabilityDelta, CompileError> {
    if contains_label(p, label) {
        return Err(CompileError::LabelExists(label.clone()));
    }
    match stmt_at(p, pos) {
        Ok(Stmt::Extend(_)) => {}
        _ => {
            return Err(CompileError::PositionNotExtend(
                pos.display_in(p).to_string(),
            ))
        }
    }
    let body = compile_condition(cond, CaspProgram::Break);
    let mut controller = ControllerDelta::default();
    controller.procedures.insert(label.clone(), body);
    let script = switch_on(
        FactTag::Break,
        label.as_str(),
        &controller.procedures,
        std::slice::from_ref(label),
    );
    Ok(DirectabilityDelta {
        program_edit: BTreeMap::from([(label.clone(), pos.clone())]),
        controller,
        fact: Some(DirectorFact {
            tag: FactTag::Break,
            subject: label.to_string(),
            bit: true,
        }),
        script,
    })
}

/// Shared shape of trace, watch and count: one fresh label per placement
/// position, each initialized with `body`.
fn compile_placed(
    p: &Program,
    alloc: &mut LabelAllocator,
    positions: impl IntoIterator<Item = Position>,
    subject: &str,
    label_tag: &str,
    body: CaspProgram,
    fact: (FactTag, String),
) -> Result<DirectabilityDelta, CompileError> {
    let mut program_edit = BTreeMap::new();
    let mut controller = ControllerDelta::default();
    let mut order = Vec::new();
    for pos in positions {
        let l = alloc.fresh(p, subject, label_tag)?;
        program_edit.insert(l.clone(), pos);
        controller.procedures.insert(l.clone(), body.clone());
        order.push(l);
    }
    let script = switch_on(fact.0, &fact.1, &controller.procedures, &order);
    Ok(DirectabilityDelta {
        program_edit,
        controller,
        fact: Some(DirectorFact {
            tag: fact.0,
            subject: fact.1,
            bit: true,
        }),
        script,
    })
}

pub fn compile_trace_start(
    p: &Program,
    alloc: &mut LabelAllocator,
    var: &str,
    cond: &Condition,
    budget: u64,
    capacity: u64,
) -> Result<DirectabilityDelta, CompileError> {
    check_var(p, var)?;
    check_budget(budget, capacity)?;
    let names = TraceNames::of(var);
    check_fresh_names(p, [&names.index, &names.overflow, &names.buffer])?;
    let positions = placement_positions(p, PlacementKind::PostUpdate, var)
        .map_err(|_| CompileError::UnknownVariable(var.to_string()))?;
    let body = compile_condition(cond, trace_body(var, budget));
    let mut d = compile_placed(
        p,
        alloc,
        positions,
        var,
        "t",
        body,
        (FactTag::Trace, var.to_string()),
    )?;
    d.controller.counters.insert(names.index, 0);
    d.controller.counters.insert(names.overflow, 0);
    d.controller.arrays.insert(names.buffer, budget as usize);
    Ok(d)
}

pub fn compile_watch(
    p: &Program,
    alloc: &mut LabelAllocator,
    var: &str,
    cond: &Condition,
) -> Result<DirectabilityDelta, CompileError> {
    check_var(p, var)?;
    let positions = placement_positions(p, PlacementKind::PostUpdate, var)
        .map_err(|_| CompileError::UnknownVariable(var.to_string()))?;
    compile_placed(
        p,
        alloc,
        positions,
        var,
        "w",
        compile_condition(cond, CaspProgram::Break),
        (FactTag::Watch, var.to_string()),
    )
}

pub fn compile_count_start(
    p: &Program,
    alloc: &mut LabelAllocator,
    kind: CountKind,
    target: &str,
    cond: &Condition,
    budget: u64,
    capacity: u64,
) -> Result<DirectabilityDelta, CompileError> {
    match kind {
        CountKind::Calls if p.function(target).is_none() => {
            return Err(CompileError::UnknownFunction(target.to_string()))
        }
        CountKind::Reads | CountKind::Writes => check_var(p, target)?,
        CountKind::Calls => {}
    }
    check_budget(budget, capacity)?;
    let names = CountNames::of(kind, target);
    check_fresh_names(p, [&names.count, &names.overflow])?;
    let positions = placement_positions(p, count_placement(kind), target)
        .map_err(|_| CompileError::UnknownVariable(target.to_string()))?;
    let mut d = compile_placed(
        p,
        alloc,
        positions,
        target,
        label_tag(FactTag::Count, Some(kind)),
        compile_condition(cond, count_body(kind, target, budget)),
        (FactTag::Count, count_subject(kind, target)),
    )?;
    d.controller.counters.insert(names.count, 0);
    d.controller.counters.insert(names.overflow, 0);
    Ok(d)
}

/// Resolves an `unbreak` target to the label carrying a breakpoint.
pub fn resolve_unbreak(
    p: &Program,
    facts: &FactSet,
    target: &BreakTarget,
) -> Result<Label, CompileError> {
    match target {
        BreakTarget::Label(l) => Ok(l.clone()),
        BreakTarget::Pos(at) => {
            let pos = resolve_break_position(p, at)?;
            let Ok(Stmt::Extend(labels)) = stmt_at(p, &pos) else {
                unreachable!("resolved to an extension point");
            };
            labels
                .iter()
                .find(|l| facts.contains(FactTag::Break, l.as_str()))
                .cloned()
                .ok_or_else(|| CompileError::MissingCapability(format!("unbreak {at}")))
        }
    }
}

/// Deactivation: `unbreak`, `unwatch`, `trace stop`, `count stop`.
pub fn compile_unset(
    p: &Program,
    facts: &FactSet,
    cmd: &DirectionCommand,
) -> Result<DirectabilityDelta, CompileError> {
    let missing = || CompileError::MissingCapability(cmd.to_string());
    let (tag, subject, labels) = match cmd {
        DirectionCommand::Unbreak(t) => {
            let l = resolve_unbreak(p, facts, t)?;
            (FactTag::Break, l.to_string(), vec![l])
        }
        DirectionCommand::Unwatch(x) => (FactTag::Watch, x.clone(), owned_labels(p, x, "w")),
        DirectionCommand::Trace(Ctl::Stop, x) => {
            (FactTag::Trace, x.clone(), owned_labels(p, x, "t"))
        }
        DirectionCommand::Count(Ctl::Stop, kind, t) => {
            let kind = resolve_count_kind(facts, *kind, t).ok_or_else(missing)?;
            (
                FactTag::Count,
                count_subject(kind, t),
                owned_labels(p, t, label_tag(FactTag::Count, Some(kind))),
            )
        }
        _ => return Err(missing()),
    };
    if !facts.contains(tag, &subject) {
        return Err(missing());
    }
    Ok(DirectabilityDelta::script_only(DirectorScript::Switch {
        tag,
        subject,
        to: false,
        placements: labels
            .into_iter()
            .map(|l| (l, CaspProgram::Continue))
            .collect(),
    }))
}

pub fn compile_print(
    p: &Program,
    facts: &FactSet,
    var: &str,
    strict: bool,
) -> Result<DirectabilityDelta, CompileError> {
    check_var(p, var)?;
    if strict && !facts.any_with_tag(FactTag::Break) {
        return Err(CompileError::MissingCapability(format!("print {var}")));
    }
    Ok(DirectabilityDelta::script_only(DirectorScript::Query(
        CaspProgram::counter(var),
    )))
}

fn ctl_script(ctl: Ctl, counter: &str, overflow: &str, buffer: Option<&str>) -> DirectorScript {
    match ctl {
        Ctl::Clear => DirectorScript::Clear(CaspProgram::seq(
            CaspProgram::Assign(
                Updatable::Counter(counter.to_string()),
                CaspExpr::Value(Value::Num(0)),
            ),
            CaspProgram::Assign(
                Updatable::Counter(overflow.to_string()),
                CaspExpr::Value(Value::Num(0)),
            ),
        )),
        Ctl::Full => DirectorScript::Query(CaspProgram::counter(overflow)),
        Ctl::Print => match buffer {
            Some(b) => DirectorScript::TracePrint {
                index: counter.to_string(),
                buffer: b.to_string(),
            },
            None => DirectorScript::Query(CaspProgram::counter(counter)),
        },
        Ctl::Stop => unreachable!("stop is compiled by compile_unset"),
    }
}

pub fn compile_trace_ctl(
    p: &Program,
    facts: &FactSet,
    ctl: Ctl,
    var: &str,
) -> Result<DirectabilityDelta, CompileError> {
    if ctl == Ctl::Stop {
        return compile_unset(p, facts, &DirectionCommand::Trace(ctl, var.to_string()));
    }
    if !facts.contains(FactTag::Trace, var) {
        return Err(CompileError::MissingCapability(
            DirectionCommand::Trace(ctl, var.to_string()).to_string(),
        ));
    }
    let n = TraceNames::of(var);
    Ok(DirectabilityDelta::script_only(ctl_script(
        ctl,
        &n.index,
        &n.overflow,
        Some(&n.buffer),
    )))
}

/// The kind of count a kind-less follow-up refers to: the only kind with a
/// fact for `target`.
pub fn resolve_count_kind(
    facts: &FactSet,
    kind: Option<CountKind>,
    target: &str,
) -> Option<CountKind> {
    if kind.is_some() {
        return kind;
    }
    let mut found = CountKind::ALL
        .into_iter()
        .filter(|k| facts.contains(FactTag::Count, &count_subject(*k, target)));
    match (found.next(), found.next()) {
        (Some(k), None) => Some(k),
        _ => None,
    }
}

pub fn compile_count_ctl(
    p: &Program,
    facts: &FactSet,
    ctl: Ctl,
    kind: Option<CountKind>,
    target: &str,
) -> Result<DirectabilityDelta, CompileError> {
    let cmd = DirectionCommand::Count(ctl, kind, target.to_string());
    if kind.is_none() {
        let n = CountKind::ALL
            .into_iter()
            .filter(|k| facts.contains(FactTag::Count, &count_subject(*k, target)))
            .count();
        if n > 1 {
            return Err(CompileError::AmbiguousCount(target.to_string()));
        }
    }
    if ctl == Ctl::Stop {
        return compile_unset(p, facts, &cmd);
    }
    let kind = resolve_count_kind(facts, kind, target)
        .filter(|k| facts.contains(FactTag::Count, &count_subject(*k, target)))
        .ok_or_else(|| CompileError::MissingCapability(cmd.to_string()))?;
    let n = CountNames::of(kind, target);
    Ok(DirectabilityDelta::script_only(ctl_script(
        ctl,
        &n.count,
        &n.overflow,
        None,
    )))
}

/// Compiles any command against a program image and ledger, allocating
/// fresh labels for commands that need them.
pub fn compile(
    p: &Program,
    facts: &FactSet,
    alloc: &mut LabelAllocator,
    caps: Capacities,
    strict: bool,
    cmd: &DirectionCommand,
) -> Result<DirectabilityDelta, CompileError> {
    use DirectionCommand as D;
    match cmd {
        D::Print(x) => compile_print(p, facts, x, strict),
        D::Break(BreakTarget::Pos(at), cond) => {
            let pos = resolve_break_position(p, at)?;
            let label = alloc.fresh(p, &at.func, label_tag(FactTag::Break, None))?;
            compile_break(p, &label, &pos, cond)
        }
        D::Break(BreakTarget::Label(l), _) => Err(if contains_label(p, l) {
            CompileError::LabelExists(l.clone())
        } else {
            CompileError::UnknownLabel(l.clone())
        }),
        D::Unbreak(_) | D::Unwatch(_) => compile_unset(p, facts, cmd),
        D::Watch(x, cond) => compile_watch(p, alloc, x, cond),
        D::TraceStart { var, cond, budget } => {
            compile_trace_start(p, alloc, var, cond, *budget, caps.trace)
        }
        D::Trace(ctl, x) => compile_trace_ctl(p, facts, *ctl, x),
        D::CountStart {
            kind,
            target,
            cond,
            budget,
        } => compile_count_start(p, alloc, *kind, target, cond, *budget, caps.count),
        D::Count(ctl, kind, t) => compile_count_ctl(p, facts, *ctl, *kind, t),
        D::Resume => Ok(DirectabilityDelta::script_only(DirectorScript::Resume)),
        D::Exec(prog) => Ok(DirectabilityDelta::script_only(DirectorScript::Exec(
            prog.clone(),
        ))),
    }
}
