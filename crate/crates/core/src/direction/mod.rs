//! Direction commands and their compilation into controller programs.

mod command;
mod compile;
mod delta;

pub use command::{
    parse_direction, BreakTarget, Condition, CountKind, Ctl, DirectionCommand, DirectionParseError,
    SourcePos,
};
pub use compile::{
    compile, compile_break, compile_condition, compile_count_ctl, compile_count_start,
    compile_print, compile_trace_ctl, compile_trace_start, compile_unset, compile_watch,
    count_body, count_subject, label_tag, owned_labels, resolve_break_position, resolve_count_kind,
    resolve_unbreak, trace_body, Capacities, CompileError, ControllerDelta, CountNames,
    DirectabilityDelta, DirectorFact, DirectorScript, FactSet, FactTag, LabelAllocator, TraceNames,
};
pub use delta::{apply_delta, check_disjoint, ApplyError};
