//! The host language: a small first-order imperative language over 64-bit
//! integers whose `extend{...}` statements hand control to the controller.

mod analysis;
mod ast;
mod interp;
mod parse;
mod print;
mod transform;

pub use analysis::{
    contains_label, label_positions, labels_in_order, placement_positions, positions, stmt_at,
    vars, walk, AnalysisError, PlacementKind,
};
pub use ast::{BinOp, EntryCall, Expr, FuncDecl, Position, Program, Stmt};
pub use interp::{run, BareStore, Controller, Interpreter, RunError, DEFAULT_MAX_CALL_DEPTH};
pub use parse::{parse_program, ParseError, RESERVED};
pub use transform::{erase_all_labels, erase_labels, insert_labels, normalize, TransformError};
