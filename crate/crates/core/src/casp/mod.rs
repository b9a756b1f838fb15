//! The controller machine: counters, arrays and stored procedures.

mod ast;
mod codec;
mod eval;
mod parse;
mod print;
mod state;

pub use ast::{CaspExpr, CaspProgram, CmpOp, Index, StepOp, Updatable, Value};
pub use codec::{CodecError, LabelCodec};
pub use eval::{eval, eval_in_place, CaspError, Context};
pub use parse::{parse_casp, CaspParseError};
pub use print::serialize_casp;
pub use state::{Array, MachineState, Mode};
