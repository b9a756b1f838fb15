//! Program-hosted directability.
//!
//! A host program carries `extend{...}` extension points. At each one an
//! embedded controller runs the stored procedures bound to the point's
//! labels; a remote director installs and replaces those procedures over a
//! small packet protocol to get breakpoints, watchpoints, tracing and
//! counting without restarting the program.

pub mod casp;
pub mod controller;
pub mod direction;
pub mod director;
pub mod host;
pub mod label;
mod lex;
pub mod session;
pub mod wire;

pub use label::{InvalidLabel, Label};
