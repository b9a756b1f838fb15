use std::collections::BTreeMap;
use std::fmt;

use super::ast::CaspProgram;
use crate::label::Label;

/// Batch (`∘`) or interactive (`•`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Batch,
    Interactive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Batch => "batch",
            Mode::Interactive => "interactive",
        })
    }
}

/// A fixed-capacity array; cells start at zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Array {
    cells: Vec<i64>,
}

impl Array {
    pub fn new(capacity: usize) -> Self {
        Array {
            cells: vec![0; capacity],
        }
    }

    pub fn capacity(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, index: i64) -> Option<i64> {
        usize::try_from(index)
            .ok()
            .and_then(|i| self.cells.get(i))
            .copied()
    }

    pub fn get_mut(&mut self, index: i64) -> Option<&mut i64> {
        usize::try_from(index)
            .ok()
            .and_then(move |i| self.cells.get_mut(i))
    }

    pub fn cells(&self) -> &[i64] {
        &self.cells
    }
}

/// Counters, arrays and stored procedures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub counters: BTreeMap<String, i64>,
    pub arrays: BTreeMap<String, Array>,
    pub procedures: BTreeMap<Label, CaspProgram>,
}

impl MachineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counter(&self, name: &str) -> Option<i64> {
        self.counters.get(name).copied()
    }

    pub fn array(&self, name: &str) -> Option<&Array> {
        self.arrays.get(name)
    }

    pub fn procedure(&self, label: &Label) -> Option<&CaspProgram> {
        self.procedures.get(label)
    }

    /// True if `name` is taken in either namespace.
    pub fn has_name(&self, name: &str) -> bool {
        self.counters.contains_key(name) || self.arrays.contains_key(name)
    }
}
