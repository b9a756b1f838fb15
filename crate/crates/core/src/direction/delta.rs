//! Applying deltas to (program, controller state, ledger) triples.

use std::collections::BTreeSet;

use thiserror::Error;

use super::compile::{DirectabilityDelta, FactSet, FactTag};
use crate::casp::{Array, MachineState};
use crate::host::{insert_labels, Program, TransformError};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("premise `fact absent` failed: {tag} {subject} is already recorded")]
    FactExists { tag: FactTag, subject: String },
    #[error("premise `L not in p` failed: {0} already occurs in the program")]
    LabelExists(Label),
    #[error("premise `p <_L p'` failed: {0}")]
    PositionNotExtend(String),
    #[error("premise `fresh state` failed: {0} already exists in the controller")]
    NameCollision(String),
    #[error("premise `fresh state` failed: a procedure is already stored at {0}")]
    ProcedureExists(Label),
}

/// Extends `(p, state, facts)` by `delta`.
pub fn apply_delta(
    p: &Program,
    state: &MachineState,
    facts: &FactSet,
    delta: &DirectabilityDelta,
) -> Result<(Program, MachineState, FactSet), ApplyError> {
    if let Some(f) = &delta.fact {
        if facts.contains(f.tag, &f.subject) {
            return Err(ApplyError::FactExists {
                tag: f.tag,
                subject: f.subject.clone(),
            });
        }
    }
    let p2 = insert_labels(p, &delta.program_edit).map_err(|e| match e {
        TransformError::LabelExists(l) => ApplyError::LabelExists(l),
        TransformError::PositionNotExtend(pos) => {
            ApplyError::PositionNotExtend(pos.display_in(p).to_string())
        }
    })?;
    let c = &delta.controller;
    for name in c.counters.keys().chain(c.arrays.keys()) {
        if state.has_name(name) {
            return Err(ApplyError::NameCollision(name.clone()));
        }
    }
    if let Some(l) = c
        .procedures
        .keys()
        .find(|l| state.procedures.contains_key(*l))
    {
        return Err(ApplyError::ProcedureExists(l.clone()));
    }
    let mut s2 = state.clone();
    s2.counters
        .extend(c.counters.iter().map(|(k, v)| (k.clone(), *v)));
    s2.arrays.extend(
        c.arrays
            .iter()
            .map(|(k, cap)| (k.clone(), Array::new(*cap))),
    );
    s2.procedures
        .extend(c.procedures.iter().map(|(k, v)| (k.clone(), v.clone())));
    let mut f2 = facts.clone();
    if let Some(f) = &delta.fact {
        f2.set(f.tag, &f.subject, f.bit);
    }
    Ok((p2, s2, f2))
}

/// True if the two deltas introduce no common state name, label or fact.
pub fn check_disjoint(a: &DirectabilityDelta, b: &DirectabilityDelta) -> bool {
    fn names(d: &DirectabilityDelta) -> BTreeSet<&str> {
        d.controller
            .counters
            .keys()
            .chain(d.controller.arrays.keys())
            .map(String::as_str)
            .collect()
    }
    fn labels(d: &DirectabilityDelta) -> BTreeSet<&Label> {
        d.program_edit
            .keys()
            .chain(d.controller.procedures.keys())
            .collect()
    }
    let facts_clash = match (&a.fact, &b.fact) {
        (Some(x), Some(y)) => x.tag == y.tag && x.subject == y.subject,
        _ => false,
    };
    names(a).is_disjoint(&names(b)) && labels(a).is_disjoint(&labels(b)) && !facts_clash
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::{compile, parse_direction, Capacities, LabelAllocator};
    use crate::host::{normalize, parse_program};

    fn setup() -> (Program, MachineState) {
        let p = normalize(
            &parse_program("int v int w int main(){ v := 1; w := v; v := w + 1; return v }")
                .unwrap(),
        );
        let mut s = MachineState::new();
        for g in &p.globals {
            s.counters.insert(g.clone(), 0);
        }
        (p, s)
    }

    fn delta(p: &Program, alloc: &mut LabelAllocator, line: &str) -> DirectabilityDelta {
        compile(
            p,
            &FactSet::new(),
            alloc,
            Capacities::default(),
            false,
            &parse_direction(line).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn second_application_rejected() {
        let (p, s) = setup();
        let d = delta(&p, &mut LabelAllocator::new(), "trace start v max 4");
        let (p2, s2, f2) = apply_delta(&p, &s, &FactSet::new(), &d).unwrap();
        assert_eq!(s2.array("v_a").unwrap().capacity(), 4);
        assert_eq!(f2.get(FactTag::Trace, "v"), Some(true));
        assert!(matches!(
            apply_delta(&p2, &s2, &f2, &d),
            Err(ApplyError::FactExists { .. })
        ));
    }

    #[test]
    fn disjointness() {
        let (p, _) = setup();
        let mut a = LabelAllocator::new();
        let br = delta(&p, &mut a, "break main/1");
        let tr = delta(&p, &mut a, "trace start v max 3");
        let wa = delta(&p, &mut a, "watch v");
        assert!(check_disjoint(&br, &tr));
        assert!(check_disjoint(&tr, &wa));
        let tr2 = delta(&p, &mut LabelAllocator::new(), "trace start v max 3");
        assert!(!check_disjoint(&tr, &tr2));
    }

    #[test]
    fn names_collide_with_existing_state() {
        let (p, mut s) = setup();
        s.counters.insert("v_i".into(), 3);
        let d = delta(&p, &mut LabelAllocator::new(), "trace start v max 3");
        assert_eq!(
            apply_delta(&p, &s, &FactSet::new(), &d),
            Err(ApplyError::NameCollision("v_i".into()))
        );
    }
}
