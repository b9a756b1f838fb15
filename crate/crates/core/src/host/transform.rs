//! Program transformations: extension-point normalization and label
//! insertion/erasure.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::analysis::{contains_label, stmt_at};
use super::ast::{Position, Program, Stmt};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("label {0} already occurs in the program")]
    LabelExists(Label),
    #[error("position {0} does not address an extension point")]
    PositionNotExtend(Position),
}

/// Intersperses empty extension points so that every statement list starts
/// and ends with an `extend` and no two non-`extend` statements are
/// adjacent. Existing extension points occupy their slot, so the result is a
/// fixed point.
pub fn normalize(p: &Program) -> Program {
    let mut out = p.clone();
    for f in &mut out.functions {
        f.body = normalize_body(&f.body);
    }
    out
}

fn normalize_body(body: &[Stmt]) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(body.len() * 2 + 1);
    for s in body {
        let s = match s {
            Stmt::If(c, inner) => Stmt::If(c.clone(), normalize_body(inner)),
            other => other.clone(),
        };
        if !s.is_extend() && !out.last().is_some_and(Stmt::is_extend) {
            out.push(Stmt::Extend(Vec::new()));
        }
        out.push(s);
    }
    if !out.last().is_some_and(Stmt::is_extend) {
        out.push(Stmt::Extend(Vec::new()));
    }
    out
}

/// Adds each label to the extension point at its position.
///
/// A new label goes immediately after the last existing label that sorts
/// before it, so the outcome does not depend on the order in which labels
/// from different commands are inserted.
pub fn insert_labels(
    p: &Program,
    placements: &BTreeMap<Label, Position>,
) -> Result<Program, TransformError> {
    for (label, pos) in placements {
        if contains_label(p, label) {
            return Err(TransformError::LabelExists(label.clone()));
        }
        match stmt_at(p, pos) {
            Ok(Stmt::Extend(_)) => {}
            _ => return Err(TransformError::PositionNotExtend(pos.clone())),
        }
    }
    let mut out = p.clone();
    for (label, pos) in placements {
        let Stmt::Extend(labels) = stmt_at_mut(&mut out, pos) else {
            unreachable!("checked above");
        };
        let at = labels.iter().rposition(|l| l < label).map_or(0, |i| i + 1);
        labels.insert(at, label.clone());
    }
    Ok(out)
}

/// Removes the given labels wherever they occur.
pub fn erase_labels(p: &Program, labels: &BTreeSet<Label>) -> Program {
    fn go(body: &mut [Stmt], labels: &BTreeSet<Label>) {
        for s in body {
            match s {
                Stmt::Extend(ls) => ls.retain(|l| !labels.contains(l)),
                Stmt::If(_, inner) => go(inner, labels),
                Stmt::Skip | Stmt::Assign(..) => {}
            }
        }
    }
    let mut out = p.clone();
    for f in &mut out.functions {
        go(&mut f.body, labels);
    }
    out
}

/// Removes every label.
pub fn erase_all_labels(p: &Program) -> Program {
    let all = super::analysis::labels_in_order(p).into_iter().collect();
    erase_labels(p, &all)
}

fn stmt_at_mut<'a>(p: &'a mut Program, pos: &Position) -> &'a mut Stmt {
    let path = pos.path();
    let mut body = &mut p.functions[path[0]].body;
    let (last, inner) = path[1..].split_last().expect("non-empty");
    for &i in inner {
        match &mut body[i] {
            Stmt::If(_, nested) => body = nested,
            _ => panic!("position checked by stmt_at"),
        }
    }
    &mut body[*last]
}
