//! Static analyses over host programs: positions, the statement at a
//! position, declared variables, label lookup and the placement positions
//! used by the direction compiler.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::{Position, Program, Stmt};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("position {position} does not address a statement: {reason}")]
    InvalidPosition {
        position: Position,
        reason: &'static str,
    },
    #[error("{kind} target {name} is not declared")]
    UnknownTarget { kind: PlacementKind, name: String },
}

/// Where a direction command wants its extension points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlacementKind {
    /// Just after every assignment to a variable.
    PostUpdate,
    /// Just after every statement whose expressions mention a variable.
    PostRead,
    /// Just before the first statement of a function.
    CallEntry,
}

impl std::fmt::Display for PlacementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlacementKind::PostUpdate => "post-update",
            PlacementKind::PostRead => "post-read",
            PlacementKind::CallEntry => "call-entry",
        })
    }
}

/// Visits every statement with its position, outermost first.
pub fn walk<'a>(p: &'a Program, mut visit: impl FnMut(&Position, &'a Stmt)) {
    fn go<'a>(
        body: &'a [Stmt],
        prefix: &mut Vec<usize>,
        visit: &mut impl FnMut(&Position, &'a Stmt),
    ) {
        for (i, s) in body.iter().enumerate() {
            prefix.push(i);
            visit(&Position::new(prefix.clone()), s);
            if let Stmt::If(_, inner) = s {
                go(inner, prefix, visit);
            }
            prefix.pop();
        }
    }
    for (fi, f) in p.functions.iter().enumerate() {
        go(&f.body, &mut vec![fi], &mut visit);
    }
}

/// Every statement position plus the one-past-end slot of each statement
/// list, recursing into if-bodies.
pub fn positions(p: &Program) -> BTreeSet<Position> {
    fn go(body: &[Stmt], prefix: &mut Vec<usize>, out: &mut BTreeSet<Position>) {
        for (i, s) in body.iter().enumerate() {
            prefix.push(i);
            out.insert(Position::new(prefix.clone()));
            if let Stmt::If(_, inner) = s {
                go(inner, prefix, out);
            }
            prefix.pop();
        }
        prefix.push(body.len());
        out.insert(Position::new(prefix.clone()));
        prefix.pop();
    }
    let mut out = BTreeSet::new();
    for (fi, f) in p.functions.iter().enumerate() {
        go(&f.body, &mut vec![fi], &mut out);
    }
    out
}

pub fn stmt_at<'a>(p: &'a Program, pos: &Position) -> Result<&'a Stmt, AnalysisError> {
    let invalid = |reason| AnalysisError::InvalidPosition {
        position: pos.clone(),
        reason,
    };
    let path = pos.path();
    let func = p
        .functions
        .get(path[0])
        .ok_or_else(|| invalid("no such function"))?;
    let mut body: &[Stmt] = &func.body;
    let (last, inner) = path[1..]
        .split_last()
        .expect("positions have a statement index");
    for &i in inner {
        match body.get(i) {
            Some(Stmt::If(_, nested)) => body = nested,
            Some(_) => return Err(invalid("descends into a statement without a body")),
            None => return Err(invalid("index out of range")),
        }
    }
    match body.get(*last) {
        Some(s) => Ok(s),
        None if *last == body.len() => Err(invalid("one-past-end slot")),
        None => Err(invalid("index out of range")),
    }
}

/// Declared global variables. Function parameters are not included.
pub fn vars(p: &Program) -> BTreeSet<String> {
    p.globals.iter().cloned().collect()
}

pub fn placement_positions(
    p: &Program,
    kind: PlacementKind,
    target: &str,
) -> Result<BTreeSet<Position>, AnalysisError> {
    let unknown = || AnalysisError::UnknownTarget {
        kind,
        name: target.to_string(),
    };
    let mut out = BTreeSet::new();
    match kind {
        PlacementKind::CallEntry => {
            let fi = p.function_index(target).ok_or_else(unknown)?;
            out.insert(Position::new(vec![fi, 0]));
        }
        PlacementKind::PostUpdate | PlacementKind::PostRead => {
            if !p.globals.iter().any(|g| g == target) {
                return Err(unknown());
            }
            walk(p, |pos, s| {
                // A parameter with the same name shadows the global.
                if p.functions[pos.function()]
                    .params
                    .iter()
                    .any(|x| x == target)
                {
                    return;
                }
                let hit = match (kind, s) {
                    (PlacementKind::PostUpdate, Stmt::Assign(x, _)) => x == target,
                    (PlacementKind::PostRead, Stmt::Assign(_, e)) => e.mentions(target),
                    (PlacementKind::PostRead, Stmt::If(c, _)) => c.mentions(target),
                    _ => false,
                };
                if hit {
                    out.insert(pos.succ());
                }
            });
        }
    }
    Ok(out)
}

pub fn contains_label(p: &Program, label: &Label) -> bool {
    let mut found = false;
    walk(p, |_, s| {
        if let Stmt::Extend(ls) = s {
            found |= ls.contains(label);
        }
    });
    found
}

pub fn label_positions<'a>(
    p: &Program,
    labels: impl IntoIterator<Item = &'a Label>,
) -> BTreeSet<Position> {
    let wanted: BTreeSet<&Label> = labels.into_iter().collect();
    let mut out = BTreeSet::new();
    walk(p, |pos, s| {
        if let Stmt::Extend(ls) = s {
            if ls.iter().any(|l| wanted.contains(l)) {
                out.insert(pos.clone());
            }
        }
    });
    out
}

/// All labels in traversal order (functions in declaration order, statements
/// in order, labels within an extension point in declared order).
pub fn labels_in_order(p: &Program) -> Vec<Label> {
    let mut out = Vec::new();
    walk(p, |_, s| {
        if let Stmt::Extend(ls) = s {
            out.extend(ls.iter().cloned());
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::parse::parse_program;
    use crate::host::transform::normalize;

    fn pos(path: &[usize]) -> Position {
        Position::new(path.to_vec())
    }

    #[test]
    fn positions_of_flat_and_nested_bodies() {
        let p = parse_program("int v int main(){ v := 0; v := 1; return v }").unwrap();
        assert_eq!(
            positions(&p),
            [pos(&[0, 0]), pos(&[0, 1]), pos(&[0, 2])]
                .into_iter()
                .collect()
        );

        let p = parse_program("int v int main(){ if v then { skip }; return v }").unwrap();
        assert_eq!(
            positions(&p),
            [pos(&[0, 0]), pos(&[0, 0, 0]), pos(&[0, 0, 1]), pos(&[0, 1])]
                .into_iter()
                .collect()
        );

        let p = parse_program("int main(){ return 0 }").unwrap();
        assert_eq!(positions(&p), [pos(&[0, 0])].into_iter().collect());
    }

    #[test]
    fn stmt_at_lookups() {
        let p =
            parse_program("int a int main(){ a := 0; if a then { a := 9 }; return a }").unwrap();
        assert_eq!(
            stmt_at(&p, &pos(&[0, 1, 0])).unwrap(),
            &Stmt::Assign("a".into(), crate::host::Expr::Num(9))
        );
        assert!(matches!(
            stmt_at(&p, &pos(&[0, 2])),
            Err(AnalysisError::InvalidPosition {
                reason: "one-past-end slot",
                ..
            })
        ));
        assert!(stmt_at(&p, &pos(&[0, 0, 0])).is_err());
        assert!(stmt_at(&p, &pos(&[3, 0])).is_err());
        assert!(stmt_at(&p, &pos(&[0, 7])).is_err());
    }

    #[test]
    fn vars_excludes_parameters() {
        let p = parse_program("int v int w int f(x){ return x } return f(1)").unwrap();
        assert_eq!(
            vars(&p),
            ["v".to_string(), "w".to_string()].into_iter().collect()
        );
        let p = parse_program("int main(){ return 0 }").unwrap();
        assert!(vars(&p).is_empty());
    }

    #[test]
    fn placement_examples() {
        let p = parse_program("int v int w int main(){ v := 0; w := v; v := v + 1; return v }")
            .unwrap();
        assert_eq!(
            placement_positions(&p, PlacementKind::PostUpdate, "v").unwrap(),
            [pos(&[0, 1]), pos(&[0, 3])].into_iter().collect()
        );
        assert_eq!(
            placement_positions(&p, PlacementKind::PostRead, "v").unwrap(),
            [pos(&[0, 2]), pos(&[0, 3])].into_iter().collect()
        );
        assert_eq!(
            placement_positions(&p, PlacementKind::CallEntry, "main").unwrap(),
            [pos(&[0, 0])].into_iter().collect()
        );
        assert!(placement_positions(&p, PlacementKind::PostUpdate, "zz").is_err());
        assert!(placement_positions(&p, PlacementKind::CallEntry, "zz").is_err());
    }

    #[test]
    fn parameters_shadow_globals_for_placement() {
        let p =
            parse_program("int v int f(v){ v := 1; return v } int main(){ v := f(0); return v }")
                .unwrap();
        assert_eq!(
            placement_positions(&p, PlacementKind::PostUpdate, "v").unwrap(),
            [pos(&[1, 1])].into_iter().collect()
        );
    }

    #[test]
    fn post_update_addresses_extends_after_normalizing() {
        let p = normalize(
            &parse_program("int v int main(){ v := 0; if v then { v := 2 }; return v }").unwrap(),
        );
        for pos in placement_positions(&p, PlacementKind::PostUpdate, "v").unwrap() {
            assert!(stmt_at(&p, &pos).unwrap().is_extend(), "{pos}");
        }
    }

    #[test]
    fn label_lookup() {
        let p = parse_program("int main(){ extend{L, M}; skip; return 0 }").unwrap();
        let l = Label::new("L").unwrap();
        let m = Label::new("M").unwrap();
        assert!(contains_label(&p, &l));
        assert!(!contains_label(&p, &Label::new("Q").unwrap()));
        assert_eq!(
            label_positions(&p, [&l]),
            [pos(&[0, 0])].into_iter().collect()
        );
        assert_eq!(
            label_positions(&p, [&l, &m]),
            [pos(&[0, 0])].into_iter().collect()
        );
        assert!(label_positions(&p, [&Label::new("Q").unwrap()]).is_empty());
    }
}
