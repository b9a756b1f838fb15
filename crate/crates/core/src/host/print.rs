//! Source rendering for host programs. Output reparses to an equal AST.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::{BinOp, Expr, FuncDecl, Program, Stmt};

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for g in &self.globals {
            writeln!(f, "int {g}")?;
        }
        for func in &self.functions {
            write_func(f, func)?;
        }
        write!(f, "return {}(", self.entry.func)?;
        write_args(f, &self.entry.args)?;
        writeln!(f, ")")
    }
}

fn write_func(f: &mut Formatter<'_>, func: &FuncDecl) -> fmt::Result {
    let params: Vec<String> = func.params.iter().map(|p| format!("int {p}")).collect();
    writeln!(f, "int {}({}) {{", func.name, params.join(", "))?;
    for s in &func.body {
        write_stmt(f, s, 1)?;
        f.write_str(";\n")?;
    }
    writeln!(f, "    return {}", func.ret)?;
    writeln!(f, "}}")
}

fn write_stmt(f: &mut Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    let pad = "    ".repeat(depth);
    match s {
        Stmt::Skip => write!(f, "{pad}skip"),
        Stmt::Assign(x, e) => write!(f, "{pad}{x} := {e}"),
        Stmt::Extend(labels) => {
            let names: Vec<&str> = labels.iter().map(|l| l.as_str()).collect();
            write!(f, "{pad}extend{{{}}}", names.join(", "))
        }
        Stmt::If(c, body) => {
            writeln!(f, "{pad}if {c} then {{")?;
            for (i, inner) in body.iter().enumerate() {
                write_stmt(f, inner, depth + 1)?;
                f.write_str(if i + 1 < body.len() { ";\n" } else { "\n" })?;
            }
            write!(f, "{pad}}}")
        }
    }
}

fn write_args(f: &mut Formatter<'_>, args: &[Expr]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

fn is_comparison(op: BinOp) -> bool {
    matches!(op, BinOp::Eq | BinOp::Lt)
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Var(x) => f.write_str(x),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                write_args(f, args)?;
                f.write_char(')')
            }
            Expr::Binary(op, l, r) => {
                // Sums are left associative; comparisons do not chain.
                let l_paren = matches!(**l, Expr::Binary(lop, ..) if is_comparison(lop));
                let r_paren = matches!(**r, Expr::Binary(..));
                if l_paren {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if r_paren {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::host::parse::parse_program;

    #[test]
    fn reparses_equal() {
        let src = "int v int w\nint f(int a) { if a < 1 then { v := (a - 1) - -2; extend{L, M} }; skip; return (a == 1) < 2 }\nint main() { w := f(3) + f(1 + 2); return w }\nreturn main()";
        let p = parse_program(src).unwrap();
        let printed = p.to_string();
        assert_eq!(parse_program(&printed).unwrap(), p, "{printed}");
    }
}
