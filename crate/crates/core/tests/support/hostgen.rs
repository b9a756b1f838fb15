//! Random host programs that always terminate: a function only calls
//! functions declared after it.

use phd_core::host::{BinOp, EntryCall, Expr, FuncDecl, Program, Stmt};
use rand::Rng;

struct Gen<'a, R> {
    rng: &'a mut R,
    globals: Vec<String>,
    nfuncs: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn name_in_scope(&mut self, params: &[String]) -> String {
        let k = self.rng.gen_range(0..self.globals.len() + params.len());
        if k < self.globals.len() {
            self.globals[k].clone()
        } else {
            params[k - self.globals.len()].clone()
        }
    }

    fn expr(&mut self, me: usize, params: &[String], depth: u32) -> Expr {
        let pick = if depth == 0 {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..5)
        };
        match pick {
            0 => Expr::Num(self.rng.gen_range(-3..=3)),
            1 => Expr::Var(self.name_in_scope(params)),
            2 if me + 1 < self.nfuncs => {
                let callee = self.rng.gen_range(me + 1..self.nfuncs);
                let arity = callee % 3;
                let args = (0..arity)
                    .map(|_| self.expr(me, params, depth - 1))
                    .collect();
                Expr::Call(format!("f{callee}"), args)
            }
            _ => {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Eq, BinOp::Lt][self.rng.gen_range(0..4)];
                Expr::binary(
                    op,
                    self.expr(me, params, depth - 1),
                    self.expr(me, params, depth - 1),
                )
            }
        }
    }

    fn stmts(&mut self, me: usize, params: &[String], nest: u32) -> Vec<Stmt> {
        let n = self.rng.gen_range(1..=4);
        (0..n)
            .map(|_| match self.rng.gen_range(0..8) {
                0 => Stmt::Skip,
                1 | 2 if nest > 0 => {
                    let c = self.expr(me, params, 2);
                    Stmt::If(c, self.stmts(me, params, nest - 1))
                }
                _ => {
                    let x = self.name_in_scope(params);
                    Stmt::Assign(x, self.expr(me, params, 2))
                }
            })
            .collect()
    }
}

/// A program with up to 3 globals `g0..` and 4 functions `f0..`; the entry
/// calls `f0`. Parameters sometimes shadow a global.
pub fn program(rng: &mut impl Rng) -> Program {
    let globals: Vec<String> = (0..rng.gen_range(1..=3)).map(|k| format!("g{k}")).collect();
    let nfuncs = rng.gen_range(1..=4);
    let mut g = Gen {
        rng,
        globals: globals.clone(),
        nfuncs,
    };
    let mut functions = Vec::new();
    for me in 0..nfuncs {
        let params: Vec<String> = (0..me % 3)
            .map(|k| {
                if k == 0 && g.rng.gen_ratio(1, 6) {
                    globals[0].clone()
                } else {
                    format!("p{k}")
                }
            })
            .collect();
        let body = g.stmts(me, &params, 2);
        let ret = g.expr(me, &params, 2);
        functions.push(FuncDecl {
            name: format!("f{me}"),
            params,
            body,
            ret,
        });
    }
    Program {
        globals,
        functions,
        entry: EntryCall {
            func: "f0".into(),
            args: Vec::new(),
        },
    }
}
