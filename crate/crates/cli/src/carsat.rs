//! Standalone DIMACS solver used by the test harness.
//!
//! Reads a `p cnf` file, optionally with `a <lits> 0` assumption lines, and
//! solves. Exit code 10 and a `v` model line on satisfiable; exit code 20
//! and a `u` core line (the assumption subset responsible) on unsatisfiable.

use car::dimacs::parse_dimacs;
use car::sat::{SolveResult, Solver};
use car::Var;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let (Some(path), None) = (args.next(), args.next()) else {
        eprintln!("usage: carsat <file.cnf>");
        return ExitCode::from(64);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {path}: {e}");
            return ExitCode::from(66);
        }
    };
    let problem = match parse_dimacs(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {path}: {e}");
            return ExitCode::from(65);
        }
    };
    let mut solver = Solver::new();
    solver.ensure_vars(problem.num_vars);
    for clause in &problem.clauses {
        solver.add_clause(clause);
    }
    match solver.solve(&problem.assumptions) {
        SolveResult::Sat(m) => {
            println!("s SATISFIABLE");
            let mut line = String::from("v");
            for v in 1..=problem.num_vars {
                let lit = if m.var_value(Var(v)) {
                    v as i64
                } else {
                    -(v as i64)
                };
                line.push_str(&format!(" {lit}"));
            }
            line.push_str(" 0");
            println!("{line}");
            ExitCode::from(10)
        }
        SolveResult::Unsat { core, .. } => {
            println!("s UNSATISFIABLE");
            let mut line = String::from("u");
            for l in core.iter() {
                line.push_str(&format!(" {}", l.to_dimacs()));
            }
            line.push_str(" 0");
            println!("{line}");
            ExitCode::from(20)
        }
    }
}
