//! Tseitin encoding of the circuit's transition relation.
//!
//! Solver variables are laid out as: the AIGER variables `1..=max_var`
//! (inputs, latch states and gates, unchanged indices), one always-true
//! variable for the constants, next-state variables (one per latch),
//! next-step input variables, and a primed copy of every gate in the cone of
//! influence of the bad literal. The primed cone makes the next-step value
//! of the property available as a single literal, so frame-0 reachability
//! queries need no second circuit unrolling.
//!
//! Every AND gate contributes its three clauses in both polarities; frame
//! clauses over next-state variables constrain gates in both directions, so
//! a one-sided encoding would be unsound here. Given a full assignment to
//! the state and input variables, unit propagation alone determines every
//! gate and next-state variable.

use crate::aig::AigModel;
use crate::lits::{Clause, Cube, Lit, Var};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrimeError {
    #[error("literal {0} is not over a present-state variable")]
    NotStateLit(Lit),
}

/// The transition formula T and the variable maps around it.
#[derive(Clone, Debug)]
pub struct Encoding {
    /// Highest allocated variable index.
    pub num_vars: u32,
    pub state_vars: Vec<Var>,
    pub next_vars: Vec<Var>,
    pub input_vars: Vec<Var>,
    pub next_input_vars: Vec<Var>,
    pub const_true: Lit,
    /// The bad literal over the current step.
    pub bad_now: Lit,
    /// The bad literal over the next step (primed cone of influence).
    pub bad_next: Lit,
    pub trans_clauses: Vec<Clause>,
    is_state_var: Vec<bool>,
    prime_of: Vec<u32>,
    unprime_of: Vec<u32>,
}

/// Builds the CNF of the transition relation for a valid model.
pub fn encode(model: &AigModel) -> Encoding {
    let mv = model.max_var;
    let mut next_free = mv + 1;

    let const_true = Var(next_free).positive();
    next_free += 1;

    let state_vars: Vec<Var> = model.latches.iter().map(|l| Var(l.state >> 1)).collect();
    let input_vars: Vec<Var> = model.inputs.iter().map(|&i| Var(i >> 1)).collect();
    let next_vars: Vec<Var> = (0..model.latches.len())
        .map(|k| Var(next_free + k as u32))
        .collect();
    next_free += model.latches.len() as u32;
    let next_input_vars: Vec<Var> = (0..model.inputs.len())
        .map(|k| Var(next_free + k as u32))
        .collect();
    next_free += model.inputs.len() as u32;

    // Gate lookup and the cone of influence of the bad literal.
    let mut gate_of_var = vec![usize::MAX; mv as usize + 1];
    for (k, a) in model.ands.iter().enumerate() {
        gate_of_var[(a.lhs >> 1) as usize] = k;
    }
    let mut in_coi = vec![false; mv as usize + 1];
    let mut stack = vec![model.bad >> 1];
    while let Some(v) = stack.pop() {
        if v == 0 || in_coi[v as usize] {
            continue;
        }
        in_coi[v as usize] = true;
        if let Some(&k) = Some(&gate_of_var[v as usize]).filter(|&&k| k != usize::MAX) {
            stack.push(model.ands[k].rhs0 >> 1);
            stack.push(model.ands[k].rhs1 >> 1);
        }
    }

    // Primed copies: latches share the next-state vars, inputs get fresh
    // next-step vars, cone gates get fresh primed gate vars.
    let mut prime_of = vec![0u32; mv as usize + 2];
    let mut is_state_var = vec![false; mv as usize + 2];
    for (k, &sv) in state_vars.iter().enumerate() {
        prime_of[sv.index()] = next_vars[k].0;
        is_state_var[sv.index()] = true;
    }
    for (k, &iv) in input_vars.iter().enumerate() {
        prime_of[iv.index()] = next_input_vars[k].0;
    }
    for a in &model.ands {
        let v = (a.lhs >> 1) as usize;
        if in_coi[v] {
            prime_of[v] = next_free;
            next_free += 1;
        }
    }
    let mut unprime_of = vec![0u32; next_free as usize];
    for (v, &pv) in prime_of.iter().enumerate() {
        if pv != 0 {
            unprime_of[pv as usize] = v as u32;
        }
    }

    let now_lit = |aig_lit: u32| -> Lit {
        match aig_lit {
            0 => !const_true,
            1 => const_true,
            l => Lit::new(Var(l >> 1), l & 1 == 1),
        }
    };
    let primed_lit = |aig_lit: u32| -> Lit {
        match aig_lit {
            0 => !const_true,
            1 => const_true,
            l => {
                let pv = prime_of[(l >> 1) as usize];
                debug_assert_ne!(pv, 0, "literal {l} outside the primed cone");
                Lit::new(Var(pv), l & 1 == 1)
            }
        }
    };

    let mut trans_clauses: Vec<Clause> = Vec::new();
    trans_clauses.push(Clause(vec![const_true]));
    for a in &model.ands {
        let g = now_lit(a.lhs);
        let x = now_lit(a.rhs0);
        let y = now_lit(a.rhs1);
        trans_clauses.push(Clause(vec![!g, x]));
        trans_clauses.push(Clause(vec![!g, y]));
        trans_clauses.push(Clause(vec![g, !x, !y]));
    }
    for (k, l) in model.latches.iter().enumerate() {
        let x = next_vars[k].positive();
        let f = now_lit(l.next);
        trans_clauses.push(Clause(vec![!x, f]));
        trans_clauses.push(Clause(vec![x, !f]));
    }
    for a in &model.ands {
        if !in_coi[(a.lhs >> 1) as usize] {
            continue;
        }
        let g = primed_lit(a.lhs);
        let x = primed_lit(a.rhs0);
        let y = primed_lit(a.rhs1);
        trans_clauses.push(Clause(vec![!g, x]));
        trans_clauses.push(Clause(vec![!g, y]));
        trans_clauses.push(Clause(vec![g, !x, !y]));
    }

    let bad_now = now_lit(model.bad);
    let bad_next = primed_lit(model.bad);

    Encoding {
        num_vars: next_free - 1,
        state_vars,
        next_vars,
        input_vars,
        next_input_vars,
        const_true,
        bad_now,
        bad_next,
        trans_clauses,
        is_state_var,
        prime_of,
        unprime_of,
    }
}

impl Encoding {
    /// Maps a present-state literal to its next-state counterpart.
    pub fn prime_lit(&self, l: Lit) -> Result<Lit, PrimeError> {
        let v = l.var().index();
        if !self.is_state_var.get(v).copied().unwrap_or(false) {
            return Err(PrimeError::NotStateLit(l));
        }
        Ok(Lit::new(Var(self.prime_of[v]), l.is_neg()))
    }

    pub fn prime_cube(&self, c: &Cube) -> Result<Cube, PrimeError> {
        c.iter().map(|&l| self.prime_lit(l)).collect()
    }

    pub fn prime_clause(&self, c: &Clause) -> Result<Clause, PrimeError> {
        c.iter().map(|&l| self.prime_lit(l)).collect()
    }

    /// Inverse of [`Encoding::prime_lit`], for tests and debugging.
    pub fn unprime_lit(&self, l: Lit) -> Option<Lit> {
        match self.unprime_of.get(l.var().index()).copied() {
            Some(v) if v != 0 => Some(Lit::new(Var(v), l.is_neg())),
            _ => None,
        }
    }

    /// The clause `!I`: every initial-cube literal negated. Empty for
    /// latch-free models (the engine never asserts it there).
    pub fn not_initial_clause(model: &AigModel) -> Clause {
        !&model.initial_cube()
    }

    /// Dumps T in DIMACS, for debugging.
    pub fn write_dimacs(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "p cnf {} {}", self.num_vars, self.trans_clauses.len())?;
        for c in &self.trans_clauses {
            for l in c.iter() {
                write!(w, "{} ", l.to_dimacs())?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{SolveResult, Solver};
    use crate::testkit;

    fn solver_with(enc: &Encoding) -> Solver {
        let mut s = Solver::new();
        s.ensure_vars(enc.num_vars);
        for c in &enc.trans_clauses {
            s.add_clause(c);
        }
        s
    }

    #[test]
    fn toggler_transition_forced() {
        let model = AigModel::parse(b"aag 1 0 1 1 0\n2 3\n2\n").unwrap();
        let enc = encode(&model);
        let mut s = solver_with(&enc);
        match s.solve(&model.initial_cube()) {
            SolveResult::Sat(m) => {
                assert!(m.var_value(enc.next_vars[0]), "next state must be 1");
            }
            r => panic!("expected sat, got {r:?}"),
        }
        // From state 1 the toggler must step back to 0.
        match s.solve(&Cube::from_dimacs(&[1])) {
            SolveResult::Sat(m) => assert!(!m.var_value(enc.next_vars[0])),
            r => panic!("expected sat, got {r:?}"),
        }
    }

    #[test]
    fn constant_next_function() {
        // Latch with next literal 0: successor is always 0.
        let model = AigModel::parse(b"aag 1 0 1 1 0\n2 0\n2\n").unwrap();
        let enc = encode(&model);
        let mut s = solver_with(&enc);
        for state in [-1i32, 1] {
            match s.solve(&Cube::from_dimacs(&[state])) {
                SolveResult::Sat(m) => assert!(!m.var_value(enc.next_vars[0])),
                r => panic!("expected sat, got {r:?}"),
            }
        }
    }

    #[test]
    fn counter_steps_match_truth_table() {
        let model = testkit::counter2(3);
        let enc = encode(&model);
        let mut s = solver_with(&enc);
        // (bit0=1, bit1=0), i.e. value 1, must step to value 2.
        match s.solve(&Cube::from_dimacs(&[1, -2])) {
            SolveResult::Sat(m) => {
                assert!(!m.var_value(enc.next_vars[0]));
                assert!(m.var_value(enc.next_vars[1]));
            }
            r => panic!("expected sat, got {r:?}"),
        }
    }

    #[test]
    fn transition_agrees_with_simulator() {
        // On every small model: for each (state, input) assignment, the
        // SAT-determined successor equals direct circuit simulation.
        let mut models = testkit::hand_models();
        models.extend((0..25u64).map(|seed| testkit::random_model_with(seed, 6, 2, 12)));
        for model in &models {
            if model.num_latches() > 6 {
                continue;
            }
            let enc = encode(model);
            let mut s = solver_with(&enc);
            for st in testkit::all_bool_vectors(model.num_latches()) {
                for inp in testkit::all_bool_vectors(model.num_inputs()) {
                    let mut assume: Vec<Lit> = Vec::new();
                    for (k, &v) in enc.state_vars.iter().enumerate() {
                        assume.push(Lit::new(v, !st[k]));
                    }
                    for (k, &v) in enc.input_vars.iter().enumerate() {
                        assume.push(Lit::new(v, !inp[k]));
                    }
                    let step = model.eval(&st, &inp);
                    match s.solve(&assume) {
                        SolveResult::Sat(m) => {
                            let got = m.project_bits(&enc.next_vars);
                            assert_eq!(got, step.next, "successor mismatch");
                            assert_eq!(m.lit_true(enc.bad_now), step.bad, "bad mismatch");
                        }
                        r => panic!("expected sat, got {r:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn primed_bad_tracks_next_step() {
        // bad_next must hold exactly when some next-step input drives the
        // successor state into the bad region.
        let model = testkit::and_of_latch_and_input();
        let enc = encode(&model);
        let mut s = solver_with(&enc);
        // Successor of state 1 is 1 (latch holds), so bad_next is reachable
        // by choosing the next input appropriately.
        let mut assume: Vec<Lit> = vec![Lit::new(enc.state_vars[0], false)];
        assume.push(enc.bad_next);
        assert!(s.solve(&assume).is_sat());
    }

    #[test]
    fn prime_roundtrip_and_rejects_non_state() {
        let model = testkit::counter2(3);
        let enc = encode(&model);
        let cube = Cube::from_dimacs(&[1, -2]);
        let primed = enc.prime_cube(&cube).unwrap();
        assert_eq!(primed.len(), cube.len());
        for (orig, p) in cube.iter().zip(primed.iter()) {
            assert_eq!(p.is_neg(), orig.is_neg());
            assert_eq!(enc.unprime_lit(*p), Some(*orig));
        }
        assert_eq!(enc.prime_cube(&Cube::new()).unwrap(), Cube::new());
        // Priming a primed literal (or any non-state literal) is rejected.
        assert!(enc.prime_lit(primed[0]).is_err());
        assert!(enc.prime_lit(enc.const_true).is_err());
    }

    #[test]
    fn not_initial_clause_negates_reset() {
        let model = AigModel::parse(b"aag 2 0 2 0 0 1\n2 2\n4 4 1\n2\n").unwrap();
        assert_eq!(
            Encoding::not_initial_clause(&model),
            Clause::from_dimacs(&[1, -2])
        );
        let empty = AigModel::parse(b"aag 0 0 0 1 0\n0\n").unwrap();
        assert_eq!(Encoding::not_initial_clause(&empty), Clause::new());
    }

    #[test]
    fn dimacs_dump_has_header() {
        let model = testkit::counter2(3);
        let enc = encode(&model);
        let mut buf = Vec::new();
        enc.write_dimacs(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("p cnf "));
        assert_eq!(text.lines().count(), 1 + enc.trans_clauses.len());
    }
}
