//! Property tests over generated models and formulas.

use car::lits::{Cube, Lit};
use car::sat::Solver;
use car::testkit;
use car::AigModel;
use proptest::prelude::*;

fn verdict_of(inst: &testkit::CnfInstance, assumptions: &[Lit]) -> bool {
    let mut s = Solver::new();
    s.ensure_vars(inst.num_vars);
    for c in &inst.clauses {
        s.add_clause(c);
    }
    s.solve(assumptions).is_sat()
}

/// Near-threshold random 3-CNF, too large to enumerate: self-consistency
/// checks (model validity, core re-solve, order invariance) must hold.
#[test]
fn solver_self_consistency_on_hard_instances() {
    use car::sat::SolveResult;
    use rand::{Rng, SeedableRng};
    for seed in 0..40u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 80u32;
        let m = 340;
        let clauses: Vec<Vec<Lit>> = (0..m)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        Lit::new(car::Var(rng.gen_range(1..=n)), rng.gen_bool(0.5))
                    })
                    .collect()
            })
            .collect();
        let assumptions: Vec<Lit> = (1..=6)
            .map(|v| Lit::new(car::Var(v), rng.gen_bool(0.5)))
            .collect();
        let mut solver = Solver::new();
        solver.ensure_vars(n);
        for c in &clauses {
            solver.add_clause(c);
        }
        match solver.solve(&assumptions) {
            SolveResult::Sat(model) => {
                assert!(clauses.iter().all(|c| c.iter().any(|&l| model.lit_true(l))));
                assert!(assumptions.iter().all(|&l| model.lit_true(l)));
            }
            SolveResult::Unsat { core, conflict_lit } => {
                assert!(core.iter().all(|l| assumptions.contains(l)));
                if let Some(cl) = conflict_lit {
                    assert!(core.contains(&cl));
                }
                assert!(!solver.solve(&core).is_sat());
            }
        }
        // Reversed assumption order: same verdict.
        let mut rev = assumptions.clone();
        rev.reverse();
        let forward = {
            let mut s2 = Solver::new();
            s2.ensure_vars(n);
            for c in &clauses {
                s2.add_clause(c);
            }
            s2.solve(&assumptions).is_sat()
        };
        let mut s3 = Solver::new();
        s3.ensure_vars(n);
        for c in &clauses {
            s3.add_clause(c);
        }
        assert_eq!(s3.solve(&rev).is_sat(), forward, "seed {seed}");
    }
}

proptest! {
    #[test]
    fn literal_negation_is_involutive(n in 1i32..=10_000) {
        for lit in [Lit::from_dimacs(n), Lit::from_dimacs(-n)] {
            prop_assert_eq!(!!lit, lit);
            prop_assert_ne!(!lit, lit);
            prop_assert_eq!((!lit).var(), lit.var());
        }
    }

    #[test]
    fn cube_clause_negation_roundtrips(lits in proptest::collection::vec(1i32..=50, 0..12)) {
        let signed: Vec<i32> = lits.iter().enumerate()
            .map(|(k, &v)| if k % 2 == 0 { v } else { -v })
            .collect();
        let cube = Cube::from_dimacs(&signed);
        prop_assert_eq!(!&!&cube, cube);
    }

    /// Text and binary forms of a generated circuit parse to equal models,
    /// and the text form is a parse/print fixpoint.
    #[test]
    fn model_forms_agree(seed in any::<u64>()) {
        let model = testkit::random_model(seed);
        let text = AigModel::parse(model.to_aag().as_bytes()).unwrap();
        prop_assert_eq!(&text, &model);
        let bin = AigModel::parse(&testkit::to_binary_aig(&model)).unwrap();
        prop_assert_eq!(&bin, &model);
    }

    /// Corrupted circuit files must produce errors, never panics.
    #[test]
    fn parser_survives_mutations(seed in any::<u64>(), flips in 1usize..6) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let model = testkit::random_model(seed % 512);
        let mut bytes = if seed % 2 == 0 {
            model.to_aag().into_bytes()
        } else {
            testkit::to_binary_aig(&model)
        };
        for _ in 0..flips {
            let k = rng.gen_range(0..bytes.len());
            bytes[k] = rng.gen();
        }
        let _ = AigModel::parse(&bytes); // any Result is fine
    }

    /// Permuting the assumption order may change the core but never the
    /// satisfiability verdict.
    #[test]
    fn assumption_order_never_changes_verdict(seed in any::<u64>(), rotation in 0usize..8) {
        let inst = testkit::random_cnf(seed, 14, 40);
        if inst.assumptions.is_empty() {
            return Ok(());
        }
        let baseline = verdict_of(&inst, &inst.assumptions);
        let mut permuted: Vec<Lit> = inst.assumptions.0.clone();
        let len = permuted.len();
        permuted.rotate_left(rotation % len);
        permuted.reverse();
        prop_assert_eq!(verdict_of(&inst, &permuted), baseline);
    }
}
