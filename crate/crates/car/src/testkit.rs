//! Model and formula generators plus brute-force oracles.
//!
//! Everything here exists to cross-check the checker: hand-written circuits
//! with known behaviour, seeded random circuits and CNF instances, an
//! explicit-state BFS reachability oracle, an enumeration SAT oracle, and a
//! binary AIGER encoder used as the ground truth for the binary parser.

use crate::aig::{AigModel, And, Latch};
use crate::frames::OFrames;
use crate::lits::{Cube, Lit, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Incremental circuit builder over raw AIGER literals.
///
/// Variables are allocated in call order, which keeps AND definitions
/// topological by construction.
pub struct Builder {
    next_var: u32,
    inputs: Vec<u32>,
    latches: Vec<Latch>,
    ands: Vec<And>,
    bad: Option<u32>,
}

pub const FALSE: u32 = 0;
pub const TRUE: u32 = 1;

impl Builder {
    pub fn new() -> Self {
        Builder {
            next_var: 0,
            inputs: Vec::new(),
            latches: Vec::new(),
            ands: Vec::new(),
            bad: None,
        }
    }

    fn fresh(&mut self) -> u32 {
        self.next_var += 1;
        2 * self.next_var
    }

    pub fn input(&mut self) -> u32 {
        let lit = self.fresh();
        self.inputs.push(lit);
        lit
    }

    /// Allocates a latch; wire its next-state function with [`Builder::set_next`].
    pub fn latch(&mut self, reset: bool) -> u32 {
        let lit = self.fresh();
        self.latches.push(Latch { state: lit, next: 0, reset });
        lit
    }

    pub fn set_next(&mut self, latch_lit: u32, next: u32) {
        let l = self
            .latches
            .iter_mut()
            .find(|l| l.state == latch_lit)
            .expect("not a latch literal");
        l.next = next;
    }

    pub fn and(&mut self, a: u32, b: u32) -> u32 {
        let lhs = self.fresh();
        let (rhs0, rhs1) = if a >= b { (a, b) } else { (b, a) };
        self.ands.push(And { lhs, rhs0, rhs1 });
        lhs
    }

    pub fn or(&mut self, a: u32, b: u32) -> u32 {
        self.and(a ^ 1, b ^ 1) ^ 1
    }

    pub fn xor(&mut self, a: u32, b: u32) -> u32 {
        let t = self.and(a, b ^ 1);
        let u = self.and(a ^ 1, b);
        self.or(t, u)
    }

    pub fn set_bad(&mut self, lit: u32) {
        self.bad = Some(lit);
    }

    pub fn build(self) -> AigModel {
        let model = AigModel {
            max_var: self.next_var,
            inputs: self.inputs,
            latches: self.latches,
            ands: self.ands,
            bad: self.bad.expect("bad literal not set"),
            symbols: Vec::new(),
        };
        // Self-check: the built model must survive a parse round trip.
        let reparsed = AigModel::parse(model.to_aag().as_bytes()).expect("builder output invalid");
        assert_eq!(reparsed, model);
        model
    }
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Hand-written models
// ---------------------------------------------------------------------------

/// One toggling latch, bad when it is high. Unsafe at depth 1.
pub fn toggler_unsafe() -> AigModel {
    AigModel::parse(b"aag 1 0 1 1 0\n2 3\n2\n").unwrap()
}

/// One toggling latch, bad literal structurally false. Safe.
pub fn toggler_safe() -> AigModel {
    let mut b = Builder::new();
    let t = b.latch(false);
    b.set_next(t, t ^ 1);
    let dead = b.and(t, t ^ 1);
    b.set_bad(dead);
    b.build()
}

/// Wrap-around binary counter over `bits` latches, bad at `bad_value`.
/// Unsafe at depth `bad_value`.
pub fn counter(bits: usize, bad_value: u64) -> AigModel {
    assert!((1..=16).contains(&bits) && bad_value < 1 << bits);
    let mut b = Builder::new();
    let regs: Vec<u32> = (0..bits).map(|_| b.latch(false)).collect();
    let mut carry = TRUE;
    for &r in &regs {
        let next = b.xor(r, carry);
        carry = b.and(r, carry);
        b.set_next(r, next);
    }
    let mut bad = TRUE;
    for (k, &r) in regs.iter().enumerate() {
        let want = bad_value >> k & 1 == 1;
        bad = b.and(bad, if want { r } else { r ^ 1 });
    }
    b.set_bad(bad);
    b.build()
}

pub fn counter2(bad_value: u64) -> AigModel {
    counter(2, bad_value)
}

/// Counter that only advances while its enable input is high; bad at the
/// all-ones value. Unsafe, and the witness needs the enable bits.
pub fn counter_enabled(bits: usize) -> AigModel {
    assert!((1..=16).contains(&bits));
    let mut b = Builder::new();
    let en = b.input();
    let regs: Vec<u32> = (0..bits).map(|_| b.latch(false)).collect();
    let mut carry = TRUE;
    for &r in &regs {
        let inc = b.xor(r, carry);
        carry = b.and(r, carry);
        let advance = b.and(inc, en);
        let hold = b.and(r, en ^ 1);
        let next = b.or(advance, hold);
        b.set_next(r, next);
    }
    let mut bad = TRUE;
    for &r in &regs {
        bad = b.and(bad, r);
    }
    b.set_bad(bad);
    b.build()
}

/// Shift register of `bits` latches. When `fed_by_input` the first stage
/// reads an input (unsafe at depth `bits`); otherwise it reads constant
/// zero and the bad literal is unreachable.
pub fn shift_register(bits: usize, fed_by_input: bool) -> AigModel {
    assert!(bits >= 1);
    let mut b = Builder::new();
    let feed = if fed_by_input { b.input() } else { FALSE };
    let regs: Vec<u32> = (0..bits).map(|_| b.latch(false)).collect();
    b.set_next(regs[0], feed);
    for k in 1..bits {
        b.set_next(regs[k], regs[k - 1]);
    }
    b.set_bad(regs[bits - 1]);
    b.build()
}

/// Two latches in quadrature: a toggles, b follows a. The state (1,1) is
/// unreachable, so the conjunction is safe.
pub fn two_phase() -> AigModel {
    let mut b = Builder::new();
    let a = b.latch(false);
    let bb = b.latch(false);
    b.set_next(a, a ^ 1);
    b.set_next(bb, a);
    let bad = b.and(a, bb);
    b.set_bad(bad);
    b.build()
}

/// A latch that holds its value forever; bad = latch AND input. The property
/// depends on the input at the violating step. Safe when reset 0, unsafe at
/// depth 0 when reset 1.
pub fn latch_hold_and_input(reset: bool) -> AigModel {
    let mut b = Builder::new();
    let i = b.input();
    let l = b.latch(reset);
    b.set_next(l, l);
    let bad = b.and(l, i);
    b.set_bad(bad);
    b.build()
}

pub fn and_of_latch_and_input() -> AigModel {
    latch_hold_and_input(false)
}

/// Latch-free circuit: bad = in0 AND NOT in1. Unsafe at depth 0.
pub fn comb_unsafe() -> AigModel {
    let mut b = Builder::new();
    let x = b.input();
    let y = b.input();
    let bad = b.and(x, y ^ 1);
    b.set_bad(bad);
    b.build()
}

/// Latch-free circuit with a contradictory bad literal. Safe.
pub fn comb_safe() -> AigModel {
    let mut b = Builder::new();
    let x = b.input();
    let bad = b.and(x, x ^ 1);
    b.set_bad(bad);
    b.build()
}

pub fn hand_models_named() -> Vec<(&'static str, AigModel)> {
    vec![
        ("toggler-unsafe", toggler_unsafe()),
        ("toggler-safe", toggler_safe()),
        ("counter2-bad3", counter(2, 3)),
        ("counter3-bad7", counter(3, 7)),
        ("counter2-bad0", counter(2, 0)),
        ("counter3-enabled", counter_enabled(3)),
        ("shift3-input", shift_register(3, true)),
        ("shift4-zero", shift_register(4, false)),
        ("two-phase", two_phase()),
        ("latch-hold-safe", latch_hold_and_input(false)),
        ("latch-hold-unsafe", latch_hold_and_input(true)),
        ("comb-unsafe", comb_unsafe()),
        ("comb-safe", comb_safe()),
    ]
}

pub fn hand_models() -> Vec<AigModel> {
    hand_models_named().into_iter().map(|(_, m)| m).collect()
}

// ---------------------------------------------------------------------------
// Random models
// ---------------------------------------------------------------------------

/// Seeded random circuit within the given shape bounds.
pub fn random_model_with(
    seed: u64,
    max_latches: usize,
    max_inputs: usize,
    max_gates: usize,
) -> AigModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_inputs = rng.gen_range(0..=max_inputs);
    let n_latches = rng.gen_range(0..=max_latches);
    let n_gates = rng.gen_range(0..=max_gates);

    let mut b = Builder::new();
    let mut wires: Vec<u32> = vec![TRUE];
    for _ in 0..n_inputs {
        wires.push(b.input());
    }
    let mut latch_lits = Vec::new();
    for _ in 0..n_latches {
        let l = b.latch(rng.gen_bool(0.5));
        latch_lits.push(l);
        wires.push(l);
    }
    let pick = |rng: &mut ChaCha8Rng, wires: &[u32]| -> u32 {
        let w = wires[rng.gen_range(0..wires.len())];
        if rng.gen_bool(0.5) {
            w ^ 1
        } else {
            w
        }
    };
    for _ in 0..n_gates {
        let x = pick(&mut rng, &wires);
        let y = pick(&mut rng, &wires);
        let g = b.and(x, y);
        wires.push(g);
    }
    for &l in &latch_lits {
        let next = pick(&mut rng, &wires);
        b.set_next(l, next);
    }
    // Prefer a gate-driven property when gates exist.
    let bad = if n_gates > 0 && rng.gen_bool(0.8) {
        let gates: Vec<u32> = wires[1 + n_inputs + n_latches..].to_vec();
        let g = gates[rng.gen_range(0..gates.len())];
        if rng.gen_bool(0.5) {
            g ^ 1
        } else {
            g
        }
    } else {
        pick(&mut rng, &wires)
    };
    b.set_bad(bad);
    b.build()
}

/// Random circuit at the documented default bounds (8 latches, 4 inputs,
/// 30 gates).
pub fn random_model(seed: u64) -> AigModel {
    random_model_with(seed, 8, 4, 30)
}

// ---------------------------------------------------------------------------
// Explicit-state BFS reachability oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Safe,
    Unsafe { depth: usize },
}

impl OracleVerdict {
    pub fn is_safe(self) -> bool {
        matches!(self, OracleVerdict::Safe)
    }
}

/// Breadth-first exploration of the concrete state graph. Returns the least
/// depth at which some input vector makes the bad literal true, or `Safe`
/// when the reachable set is exhausted.
pub fn bfs_oracle(model: &AigModel) -> OracleVerdict {
    let inputs: Vec<Vec<bool>> = all_bool_vectors(model.num_inputs());
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut frontier = vec![model.reset_state()];
    seen.insert(model.reset_state());
    let mut depth = 0;
    loop {
        let mut next_frontier = Vec::new();
        for s in &frontier {
            for i in &inputs {
                let step = model.eval(s, i);
                if step.bad {
                    return OracleVerdict::Unsafe { depth };
                }
                if !seen.contains(&step.next) {
                    seen.insert(step.next.clone());
                    next_frontier.push(step.next);
                }
            }
        }
        if next_frontier.is_empty() {
            return OracleVerdict::Safe;
        }
        frontier = next_frontier;
        depth += 1;
    }
}

/// All 2^n boolean vectors of length n, in numeric order (bit k of the
/// counter is element k).
pub fn all_bool_vectors(n: usize) -> Vec<Vec<bool>> {
    assert!(n <= 20);
    (0..1usize << n)
        .map(|x| (0..n).map(|k| x >> k & 1 == 1).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Frame-set inclusion oracle
// ---------------------------------------------------------------------------

/// Explicit-set version of the safety check: enumerates every state per
/// frame and returns the least i >= 1 with O_{i+1} contained in the union of
/// O_0..O_i. Frame 0 membership means "some input makes bad true here".
pub fn oracle_invariant_level(model: &AigModel, frames: &OFrames) -> Option<usize> {
    let n = model.num_latches();
    let states = all_bool_vectors(n);
    let inputs = all_bool_vectors(model.num_inputs());
    let state_vars: Vec<Var> = model.latches.iter().map(|l| Var(l.state >> 1)).collect();

    let in_o0: Vec<bool> = states
        .iter()
        .map(|s| inputs.iter().any(|i| model.eval(s, i).bad))
        .collect();
    let cube_holds = |c: &Cube, s: &[bool]| {
        c.iter().all(|l| {
            let k = state_vars.iter().position(|&v| v == l.var()).unwrap();
            s[k] != l.is_neg()
        })
    };
    let in_frame: Vec<Vec<bool>> = (0..frames.len())
        .map(|lvl| {
            states
                .iter()
                .enumerate()
                .map(|(si, s)| {
                    if lvl == 0 {
                        in_o0[si]
                    } else {
                        !frames.cubes(lvl).iter().any(|c| cube_holds(c, s))
                    }
                })
                .collect()
        })
        .collect();

    for i in 1..frames.len().saturating_sub(1) {
        let contained = (0..states.len()).all(|si| {
            !in_frame[i + 1][si] || (0..=i).any(|j| in_frame[j][si])
        });
        if contained {
            return Some(i);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Random CNF and the enumeration oracle
// ---------------------------------------------------------------------------

pub struct CnfInstance {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    pub assumptions: Cube,
}

/// Seeded random CNF instance with a duplicate-free, non-contradictory
/// random assumption cube.
pub fn random_cnf(seed: u64, max_vars: u32, max_clauses: usize) -> CnfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_vars = rng.gen_range(1..=max_vars);
    let num_clauses = rng.gen_range(1..=max_clauses);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let len = rng.gen_range(1..=3usize);
        let clause: Vec<Lit> = (0..len)
            .map(|_| Lit::new(Var(rng.gen_range(1..=num_vars)), rng.gen_bool(0.5)))
            .collect();
        clauses.push(clause);
    }
    let mut vars: Vec<u32> = (1..=num_vars).collect();
    for i in (1..vars.len()).rev() {
        vars.swap(i, rng.gen_range(0..=i));
    }
    let keep = rng.gen_range(0..=vars.len().min(6));
    let assumptions: Cube = vars[..keep]
        .iter()
        .map(|&v| Lit::new(Var(v), rng.gen_bool(0.5)))
        .collect();
    CnfInstance { num_vars, clauses, assumptions }
}

/// Exhaustive-enumeration satisfiability oracle. Assumption literals pin
/// their variables; the remaining space is scanned with early clause exits.
pub fn enumerate_sat(inst: &CnfInstance) -> bool {
    let n = inst.num_vars as usize;
    let mut fixed: Vec<Option<bool>> = vec![None; n + 1];
    for &l in &inst.assumptions {
        let want = !l.is_neg();
        match fixed[l.var().index()] {
            Some(v) if v != want => return false,
            _ => fixed[l.var().index()] = Some(want),
        }
    }
    let free: Vec<usize> = (1..=n).filter(|&v| fixed[v].is_none()).collect();
    let mut values = vec![false; n + 1];
    for (v, f) in fixed.iter().enumerate() {
        if let Some(b) = f {
            values[v] = *b;
        }
    }
    let count = 1usize << free.len();
    'assignments: for x in 0..count {
        for (k, &v) in free.iter().enumerate() {
            values[v] = x >> k & 1 == 1;
        }
        for clause in &inst.clauses {
            let sat = clause
                .iter()
                .any(|l| values[l.var().index()] != l.is_neg());
            if !sat {
                continue 'assignments;
            }
        }
        return true;
    }
    false
}

// ---------------------------------------------------------------------------
// Binary AIGER encoder (parser oracle)
// ---------------------------------------------------------------------------

/// Encodes a model in the binary format. Requires canonical variable order
/// (inputs, then latches, then gates in definition order), which all builder
/// and random models satisfy.
pub fn to_binary_aig(model: &AigModel) -> Vec<u8> {
    let ni = model.inputs.len() as u32;
    let nl = model.latches.len() as u32;
    for (k, &i) in model.inputs.iter().enumerate() {
        assert_eq!(i, 2 * (k as u32 + 1), "inputs not in canonical order");
    }
    for (k, l) in model.latches.iter().enumerate() {
        assert_eq!(l.state, 2 * (ni + k as u32 + 1), "latches not canonical");
    }
    let mut out = format!(
        "aig {} {} {} 0 {} 1\n",
        model.max_var,
        ni,
        nl,
        model.ands.len()
    )
    .into_bytes();
    for l in &model.latches {
        if l.reset {
            out.extend_from_slice(format!("{} 1\n", l.next).as_bytes());
        } else {
            out.extend_from_slice(format!("{}\n", l.next).as_bytes());
        }
    }
    out.extend_from_slice(format!("{}\n", model.bad).as_bytes());
    for (k, a) in model.ands.iter().enumerate() {
        let lhs = 2 * (ni + nl + k as u32 + 1);
        assert_eq!(a.lhs, lhs, "gates not in canonical order");
        push_delta(&mut out, u64::from(a.lhs - a.rhs0));
        push_delta(&mut out, u64::from(a.rhs0 - a.rhs1));
    }
    out
}

fn push_delta(out: &mut Vec<u8>, mut d: u64) {
    loop {
        let byte = (d & 0x7f) as u8;
        d >>= 7;
        if d == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}
