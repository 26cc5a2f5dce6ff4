//! The backward reachability search and its restarting hybrid variant.
//!
//! The search keeps a stack of proof obligations (state, frame level). A
//! satisfiable query extends the reached-state sequence with the extracted
//! successor one frame closer to the bad region; an unsatisfiable query
//! narrows the next frame with the returned core, records it for the
//! ordering strategies, and retries the state at the first deeper frame
//! that does not already exclude it. A round ends when every stored state
//! has been tried; then either some frame is contained in the union of the
//! earlier ones (safe), or a new frame opens from the pending cubes.
//!
//! In hybrid mode a per-configuration timer is polled once per obligation.
//! When it fires, the reached states collapse back to the initial state,
//! ordering history clears, the next configuration raises the core window
//! by one, and the time limit grows by the configured factor. Frames and
//! their clauses survive restarts; everything they hold was derived from
//! the transition relation alone.

use crate::aig::{AigModel, Property};
use crate::encode::{encode, Encoding};
use crate::frames::{invariant_check, BlockOutcome, OFrames, PickOrder, UId, USequence};
use crate::lits::{Cube, Lit, LitSet};
use crate::metrics::{ProofEnd, QueryOutcome, RestartRow, RunStats};
use crate::reorder::{reorder, OrderingConfig, ReorderContext, Strategy};
use crate::sat::{Assignment, SolveResult, Solver, SolverStats};
use crate::witness::{trace_is_valid, CexStep, CexTrace};
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Outcome of a check.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// The property holds; frame `level + 1` is contained in the union of
    /// frames `0..=level` (level 0 marks the trivially decided cases).
    Safe { level: usize },
    Unsafe { trace: CexTrace },
    Unknown { reason: StopReason },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Safe { .. } => "safe",
            Verdict::Unsafe { .. } => "unsafe",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Timeout,
    MemoryLimit,
    Canceled,
}

/// Overall resource budget; `None` means unbounded.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub timeout: Option<Duration>,
    pub memory_bytes: Option<u64>,
}

/// Per-configuration restart policy of the hybrid mode.
#[derive(Clone, Copy, Debug)]
pub struct HybridOptions {
    /// Wall-clock limit per configuration.
    pub time_limit: Duration,
    /// Multiplied onto the limit at every restart; >= 1 keeps the search
    /// complete on unbounded budgets.
    pub growth: f64,
}

impl Default for HybridOptions {
    fn default() -> Self {
        HybridOptions { time_limit: Duration::from_secs(1), growth: 2.0 }
    }
}

/// Everything [`check`] needs beyond the ordering strategy.
pub struct CheckOptions {
    pub ordering: OrderingConfig,
    pub hybrid: Option<HybridOptions>,
    pub budget: Budget,
    pub pick_order: PickOrder,
    /// Validate every blocked cube by exhaustive successor enumeration
    /// (small models only; testing aid).
    pub validate_blocks: bool,
    /// Cooperative cancellation, polled once per obligation.
    pub cancel: Option<Arc<AtomicBool>>,
    /// Sink for machine-parseable `key=value` progress lines.
    pub diag: Option<Box<dyn Write + Send>>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            ordering: OrderingConfig::default(),
            hybrid: None,
            budget: Budget::default(),
            pick_order: PickOrder::NewestFirst,
            validate_blocks: false,
            cancel: None,
            diag: None,
        }
    }
}

/// Hybrid entry configuration: base ordering, restart timer, growth, budget.
#[derive(Clone, Debug, Default)]
pub struct HybridConfig {
    pub base: OrderingConfig,
    pub options: HybridOptions,
    pub budget: Budget,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("internal error: counterexample trace fails circuit replay")]
    InvalidTrace,
    #[error("internal error: cube {cube:?} blocked at level {level} is unsound")]
    UnsoundBlock { level: usize, cube: Cube },
}

/// Checks the model under one fixed ordering configuration.
pub fn check(
    model: Arc<AigModel>,
    ordering: OrderingConfig,
    budget: Budget,
) -> Result<Verdict, CheckError> {
    Checker::new(model, CheckOptions { ordering, budget, ..Default::default() }).run()
}

/// Checks the model with timed configuration switching.
pub fn hybrid_check(model: Arc<AigModel>, cfg: HybridConfig) -> Result<Verdict, CheckError> {
    Checker::new(
        model,
        CheckOptions {
            ordering: cfg.base,
            hybrid: Some(cfg.options),
            budget: cfg.budget,
            ..Default::default()
        },
    )
    .run()
}

pub struct Checker {
    model: Arc<AigModel>,
    enc: Encoding,
    solver: Solver,
    frames: OFrames,
    useq: USequence,
    ctx: ReorderContext,
    cfg: OrderingConfig,
    opts: CheckOptions,
    stats: RunStats,
    /// Activation literal per frame level; assumed first in every query.
    act: Vec<Lit>,
    start: Instant,
    config_start: Instant,
    config_limit: Duration,
    round: u64,
}

impl Checker {
    pub fn new(model: Arc<AigModel>, opts: CheckOptions) -> Checker {
        let enc = encode(&model);
        let mut solver = Solver::new();
        solver.ensure_vars(enc.num_vars);
        for c in &enc.trans_clauses {
            solver.add_clause(c);
        }
        let act0 = solver.new_var().positive();
        solver.add_clause(&[!act0, enc.bad_next]);
        let frames = OFrames::new(model.initial_cube());
        let useq = USequence::new(model.initial_cube());
        let cfg = opts.ordering.clone();
        let config_limit = opts
            .hybrid
            .map(|h| h.time_limit)
            .unwrap_or(Duration::MAX);
        Checker {
            model,
            enc,
            solver,
            frames,
            useq,
            ctx: ReorderContext::new(),
            cfg,
            opts,
            stats: RunStats::new(),
            act: vec![act0],
            start: Instant::now(),
            config_start: Instant::now(),
            config_limit,
            round: 0,
        }
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut RunStats {
        &mut self.stats
    }

    pub fn frames(&self) -> &OFrames {
        &self.frames
    }

    pub fn reached(&self) -> &USequence {
        &self.useq
    }

    pub fn solver_stats(&self) -> SolverStats {
        self.solver.stats()
    }

    pub fn current_i_limit(&self) -> u32 {
        self.cfg.i_limit
    }

    /// The per-configuration limit as grown by restarts.
    pub fn current_config_limit(&self) -> Duration {
        self.config_limit
    }

    pub fn encoding(&self) -> &Encoding {
        &self.enc
    }

    pub fn run(&mut self) -> Result<Verdict, CheckError> {
        self.start = Instant::now();
        self.config_start = Instant::now();
        let verdict = self.search()?;
        self.stats.set_total_time(self.start.elapsed());
        self.stats.set_verdict(verdict.name());
        if let Verdict::Unsafe { trace } = &verdict {
            if !trace_is_valid(&self.model, trace) {
                return Err(CheckError::InvalidTrace);
            }
        }
        Ok(verdict)
    }

    fn search(&mut self) -> Result<Verdict, CheckError> {
        match self.model.property() {
            Property::ConstFalse => return Ok(Verdict::Safe { level: 0 }),
            Property::ConstTrue => {
                let steps = vec![CexStep {
                    latches: self.model.reset_state(),
                    inputs: vec![false; self.model.num_inputs()],
                }];
                return Ok(Verdict::Unsafe { trace: CexTrace { steps } });
            }
            Property::Lit(_) => {}
        }

        // Does the initial state already violate the property?
        let mut init_query = self.model.initial_cube();
        init_query.push(self.enc.bad_now);
        let t = Instant::now();
        let res = self.solver.solve(&init_query);
        let dt = t.elapsed();
        match res {
            SolveResult::Sat(m) => {
                self.stats.record_query(QueryOutcome::Sat, dt, None);
                let steps = vec![CexStep {
                    latches: self.model.reset_state(),
                    inputs: m.project_bits(&self.enc.input_vars),
                }];
                return Ok(Verdict::Unsafe { trace: CexTrace { steps } });
            }
            SolveResult::Unsat { core, .. } => {
                self.stats.record_query(QueryOutcome::Unsat, dt, Some(core.len()));
            }
        }
        if self.model.num_latches() == 0 {
            // Stateless circuit: the initial check decided it.
            return Ok(Verdict::Safe { level: 0 });
        }

        'outer: loop {
            self.round += 1;
            let round_start = Instant::now();
            self.useq.begin_round();
            while let Some(picked) = self.useq.pick(self.opts.pick_order) {
                self.stats.begin_proof();
                let mut stack: Vec<(UId, i64)> = vec![(picked, self.frames.len() as i64 - 1)];
                while let Some(&(suid, l)) = stack.last() {
                    if let Some(reason) = self.stop_check() {
                        self.stats.end_proof(ProofEnd::Interrupted);
                        // Keep the cut-short round in the report; resource
                        // exhaustion usually happens inside the round that
                        // matters.
                        self.stats
                            .record_round(self.round, round_start.elapsed(), self.useq.size());
                        return Ok(Verdict::Unknown { reason });
                    }
                    if self.opts.hybrid.is_some()
                        && self.config_start.elapsed() >= self.config_limit
                    {
                        self.stats.end_proof(ProofEnd::Interrupted);
                        self.restart();
                        continue 'outer;
                    }
                    if l < 0 {
                        self.stats.end_proof(ProofEnd::FoundBad);
                        return Ok(Verdict::Unsafe { trace: self.build_trace(suid) });
                    }
                    let level = l as usize;
                    let state = self.useq.get(suid).state.clone();
                    let ordered = reorder(&self.ctx, &state, level + 1, &self.cfg);
                    let mut assumps: Vec<Lit> = Vec::with_capacity(ordered.len() + 1);
                    assumps.push(self.act[level]);
                    assumps.extend_from_slice(&ordered);
                    let t = Instant::now();
                    let res = self.solver.solve(&assumps);
                    let dt = t.elapsed();
                    match res {
                        SolveResult::Sat(m) => {
                            self.stats.record_query(QueryOutcome::Sat, dt, None);
                            let succ = self.next_state_cube(&m);
                            let inputs = m.project_bits(&self.enc.input_vars);
                            let (tid, _) = self.useq.add(succ, suid.level + 1, suid, inputs);
                            if level == 0 {
                                let bad_inputs = m.project_bits(&self.enc.next_input_vars);
                                self.useq.set_bad_inputs(tid, bad_inputs);
                            }
                            stack.push((tid, l - 1));
                        }
                        SolveResult::Unsat { core, conflict_lit } => {
                            let act = self.act[level];
                            let mut lits: Vec<Lit> =
                                core.iter().copied().filter(|&x| x != act).collect();
                            let mut conflict = conflict_lit.filter(|&c| c != act);
                            if lits.is_empty() {
                                // The frame excludes every state; the full
                                // assumption cube is the sound fallback.
                                lits = ordered.0.clone();
                                conflict = lits.last().copied();
                            }
                            let uc = Cube(lits);
                            self.stats.record_query(QueryOutcome::Unsat, dt, Some(uc.len()));
                            let block_level = level + 1;
                            self.block_and_assert(block_level, &uc)?;
                            self.ctx.on_unsat(block_level, &uc, conflict, &self.cfg);
                            self.ctx.on_failed_state(block_level, &ordered);
                            stack.pop();
                            let mut sset = LitSet::new();
                            sset.fill(&state);
                            // The core came from this state's literals, so
                            // the skip loop below must advance at least once
                            // whenever the blocked frame already exists.
                            debug_assert!(
                                block_level >= self.frames.len()
                                    || self.frames.is_blocked(block_level, &sset)
                            );
                            let mut l2 = l;
                            while l2 + 1 < self.frames.len() as i64
                                && self.frames.is_blocked((l2 + 1) as usize, &sset)
                            {
                                l2 += 1;
                            }
                            if l2 + 1 < self.frames.len() as i64 {
                                stack.push((suid, l2));
                            }
                        }
                    }
                }
                self.stats.end_proof(ProofEnd::Discharged);
            }
            let round_time = round_start.elapsed();
            self.stats.record_round(self.round, round_time, self.useq.size());
            self.diag_round(round_time);
            if let Some(i) = invariant_check(&self.frames, &self.enc) {
                return Ok(Verdict::Safe { level: i });
            }
            self.push_frame();
        }
    }

    /// Promotes the pending frame to a new level with a fresh activation
    /// literal and asserts its blocking clauses.
    fn push_frame(&mut self) {
        let act = self.solver.new_var().positive();
        self.act.push(act);
        let promoted: Vec<Cube> = self.frames.new_frame().to_vec();
        for cube in &promoted {
            self.assert_frame_clause(act, cube);
        }
    }

    /// Frame clauses live in the main solver, guarded by the level's
    /// activation literal and expressed over next-state variables.
    fn assert_frame_clause(&mut self, act: Lit, cube: &Cube) {
        let mut clause: Vec<Lit> = Vec::with_capacity(cube.len() + 1);
        clause.push(!act);
        for &lit in cube.iter() {
            clause.push(!self.enc.prime_lit(lit).expect("frame cube over state vars"));
        }
        self.solver.add_clause(&clause);
    }

    fn block_and_assert(&mut self, level: usize, uc: &Cube) -> Result<(), CheckError> {
        if self.opts.validate_blocks && !self.validate_block(level, uc) {
            return Err(CheckError::UnsoundBlock { level, cube: uc.clone() });
        }
        match self.frames.block(level, uc.clone()) {
            BlockOutcome::Added => {
                let act = self.act[level];
                self.assert_frame_clause(act, uc);
            }
            // Pending cubes get their clause when the frame opens; subsumed
            // cubes already have a stronger clause in place.
            BlockOutcome::AddedToTmp | BlockOutcome::Subsumed => {}
        }
        Ok(())
    }

    /// Exhaustively confirms that no full state containing `uc` has a
    /// successor inside frame `level - 1` as it currently stands.
    fn validate_block(&self, level: usize, uc: &Cube) -> bool {
        let nl = self.model.num_latches();
        if nl > 12 {
            return true; // enumeration would be unreasonable
        }
        let mut fixed: Vec<Option<bool>> = vec![None; nl];
        for &lit in uc.iter() {
            let pos = self
                .enc
                .state_vars
                .iter()
                .position(|&v| v == lit.var())
                .expect("core literal over a state variable");
            fixed[pos] = Some(!lit.is_neg());
        }
        let free: Vec<usize> = (0..nl).filter(|&k| fixed[k].is_none()).collect();
        let inputs = bool_vectors(self.model.num_inputs());
        let below = level - 1;
        for x in 0..1usize << free.len() {
            let mut bits: Vec<bool> = fixed.iter().map(|f| f.unwrap_or(false)).collect();
            for (k, &pos) in free.iter().enumerate() {
                bits[pos] = x >> k & 1 == 1;
            }
            for i in &inputs {
                let succ = self.model.eval(&bits, i).next;
                if self.state_in_frame(below, &succ) {
                    return false;
                }
            }
        }
        true
    }

    /// Membership of a concrete state in a frame's set semantics: for level
    /// 0, some input makes the bad literal true; otherwise no stored cube
    /// is contained in the state.
    fn state_in_frame(&self, level: usize, bits: &[bool]) -> bool {
        if level == 0 {
            bool_vectors(self.model.num_inputs())
                .iter()
                .any(|i| self.model.eval(bits, i).bad)
        } else {
            let lits: Vec<Lit> = self
                .enc
                .state_vars
                .iter()
                .zip(bits)
                .map(|(&v, &b)| Lit::new(v, !b))
                .collect();
            let mut set = LitSet::new();
            set.fill(&lits);
            !self.frames.is_blocked(level, &set)
        }
    }

    fn next_state_cube(&self, m: &Assignment) -> Cube {
        self.enc
            .state_vars
            .iter()
            .zip(&self.enc.next_vars)
            .map(|(&sv, &nv)| Lit::new(sv, !m.var_value(nv)))
            .collect()
    }

    fn build_trace(&self, id: UId) -> CexTrace {
        let chain = self.useq.chain_to_root(id);
        let zeros = vec![false; self.model.num_inputs()];
        let mut steps = Vec::with_capacity(chain.len());
        for (k, &uid) in chain.iter().enumerate() {
            let entry = self.useq.get(uid);
            let latches = crate::frames::state_bits(&entry.state, &self.enc.state_vars);
            let inputs = if k + 1 < chain.len() {
                self.useq
                    .get(chain[k + 1])
                    .inputs
                    .clone()
                    .expect("non-root entry has transition inputs")
            } else {
                entry.bad_inputs.clone().unwrap_or_else(|| zeros.clone())
            };
            steps.push(CexStep { latches, inputs });
        }
        CexTrace { steps }
    }

    fn restart(&mut self) {
        let before = self.frames.fingerprint();
        self.useq.reset_to_initial();
        self.ctx.clear();
        self.frames.reset_tmp();
        self.cfg.strategy = Strategy::Local;
        self.cfg.i_limit += 1;
        let growth = self.opts.hybrid.map(|h| h.growth).unwrap_or(1.0);
        // A floor keeps degenerate limits from restarting without progress.
        self.config_limit = self
            .config_limit
            .mul_f64(growth.max(1.0))
            .max(Duration::from_micros(100));
        self.config_start = Instant::now();
        self.stats.record_restart(RestartRow {
            i_limit: self.cfg.i_limit,
            u_size_after: self.useq.size(),
            frames_fingerprint_before: before,
            frames_fingerprint_after: self.frames.fingerprint(),
        });
    }

    fn stop_check(&self) -> Option<StopReason> {
        if let Some(t) = self.opts.budget.timeout {
            if self.start.elapsed() >= t {
                return Some(StopReason::Timeout);
            }
        }
        if let Some(cap) = self.opts.budget.memory_bytes {
            if self.memory_estimate() > cap {
                return Some(StopReason::MemoryLimit);
            }
        }
        if let Some(c) = &self.opts.cancel {
            if c.load(Ordering::Relaxed) {
                return Some(StopReason::Canceled);
            }
        }
        None
    }

    /// Coarse accounting of the dominant stores.
    fn memory_estimate(&self) -> u64 {
        let per_state = (4 * self.model.num_latches() + 96) as u64;
        let states = self.useq.size() as u64 * per_state;
        let frames = self.frames.total_lits() as u64 * 8;
        let solver = self.solver.clause_lits() as u64 * 16;
        states + frames + solver
    }

    fn diag_round(&mut self, round_time: Duration) {
        if let Some(w) = self.opts.diag.as_mut() {
            let _ = writeln!(
                w,
                "round={} o={} u={} elapsed_ms={} round_ms={}",
                self.round,
                self.frames.len(),
                self.useq.size(),
                self.start.elapsed().as_millis(),
                round_time.as_millis(),
            );
        }
    }
}

fn bool_vectors(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n)
        .map(|x| (0..n).map(|k| x >> k & 1 == 1).collect())
        .collect()
}
