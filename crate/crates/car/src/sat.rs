//! Incremental CDCL SAT solver with ordered assumption handling.
//!
//! Assumption literals become the first decisions, in exactly the order the
//! caller supplies them, with full unit propagation after each. When the
//! formula is unsatisfiable under the assumptions, the final conflict is
//! analysed back to assumption decisions only, yielding a core: a subset of
//! the assumptions that together with the clause database is unsatisfiable.
//! The core is reported in assumption order along with the conflict literal,
//! the deepest assumption in it.
//!
//! Search machinery is conventional: two-literal watches, first-UIP clause
//! learning, activity-based branching with decay, phase saving. Restarts are
//! off by default; queries issued by the model checker are small.

use crate::lits::{Cube, Lit, Var};
use std::collections::HashMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum LBool {
    True,
    False,
    Undef,
}

impl LBool {
    fn from_bool(b: bool) -> LBool {
        if b {
            LBool::True
        } else {
            LBool::False
        }
    }
}

type CRef = u32;
const CREF_NONE: CRef = u32::MAX;

#[derive(Clone, Copy)]
struct Watch {
    cref: CRef,
    blocker: Lit,
}

struct ClauseDb {
    lits: Vec<Lit>,
    bounds: Vec<u32>,
}

impl ClauseDb {
    fn new() -> Self {
        ClauseDb { lits: Vec::new(), bounds: vec![0] }
    }

    fn push(&mut self, clause: &[Lit]) -> CRef {
        self.lits.extend_from_slice(clause);
        self.bounds.push(self.lits.len() as u32);
        (self.bounds.len() - 2) as CRef
    }

    fn get(&self, c: CRef) -> &[Lit] {
        let (a, b) = (self.bounds[c as usize], self.bounds[c as usize + 1]);
        &self.lits[a as usize..b as usize]
    }

    fn get_mut(&mut self, c: CRef) -> &mut [Lit] {
        let (a, b) = (self.bounds[c as usize], self.bounds[c as usize + 1]);
        &mut self.lits[a as usize..b as usize]
    }
}

/// Max-heap over variable activities driving branching decisions.
struct OrderHeap {
    heap: Vec<Var>,
    index: Vec<i32>,
}

impl OrderHeap {
    fn new() -> Self {
        OrderHeap { heap: Vec::new(), index: Vec::new() }
    }

    fn contains(&self, v: Var) -> bool {
        self.index
            .get(v.index())
            .map(|&i| i >= 0)
            .unwrap_or(false)
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        if self.index.len() <= v.index() {
            self.index.resize(v.index() + 1, -1);
        }
        self.index[v.index()] = self.heap.len() as i32;
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.index[top.index()] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last.index()] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn bumped(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            let i = self.index[v.index()] as usize;
            self.up(i, act);
        }
    }

    fn before(a: Var, b: Var, act: &[f64]) -> bool {
        let (x, y) = (act[a.index()], act[b.index()]);
        x > y || (x == y && a.0 < b.0)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) >> 1;
            if Self::before(v, self.heap[parent], act) {
                self.heap[i] = self.heap[parent];
                self.index[self.heap[i].index()] = i as i32;
                i = parent;
            } else {
                break;
            }
        }
        self.heap[i] = v;
        self.index[v.index()] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && Self::before(self.heap[r], self.heap[l], act) {
                r
            } else {
                l
            };
            if Self::before(self.heap[child], v, act) {
                self.heap[i] = self.heap[child];
                self.index[self.heap[i].index()] = i as i32;
                i = child;
            } else {
                break;
            }
        }
        self.heap[i] = v;
        self.index[v.index()] = i as i32;
    }
}

/// Search knobs. The defaults are the documented configuration.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Multiplicative activity decay applied per conflict.
    pub var_decay: f64,
    /// Reuse the last assigned polarity when branching.
    pub phase_saving: bool,
    /// Geometric restarts within a query; off by default.
    pub restarts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { var_decay: 0.95, phase_saving: true, restarts: false }
    }
}

/// Running counters, exposed for instrumentation cross-checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct SolverStats {
    pub solves: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

/// A total assignment found by a satisfiable query.
#[derive(Clone, Debug)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn var_value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit_true(&self, l: Lit) -> bool {
        self.values[l.var().index()] ^ l.is_neg()
    }

    /// Projects the model onto `vars`: a full cube in the given order.
    pub fn project(&self, vars: &[Var]) -> Cube {
        vars.iter()
            .map(|&v| Lit::new(v, !self.var_value(v)))
            .collect()
    }

    pub fn project_bits(&self, vars: &[Var]) -> Vec<bool> {
        vars.iter().map(|&v| self.var_value(v)).collect()
    }
}

/// Outcome of [`Solver::solve`].
#[derive(Clone, Debug)]
pub enum SolveResult {
    Sat(Assignment),
    /// `core` is a subset of the assumptions, in assumption order; together
    /// with the clause database it is unsatisfiable. `conflict_lit` is the
    /// deepest assumption in the core (`None` only for the empty core, when
    /// the formula is unsatisfiable regardless of assumptions).
    Unsat { core: Cube, conflict_lit: Option<Lit> },
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

pub struct Solver {
    cfg: SolverConfig,
    clauses: ClauseDb,
    watches: Vec<Vec<Watch>>,
    assign: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<CRef>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: OrderHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    /// False once an unconditional contradiction was derived.
    ok: bool,
    num_vars: u32,
    stats: SolverStats,
}

impl Solver {
    pub fn new() -> Self {
        Solver::with_config(SolverConfig::default())
    }

    pub fn with_config(cfg: SolverConfig) -> Self {
        let mut s = Solver {
            cfg,
            clauses: ClauseDb::new(),
            watches: Vec::new(),
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            order: OrderHeap::new(),
            polarity: Vec::new(),
            seen: Vec::new(),
            ok: true,
            num_vars: 0,
            stats: SolverStats::default(),
        };
        s.grow_to(1); // slot for the reserved variable 0
        s.num_vars = 0;
        s
    }

    fn grow_to(&mut self, n_vars_inclusive: usize) {
        let n = n_vars_inclusive + 1;
        if self.assign.len() >= n {
            return;
        }
        self.assign.resize(n, LBool::Undef);
        self.level.resize(n, 0);
        self.reason.resize(n, CREF_NONE);
        self.activity.resize(n, 0.0);
        self.polarity.resize(n, true);
        self.seen.resize(n, false);
        self.watches.resize(2 * n, Vec::new());
    }

    /// Allocates the next variable.
    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        let v = Var(self.num_vars);
        self.grow_to(v.index());
        self.order.insert(v, &self.activity);
        v
    }

    /// Ensures variables `1..=n` exist.
    pub fn ensure_vars(&mut self, n: u32) {
        while self.num_vars < n {
            self.new_var();
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Total literals in the clause database (permanent plus learnt), for
    /// memory accounting.
    pub fn clause_lits(&self) -> usize {
        self.clauses.lits.len()
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assign[l.var().index()] {
            LBool::Undef => LBool::Undef,
            LBool::True => LBool::from_bool(!l.is_neg()),
            LBool::False => LBool::from_bool(l.is_neg()),
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn check_lit(&self, l: Lit) {
        assert!(
            l.var().0 >= 1 && l.var().0 <= self.num_vars,
            "literal {l} out of declared variable range 1..={}",
            self.num_vars
        );
    }

    /// Adds a permanent clause, simplifying against the top level.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return;
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        let mut sorted: Vec<Lit> = lits.to_vec();
        sorted.sort_unstable();
        let mut prev: Option<Lit> = None;
        for &l in &sorted {
            self.check_lit(l);
            if prev == Some(!l) {
                return; // tautology
            }
            if prev == Some(l) || self.value(l) == LBool::False {
                prev = Some(l);
                continue;
            }
            if self.value(l) == LBool::True {
                return; // satisfied at top level
            }
            prev = Some(l);
            c.push(l);
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], CREF_NONE);
                if self.propagate() != CREF_NONE {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.clauses.push(&c);
                self.attach(cref);
            }
        }
    }

    fn attach(&mut self, cref: CRef) {
        let c = self.clauses.get(cref);
        let (w0, w1) = (c[0], c[1]);
        self.watches[(!w0).code()].push(Watch { cref, blocker: w1 });
        self.watches[(!w1).code()].push(Watch { cref, blocker: w0 });
    }

    fn enqueue(&mut self, l: Lit, from: CRef) {
        debug_assert_eq!(self.value(l), LBool::Undef);
        let v = l.var().index();
        self.assign[v] = LBool::from_bool(!l.is_neg());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = from;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> CRef {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut kept = 0;
            let mut conflict = CREF_NONE;
            let mut i = 0;
            'watches: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == LBool::True {
                    ws[kept] = w;
                    kept += 1;
                    continue;
                }
                let false_lit = !p;
                {
                    let c = self.clauses.get_mut(w.cref);
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                    debug_assert_eq!(c[1], false_lit);
                }
                let first = self.clauses.get(w.cref)[0];
                if first != w.blocker && self.value(first) == LBool::True {
                    ws[kept] = Watch { cref: w.cref, blocker: first };
                    kept += 1;
                    continue;
                }
                let len = self.clauses.get(w.cref).len();
                let mut moved = false;
                for k in 2..len {
                    let cand = self.clauses.get(w.cref)[k];
                    if self.value(cand) != LBool::False {
                        self.clauses.get_mut(w.cref).swap(1, k);
                        self.watches[(!cand).code()]
                            .push(Watch { cref: w.cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue 'watches;
                }
                // Unit or conflicting.
                ws[kept] = Watch { cref: w.cref, blocker: first };
                kept += 1;
                if self.value(first) == LBool::False {
                    conflict = w.cref;
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[kept] = ws[i];
                        kept += 1;
                        i += 1;
                    }
                    break;
                }
                self.enqueue(first, w.cref);
            }
            ws.truncate(kept);
            self.watches[p.code()] = ws;
            if conflict != CREF_NONE {
                return conflict;
            }
        }
        CREF_NONE
    }

    fn cancel_until(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target];
        for idx in (bound..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = l.var();
            self.assign[v.index()] = LBool::Undef;
            if self.cfg.phase_saving {
                self.polarity[v.index()] = l.is_neg();
            }
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target);
        self.qhead = bound;
    }

    fn bump(&mut self, v: Var) {
        self.activity[v.index()] += self.var_inc;
        if self.activity[v.index()] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    /// First-UIP conflict analysis; returns the learnt clause (asserting
    /// literal first) and the backtrack level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit::new(Var(0), false)];
        let mut path_c = 0u32;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            debug_assert_ne!(confl, CREF_NONE);
            let start = usize::from(p.is_some());
            let len = self.clauses.get(confl).len();
            for k in start..len {
                let q = self.clauses.get(confl)[k];
                let v = q.var();
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.bump(v);
                    self.seen[v.index()] = true;
                    if self.level[v.index()] as usize >= self.decision_level() {
                        path_c += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().index()] = false;
            path_c -= 1;
            if path_c == 0 {
                learnt[0] = !lit;
                break;
            }
            p = Some(lit);
            confl = self.reason[lit.var().index()];
        }
        let bt_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        for &l in &learnt {
            self.seen[l.var().index()] = false;
        }
        self.var_inc /= self.cfg.var_decay;
        (learnt, bt_level)
    }

    /// Expresses the falsification of assumption `a` in terms of earlier
    /// assumption decisions: the returned set plus `a` is the raw core.
    fn analyze_final(&mut self, a: Lit) -> Vec<Lit> {
        let mut core = vec![a];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[a.var().index()] = true;
        for idx in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = l.var();
            if !self.seen[v.index()] {
                continue;
            }
            let r = self.reason[v.index()];
            if r == CREF_NONE {
                if l != a {
                    core.push(l);
                }
            } else {
                let c = self.clauses.get(r);
                for &q in &c[1..] {
                    if self.level[q.var().index()] > 0 {
                        self.seen[q.var().index()] = true;
                    }
                }
            }
            self.seen[v.index()] = false;
        }
        self.seen[a.var().index()] = false;
        core
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assign[v.index()] == LBool::Undef {
                return Some(Lit::new(v, self.polarity[v.index()]));
            }
        }
        None
    }

    /// Decides `assumptions` in order, then searches. The solver is restored
    /// to the top level before returning and can be reused.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.stats.solves += 1;
        for &l in assumptions {
            self.check_lit(l);
        }
        if !self.ok {
            return SolveResult::Unsat { core: Cube::new(), conflict_lit: None };
        }
        let mut position: HashMap<Lit, usize> = HashMap::with_capacity(assumptions.len());
        for (i, &l) in assumptions.iter().enumerate() {
            position.entry(l).or_insert(i);
        }

        let mut restart_budget = if self.cfg.restarts { 100u64 } else { u64::MAX };
        let mut conflicts_here = 0u64;
        let result = loop {
            let confl = self.propagate();
            if confl != CREF_NONE {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    // Contradiction independent of any assumption: the
                    // formula itself is unsatisfiable, permanently.
                    self.ok = false;
                    break SolveResult::Unsat { core: Cube::new(), conflict_lit: None };
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], CREF_NONE);
                } else {
                    let cref = self.clauses.push(&learnt);
                    self.attach(cref);
                    self.enqueue(learnt[0], cref);
                }
                continue;
            }
            if conflicts_here >= restart_budget && self.decision_level() > assumptions.len() {
                conflicts_here = 0;
                restart_budget += restart_budget / 2;
                self.cancel_until(assumptions.len());
                continue;
            }
            // All consequences propagated: place the next assumption, or a
            // free decision once all assumptions stand.
            let lvl = self.decision_level();
            if lvl < assumptions.len() {
                let a = assumptions[lvl];
                match self.value(a) {
                    LBool::True => {
                        self.trail_lim.push(self.trail.len());
                    }
                    LBool::False => {
                        let raw = self.analyze_final(a);
                        let mut core: Vec<Lit> = raw;
                        core.sort_unstable_by_key(|l| position[l]);
                        let conflict_lit = core.last().copied();
                        debug_assert_eq!(conflict_lit, Some(a));
                        break SolveResult::Unsat { core: Cube(core), conflict_lit };
                    }
                    LBool::Undef => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, CREF_NONE);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    let values = self
                        .assign
                        .iter()
                        .map(|&v| v == LBool::True)
                        .collect();
                    break SolveResult::Sat(Assignment { values });
                }
                Some(l) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, CREF_NONE);
                }
            }
        };
        self.cancel_until(0);
        result
    }
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}
