//! Assumption-ordering strategies over per-level core history.
//!
//! Every strategy permutes a state cube before it goes to the SAT solver as
//! assumptions. Prior literals are the solver's earliest decisions, so they
//! are the ones likely to appear in the next unsatisfiable core; placing
//! well-chosen literals first keeps consecutive cores similar and speeds up
//! the narrowing of the frames.
//!
//! - `Intersection`: literals shared with the most recent core come first.
//! - `Rotation`: literals shared with the stored common vector come first;
//!   the common vector is the previous reordered state that failed at this
//!   level, so its prefix accumulates the intersection of recent failures.
//! - `Combination`: intersection prefix, then the rotation pass.
//! - `Local(iLimit)`: intersection passes against the last `iLimit` cores,
//!   newest first, then the rotation pass.
//!
//! Stored cores carry their conflict literal first (when promotion is on):
//! the last literal the solver added to a core is necessary for that
//! conflict, so it earns the highest priority.

use crate::lits::{Cube, Lit, LitSet};
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Natural,
    Intersection,
    Rotation,
    Combination,
    Local,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Natural => "natural",
            Strategy::Intersection => "intersection",
            Strategy::Rotation => "rotation",
            Strategy::Combination => "combination",
            Strategy::Local => "local",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrderingConfig {
    pub strategy: Strategy,
    /// Number of recent cores consulted by `Local`; must be >= 1.
    pub i_limit: u32,
    /// Store cores with the conflict literal moved to the front.
    pub promote_conflict: bool,
    /// Cores kept per level; the effective bound never drops below `i_limit`.
    pub history_capacity: usize,
}

impl Default for OrderingConfig {
    fn default() -> Self {
        OrderingConfig {
            strategy: Strategy::Combination,
            i_limit: 1,
            promote_conflict: true,
            history_capacity: 8,
        }
    }
}

impl OrderingConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        OrderingConfig { strategy, ..Default::default() }
    }

    fn capacity(&self) -> usize {
        self.history_capacity.max(self.i_limit as usize)
    }
}

#[derive(Default)]
struct LevelHistory {
    /// Recent cores, most recent first, conflict literal first inside each.
    ucs: VecDeque<Cube>,
    /// Permutation of the last failed reordered state at this level.
    common: Cube,
}

/// Per-frame-level reordering history.
#[derive(Default)]
pub struct ReorderContext {
    levels: Vec<LevelHistory>,
}

impl ReorderContext {
    pub fn new() -> Self {
        ReorderContext::default()
    }

    /// Discards all history (used on restarts).
    pub fn clear(&mut self) {
        self.levels.clear();
    }

    fn level_mut(&mut self, level: usize) -> &mut LevelHistory {
        if self.levels.len() <= level {
            self.levels.resize_with(level + 1, LevelHistory::default);
        }
        &mut self.levels[level]
    }

    /// The k-th most recent core at `level` (k = 1 is the newest).
    pub fn kth_uc(&self, level: usize, k: usize) -> Option<&Cube> {
        debug_assert!(k >= 1);
        self.levels.get(level)?.ucs.get(k - 1)
    }

    pub fn last_uc(&self, level: usize) -> Option<&Cube> {
        self.kth_uc(level, 1)
    }

    pub fn common_vector(&self, level: usize) -> &[Lit] {
        self.levels.get(level).map(|l| &l.common[..]).unwrap_or(&[])
    }

    /// Records a core produced by an unsatisfiable query keyed by the frame
    /// level it narrows. With promotion on, the conflict literal moves to
    /// the front; the rest keeps its order.
    pub fn on_unsat(
        &mut self,
        level: usize,
        core: &Cube,
        conflict_lit: Option<Lit>,
        cfg: &OrderingConfig,
    ) {
        let mut stored: Vec<Lit> = core.0.clone();
        if cfg.promote_conflict {
            if let Some(cl) = conflict_lit {
                debug_assert!(core.contains(&cl), "conflict literal outside core");
                if let Some(pos) = stored.iter().position(|&l| l == cl) {
                    stored.remove(pos);
                    stored.insert(0, cl);
                }
            }
        }
        let cap = cfg.capacity();
        let h = self.level_mut(level);
        h.ucs.push_front(Cube(stored));
        h.ucs.truncate(cap);
    }

    /// Replaces the common vector at `level` with the reordered state whose
    /// query just failed; shared literals of consecutive failures therefore
    /// accumulate at its front.
    pub fn on_failed_state(&mut self, level: usize, reordered: &Cube) {
        self.level_mut(level).common = reordered.clone();
    }
}

/// Dispatches to the configured strategy. The result is always a
/// permutation of `s`; `Natural` returns it unchanged.
pub fn reorder(ctx: &ReorderContext, s: &Cube, level: usize, cfg: &OrderingConfig) -> Cube {
    match cfg.strategy {
        Strategy::Natural => s.clone(),
        Strategy::Intersection => order_intersection(ctx, s, level),
        Strategy::Rotation => order_rotation(ctx, s, level),
        Strategy::Combination => order_local(ctx, s, level, 1),
        Strategy::Local => order_local(ctx, s, level, cfg.i_limit),
    }
}

/// Literals of `s` occurring in the most recent core come first, in the
/// core's stored order; the rest keep their order in `s`.
pub fn order_intersection(ctx: &ReorderContext, s: &Cube, level: usize) -> Cube {
    build_order(s, ctx.last_uc(level).into_iter(), &[])
}

/// Literals of `s` occurring in the common vector come first, in the common
/// vector's order; the rest keep their order in `s`.
pub fn order_rotation(ctx: &ReorderContext, s: &Cube, level: usize) -> Cube {
    build_order(s, std::iter::empty(), ctx.common_vector(level))
}

/// Intersection passes against the last `i_limit` cores (newest first),
/// then the rotation pass, then the remainder of `s`. Missing history is
/// simply skipped.
pub fn order_local(ctx: &ReorderContext, s: &Cube, level: usize, i_limit: u32) -> Cube {
    let ucs = (1..=i_limit as usize).filter_map(|k| ctx.kth_uc(level, k));
    build_order(s, ucs, ctx.common_vector(level))
}

fn build_order<'a>(
    s: &Cube,
    priority_seqs: impl Iterator<Item = &'a Cube>,
    common: &[Lit],
) -> Cube {
    let mut in_s = LitSet::new();
    in_s.fill(s);
    let mut placed = LitSet::new();
    let mut out: Vec<Lit> = Vec::with_capacity(s.len());
    let push = |lit: Lit, placed: &mut LitSet, out: &mut Vec<Lit>| {
        if in_s.contains(lit) && !placed.contains(lit) {
            placed.insert(lit);
            out.push(lit);
        }
    };
    for seq in priority_seqs {
        for &lit in seq.iter() {
            push(lit, &mut placed, &mut out);
        }
    }
    for &lit in common {
        push(lit, &mut placed, &mut out);
    }
    for &lit in s.iter() {
        push(lit, &mut placed, &mut out);
    }
    Cube(out)
}
