//! The two frame sequences of the reachability search.
//!
//! `OFrames` holds the over-approximating sequence: per level, the cubes
//! whose negations narrow the frame. Level 0 stands for the bad region
//! itself and is never narrowed; every later level is seeded with the
//! initial-state cube, keeping it disjoint from the initial state. A pending
//! frame (`o_tmp`) collects cubes destined for the next level.
//!
//! `USequence` holds the under-approximating sequence: concrete reached
//! states per level, each with the parent and the input vector that drove
//! the transition into it, so counterexamples replay exactly.

use crate::encode::Encoding;
use crate::lits::{subsumes, Cube, Lit, LitSet, Var};
use crate::sat::{SolveResult, Solver};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockOutcome {
    /// Stored in frame `level`.
    Added,
    /// Stored in the pending frame (`level == len`).
    AddedToTmp,
    /// An existing cube already subsumes the new one.
    Subsumed,
}

pub struct OFrames {
    frames: Vec<Vec<Cube>>,
    o_tmp: Vec<Cube>,
    seed: Cube,
}

impl OFrames {
    /// Starts with the property frame only; the pending frame is seeded.
    pub fn new(init_cube: Cube) -> Self {
        OFrames {
            frames: vec![Vec::new()],
            o_tmp: vec![init_cube.clone()],
            seed: init_cube,
        }
    }

    /// Number of frames, property frame included (so never zero).
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Stored cubes of a frame. Level 0 has none.
    pub fn cubes(&self, level: usize) -> &[Cube] {
        &self.frames[level]
    }

    pub fn tmp_cubes(&self) -> &[Cube] {
        &self.o_tmp
    }

    /// Conjoins `!uc` onto frame `level`, or onto the pending frame when
    /// `level` is one past the last. Forward-subsumed duplicates are skipped.
    pub fn block(&mut self, level: usize, uc: Cube) -> BlockOutcome {
        assert!(level >= 1, "frame 0 is the property and is never narrowed");
        assert!(level <= self.frames.len(), "level {level} out of range");
        assert!(!uc.is_empty(), "blocking the empty cube");
        let target = if level < self.frames.len() {
            &mut self.frames[level]
        } else {
            &mut self.o_tmp
        };
        let mut set = LitSet::new();
        set.fill(&uc);
        if target.iter().any(|c| subsumes(c, &set)) {
            return BlockOutcome::Subsumed;
        }
        target.push(uc);
        if level < self.frames.len() {
            BlockOutcome::Added
        } else {
            BlockOutcome::AddedToTmp
        }
    }

    /// True iff some stored cube of frame `level` is contained in the full
    /// state `s` (the seed cube covers the initial state).
    pub fn is_blocked(&self, level: usize, s: &LitSet) -> bool {
        debug_assert!(level >= 1 && level < self.frames.len());
        self.frames[level].iter().any(|c| subsumes(c, s))
    }

    /// Closes a round: the pending frame becomes the next level and a fresh
    /// seeded pending frame is started. Returns the promoted cubes.
    pub fn new_frame(&mut self) -> &[Cube] {
        let promoted = std::mem::replace(&mut self.o_tmp, vec![self.seed.clone()]);
        self.frames.push(promoted);
        self.frames.last().unwrap()
    }

    /// Drops pending cubes back to the seed (used when a restart abandons
    /// the round that collected them).
    pub fn reset_tmp(&mut self) {
        self.o_tmp = vec![self.seed.clone()];
    }

    /// Total stored literals across all levels, for memory accounting.
    pub fn total_lits(&self) -> usize {
        self.frames
            .iter()
            .chain(std::iter::once(&self.o_tmp))
            .flat_map(|f| f.iter())
            .map(|c| c.len())
            .sum()
    }

    /// Order-insensitive digest of all stored cube sets.
    pub fn fingerprint(&self) -> u64 {
        let mut acc = 0u64;
        for (lvl, frame) in self.frames.iter().enumerate() {
            for cube in frame {
                let mut h = DefaultHasher::new();
                lvl.hash(&mut h);
                let mut lits: Vec<i32> = cube.iter().map(|l| l.to_dimacs()).collect();
                lits.sort_unstable();
                lits.hash(&mut h);
                acc ^= h.finish();
            }
        }
        acc
    }

    /// DIMACS-like text dump, one section per level.
    pub fn dump(&self, w: &mut impl Write) -> io::Result<()> {
        for (lvl, frame) in self.frames.iter().enumerate() {
            writeln!(w, "c frame {lvl} ({} cubes)", frame.len())?;
            for cube in frame {
                for l in cube.iter() {
                    write!(w, "{} ", (!*l).to_dimacs())?;
                }
                writeln!(w, "0")?;
            }
        }
        writeln!(w, "c tmp ({} cubes)", self.o_tmp.len())?;
        for cube in &self.o_tmp {
            for l in cube.iter() {
                write!(w, "{} ", (!*l).to_dimacs())?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }
}

/// Least i >= 1 such that frame i+1 is contained in the union of frames
/// 0..=i, or `None`. Each containment test runs in a fresh solver: the
/// candidate frame is asserted directly, the complement of each earlier
/// cube-based frame is encoded with one selector literal per stored cube,
/// and membership in the bad region (frame 0) is decided per candidate
/// state against the transition clauses, since the bad literal may depend
/// on inputs.
pub fn invariant_check(frames: &OFrames, enc: &Encoding) -> Option<usize> {
    (1..frames.len().saturating_sub(1)).find(|&i| contained_in_union(frames, enc, i))
}

fn contained_in_union(frames: &OFrames, enc: &Encoding, i: usize) -> bool {
    let mut solver = Solver::new();
    solver.ensure_vars(enc.num_vars);
    // Assert frame i+1: the negation of each stored cube.
    for cube in frames.cubes(i + 1) {
        let clause: Vec<Lit> = cube.iter().map(|&l| !l).collect();
        solver.add_clause(&clause);
    }
    // Assert the complement of each frame 1..=i: some stored cube holds.
    for j in 1..=i {
        let mut selectors = Vec::new();
        for cube in frames.cubes(j) {
            let x = solver.new_var().positive();
            for &l in cube.iter() {
                solver.add_clause(&[!x, l]);
            }
            let mut back: Vec<Lit> = vec![x];
            back.extend(cube.iter().map(|&l| !l));
            solver.add_clause(&back);
            selectors.push(x);
        }
        solver.add_clause(&selectors);
    }
    // Membership in the bad region needs the circuit.
    let mut bad_region = Solver::new();
    bad_region.ensure_vars(enc.num_vars);
    for c in &enc.trans_clauses {
        bad_region.add_clause(c);
    }
    loop {
        match solver.solve(&[]) {
            SolveResult::Unsat { .. } => return true,
            SolveResult::Sat(m) => {
                let state = m.project(&enc.state_vars);
                let mut q: Vec<Lit> = state.0.clone();
                q.push(enc.bad_now);
                if bad_region.solve(&q).is_sat() {
                    // In frame 0 after all; exclude this state and retry.
                    let clause: Vec<Lit> = state.iter().map(|&l| !l).collect();
                    solver.add_clause(&clause);
                } else {
                    return false;
                }
            }
        }
    }
}

/// Identifier of a stored reached state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UId {
    pub level: usize,
    pub index: usize,
}

pub struct UEntry {
    pub state: Cube,
    pub parent: Option<UId>,
    /// Input vector of the transition from the parent into this state.
    pub inputs: Option<Vec<bool>>,
    /// Next-step inputs under which this state satisfies the bad literal,
    /// recorded when the state was produced by a frame-0 query.
    pub bad_inputs: Option<Vec<bool>>,
    yielded_round: u64,
}

pub struct USequence {
    levels: Vec<Vec<UEntry>>,
    round: u64,
    total: usize,
}

/// Within-level order of [`USequence::pick`]; levels are always visited
/// deepest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PickOrder {
    #[default]
    NewestFirst,
    OldestFirst,
}

impl USequence {
    pub fn new(initial: Cube) -> Self {
        USequence {
            levels: vec![vec![UEntry {
                state: initial,
                parent: None,
                inputs: None,
                bad_inputs: None,
                yielded_round: 0,
            }]],
            round: 0,
            total: 1,
        }
    }

    pub fn get(&self, id: UId) -> &UEntry {
        &self.levels[id.level][id.index]
    }

    /// Total number of stored states.
    pub fn size(&self) -> usize {
        self.total
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Stores a successor state; duplicates at the same level collapse onto
    /// the existing entry. Returns the id and whether a new entry appeared.
    pub fn add(
        &mut self,
        state: Cube,
        level: usize,
        parent: UId,
        inputs: Vec<bool>,
    ) -> (UId, bool) {
        assert!(level >= 1, "level 0 holds the initial state only");
        assert_eq!(level, parent.level + 1, "parent must sit one level below");
        if level == self.levels.len() {
            self.levels.push(Vec::new());
        }
        if let Some(index) = self.levels[level].iter().position(|e| e.state == state) {
            return (UId { level, index }, false);
        }
        // States added mid-round stay eligible for the current round.
        self.levels[level].push(UEntry {
            state,
            parent: Some(parent),
            inputs: Some(inputs),
            bad_inputs: None,
            yielded_round: 0,
        });
        self.total += 1;
        (UId { level, index: self.levels[level].len() - 1 }, true)
    }

    pub fn set_bad_inputs(&mut self, id: UId, inputs: Vec<bool>) {
        self.levels[id.level][id.index].bad_inputs = Some(inputs);
    }

    /// Opens a new enumeration round: every state currently stored (and any
    /// state added during the round) becomes eligible once.
    pub fn begin_round(&mut self) {
        self.round += 1;
    }

    /// Yields the next state of the round: deepest level first, then by
    /// `order` within the level. `None` ends the round.
    pub fn pick(&mut self, order: PickOrder) -> Option<UId> {
        for level in (0..self.levels.len()).rev() {
            let len = self.levels[level].len();
            let found = match order {
                PickOrder::NewestFirst => (0..len)
                    .rev()
                    .find(|&k| self.levels[level][k].yielded_round < self.round),
                PickOrder::OldestFirst => {
                    (0..len).find(|&k| self.levels[level][k].yielded_round < self.round)
                }
            };
            if let Some(index) = found {
                self.levels[level][index].yielded_round = self.round;
                return Some(UId { level, index });
            }
        }
        None
    }

    /// Drops everything above level 0; the restart keeps only the initial
    /// state.
    pub fn reset_to_initial(&mut self) {
        self.levels.truncate(1);
        self.levels[0][0].yielded_round = 0;
        self.total = 1;
    }

    /// Walks parents back to the initial state, returning ids from the root
    /// to `id`.
    pub fn chain_to_root(&self, id: UId) -> Vec<UId> {
        let mut chain = vec![id];
        let mut cur = id;
        while let Some(p) = self.get(cur).parent {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        chain
    }

    pub fn entries(&self) -> impl Iterator<Item = (UId, &UEntry)> {
        self.levels.iter().enumerate().flat_map(|(level, es)| {
            es.iter()
                .enumerate()
                .map(move |(index, e)| (UId { level, index }, e))
        })
    }
}

/// Bit view of a full state cube, ordered like `state_vars`.
pub fn state_bits(state: &Cube, state_vars: &[Var]) -> Vec<bool> {
    debug_assert_eq!(state.len(), state_vars.len());
    state_vars
        .iter()
        .map(|&v| {
            let lit = state
                .iter()
                .find(|l| l.var() == v)
                .expect("state cube missing a variable");
            !lit.is_neg()
        })
        .collect()
}
