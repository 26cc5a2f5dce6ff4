//! Variables, literals, cubes and clauses.
//!
//! A literal packs a variable index and a sign into one word, DIMACS-style:
//! `code = var << 1 | sign` with sign 1 meaning negated. A [`Cube`] is an
//! ordered conjunction of literals (states, cores), a [`Clause`] an ordered
//! disjunction (blocking clauses). Order is significant: cubes double as
//! assumption vectors for the SAT solver.

use std::fmt;
use std::ops::{Deref, Not};

/// A propositional variable. Index 0 is reserved and never used.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The positive literal of this variable.
    pub fn positive(self) -> Lit {
        Lit::new(self, false)
    }

    /// The negative literal of this variable.
    pub fn negative(self) -> Lit {
        Lit::new(self, true)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A signed literal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(var.0 << 1 | negated as u32)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    /// Dense index usable for watch lists and marker tables.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_dimacs(n: i32) -> Lit {
        debug_assert!(n != 0);
        Lit::new(Var(n.unsigned_abs()), n < 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = (self.0 >> 1) as i32;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

macro_rules! lit_seq {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq, Hash, Default)]
        pub struct $name(pub Vec<Lit>);

        impl $name {
            pub fn new() -> Self {
                Self(Vec::new())
            }

            pub fn push(&mut self, lit: Lit) {
                self.0.push(lit);
            }

            /// Builds from DIMACS-style signed integers, mainly for tests.
            pub fn from_dimacs(lits: &[i32]) -> Self {
                Self(lits.iter().map(|&n| Lit::from_dimacs(n)).collect())
            }
        }

        impl Deref for $name {
            type Target = [Lit];
            fn deref(&self) -> &[Lit] {
                &self.0
            }
        }

        impl From<Vec<Lit>> for $name {
            fn from(lits: Vec<Lit>) -> Self {
                Self(lits)
            }
        }

        impl FromIterator<Lit> for $name {
            fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
                Self(iter.into_iter().collect())
            }
        }

        impl IntoIterator for $name {
            type Item = Lit;
            type IntoIter = std::vec::IntoIter<Lit>;
            fn into_iter(self) -> Self::IntoIter {
                self.0.into_iter()
            }
        }

        impl<'a> IntoIterator for &'a $name {
            type Item = &'a Lit;
            type IntoIter = std::slice::Iter<'a, Lit>;
            fn into_iter(self) -> Self::IntoIter {
                self.0.iter()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (i, lit) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", lit)?;
                }
                write!(f, ")")
            }
        }
    };
}

lit_seq!(Cube, "An ordered conjunction of literals.");
lit_seq!(Clause, "An ordered disjunction of literals.");

impl Not for &Cube {
    type Output = Clause;
    fn not(self) -> Clause {
        Clause(self.0.iter().map(|&l| !l).collect())
    }
}

impl Not for &Clause {
    type Output = Cube;
    fn not(self) -> Cube {
        Cube(self.0.iter().map(|&l| !l).collect())
    }
}

/// Literal membership mask, reusable across queries on cubes over the same
/// variable range.
pub struct LitSet {
    marks: Vec<bool>,
    touched: Vec<Lit>,
}

impl LitSet {
    pub fn new() -> Self {
        LitSet {
            marks: Vec::new(),
            touched: Vec::new(),
        }
    }

    pub fn insert(&mut self, lit: Lit) {
        let code = lit.code();
        if code >= self.marks.len() {
            self.marks.resize(code + 1, false);
        }
        if !self.marks[code] {
            self.marks[code] = true;
            self.touched.push(lit);
        }
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.marks.get(lit.code()).copied().unwrap_or(false)
    }

    pub fn clear(&mut self) {
        for lit in self.touched.drain(..) {
            self.marks[lit.code()] = false;
        }
    }

    pub fn fill(&mut self, lits: &[Lit]) {
        self.clear();
        for &lit in lits {
            self.insert(lit);
        }
    }
}

impl Default for LitSet {
    fn default() -> Self {
        Self::new()
    }
}

/// True iff every literal of `sub` occurs in `sup_set`.
pub fn subsumes(sub: &[Lit], sup_set: &LitSet) -> bool {
    sub.iter().all(|&l| sup_set.contains(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lit_roundtrip() {
        let l = Lit::from_dimacs(-7);
        assert_eq!(l.var(), Var(7));
        assert!(l.is_neg());
        assert_eq!(l.to_dimacs(), -7);
        assert_eq!((!l).to_dimacs(), 7);
        assert_eq!(!!l, l);
    }

    #[test]
    fn cube_negation_is_clause() {
        let c = Cube::from_dimacs(&[1, -2]);
        let cl = !&c;
        assert_eq!(cl, Clause::from_dimacs(&[-1, 2]));
        assert_eq!(!&cl, c);
    }

    #[test]
    fn litset_reuse() {
        let mut set = LitSet::new();
        set.fill(&Cube::from_dimacs(&[3, -1]));
        assert!(set.contains(Lit::from_dimacs(3)));
        assert!(!set.contains(Lit::from_dimacs(-3)));
        assert!(subsumes(&Cube::from_dimacs(&[-1]), &set));
        set.fill(&Cube::from_dimacs(&[2]));
        assert!(!set.contains(Lit::from_dimacs(3)));
    }
}
