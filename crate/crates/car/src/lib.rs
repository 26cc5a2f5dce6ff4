//! SAT-based safety model checking for AIGER circuits.
//!
//! The checker performs backward reachability analysis: it maintains an
//! over-approximating sequence of frames growing from the negated property
//! and an under-approximating sequence of concrete states growing from the
//! initial state, and narrows the frames with unsatisfiable cores obtained
//! from an incremental SAT solver. The order in which state literals are
//! passed to the solver as assumptions is configurable (`reorder`), and a
//! hybrid mode switches orderings at runtime via restarts.

pub mod aig;
pub mod dimacs;
pub mod encode;
pub mod engine;
pub mod frames;
pub mod lits;
pub mod metrics;
pub mod reorder;
pub mod sat;
pub mod testkit;
pub mod witness;

pub use aig::AigModel;
pub use engine::{
    check, hybrid_check, Budget, CheckError, CheckOptions, Checker, HybridConfig, HybridOptions,
    StopReason, Verdict,
};
pub use lits::{Clause, Cube, Lit, Var};
pub use reorder::{OrderingConfig, Strategy};
