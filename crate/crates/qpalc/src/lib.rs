//! Model checking for quantified public announcement logics with common
//! knowledge over finite multi-agent S5 models, together with a compiler from
//! tiling instances to grid-forcing formulas and builders for the associated
//! grid models.
//!
//! The crate is organized along the pipeline:
//!
//! - [`kripke`]: finite S5 models as partitions, restriction, closures.
//! - [`formula`]: shared abstract syntax, parser, printer, fragments.
//! - [`bisim`]: coarsest bisimulation, the finite quantifier domains, and
//!   characteristic formula synthesis.
//! - [`semantics`]: the checker itself, including the three announcement
//!   quantifiers and witness extraction.
//! - [`tiling`]: tiling instances, the reduction compiler, grid fixtures.

pub mod bisim;
pub mod formula;
pub mod kripke;
pub mod semantics;
pub mod tiling;

pub use formula::{parse, Formula, Fragment};
pub use kripke::{AgentId, Model, ModelBuilder, PropId, StateSet};
pub use semantics::{CheckContext, CheckError, Witness};
