pub mod bounds;
pub mod digraph;
pub mod error;
pub mod experiments;
pub mod normal_form;
pub mod partition;
pub mod rng;
pub mod subwords;
pub mod walk;

pub use error::{Error, Result};
pub use normal_form::{BlockStats, FreeWord, Letter, ReducedWord, Variant};
pub use partition::{MSequence, Omega, SequenceKind, TailPolicy, Term};
