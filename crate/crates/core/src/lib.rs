//! Decision procedures and witness constructions for specification-type and
//! stroboscopical properties of generalized shifts and Fort-space systems.

pub mod catalog;
pub mod error;
pub mod fort;
pub mod index_maps;
pub mod oracle;
pub mod shift;
pub mod specification;
pub mod strobo;

pub use catalog::{builtin, builtins, classify, Builtin, Classification, System};
pub use error::{Error, Result};
pub use fort::{FortSystem, FortWindow};
pub use index_maps::{idx, Budget, Certificate, Decision, FunctionalMap, Index, IndexSet, Verdict};
pub use shift::{Alphabet, Configuration, Symbol, Window};
pub use specification::SpecInstance;
pub use strobo::{RhoMap, SequenceSpec};
