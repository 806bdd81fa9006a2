pub mod bisim;
pub mod equations;
pub mod gsos;
pub mod ruloid;
pub mod syntax;
pub mod term;
pub mod tss;

pub use bisim::{check, Bounds, Notion, Verdict};
pub use ruloid::{Hypothesis, Lts, Ruloid, Semantics};
pub use syntax::{parse_term, ParseError, SpecDocument};
pub use term::{canonical_rename, enumerate_closed_terms, Equation, Label, Name, Signature, Substitution, Term};
pub use tss::{Layer, Rule, Transition, Tss};
