//! Analysis of term rewriting systems: rewriting, overlaps, forward closure,
//! the Lynch-Morawska conditions and Minsky-machine cap encodings.

pub mod cap;
pub mod closure;
pub mod consequences;
pub mod corpus;
pub mod enumerate;
pub mod error;
pub mod lm;
pub mod lpo;
pub mod minsky;
pub mod overlap;
pub mod parse;
pub mod render;
pub mod rewrite;
pub mod subst;
pub mod term;

pub use error::{Error, Result};
pub use rewrite::{odp, RewriteStep, Rule, Trace, Trs, DEFAULT_FUEL};
pub use subst::{match_term, mgu, Substitution};
pub use term::{Name, Position, Signature, Symbol, Term};
