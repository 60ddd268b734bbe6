//! Generic term traversal with first-class strategies.
//!
//! The building blocks, bottom up:
//!
//! - [`signature`] / [`term`]: many-sorted signatures and well-sorted terms.
//! - [`effects`]: the total / partial / nondeterministic effect spectrum and
//!   monoids for type-unifying collection.
//! - [`strategy`]: type-preserving ([`TP`]) and type-unifying ([`TU`])
//!   strategies, their combinators, and `adhoc` type-based dispatch.
//! - [`onelayer`]: the one-layer fold [`hfoldr`] and the `all` / `one`
//!   combinators defined on top of it.
//! - [`schemes`]: recursive traversal schemes (`full_td`, `once_bu`,
//!   `stop_td`, ...), environment-propagating variants, and path schemes
//!   (`below`, `above`, `belowlist`, ...).
//! - [`rules`]: sort-annotated rewrite rules compiled into monomorphic
//!   updates.
//! - [`dsl`]: a small textual strategy language that elaborates into the
//!   combinators above.
//! - [`gen`]: random well-sorted term generation for testing.

pub mod dsl;
pub mod effects;
pub mod error;
pub mod gen;
pub mod onelayer;
pub mod rules;
pub mod schemes;
pub mod sexpr;
pub mod signature;
pub mod strategy;
pub mod term;
pub mod value;

pub use effects::{Eff, EffectKind, Monoid};
pub use error::{Error, Result};
pub use signature::{load_signature, Signature, SortName};
pub use strategy::{MonoTp, MonoTu, TP, TU};
pub use term::{parse_term, print_term, Prim, Term};
pub use value::Value;
