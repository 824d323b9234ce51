//! Witt invariants of etale algebras, Welschinger-Witt invariants built from
//! tables of Welschinger numbers, and quadratically enriched floor-diagram counts.

pub mod cli;
pub mod error;
pub mod floor;
pub mod invariants;
pub mod reference;
pub mod welschinger;
pub mod witt;

pub use error::Error;
