//! A workbench for the semantics of recursion in basic process algebra.
//!
//! * [`syntax`]: terms, recursive specifications, parsing and flattening.
//! * [`lts`]: process graphs modulo strong bisimilarity, the semantic domain.
//! * [`operational`]: SOS-derived graphs of terms under a valuation.
//! * [`denotational`]: compositional interpretation and bounded unfolding.
//! * [`algebraic`]: guardedness, compatible valuations and equation checking.

pub mod algebraic;
pub mod denotational;
pub mod lts;
pub mod operational;
pub mod syntax;

pub use algebraic::Valuation;
pub use lts::{bisimilar, is_bisimilar, Bisimilarity, ProcessGraph, Target, Universe};
pub use syntax::{Action, Equation, RecSpec, Term};
