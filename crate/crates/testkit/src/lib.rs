//! Test support for the toolkit: deliberately naive reference
//! implementations of the whole memory-based pipeline and the quality
//! measures, plus dataset generators and deep-equality helpers.
//!
//! The reference code works on hash/tree maps keyed by entity code and
//! plain nested loops. It shares no data structures or traversal code with
//! the production path; only the split membership (which entities were
//! drawn as test entities) is copied from a built model, since sampling
//! itself is checked by determinism tests.

pub mod checks;
pub mod compare;
pub mod gen;
pub mod reference;
