//! Trees, dendroidal presheaves, and their C*-algebraic drawings.
//!
//! The crate implements, at desk scale:
//!
//! - the category of non-planar rooted trees with its face and degeneracy
//!   calculus ([`tree`], [`morphism`], [`identities`]);
//! - unital *-algebra presentations attached to trees, with induced
//!   homomorphisms and mechanical relation checking ([`dendrex`]);
//! - finite truncations of dendroidal sets: representables, boundaries,
//!   inner horns, normality tests, categories of elements ([`presheaf`]);
//! - drawings: diagrams of presentations indexed by a presheaf's category
//!   of elements, plus restricted homomorphism probes ([`drawing`]);
//! - Cuntz-Krieger presentations of finite directed graphs and exact
//!   rational matrix verification of the simplex/matrix zigzag
//!   ([`graphalg`]).

pub mod dendrex;
pub mod drawing;
pub mod error;
pub mod graphalg;
pub mod identities;
pub mod morphism;
pub mod presheaf;
pub mod tree;

pub use error::{Error, Result};
pub use tree::Tree;
