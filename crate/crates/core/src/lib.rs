//! Relational color refinement (RCR) on finite relational structures.
//!
//! RCR colors the tuples of a structure instead of its elements. Two
//! structures get the same color histograms exactly when they agree on the
//! number of homomorphisms from every acyclic structure, when Duplicator wins
//! the guarded counting game, and when they satisfy the same sentences of
//! guarded logic with counting quantifiers. This crate implements RCR and each
//! of those characterizations so they can be checked against one another.
//!
//! ```
//! use relcr::parse::parse_structure;
//! use relcr::rcr::rcr_distinguishes;
//!
//! let a = parse_structure("signature: E/2\nE(1,2)\nE(2,3)\nE(3,1)\n", false).unwrap();
//! let b = parse_structure("signature: E/2\nE(1,2)\nE(2,1)\nE(3,3)\n", false).unwrap();
//! assert!(rcr_distinguishes(&a, &b).unwrap().is_some());
//! ```

pub mod acyclic;
pub mod cr;
pub mod game;
pub mod gen;
pub mod homcount;
pub mod logic;
pub mod multigraph;
pub mod parse;
pub mod rcr;
pub mod representations;
pub mod slices;
pub mod structure;
pub mod types;

pub use rcr::{rcr_distinguishes, rcr_run, ColorId, JointRun, RcrRun};
pub use structure::{Elem, RelId, Signature, Structure, StructureBuilder, TupId};
pub use types::SimType;
