//! Transformational grammar engine and research harness.
//!
//! Sentences are kept as deep-structure [`syntax::Clause`] values from the
//! moment they are generated. The ten transformation operators in
//! [`transforms`] rewrite clauses, never strings, and [`syntax::render`]
//! produces the surface form. On top of that sit the deterministic corpus
//! generator ([`datasetgen`]) and the scoring harness ([`evalharness`]).

pub mod datasetgen;
pub mod evalharness;
pub mod lexicon;
pub mod rng;
pub mod syntax;
pub mod transforms;

pub use lexicon::{Category, Lexeme, Lexicon, LexiconError};
pub use syntax::{render, Clause, SurfaceSentence};
pub use transforms::{apply_rule, applicable, compose, CompositionResult, TransformId};

/// Version string written into dataset headers and run manifests.
pub const GENERATOR_VERSION: &str = concat!("tgforge ", env!("CARGO_PKG_VERSION"));
