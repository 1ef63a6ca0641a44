//! Detection, reversible masking, synthetic data and evaluation for
//! privacy-preserving use of hosted language models on legal prompts.

pub mod chat;
pub mod detection;
pub mod error;
pub mod eval;
pub mod label;
pub mod masking;
pub mod mention;
pub mod synthgen;

pub use error::{Error, Result};
pub use label::{canonical_label, EntityLabel, UnknownLabelPolicy};
pub use mention::{EntityMention, Source, Span};
